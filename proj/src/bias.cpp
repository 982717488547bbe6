#include "gmc/bias.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmc/metrics.hpp"

namespace gmc {

double info_score_sentence(const Corpus& corpus, int video_index, int caption_index,
                           std::string* warning) {
    if (video_index < 0 || video_index >= static_cast<int>(corpus.videos.size()))
        throw std::invalid_argument("info_score_sentence: video index out of range");
    const VideoEntry& v = corpus.videos[static_cast<std::size_t>(video_index)];
    if (caption_index < 0 || caption_index >= static_cast<int>(v.captions.size()))
        throw std::invalid_argument("info_score_sentence: caption index out of range");
    if (v.captions.size() == 1) {
        if (warning)
            *warning = "video '" + v.video_id + "' has a single caption; its information score is 0";
        return 0.0;
    }
    std::vector<std::vector<std::string>> refs;
    refs.reserve(v.captions.size() - 1);
    for (std::size_t i = 0; i < v.captions.size(); ++i)
        if (static_cast<int>(i) != caption_index) refs.push_back(v.captions[i].tokens);
    return cider(v.captions[static_cast<std::size_t>(caption_index)].tokens, refs, corpus.df);
}

double info_score_video(const Corpus& corpus, int video_index, std::string* warning) {
    if (video_index < 0 || video_index >= static_cast<int>(corpus.videos.size()))
        throw std::invalid_argument("info_score_video: video index out of range");
    const VideoEntry& v = corpus.videos[static_cast<std::size_t>(video_index)];
    double sum = 0;
    for (std::size_t ci = 0; ci < v.captions.size(); ++ci) {
        double raw = info_score_sentence(corpus, video_index, static_cast<int>(ci), warning);
        sum += sentence_bucket_of(raw) / 100.0; // two-decimal sentence score
    }
    double mean = sum / static_cast<double>(v.captions.size());
    return video_bucket_of(mean) / 10.0;
}

std::vector<std::vector<InfoContentScore>> score_corpus(const Corpus& corpus,
                                                        std::vector<std::string>* warnings) {
    std::vector<std::vector<InfoContentScore>> out(corpus.videos.size());
    for (std::size_t vi = 0; vi < corpus.videos.size(); ++vi) {
        const VideoEntry& v = corpus.videos[vi];
        std::vector<InfoContentScore> scores(v.captions.size());
        double sum = 0;
        for (std::size_t ci = 0; ci < v.captions.size(); ++ci) {
            std::string warn;
            double raw = info_score_sentence(corpus, static_cast<int>(vi), static_cast<int>(ci),
                                             warnings ? &warn : nullptr);
            if (warnings && !warn.empty() && ci == 0) warnings->push_back(warn);
            int sb = sentence_bucket_of(raw);
            scores[ci].sentence_bucket = sb;
            scores[ci].sentence_score = sb / 100.0;
            sum += sb / 100.0;
        }
        double mean = sum / static_cast<double>(v.captions.size());
        int vb = video_bucket_of(mean);
        for (auto& s : scores) {
            s.video_bucket = vb;
            s.video_score = vb / 10.0;
        }
        out[vi] = std::move(scores);
    }
    return out;
}

std::string codebook_video_name(int bucket) { return "cb.video." + std::to_string(bucket); }
std::string codebook_sentence_name(int bucket) { return "cb.sent." + std::to_string(bucket); }

namespace {

double raw_codebook_cosine(const ad::Tensor& a, const ad::Tensor& b) {
    double aa = 0, bb = 0, ab = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        aa += a.data[i] * a.data[i];
        bb += b.data[i] * b.data[i];
        ab += a.data[i] * b.data[i];
    }
    double na = std::sqrt(aa), nb = std::sqrt(bb);
    if (na < 1e-12 || nb < 1e-12)
        throw std::invalid_argument("bias_score: zero-norm codebook vector");
    return ab / (na * nb);
}

} // namespace

BiasScore bias_score(int video_bucket, int sentence_bucket, ParamStore& store, int codebook_dim) {
    std::size_t d = static_cast<std::size_t>(codebook_dim);
    const ad::Tensor& psi = store.ensure(codebook_video_name(video_bucket), {d}, Init::NonzeroUniform);
    const ad::Tensor& phi =
        store.ensure(codebook_sentence_name(sentence_bucket), {d}, Init::NonzeroUniform);
    double c = raw_codebook_cosine(psi, phi);
    BiasScore s;
    s.y_hat = std::clamp(c, -1.0 + ad::Tape::kAcosEps, 1.0 - ad::Tape::kAcosEps);
    s.xi_hat = std::acos(s.y_hat);
    return s;
}

ad::Var loss_b_from_cosines(ad::Tape& tape, const std::vector<std::vector<ad::Var>>& cos,
                            double tau1) {
    std::size_t b = cos.size();
    if (b < 2) throw std::invalid_argument("loss_b: batch size must be >= 2");
    ad::Var total = tape.constant(0.0);
    for (std::size_t i = 0; i < b; ++i) {
        if (cos[i].size() != b) throw std::invalid_argument("loss_b: cosine matrix is not square");
        ad::Var logits = tape.scale(tape.stack_scalars(cos[i]), 1.0 / tau1);
        ad::Var term = tape.sub(tape.logsumexp(logits), tape.pick(logits, i));
        total = tape.add(total, term);
    }
    return total;
}

ad::Var loss_b(ad::Tape& tape, Binder& binder, const Batch& batch, int codebook_dim, double tau1) {
    if (batch.size() < 2) throw std::invalid_argument("loss_b: batch size must be >= 2");
    std::size_t d = static_cast<std::size_t>(codebook_dim);
    std::vector<ad::Var> psi, phi;
    psi.reserve(batch.size());
    phi.reserve(batch.size());
    for (const PairItem& p : batch) {
        psi.push_back(binder.get(codebook_video_name(p.video_bucket), {d}, Init::NonzeroUniform));
        phi.push_back(binder.get(codebook_sentence_name(p.sentence_bucket), {d}, Init::NonzeroUniform));
    }
    std::vector<std::vector<ad::Var>> cos(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        cos[i].reserve(batch.size());
        for (std::size_t j = 0; j < batch.size(); ++j)
            cos[i].push_back(tape.cosine_similarity(psi[i], phi[j]));
    }
    return loss_b_from_cosines(tape, cos, tau1);
}

std::vector<double> batch_bias_angles(ParamStore& store, const Batch& batch, int codebook_dim) {
    std::vector<double> out;
    out.reserve(batch.size());
    for (const PairItem& p : batch)
        out.push_back(bias_score(p.video_bucket, p.sentence_bucket, store, codebook_dim).xi_hat);
    return out;
}

} // namespace gmc
