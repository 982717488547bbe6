#include "gmc/encoders.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gmc {

ImportedFeatures load_features(const std::string& path, int feature_dim) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open features file '" + path + "'");
    ImportedFeatures out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto bad = [&](const std::string& why) {
            return std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + why);
        };
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw bad(std::string("malformed JSON (") + e.what() + ")");
        }
        if (!row.is_object() || !row.contains("id") || !row.contains("kind") ||
            !row.contains("vector"))
            throw bad("expected object with 'id', 'kind', 'vector'");
        if (!row["id"].is_string() || !row["kind"].is_string() || !row["vector"].is_array())
            throw bad("wrong field types");
        std::vector<double> vec;
        for (const auto& x : row["vector"]) {
            if (!x.is_number()) throw bad("'vector' entries must be numbers");
            vec.push_back(x.get<double>());
        }
        if (static_cast<int>(vec.size()) != feature_dim)
            throw bad("vector length " + std::to_string(vec.size()) + " does not match feature_dim " +
                      std::to_string(feature_dim));
        std::string id = row["id"].get<std::string>();
        std::string kind = row["kind"].get<std::string>();
        if (kind == "video") {
            if (!out.video.emplace(id, std::move(vec)).second)
                throw bad("duplicate video feature for '" + id + "'");
        } else if (kind.rfind("text_", 0) == 0) {
            int ci;
            try {
                ci = std::stoi(kind.substr(5));
            } catch (const std::exception&) {
                throw bad("bad caption index in kind '" + kind + "'");
            }
            if (!out.text.emplace(ImportedFeatures::text_key(id, ci), std::move(vec)).second)
                throw bad("duplicate text feature for '" + id + "' caption " + std::to_string(ci));
        } else {
            throw bad("'kind' must be 'video' or 'text_<caption_index>'");
        }
    }
    return out;
}

namespace model {

namespace {

std::size_t dim_of(const TrainConfig& cfg) { return static_cast<std::size_t>(cfg.feature_dim); }

} // namespace

ad::Var encode_video(ad::Tape& tape, Binder& binder, const TrainConfig& cfg, const Corpus& corpus,
                     int video_index, const ImportedFeatures* feats) {
    const std::string& id = corpus.videos[static_cast<std::size_t>(video_index)].video_id;
    std::size_t d = dim_of(cfg);
    if (cfg.feature_mode == "imported") {
        if (!feats) throw std::invalid_argument("imported feature mode but no features loaded");
        auto it = feats->video.find(id);
        if (it == feats->video.end())
            throw std::invalid_argument("no imported video feature for '" + id + "'");
        return tape.leaf(ad::Tensor::vec(it->second));
    }
    ad::Var emb = binder.get("enc.vid.emb." + id, {d}, Init::NonzeroUniform);
    ad::Var w = binder.get("enc.vid.W", {d, d}, Init::WideUniform);
    ad::Var b = binder.get("enc.vid.b", {d}, Init::Uniform);
    return tape.tanh_(tape.affine(w, emb, b));
}

ad::Var encode_text(ad::Tape& tape, Binder& binder, const TrainConfig& cfg, const Corpus& corpus,
                    int video_index, int caption_index, const ImportedFeatures* feats) {
    const VideoEntry& v = corpus.videos[static_cast<std::size_t>(video_index)];
    std::size_t d = dim_of(cfg);
    if (cfg.feature_mode == "imported") {
        if (!feats) throw std::invalid_argument("imported feature mode but no features loaded");
        auto it = feats->text.find(ImportedFeatures::text_key(v.video_id, caption_index));
        if (it == feats->text.end())
            throw std::invalid_argument("no imported text feature for '" + v.video_id +
                                        "' caption " + std::to_string(caption_index));
        return tape.leaf(ad::Tensor::vec(it->second));
    }
    const Caption& cap = v.captions[static_cast<std::size_t>(caption_index)];
    std::vector<ad::Var> tok_rows;
    tok_rows.reserve(cap.tokens.size());
    for (const std::string& tok : cap.tokens)
        tok_rows.push_back(binder.get("enc.txt.tok." + tok, {d}, Init::NonzeroUniform));
    ad::Var pooled = tape.mean_rows(tape.stack_rows(tok_rows));
    ad::Var w = binder.get("enc.txt.W", {d, d}, Init::WideUniform);
    ad::Var b = binder.get("enc.txt.b", {d}, Init::Uniform);
    return tape.tanh_(tape.affine(w, pooled, b));
}

std::pair<std::vector<ad::Var>, std::vector<ad::Var>> encode_batch(ad::Tape& tape, Binder& binder,
                                                                   const Batch& batch,
                                                                   const Corpus& corpus,
                                                                   const TrainConfig& cfg,
                                                                   const ImportedFeatures* feats) {
    std::vector<ad::Var> videos, texts;
    videos.reserve(batch.size());
    texts.reserve(batch.size());
    for (const PairItem& p : batch) {
        videos.push_back(encode_video(tape, binder, cfg, corpus, p.video_index, feats));
        texts.push_back(
            encode_text(tape, binder, cfg, corpus, p.video_index, p.caption_index, feats));
    }
    return {std::move(videos), std::move(texts)};
}

ad::Var fusion_score_with(ad::Tape& tape, ad::Var video, ad::Var text, ad::Var wq, ad::Var wk,
                          ad::Var wv, ad::Var w1, ad::Var b1, ad::Var w2) {
    if (video.value().shape != text.value().shape)
        throw std::invalid_argument("fusion_score: video/text dimension mismatch");
    ad::Var x = tape.stack_rows({video, text});
    ad::Var pooled = tape.attention_pool(x, wq, wk, wv);
    ad::Var h = tape.tanh_(tape.affine(w1, pooled, b1));
    // no output bias: a constant shift is invisible to both softmax
    // directions of the fusion contrastive loss
    return tape.dot(w2, h);
}

ad::Var fusion_score(ad::Tape& tape, Binder& binder, const TrainConfig& cfg, ad::Var video,
                     ad::Var text) {
    std::size_t d = dim_of(cfg);
    std::size_t h = static_cast<std::size_t>(cfg.hidden());
    ad::Var wq = binder.get("fus.Wq", {d, d}, Init::WideUniform);
    ad::Var wk = binder.get("fus.Wk", {d, d}, Init::WideUniform);
    ad::Var wv = binder.get("fus.Wv", {d, d}, Init::WideUniform);
    ad::Var w1 = binder.get("fus.W1", {h, d}, Init::WideUniform);
    ad::Var b1 = binder.get("fus.b1", {h}, Init::Uniform);
    ad::Var w2 = binder.get("fus.w2", {h}, Init::WideUniform);
    return fusion_score_with(tape, video, text, wq, wk, wv, w1, b1, w2);
}

std::vector<std::vector<ad::Var>> fusion_matrix(ad::Tape& tape, Binder& binder,
                                                const TrainConfig& cfg,
                                                const std::vector<ad::Var>& videos,
                                                const std::vector<ad::Var>& texts) {
    if (videos.size() != texts.size())
        throw std::invalid_argument("fusion_matrix: row count mismatch");
    std::vector<std::vector<ad::Var>> out(videos.size());
    for (std::size_t i = 0; i < videos.size(); ++i) {
        out[i].reserve(texts.size());
        for (std::size_t j = 0; j < texts.size(); ++j)
            out[i].push_back(fusion_score(tape, binder, cfg, videos[i], texts[j]));
    }
    return out;
}

void dual_cosines(ad::Tape& tape, const std::vector<ad::Var>& videos,
                  const std::vector<ad::Var>& texts, std::vector<std::vector<ad::Var>>* cos_out,
                  std::vector<std::vector<ad::Var>>* theta_out) {
    if (videos.size() != texts.size())
        throw std::invalid_argument("dual_cosines: row count mismatch");
    cos_out->assign(videos.size(), {});
    theta_out->assign(videos.size(), {});
    for (std::size_t i = 0; i < videos.size(); ++i) {
        (*cos_out)[i].reserve(texts.size());
        (*theta_out)[i].reserve(texts.size());
        for (std::size_t j = 0; j < texts.size(); ++j) {
            ad::Var c = tape.cosine_similarity(videos[i], texts[j]);
            (*cos_out)[i].push_back(c);
            (*theta_out)[i].push_back(tape.acos_clamped(c));
        }
    }
}

} // namespace model

} // namespace gmc
