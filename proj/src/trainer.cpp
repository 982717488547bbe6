#include "gmc/trainer.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include "gmc/rng.hpp"
#include "gmc/version.hpp"

namespace gmc {

namespace {

nlohmann::json tensor_to_json(const ad::Tensor& t) {
    return nlohmann::json{{"shape", t.shape}, {"data", t.data}};
}

ad::Tensor tensor_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
        throw std::invalid_argument("checkpoint tensor: expected {shape, data}");
    return ad::Tensor(j["shape"].get<std::vector<std::size_t>>(),
                      j["data"].get<std::vector<double>>());
}

} // namespace

nlohmann::json Checkpoint::to_json() const {
    nlohmann::json p = nlohmann::json::object(), v = nlohmann::json::object();
    for (const auto& [name, t] : params) p[name] = tensor_to_json(t);
    for (const auto& [name, t] : velocity) v[name] = tensor_to_json(t);
    return nlohmann::json{{"version", version}, {"step", step},           {"seed", seed},
                          {"config_hash", config_hash}, {"params", p}, {"velocity", v}};
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("checkpoint: expected a JSON object");
    Checkpoint ck;
    try {
        ck.version = j.at("version").get<std::string>();
        ck.step = j.at("step").get<int>();
        ck.seed = j.at("seed").get<std::uint64_t>();
        ck.config_hash = j.at("config_hash").get<std::string>();
        for (const auto& [name, t] : j.at("params").items()) ck.params[name] = tensor_from_json(t);
        for (const auto& [name, t] : j.at("velocity").items())
            ck.velocity[name] = tensor_from_json(t);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("checkpoint: ") + e.what());
    }
    return ck;
}

void Checkpoint::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write checkpoint to '" + path + "'");
    out << to_json().dump() << '\n';
    if (!out) throw std::runtime_error("failed writing checkpoint to '" + path + "'");
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open checkpoint '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("checkpoint '" + path + "': " + e.what());
    }
    return from_json(j);
}

Trainer::Trainer(TrainConfig cfg, const Corpus& corpus, const ImportedFeatures* feats)
    : cfg_(std::move(cfg)), corpus_(&corpus), feats_(feats) {
    cfg_.validate();
    if (cfg_.feature_mode == "imported" && !feats_)
        throw std::invalid_argument("feature_mode 'imported' requires a features file");
    store_.seed = cfg_.seed;
    vocab_ = Vocab::build(corpus);
    scores_ = score_corpus(corpus);
    for (std::size_t vi = 0; vi < corpus.videos.size(); ++vi)
        for (std::size_t ci = 0; ci < corpus.videos[vi].captions.size(); ++ci)
            all_pairs_.emplace_back(static_cast<int>(vi), static_cast<int>(ci));
    if (static_cast<int>(all_pairs_.size()) < cfg_.batch_size)
        throw std::invalid_argument("corpus too small: " + std::to_string(all_pairs_.size()) +
                                    " caption pairs for batch_size " +
                                    std::to_string(cfg_.batch_size));
}

std::vector<Batch> Trainer::epoch_batches(int epoch) const {
    std::vector<std::pair<int, int>> pairs = all_pairs_;
    Rng rng(mix_seed(mix_seed(cfg_.seed, 0xBA7C885Full), static_cast<std::uint64_t>(epoch)));
    rng.shuffle(pairs);
    std::size_t b = static_cast<std::size_t>(cfg_.batch_size);
    std::vector<Batch> batches;
    std::size_t i = 0;
    while (i < pairs.size()) {
        std::size_t remaining = pairs.size() - i;
        std::size_t take = remaining >= b ? b : remaining;
        // a lone leftover pair cannot form a contrastive batch; fold it into
        // the previous one so the epoch still covers every pair exactly once
        if (take == 1 && !batches.empty()) {
            const auto& [vi, ci] = pairs[i++];
            const InfoContentScore& s =
                scores_[static_cast<std::size_t>(vi)][static_cast<std::size_t>(ci)];
            batches.back().push_back({vi, ci, s.sentence_bucket, s.video_bucket});
            continue;
        }
        Batch batch;
        batch.reserve(take);
        for (std::size_t k = 0; k < take; ++k) {
            const auto& [vi, ci] = pairs[i++];
            const InfoContentScore& s =
                scores_[static_cast<std::size_t>(vi)][static_cast<std::size_t>(ci)];
            batch.push_back({vi, ci, s.sentence_bucket, s.video_bucket});
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

int Trainer::batches_per_epoch() const {
    std::size_t n = all_pairs_.size(), b = static_cast<std::size_t>(cfg_.batch_size);
    std::size_t full = n / b, rem = n % b;
    return static_cast<int>(full + (rem >= 2 ? 1 : 0));
}

Batch Trainer::batch_for_step(int step) {
    int bpe = batches_per_epoch();
    int epoch = step / bpe, idx = step % bpe;
    if (epoch != cached_epoch_) {
        cached_batches_ = epoch_batches(epoch);
        cached_epoch_ = epoch;
    }
    return cached_batches_[static_cast<std::size_t>(idx)];
}

LossReport Trainer::compute_batch(const Batch& batch, bool full_phase, bool all_terms,
                                  bool update) {
    if (batch.size() < 2) throw std::invalid_argument("train_step: batch size must be >= 2");
    ad::Tape tape;
    Binder binder{&store_, &tape};
    LossReport rep;

    bool want_b = cfg_.use_b || all_terms;
    bool want_bfcl = cfg_.use_bfcl || all_terms;
    bool want_mcl = (cfg_.use_mcl && full_phase) || all_terms;
    bool want_gen = (cfg_.use_gen && (full_phase || cfg_.warmup_includes_gen)) || all_terms;

    auto guarded = [](const char* term, auto&& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("loss term ") + term + ": " + e.what());
        }
    };

    auto [videos, texts] =
        guarded("features", [&] { return model::encode_batch(tape, binder, batch, *corpus_, cfg_, feats_); });

    auto fused = guarded("l_bfcl",
                         [&] { return model::fusion_matrix(tape, binder, cfg_, videos, texts); });
    std::size_t hits = 0;
    for (std::size_t i = 0; i < fused.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < fused[i].size(); ++j)
            if (fused[i][j].value().data[0] > fused[i][best].value().data[0]) best = j;
        if (best == i) ++hits;
    }
    rep.recall_at_1 = static_cast<double>(hits) / static_cast<double>(fused.size());

    ad::Var total = tape.constant(0.0);
    auto include = [&](ad::Var term, bool active, double& slot) {
        slot = term.value().data[0];
        if (active) total = tape.add(total, term);
    };

    if (want_b) {
        ad::Var lb = guarded("l_b", [&] {
            return loss_b(tape, binder, batch, cfg_.codebook_dim, cfg_.tau1);
        });
        include(lb, cfg_.use_b, rep.l_b);
    }
    if (want_bfcl) {
        ad::Var lf = guarded("l_bfcl", [&] { return loss_bfcl(tape, fused, cfg_.tau2); });
        include(lf, cfg_.use_bfcl, rep.l_bfcl);
    }
    if (want_mcl) {
        ad::Var lm = guarded("l_mcl", [&] {
            std::vector<std::vector<ad::Var>> cos, theta;
            model::dual_cosines(tape, videos, texts, &cos, &theta);
            std::vector<double> xi = batch_bias_angles(store_, batch, cfg_.codebook_dim);
            return loss_mcl(tape, cos, theta, xi, cfg_.tau3, cfg_.margin_orientation,
                            &rep.margins);
        });
        include(lm, cfg_.use_mcl && full_phase, rep.l_mcl);
    }
    if (want_gen) {
        ad::Var lg = guarded("l_gen", [&] {
            std::vector<std::vector<int>> ids(batch.size());
            std::size_t max_len = 1;
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const Caption& cap =
                    corpus_->videos[static_cast<std::size_t>(batch[i].video_index)]
                        .captions[static_cast<std::size_t>(batch[i].caption_index)];
                for (const auto& tok : cap.tokens) ids[i].push_back(vocab_.lookup(tok));
                max_len = std::max(max_len, ids[i].size());
            }
            std::size_t d = static_cast<std::size_t>(cfg_.feature_dim);
            ad::Var w_dec = binder.get("dec.W", {vocab_.size(), d}, Init::Uniform);
            std::size_t slots =
                std::min(max_len, static_cast<std::size_t>(cfg_.max_positions));
            std::vector<ad::Var> pos;
            pos.reserve(slots);
            for (std::size_t p = 0; p < slots; ++p)
                pos.push_back(binder.get("dec.pos." + std::to_string(p), {d}, Init::Uniform));
            return loss_gen_core(tape, videos, ids, w_dec, pos);
        });
        include(lg, cfg_.use_gen && (full_phase || cfg_.warmup_includes_gen), rep.l_gen);
    }

    // phase-inactive or ablated terms were never computed and stay recorded
    // as zero, so the total is always the sum of the active terms
    rep.l_gmc = rep.l_b + rep.l_bfcl + rep.l_mcl + rep.l_gen;

    if (update) {
        tape.backward(total);
        bool freeze_cb = full_phase && cfg_.freeze_bias_after_warmup;
        std::function<bool(const std::string&)> trainable;
        if (freeze_cb) trainable = [](const std::string& n) { return n.rfind("cb.", 0) != 0; };
        binder.apply_sgd(cfg_.learning_rate, cfg_.momentum, &velocity_, trainable);
    }
    return rep;
}

LossReport Trainer::train_step(const Batch& batch, bool full_phase) {
    return compute_batch(batch, full_phase, /*all_terms=*/false, /*update=*/true);
}

LossReport Trainer::evaluate() {
    std::vector<Batch> batches = epoch_batches(0);
    LossReport acc;
    for (const Batch& b : batches) {
        LossReport r = compute_batch(b, /*full_phase=*/true, /*all_terms=*/true, /*update=*/false);
        acc.l_b += r.l_b;
        acc.l_bfcl += r.l_bfcl;
        acc.l_mcl += r.l_mcl;
        acc.l_gen += r.l_gen;
        acc.recall_at_1 += r.recall_at_1;
    }
    double n = static_cast<double>(batches.size());
    acc.l_b /= n;
    acc.l_bfcl /= n;
    acc.l_mcl /= n;
    acc.l_gen /= n;
    acc.recall_at_1 /= n;
    acc.l_gmc = acc.l_b + acc.l_bfcl + acc.l_mcl + acc.l_gen;
    return acc;
}

RunResult Trainer::run(std::ostream* log, int max_steps) {
    RunResult rr;
    rr.initial_eval = evaluate();
    int start = step_;
    while (step_ < cfg_.total_steps && (max_steps < 0 || step_ - start < max_steps)) {
        Batch batch = batch_for_step(step_);
        bool full = step_ >= cfg_.warmup_steps;
        LossReport rep = train_step(batch, full);
        if (log && (step_ % cfg_.log_every == 0 || step_ == cfg_.total_steps - 1)) {
            nlohmann::json row{{"step", step_},       {"l_b", rep.l_b},
                               {"l_bfcl", rep.l_bfcl}, {"l_mcl", rep.l_mcl},
                               {"l_gen", rep.l_gen},   {"l_gmc", rep.l_gmc},
                               {"recall_at_1", rep.recall_at_1}};
            (*log) << row.dump() << '\n';
        }
        ++step_;
    }
    rr.steps_run = step_ - start;
    rr.final_eval = evaluate();
    rr.final_checkpoint = checkpoint();
    return rr;
}

Checkpoint Trainer::checkpoint() const {
    Checkpoint ck;
    ck.version = kVersion;
    ck.step = step_;
    ck.seed = cfg_.seed;
    ck.config_hash = cfg_.hash();
    ck.params = store_.params;
    ck.velocity = velocity_;
    return ck;
}

void Trainer::restore(const Checkpoint& ck) {
    if (ck.config_hash != cfg_.hash())
        throw std::invalid_argument("checkpoint was created with a different configuration (hash " +
                                    ck.config_hash + " != " + cfg_.hash() + ")");
    store_.params = ck.params;
    velocity_ = ck.velocity;
    step_ = ck.step;
    cached_epoch_ = -1;
    cached_batches_.clear();
}

} // namespace gmc
