#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gmc/batch.hpp"
#include "gmc/bias.hpp"
#include "gmc/config.hpp"
#include "gmc/corpus.hpp"
#include "gmc/encoders.hpp"
#include "gmc/losses.hpp"
#include "gmc/params.hpp"

namespace gmc {

/// Full parameter snapshot. Together with the config (validated via its
/// hash) and the stateless batch schedule it reproduces a run bit-for-bit;
/// the recorded seed is the complete RNG state because all randomness is
/// derived from (seed, name) or (seed, epoch) mixes.
struct Checkpoint {
    std::string version;
    int step = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::map<std::string, ad::Tensor> params;
    std::map<std::string, ad::Tensor> velocity;

    nlohmann::json to_json() const;
    static Checkpoint from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);
};

struct RunResult {
    LossReport initial_eval;
    LossReport final_eval;
    Checkpoint final_checkpoint;
    int steps_run = 0;
};

/// Two-phase training: warm-up (fusion contrastive + bias extractor +,
/// by default, generation) followed by the full composite including the
/// margin loss. Batching is a seeded shuffle each epoch, derived statelessly
/// from (seed, epoch).
class Trainer {
public:
    Trainer(TrainConfig cfg, const Corpus& corpus, const ImportedFeatures* feats = nullptr);

    /// One gradient update; returns the pre-update losses (margins included
    /// when the margin loss is active, in-batch recall always).
    LossReport train_step(const Batch& batch, bool full_phase);

    /// Runs the remaining schedule, optionally writing one JSONL row per
    /// logged step ({step, l_b, l_bfcl, l_mcl, l_gen, l_gmc, recall_at_1}).
    /// max_steps >= 0 stops early after that many updates (checkpoint and
    /// resume with the same config to continue).
    RunResult run(std::ostream* log = nullptr, int max_steps = -1);

    /// Deterministic no-update pass over epoch-0 batches with every loss
    /// term computed regardless of ablation flags; returns per-term means.
    LossReport evaluate();

    Checkpoint checkpoint() const;
    void restore(const Checkpoint& ck);

    std::vector<Batch> epoch_batches(int epoch) const;
    int batches_per_epoch() const;
    Batch batch_for_step(int step);

    ParamStore& params() { return store_; }
    const TrainConfig& config() const { return cfg_; }
    const Vocab& vocab() const { return vocab_; }
    const std::vector<std::vector<InfoContentScore>>& scores() const { return scores_; }
    int step() const { return step_; }

private:
    LossReport compute_batch(const Batch& batch, bool full_phase, bool all_terms, bool update);

    TrainConfig cfg_;
    const Corpus* corpus_;
    const ImportedFeatures* feats_;
    ParamStore store_;
    std::map<std::string, ad::Tensor> velocity_;
    Vocab vocab_;
    std::vector<std::pair<int, int>> all_pairs_; // (video_index, caption_index)
    std::vector<std::vector<InfoContentScore>> scores_;
    int step_ = 0;
    int cached_epoch_ = -1;
    std::vector<Batch> cached_batches_;
};

} // namespace gmc
