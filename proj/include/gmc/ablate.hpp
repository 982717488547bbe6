#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gmc/config.hpp"
#include "gmc/corpus.hpp"
#include "gmc/encoders.hpp"
#include "gmc/losses.hpp"

namespace gmc {

/// One ablation configuration: which loss terms trained, and the final
/// evaluation in which every term is measured regardless of what trained
/// (so rows are directly comparable).
struct AblationRow {
    std::string name;
    bool use_bfcl = true;
    bool use_mcl = true;
    bool use_b = true;
    bool use_gen = true;
    LossReport final_eval;

    nlohmann::json to_json() const;
};

/// Trains the four standard configurations from one shared seed:
///   baseline  — generation objective only
///   -bfcl     — everything except the fusion contrastive term
///   -mcl-b    — everything except the margin loss and its bias extractor
///   full      — all four terms
/// Rows are returned in that order.
std::vector<AblationRow> run_ablation(const TrainConfig& base, const Corpus& corpus,
                                      const ImportedFeatures* feats = nullptr);

} // namespace gmc
