#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "gmc/autodiff.hpp"
#include "gmc/batch.hpp"
#include "gmc/corpus.hpp"

namespace gmc {

/// Token vocabulary for the caption decoder: id 0 is "<unk>", the rest are
/// the corpus tokens in sorted order.
struct Vocab {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, int> ids;

    static Vocab build(const Corpus& corpus);
    int lookup(const std::string& token) const;
    std::size_t size() const { return tokens.size(); }
};

/// Per-batch loss values plus the margins applied to each positive pair.
struct LossReport {
    double l_b = 0.0;
    double l_bfcl = 0.0;
    double l_mcl = 0.0;
    double l_gen = 0.0;
    double l_gmc = 0.0;
    std::vector<double> margins;
    double recall_at_1 = 0.0;
};

/// log softmax of scores[pos] at temperature tau2; the denominator runs over
/// the positive plus every in-batch negative (all entries). Always <= 0.
ad::Var norm_term(ad::Tape& tape, const std::vector<ad::Var>& scores, std::size_t pos,
                  double tau2);

/// -(1/2) * mean_i [ norm(row_i, i) + norm(col_i, i) ] over a square fused
/// score matrix: both retrieval directions read the same matrix (rows score
/// video->text, columns text->video).
ad::Var loss_bfcl(ad::Tape& tape, const std::vector<std::vector<ad::Var>>& fused, double tau2);

/// Adaptive angular margin for one positive pair. xi_hat is a frozen value
/// (never differentiated); theta is the pair's angle node. Orientation
/// "literal" uses min(xi_hat, pi - theta); "complement" uses
/// min(pi - xi_hat, pi - theta). Either way theta + margin <= pi.
ad::Var margin_node(ad::Tape& tape, double xi_hat, ad::Var theta,
                    const std::string& orientation);

/// Margin-involved contrastive loss, video->text direction, summed over
/// pairs: the positive logit is cos(theta_ii + M_ii), negatives keep their
/// raw unmargined cosines. Temperature tau3.
ad::Var loss_mcl(ad::Tape& tape, const std::vector<std::vector<ad::Var>>& cos,
                 const std::vector<std::vector<ad::Var>>& theta, const std::vector<double>& xi_hat,
                 double tau3, const std::string& orientation,
                 std::vector<double>* margins_out = nullptr);

/// Caption-generation stand-in: mean cross-entropy, over every caption
/// position in the batch, of a linear classifier reading the pair's video
/// embedding plus a learned position embedding. Captions beyond the position
/// table reuse its last entry. Empty captions contribute nothing (warning);
/// a batch with no positions at all scores 0.
ad::Var loss_gen_core(ad::Tape& tape, const std::vector<ad::Var>& video_rows,
                      const std::vector<std::vector<int>>& caption_token_ids, ad::Var w_dec,
                      const std::vector<ad::Var>& position_embeddings,
                      std::string* warning = nullptr);

} // namespace gmc
