#include "gmc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace gmc {

Vocab Vocab::build(const Corpus& corpus) {
    std::set<std::string> uniq;
    for (const auto& v : corpus.videos)
        for (const auto& c : v.captions)
            for (const auto& t : c.tokens) uniq.insert(t);
    Vocab vocab;
    vocab.tokens.reserve(uniq.size() + 1);
    vocab.tokens.push_back("<unk>");
    for (const auto& t : uniq) vocab.tokens.push_back(t);
    for (std::size_t i = 0; i < vocab.tokens.size(); ++i)
        vocab.ids.emplace(vocab.tokens[i], static_cast<int>(i));
    return vocab;
}

int Vocab::lookup(const std::string& token) const {
    auto it = ids.find(token);
    return it == ids.end() ? 0 : it->second;
}

ad::Var norm_term(ad::Tape& tape, const std::vector<ad::Var>& scores, std::size_t pos,
                  double tau2) {
    if (scores.size() < 2) throw std::invalid_argument("norm_term: need at least 2 scores");
    if (pos >= scores.size()) throw std::invalid_argument("norm_term: positive index out of range");
    ad::Var logits = tape.scale(tape.stack_scalars(scores), 1.0 / tau2);
    return tape.sub(tape.pick(logits, pos), tape.logsumexp(logits));
}

ad::Var loss_bfcl(ad::Tape& tape, const std::vector<std::vector<ad::Var>>& fused, double tau2) {
    std::size_t b = fused.size();
    if (b < 2) throw std::invalid_argument("loss_bfcl: batch size must be >= 2");
    for (const auto& row : fused)
        if (row.size() != b) throw std::invalid_argument("loss_bfcl: matrix is not square");
    ad::Var total = tape.constant(0.0);
    for (std::size_t i = 0; i < b; ++i) {
        std::vector<ad::Var> col;
        col.reserve(b);
        for (std::size_t k = 0; k < b; ++k) col.push_back(fused[k][i]);
        total = tape.add(total, tape.add(norm_term(tape, fused[i], i, tau2),
                                         norm_term(tape, col, i, tau2)));
    }
    return tape.scale(total, -0.5 / static_cast<double>(b));
}

ad::Var margin_node(ad::Tape& tape, double xi_hat, ad::Var theta,
                    const std::string& orientation) {
    const double pi = std::acos(-1.0);
    double xi_branch;
    if (orientation == "literal")
        xi_branch = xi_hat;
    else if (orientation == "complement")
        xi_branch = pi - xi_hat;
    else
        throw std::invalid_argument("margin: unknown orientation '" + orientation + "'");
    ad::Var cap = tape.sub(tape.constant(pi), theta);
    // ties hand the (zero) gradient to the frozen branch, keeping theta's
    // gradient one-sided at the switch point
    return tape.min2(tape.constant(xi_branch), cap);
}

ad::Var loss_mcl(ad::Tape& tape, const std::vector<std::vector<ad::Var>>& cos,
                 const std::vector<std::vector<ad::Var>>& theta, const std::vector<double>& xi_hat,
                 double tau3, const std::string& orientation, std::vector<double>* margins_out) {
    std::size_t b = cos.size();
    if (b < 2) throw std::invalid_argument("loss_mcl: batch size must be >= 2");
    if (theta.size() != b || xi_hat.size() != b)
        throw std::invalid_argument("loss_mcl: matrix/angle size mismatch");
    if (margins_out) margins_out->clear();
    ad::Var total = tape.constant(0.0);
    for (std::size_t i = 0; i < b; ++i) {
        if (cos[i].size() != b || theta[i].size() != b)
            throw std::invalid_argument("loss_mcl: matrix is not square");
        ad::Var m = margin_node(tape, xi_hat[i], theta[i][i], orientation);
        if (margins_out) margins_out->push_back(m.value().data[0]);
        ad::Var positive = tape.cos_(tape.add(theta[i][i], m));
        std::vector<ad::Var> row;
        row.reserve(b);
        for (std::size_t j = 0; j < b; ++j) row.push_back(j == i ? positive : cos[i][j]);
        ad::Var logits = tape.scale(tape.stack_scalars(row), 1.0 / tau3);
        total = tape.add(total, tape.sub(tape.logsumexp(logits), tape.pick(logits, i)));
    }
    return total;
}

ad::Var loss_gen_core(ad::Tape& tape, const std::vector<ad::Var>& video_rows,
                      const std::vector<std::vector<int>>& caption_token_ids, ad::Var w_dec,
                      const std::vector<ad::Var>& position_embeddings, std::string* warning) {
    if (video_rows.size() != caption_token_ids.size())
        throw std::invalid_argument("loss_gen: row/caption count mismatch");
    if (position_embeddings.empty())
        throw std::invalid_argument("loss_gen: empty position-embedding table");
    std::vector<ad::Var> terms;
    for (std::size_t i = 0; i < video_rows.size(); ++i) {
        const auto& ids = caption_token_ids[i];
        if (ids.empty()) {
            if (warning) *warning = "caption with no tokens contributes nothing to the generation loss";
            continue;
        }
        for (std::size_t p = 0; p < ids.size(); ++p) {
            std::size_t slot = std::min(p, position_embeddings.size() - 1);
            ad::Var x = tape.add(video_rows[i], position_embeddings[slot]);
            ad::Var logits = tape.matvec(w_dec, x);
            std::size_t gold = static_cast<std::size_t>(ids[p]);
            terms.push_back(tape.sub(tape.logsumexp(logits), tape.pick(logits, gold)));
        }
    }
    if (terms.empty()) {
        if (warning) *warning = "no caption positions in batch; generation loss is 0";
        return tape.constant(0.0);
    }
    return tape.mean(tape.stack_scalars(terms));
}

} // namespace gmc
