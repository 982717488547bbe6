#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "gmc/corpus.hpp"

namespace gmc {

/// Sparse n-gram -> weight maps, one per n in 1..n_max. Zero weights are
/// never stored.
struct TfIdfVector {
    std::vector<std::unordered_map<std::string, double>> level; // index n-1
};

struct MetricReport {
    std::map<int, double> bleu; // N in 1..4 -> BLEU@N
    double rouge_l = 0.0;
    double cider = 0.0;
};

/// Per level n: weight(g) = (count(g) / total n-grams of the sentence at
/// level n) * ln(num_videos / df(g)), with unseen n-grams given df = 1.
TfIdfVector tfidf(const std::vector<std::string>& tokens, const DfTable& df);

/// 10 * (1/n_max) * sum_n (1/m) * sum_j cos(g^n(candidate), g^n(ref_j));
/// a cosine with a zero-norm side contributes 0. Empty reference list is an
/// error.
double cider(const std::vector<std::string>& candidate,
             const std::vector<std::vector<std::string>>& references, const DfTable& df);

/// Clipped n-gram precision with brevity penalty, geometric mean over
/// n = 1..N for each N in 1..max_n. No smoothing: any zero clipped precision
/// zeroes BLEU@N. Reference length uses the closest-to-candidate rule, ties
/// resolved toward the shorter reference.
std::map<int, double> bleu(const std::vector<std::string>& candidate,
                           const std::vector<std::vector<std::string>>& references,
                           int max_n = 4);

/// Longest-common-subsequence F-measure with beta^2 = 1.2, maximized over
/// references. Empty candidate scores 0.
double rouge_l(const std::vector<std::string>& candidate,
               const std::vector<std::vector<std::string>>& references);

MetricReport evaluate_caption(const std::vector<std::string>& candidate,
                              const std::vector<std::vector<std::string>>& references,
                              const DfTable& df);

} // namespace gmc
