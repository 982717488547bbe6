#include "gmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace gmc {

TfIdfVector tfidf(const std::vector<std::string>& tokens, const DfTable& df) {
    if (df.num_videos < 1) throw std::invalid_argument("tfidf: empty corpus");
    TfIdfVector out;
    out.level.resize(static_cast<std::size_t>(df.n_max));
    for (int n = 1; n <= df.n_max; ++n) {
        auto grams = ngrams(tokens, n);
        double total = 0;
        for (const auto& [g, c] : grams) total += c;
        if (total == 0) continue;
        for (const auto& [g, c] : grams) {
            int d = df.count(n, g);
            if (d == 0) d = 1; // unseen n-grams get the maximal idf
            double w = (c / total) * std::log(static_cast<double>(df.num_videos) / d);
            if (w != 0.0) out.level[static_cast<std::size_t>(n - 1)][g] = w;
        }
    }
    return out;
}

namespace {

double level_cosine(const std::unordered_map<std::string, double>& a,
                    const std::unordered_map<std::string, double>& b) {
    double na = 0, nb = 0, dot = 0;
    for (const auto& [g, w] : a) na += w * w;
    for (const auto& [g, w] : b) nb += w * w;
    if (na == 0 || nb == 0) return 0.0; // zero-norm convention
    for (const auto& [g, w] : a) {
        auto it = b.find(g);
        if (it != b.end()) dot += w * it->second;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace

double cider(const std::vector<std::string>& candidate,
             const std::vector<std::vector<std::string>>& references, const DfTable& df) {
    if (references.empty()) throw std::invalid_argument("cider: empty reference list");
    TfIdfVector cand = tfidf(candidate, df);
    double sum_n = 0;
    for (int n = 1; n <= df.n_max; ++n) {
        double sum_refs = 0;
        for (const auto& ref : references) {
            TfIdfVector rv = tfidf(ref, df);
            sum_refs += level_cosine(cand.level[static_cast<std::size_t>(n - 1)],
                                     rv.level[static_cast<std::size_t>(n - 1)]);
        }
        sum_n += sum_refs / static_cast<double>(references.size());
    }
    return 10.0 * sum_n / static_cast<double>(df.n_max);
}

std::map<int, double> bleu(const std::vector<std::string>& candidate,
                           const std::vector<std::vector<std::string>>& references, int max_n) {
    if (references.empty()) throw std::invalid_argument("bleu: empty reference list");
    if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");
    std::map<int, double> out;
    if (candidate.empty()) {
        for (int n = 1; n <= max_n; ++n) out[n] = 0.0;
        return out;
    }

    std::vector<double> precision(static_cast<std::size_t>(max_n), 0.0);
    for (int n = 1; n <= max_n; ++n) {
        auto cand_grams = ngrams(candidate, n);
        double total = 0, clipped = 0;
        for (const auto& [g, c] : cand_grams) total += c;
        for (const auto& [g, c] : cand_grams) {
            int best_ref = 0;
            for (const auto& ref : references) {
                auto rg = ngrams(ref, n);
                auto it = rg.find(g);
                if (it != rg.end()) best_ref = std::max(best_ref, it->second);
            }
            clipped += std::min(c, best_ref);
        }
        precision[static_cast<std::size_t>(n - 1)] = total > 0 ? clipped / total : 0.0;
    }

    // closest reference length, ties toward the shorter reference
    std::size_t c = candidate.size();
    std::size_t r = references[0].size();
    for (const auto& ref : references) {
        std::size_t len = ref.size();
        auto dist = [&](std::size_t L) {
            return L > c ? L - c : c - L;
        };
        if (dist(len) < dist(r) || (dist(len) == dist(r) && len < r)) r = len;
    }
    double bp = c >= r ? 1.0
                       : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));

    for (int n = 1; n <= max_n; ++n) {
        bool any_zero = false;
        double log_sum = 0;
        for (int k = 1; k <= n; ++k) {
            double p = precision[static_cast<std::size_t>(k - 1)];
            if (p == 0) {
                any_zero = true;
                break;
            }
            log_sum += std::log(p);
        }
        out[n] = any_zero ? 0.0 : bp * std::exp(log_sum / n);
    }
    return out;
}

namespace {

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

} // namespace

double rouge_l(const std::vector<std::string>& candidate,
               const std::vector<std::vector<std::string>>& references) {
    if (references.empty()) throw std::invalid_argument("rouge_l: empty reference list");
    if (candidate.empty()) return 0.0;
    const double beta2 = 1.2;
    double best = 0.0;
    for (const auto& ref : references) {
        if (ref.empty()) continue;
        double lcs = static_cast<double>(lcs_length(candidate, ref));
        if (lcs == 0) continue;
        double p = lcs / static_cast<double>(candidate.size());
        double r = lcs / static_cast<double>(ref.size());
        double f = (1.0 + beta2) * p * r / (r + beta2 * p);
        best = std::max(best, f);
    }
    return best;
}

MetricReport evaluate_caption(const std::vector<std::string>& candidate,
                              const std::vector<std::vector<std::string>>& references,
                              const DfTable& df) {
    MetricReport rep;
    rep.bleu = bleu(candidate, references, 4);
    rep.rouge_l = rouge_l(candidate, references);
    rep.cider = cider(candidate, references, df);
    return rep;
}

} // namespace gmc
