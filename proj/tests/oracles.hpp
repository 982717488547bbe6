#pragma once

// Brute-force reference implementations used only by the tests. Each one
// recomputes its target quantity from raw token lists by direct enumeration,
// sharing no code or data structures with the library versions.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline std::map<std::string, int> gram_counts(const Tokens& t, int n) {
    std::map<std::string, int> m;
    if (n <= 0) return m;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= t.size(); ++i) {
        std::string g = t[i];
        for (int k = 1; k < n; ++k) g += " " + t[i + static_cast<std::size_t>(k)];
        ++m[g];
    }
    return m;
}

// document frequency by literal definition: the number of videos in which the
// n-gram occurs in at least one caption
inline std::map<std::string, int> df_level(const std::vector<std::vector<Tokens>>& videos,
                                           int n) {
    std::map<std::string, int> df;
    for (const auto& vid : videos) {
        std::set<std::string> seen;
        for (const auto& cap : vid)
            for (const auto& [g, c] : gram_counts(cap, n)) seen.insert(g);
        for (const auto& g : seen) ++df[g];
    }
    return df;
}

inline std::map<std::string, double> tfidf_level(const Tokens& sent,
                                                 const std::map<std::string, int>& df,
                                                 std::size_t num_videos, int n) {
    auto counts = gram_counts(sent, n);
    double total = 0;
    for (const auto& [g, c] : counts) total += c;
    std::map<std::string, double> w;
    if (total == 0) return w;
    for (const auto& [g, c] : counts) {
        auto it = df.find(g);
        double d = it == df.end() ? 1.0 : static_cast<double>(it->second);
        w[g] = (c / total) * std::log(static_cast<double>(num_videos) / d);
    }
    return w;
}

inline double sparse_cosine(const std::map<std::string, double>& a,
                            const std::map<std::string, double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (const auto& [g, v] : a) {
        na += v * v;
        auto it = b.find(g);
        if (it != b.end()) dot += v * it->second;
    }
    for (const auto& [g, v] : b) nb += v * v;
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double cider(const Tokens& cand, const std::vector<Tokens>& refs,
                    const std::vector<std::vector<Tokens>>& corpus_videos, int n_max = 4) {
    const std::size_t num_videos = corpus_videos.size();
    double total = 0;
    for (int n = 1; n <= n_max; ++n) {
        auto df = df_level(corpus_videos, n);
        auto gc = tfidf_level(cand, df, num_videos, n);
        double mean = 0;
        for (const auto& r : refs) mean += sparse_cosine(gc, tfidf_level(r, df, num_videos, n));
        mean /= static_cast<double>(refs.size());
        total += mean;
    }
    return 10.0 * total / static_cast<double>(n_max);
}

inline std::map<int, double> bleu(const Tokens& cand, const std::vector<Tokens>& refs,
                                  int max_n = 4) {
    std::vector<double> prec(static_cast<std::size_t>(max_n) + 1, 0.0);
    for (int n = 1; n <= max_n; ++n) {
        auto cc = gram_counts(cand, n);
        double total = 0, clipped = 0;
        for (const auto& [g, c] : cc) {
            total += c;
            int best = 0;
            for (const auto& r : refs) {
                auto rc = gram_counts(r, n);
                auto it = rc.find(g);
                if (it != rc.end()) best = std::max(best, it->second);
            }
            clipped += std::min(c, best);
        }
        if (total > 0) prec[static_cast<std::size_t>(n)] = clipped / total;
    }

    const std::size_t c_len = cand.size();
    std::size_t r_len = 0;
    long best_diff = -1;
    for (const auto& r : refs) {
        long diff = std::labs(static_cast<long>(r.size()) - static_cast<long>(c_len));
        if (best_diff < 0 || diff < best_diff || (diff == best_diff && r.size() < r_len)) {
            best_diff = diff;
            r_len = r.size();
        }
    }
    const double bp = c_len == 0 ? 0.0
                      : c_len > r_len
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(r_len) / static_cast<double>(c_len));

    std::map<int, double> out;
    for (int N = 1; N <= max_n; ++N) {
        double log_sum = 0;
        bool zero = false;
        for (int n = 1; n <= N; ++n) {
            if (prec[static_cast<std::size_t>(n)] <= 0.0) {
                zero = true;
                break;
            }
            log_sum += std::log(prec[static_cast<std::size_t>(n)]);
        }
        out[N] = (zero || c_len == 0) ? 0.0 : bp * std::exp(log_sum / N);
    }
    return out;
}

inline double rouge_l(const Tokens& cand, const std::vector<Tokens>& refs, double beta2 = 1.2) {
    if (cand.empty()) return 0.0;
    double best = 0.0;
    for (const auto& r : refs) {
        if (r.empty()) continue;
        // full O(len^2) DP table, independent of the library's rolling array
        std::vector<std::vector<int>> dp(cand.size() + 1, std::vector<int>(r.size() + 1, 0));
        for (std::size_t i = 1; i <= cand.size(); ++i)
            for (std::size_t j = 1; j <= r.size(); ++j)
                dp[i][j] = cand[i - 1] == r[j - 1] ? dp[i - 1][j - 1] + 1
                                                   : std::max(dp[i - 1][j], dp[i][j - 1]);
        const int lcs = dp[cand.size()][r.size()];
        if (lcs == 0) continue;
        const double p = static_cast<double>(lcs) / static_cast<double>(cand.size());
        const double rec = static_cast<double>(lcs) / static_cast<double>(r.size());
        best = std::max(best, (1.0 + beta2) * p * rec / (rec + beta2 * p));
    }
    return best;
}

// sum over rows of -log softmax(diagonal) at temperature tau, computed with
// an explicit max shift
inline double info_nce(const std::vector<std::vector<double>>& cos, double tau) {
    double total = 0.0;
    for (std::size_t i = 0; i < cos.size(); ++i) {
        double mx = cos[i][0] / tau;
        for (double c : cos[i]) mx = std::max(mx, c / tau);
        double denom = 0.0;
        for (double c : cos[i]) denom += std::exp(c / tau - mx);
        total += -(cos[i][i] / tau - mx - std::log(denom));
    }
    return total;
}

// Spearman rank correlation with tie-averaged (fractional) ranks
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size(), 0.0);
        std::size_t i = 0;
        while (i < idx.size()) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double num = 0, dx = 0, dy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx <= 0.0 || dy <= 0.0) return 0.0;
    return num / std::sqrt(dx * dy);
}

} // namespace oracle
