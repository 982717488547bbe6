#include "gmc/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

#include "gmc/bias.hpp"
#include "gmc/encoders.hpp"
#include "gmc/losses.hpp"
#include "gmc/rng.hpp"

namespace gmc {

namespace {

using ad::Tape;
using ad::Tensor;
using ad::Var;

// Deliberately tiny shapes: central differences cost two forward passes per
// coordinate. The third caption is longer than the position table so the
// last-slot reuse path is exercised.
constexpr int kB = 3;
constexpr int kDim = 5;
constexpr int kHidden = 4;
constexpr int kCb = 4;
constexpr int kVocab = 7;
constexpr int kPositions = 3;
const std::vector<std::vector<int>> kCaptionIds = {{0, 1}, {2, 3, 4}, {5, 6, 0, 1}};

constexpr double kTau1 = 0.2;
constexpr double kTau2 = 1.0;
constexpr double kTau3 = 0.07;

double norm_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> draw(Rng& rng, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    do {
        for (double& x : v) x = rng.uniform(-0.9, 0.9);
    } while (norm_of(v) < 1e-3);
    return v;
}

Tensor rvec(Rng& rng, int n) { return Tensor::vec(draw(rng, n)); }

Tensor rmat(Rng& rng, int r, int c) {
    return Tensor::mat(static_cast<std::size_t>(r), static_cast<std::size_t>(c),
                       draw(rng, r * c));
}

double plain_cos(const Tensor& a, const Tensor& b) {
    double num = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) num += a.data[i] * b.data[i];
    return num / (norm_of(a.data) * norm_of(b.data));
}

// Leaf layout of the encoder stage, shared by the bfcl/mcl/gmc cases. The
// cursor walks the leaf vector in the same order the point was drawn.
struct Cursor {
    const std::vector<Var>* leaves;
    std::size_t i = 0;
    Var next() { return (*leaves)[i++]; }
    std::vector<Var> take(int n) {
        std::vector<Var> out;
        for (int k = 0; k < n; ++k) out.push_back(next());
        return out;
    }
};

void draw_encoder_point(Rng& rng, std::vector<Tensor>* point) {
    for (int i = 0; i < kB; ++i) point->push_back(rvec(rng, kDim)); // video inputs
    point->push_back(rmat(rng, kDim, kDim));                        // video W
    point->push_back(rvec(rng, kDim));                              // video b
    for (int t = 0; t < kVocab; ++t) point->push_back(rvec(rng, kDim)); // token rows
    point->push_back(rmat(rng, kDim, kDim));                        // text W
    point->push_back(rvec(rng, kDim));                              // text b
}

// Mirrors the synthetic encoders: tanh(W x + b) on the video input, and
// tanh(W m + b) on the mean of the caption's token rows.
void encode_from_cursor(Tape& tape, Cursor& cur, std::vector<Var>* videos,
                        std::vector<Var>* texts) {
    std::vector<Var> vid_in = cur.take(kB);
    Var wv = cur.next(), bv = cur.next();
    std::vector<Var> toks = cur.take(kVocab);
    Var wt = cur.next(), bt = cur.next();
    for (int i = 0; i < kB; ++i)
        videos->push_back(tape.tanh_(tape.affine(wv, vid_in[static_cast<std::size_t>(i)], bv)));
    for (int i = 0; i < kB; ++i) {
        std::vector<Var> rows;
        for (int id : kCaptionIds[static_cast<std::size_t>(i)])
            rows.push_back(toks[static_cast<std::size_t>(id)]);
        Var pooled = tape.mean_rows(tape.stack_rows(rows));
        texts->push_back(tape.tanh_(tape.affine(wt, pooled, bt)));
    }
}

// Forward-only evaluation of the encoder cosines at a candidate point,
// used to reject draws that sit near the arccos clamp or a margin tie.
std::vector<std::vector<double>> encoder_cosines(const std::vector<Tensor>& point,
                                                 std::size_t offset) {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& p : point) leaves.push_back(tape.leaf(p));
    Cursor cur{&leaves, offset};
    std::vector<Var> videos, texts;
    encode_from_cursor(tape, cur, &videos, &texts);
    std::vector<std::vector<double>> c(kB, std::vector<double>(kB));
    for (int i = 0; i < kB; ++i)
        for (int j = 0; j < kB; ++j)
            c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                tape.cosine_similarity(videos[static_cast<std::size_t>(i)],
                                       texts[static_cast<std::size_t>(j)])
                    .value()
                    .data[0];
    return c;
}

bool margins_safe(const std::vector<std::vector<double>>& c, const std::vector<double>& xi) {
    const double pi = std::acos(-1.0);
    for (int i = 0; i < kB; ++i)
        for (int j = 0; j < kB; ++j)
            if (std::abs(c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) > 0.95)
                return false;
    for (int i = 0; i < kB; ++i) {
        double theta = std::acos(c[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)]);
        if (std::abs(xi[static_cast<std::size_t>(i)] - (pi - theta)) < 0.05) return false;
    }
    return true;
}

GradCheckCase case_b(std::uint64_t seed) {
    Rng rng(seed);
    GradCheckCase c;
    for (int i = 0; i < 2 * kB; ++i) c.point.push_back(rvec(rng, kCb));
    c.build = [](Tape& tape, std::vector<Var>& leaves) {
        std::vector<std::vector<Var>> cos(kB, std::vector<Var>(kB, Var{}));
        for (int i = 0; i < kB; ++i)
            for (int j = 0; j < kB; ++j)
                cos[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    tape.cosine_similarity(leaves[static_cast<std::size_t>(i)],
                                           leaves[static_cast<std::size_t>(kB + j)]);
        return loss_b_from_cosines(tape, cos, kTau1);
    };
    return c;
}

GradCheckCase case_bfcl(std::uint64_t seed) {
    Rng rng(seed);
    GradCheckCase c;
    draw_encoder_point(rng, &c.point);
    c.point.push_back(rmat(rng, kDim, kDim)); // Wq
    c.point.push_back(rmat(rng, kDim, kDim)); // Wk
    c.point.push_back(rmat(rng, kDim, kDim)); // Wv
    c.point.push_back(rmat(rng, kHidden, kDim));
    c.point.push_back(rvec(rng, kHidden));
    c.point.push_back(rvec(rng, kHidden));
    c.build = [](Tape& tape, std::vector<Var>& leaves) {
        Cursor cur{&leaves, 0};
        std::vector<Var> videos, texts;
        encode_from_cursor(tape, cur, &videos, &texts);
        Var wq = cur.next(), wk = cur.next(), wv = cur.next();
        Var w1 = cur.next(), b1 = cur.next(), w2 = cur.next();
        std::vector<std::vector<Var>> fused(kB, std::vector<Var>(kB, Var{}));
        for (int i = 0; i < kB; ++i)
            for (int j = 0; j < kB; ++j)
                fused[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    model::fusion_score_with(tape, videos[static_cast<std::size_t>(i)],
                                             texts[static_cast<std::size_t>(j)], wq, wk, wv, w1,
                                             b1, w2);
        return loss_bfcl(tape, fused, kTau2);
    };
    return c;
}

GradCheckCase case_mcl(std::uint64_t seed) {
    Rng rng(seed);
    for (int attempt = 0; attempt < 500; ++attempt) {
        GradCheckCase c;
        draw_encoder_point(rng, &c.point);
        std::vector<double> xi(kB);
        for (double& x : xi) x = rng.uniform(0.2, 2.9);
        if (!margins_safe(encoder_cosines(c.point, 0), xi)) continue;
        c.build = [xi](Tape& tape, std::vector<Var>& leaves) {
            Cursor cur{&leaves, 0};
            std::vector<Var> videos, texts;
            encode_from_cursor(tape, cur, &videos, &texts);
            std::vector<std::vector<Var>> cos, theta;
            model::dual_cosines(tape, videos, texts, &cos, &theta);
            return loss_mcl(tape, cos, theta, xi, kTau3, "literal");
        };
        return c;
    }
    throw std::runtime_error("gradcheck: no boundary-safe margin point found");
}

GradCheckCase case_gen(std::uint64_t seed) {
    Rng rng(seed);
    GradCheckCase c;
    for (int i = 0; i < kB; ++i) c.point.push_back(rvec(rng, kDim));
    c.point.push_back(rmat(rng, kDim, kDim));
    c.point.push_back(rvec(rng, kDim));
    c.point.push_back(rmat(rng, kVocab, kDim));
    for (int p = 0; p < kPositions; ++p) c.point.push_back(rvec(rng, kDim));
    c.build = [](Tape& tape, std::vector<Var>& leaves) {
        Cursor cur{&leaves, 0};
        std::vector<Var> vid_in = cur.take(kB);
        Var wv = cur.next(), bv = cur.next();
        std::vector<Var> videos;
        for (int i = 0; i < kB; ++i)
            videos.push_back(
                tape.tanh_(tape.affine(wv, vid_in[static_cast<std::size_t>(i)], bv)));
        Var wdec = cur.next();
        std::vector<Var> pos = cur.take(kPositions);
        return loss_gen_core(tape, videos, kCaptionIds, wdec, pos);
    };
    return c;
}

GradCheckCase case_gmc(std::uint64_t seed) {
    Rng rng(seed);
    for (int attempt = 0; attempt < 500; ++attempt) {
        GradCheckCase c;
        for (int i = 0; i < 2 * kB; ++i) c.point.push_back(rvec(rng, kCb)); // codebooks
        draw_encoder_point(rng, &c.point);
        c.point.push_back(rmat(rng, kDim, kDim)); // Wq
        c.point.push_back(rmat(rng, kDim, kDim)); // Wk
        c.point.push_back(rmat(rng, kDim, kDim)); // Wv
        c.point.push_back(rmat(rng, kHidden, kDim));
        c.point.push_back(rvec(rng, kHidden));
        c.point.push_back(rvec(rng, kHidden));
        c.point.push_back(rmat(rng, kVocab, kDim));
        for (int p = 0; p < kPositions; ++p) c.point.push_back(rvec(rng, kDim));

        // The margin inputs are frozen at the base point, exactly like the
        // trainer's detached bias angles: perturbing a codebook coordinate
        // must not move the margins.
        std::vector<double> xi(kB);
        bool cb_ok = true;
        for (int i = 0; i < kB; ++i) {
            double y = plain_cos(c.point[static_cast<std::size_t>(i)],
                                 c.point[static_cast<std::size_t>(kB + i)]);
            if (std::abs(y) > 0.95) cb_ok = false;
            xi[static_cast<std::size_t>(i)] = std::acos(y);
        }
        if (!cb_ok) continue;
        if (!margins_safe(encoder_cosines(c.point, 2 * kB), xi)) continue;

        c.build = [xi](Tape& tape, std::vector<Var>& leaves) {
            Cursor cur{&leaves, 0};
            std::vector<Var> cbv = cur.take(kB), cbs = cur.take(kB);
            std::vector<std::vector<Var>> cb_cos(kB, std::vector<Var>(kB, Var{}));
            for (int i = 0; i < kB; ++i)
                for (int j = 0; j < kB; ++j)
                    cb_cos[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        tape.cosine_similarity(cbv[static_cast<std::size_t>(i)],
                                               cbs[static_cast<std::size_t>(j)]);
            Var l_b = loss_b_from_cosines(tape, cb_cos, kTau1);

            std::vector<Var> videos, texts;
            encode_from_cursor(tape, cur, &videos, &texts);
            Var wq = cur.next(), wk = cur.next(), wv = cur.next();
            Var w1 = cur.next(), b1 = cur.next(), w2 = cur.next();
            std::vector<std::vector<Var>> fused(kB, std::vector<Var>(kB, Var{}));
            for (int i = 0; i < kB; ++i)
                for (int j = 0; j < kB; ++j)
                    fused[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        model::fusion_score_with(tape, videos[static_cast<std::size_t>(i)],
                                                 texts[static_cast<std::size_t>(j)], wq, wk, wv,
                                                 w1, b1, w2);
            Var l_bfcl = loss_bfcl(tape, fused, kTau2);

            std::vector<std::vector<Var>> cos, theta;
            model::dual_cosines(tape, videos, texts, &cos, &theta);
            Var l_mcl = loss_mcl(tape, cos, theta, xi, kTau3, "literal");

            Var wdec = cur.next();
            std::vector<Var> pos = cur.take(kPositions);
            Var l_gen = loss_gen_core(tape, videos, kCaptionIds, wdec, pos);

            return tape.add(tape.add(l_b, l_bfcl), tape.add(l_mcl, l_gen));
        };
        return c;
    }
    throw std::runtime_error("gradcheck: no boundary-safe composite point found");
}

} // namespace

GradCheckCase make_gradcheck_case(const std::string& loss, std::uint64_t seed) {
    if (loss == "b") return case_b(seed);
    if (loss == "bfcl") return case_bfcl(seed);
    if (loss == "mcl") return case_mcl(seed);
    if (loss == "gen") return case_gen(seed);
    if (loss == "gmc") return case_gmc(seed);
    throw std::invalid_argument("unknown loss '" + loss +
                                "' (expected b, bfcl, mcl, gen, or gmc)");
}

double gradcheck_loss(const std::string& loss, std::uint64_t seed, int points, double h) {
    if (points < 1) throw std::invalid_argument("gradcheck: points must be >= 1");
    double worst = 0.0;
    for (int p = 0; p < points; ++p) {
        GradCheckCase c = make_gradcheck_case(loss, mix_seed(seed, static_cast<std::uint64_t>(p) + 1));
        worst = std::max(worst, ad::grad_check(c.build, c.point, h));
    }
    return worst;
}

double gradcheck_all(std::uint64_t seed, int points,
                     std::vector<std::pair<std::string, double>>* per_loss, double h) {
    double worst = 0.0;
    for (const char* name : {"b", "bfcl", "mcl", "gen", "gmc"}) {
        double e = gradcheck_loss(name, mix_seed(seed, fnv1a64(name)), points, h);
        if (per_loss) per_loss->emplace_back(name, e);
        worst = std::max(worst, e);
    }
    return worst;
}

} // namespace gmc
