#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gmc/autodiff.hpp"

namespace gmc {

/// One randomized evaluation point for a named loss, paired with the graph
/// builder that reconstructs the loss from leaves at that point. Points are
/// sampled away from the non-smooth spots (arccos clamp, margin min ties),
/// so central differences are trustworthy there.
struct GradCheckCase {
    std::vector<ad::Tensor> point;
    std::function<ad::Var(ad::Tape&, std::vector<ad::Var>&)> build;
};

/// loss is one of "b", "bfcl", "mcl", "gen", "gmc".
GradCheckCase make_gradcheck_case(const std::string& loss, std::uint64_t seed);

/// Max relative error between analytic and central-difference gradients over
/// `points` seeded evaluation points of the named loss.
double gradcheck_loss(const std::string& loss, std::uint64_t seed, int points, double h = 1e-6);

/// All five losses; returns the overall max. `per_loss`, when given, receives
/// one (name, max relative error) entry per loss in a fixed order.
double gradcheck_all(std::uint64_t seed, int points,
                     std::vector<std::pair<std::string, double>>* per_loss = nullptr,
                     double h = 1e-6);

} // namespace gmc
