#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gmc/autodiff.hpp"

namespace gmc {

enum class Init {
    Uniform,        // each coordinate uniform in [-0.1, 0.1]
    NonzeroUniform, // same, redrawn until the vector norm is >= 1e-3
    WideUniform,    // uniform in [-1, 1], same redraw guard; for weights
                    // whose product chain would otherwise start so close to
                    // additive that a pairwise score carries no interaction
};

/// All trainable parameters, keyed by name. Initialization is lazy and
/// seeded per name (seed mixed with a hash of the name), so values do not
/// depend on the order in which parameters are first touched.
struct ParamStore {
    std::uint64_t seed = 1;
    std::map<std::string, ad::Tensor> params;

    ad::Tensor& ensure(const std::string& name, const std::vector<std::size_t>& shape, Init kind);
    const ad::Tensor* find(const std::string& name) const;
};

/// Per-step bridge between a ParamStore and a Tape: each parameter name is
/// bound to exactly one leaf, so parameters referenced several times in a
/// graph share a slot and accumulate gradients there.
struct Binder {
    ParamStore* store = nullptr;
    ad::Tape* tape = nullptr;
    std::map<std::string, ad::Var> bound;

    ad::Var get(const std::string& name, const std::vector<std::size_t>& shape, Init kind);

    /// Gradient-descent update on every bound parameter the predicate
    /// accepts; with momentum > 0, velocity tensors (keyed like params) are
    /// updated as v = momentum * v + g and applied in place of g.
    void apply_sgd(double lr, double momentum, std::map<std::string, ad::Tensor>* velocity,
                   const std::function<bool(const std::string&)>& trainable = nullptr);
};

} // namespace gmc
