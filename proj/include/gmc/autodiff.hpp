#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <vector>

namespace gmc::ad {

/// Dense row-major f64 array. Rank 1 (vector) and rank 2 (matrix) cover all
/// uses; scalars are shape {1}.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<double> d);

    static Tensor zeros(const std::vector<std::size_t>& shape);
    static Tensor scalar(double v);
    static Tensor vec(std::vector<double> v);
    static Tensor mat(std::size_t r, std::size_t c, std::vector<double> v);

    std::size_t numel() const;
    bool is_scalar() const { return numel() == 1; }
    std::size_t rows() const;
    std::size_t cols() const;

    double& at(std::size_t i) { return data[i]; }
    double at(std::size_t i) const { return data[i]; }
    double& at2(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at2(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
};

class Tape;

/// Handle to a node on a tape.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    const Tensor& value() const;
    const Tensor& grad() const;
};

/// Reverse-mode tape. Append-only during the forward pass; `backward`
/// propagates adjoints in strict reverse node order. Each op validates
/// shapes and rejects non-finite outputs eagerly, naming the op.
class Tape {
public:
    /// Shared clamp used wherever an angle is recovered from a cosine.
    static constexpr double kAcosEps = 1e-6;

    Var leaf(Tensor value);
    Var constant(double v) { return leaf(Tensor::scalar(v)); }

    // ---- elementwise ----
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double c);
    Var add_const(Var a, double c);
    Var neg(Var a) { return scale(a, -1.0); }
    Var exp_(Var a);
    Var ln_(Var a);
    Var tanh_(Var a);
    Var cos_(Var a);
    /// arccos with input clamped to [-1+eps, 1-eps]; gradient is zero on the
    /// clamped (saturated) branch.
    Var acos_clamped(Var a, double eps = kAcosEps);

    // ---- structure ----
    Var matmul(Var a, Var b);
    Var transpose(Var a);
    Var matvec(Var m, Var v);
    Var stack_rows(const std::vector<Var>& rows);
    Var stack_scalars(const std::vector<Var>& xs);
    Var slice_row(Var m, std::size_t i);
    Var pick(Var v, std::size_t i);

    // ---- reductions ----
    Var sum(Var a);
    Var mean(Var a);
    Var mean_rows(Var m);
    Var logsumexp(Var v);
    Var softmax_rows(Var m);

    // ---- fused / composite ----
    Var dot(Var u, Var v);
    /// cos(u, v) with analytic backward; zero-norm inputs are an error.
    Var cosine_similarity(Var u, Var v);
    /// min of two scalars; gradient follows the selected argument, ties go
    /// to the first argument.
    Var min2(Var a, Var b);
    /// w (m x k) * x (k) + b (m)
    Var affine(Var w, Var x, Var b);
    /// Scaled-dot-product single-head self-attention over a short token
    /// sequence x (T x d) followed by mean pooling: returns a length-d vector.
    Var attention_pool(Var x, Var wq, Var wk, Var wv);

    /// Seeds d(loss)/d(loss) = 1 and accumulates adjoints into every node's
    /// persistent gradient. Repeated calls accumulate; zero_grad resets.
    void backward(Var loss);
    void zero_grad();

    std::size_t size() const { return nodes_.size(); }
    const Tensor& value_of(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    const Tensor& grad_of(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

private:
    friend struct Var;

    struct Node {
        Tensor value;
        Tensor grad; // persistent accumulator (survives across backward calls)
        Tensor adj;  // pass-local adjoint, rebuilt by each backward call
        std::function<void(Tape&)> back;
        const char* op = "";
    };

    // deque: growing the tape must not invalidate Tensor references handed out
    // by value()/grad() earlier in the forward pass
    std::deque<Node> nodes_;

    int push(const char* op, Tensor value);
    Tensor& adj(int id) { return nodes_[static_cast<std::size_t>(id)].adj; }
    const Tensor& val(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    void require_tape(Var v, const char* op) const;
};

/// Max relative error between analytic gradients and central finite
/// differences, over every coordinate of every input tensor. `build` must
/// construct a scalar loss from leaves created on the given tape (one leaf
/// per entry of `point`, in order). Relative error per coordinate is
/// |analytic - numeric| / max(1e-4, |analytic| + |numeric|): the absolute
/// floor keeps near-zero coordinates — where central differences carry
/// ~1e-10 of roundoff noise regardless of the true derivative — from
/// dominating the report, while any defect of 1e-8 or larger still shows.
double grad_check(const std::function<Var(Tape&, std::vector<Var>&)>& build,
                  const std::vector<Tensor>& point, double h = 1e-6);

} // namespace gmc::ad
