#include "gmc/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gmc::ad {

namespace {

std::size_t product(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

[[noreturn]] void fail(const char* op, const std::string& what) {
    throw std::invalid_argument(std::string(op) + ": " + what);
}

void check_finite(const Tensor& t, const char* op) {
    for (double x : t.data)
        if (!std::isfinite(x))
            throw std::runtime_error(std::string("non-finite value produced by op '") + op + "'");
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != product(shape))
        throw std::invalid_argument("Tensor: data length does not match shape");
}

Tensor Tensor::zeros(const std::vector<std::size_t>& shape) {
    return Tensor(shape, std::vector<double>(product(shape), 0.0));
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::vec(std::vector<double> v) {
    std::size_t n = v.size();
    return Tensor({n}, std::move(v));
}

Tensor Tensor::mat(std::size_t r, std::size_t c, std::vector<double> v) {
    return Tensor({r, c}, std::move(v));
}

std::size_t Tensor::numel() const { return product(shape); }

std::size_t Tensor::rows() const {
    if (shape.size() != 2) throw std::invalid_argument("Tensor::rows: not rank 2");
    return shape[0];
}

std::size_t Tensor::cols() const {
    if (shape.size() != 2) throw std::invalid_argument("Tensor::cols: not rank 2");
    return shape[1];
}

const Tensor& Var::value() const { return tape->value_of(id); }
const Tensor& Var::grad() const { return tape->grad_of(id); }

int Tape::push(const char* op, Tensor value) {
    check_finite(value, op);
    Node n;
    n.grad = Tensor::zeros(value.shape);
    n.adj = Tensor::zeros(value.shape);
    n.value = std::move(value);
    n.op = op;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::require_tape(Var v, const char* op) const {
    if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        fail(op, "operand does not belong to this tape");
}

Var Tape::leaf(Tensor value) {
    if (value.numel() == 0) fail("leaf", "empty tensor");
    return {this, push("leaf", std::move(value))};
}

Var Tape::add(Var a, Var b) {
    require_tape(a, "add");
    require_tape(b, "add");
    const Tensor &A = val(a.id), &B = val(b.id);
    if (A.shape != B.shape) fail("add", "shape mismatch");
    Tensor out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += B.data[i];
    int id = push("add", std::move(out));
    nodes_[id].back = [ia = a.id, ib = b.id, id](Tape& t) {
        const Tensor& g = t.adj(id);
        Tensor &ga = t.adj(ia), &gb = t.adj(ib);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    };
    return {this, id};
}

Var Tape::sub(Var a, Var b) {
    require_tape(a, "sub");
    require_tape(b, "sub");
    const Tensor &A = val(a.id), &B = val(b.id);
    if (A.shape != B.shape) fail("sub", "shape mismatch");
    Tensor out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= B.data[i];
    int id = push("sub", std::move(out));
    nodes_[id].back = [ia = a.id, ib = b.id, id](Tape& t) {
        const Tensor& g = t.adj(id);
        Tensor &ga = t.adj(ia), &gb = t.adj(ib);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] -= g.data[i];
        }
    };
    return {this, id};
}

Var Tape::mul(Var a, Var b) {
    require_tape(a, "mul");
    require_tape(b, "mul");
    const Tensor &A = val(a.id), &B = val(b.id);
    if (A.shape != B.shape) fail("mul", "shape mismatch");
    Tensor out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= B.data[i];
    int id = push("mul", std::move(out));
    nodes_[id].back = [ia = a.id, ib = b.id, id](Tape& t) {
        const Tensor& g = t.adj(id);
        const Tensor &A2 = t.val(ia), &B2 = t.val(ib);
        Tensor &ga = t.adj(ia), &gb = t.adj(ib);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            ga.data[i] += g.data[i] * B2.data[i];
            gb.data[i] += g.data[i] * A2.data[i];
        }
    };
    return {this, id};
}

Var Tape::scale(Var a, double c) {
    require_tape(a, "scale");
    Tensor out = val(a.id);
    for (double& x : out.data) x *= c;
    int id = push("scale", std::move(out));
    nodes_[id].back = [ia = a.id, id, c](Tape& t) {
        const Tensor& g = t.adj(id);
        Tensor& ga = t.adj(ia);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += c * g.data[i];
    };
    return {this, id};
}

Var Tape::add_const(Var a, double c) {
    require_tape(a, "add_const");
    Tensor out = val(a.id);
    for (double& x : out.data) x += c;
    int id = push("add_const", std::move(out));
    nodes_[id].back = [ia = a.id, id](Tape& t) {
        const Tensor& g = t.adj(id);
        Tensor& ga = t.adj(ia);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
    };
    return {this, id};
}

Var Tape::exp_(Var a) {
    require_tape(a, "exp");
    Tensor out = val(a.id);
    for (double& x : out.data) x = std::exp(x);
    int id = push("exp", std::move(out));
    nodes_[id].back = [ia = a.id, id](Tape& t) {
        const Tensor& g = t.adj(id);
        const Tensor& o = t.val(id);
        Tensor& ga = t.adj(ia);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * o.data[i];
    };
    return {this, id};
}

Var Tape::ln_(Var a) {
    require_tape(a, "ln");
    Tensor out = val(a.id);
    for (double& x : out.data) x = std::log(x);
    int id = push("ln", std::move(out));
    nodes_[id].back = [ia = a.id, id](Tape& t) {
        const Tensor& g = t.adj(id);
        const Tensor& x = t.val(ia);
        Tensor& ga = t.adj(ia);
        for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] / x.data[i];
    };
    return {this, id};
}

Var Tape::tanh_(Var a) {
    require_tape(a, "tanh");
    Tensor out = val(a.id);
    for (double& x : out.data) x = std::tanh(x);
    int id = push("tanh", std::move(out));
    nodes_[id].back = [ia = a.id, id](Tape& t) {
        const Tensor& g = t.adj(id);
        const Tensor& o = t.val(id);
        Tensor& ga = t.adj(ia);
        for (std::size_t i = 0; i < g.data.size(); ++i)
            ga.data[i] += g.data[i] * (1.0 - o.data[i] * o.data[i]);
    };
    return {this, id};
}

Var Tape::cos_(Var a) {
    require_tape(a, "cos");
    Tensor out = val(a.id);
    for (double& x : out.data) x = std::cos(x);
    int id = push("cos", std::move(out));
    nodes_[id].back = [ia = a.id, id](Tape& t) {
        const Tensor& g = t.adj(id);
        const Tensor& x = t.val(ia);
        Tensor& ga = t.adj(ia);
        for (std::size_t i = 0; i < g.data.size(); ++i)
            ga.data[i] += -g.data[i] * std::sin(x.data[i]);
    };
    return {this, id};
}

Var Tape::acos_clamped(Var a, double eps) {
    require_tape(a, "acos");
    const Tensor& A = val(a.id);
    Tensor out = A;
    std::vector<char> saturated(A.data.size(), 0);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        double x = out.data[i];
        double cl = std::clamp(x, -1.0 + eps, 1.0 - eps);
        saturated[i] = (x != cl) ? 1 : 0;
        out.data[i] = std::acos(cl);
    }
    int id = push("acos", std::move(out));
    nodes_[id].back = [ia = a.id, id, sat = std::move(saturated)](Tape& t) {
        const Tensor& g = t.adj(id);
        const Tensor& o = t.val(id);
        Tensor& ga = t.adj(ia);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            if (sat[i]) continue;
            double s = std::sin(o.data[i]); // sqrt(1 - x^2), recovered from the angle
            ga.data[i] += -g.data[i] / s;
        }
    };
    return {this, id};
}

Var Tape::matmul(Var a, Var b) {
    require_tape(a, "matmul");
    require_tape(b, "matmul");
    const Tensor &A = val(a.id), &B = val(b.id);
    if (A.shape.size() != 2 || B.shape.size() != 2 || A.cols() != B.rows())
        fail("matmul", "shape mismatch");
    std::size_t m = A.rows(), k = A.cols(), n = B.cols();
    Tensor out = Tensor::zeros({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            double av = A.at2(i, p);
            for (std::size_t j = 0; j < n; ++j) out.at2(i, j) += av * B.at2(p, j);
        }
    int id = push("matmul", std::move(out));
    nodes_[id].back = [ia = a.id, ib = b.id, id](Tape& t) {
        const Tensor& g = t.adj(id);
        const Tensor &A2 = t.val(ia), &B2 = t.val(ib);
        Tensor &ga = t.adj(ia), &gb = t.adj(ib);
        std::size_t m2 = A2.rows(), k2 = A2.cols(), n2 = B2.cols();
        for (std::size_t i = 0; i < m2; ++i)
            for (std::size_t j = 0; j < n2; ++j) {
                double gv = g.at2(i, j);
                for (std::size_t p = 0; p < k2; ++p) {
                    ga.at2(i, p) += gv * B2.at2(p, j);
                    gb.at2(p, j) += gv * A2.at2(i, p);
                }
            }
    };
    return {this, id};
}

Var Tape::transpose(Var a) {
    require_tape(a, "transpose");
    const Tensor& A = val(a.id);
    if (A.shape.size() != 2) fail("transpose", "not rank 2");
    std::size_t m = A.rows(), n = A.cols();
    Tensor out = Tensor::zeros({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at2(j, i) = A.at2(i, j);
    int id = push("transpose", std::move(out));
    nodes_[id].back = [ia = a.id, id](Tape& t) {
        const Tensor& g = t.adj(id);
        Tensor& ga = t.adj(ia);
        std::size_t n2 = g.rows(), m2 = g.cols();
        for (std::size_t j = 0; j < n2; ++j)
            for (std::size_t i = 0; i < m2; ++i) ga.at2(i, j) += g.at2(j, i);
    };
    return {this, id};
}

Var Tape::matvec(Var m, Var v) {
    require_tape(m, "matvec");
    require_tape(v, "matvec");
    const Tensor &M = val(m.id), &x = val(v.id);
    if (M.shape.size() != 2 || x.shape.size() != 1 || M.cols() != x.data.size())
        fail("matvec", "shape mismatch");
    std::size_t r = M.rows(), c = M.cols();
    Tensor out = Tensor::zeros({r});
    for (std::size_t i = 0; i < r; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < c; ++j) s += M.at2(i, j) * x.data[j];
        out.data[i] = s;
    }
    int id = push("matvec", std::move(out));
    nodes_[id].back = [im = m.id, iv = v.id, id](Tape& t) {
        const Tensor& g = t.adj(id);
        const Tensor &M2 = t.val(im), &x2 = t.val(iv);
        Tensor &gm = t.adj(im), &gx = t.adj(iv);
        std::size_t r2 = M2.rows(), c2 = M2.cols();
        for (std::size_t i = 0; i < r2; ++i) {
            double gv = g.data[i];
            for (std::size_t j = 0; j < c2; ++j) {
                gm.at2(i, j) += gv * x2.data[j];
                gx.data[j] += gv * M2.at2(i, j);
            }
        }
    };
    return {this, id};
}

Var Tape::stack_rows(const std::vector<Var>& rows) {
    if (rows.empty()) fail("stack_rows", "no rows");
    for (Var r : rows) require_tape(r, "stack_rows");
    std::size_t d = val(rows[0].id).data.size();
    for (Var r : rows) {
        const Tensor& t = val(r.id);
        if (t.shape.size() != 1 || t.data.size() != d) fail("stack_rows", "row shape mismatch");
    }
    Tensor out = Tensor::zeros({rows.size(), d});
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(val(rows[i].id).data.begin(), val(rows[i].id).data.end(),
                  out.data.begin() + static_cast<std::ptrdiff_t>(i * d));
    int id = push("stack_rows", std::move(out));
    std::vector<int> ids;
    ids.reserve(rows.size());
    for (Var r : rows) ids.push_back(r.id);
    nodes_[id].back = [ids = std::move(ids), id, d](Tape& t) {
        const Tensor& g = t.adj(id);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            Tensor& gr = t.adj(ids[i]);
            for (std::size_t j = 0; j < d; ++j) gr.data[j] += g.at2(i, j);
        }
    };
    return {this, id};
}

Var Tape::stack_scalars(const std::vector<Var>& xs) {
    if (xs.empty()) fail("stack_scalars", "no elements");
    for (Var x : xs) {
        require_tape(x, "stack_scalars");
        if (!val(x.id).is_scalar()) fail("stack_scalars", "element is not a scalar");
    }
    Tensor out = Tensor::zeros({xs.size()});
    for (std::size_t i = 0; i < xs.size(); ++i) out.data[i] = val(xs[i].id).data[0];
    int id = push("stack_scalars", std::move(out));
    std::vector<int> ids;
    ids.reserve(xs.size());
    for (Var x : xs) ids.push_back(x.id);
    nodes_[id].back = [ids = std::move(ids), id](Tape& t) {
        const Tensor& g = t.adj(id);
        for (std::size_t i = 0; i < ids.size(); ++i) t.adj(ids[i]).data[0] += g.data[i];
    };
    return {this, id};
}

Var Tape::slice_row(Var m, std::size_t i) {
    require_tape(m, "slice_row");
    const Tensor& M = val(m.id);
    if (M.shape.size() != 2 || i >= M.rows()) fail("slice_row", "row index out of range");
    std::size_t c = M.cols();
    Tensor out = Tensor::zeros({c});
    for (std::size_t j = 0; j < c; ++j) out.data[j] = M.at2(i, j);
    int id = push("slice_row", std::move(out));
    nodes_[id].back = [im = m.id, id, i, c](Tape& t) {
        const Tensor& g = t.adj(id);
        Tensor& gm = t.adj(im);
        for (std::size_t j = 0; j < c; ++j) gm.at2(i, j) += g.data[j];
    };
    return {this, id};
}

Var Tape::pick(Var v, std::size_t i) {
    require_tape(v, "pick");
    const Tensor& x = val(v.id);
    if (x.shape.size() != 1 || i >= x.data.size()) fail("pick", "index out of range");
    int id = push("pick", Tensor::scalar(x.data[i]));
    nodes_[id].back = [iv = v.id, id, i](Tape& t) { t.adj(iv).data[i] += t.adj(id).data[0]; };
    return {this, id};
}

Var Tape::sum(Var a) {
    require_tape(a, "sum");
    const Tensor& A = val(a.id);
    double s = std::accumulate(A.data.begin(), A.data.end(), 0.0);
    int id = push("sum", Tensor::scalar(s));
    nodes_[id].back = [ia = a.id, id](Tape& t) {
        double g = t.adj(id).data[0];
        for (double& x : t.adj(ia).data) x += g;
    };
    return {this, id};
}

Var Tape::mean(Var a) {
    require_tape(a, "mean");
    const Tensor& A = val(a.id);
    double n = static_cast<double>(A.data.size());
    double s = std::accumulate(A.data.begin(), A.data.end(), 0.0) / n;
    int id = push("mean", Tensor::scalar(s));
    nodes_[id].back = [ia = a.id, id, n](Tape& t) {
        double g = t.adj(id).data[0] / n;
        for (double& x : t.adj(ia).data) x += g;
    };
    return {this, id};
}

Var Tape::mean_rows(Var m) {
    require_tape(m, "mean_rows");
    const Tensor& M = val(m.id);
    if (M.shape.size() != 2) fail("mean_rows", "not rank 2");
    std::size_t r = M.rows(), c = M.cols();
    Tensor out = Tensor::zeros({c});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.data[j] += M.at2(i, j);
    for (double& x : out.data) x /= static_cast<double>(r);
    int id = push("mean_rows", std::move(out));
    nodes_[id].back = [im = m.id, id, r, c](Tape& t) {
        const Tensor& g = t.adj(id);
        Tensor& gm = t.adj(im);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j)
                gm.at2(i, j) += g.data[j] / static_cast<double>(r);
    };
    return {this, id};
}

Var Tape::logsumexp(Var v) {
    require_tape(v, "logsumexp");
    const Tensor& x = val(v.id);
    if (x.shape.size() != 1) fail("logsumexp", "not a vector");
    double m = *std::max_element(x.data.begin(), x.data.end());
    double s = 0;
    for (double xi : x.data) s += std::exp(xi - m);
    double lse = m + std::log(s);
    int id = push("logsumexp", Tensor::scalar(lse));
    nodes_[id].back = [iv = v.id, id](Tape& t) {
        double g = t.adj(id).data[0];
        double l = t.val(id).data[0];
        const Tensor& x2 = t.val(iv);
        Tensor& gx = t.adj(iv);
        for (std::size_t i = 0; i < x2.data.size(); ++i)
            gx.data[i] += g * std::exp(x2.data[i] - l);
    };
    return {this, id};
}

Var Tape::softmax_rows(Var m) {
    require_tape(m, "softmax_rows");
    const Tensor& M = val(m.id);
    if (M.shape.size() != 2) fail("softmax_rows", "not rank 2");
    std::size_t r = M.rows(), c = M.cols();
    Tensor out = Tensor::zeros({r, c});
    for (std::size_t i = 0; i < r; ++i) {
        double mx = M.at2(i, 0);
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, M.at2(i, j));
        double z = 0;
        for (std::size_t j = 0; j < c; ++j) z += std::exp(M.at2(i, j) - mx);
        for (std::size_t j = 0; j < c; ++j) out.at2(i, j) = std::exp(M.at2(i, j) - mx) / z;
    }
    int id = push("softmax_rows", std::move(out));
    nodes_[id].back = [im = m.id, id, r, c](Tape& t) {
        const Tensor& g = t.adj(id);
        const Tensor& s = t.val(id);
        Tensor& gm = t.adj(im);
        for (std::size_t i = 0; i < r; ++i) {
            double inner = 0;
            for (std::size_t k = 0; k < c; ++k) inner += g.at2(i, k) * s.at2(i, k);
            for (std::size_t j = 0; j < c; ++j)
                gm.at2(i, j) += s.at2(i, j) * (g.at2(i, j) - inner);
        }
    };
    return {this, id};
}

Var Tape::dot(Var u, Var v) { return sum(mul(u, v)); }

Var Tape::cosine_similarity(Var u, Var v) {
    require_tape(u, "cosine_similarity");
    require_tape(v, "cosine_similarity");
    const Tensor &U = val(u.id), &V = val(v.id);
    if (U.shape.size() != 1 || V.shape.size() != 1 || U.data.size() != V.data.size())
        fail("cosine_similarity", "shape mismatch");
    double uu = 0, vv = 0, uv = 0;
    for (std::size_t i = 0; i < U.data.size(); ++i) {
        uu += U.data[i] * U.data[i];
        vv += V.data[i] * V.data[i];
        uv += U.data[i] * V.data[i];
    }
    double nu = std::sqrt(uu), nv = std::sqrt(vv);
    if (nu < 1e-12 || nv < 1e-12)
        throw std::runtime_error("cosine_similarity: zero-norm input");
    double c = uv / (nu * nv);
    int id = push("cosine_similarity", Tensor::scalar(c));
    nodes_[id].back = [iu = u.id, iv = v.id, id, nu, nv, c](Tape& t) {
        double g = t.adj(id).data[0];
        const Tensor &U2 = t.val(iu), &V2 = t.val(iv);
        Tensor &gu = t.adj(iu), &gv = t.adj(iv);
        for (std::size_t i = 0; i < U2.data.size(); ++i) {
            gu.data[i] += g * (V2.data[i] / (nu * nv) - c * U2.data[i] / (nu * nu));
            gv.data[i] += g * (U2.data[i] / (nu * nv) - c * V2.data[i] / (nv * nv));
        }
    };
    return {this, id};
}

Var Tape::min2(Var a, Var b) {
    require_tape(a, "min2");
    require_tape(b, "min2");
    const Tensor &A = val(a.id), &B = val(b.id);
    if (!A.is_scalar() || !B.is_scalar()) fail("min2", "operands must be scalars");
    bool first = A.data[0] <= B.data[0]; // ties select the first argument
    int id = push("min2", Tensor::scalar(first ? A.data[0] : B.data[0]));
    nodes_[id].back = [ia = a.id, ib = b.id, id, first](Tape& t) {
        t.adj(first ? ia : ib).data[0] += t.adj(id).data[0];
    };
    return {this, id};
}

Var Tape::affine(Var w, Var x, Var b) { return add(matvec(w, x), b); }

Var Tape::attention_pool(Var x, Var wq, Var wk, Var wv) {
    const Tensor& X = val(x.id);
    if (X.shape.size() != 2) fail("attention_pool", "input is not rank 2");
    double d = static_cast<double>(X.cols());
    Var q = matmul(x, wq);
    Var k = matmul(x, wk);
    Var v = matmul(x, wv);
    Var scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(d));
    Var attn = softmax_rows(scores);
    return mean_rows(matmul(attn, v));
}

void Tape::backward(Var loss) {
    require_tape(loss, "backward");
    if (!val(loss.id).is_scalar())
        throw std::invalid_argument("backward: loss is not a scalar");
    for (auto& n : nodes_) std::fill(n.adj.data.begin(), n.adj.data.end(), 0.0);
    nodes_[loss.id].adj.data[0] = 1.0;
    for (int i = loss.id; i >= 0; --i)
        if (nodes_[static_cast<std::size_t>(i)].back) nodes_[static_cast<std::size_t>(i)].back(*this);
    for (auto& n : nodes_)
        for (std::size_t i = 0; i < n.grad.data.size(); ++i) n.grad.data[i] += n.adj.data[i];
}

void Tape::zero_grad() {
    for (auto& n : nodes_) std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
}

double grad_check(const std::function<Var(Tape&, std::vector<Var>&)>& build,
                  const std::vector<Tensor>& point, double h) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(point.size());
    for (const Tensor& p : point) leaves.push_back(tape.leaf(p));
    Var loss = build(tape, leaves);
    if (!loss.value().is_scalar())
        throw std::invalid_argument("grad_check: build did not produce a scalar");
    tape.backward(loss);
    std::vector<Tensor> analytic;
    analytic.reserve(leaves.size());
    for (Var l : leaves) analytic.push_back(l.grad());

    auto eval = [&](const std::vector<Tensor>& pt) {
        Tape t;
        std::vector<Var> ls;
        ls.reserve(pt.size());
        for (const Tensor& p : pt) ls.push_back(t.leaf(p));
        Var out = build(t, ls);
        return out.value().data[0];
    };

    std::vector<Tensor> pt = point;
    double worst = 0.0;
    for (std::size_t k = 0; k < pt.size(); ++k) {
        for (std::size_t i = 0; i < pt[k].data.size(); ++i) {
            double orig = pt[k].data[i];
            pt[k].data[i] = orig + h;
            double fp = eval(pt);
            pt[k].data[i] = orig - h;
            double fm = eval(pt);
            pt[k].data[i] = orig;
            double numeric = (fp - fm) / (2.0 * h);
            double a = analytic[k].data[i];
            double rel = std::abs(a - numeric) / std::max(1e-4, std::abs(a) + std::abs(numeric));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace gmc::ad
