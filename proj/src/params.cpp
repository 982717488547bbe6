#include "gmc/params.hpp"

#include <cmath>
#include <stdexcept>

#include "gmc/rng.hpp"

namespace gmc {

ad::Tensor& ParamStore::ensure(const std::string& name, const std::vector<std::size_t>& shape,
                               Init kind) {
    auto it = params.find(name);
    if (it != params.end()) {
        if (it->second.shape != shape)
            throw std::invalid_argument("parameter '" + name + "' bound with conflicting shape");
        return it->second;
    }
    Rng rng(mix_seed(seed, fnv1a64(name)));
    ad::Tensor t = ad::Tensor::zeros(shape);
    double half = kind == Init::WideUniform ? 1.0 : 0.1;
    auto draw = [&] {
        for (double& x : t.data) x = rng.uniform(-half, half);
    };
    draw();
    if (kind != Init::Uniform) {
        auto norm = [&] {
            double s = 0;
            for (double x : t.data) s += x * x;
            return std::sqrt(s);
        };
        while (norm() < 1e-3) draw();
    }
    return params.emplace(name, std::move(t)).first->second;
}

const ad::Tensor* ParamStore::find(const std::string& name) const {
    auto it = params.find(name);
    return it == params.end() ? nullptr : &it->second;
}

ad::Var Binder::get(const std::string& name, const std::vector<std::size_t>& shape, Init kind) {
    auto it = bound.find(name);
    if (it != bound.end()) return it->second;
    ad::Tensor& t = store->ensure(name, shape, kind);
    ad::Var v = tape->leaf(t);
    bound.emplace(name, v);
    return v;
}

void Binder::apply_sgd(double lr, double momentum, std::map<std::string, ad::Tensor>* velocity,
                       const std::function<bool(const std::string&)>& trainable) {
    for (auto& [name, var] : bound) {
        if (trainable && !trainable(name)) continue;
        ad::Tensor& p = store->params.at(name);
        const ad::Tensor& g = var.grad();
        if (momentum > 0.0 && velocity) {
            auto vit = velocity->find(name);
            if (vit == velocity->end())
                vit = velocity->emplace(name, ad::Tensor::zeros(p.shape)).first;
            ad::Tensor& v = vit->second;
            for (std::size_t i = 0; i < p.data.size(); ++i) {
                v.data[i] = momentum * v.data[i] + g.data[i];
                p.data[i] -= lr * v.data[i];
            }
        } else {
            for (std::size_t i = 0; i < p.data.size(); ++i) p.data[i] -= lr * g.data[i];
        }
    }
}

} // namespace gmc
