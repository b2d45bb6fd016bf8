#pragma once

#include <cmath>

#include "presetforge/nn/tensor.hpp"

namespace presetforge::nn {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

template <class Scalar>
struct BasicAdamState {
    AdamConfig config;
    std::uint64_t step = 0;
    BasicParams<Scalar> m;
    BasicParams<Scalar> v;

    static BasicAdamState for_params(const BasicParams<Scalar>& params, AdamConfig config = {}) {
        BasicAdamState s;
        s.config = config;
        s.m = params.zeros_like();
        s.v = params.zeros_like();
        return s;
    }
    friend bool operator==(const BasicAdamState&, const BasicAdamState&) = default;
};

using AdamState = BasicAdamState<float>;

/// One bias-corrected Adam update. Moment tensors are created on first use.
/// Arithmetic is done in double per element, so the result does not depend
/// on the thread count.
template <class Scalar>
void adam_step(BasicParams<Scalar>& params, const BasicParams<Scalar>& grads, BasicAdamState<Scalar>& state) {
    if (state.m.tensors.empty() && state.v.tensors.empty()) {
        state.m = params.zeros_like();
        state.v = params.zeros_like();
    }
    if (grads.tensors.size() != params.tensors.size() || state.m.tensors.size() != params.tensors.size() ||
        state.v.tensors.size() != params.tensors.size()) {
        throw Error(Errc::ShapeMismatch, "adam: parameter, gradient and moment sets differ");
    }
    state.step += 1;
    const auto& c = state.config;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    for (auto& [name, p] : params.tensors) {
        const auto& g = grads[name];
        auto& m = state.m[name];
        auto& v = state.v[name];
        p.require_same_shape(g);
        p.require_same_shape(m);
        p.require_same_shape(v);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g[i];
            const double mi = c.beta1 * m[i] + (1.0 - c.beta1) * gi;
            const double vi = c.beta2 * v[i] + (1.0 - c.beta2) * gi * gi;
            m[i] = static_cast<Scalar>(mi);
            v[i] = static_cast<Scalar>(vi);
            const double update = c.lr * (mi / bc1) / (std::sqrt(vi / bc2) + c.eps);
            p[i] = static_cast<Scalar>(p[i] - update);
        }
    }
}

}  // namespace presetforge::nn
