#include "presetforge/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "presetforge/rng.hpp"

namespace presetforge::nn {

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

std::vector<Probe> random_probes(const ModelParamsD& params, std::size_t per_tensor, std::uint64_t seed) {
    std::vector<Probe> probes;
    Rng rng(seed);
    for (const auto& [name, t] : params.tensors) {
        std::vector<std::size_t> idx(t.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        const std::size_t take = std::min(per_tensor, idx.size());
        // Partial Fisher-Yates.
        for (std::size_t i = 0; i < take; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.uniform_int(idx.size() - i));
            std::swap(idx[i], idx[j]);
            probes.push_back({name, idx[i]});
        }
    }
    return probes;
}

GradCheckResult grad_check(const LossClosure& loss, ModelParamsD params, const std::vector<Probe>& probes) {
    GradCheckResult r;
    if (probes.empty()) return r;
    ModelParamsD grads = params.zeros_like();
    loss(params, &grads);
    for (const auto& probe : probes) {
        auto& t = params[probe.name];
        const double saved = t[probe.index];
        t[probe.index] = saved + kGradCheckStep;
        const double up = loss(params, nullptr);
        t[probe.index] = saved - kGradCheckStep;
        const double down = loss(params, nullptr);
        t[probe.index] = saved;
        const double numeric = (up - down) / (2.0 * kGradCheckStep);
        const double analytic = grads[probe.name][probe.index];
        const double err = relative_error(analytic, numeric);
        ++r.probes;
        if (err > r.max_rel_error || r.probes == 1) {
            r.max_rel_error = std::max(r.max_rel_error, err);
            r.worst = probe;
            r.worst_analytic = analytic;
            r.worst_numeric = numeric;
        }
    }
    return r;
}

}  // namespace presetforge::nn
