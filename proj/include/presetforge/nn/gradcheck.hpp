#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "presetforge/nn/tensor.hpp"

namespace presetforge::nn {

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr std::size_t kMinProbesPerTensor = 20;

/// Returns the scalar loss; when `grads` is non-null it must also fill the
/// analytic gradient (same names and shapes as the parameters).
using LossClosure = std::function<double(const ModelParamsD& params, ModelParamsD* grads)>;

struct Probe {
    std::string name;
    std::size_t index;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t probes = 0;
    Probe worst{};
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

/// Central differences with step kGradCheckStep on the given entries. An
/// empty probe list yields error 0.
GradCheckResult grad_check(const LossClosure& loss, ModelParamsD params, const std::vector<Probe>& probes);

/// Draws `per_tensor` distinct entries from every tensor (all entries when the
/// tensor is smaller), seeded.
std::vector<Probe> random_probes(const ModelParamsD& params, std::size_t per_tensor, std::uint64_t seed);

inline GradCheckResult grad_check(const LossClosure& loss, const ModelParamsD& params,
                                  std::size_t per_tensor = kMinProbesPerTensor, std::uint64_t seed = 1) {
    return grad_check(loss, params, random_probes(params, per_tensor, seed));
}

}  // namespace presetforge::nn
