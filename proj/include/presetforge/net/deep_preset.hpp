#pragma once

#include <cstdint>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "presetforge/net/config.hpp"
#include "presetforge/nn/tensor.hpp"

namespace presetforge::net {

using nn::BasicParams;
using nn::BasicTensor;
using nn::Shape;

template <class T>
struct EncoderOutput {
    std::vector<BasicTensor<T>> pyramid;  // one map per stage, finest first
    BasicTensor<T> final_map;             // 1/2^depth scale
};

template <class T>
struct HeadOutput {
    BasicTensor<T> embedding;  // N x embed_dim
    BasicTensor<T> preset;     // N x 69, inside (-1, 1)
};

/// One training batch. Images are N x 3 x H x W in [0, 1], p is N x 69.
template <class T>
struct Batch {
    BasicTensor<T> x, z, z_prime, y, p;
};

struct LossBreakdown {
    double mse = 0, perceptual = 0, preset_l1 = 0, ppl = 0, total = 0;
    LossWeights weights;
};
nlohmann::json to_json(const LossBreakdown& l);

/// Names and shapes of every parameter, sorted by name.
std::vector<std::pair<std::string, Shape>> parameter_layout(const NetConfig& cfg);

/// He-style Gaussian weights (std sqrt(2 / fan_in)), zero biases. Each tensor
/// draws from its own stream derived from the seed and its name.
template <class T>
BasicParams<T> init_params(const NetConfig& cfg, std::uint64_t seed);

/// Throws CheckpointMismatch unless names and shapes match the layout exactly.
template <class T>
void check_params(const NetConfig& cfg, const BasicParams<T>& params);

template <class T>
EncoderOutput<T> encode_T(const NetConfig& cfg, const BasicParams<T>& params, const BasicTensor<T>& x,
                          const BasicTensor<T>& z);
template <class T>
EncoderOutput<T> encode_C(const NetConfig& cfg, const BasicParams<T>& params, const BasicTensor<T>& x);
template <class T>
HeadOutput<T> head_L(const NetConfig& cfg, const BasicParams<T>& params, const BasicTensor<T>& t_final);
template <class T>
BasicTensor<T> decode_G(const NetConfig& cfg, const BasicParams<T>& params, const EncoderOutput<T>& t,
                        const EncoderOutput<T>& c);

/// Gradients of the weighted total with respect to each loss input.
template <class T>
struct LossGrads {
    BasicTensor<T> y_hat, p_hat, f_z, f_z_prime;
};

/// mse: mean squared error; perceptual: pyramid-gradient proxy on luminance,
/// averaged over samples; preset_l1: ||p - p_hat||_1 and ppl: ||f_z' - f_z||_1,
/// each averaged over the batch.
template <class T>
LossBreakdown loss_total(const BasicTensor<T>& y_hat, const BasicTensor<T>& y, const BasicTensor<T>& p_hat,
                         const BasicTensor<T>& p, const BasicTensor<T>& f_z, const BasicTensor<T>& f_z_prime,
                         const LossWeights& w, LossGrads<T>* grads = nullptr);

template <class T>
struct TrainOutput {
    BasicTensor<T> y_hat;
    HeadOutput<T> head_z;
    HeadOutput<T> head_z_prime;  // empty when the second pass is skipped
    LossBreakdown loss;
    std::vector<LossBreakdown> per_sample;
};

/// Forward pass of every term; with `grads` also the backward pass, which
/// accumulates into *grads. The Z' pass runs whenever its embedding is
/// needed (ppl weight non-zero) or `always_report_ppl` is set; it is
/// back-propagated only when the ppl weight is non-zero.
template <class T>
TrainOutput<T> forward_train(const NetConfig& cfg, const BasicParams<T>& params, const Batch<T>& batch,
                             const LossWeights& w, std::type_identity_t<BasicParams<T>>* grads = nullptr,
                             bool always_report_ppl = true);

}  // namespace presetforge::net
