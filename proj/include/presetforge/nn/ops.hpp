#pragma once

#include <type_traits>
#include <vector>

#include "presetforge/nn/tensor.hpp"

namespace presetforge::nn {

inline constexpr double kLeakySlope = 0.1;

// All backward functions *accumulate* into parameter gradients (dw, db) and
// *overwrite* input gradients (dx), so a layer used twice in one step sums
// its parameter gradients naturally.

/// 3x3 cross-correlation, zero padding 1, stride 1 or 2.
/// x: N x C x H x W, w: K x C x 3 x 3, b: K -> N x K x ceil(H/s) x ceil(W/s).
template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b, int stride);

template <class T>
void conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, int stride, const BasicTensor<T>& dy,
                     std::type_identity_t<BasicTensor<T>>* dx, BasicTensor<T>& dw, BasicTensor<T>& db);

template <class T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope = T(kLeakySlope));
template <class T>
BasicTensor<T> leaky_relu_backward(const BasicTensor<T>& x, const BasicTensor<T>& dy, T slope = T(kLeakySlope));

template <class T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x);
/// Takes the forward *output*.
template <class T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy);

template <class T>
BasicTensor<T> tanh(const BasicTensor<T>& x);
/// Takes the forward *output*.
template <class T>
BasicTensor<T> tanh_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy);

template <class T>
BasicTensor<T> upsample_nearest2x(const BasicTensor<T>& x);
template <class T>
BasicTensor<T> upsample_nearest2x_backward(const BasicTensor<T>& dy);

/// N x C x H x W -> N x C
template <class T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& x);
template <class T>
BasicTensor<T> global_avg_pool_backward(const Shape& x_shape, const BasicTensor<T>& dy);

/// Channel concatenation of N x Ci x H x W tensors.
template <class T>
BasicTensor<T> concat_channels(const std::vector<const BasicTensor<T>*>& parts);
template <class T>
std::vector<BasicTensor<T>> concat_channels_backward(const std::vector<const BasicTensor<T>*>& parts,
                                                     const BasicTensor<T>& dy);

/// x: N x D, w: E x D, b: E -> N x E
template <class T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b);
template <class T>
void linear_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& dy,
                     std::type_identity_t<BasicTensor<T>>* dx, BasicTensor<T>& dw, BasicTensor<T>& db);

}  // namespace presetforge::nn
