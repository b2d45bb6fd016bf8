#pragma once

#include <vector>

#include "presetforge/image.hpp"
#include "presetforge/nn/tensor.hpp"

namespace presetforge {

/// Interleaved RGB image -> 1 x 3 x H x W planar tensor.
nn::Tensor image_to_tensor(const ImageBuffer& img);
/// Stacks equally sized images into N x 3 x H x W.
nn::Tensor images_to_tensor(const std::vector<ImageBuffer>& imgs);
/// Sample n of an N x 3 x H x W tensor.
ImageBuffer tensor_to_image(const nn::Tensor& t, std::size_t n = 0);

}  // namespace presetforge
