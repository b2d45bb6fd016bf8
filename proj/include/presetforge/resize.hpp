#pragma once

#include "presetforge/image.hpp"

namespace presetforge {

/// Separable bicubic (Keys, a = -0.5). When shrinking, the kernel is widened
/// by the scale factor so downsampling is antialiased. Output is clamped to
/// [0, 1]. Same-size requests return an exact copy.
ImageBuffer resize_exact(const ImageBuffer& img, int width, int height);

/// Scales so the longer side equals `target`, keeping the aspect ratio
/// (short side rounded to nearest, at least 1).
ImageBuffer resize_long_side(const ImageBuffer& img, int target);

/// Dimensions resize_long_side would produce.
struct Size {
    int width;
    int height;
};
Size long_side_size(int width, int height, int target);

/// Top-left crop; the window must lie inside the image.
ImageBuffer crop(const ImageBuffer& img, int x0, int y0, int width, int height);

}  // namespace presetforge
