#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "presetforge/error.hpp"

namespace presetforge {

using Rgb = std::array<double, 3>;

/// Row-major interleaved RGB, channels nominally in [0, 1].
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height, float fill = 0.0f)
        : width_(width), height_(height), pixels_(checked_size(width, height), fill) {}
    ImageBuffer(int width, int height, std::vector<float> pixels) : width_(width), height_(height) {
        if (pixels.size() != checked_size(width, height)) {
            throw Error(Errc::InvalidImage, "pixel count does not match dimensions");
        }
        pixels_ = std::move(pixels);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const noexcept { return pixels_.empty(); }

    std::span<float> data() noexcept { return pixels_; }
    std::span<const float> data() const noexcept { return pixels_; }

    float* px(int x, int y) noexcept { return &pixels_[3 * (static_cast<std::size_t>(y) * width_ + x)]; }
    const float* px(int x, int y) const noexcept {
        return &pixels_[3 * (static_cast<std::size_t>(y) * width_ + x)];
    }
    float& at(int x, int y, int c) noexcept { return px(x, y)[c]; }
    float at(int x, int y, int c) const noexcept { return px(x, y)[c]; }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    static std::size_t checked_size(int width, int height) {
        if (width <= 0 || height <= 0) throw Error(Errc::InvalidImage, "image dimensions must be positive");
        return 3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> pixels_;
};

/// Throws InvalidImage for empty images or non-finite samples.
void validate_image(const ImageBuffer& img);

}  // namespace presetforge
