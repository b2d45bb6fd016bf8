#include "presetforge/resize.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace presetforge {

namespace {

double cubic(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    return 0.0;
}

struct Taps {
    std::vector<int> first;
    std::vector<int> count;
    std::vector<double> weights;  // count[o] weights per output, stride = max_taps
    int max_taps = 0;
};

Taps make_taps(int in_size, int out_size) {
    const double scale = static_cast<double>(in_size) / out_size;
    const double support = 2.0 * std::max(scale, 1.0);
    const double kscale = std::max(scale, 1.0);
    Taps t;
    t.max_taps = static_cast<int>(std::ceil(support)) * 2 + 1;
    t.first.resize(out_size);
    t.count.resize(out_size);
    t.weights.assign(static_cast<std::size_t>(out_size) * t.max_taps, 0.0);
    for (int o = 0; o < out_size; ++o) {
        const double center = (o + 0.5) * scale;
        const int lo = static_cast<int>(std::floor(center - support));
        const int hi = static_cast<int>(std::ceil(center + support));
        double* w = &t.weights[static_cast<std::size_t>(o) * t.max_taps];
        double sum = 0.0;
        int n = 0;
        for (int i = lo; i < hi && n < t.max_taps; ++i, ++n) {
            w[n] = cubic((i + 0.5 - center) / kscale);
            sum += w[n];
        }
        for (int k = 0; k < n; ++k) w[k] /= sum;
        t.first[o] = lo;
        t.count[o] = n;
    }
    return t;
}

// Resamples along one axis; `horizontal` picks the axis.
ImageBuffer resample_axis(const ImageBuffer& src, int out_w, int out_h, bool horizontal) {
    const int in_size = horizontal ? src.width() : src.height();
    const int out_size = horizontal ? out_w : out_h;
    const Taps taps = make_taps(in_size, out_size);
    ImageBuffer dst(out_w, out_h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const int o = horizontal ? x : y;
            const double* w = &taps.weights[static_cast<std::size_t>(o) * taps.max_taps];
            double acc[3] = {0, 0, 0};
            for (int k = 0; k < taps.count[o]; ++k) {
                const int i = std::clamp(taps.first[o] + k, 0, in_size - 1);
                const float* p = horizontal ? src.px(i, y) : src.px(x, i);
                acc[0] += w[k] * p[0];
                acc[1] += w[k] * p[1];
                acc[2] += w[k] * p[2];
            }
            float* d = dst.px(x, y);
            for (int c = 0; c < 3; ++c) d[c] = static_cast<float>(std::clamp(acc[c], 0.0, 1.0));
        }
    }
    return dst;
}

}  // namespace

ImageBuffer resize_exact(const ImageBuffer& img, int width, int height) {
    if (width < 1 || height < 1) throw Error(Errc::InvalidParameter, "target size must be >= 1");
    validate_image(img);
    if (width == img.width() && height == img.height()) return img;
    ImageBuffer tmp = width == img.width() ? img : resample_axis(img, width, img.height(), true);
    return height == img.height() ? tmp : resample_axis(tmp, width, height, false);
}

Size long_side_size(int width, int height, int target) {
    if (target < 1) throw Error(Errc::InvalidParameter, "target must be >= 1");
    if (width >= height) {
        const int h = std::max(1, static_cast<int>(std::lround(static_cast<double>(height) * target / width)));
        return {target, h};
    }
    const int w = std::max(1, static_cast<int>(std::lround(static_cast<double>(width) * target / height)));
    return {w, target};
}

ImageBuffer resize_long_side(const ImageBuffer& img, int target) {
    const Size s = long_side_size(img.width(), img.height(), target);
    return resize_exact(img, s.width, s.height);
}

ImageBuffer crop(const ImageBuffer& img, int x0, int y0, int width, int height) {
    if (x0 < 0 || y0 < 0 || width < 1 || height < 1 || x0 + width > img.width() || y0 + height > img.height()) {
        throw Error(Errc::InvalidParameter, "crop window outside image");
    }
    ImageBuffer out(width, height);
    for (int y = 0; y < height; ++y) {
        std::copy_n(img.px(x0, y0 + y), 3 * static_cast<std::size_t>(width), out.px(0, y));
    }
    return out;
}

}  // namespace presetforge
