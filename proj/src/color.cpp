#include "presetforge/color.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace presetforge {

namespace {

double hue_to_channel(double p, double q, double t) noexcept {
    if (t < 0.0) t += 1.0;
    if (t > 1.0) t -= 1.0;
    if (t < 1.0 / 6.0) return p + (q - p) * 6.0 * t;
    if (t < 0.5) return q;
    if (t < 2.0 / 3.0) return p + (q - p) * (2.0 / 3.0 - t) * 6.0;
    return p;
}

// Weights for a circular set of increasing centers in [0, 360).
template <std::size_t N>
std::array<double, N> circular_weights(const std::array<double, N>& centers, double hue) noexcept {
    std::array<double, N> w{};
    const double h = wrap_hue(hue);
    std::size_t lo = N - 1;
    for (std::size_t i = 0; i < N; ++i) {
        if (centers[i] <= h) lo = i;
    }
    const std::size_t hi = (lo + 1) % N;
    double span = centers[hi] - centers[lo];
    double offset = h - centers[lo];
    if (span <= 0.0) span += 360.0;
    if (offset < 0.0) offset += 360.0;
    const double t = offset / span;
    const double a = 0.5 * (1.0 + std::cos(std::numbers::pi * t));
    w[lo] = a;
    w[hi] = 1.0 - a;
    return w;
}

constexpr std::array<double, 3> kPrimaryCenters{0, 120, 240};

}  // namespace

double wrap_hue(double degrees) noexcept {
    double h = std::fmod(degrees, 360.0);
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h = 0.0;
    return h;
}

Hsl rgb_to_hsl(const Rgb& c) noexcept {
    const double r = c[0], g = c[1], b = c[2];
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double l = 0.5 * (mx + mn);
    if (mx == mn) return {0.0, 0.0, l};
    const double d = mx - mn;
    const double s = l > 0.5 ? d / (2.0 - mx - mn) : d / (mx + mn);
    double h;
    if (mx == r) {
        h = (g - b) / d + (g < b ? 6.0 : 0.0);
    } else if (mx == g) {
        h = (b - r) / d + 2.0;
    } else {
        h = (r - g) / d + 4.0;
    }
    return {wrap_hue(60.0 * h), s, l};
}

Rgb hsl_to_rgb(const Hsl& c) noexcept {
    if (c.s <= 0.0) return {c.l, c.l, c.l};
    const double q = c.l < 0.5 ? c.l * (1.0 + c.s) : c.l + c.s - c.l * c.s;
    const double p = 2.0 * c.l - q;
    const double h = wrap_hue(c.h) / 360.0;
    return {hue_to_channel(p, q, h + 1.0 / 3.0), hue_to_channel(p, q, h), hue_to_channel(p, q, h - 1.0 / 3.0)};
}

std::array<double, kHueBands> hue_band_weights(double hue) noexcept {
    return circular_weights(kHueBandCenters, hue);
}

std::array<double, 3> primary_band_weights(double hue) noexcept { return circular_weights(kPrimaryCenters, hue); }

std::array<double, 4> tone_zone_weights(double value) noexcept {
    std::array<double, 4> w{};
    const double x = std::clamp(value, 0.0, 1.0) * 3.0;
    const auto lo = std::min<std::size_t>(static_cast<std::size_t>(x), 2);
    const double t = x - static_cast<double>(lo);
    const double a = 0.5 * (1.0 + std::cos(std::numbers::pi * t));
    w[lo] = a;
    w[lo + 1] = 1.0 - a;
    return w;
}

double smoothstep(double edge0, double edge1, double x) noexcept {
    const double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

OpponentChroma opponent_chroma(const Rgb& c) noexcept {
    const double x = c[0] - 0.5 * (c[1] + c[2]);
    const double y = 0.5 * std::numbers::sqrt3 * (c[1] - c[2]);
    const double m = std::hypot(x, y);
    if (m == 0.0) return {0.0, 0.0};
    return {m, wrap_hue(std::atan2(y, x) * 180.0 / std::numbers::pi)};
}

Rgb rotate_hue(const Rgb& c, double degrees) noexcept {
    // Rodrigues rotation about (1, 1, 1) / sqrt(3).
    const double th = degrees * std::numbers::pi / 180.0;
    const double co = std::cos(th), si = std::sin(th) / std::numbers::sqrt3;
    const double axial = (c[0] + c[1] + c[2]) / 3.0 * (1.0 - co);
    Rgb r{c[0] * co + si * (c[2] - c[1]) + axial, c[1] * co + si * (c[0] - c[2]) + axial,
          c[2] * co + si * (c[1] - c[0]) + axial};
    const double fix = luminance(c) - luminance(r);
    for (auto& v : r) v += fix;
    return r;
}

}  // namespace presetforge
