#pragma once

#include <array>
#include <cstddef>

#include "presetforge/image.hpp"

namespace presetforge {

/// Rec.709 luma weights.
inline constexpr double kLumaR = 0.2126;
inline constexpr double kLumaG = 0.7152;
inline constexpr double kLumaB = 0.0722;

inline double luminance(const Rgb& c) noexcept { return kLumaR * c[0] + kLumaG * c[1] + kLumaB * c[2]; }

struct Hsl {
    double h;  // degrees, [0, 360)
    double s;  // [0, 1]
    double l;  // [0, 1]
};

/// Hexcone HSL. Achromatic inputs report h = 0, s = 0.
Hsl rgb_to_hsl(const Rgb& c) noexcept;
Rgb hsl_to_rgb(const Hsl& c) noexcept;

/// Wraps any angle into [0, 360).
double wrap_hue(double degrees) noexcept;

inline constexpr std::size_t kHueBands = 8;
/// red, orange, yellow, green, aqua, blue, purple, magenta
inline constexpr std::array<double, kHueBands> kHueBandCenters{0, 30, 60, 120, 180, 240, 285, 330};

/// Raised-cosine weights between neighbouring band centers; they sum to 1
/// for every hue.
std::array<double, kHueBands> hue_band_weights(double hue) noexcept;

/// Same construction over the three primaries at 0, 120 and 240 degrees.
std::array<double, 3> primary_band_weights(double hue) noexcept;

/// Raised-cosine zones at 0, 1/3, 2/3, 1 (shadows, darks, lights,
/// highlights); a partition of unity on [0, 1].
std::array<double, 4> tone_zone_weights(double value) noexcept;

double smoothstep(double edge0, double edge1, double x) noexcept;

/// Opponent chroma: x = r - (g + b) / 2, y = sqrt(3) / 2 * (g - b). Primaries
/// and secondaries have magnitude 1 at hues 0, 60, ..., 300 degrees. Unlike
/// HSL saturation this stays well behaved near black and white.
struct OpponentChroma {
    double magnitude;
    double hue;  // degrees, [0, 360); 0 for neutrals
};
OpponentChroma opponent_chroma(const Rgb& c) noexcept;

/// Rotates the color about the gray axis, then restores its luminance.
/// Linear in the color for a fixed angle.
Rgb rotate_hue(const Rgb& c, double degrees) noexcept;

}  // namespace presetforge
