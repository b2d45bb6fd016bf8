#pragma once

#include <cstddef>

#include "presetforge/image.hpp"
#include "presetforge/preset.hpp"

namespace presetforge {

/// Full-scale strengths of each stage (a setting at +/-1). Collected here so
/// the numbers live in one place; README.md carries the same table.
namespace engine {
inline constexpr double kWhiteBalanceOffset = 0.10;  // channel offset per unit temperature/tint
inline constexpr double kExposureStops = 2.0;        // gain 2^(2e)
inline constexpr double kContrastSlope = 0.8;        // slope 1 + 0.8c about 0.5
inline constexpr double kToneZoneOffset = 0.15;      // highlights/shadows/whites/blacks
inline constexpr double kCurveOffset = 0.25;         // parametric and per-channel curves
inline constexpr double kHueShiftDegrees = 30.0;     // HSL and calibration hue
inline constexpr double kHslLumOffset = 0.2;
inline constexpr double kSplitToneOffset = 0.2;
inline constexpr double kGradingTintOffset = 0.15;
inline constexpr double kGradingLumOffset = 0.1;
inline constexpr double kShadowTintOffset = 0.1;
inline constexpr double kClarityStrength = 0.3;
inline constexpr double kDehazeBlack = 0.1;
inline constexpr double kDehazeSaturation = 0.3;
inline constexpr double kFadeLift = 0.15;
inline constexpr double kGammaToe = 0.1;    // power curve is quadratic below this input
inline constexpr double kChromaRamp = 0.4;  // chroma over which hue-dependent settings fade in
inline constexpr double kSoftKnee = 0.05;  // half-width of the C1 range-limiting knee
}  // namespace engine

/// Applies the preset pixel by pixel in the fixed stage order. Stages whose
/// settings are all zero are skipped, so the zero preset is an exact identity.
ImageBuffer apply_preset(const ImageBuffer& img, const Preset& p);

/// apply_preset with a one-hot preset.
ImageBuffer apply_setting(const ImageBuffer& img, std::size_t index, double value);

/// Single-color form of apply_preset (no validation).
Rgb apply_preset_pixel(const Preset& p, const Rgb& rgb);

/// C1 limiter into [0, 1]: identity on [w, 1-w], quadratic knees of
/// half-width w = kSoftKnee, constant outside [-w, 1+w].
double soft_limit_upper(double y) noexcept;
double soft_limit_lower(double y) noexcept;
inline double soft_limit(double y) noexcept { return soft_limit_upper(soft_limit_lower(y)); }

}  // namespace presetforge
