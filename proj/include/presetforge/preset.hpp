#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

namespace presetforge {

inline constexpr std::size_t kNumSettings = 69;
inline constexpr int kPresetDocumentVersion = 1;

enum class SettingGroup {
    Basic,
    ToneCurveParametric,
    ToneCurveChannel,
    Hsl,
    SplitToning,
    Calibration,
    ColorGrading,
};

std::string_view group_name(SettingGroup group) noexcept;

struct SettingDescriptor {
    std::size_t index;
    std::string_view name;
    SettingGroup group;
    double display_min;
    double display_max;
};

/// Named indices into the catalog. Order is part of the on-disk contract.
namespace setting {
inline constexpr std::size_t kTemperature = 0;
inline constexpr std::size_t kTint = 1;
inline constexpr std::size_t kExposure = 2;
inline constexpr std::size_t kContrast = 3;
inline constexpr std::size_t kHighlights = 4;
inline constexpr std::size_t kShadows = 5;
inline constexpr std::size_t kWhites = 6;
inline constexpr std::size_t kBlacks = 7;
inline constexpr std::size_t kClarity = 8;
inline constexpr std::size_t kVibrance = 9;
inline constexpr std::size_t kSaturation = 10;
inline constexpr std::size_t kGamma = 11;
inline constexpr std::size_t kFade = 12;
inline constexpr std::size_t kDehaze = 13;
// curve_highlights, curve_lights, curve_darks, curve_shadows
inline constexpr std::size_t kCurveBegin = 14;
// {red,green,blue} x {shadows,darks,lights,highlights}
inline constexpr std::size_t kChannelCurveBegin = 18;
// hue x 8 bands, saturation x 8 bands, luminance x 8 bands
inline constexpr std::size_t kHslHueBegin = 30;
inline constexpr std::size_t kHslSatBegin = 38;
inline constexpr std::size_t kHslLumBegin = 46;
inline constexpr std::size_t kSplitHighlightHue = 54;
inline constexpr std::size_t kSplitHighlightSat = 55;
inline constexpr std::size_t kSplitShadowHue = 56;
inline constexpr std::size_t kSplitShadowSat = 57;
inline constexpr std::size_t kSplitBalance = 58;
inline constexpr std::size_t kCalShadowTint = 59;
// {red,green,blue} x {hue,sat}
inline constexpr std::size_t kCalPrimaryBegin = 60;
inline constexpr std::size_t kGradingHue = 66;
inline constexpr std::size_t kGradingSat = 67;
inline constexpr std::size_t kGradingLum = 68;
}  // namespace setting

/// The fixed 69-entry setting catalog.
std::span<const SettingDescriptor, kNumSettings> catalog() noexcept;

/// Index of a setting by name, or nullopt.
std::optional<std::size_t> find_setting(std::string_view name) noexcept;

/// SHA-256 over "index:name:group\n" lines; pinned in tests so the catalog
/// cannot drift silently.
std::string catalog_fingerprint();

/// A color style: 69 normalized settings, each in [-1, 1], 0 meaning no change.
struct Preset {
    std::array<double, kNumSettings> values{};
    std::optional<std::string> id;

    bool is_zero() const noexcept;
    friend bool operator==(const Preset&, const Preset&) = default;
};

Preset preset_zero();

/// Throws Error(OutOfRange) if any value is outside [-1, 1] or not finite.
void validate_preset(const Preset& p);

/// Accepts either {"version":1,"id":..,"settings":{name:value}} or a bare
/// {name:value} map. Missing names default to 0.
Preset parse_preset(const nlohmann::json& doc);
Preset parse_preset_text(std::string_view text);

nlohmann::json serialize_preset(const Preset& p);
std::string serialize_preset_text(const Preset& p);

struct PresetSampling {
    double sparsity = 0.5;
    double sigma = 0.3;
};

/// Each setting is active with probability `sparsity`; active values are
/// N(0, sigma^2) clamped to [-1, 1]. Pure function of its arguments.
Preset sample_random_preset(std::uint64_t seed, double sparsity, double sigma);

inline Preset sample_random_preset(std::uint64_t seed, const PresetSampling& s = {}) {
    return sample_random_preset(seed, s.sparsity, s.sigma);
}

}  // namespace presetforge
