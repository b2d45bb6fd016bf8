#include "presetforge/preset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "presetforge/error.hpp"
#include "presetforge/hash.hpp"
#include "presetforge/rng.hpp"

namespace presetforge {

namespace {

using G = SettingGroup;

// Display bounds mirror the usual slider ranges of desktop raw editors; the
// engine only ever sees the normalized value.
constexpr std::array<SettingDescriptor, kNumSettings> kCatalog{{
    {0, "temperature", G::Basic, -100, 100},
    {1, "tint", G::Basic, -150, 150},
    {2, "exposure", G::Basic, -2, 2},
    {3, "contrast", G::Basic, -100, 100},
    {4, "highlights", G::Basic, -100, 100},
    {5, "shadows", G::Basic, -100, 100},
    {6, "whites", G::Basic, -100, 100},
    {7, "blacks", G::Basic, -100, 100},
    {8, "clarity", G::Basic, -100, 100},
    {9, "vibrance", G::Basic, -100, 100},
    {10, "saturation", G::Basic, -100, 100},
    {11, "gamma", G::Basic, -1, 1},
    {12, "fade", G::Basic, -100, 100},
    {13, "dehaze", G::Basic, -100, 100},

    {14, "curve_highlights", G::ToneCurveParametric, -100, 100},
    {15, "curve_lights", G::ToneCurveParametric, -100, 100},
    {16, "curve_darks", G::ToneCurveParametric, -100, 100},
    {17, "curve_shadows", G::ToneCurveParametric, -100, 100},

    {18, "curve_red_shadows", G::ToneCurveChannel, -100, 100},
    {19, "curve_red_darks", G::ToneCurveChannel, -100, 100},
    {20, "curve_red_lights", G::ToneCurveChannel, -100, 100},
    {21, "curve_red_highlights", G::ToneCurveChannel, -100, 100},
    {22, "curve_green_shadows", G::ToneCurveChannel, -100, 100},
    {23, "curve_green_darks", G::ToneCurveChannel, -100, 100},
    {24, "curve_green_lights", G::ToneCurveChannel, -100, 100},
    {25, "curve_green_highlights", G::ToneCurveChannel, -100, 100},
    {26, "curve_blue_shadows", G::ToneCurveChannel, -100, 100},
    {27, "curve_blue_darks", G::ToneCurveChannel, -100, 100},
    {28, "curve_blue_lights", G::ToneCurveChannel, -100, 100},
    {29, "curve_blue_highlights", G::ToneCurveChannel, -100, 100},

    {30, "hue_red", G::Hsl, -100, 100},
    {31, "hue_orange", G::Hsl, -100, 100},
    {32, "hue_yellow", G::Hsl, -100, 100},
    {33, "hue_green", G::Hsl, -100, 100},
    {34, "hue_aqua", G::Hsl, -100, 100},
    {35, "hue_blue", G::Hsl, -100, 100},
    {36, "hue_purple", G::Hsl, -100, 100},
    {37, "hue_magenta", G::Hsl, -100, 100},
    {38, "saturation_red", G::Hsl, -100, 100},
    {39, "saturation_orange", G::Hsl, -100, 100},
    {40, "saturation_yellow", G::Hsl, -100, 100},
    {41, "saturation_green", G::Hsl, -100, 100},
    {42, "saturation_aqua", G::Hsl, -100, 100},
    {43, "saturation_blue", G::Hsl, -100, 100},
    {44, "saturation_purple", G::Hsl, -100, 100},
    {45, "saturation_magenta", G::Hsl, -100, 100},
    {46, "luminance_red", G::Hsl, -100, 100},
    {47, "luminance_orange", G::Hsl, -100, 100},
    {48, "luminance_yellow", G::Hsl, -100, 100},
    {49, "luminance_green", G::Hsl, -100, 100},
    {50, "luminance_aqua", G::Hsl, -100, 100},
    {51, "luminance_blue", G::Hsl, -100, 100},
    {52, "luminance_purple", G::Hsl, -100, 100},
    {53, "luminance_magenta", G::Hsl, -100, 100},

    {54, "split_highlight_hue", G::SplitToning, 0, 360},
    {55, "split_highlight_saturation", G::SplitToning, -100, 100},
    {56, "split_shadow_hue", G::SplitToning, 0, 360},
    {57, "split_shadow_saturation", G::SplitToning, -100, 100},
    {58, "split_balance", G::SplitToning, -100, 100},

    {59, "calibration_shadow_tint", G::Calibration, -100, 100},
    {60, "calibration_red_hue", G::Calibration, -100, 100},
    {61, "calibration_red_saturation", G::Calibration, -100, 100},
    {62, "calibration_green_hue", G::Calibration, -100, 100},
    {63, "calibration_green_saturation", G::Calibration, -100, 100},
    {64, "calibration_blue_hue", G::Calibration, -100, 100},
    {65, "calibration_blue_saturation", G::Calibration, -100, 100},

    {66, "grading_global_hue", G::ColorGrading, 0, 360},
    {67, "grading_global_saturation", G::ColorGrading, -100, 100},
    {68, "grading_global_luminance", G::ColorGrading, -100, 100},
}};

constexpr bool catalog_is_ordered() {
    for (std::size_t i = 0; i < kCatalog.size(); ++i) {
        if (kCatalog[i].index != i) return false;
    }
    return true;
}
static_assert(catalog_is_ordered());

bool is_meta_key(std::string_view key) { return key == "version" || key == "id"; }

void read_settings(const nlohmann::json& map, Preset& out) {
    if (!map.is_object()) throw Error(Errc::MalformedDocument, "settings must be an object");
    for (const auto& [key, value] : map.items()) {
        if (is_meta_key(key)) continue;
        const auto idx = find_setting(key);
        if (!idx) throw Error(Errc::UnknownSetting, key);
        if (!value.is_number()) throw Error(Errc::MalformedDocument, "value of '" + key + "' is not a number");
        const double v = value.get<double>();
        if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
            throw Error(Errc::OutOfRange, key + "=" + value.dump());
        }
        out.values[*idx] = v;
    }
}

}  // namespace

std::string_view group_name(SettingGroup group) noexcept {
    switch (group) {
        case G::Basic: return "basic";
        case G::ToneCurveParametric: return "tone_curve_parametric";
        case G::ToneCurveChannel: return "tone_curve_channel";
        case G::Hsl: return "hsl";
        case G::SplitToning: return "split_toning";
        case G::Calibration: return "calibration";
        case G::ColorGrading: return "color_grading";
    }
    return "unknown";
}

std::span<const SettingDescriptor, kNumSettings> catalog() noexcept { return kCatalog; }

std::optional<std::size_t> find_setting(std::string_view name) noexcept {
    for (const auto& d : kCatalog) {
        if (d.name == name) return d.index;
    }
    return std::nullopt;
}

std::string catalog_fingerprint() {
    std::string text;
    for (const auto& d : kCatalog) {
        text += std::to_string(d.index);
        text += ':';
        text += d.name;
        text += ':';
        text += group_name(d.group);
        text += '\n';
    }
    return sha256_hex(text);
}

bool Preset::is_zero() const noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

Preset preset_zero() { return Preset{}; }

void validate_preset(const Preset& p) {
    for (std::size_t i = 0; i < kNumSettings; ++i) {
        const double v = p.values[i];
        if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
            throw Error(Errc::OutOfRange, std::string(kCatalog[i].name) + "=" + std::to_string(v));
        }
    }
}

Preset parse_preset(const nlohmann::json& doc) {
    if (!doc.is_object()) throw Error(Errc::MalformedDocument, "preset document must be an object");
    Preset out;
    if (doc.contains("version")) {
        const auto& v = doc["version"];
        if (!v.is_number_integer() || v.get<int>() != kPresetDocumentVersion) {
            throw Error(Errc::MalformedDocument, "unsupported version " + v.dump());
        }
    }
    if (doc.contains("id")) {
        if (!doc["id"].is_string()) throw Error(Errc::MalformedDocument, "id must be a string");
        out.id = doc["id"].get<std::string>();
    }
    if (doc.contains("settings")) {
        for (const auto& [key, value] : doc.items()) {
            if (key != "settings" && !is_meta_key(key)) throw Error(Errc::UnknownSetting, key);
        }
        read_settings(doc["settings"], out);
    } else {
        read_settings(doc, out);
    }
    return out;
}

Preset parse_preset_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedDocument, e.what());
    }
    return parse_preset(doc);
}

nlohmann::json serialize_preset(const Preset& p) {
    validate_preset(p);
    nlohmann::json doc;
    doc["version"] = kPresetDocumentVersion;
    if (p.id) doc["id"] = *p.id;
    nlohmann::json settings = nlohmann::json::object();
    for (const auto& d : kCatalog) {
        if (p.values[d.index] != 0.0) settings[std::string(d.name)] = p.values[d.index];
    }
    doc["settings"] = std::move(settings);
    return doc;
}

std::string serialize_preset_text(const Preset& p) { return serialize_preset(p).dump(2) + "\n"; }

Preset sample_random_preset(std::uint64_t seed, double sparsity, double sigma) {
    if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
        throw Error(Errc::InvalidParameter, "sparsity must be in [0,1]");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(Errc::InvalidParameter, "sigma must be > 0");
    Rng rng(seed);
    Preset p;
    for (auto& v : p.values) {
        // Draw both numbers unconditionally so the stream layout is fixed.
        const bool active = rng.uniform() < sparsity;
        const double g = rng.normal(0.0, sigma);
        v = active ? std::clamp(g, -1.0, 1.0) : 0.0;
    }
    return p;
}

}  // namespace presetforge
