#include "presetforge/color_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "presetforge/color.hpp"

namespace presetforge {

namespace {

namespace k = engine;
namespace s = setting;

bool any_nonzero(const Preset& p, std::size_t begin, std::size_t count) {
    for (std::size_t i = begin; i < begin + count; ++i) {
        if (p.values[i] != 0.0) return true;
    }
    return false;
}

// Unit-chroma tint direction for a (hue, strength) pair of settings. The hue
// setting spans the full circle; a negative strength selects the complement.
struct Tint {
    Rgb dir{};
    double amount = 0.0;
};

Tint make_tint(double hue_setting, double strength_setting) {
    double hue = 180.0 * (hue_setting + 1.0);
    if (strength_setting < 0.0) hue += 180.0;
    // Luminance-neutral, so tints move color without moving brightness.
    const Rgb c = hsl_to_rgb({wrap_hue(hue), 1.0, 0.5});
    const double l = luminance(c);
    return {{c[0] - l, c[1] - l, c[2] - l}, std::abs(strength_setting)};
}

// Chroma-scaled hue rotation about the luminance axis. Hue-dependent settings
// fade in over low chroma, where hue is unstable.
Rgb adjust_chroma(const Rgb& c, double hue_shift, double gain) {
    const double l = luminance(c);
    Rgb r = hue_shift != 0.0 ? rotate_hue(c, hue_shift) : c;
    for (auto& x : r) x = l + gain * (x - l);
    return r;
}

double chroma_ramp(double magnitude) { return smoothstep(0.0, k::kChromaRamp, magnitude); }

struct Stages {
    const Preset* p;
    bool white_balance, exposure, contrast, tone_zones, curve, channel_curve, hsl, saturation, split,
        grading, calibration, clarity, dehaze, gamma, fade, any;
    double gain;
    Tint split_hi, split_sh, grading_tint;

    explicit Stages(const Preset& preset) : p(&preset) {
        const auto& v = preset.values;
        white_balance = v[s::kTemperature] != 0.0 || v[s::kTint] != 0.0;
        exposure = v[s::kExposure] != 0.0;
        contrast = v[s::kContrast] != 0.0;
        tone_zones = any_nonzero(preset, s::kHighlights, 4);
        curve = any_nonzero(preset, s::kCurveBegin, 4);
        channel_curve = any_nonzero(preset, s::kChannelCurveBegin, 12);
        hsl = any_nonzero(preset, s::kHslHueBegin, 24);
        saturation = v[s::kVibrance] != 0.0 || v[s::kSaturation] != 0.0;
        split = v[s::kSplitHighlightSat] != 0.0 || v[s::kSplitShadowSat] != 0.0;
        grading = v[s::kGradingSat] != 0.0 || v[s::kGradingLum] != 0.0;
        calibration = any_nonzero(preset, s::kCalShadowTint, 7);
        clarity = v[s::kClarity] != 0.0;
        dehaze = v[s::kDehaze] != 0.0;
        gamma = v[s::kGamma] != 0.0;
        fade = v[s::kFade] != 0.0;
        any = !preset.is_zero();
        gain = std::exp2(k::kExposureStops * v[s::kExposure]);
        split_hi = make_tint(v[s::kSplitHighlightHue], v[s::kSplitHighlightSat]);
        split_sh = make_tint(v[s::kSplitShadowHue], v[s::kSplitShadowSat]);
        grading_tint = make_tint(v[s::kGradingHue], v[s::kGradingSat]);
    }

    double operator[](std::size_t i) const { return p->values[i]; }
};

void limit_both(Rgb& c) {
    for (auto& x : c) x = soft_limit(x);
}

void add_uniform(Rgb& c, double delta) {
    for (auto& x : c) x += delta;
}

// Offset from the four parametric zones (catalog order is highlights, lights,
// darks, shadows; zone weights are ordered shadows..highlights).
double curve_offset(const Stages& st, std::size_t begin, double value, bool highlights_first) {
    const auto w = tone_zone_weights(value);
    double acc = 0.0;
    for (std::size_t z = 0; z < 4; ++z) {
        const std::size_t idx = highlights_first ? begin + (3 - z) : begin + z;
        acc += st[idx] * w[z];
    }
    return k::kCurveOffset * acc;
}

Rgb run(const Stages& st, Rgb c) {
    if (!st.any) return c;
    if (st.white_balance) {
        const double t = k::kWhiteBalanceOffset * st[s::kTemperature];
        const double n = k::kWhiteBalanceOffset * st[s::kTint];
        c[0] += t + 0.5 * n;
        c[1] -= n;
        c[2] += -t + 0.5 * n;
    }
    if (st.exposure) {
        for (auto& x : c) x *= st.gain;
    }
    if (st.contrast) {
        const double slope = 1.0 + k::kContrastSlope * st[s::kContrast];
        for (auto& x : c) x = 0.5 + (x - 0.5) * slope;
    }
    if (st.tone_zones) {
        const double l = luminance(c);
        const double delta = k::kToneZoneOffset * (st[s::kHighlights] * smoothstep(0.5, 1.0, l) +
                                                   st[s::kShadows] * (1.0 - smoothstep(0.0, 0.5, l)) +
                                                   st[s::kWhites] * smoothstep(0.65, 1.0, l) +
                                                   st[s::kBlacks] * (1.0 - smoothstep(0.0, 0.35, l)));
        add_uniform(c, delta);
    }
    if (st.curve) {
        add_uniform(c, curve_offset(st, s::kCurveBegin, luminance(c), true));
    }
    if (st.channel_curve) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
            c[ch] += curve_offset(st, s::kChannelCurveBegin + 4 * ch, c[ch], false);
        }
    }
    if (st.hsl) {
        const auto oc = opponent_chroma(c);
        const auto w = hue_band_weights(oc.hue);
        double dh = 0.0, ds = 0.0, dl = 0.0;
        for (std::size_t b = 0; b < kHueBands; ++b) {
            dh += st[s::kHslHueBegin + b] * w[b];
            ds += st[s::kHslSatBegin + b] * w[b];
            dl += st[s::kHslLumBegin + b] * w[b];
        }
        const double t = chroma_ramp(oc.magnitude);
        c = adjust_chroma(c, k::kHueShiftDegrees * dh * t, 1.0 + ds * t);
        add_uniform(c, k::kHslLumOffset * dl * t);
    }
    if (st.saturation) {
        const double chroma = std::min(1.0, opponent_chroma(c).magnitude);
        const double gain = (1.0 + st[s::kVibrance] * (1.0 - chroma)) * (1.0 + st[s::kSaturation]);
        c = adjust_chroma(c, 0.0, gain);
    }
    if (st.split) {
        const double l = luminance(c);
        const double cross = 0.5 + 0.25 * st[s::kSplitBalance];
        const double w_hi = smoothstep(cross - 0.25, cross + 0.25, l);
        const double a_hi = k::kSplitToneOffset * st.split_hi.amount * w_hi;
        const double a_sh = k::kSplitToneOffset * st.split_sh.amount * (1.0 - w_hi);
        for (std::size_t ch = 0; ch < 3; ++ch) {
            c[ch] += a_hi * st.split_hi.dir[ch] + a_sh * st.split_sh.dir[ch];
        }
    }
    if (st.grading) {
        const double a = k::kGradingTintOffset * st.grading_tint.amount;
        for (std::size_t ch = 0; ch < 3; ++ch) {
            c[ch] += a * st.grading_tint.dir[ch] + k::kGradingLumOffset * st[s::kGradingLum];
        }
    }
    if (st.calibration) {
        const auto oc = opponent_chroma(c);
        const auto w = primary_band_weights(oc.hue);
        double dh = 0.0, ds = 0.0;
        for (std::size_t b = 0; b < 3; ++b) {
            dh += st[s::kCalPrimaryBegin + 2 * b] * w[b];
            ds += st[s::kCalPrimaryBegin + 2 * b + 1] * w[b];
        }
        const double ramp = chroma_ramp(oc.magnitude);
        c = adjust_chroma(c, k::kHueShiftDegrees * dh * ramp, 1.0 + ds * ramp);
        // Positive tint pushes shadows toward magenta.
        const double t = k::kShadowTintOffset * st[s::kCalShadowTint] * (1.0 - luminance(c));
        c[0] += 0.5 * t;
        c[1] -= t;
        c[2] += 0.5 * t;
    }
    if (st.clarity) {
        const double l = luminance(c);
        const double m = std::clamp(l, 0.0, 1.0);
        const double w = 16.0 * m * m * (1.0 - m) * (1.0 - m);
        const double amount = k::kClarityStrength * st[s::kClarity] * w;
        for (auto& x : c) x += amount * (x - 0.5);
    }
    if (st.dehaze) {
        const double d = st[s::kDehaze];
        const double black = k::kDehazeBlack * d;
        for (auto& x : c) x = (x - black) / (1.0 - black);
        const double l = luminance(c);
        const double sat = 1.0 + k::kDehazeSaturation * d;
        for (auto& x : c) x = l + (x - l) * sat;
    }
    if (st.gamma) {
        // Below the toe the power curve is replaced by the quadratic that
        // matches its value and slope there, keeping the map C1 and finite.
        const double p = std::exp2(-st[s::kGamma]);
        const double x0 = k::kGammaToe;
        const double a = (2.0 - p) * std::pow(x0, p - 1.0);
        const double b = (p - 1.0) * std::pow(x0, p - 2.0);
        for (auto& x : c) {
            const double ax = std::abs(x);
            x = std::copysign(ax < x0 ? ax * (a + b * ax) : std::pow(ax, p), x);
        }
    }
    if (st.fade) {
        const double lift = k::kFadeLift * st[s::kFade];
        for (auto& x : c) x = lift + (1.0 - lift) * x;
    }
    // Intermediate values may leave [0, 1]; one soft limit brings them back.
    limit_both(c);
    for (auto& x : c) x = std::clamp(x, 0.0, 1.0);
    return c;
}

}  // namespace

double soft_limit_upper(double y) noexcept {
    constexpr double w = k::kSoftKnee;
    if (y <= 1.0 - w) return y;
    if (y >= 1.0 + w) return 1.0;
    const double d = y - (1.0 - w);
    return y - d * d / (4.0 * w);
}

double soft_limit_lower(double y) noexcept {
    constexpr double w = k::kSoftKnee;
    if (y >= w) return y;
    if (y <= -w) return 0.0;
    const double d = w - y;
    return y + d * d / (4.0 * w);
}

Rgb apply_preset_pixel(const Preset& p, const Rgb& rgb) { return run(Stages(p), rgb); }

ImageBuffer apply_preset(const ImageBuffer& img, const Preset& p) {
    validate_image(img);
    validate_preset(p);
    const Stages st(p);
    ImageBuffer out(img.width(), img.height());
    const auto src = img.data();
    auto dst = out.data();
    const auto n = static_cast<std::ptrdiff_t>(img.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const float* in = &src[3 * i];
        const Rgb r = run(st, {in[0], in[1], in[2]});
        float* o = &dst[3 * i];
        o[0] = static_cast<float>(r[0]);
        o[1] = static_cast<float>(r[1]);
        o[2] = static_cast<float>(r[2]);
    }
    return out;
}

ImageBuffer apply_setting(const ImageBuffer& img, std::size_t index, double value) {
    if (index >= kNumSettings) throw Error(Errc::IndexOutOfRange, "setting index " + std::to_string(index));
    if (!std::isfinite(value) || value < -1.0 || value > 1.0) {
        throw Error(Errc::OutOfRange, "setting value " + std::to_string(value));
    }
    Preset p;
    p.values[index] = value;
    return apply_preset(img, p);
}

}  // namespace presetforge
