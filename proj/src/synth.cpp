#include "presetforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "presetforge/color.hpp"
#include "presetforge/image_io.hpp"
#include "presetforge/rng.hpp"

namespace presetforge {

namespace {

Rgb random_color(Rng& rng, double l_lo, double l_hi) {
    return hsl_to_rgb({rng.uniform(0.0, 360.0), rng.uniform(0.15, 0.9), rng.uniform(l_lo, l_hi)});
}

Rgb mix(const Rgb& a, const Rgb& b, double t) {
    return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

// Bilinear value noise on a coarse lattice.
struct ValueNoise {
    int gw, gh;
    std::vector<double> v;
    ValueNoise(Rng& rng, int cells_x, int cells_y) : gw(cells_x + 1), gh(cells_y + 1), v(static_cast<std::size_t>(gw * gh)) {
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    }
    double at(double u, double w) const {  // u, w in [0, 1]
        const double fx = u * (gw - 1), fy = w * (gh - 1);
        const int x0 = std::min(static_cast<int>(fx), gw - 2), y0 = std::min(static_cast<int>(fy), gh - 2);
        const double tx = fx - x0, ty = fy - y0;
        auto g = [&](int x, int y) { return v[static_cast<std::size_t>(y * gw + x)]; };
        const double top = g(x0, y0) + (g(x0 + 1, y0) - g(x0, y0)) * tx;
        const double bot = g(x0, y0 + 1) + (g(x0 + 1, y0 + 1) - g(x0, y0 + 1)) * tx;
        return top + (bot - top) * ty;
    }
};

struct Blob {
    double cx, cy, rx, ry, edge;
    bool rect;
    Rgb color;
    double shade;  // vertical shading across the object
};

}  // namespace

ImageBuffer synth_source(std::uint64_t seed, int width, int height) {
    Rng rng(seed);
    const Rgb sky_top = random_color(rng, 0.35, 0.85);
    const Rgb sky_bottom = mix(sky_top, random_color(rng, 0.6, 0.95), rng.uniform(0.3, 0.9));
    const Rgb ground_top = random_color(rng, 0.2, 0.6);
    const Rgb ground_bottom = mix(ground_top, random_color(rng, 0.02, 0.3), rng.uniform(0.4, 1.0));
    const double horizon = rng.uniform(0.3, 0.7);
    const double tilt = rng.uniform(-0.15, 0.15);
    const bool sun = rng.uniform() < 0.5;
    const double sun_x = rng.uniform(0.1, 0.9), sun_y = rng.uniform(0.05, horizon * 0.8);
    const double sun_r = rng.uniform(0.04, 0.1);

    std::vector<Blob> blobs(3 + rng.uniform_int(6));
    for (auto& b : blobs) {
        b.cx = rng.uniform(0.05, 0.95);
        b.cy = rng.uniform(horizon - 0.2, 1.0);
        b.rx = rng.uniform(0.04, 0.25);
        b.ry = rng.uniform(0.04, 0.25);
        b.edge = rng.uniform(0.01, 0.06);
        b.rect = rng.uniform() < 0.4;
        b.color = random_color(rng, 0.05, 0.95);
        b.shade = rng.uniform(-0.3, 0.3);
    }
    ValueNoise shading(rng, 4, 3), texture(rng, 24, 18);
    const double shading_amp = rng.uniform(0.05, 0.2), texture_amp = rng.uniform(0.01, 0.06);

    ImageBuffer img(width, height);
    for (int y = 0; y < height; ++y) {
        const double v = (y + 0.5) / height;
        for (int x = 0; x < width; ++x) {
            const double u = (x + 0.5) / width;
            const double h = horizon + tilt * (u - 0.5);
            Rgb c = v < h ? mix(sky_top, sky_bottom, v / h) : mix(ground_top, ground_bottom, (v - h) / (1.0 - h));
            if (sun) {
                const double d = std::hypot(u - sun_x, (v - sun_y) * height / width);
                const double glow = std::exp(-d * d / (2.0 * sun_r * sun_r));
                c = mix(c, {1.0, 0.97, 0.85}, std::min(1.0, 1.2 * glow));
            }
            for (const auto& b : blobs) {
                const double dx = (u - b.cx) / b.rx, dy = (v - b.cy) / b.ry;
                const double r = b.rect ? std::max(std::abs(dx), std::abs(dy)) : std::hypot(dx, dy);
                const double a = 1.0 - smoothstep(1.0 - b.edge / std::min(b.rx, b.ry), 1.0, r);
                if (a <= 0.0) continue;
                const double s = 1.0 + b.shade * dy;
                c = mix(c, {b.color[0] * s, b.color[1] * s, b.color[2] * s}, a);
            }
            const double k = 1.0 + shading_amp * shading.at(u, v);
            const double t = texture_amp * texture.at(u, v) + 0.01 * rng.uniform(-1.0, 1.0);
            for (int ch = 0; ch < 3; ++ch) {
                img.at(x, y, ch) = static_cast<float>(std::clamp(c[static_cast<std::size_t>(ch)] * k + t, 0.0, 1.0));
            }
        }
    }
    return img;
}

std::vector<std::filesystem::path> write_synth_sources(const std::filesystem::path& dir, int count,
                                                       std::uint64_t seed, int width, int height) {
    std::vector<std::filesystem::path> out;
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "synth_%03d.png", i);
        out.push_back(dir / name);
        save_image(synth_source(derive_seed(seed, static_cast<std::uint64_t>(i)), width, height), out.back(),
                   ImageFormat::Png);
    }
    return out;
}

}  // namespace presetforge
