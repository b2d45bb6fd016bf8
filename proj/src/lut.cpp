#include "presetforge/lut.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "presetforge/color_engine.hpp"

namespace presetforge {

namespace {

void check_entries(int n, const std::vector<float>& entries) {
    if (n < 2) throw Error(Errc::InvalidLut, "lattice size must be >= 2");
    const std::size_t expected = 3 * static_cast<std::size_t>(n) * n * n;
    if (entries.size() != expected) throw Error(Errc::InvalidLut, "entry count does not match n^3");
    for (float v : entries) {
        if (!(v >= 0.0f && v <= 1.0f)) throw Error(Errc::InvalidLut, "entry outside [0,1]");
    }
}

double lattice_coord(int i, int n) { return static_cast<double>(i) / static_cast<double>(n - 1); }

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Lut3D::Lut3D(int n, std::vector<float> entries) : n_(n), entries_(std::move(entries)) { check_entries(n_, entries_); }

Lut3D Lut3D::identity(int n) {
    if (n < 2) throw Error(Errc::InvalidParameter, "lattice size must be >= 2");
    std::vector<float> e(3 * static_cast<std::size_t>(n) * n * n);
    std::size_t o = 0;
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                e[o++] = static_cast<float>(lattice_coord(i, n));
                e[o++] = static_cast<float>(lattice_coord(j, n));
                e[o++] = static_cast<float>(lattice_coord(k, n));
            }
        }
    }
    return Lut3D(n, std::move(e));
}

Lut3D bake_lut(const Preset& p, int n) {
    if (n < 2 || n > 256) throw Error(Errc::InvalidParameter, "lattice size must be in [2, 256]");
    const Lut3D id = Lut3D::identity(n);
    // The lattice colors form an n^2 x n image, so baking runs the exact
    // same per-pixel path as apply_preset.
    ImageBuffer lattice(n, n * n, std::vector<float>(id.entries().begin(), id.entries().end()));
    ImageBuffer baked = apply_preset(lattice, p);
    return Lut3D(n, std::vector<float>(baked.data().begin(), baked.data().end()));
}

ImageBuffer apply_lut(const ImageBuffer& img, const Lut3D& lut) {
    if (lut.size() < 2) throw Error(Errc::InvalidLut, "empty LUT");
    validate_image(img);
    const int n = lut.size();
    const double scale = n - 1;
    ImageBuffer out(img.width(), img.height());
    const auto src = img.data();
    auto dst = out.data();
    const auto count = static_cast<std::ptrdiff_t>(img.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
        int base[3];
        double frac[3];
        for (int c = 0; c < 3; ++c) {
            const double x = std::clamp(static_cast<double>(src[3 * p + c]), 0.0, 1.0) * scale;
            const int i = std::min(static_cast<int>(x), n - 2);
            base[c] = i;
            frac[c] = x - i;
        }
        for (int c = 0; c < 3; ++c) {
            auto v = [&](int di, int dj, int dk) -> double {
                return lut.entry(base[0] + di, base[1] + dj, base[2] + dk)[c];
            };
            auto lerp = [](double a, double b, double t) { return a + t * (b - a); };
            const double c00 = lerp(v(0, 0, 0), v(1, 0, 0), frac[0]);
            const double c10 = lerp(v(0, 1, 0), v(1, 1, 0), frac[0]);
            const double c01 = lerp(v(0, 0, 1), v(1, 0, 1), frac[0]);
            const double c11 = lerp(v(0, 1, 1), v(1, 1, 1), frac[0]);
            const double c0 = lerp(c00, c10, frac[1]);
            const double c1 = lerp(c01, c11, frac[1]);
            dst[3 * p + c] = static_cast<float>(lerp(c0, c1, frac[2]));
        }
    }
    return out;
}

void export_cube(const Lut3D& lut, std::ostream& sink, std::string_view title) {
    if (!title.empty()) sink << "TITLE \"" << title << "\"\n";
    sink << "LUT_3D_SIZE " << lut.size() << "\n";
    const auto e = lut.entries();
    char line[64];
    for (std::size_t i = 0; i < e.size(); i += 3) {
        std::snprintf(line, sizeof line, "%.6f %.6f %.6f\n", static_cast<double>(e[i]), static_cast<double>(e[i + 1]),
                      static_cast<double>(e[i + 2]));
        sink << line;
    }
}

std::string export_cube(const Lut3D& lut, std::string_view title) {
    std::ostringstream os;
    export_cube(lut, os, title);
    return os.str();
}

Lut3D import_cube(std::istream& source) {
    int n = 0;
    std::vector<float> entries;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(source, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fail = [&](const std::string& what) {
            throw Error(Errc::MalformedCube, "line " + std::to_string(line_no) + ": " + what);
        };
        if (std::isalpha(static_cast<unsigned char>(line.front()))) {
            const auto sp = line.find_first_of(" \t");
            const std::string_view key = line.substr(0, sp);
            const std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));
            if (key == "LUT_3D_SIZE") {
                if (n != 0 || !entries.empty()) fail("duplicate or late LUT_3D_SIZE");
                auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
                if (ec != std::errc() || ptr != rest.data() + rest.size() || n < 2 || n > 256) fail("bad LUT_3D_SIZE");
            } else if (key == "TITLE") {
                continue;
            } else if (key == "DOMAIN_MIN" || key == "DOMAIN_MAX") {
                std::istringstream is{std::string(rest)};
                double a, b, c;
                if (!(is >> a >> b >> c)) fail("bad domain");
                const double want = key == "DOMAIN_MIN" ? 0.0 : 1.0;
                if (a != want || b != want || c != want) fail("only the unit domain is supported");
            } else if (key == "LUT_1D_SIZE") {
                fail("1D LUTs are not supported");
            } else {
                fail("unknown keyword " + std::string(key));
            }
            continue;
        }
        if (n == 0) fail("data before LUT_3D_SIZE");
        float rgb[3];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (float& v : rgb) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            auto [ptr, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) fail("expected three numbers");
            p = ptr;
        }
        while (p < end && (*p == ' ' || *p == '\t')) ++p;
        if (p != end) fail("trailing characters");
        for (float v : rgb) {
            if (!(v >= 0.0f && v <= 1.0f)) fail("value outside [0,1]");
        }
        entries.insert(entries.end(), rgb, rgb + 3);
    }
    if (n == 0) throw Error(Errc::MalformedCube, "missing LUT_3D_SIZE");
    const std::size_t expected = static_cast<std::size_t>(n) * n * n;
    if (entries.size() / 3 != expected) {
        throw Error(Errc::SizeMismatch, "expected " + std::to_string(expected) + " entries, found " +
                                            std::to_string(entries.size() / 3));
    }
    return Lut3D(n, std::move(entries));
}

Lut3D import_cube(std::string_view text) {
    std::istringstream is{std::string(text)};
    return import_cube(is);
}

}  // namespace presetforge
