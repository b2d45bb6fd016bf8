#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "presetforge/image.hpp"
#include "presetforge/preset.hpp"

namespace presetforge {

/// n^3 lattice of RGB entries, red index fastest: entry (i, j, k) lives at
/// i + n*j + n*n*k.
class Lut3D {
public:
    Lut3D() = default;
    Lut3D(int n, std::vector<float> entries);

    int size() const noexcept { return n_; }
    std::span<const float> entries() const noexcept { return entries_; }
    const float* entry(int i, int j, int k) const noexcept {
        return &entries_[3 * (static_cast<std::size_t>(k) * n_ * n_ + static_cast<std::size_t>(j) * n_ + i)];
    }

    static Lut3D identity(int n);

    friend bool operator==(const Lut3D&, const Lut3D&) = default;

private:
    int n_ = 0;
    std::vector<float> entries_;
};

inline constexpr int kDefaultLutSize = 33;

Lut3D bake_lut(const Preset& p, int n = kDefaultLutSize);

/// Trilinear lookup per pixel; inputs are clamped to [0, 1] first.
ImageBuffer apply_lut(const ImageBuffer& img, const Lut3D& lut);

/// .cube text: "LUT_3D_SIZE n" then n^3 "r g b" lines, red fastest, 6 decimals.
void export_cube(const Lut3D& lut, std::ostream& sink, std::string_view title = {});
std::string export_cube(const Lut3D& lut, std::string_view title = {});
Lut3D import_cube(std::istream& source);
Lut3D import_cube(std::string_view text);

}  // namespace presetforge
