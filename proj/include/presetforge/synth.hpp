#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "presetforge/image.hpp"

namespace presetforge {

/// Procedural stand-in for a natural photo: sky and ground gradients, a few
/// soft-edged objects, low-frequency shading and fine grain. Pure function of
/// its arguments.
ImageBuffer synth_source(std::uint64_t seed, int width, int height);

/// Writes synth_000.png ... into dir; returns the paths.
std::vector<std::filesystem::path> write_synth_sources(const std::filesystem::path& dir, int count,
                                                       std::uint64_t seed, int width, int height);

}  // namespace presetforge
