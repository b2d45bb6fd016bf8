#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "presetforge/image.hpp"

namespace presetforge {

enum class ImageFormat { Png, Jpeg };

inline constexpr int kDefaultJpegQuality = 95;

/// Decodes PNG or JPEG (sniffed from the content) into [0, 1] floats, v/255.
ImageBuffer load_image(const std::filesystem::path& path);
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

/// Quantizes with round(x * 255) after clamping to [0, 1].
std::vector<std::uint8_t> encode_image(const ImageBuffer& img, ImageFormat format,
                                       int jpeg_quality = kDefaultJpegQuality);

/// Atomic write; format from the argument.
void save_image(const ImageBuffer& img, const std::filesystem::path& path, ImageFormat format,
                int jpeg_quality = kDefaultJpegQuality);

/// Format from the extension (.png, .jpg, .jpeg); UnsupportedFormat otherwise.
ImageFormat format_from_extension(const std::filesystem::path& path);
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

/// Applies the same 8-bit quantization save_image performs.
ImageBuffer quantize_8bit(const ImageBuffer& img);

}  // namespace presetforge
