#include "presetforge/image.hpp"

#include <algorithm>
#include <cmath>

namespace presetforge {

void validate_image(const ImageBuffer& img) {
    if (img.empty() || img.width() <= 0 || img.height() <= 0) {
        throw Error(Errc::InvalidImage, "empty image");
    }
    const auto d = img.data();
    if (!std::all_of(d.begin(), d.end(), [](float v) { return std::isfinite(v); })) {
        throw Error(Errc::InvalidImage, "image contains NaN or Inf");
    }
}

}  // namespace presetforge
