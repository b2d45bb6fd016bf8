#include "presetforge/tensor_image.hpp"

#include <string>

namespace presetforge {

namespace {

void write_sample(const ImageBuffer& img, float* dst) {
    const std::size_t plane = img.pixel_count();
    const auto src = img.data();
    for (std::size_t i = 0; i < plane; ++i)
        for (std::size_t c = 0; c < 3; ++c) dst[c * plane + i] = src[3 * i + c];
}

}  // namespace

nn::Tensor image_to_tensor(const ImageBuffer& img) { return images_to_tensor({img}); }

nn::Tensor images_to_tensor(const std::vector<ImageBuffer>& imgs) {
    if (imgs.empty()) throw Error(Errc::ShapeMismatch, "no images to stack");
    const int w = imgs[0].width(), h = imgs[0].height();
    nn::Tensor t({imgs.size(), 3, static_cast<std::size_t>(h), static_cast<std::size_t>(w)});
    const std::size_t len = 3 * imgs[0].pixel_count();
    for (std::size_t n = 0; n < imgs.size(); ++n) {
        if (imgs[n].width() != w || imgs[n].height() != h) {
            throw Error(Errc::ShapeMismatch, "stacked images differ in size");
        }
        write_sample(imgs[n], t.data() + n * len);
    }
    return t;
}

ImageBuffer tensor_to_image(const nn::Tensor& t, std::size_t n) {
    if (t.rank() != 4 || t.dim(1) != 3 || n >= t.dim(0)) {
        throw Error(Errc::ShapeMismatch, "expected N x 3 x H x W, got " + nn::shape_string(t.shape()));
    }
    const std::size_t h = t.dim(2), w = t.dim(3), plane = h * w;
    ImageBuffer img(static_cast<int>(w), static_cast<int>(h));
    auto dst = img.data();
    const float* src = t.data() + n * 3 * plane;
    for (std::size_t i = 0; i < plane; ++i)
        for (std::size_t c = 0; c < 3; ++c) dst[3 * i + c] = src[c * plane + i];
    return img;
}

}  // namespace presetforge
