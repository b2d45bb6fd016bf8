#include "presetforge/net/inference.hpp"

#include <cmath>

#include "presetforge/metrics.hpp"
#include "presetforge/resize.hpp"
#include "presetforge/tensor_image.hpp"

namespace presetforge::net {

nn::Checkpoint make_checkpoint(const Model& model, const std::optional<nn::AdamState>& adam,
                               const nlohmann::json& extra_meta) {
    nn::Checkpoint c;
    c.params = model.params;
    c.adam = adam;
    c.meta = extra_meta.is_object() ? extra_meta : nlohmann::json::object();
    c.meta["net"] = to_json(model.config);
    return c;
}

Model model_from_checkpoint(const nn::Checkpoint& ckpt) {
    if (!ckpt.meta.contains("net")) throw Error(Errc::CheckpointMismatch, "checkpoint has no net config");
    Model m;
    try {
        m.config = net_config_from_json(ckpt.meta["net"]);
    } catch (const Error& e) {
        throw Error(Errc::CheckpointMismatch, e.what());
    }
    m.params = ckpt.params;
    check_params(m.config, m.params);
    return m;
}

Model load_model(const std::filesystem::path& path) { return model_from_checkpoint(nn::load_checkpoint(path)); }

namespace {

int reflect(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

int round_up(int v, int m) { return (v + m - 1) / m * m; }

}  // namespace

ImageBuffer reflect_pad(const ImageBuffer& img, int width, int height) {
    if (width < img.width() || height < img.height()) {
        throw Error(Errc::InvalidParameter, "padding cannot shrink an image");
    }
    ImageBuffer out(width, height);
    for (int y = 0; y < height; ++y) {
        const int sy = reflect(y, img.height());
        for (int x = 0; x < width; ++x) {
            const float* s = img.px(reflect(x, img.width()), sy);
            float* d = out.px(x, y);
            d[0] = s[0];
            d[1] = s[1];
            d[2] = s[2];
        }
    }
    return out;
}

HeadOutput<float> embed(const Model& model, const nn::Tensor& content, const nn::Tensor& reference) {
    return head_L(model.config, model.params, encode_T(model.config, model.params, content, reference).final_map);
}

StylizeResult stylize(const Model& model, const ImageBuffer& content, const ImageBuffer& reference) {
    validate_image(content);
    validate_image(reference);
    const int m = model.config.spatial_multiple();
    const int w = round_up(content.width(), m), h = round_up(content.height(), m);
    const auto x = image_to_tensor(reflect_pad(content, w, h));
    const auto z = image_to_tensor(resize_exact(reference, w, h));
    const auto t = encode_T(model.config, model.params, x, z);
    const auto head = head_L(model.config, model.params, t.final_map);
    const auto y = decode_G(model.config, model.params, t, encode_C(model.config, model.params, x));
    StylizeResult r;
    r.image = crop(tensor_to_image(y), 0, 0, content.width(), content.height());
    for (std::size_t k = 0; k < kNumSettings; ++k) r.preset.values[k] = static_cast<double>(head.preset[k]);
    r.preset.id = "predicted";
    r.embedding = head.embedding.vec();
    return r;
}

PickResult pick_reference(const ImageBuffer& content, const std::vector<ImageBuffer>& candidates) {
    if (candidates.empty()) throw Error(Errc::EmptyCandidateSet, "no candidate references");
    const auto base = resize_exact(content, kPickSize, kPickSize);
    PickResult r;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double d = perceptual_proxy(base, resize_exact(candidates[i], kPickSize, kPickSize));
        r.distances.push_back(d);
        if (d < r.distances[r.index]) r.index = i;
    }
    return r;
}

}  // namespace presetforge::net
