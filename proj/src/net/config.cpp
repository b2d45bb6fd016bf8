#include "presetforge/net/config.hpp"

#include <string>

#include "presetforge/error.hpp"

namespace presetforge::net {

void NetConfig::validate() const {
    if (base_width < 1) throw Error(Errc::InvalidParameter, "base_width must be positive");
    if (depth < 1 || depth > 8) throw Error(Errc::InvalidParameter, "depth must be in [1, 8]");
    if (embed_dim < 1) throw Error(Errc::InvalidParameter, "embed_dim must be positive");
    if (preset_dim != static_cast<int>(kNumSettings)) {
        throw Error(Errc::InvalidParameter, "preset_dim must be " + std::to_string(kNumSettings));
    }
}

nlohmann::json to_json(const NetConfig& c) {
    return {{"base_width", c.base_width}, {"depth", c.depth}, {"embed_dim", c.embed_dim}, {"preset_dim", c.preset_dim}};
}

NetConfig net_config_from_json(const nlohmann::json& j) {
    NetConfig c;
    try {
        c.base_width = j.value("base_width", c.base_width);
        c.depth = j.value("depth", c.depth);
        c.embed_dim = j.value("embed_dim", c.embed_dim);
        c.preset_dim = j.value("preset_dim", c.preset_dim);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedDocument, std::string("net config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const LossWeights& w) {
    return {{"mse", w.mse}, {"perceptual", w.perceptual}, {"preset_l1", w.preset_l1}, {"ppl", w.ppl}};
}

LossWeights loss_weights_from_json(const nlohmann::json& j) {
    LossWeights w;
    try {
        w.mse = j.value("mse", w.mse);
        w.perceptual = j.value("perceptual", w.perceptual);
        w.preset_l1 = j.value("preset_l1", w.preset_l1);
        w.ppl = j.value("ppl", w.ppl);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedDocument, std::string("loss weights: ") + e.what());
    }
    for (double v : {w.mse, w.perceptual, w.preset_l1, w.ppl}) {
        if (!(v >= 0.0)) throw Error(Errc::InvalidParameter, "loss weights must be non-negative");
    }
    return w;
}

}  // namespace presetforge::net
