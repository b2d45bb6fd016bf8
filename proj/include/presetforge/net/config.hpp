#pragma once

#include <cstddef>

#include <json.hpp>

#include "presetforge/preset.hpp"

namespace presetforge::net {

struct NetConfig {
    int base_width = 16;  // C0; 64 at full scale
    int depth = 4;        // stride-2 stages per encoder
    int embed_dim = 64;   // 1024 at full scale
    int preset_dim = static_cast<int>(kNumSettings);

    /// Channels of encoder stage s: C0 * 2^s.
    int stage_width(int s) const { return base_width << s; }
    /// Input height and width must be multiples of this.
    int spatial_multiple() const { return 1 << depth; }

    /// Throws InvalidParameter.
    void validate() const;

    friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// Four-term loss weights; defaults 1, 0.5, 0.01, 1.
struct LossWeights {
    double mse = 1.0;
    double perceptual = 0.5;
    double preset_l1 = 0.01;
    double ppl = 1.0;

    friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

nlohmann::json to_json(const NetConfig& c);
NetConfig net_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LossWeights& w);
LossWeights loss_weights_from_json(const nlohmann::json& j);

}  // namespace presetforge::net
