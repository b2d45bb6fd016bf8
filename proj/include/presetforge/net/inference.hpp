#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "presetforge/image.hpp"
#include "presetforge/net/deep_preset.hpp"
#include "presetforge/nn/checkpoint.hpp"
#include "presetforge/preset.hpp"

namespace presetforge::net {

struct Model {
    NetConfig config;
    nn::ModelParams params;
};

/// Checkpoint carrying the net config in its metadata.
nn::Checkpoint make_checkpoint(const Model& model, const std::optional<nn::AdamState>& adam = std::nullopt,
                               const nlohmann::json& extra_meta = nlohmann::json::object());
/// Throws CheckpointMismatch when the tensors disagree with the stored config.
Model model_from_checkpoint(const nn::Checkpoint& ckpt);
Model load_model(const std::filesystem::path& path);

/// Mirror padding (edge sample not repeated) on the right and bottom.
ImageBuffer reflect_pad(const ImageBuffer& img, int width, int height);

struct StylizeResult {
    ImageBuffer image;
    Preset preset;
    std::vector<float> embedding;
};

/// One forward pass. The content is reflect-padded to the network multiple
/// and the output cropped back; the reference is resized to the padded size.
StylizeResult stylize(const Model& model, const ImageBuffer& content, const ImageBuffer& reference);

/// Head outputs for (content, reference) pairs of equal, valid size.
HeadOutput<float> embed(const Model& model, const nn::Tensor& content, const nn::Tensor& reference);

inline constexpr int kPickSize = 256;

struct PickResult {
    std::size_t index = 0;
    std::vector<double> distances;
};

/// argmin over candidates of perceptual_proxy(content, candidate), all
/// resized to 256x256 first; ties go to the lowest index.
PickResult pick_reference(const ImageBuffer& content, const std::vector<ImageBuffer>& candidates);

}  // namespace presetforge::net
