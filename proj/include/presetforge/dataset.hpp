#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "presetforge/image.hpp"
#include "presetforge/net/deep_preset.hpp"
#include "presetforge/preset.hpp"
#include "presetforge/rng.hpp"

namespace presetforge::dataset {

inline constexpr int kManifestVersion = 1;
inline constexpr int kLongSide = 720;
inline constexpr double kValFraction = 0.1;
inline constexpr int kPatchMultiple = 16;

struct SourceRecord {
    std::string id;         // "s000", by sorted filename
    std::string file;       // original filename
    std::string file_hash;  // SHA-256 of the original file
    std::string path;       // stored natural, relative to the dataset root
    std::string hash;       // SHA-256 of the stored natural
    int width = 0, height = 0;
    int original_width = 0, original_height = 0;
    bool resized = false;  // false when the source was already within kLongSide
    std::string split;     // "train" or "val"
};

struct PresetRecord {
    std::string id;  // "p000"
    std::uint64_t seed = 0;
    Preset preset;
};

struct RetouchedRecord {
    std::string source;
    std::string preset;
    std::string path;
    std::string hash;
};

/// X = natural(content), Y = P(content), Z = P(reference), Z' = P(positive).
struct SampleTriplet {
    std::string content, reference, positive, preset;
    friend bool operator==(const SampleTriplet&, const SampleTriplet&) = default;
};

struct DatasetManifest {
    int version = kManifestVersion;
    std::uint64_t seed = 0;
    std::string format = "png";
    PresetSampling sampling;
    std::vector<SourceRecord> sources;
    std::vector<PresetRecord> presets;
    std::vector<RetouchedRecord> images;  // sorted by (source, preset)
    std::vector<SampleTriplet> samples;   // one per (source, preset) pair
    std::filesystem::path root;           // not serialized

    const SourceRecord& source(const std::string& id) const;
    const PresetRecord& preset(const std::string& id) const;
    const RetouchedRecord& retouched(const std::string& source, const std::string& preset) const;
    /// Source ids in "train", "val", or "all".
    std::vector<std::string> split_sources(const std::string& split) const;
};

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);
std::string manifest_text(const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& path);

struct GenerateOptions {
    std::filesystem::path images_dir;
    std::filesystem::path out_dir;
    int n_presets = 32;
    std::uint64_t seed = 0;
    bool jpeg = false;
    PresetSampling sampling;
};

/// Image files (png, jpg, jpeg) in the directory, sorted by filename.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Writes naturals/, retouched/ and manifest.json under out_dir. Output is a
/// pure function of the sources, options and seed.
DatasetManifest generate_dataset(const GenerateOptions& opts);

struct VerifyReport {
    std::size_t files_checked = 0;
    std::vector<std::string> problems;
    bool ok() const { return problems.empty(); }
};
/// Checks every referenced file exists with its recorded hash.
VerifyReport verify_manifest(const DatasetManifest& m);

/// Draws a preset, then three distinct sources from the split.
SampleTriplet sample_triplet(const DatasetManifest& m, Rng& rng, const std::string& split = "train");

/// Decoded images kept as 8-bit to bound memory; accessors convert to float.
class ImageCache {
public:
    explicit ImageCache(std::filesystem::path root) : root_(std::move(root)) {}
    ImageBuffer get(const std::string& relative_path);
    ImageBuffer crop(const std::string& relative_path, int x0, int y0, int width, int height);
    std::pair<int, int> dims(const std::string& relative_path);
    std::size_t size() const { return images_.size(); }

private:
    struct Entry {
        int width, height;
        std::vector<std::uint8_t> rgb;
    };
    const Entry& entry(const std::string& relative_path);
    std::filesystem::path root_;
    std::map<std::string, Entry> images_;
};

ImageBuffer load_natural(const DatasetManifest& m, ImageCache& cache, const std::string& source);
ImageBuffer load_retouched(const DatasetManifest& m, ImageCache& cache, const std::string& source,
                           const std::string& preset);

struct PatchBatch {
    net::Batch<float> batch;
    std::vector<SampleTriplet> triplets;
};

/// X and Y share one crop window; Z and Z' are cropped independently.
/// patch must be a positive multiple of 16 (InvalidParameter) and fit inside
/// every image (PatchTooLarge).
PatchBatch sample_patch_batch(const DatasetManifest& m, ImageCache& cache, int batch, int patch, Rng& rng,
                              const std::string& split = "train");

}  // namespace presetforge::dataset
