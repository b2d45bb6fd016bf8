#include "presetforge/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <set>

#include "presetforge/color_engine.hpp"
#include "presetforge/fileutil.hpp"
#include "presetforge/hash.hpp"
#include "presetforge/image_io.hpp"
#include "presetforge/resize.hpp"
#include "presetforge/tensor_image.hpp"

namespace presetforge::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string numbered(char prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%03zu", prefix, i);
    return buf;
}

// Stream ids for derive_seed.
constexpr std::uint64_t kPresetStream = 0x1000;
constexpr std::uint64_t kSplitStream = 0x2000;
constexpr std::uint64_t kSampleStream = 0x3000;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::MalformedDocument, "manifest: " + what); }

// Two distinct sources other than `content`, drawn from `pool`.
std::pair<std::string, std::string> draw_partners(const std::vector<std::string>& pool, const std::string& content,
                                                  Rng& rng) {
    std::vector<std::string> others;
    for (const auto& s : pool) {
        if (s != content) others.push_back(s);
    }
    if (others.size() < 2) throw Error(Errc::InsufficientSources, "need at least 3 sources");
    const auto a = rng.uniform_int(others.size());
    auto b = rng.uniform_int(others.size() - 1);
    if (b >= a) ++b;
    return {others[a], others[b]};
}

}  // namespace

const SourceRecord& DatasetManifest::source(const std::string& id) const {
    for (const auto& s : sources) {
        if (s.id == id) return s;
    }
    throw Error(Errc::InvalidParameter, "unknown source " + id);
}

const PresetRecord& DatasetManifest::preset(const std::string& id) const {
    for (const auto& p : presets) {
        if (p.id == id) return p;
    }
    throw Error(Errc::InvalidParameter, "unknown preset " + id);
}

const RetouchedRecord& DatasetManifest::retouched(const std::string& source, const std::string& preset) const {
    for (const auto& r : images) {
        if (r.source == source && r.preset == preset) return r;
    }
    throw Error(Errc::InvalidParameter, "no image for " + source + "/" + preset);
}

std::vector<std::string> DatasetManifest::split_sources(const std::string& split) const {
    std::vector<std::string> out;
    for (const auto& s : sources) {
        if (split == "all" || s.split == split) out.push_back(s.id);
    }
    return out;
}

json to_json(const DatasetManifest& m) {
    json sources = json::array();
    for (const auto& s : m.sources) {
        sources.push_back({{"id", s.id},
                           {"file", s.file},
                           {"file_hash", s.file_hash},
                           {"path", s.path},
                           {"hash", s.hash},
                           {"width", s.width},
                           {"height", s.height},
                           {"original_width", s.original_width},
                           {"original_height", s.original_height},
                           {"resized", s.resized},
                           {"split", s.split}});
    }
    json presets = json::array();
    for (const auto& p : m.presets) {
        presets.push_back({{"id", p.id}, {"seed", p.seed}, {"preset", serialize_preset(p.preset)}});
    }
    json images = json::array();
    for (const auto& r : m.images) {
        images.push_back({{"source", r.source}, {"preset", r.preset}, {"path", r.path}, {"hash", r.hash}});
    }
    json samples = json::array();
    for (const auto& t : m.samples) {
        samples.push_back(
            {{"content", t.content}, {"reference", t.reference}, {"positive", t.positive}, {"preset", t.preset}});
    }
    json splits = {{"train", m.split_sources("train")}, {"val", m.split_sources("val")}};
    return {{"version", m.version},
            {"seed", m.seed},
            {"format", m.format},
            {"long_side", kLongSide},
            {"sampling", {{"sparsity", m.sampling.sparsity}, {"sigma", m.sampling.sigma}}},
            {"sources", sources},
            {"presets", presets},
            {"images", images},
            {"splits", splits},
            {"samples", samples}};
}

DatasetManifest manifest_from_json(const json& j) {
    DatasetManifest m;
    try {
        m.version = j.at("version").get<int>();
        if (m.version != kManifestVersion) malformed("unsupported version " + std::to_string(m.version));
        m.seed = j.at("seed").get<std::uint64_t>();
        m.format = j.at("format").get<std::string>();
        m.sampling.sparsity = j.at("sampling").at("sparsity").get<double>();
        m.sampling.sigma = j.at("sampling").at("sigma").get<double>();
        for (const auto& s : j.at("sources")) {
            SourceRecord r;
            r.id = s.at("id");
            r.file = s.at("file");
            r.file_hash = s.at("file_hash");
            r.path = s.at("path");
            r.hash = s.at("hash");
            r.width = s.at("width");
            r.height = s.at("height");
            r.original_width = s.at("original_width");
            r.original_height = s.at("original_height");
            r.resized = s.at("resized");
            r.split = s.at("split");
            m.sources.push_back(std::move(r));
        }
        for (const auto& p : j.at("presets")) {
            PresetRecord r;
            r.id = p.at("id");
            r.seed = p.at("seed");
            r.preset = parse_preset(p.at("preset"));
            m.presets.push_back(std::move(r));
        }
        for (const auto& i : j.at("images")) {
            m.images.push_back({i.at("source"), i.at("preset"), i.at("path"), i.at("hash")});
        }
        for (const auto& t : j.at("samples")) {
            m.samples.push_back({t.at("content"), t.at("reference"), t.at("positive"), t.at("preset")});
        }
    } catch (const json::exception& e) {
        malformed(e.what());
    }
    return m;
}

std::string manifest_text(const DatasetManifest& m) { return to_json(m).dump(2) + "\n"; }

DatasetManifest load_manifest(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file_text(path));
    } catch (const json::exception& e) {
        malformed(e.what());
    }
    auto m = manifest_from_json(j);
    m.root = path.parent_path();
    return m;
}

std::vector<fs::path> list_images(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(Errc::IoError, "not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = lower(e.path().extension().string());
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return out;
}

DatasetManifest generate_dataset(const GenerateOptions& opts) {
    if (opts.n_presets < 1) throw Error(Errc::InvalidParameter, "n_presets must be at least 1");
    const auto files = list_images(opts.images_dir);
    if (files.size() < 3) {
        throw Error(Errc::InsufficientSources, "need at least 3 source images, found " + std::to_string(files.size()));
    }
    const ImageFormat format = opts.jpeg ? ImageFormat::Jpeg : ImageFormat::Png;
    const std::string ext = opts.jpeg ? ".jpg" : ".png";

    DatasetManifest m;
    m.seed = opts.seed;
    m.format = opts.jpeg ? "jpeg" : "png";
    m.sampling = opts.sampling;
    m.root = opts.out_dir;
    for (int i = 0; i < opts.n_presets; ++i) {
        PresetRecord r;
        r.id = numbered('p', static_cast<std::size_t>(i));
        r.seed = derive_seed(opts.seed, kPresetStream + static_cast<std::uint64_t>(i));
        r.preset = sample_random_preset(r.seed, opts.sampling);
        r.preset.id = r.id;
        m.presets.push_back(std::move(r));
    }

    const std::size_t n_src = files.size();
    m.sources.resize(n_src);
    std::vector<std::vector<RetouchedRecord>> per_source(n_src);
    std::vector<std::exception_ptr> errors(n_src);
    const auto n = static_cast<std::ptrdiff_t>(n_src);
    // Each worker owns one source and its retouched set; results land in
    // fixed slots, so the schedule cannot affect the manifest.
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t si = 0; si < n; ++si) {
        const auto i = static_cast<std::size_t>(si);
        try {
            auto& rec = m.sources[i];
            rec.id = numbered('s', i);
            rec.file = files[i].filename().string();
            const auto raw = read_file_bytes(files[i]);
            rec.file_hash = sha256_hex(raw);
            ImageBuffer img = decode_image(raw);
            rec.original_width = img.width();
            rec.original_height = img.height();
            if (std::max(img.width(), img.height()) > kLongSide) {
                img = resize_long_side(img, kLongSide);
                rec.resized = true;
            }
            rec.width = img.width();
            rec.height = img.height();
            // X is what a reader will decode from disk, and Y is built from X.
            const auto natural_bytes = encode_image(img, format);
            const ImageBuffer x = decode_image(natural_bytes);
            rec.path = "naturals/" + rec.id + ext;
            rec.hash = sha256_hex(natural_bytes);
            write_file_atomic(opts.out_dir / rec.path, natural_bytes);
            for (const auto& p : m.presets) {
                const auto bytes = encode_image(apply_preset(x, p.preset), format);
                RetouchedRecord r{rec.id, p.id, "retouched/" + p.id + "/" + rec.id + ext, sha256_hex(bytes)};
                write_file_atomic(opts.out_dir / r.path, bytes);
                per_source[i].push_back(std::move(r));
            }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (auto& v : per_source) {
        for (auto& r : v) m.images.push_back(std::move(r));
    }

    // 90/10 split by source.
    std::vector<std::size_t> order(n_src);
    for (std::size_t i = 0; i < n_src; ++i) order[i] = i;
    Rng split_rng(derive_seed(opts.seed, kSplitStream));
    for (std::size_t i = n_src - 1; i > 0; --i) std::swap(order[i], order[split_rng.uniform_int(i + 1)]);
    const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(kValFraction * static_cast<double>(n_src))));
    for (std::size_t k = 0; k < n_src; ++k) m.sources[order[k]].split = k < n_val ? "val" : "train";

    // One triplet per (source, preset); partners come from the same split
    // when it has enough sources.
    Rng sample_rng(derive_seed(opts.seed, kSampleStream));
    std::vector<std::string> all;
    for (const auto& s : m.sources) all.push_back(s.id);
    for (const auto& s : m.sources) {
        auto pool = m.split_sources(s.split);
        if (pool.size() < 3) pool = all;
        for (const auto& p : m.presets) {
            const auto [ref, pos] = draw_partners(pool, s.id, sample_rng);
            m.samples.push_back({s.id, ref, pos, p.id});
        }
    }

    write_file_atomic(opts.out_dir / "manifest.json", manifest_text(m));
    return m;
}

VerifyReport verify_manifest(const DatasetManifest& m) {
    VerifyReport r;
    auto check = [&](const std::string& rel, const std::string& hash) {
        ++r.files_checked;
        const auto path = m.root / rel;
        std::error_code ec;
        if (!fs::exists(path, ec)) {
            r.problems.push_back("missing " + rel);
        } else if (sha256_file(path) != hash) {
            r.problems.push_back("hash mismatch " + rel);
        }
    };
    for (const auto& s : m.sources) check(s.path, s.hash);
    for (const auto& i : m.images) check(i.path, i.hash);
    return r;
}

SampleTriplet sample_triplet(const DatasetManifest& m, Rng& rng, const std::string& split) {
    if (m.presets.empty()) throw Error(Errc::InvalidParameter, "manifest has no presets");
    const auto pool = m.split_sources(split);
    if (pool.size() < 3) {
        throw Error(Errc::InsufficientSources, "split '" + split + "' has " + std::to_string(pool.size()) + " sources");
    }
    const auto& preset = m.presets[rng.uniform_int(m.presets.size())].id;
    const auto content = pool[rng.uniform_int(pool.size())];
    const auto [ref, pos] = draw_partners(pool, content, rng);
    return {content, ref, pos, preset};
}

const ImageCache::Entry& ImageCache::entry(const std::string& rel) {
    auto it = images_.find(rel);
    if (it != images_.end()) return it->second;
    const ImageBuffer img = load_image(root_ / rel);
    Entry e{img.width(), img.height(), std::vector<std::uint8_t>(img.data().size())};
    const auto src = img.data();
    for (std::size_t i = 0; i < src.size(); ++i) e.rgb[i] = static_cast<std::uint8_t>(std::lround(src[i] * 255.0));
    return images_.emplace(rel, std::move(e)).first->second;
}

ImageBuffer ImageCache::get(const std::string& rel) {
    const auto& e = entry(rel);
    return crop(rel, 0, 0, e.width, e.height);
}

ImageBuffer ImageCache::crop(const std::string& rel, int x0, int y0, int width, int height) {
    const auto& e = entry(rel);
    if (x0 < 0 || y0 < 0 || width < 1 || height < 1 || x0 + width > e.width || y0 + height > e.height) {
        throw Error(Errc::InvalidParameter, "crop window outside " + rel);
    }
    ImageBuffer out(width, height);
    for (int y = 0; y < height; ++y) {
        const std::uint8_t* src = &e.rgb[3 * (static_cast<std::size_t>(y0 + y) * e.width + x0)];
        float* dst = out.px(0, y);
        for (int i = 0; i < 3 * width; ++i) dst[i] = static_cast<float>(src[i] / 255.0);
    }
    return out;
}

std::pair<int, int> ImageCache::dims(const std::string& rel) {
    const auto& e = entry(rel);
    return {e.width, e.height};
}

ImageBuffer load_natural(const DatasetManifest& m, ImageCache& cache, const std::string& source) {
    return cache.get(m.source(source).path);
}

ImageBuffer load_retouched(const DatasetManifest& m, ImageCache& cache, const std::string& source,
                           const std::string& preset) {
    return cache.get(m.retouched(source, preset).path);
}

PatchBatch sample_patch_batch(const DatasetManifest& m, ImageCache& cache, int batch, int patch, Rng& rng,
                              const std::string& split) {
    if (batch < 1) throw Error(Errc::InvalidParameter, "batch must be at least 1");
    if (patch < kPatchMultiple || patch % kPatchMultiple != 0) {
        throw Error(Errc::InvalidParameter, "patch must be a positive multiple of " + std::to_string(kPatchMultiple));
    }
    PatchBatch out;
    std::vector<ImageBuffer> xs, ys, zs, zps;
    nn::Tensor p({static_cast<std::size_t>(batch), kNumSettings});
    auto window = [&](const std::string& rel, int& x0, int& y0) {
        const auto [w, h] = cache.dims(rel);
        if (patch > w || patch > h) {
            throw Error(Errc::PatchTooLarge, "patch " + std::to_string(patch) + " exceeds " + rel + " (" +
                                                 std::to_string(w) + "x" + std::to_string(h) + ")");
        }
        x0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(w - patch + 1)));
        y0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(h - patch + 1)));
    };
    for (int b = 0; b < batch; ++b) {
        const auto t = sample_triplet(m, rng, split);
        const auto& x_path = m.source(t.content).path;
        const auto& y_path = m.retouched(t.content, t.preset).path;
        const auto& z_path = m.retouched(t.reference, t.preset).path;
        const auto& zp_path = m.retouched(t.positive, t.preset).path;
        int x0, y0;
        window(x_path, x0, y0);
        xs.push_back(cache.crop(x_path, x0, y0, patch, patch));
        ys.push_back(cache.crop(y_path, x0, y0, patch, patch));
        window(z_path, x0, y0);
        zs.push_back(cache.crop(z_path, x0, y0, patch, patch));
        window(zp_path, x0, y0);
        zps.push_back(cache.crop(zp_path, x0, y0, patch, patch));
        const auto& values = m.preset(t.preset).preset.values;
        for (std::size_t k = 0; k < kNumSettings; ++k) {
            p[static_cast<std::size_t>(b) * kNumSettings + k] = static_cast<float>(values[k]);
        }
        out.triplets.push_back(t);
    }
    out.batch.x = images_to_tensor(xs);
    out.batch.y = images_to_tensor(ys);
    out.batch.z = images_to_tensor(zs);
    out.batch.z_prime = images_to_tensor(zps);
    out.batch.p = std::move(p);
    return out;
}

}  // namespace presetforge::dataset
