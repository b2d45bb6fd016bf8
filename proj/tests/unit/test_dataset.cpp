#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "presetforge/color_engine.hpp"
#include "presetforge/dataset.hpp"
#include "presetforge/error.hpp"
#include "presetforge/fileutil.hpp"
#include "presetforge/image_io.hpp"
#include "presetforge/synth.hpp"
#include "presetforge/tensor_image.hpp"
#include "test_util.hpp"

using namespace presetforge;
namespace fs = std::filesystem;

namespace {

dataset::DatasetManifest make(const fs::path& root, const std::string& name, int sources, int presets,
                              std::uint64_t seed, bool jpeg = false) {
    const fs::path src = root / ("src" + std::to_string(sources));
    if (!fs::exists(src)) write_synth_sources(src, sources, 5, 96, 64);
    dataset::GenerateOptions g;
    g.images_dir = src;
    g.out_dir = root / name;
    g.n_presets = presets;
    g.seed = seed;
    g.jpeg = jpeg;
    return dataset::generate_dataset(g);
}

Errc error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::IoError;
}

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
    return m;
}

}  // namespace

TEST(Dataset, CountsAndSplit) {
    test::TempDir dir;
    const auto m = make(dir.path(), "d", 10, 3, 1);
    EXPECT_EQ(m.sources.size(), 10u);
    EXPECT_EQ(m.presets.size(), 3u);
    EXPECT_EQ(m.images.size(), 30u);
    EXPECT_EQ(m.samples.size(), 30u);
    EXPECT_EQ(m.split_sources("val").size(), 1u);
    EXPECT_EQ(m.split_sources("train").size(), 9u);
    for (const auto& s : m.sources) {
        EXPECT_FALSE(s.resized);
        EXPECT_EQ(s.width, 96);
    }
    for (const auto& t : m.samples) {
        EXPECT_NE(t.content, t.reference);
        EXPECT_NE(t.content, t.positive);
        EXPECT_NE(t.reference, t.positive);
    }
    EXPECT_TRUE(dataset::verify_manifest(m).ok());
}

TEST(Dataset, SameSeedGivesIdenticalManifest) {
    test::TempDir dir;
    make(dir.path(), "a", 4, 2, 9);
    make(dir.path(), "b", 4, 2, 9);
    make(dir.path(), "c", 4, 2, 10);
    const auto a = read_file_bytes(dir.path() / "a" / "manifest.json");
    EXPECT_EQ(a, read_file_bytes(dir.path() / "b" / "manifest.json"));
    EXPECT_NE(a, read_file_bytes(dir.path() / "c" / "manifest.json"));
    const auto back = dataset::load_manifest(dir.path() / "a" / "manifest.json");
    EXPECT_EQ(dataset::manifest_text(back), std::string(a.begin(), a.end()));
}

TEST(Dataset, StoredYMatchesReapplication) {
    test::TempDir dir;
    for (bool jpeg : {false, true}) {
        const auto m = make(dir.path(), jpeg ? "j" : "p", 3, 2, 3, jpeg);
        const double tol = jpeg ? 3.0 / 255.0 : 1.0 / 255.0;
        dataset::ImageCache cache(m.root);
        for (const auto& r : m.images) {
            const auto x = dataset::load_natural(m, cache, r.source);
            const auto y = dataset::load_retouched(m, cache, r.source, r.preset);
            const auto want = jpeg ? quantize_8bit(apply_preset(x, m.preset(r.preset).preset))
                                   : apply_preset(x, m.preset(r.preset).preset);
            if (jpeg) {
                // Lossy storage: the bound applies to the mean absolute error.
                double sum = 0;
                for (std::size_t i = 0; i < y.data().size(); ++i) sum += std::abs(y.data()[i] - want.data()[i]);
                EXPECT_LE(sum / y.data().size(), tol) << r.path;
            } else {
                EXPECT_LE(max_abs_diff(y, want), tol + 1e-7) << r.path;
            }
        }
    }
}

TEST(Dataset, TooFewSources) {
    test::TempDir dir;
    EXPECT_EQ(error_of([&] { make(dir.path(), "x", 2, 2, 1); }), Errc::InsufficientSources);
}

TEST(Triplet, ThreeSourcesArePermuted) {
    test::TempDir dir;
    const auto m = make(dir.path(), "d", 3, 4, 2);
    EXPECT_EQ(m.split_sources("train").size(), 2u);
    Rng rng(7);
    EXPECT_THROW(dataset::sample_triplet(m, rng, "train"), Error);
    for (int i = 0; i < 50; ++i) {
        const auto t = dataset::sample_triplet(m, rng, "all");
        std::set<std::string> roles{t.content, t.reference, t.positive};
        EXPECT_EQ(roles.size(), 3u);
    }
    Rng r1(11), r2(11);
    EXPECT_EQ(dataset::sample_triplet(m, r1, "all"), dataset::sample_triplet(m, r2, "all"));
}

TEST(PatchBatch, ShapesAndPatchErrors) {
    test::TempDir dir;
    const auto m = make(dir.path(), "d", 4, 2, 4);
    dataset::ImageCache cache(m.root);
    Rng rng(1);
    const auto pb = dataset::sample_patch_batch(m, cache, 4, 32, rng);
    const nn::Shape img{4, 3, 32, 32};
    EXPECT_EQ(pb.batch.x.shape(), img);
    EXPECT_EQ(pb.batch.y.shape(), img);
    EXPECT_EQ(pb.batch.z.shape(), img);
    EXPECT_EQ(pb.batch.z_prime.shape(), img);
    EXPECT_EQ(pb.batch.p.shape(), (nn::Shape{4, 69}));
    EXPECT_EQ(error_of([&] { dataset::sample_patch_batch(m, cache, 2, 24, rng); }), Errc::InvalidParameter);
    EXPECT_EQ(error_of([&] { dataset::sample_patch_batch(m, cache, 2, 128, rng); }), Errc::PatchTooLarge);
}

TEST(PatchBatch, XAndYShareTheCropWindow) {
    test::TempDir dir;
    const auto m = make(dir.path(), "d", 4, 2, 6);
    // Replace every stored image with one that encodes its own coordinates:
    // red = x / 255, green = y / 255.
    ImageBuffer coord(96, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 96; ++x) {
            coord.at(x, y, 0) = x / 255.0f;
            coord.at(x, y, 1) = y / 255.0f;
            coord.at(x, y, 2) = 0.5f;
        }
    for (const auto& s : m.sources) save_image(coord, m.root / s.path);
    for (const auto& r : m.images) save_image(coord, m.root / r.path);
    dataset::ImageCache cache(m.root);
    Rng rng(3);
    int z_differs = 0;
    for (int t = 0; t < 10; ++t) {
        const auto pb = dataset::sample_patch_batch(m, cache, 3, 16, rng);
        for (std::size_t n = 0; n < 3; ++n) {
            const auto x = tensor_to_image(pb.batch.x, n);
            const auto y = tensor_to_image(pb.batch.y, n);
            const auto z = tensor_to_image(pb.batch.z, n);
            ASSERT_EQ(x, y);
            // The crop is a window: coordinates advance by one per pixel.
            const int x0 = static_cast<int>(std::lround(x.at(0, 0, 0) * 255));
            const int y0 = static_cast<int>(std::lround(x.at(0, 0, 1) * 255));
            EXPECT_EQ(std::lround(x.at(15, 15, 0) * 255), x0 + 15);
            EXPECT_EQ(std::lround(x.at(15, 15, 1) * 255), y0 + 15);
            z_differs += !(z == x);
        }
    }
    EXPECT_GT(z_differs, 0);
}
