#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "presetforge/color_engine.hpp"
#include "presetforge/error.hpp"
#include "presetforge/lut.hpp"
#include "test_util.hpp"

using namespace presetforge;

namespace {

Errc cube_error(const std::string& text) {
    try {
        import_cube(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::IoError;
}

}  // namespace

TEST(Lut, ZeroPresetBakesIdentityLattice) {
    const Lut3D lut = bake_lut(preset_zero(), 33);
    ASSERT_EQ(lut.size(), 33);
    for (int k = 0; k < 33; ++k)
        for (int j = 0; j < 33; ++j)
            for (int i = 0; i < 33; ++i) {
                const float* e = lut.entry(i, j, k);
                ASSERT_EQ(e[0], static_cast<float>(i / 32.0));
                ASSERT_EQ(e[1], static_cast<float>(j / 32.0));
                ASSERT_EQ(e[2], static_cast<float>(k / 32.0));
            }
    EXPECT_EQ(lut, Lut3D::identity(33));
}

TEST(Lut, IdentityLatticeReproducesImage) {
    const auto img = test::random_image(64, 64, 1);
    const auto out = apply_lut(img, Lut3D::identity(33));
    for (std::size_t i = 0; i < img.data().size(); ++i) ASSERT_NEAR(out.data()[i], img.data()[i], 1e-6);
    const auto out2 = apply_lut(img, Lut3D::identity(2));
    for (std::size_t i = 0; i < img.data().size(); ++i) ASSERT_NEAR(out2.data()[i], img.data()[i], 1e-6);
}

TEST(Lut, ConstantLattice) {
    const Lut3D lut(3, std::vector<float>(3 * 27, 0.25f));
    const auto out = apply_lut(test::random_image(16, 16, 2), lut);
    for (float v : out.data()) ASSERT_EQ(v, 0.25f);
}

TEST(Lut, MatchesDirectApplicationForSingleSettings) {
    const auto img = test::random_image(64, 64, 3);
    for (std::size_t i = 0; i < kNumSettings; ++i) {
        for (double v : {-0.5, 0.5}) {
            Preset p;
            p.values[i] = v;
            const auto direct = apply_preset(img, p);
            const auto via = apply_lut(img, bake_lut(p));
            double worst = 0;
            for (std::size_t k = 0; k < img.data().size(); ++k)
                worst = std::max(worst, std::abs(static_cast<double>(direct.data()[k]) - via.data()[k]));
            EXPECT_LE(worst, 2.0 / 255.0) << catalog()[i].name << " " << v;
        }
    }
}

TEST(Lut, TwoPointExposure) {
    Preset p;
    p.values[setting::kExposure] = 0.5;
    const Lut3D lut = bake_lut(p, 2);
    const float* white = lut.entry(1, 1, 1);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(white[c], 1.0f);
    // The soft floor lifts exact black by a quarter knee width.
    const float* black = lut.entry(0, 0, 0);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(black[c], static_cast<float>(soft_limit(0.0)));
    EXPECT_NEAR(soft_limit(0.0), engine::kSoftKnee / 4, 1e-15);
}

TEST(Lut, BadSizes) {
    EXPECT_THROW(bake_lut(preset_zero(), 1), Error);
    EXPECT_THROW(Lut3D(2, std::vector<float>(10, 0.0f)), Error);
    EXPECT_THROW(apply_lut(test::random_image(4, 4, 1), Lut3D{}), Error);
}

TEST(Cube, IdentityExportLayout) {
    const std::string text = export_cube(Lut3D::identity(2));
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> data;
    bool saw_size = false;
    while (std::getline(in, line)) {
        if (line == "LUT_3D_SIZE 2") saw_size = true;
        if (!line.empty() && (std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-')) data.push_back(line);
    }
    EXPECT_TRUE(saw_size);
    ASSERT_EQ(data.size(), 8u);
    EXPECT_EQ(data[0], "0.000000 0.000000 0.000000");
    EXPECT_EQ(data[1], "1.000000 0.000000 0.000000");
    EXPECT_EQ(data[7], "1.000000 1.000000 1.000000");
}

TEST(Cube, RoundTrip) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Lut3D lut = bake_lut(sample_random_preset(derive_seed(9, s)), 9);
        const std::string text = export_cube(lut, "test");
        const Lut3D back = import_cube(text);
        ASSERT_EQ(back.size(), lut.size());
        for (std::size_t i = 0; i < lut.entries().size(); ++i)
            ASSERT_NEAR(back.entries()[i], lut.entries()[i], 1e-6);
        // Once quantized to the text grid, the round trip is exact.
        EXPECT_EQ(import_cube(export_cube(back, "test")), back);
        EXPECT_EQ(export_cube(back, "test"), text);
    }
}

TEST(Cube, Errors) {
    EXPECT_EQ(cube_error("LUT_3D_SIZE 2\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n0 0 1\n1 0 1\n0 1 1\n"), Errc::SizeMismatch);
    EXPECT_EQ(cube_error("0 0 0\n"), Errc::MalformedCube);
    EXPECT_EQ(cube_error("LUT_3D_SIZE 2\n0 0 zero\n"), Errc::MalformedCube);
    EXPECT_EQ(cube_error("LUT_3D_SIZE x\n"), Errc::MalformedCube);
}
