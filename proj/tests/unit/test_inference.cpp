#include <gtest/gtest.h>

#include <cmath>

#include "presetforge/error.hpp"
#include "presetforge/metrics.hpp"
#include "presetforge/net/inference.hpp"
#include "presetforge/resize.hpp"
#include "presetforge/synth.hpp"
#include "presetforge/tensor_image.hpp"
#include "test_util.hpp"

using namespace presetforge;
using namespace presetforge::net;

namespace {

Model small_model(std::uint64_t seed = 1) {
    Model m;
    m.config = {4, 2, 8, 69};
    m.params = init_params<float>(m.config, seed);
    return m;
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

}  // namespace

TEST(ReflectPad, MirrorsWithoutRepeatingTheEdge) {
    ImageBuffer img(3, 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x)
            for (int k = 0; k < 3; ++k) img.at(x, y, k) = static_cast<float>(10 * y + x + k) / 100;
    const auto p = reflect_pad(img, 5, 4);
    ASSERT_EQ(p.width(), 5);
    ASSERT_EQ(p.height(), 4);
    // Columns 0 1 2 | 1 0, rows 0 1 | 0 1.
    const int cols[] = {0, 1, 2, 1, 0};
    const int rows[] = {0, 1, 0, 1};
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x)
            for (int k = 0; k < 3; ++k) ASSERT_EQ(p.at(x, y, k), img.at(cols[x], rows[y], k)) << x << "," << y;
    EXPECT_EQ(reflect_pad(img, 3, 2), img);
    EXPECT_EQ(error_of([&] { reflect_pad(img, 2, 2); }), Errc::InvalidParameter);
}

TEST(Stylize, ShapeRangeAndPaddingContract) {
    const Model m = small_model();
    const auto content = synth_source(3, 37, 21);
    const auto reference = synth_source(4, 50, 30);
    const auto r = stylize(m, content, reference);
    ASSERT_EQ(r.image.width(), 37);
    ASSERT_EQ(r.image.height(), 21);
    for (float v : r.image.data()) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
    for (double v : r.preset.values) ASSERT_TRUE(v >= -1.0 && v <= 1.0);
    EXPECT_EQ(r.embedding.size(), 8u);

    // Same result as running the net on the padded pair by hand.
    const auto x = image_to_tensor(reflect_pad(content, 40, 24));
    const auto z = image_to_tensor(resize_exact(reference, 40, 24));
    const auto t = encode_T(m.config, m.params, x, z);
    const auto y = decode_G(m.config, m.params, t, encode_C(m.config, m.params, x));
    EXPECT_EQ(r.image, crop(tensor_to_image(y), 0, 0, 37, 21));
    EXPECT_EQ(stylize(m, content, reference).image, r.image);
}

TEST(Stylize, CheckpointRoundTrip) {
    const Model m = small_model(5);
    test::TempDir dir;
    nn::save_checkpoint(make_checkpoint(m), dir.path() / "m.ckpt");
    const Model back = load_model(dir.path() / "m.ckpt");
    EXPECT_EQ(back.config, m.config);
    const auto c = synth_source(1, 32, 32), ref = synth_source(2, 32, 32);
    EXPECT_EQ(stylize(back, c, ref).image, stylize(m, c, ref).image);

    auto ckpt = make_checkpoint(m);
    ckpt.meta["net"]["base_width"] = 8;
    EXPECT_EQ(error_of([&] { model_from_checkpoint(ckpt); }), Errc::CheckpointMismatch);
}

TEST(PickReference, ArgminAndTies) {
    const auto content = synth_source(10, 64, 48);
    std::vector<ImageBuffer> cands{synth_source(11, 80, 60), synth_source(12, 40, 40), content, content};
    const auto r = pick_reference(content, cands);
    EXPECT_EQ(r.index, 2u);
    ASSERT_EQ(r.distances.size(), 4u);
    EXPECT_EQ(r.distances[2], 0.0);
    EXPECT_EQ(r.distances[3], 0.0);
    const auto small = resize_exact(content, kPickSize, kPickSize);
    EXPECT_EQ(r.distances[0], perceptual_proxy(small, resize_exact(cands[0], kPickSize, kPickSize)));
    EXPECT_EQ(error_of([&] { pick_reference(content, {}); }), Errc::EmptyCandidateSet);
}
