#include <gtest/gtest.h>

#include <cmath>

#include "presetforge/error.hpp"
#include "presetforge/fileutil.hpp"
#include "presetforge/image_io.hpp"
#include "presetforge/resize.hpp"
#include "test_util.hpp"

using namespace presetforge;

namespace {

Errc load_error(const std::filesystem::path& p) {
    try {
        load_image(p);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::IoError;
}

}  // namespace

TEST(ImageIo, PngRoundTripWithinHalfQuantum) {
    test::TempDir dir;
    const auto img = test::random_image(37, 21, 1);
    save_image(img, dir.path() / "a.png");
    const auto back = load_image(dir.path() / "a.png");
    ASSERT_EQ(back.width(), 37);
    ASSERT_EQ(back.height(), 21);
    for (std::size_t i = 0; i < img.data().size(); ++i)
        ASSERT_LE(std::abs(back.data()[i] - img.data()[i]), 1.0 / 510.0 + 1e-7);
    EXPECT_EQ(back, quantize_8bit(img));
}

TEST(ImageIo, FullScaleMapsToOne) {
    test::TempDir dir;
    save_image(ImageBuffer(3, 3, 1.0f), dir.path() / "w.png");
    const auto back = load_image(dir.path() / "w.png");
    for (float v : back.data()) EXPECT_EQ(v, 1.0f);
}

TEST(ImageIo, JpegRoundTripIsClose) {
    test::TempDir dir;
    const auto img = test::smooth_image(64, 48, 2);
    save_image(img, dir.path() / "a.jpg");
    const auto back = load_image(dir.path() / "a.jpg");
    ASSERT_EQ(back.width(), 64);
    double err = 0;
    for (std::size_t i = 0; i < img.data().size(); ++i) err += std::abs(back.data()[i] - img.data()[i]);
    EXPECT_LT(err / img.data().size(), 0.02);
}

TEST(ImageIo, Errors) {
    test::TempDir dir;
    save_image(test::random_image(16, 16, 3), dir.path() / "a.png");
    auto bytes = read_file_bytes(dir.path() / "a.png");
    bytes.resize(bytes.size() / 2);
    write_file_atomic(dir.path() / "t.png", bytes);
    EXPECT_EQ(load_error(dir.path() / "t.png"), Errc::DecodeError);

    save_image(test::smooth_image(32, 32, 3), dir.path() / "a.jpg");
    auto jbytes = read_file_bytes(dir.path() / "a.jpg");
    jbytes.resize(200);
    write_file_atomic(dir.path() / "t.jpg", jbytes);
    EXPECT_EQ(load_error(dir.path() / "t.jpg"), Errc::DecodeError);

    write_file_atomic(dir.path() / "x.png", std::string_view("hello world"));
    EXPECT_EQ(load_error(dir.path() / "x.png"), Errc::UnsupportedFormat);
    EXPECT_EQ(load_error(dir.path() / "missing.png"), Errc::IoError);
    EXPECT_THROW(format_from_extension("a.bmp"), Error);
    EXPECT_EQ(format_from_extension("a.JPEG"), ImageFormat::Jpeg);
}

TEST(Resize, LongSideArithmetic) {
    const auto a = resize_long_side(ImageBuffer(1440, 720, 0.3f), 720);
    EXPECT_EQ(a.width(), 720);
    EXPECT_EQ(a.height(), 360);
    const auto b = resize_long_side(ImageBuffer(720, 480, 0.3f), 720);
    EXPECT_EQ(b.width(), 720);
    EXPECT_EQ(b.height(), 480);
    const auto s = long_side_size(300, 1000, 720);
    EXPECT_EQ(s.width, 216);
    EXPECT_EQ(s.height, 720);
    EXPECT_EQ(long_side_size(1000, 1, 10).height, 1);
    EXPECT_THROW(resize_long_side(a, 0), Error);
    EXPECT_THROW(resize_exact(a, 0, 5), Error);
}

TEST(Resize, ConstantStaysConstant) {
    const ImageBuffer c(97, 61, 0.37f);
    for (auto [w, h] : {std::pair{512, 512}, std::pair{31, 200}, std::pair{97, 61}, std::pair{1, 1}}) {
        const auto out = resize_exact(c, w, h);
        ASSERT_EQ(out.width(), w);
        ASSERT_EQ(out.height(), h);
        for (float v : out.data()) ASSERT_NEAR(v, 0.37f, 1e-6);
    }
}

TEST(Resize, SameSizeIsExactCopy) {
    const auto img = test::random_image(40, 30, 4);
    EXPECT_EQ(resize_exact(img, 40, 30), img);
}

TEST(Resize, OutputInRange) {
    const auto img = test::random_image(50, 50, 5);
    for (auto [w, h] : {std::pair{173, 91}, std::pair{13, 7}}) {
        const auto out = resize_exact(img, w, h);
        for (float v : out.data()) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
    }
}

TEST(Resize, CropWindow) {
    const auto img = test::random_image(10, 8, 6);
    const auto c = crop(img, 3, 2, 4, 5);
    ASSERT_EQ(c.width(), 4);
    ASSERT_EQ(c.height(), 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 4; ++x)
            for (int k = 0; k < 3; ++k) ASSERT_EQ(c.at(x, y, k), img.at(x + 3, y + 2, k));
    EXPECT_THROW(crop(img, 8, 0, 4, 4), Error);
}
