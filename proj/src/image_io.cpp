#include "presetforge/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "presetforge/fileutil.hpp"

namespace presetforge {

namespace {

std::uint8_t to_byte(float v) {
    const double x = std::clamp(static_cast<double>(v), 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(x * 255.0));
}

ImageBuffer from_rgb8(int w, int h, const std::uint8_t* rgb) {
    std::vector<float> px(3 * static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<float>(rgb[i] / 255.0);
    return ImageBuffer(w, h, std::move(px));
}

std::vector<std::uint8_t> to_rgb8(const ImageBuffer& img) {
    const auto d = img.data();
    std::vector<std::uint8_t> out(d.size());
    std::transform(d.begin(), d.end(), out.begin(), to_byte);
    return out;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw Error(Errc::DecodeError, std::string("png: ") + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    if (image.width == 0 || image.height == 0 || image.width > (1u << 15) || image.height > (1u << 15)) {
        png_image_free(&image);
        throw Error(Errc::DecodeError, "png: unsupported dimensions");
    }
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(Errc::DecodeError, "png: " + msg);
    }
    return from_rgb8(static_cast<int>(image.width), static_cast<int>(image.height), buf.data());
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
    const auto rgb = to_rgb8(img);
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, rgb.data(), 0, nullptr)) {
        throw Error(Errc::IoError, std::string("png encode: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, rgb.data(), 0, nullptr)) {
        throw Error(Errc::IoError, std::string("png encode: ") + image.message);
    }
    out.resize(size);
    return out;
}

struct JpegErrorManager {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

// libjpeg reports recoverable corruption (e.g. premature end of data) as
// warnings; treat those as decode failures too.
void jpeg_emit_message(j_common_ptr cinfo, int level) {
    if (level < 0) jpeg_error_exit(cinfo);
}

ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes) {
    jpeg_decompress_struct cinfo{};
    JpegErrorManager err{};
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    err.pub.emit_message = jpeg_emit_message;
    std::vector<std::uint8_t> buf;
    int w = 0, h = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw Error(Errc::DecodeError, std::string("jpeg: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    w = static_cast<int>(cinfo.output_width);
    h = static_cast<int>(cinfo.output_height);
    buf.resize(3 * static_cast<std::size_t>(w) * h);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = buf.data() + 3 * static_cast<std::size_t>(cinfo.output_scanline) * w;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return from_rgb8(w, h, buf.data());
}

std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality) {
    auto rgb = to_rgb8(img);
    jpeg_compress_struct cinfo{};
    JpegErrorManager err{};
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    unsigned char* mem = nullptr;
    unsigned long mem_size = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        std::free(mem);
        throw Error(Errc::IoError, std::string("jpeg encode: ") + err.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &mem, &mem_size);
    cinfo.image_width = static_cast<JDIMENSION>(img.width());
    cinfo.image_height = static_cast<JDIMENSION>(img.height());
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, std::clamp(quality, 1, 100), TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = rgb.data() + 3 * static_cast<std::size_t>(cinfo.next_scanline) * img.width();
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    std::vector<std::uint8_t> out(mem, mem + mem_size);
    jpeg_destroy_compress(&cinfo);
    std::free(mem);
    return out;
}

}  // namespace

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
    static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) return decode_png(bytes);
    if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff) return decode_jpeg(bytes);
    throw Error(Errc::UnsupportedFormat, "not a PNG or JPEG stream");
}

ImageBuffer load_image(const std::filesystem::path& path) { return decode_image(read_file_bytes(path)); }

std::vector<std::uint8_t> encode_image(const ImageBuffer& img, ImageFormat format, int jpeg_quality) {
    validate_image(img);
    return format == ImageFormat::Png ? encode_png(img) : encode_jpeg(img, jpeg_quality);
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path, ImageFormat format, int jpeg_quality) {
    write_file_atomic(path, encode_image(img, format, jpeg_quality));
}

ImageFormat format_from_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") return ImageFormat::Png;
    if (ext == ".jpg" || ext == ".jpeg") return ImageFormat::Jpeg;
    throw Error(Errc::UnsupportedFormat, "unknown image extension '" + ext + "'");
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
    save_image(img, path, format_from_extension(path));
}

ImageBuffer quantize_8bit(const ImageBuffer& img) {
    ImageBuffer out(img.width(), img.height());
    auto dst = out.data();
    const auto src = img.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(to_byte(src[i]) / 255.0);
    return out;
}

}  // namespace presetforge
