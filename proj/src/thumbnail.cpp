#include "geoexif/thumbnail.hpp"

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <fstream>

#include <jpeglib.h>

namespace geoexif::thumbnail {
namespace {

struct ErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
    int warnings;
};

extern "C" void on_error_exit(j_common_ptr cinfo)
{
    auto* err = reinterpret_cast<ErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

extern "C" void on_emit_message(j_common_ptr cinfo, int level)
{
    auto* err = reinterpret_cast<ErrorManager*>(cinfo->err);
    if (level < 0) {
        if (err->warnings++ == 0) {
            (*cinfo->err->format_message)(cinfo, err->message);
        }
    }
}

extern "C" void on_output_message(j_common_ptr) {}

void install(ErrorManager& err)
{
    jpeg_std_error(&err.base);
    err.base.error_exit = on_error_exit;
    err.base.emit_message = on_emit_message;
    err.base.output_message = on_output_message;
    err.message[0] = '\0';
    err.warnings = 0;
}

}  // namespace

std::pair<int, int> fit_dimensions(int width, int height, int max_px)
{
    if (width <= 0 || height <= 0 || max_px <= 0) {
        return {0, 0};
    }
    const int longest = std::max(width, height);
    if (longest <= max_px) {
        return {width, height};
    }
    const auto scale = [&](int side) {
        const long long v = (static_cast<long long>(side) * max_px + longest / 2) / longest;
        return static_cast<int>(std::max(1LL, v));
    };
    return {scale(width), scale(height)};
}

std::optional<RgbImage> decode_jpeg(std::span<const std::uint8_t> bytes, std::string* error,
                                    int min_width, int min_height)
{
    jpeg_decompress_struct cinfo{};
    ErrorManager err{};
    install(err);
    cinfo.err = &err.base;
    // Declared before setjmp; nothing with a destructor is created afterwards.
    RgbImage image;

    if (setjmp(err.jump)) {
        if (error) {
            *error = err.message;
        }
        jpeg_destroy_decompress(&cinfo);
        return std::nullopt;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    if (min_width > 0 && min_height > 0) {
        unsigned denom = 8;
        while (denom > 1
               && (cinfo.image_width / denom < static_cast<unsigned>(min_width)
                   || cinfo.image_height / denom < static_cast<unsigned>(min_height))) {
            denom /= 2;
        }
        cinfo.scale_num = 1;
        cinfo.scale_denom = denom;
    }
    jpeg_start_decompress(&cinfo);
    image.width = static_cast<int>(cinfo.output_width);
    image.height = static_cast<int>(cinfo.output_height);
    image.pixels.resize(static_cast<std::size_t>(image.width) * image.height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = image.pixels.data()
                       + static_cast<std::size_t>(cinfo.output_scanline) * image.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    if (err.warnings > 0) {
        if (error) {
            *error = err.message;
        }
        return std::nullopt;
    }
    return image;
}

std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality)
{
    jpeg_compress_struct cinfo{};
    jpeg_error_mgr jerr{};
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_compress(&cinfo);
    unsigned char* buffer = nullptr;
    unsigned long size = 0;
    jpeg_mem_dest(&cinfo, &buffer, &size);
    cinfo.image_width = static_cast<JDIMENSION>(image.width);
    cinfo.image_height = static_cast<JDIMENSION>(image.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        auto* row = const_cast<JSAMPROW>(image.pixels.data()
                                         + static_cast<std::size_t>(cinfo.next_scanline)
                                               * image.width * 3);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    std::vector<std::uint8_t> out(buffer, buffer + size);
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    return out;
}

RgbImage resize(const RgbImage& image, int width, int height)
{
    RgbImage out{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * 3)};
    const double sx = static_cast<double>(image.width) / width;
    const double sy = static_cast<double>(image.height) / height;
    for (int y = 0; y < height; ++y) {
        const int y0 = static_cast<int>(y * sy);
        const int y1 = std::max(y0 + 1, std::min(image.height, static_cast<int>((y + 1) * sy)));
        for (int x = 0; x < width; ++x) {
            const int x0 = static_cast<int>(x * sx);
            const int x1 = std::max(x0 + 1, std::min(image.width, static_cast<int>((x + 1) * sx)));
            unsigned long sum[3] = {0, 0, 0};
            for (int yy = y0; yy < y1; ++yy) {
                const auto* row = image.pixels.data() + static_cast<std::size_t>(yy) * image.width * 3;
                for (int xx = x0; xx < x1; ++xx) {
                    for (int c = 0; c < 3; ++c) {
                        sum[c] += row[xx * 3 + c];
                    }
                }
            }
            const unsigned long area = static_cast<unsigned long>(y1 - y0) * (x1 - x0);
            auto* px = out.pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
            for (int c = 0; c < 3; ++c) {
                px[c] = static_cast<std::uint8_t>((sum[c] + area / 2) / area);
            }
        }
    }
    return out;
}

std::optional<Result> make_thumbnail(std::span<const std::uint8_t> source, int max_px,
                                     const std::filesystem::path& out, std::string* error)
{
    // Probe the full size first so the DCT downscale targets the final box.
    jpeg_decompress_struct probe{};
    ErrorManager err{};
    install(err);
    probe.err = &err.base;
    int full_w = 0;
    int full_h = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&probe);
        if (error) {
            *error = err.message;
        }
        return std::nullopt;
    }
    jpeg_create_decompress(&probe);
    jpeg_mem_src(&probe, source.data(), static_cast<unsigned long>(source.size()));
    jpeg_read_header(&probe, TRUE);
    full_w = static_cast<int>(probe.image_width);
    full_h = static_cast<int>(probe.image_height);
    jpeg_destroy_decompress(&probe);

    const auto [tw, th] = fit_dimensions(full_w, full_h, max_px);
    if (tw == 0) {
        if (error) {
            *error = "image has no pixels";
        }
        return std::nullopt;
    }
    auto decoded = decode_jpeg(source, error, tw, th);
    if (!decoded) {
        return std::nullopt;
    }
    const RgbImage scaled = (decoded->width == tw && decoded->height == th)
                                ? std::move(*decoded)
                                : resize(*decoded, tw, th);
    const auto encoded = encode_jpeg(scaled);
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file || !file.write(reinterpret_cast<const char*>(encoded.data()),
                             static_cast<std::streamsize>(encoded.size()))) {
        if (error) {
            *error = "cannot write " + out.string();
        }
        return std::nullopt;
    }
    return Result{tw, th};
}

}  // namespace geoexif::thumbnail
