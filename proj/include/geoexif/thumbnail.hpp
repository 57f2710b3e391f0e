#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace geoexif::thumbnail {

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGB
};

// Aspect-preserving fit of the longest side into max_px; never upscales.
std::pair<int, int> fit_dimensions(int width, int height, int max_px);

// Full decode of a baseline or progressive JPEG. Any libjpeg warning (a
// premature end of data, a corrupt entropy segment) counts as failure, so a
// damaged stream never yields a half-grey picture. A nonzero min_width and
// min_height let libjpeg downscale during decode while keeping the output at
// least that large.
std::optional<RgbImage> decode_jpeg(std::span<const std::uint8_t> bytes, std::string* error = nullptr,
                                    int min_width = 0, int min_height = 0);

std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality = 85);

// Area-average resample to exactly width x height.
RgbImage resize(const RgbImage& image, int width, int height);

struct Result {
    int width = 0;
    int height = 0;
};

// Writes a scaled JPEG copy to out; the source bytes are only read. Absent
// (with error set) when the pixels cannot be decoded or the file not written.
std::optional<Result> make_thumbnail(std::span<const std::uint8_t> source, int max_px,
                                     const std::filesystem::path& out, std::string* error = nullptr);

}  // namespace geoexif::thumbnail
