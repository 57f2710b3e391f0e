#pragma once

// Synthetic evidence corpora with crafted EXIF segments, plus a manifest of
// the counts a correct scan must reproduce. Expected values are computed here
// from the specs themselves, never by running the indexer.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoexif/exif.hpp"

namespace geoexif::fixtures {

struct ExifSpec {
    exif::ByteOrder byte_order = exif::ByteOrder::little_endian;
    std::optional<std::string> make;
    std::optional<std::string> model;
    std::optional<std::string> serial_number;
    std::optional<std::string> owner_name;
    std::optional<std::string> lens_model;
    std::optional<std::string> datetime;  // "YYYY:MM:DD HH:MM:SS", DateTimeOriginal
    std::optional<double> lat;            // signed decimal degrees
    std::optional<double> lng;
    std::optional<double> altitude_m;
    std::optional<std::string> gps_date;  // "YYYY:MM:DD"
    std::optional<std::string> gps_time;  // "HH:MM:SS"
    std::optional<std::string> processing_method;
    std::optional<double> dop;
    bool zero_denominator_lat = false;
    // IFD0 gets ten entries and the block ends after this many of them.
    std::optional<int> truncate_ifd0_after;
};

// TIFF-structured EXIF block starting at the byte-order mark.
std::vector<std::uint8_t> build_tiff_block(const ExifSpec& spec);

// Baseline JPEG with a deterministic pattern derived from seed, carrying
// the EXIF block as APP1 right after SOI when spec is given. corrupt_pixels
// cuts the entropy-coded data short while leaving the headers intact.
std::vector<std::uint8_t> make_jpeg(const ExifSpec* spec, int width, int height,
                                    std::uint64_t seed, bool corrupt_pixels = false);

enum class Format { jpeg, tiff, text, png };

struct FileSpec {
    std::string name;  // relative path, '/'-separated
    Format format = Format::jpeg;
    std::optional<ExifSpec> exif;
    bool corrupt_pixels = false;
    int width = 32;
    int height = 24;
    std::string text;  // body for text files
};

struct CorpusSpec {
    std::vector<FileSpec> files;
    // Replaces every file's extension (".dat") when set.
    std::optional<std::string> extension;
};

// Named presets:
//   session          SONY DSC-HX100V session plus two smaller devices
//   random        --count images over several devices, 40% geotagged
//   grouping      6 images sharing one rounded coordinate plus loners
//   verification  one clean fixture and one per finding
//   mixed         20 JPEGs (12 geotagged) + 5 text files
// Throws std::invalid_argument for an unknown name.
CorpusSpec preset(const std::string& name, std::size_t count = 500, std::uint64_t seed = 1);

// JSON corpus description: {"extension": ".dat", "files": [{...}]} or
// {"preset": "random", "count": 500, "seed": 7, "extension": ".dat"}.
CorpusSpec parse_corpus_spec(const nlohmann::json& doc);

// Writes <out>/evidence/... and <out>/manifest.json; returns the manifest.
nlohmann::json write_corpus(const CorpusSpec& spec, const std::filesystem::path& out);

// Expected fake_id of a spec, following the device identity rule.
std::string expected_fake_id(const std::optional<ExifSpec>& spec);

}  // namespace geoexif::fixtures
