#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoexif/device_id.hpp"
#include "geoexif/exif.hpp"
#include "geoexif/geo.hpp"
#include "geoexif/geo_services.hpp"
#include "geoexif/kernels.hpp"
#include "geoexif/model.hpp"

namespace geoexif::indexer {

// Thrown for configuration problems (before any run is recorded) and for
// workspace failures (after which the run keeps end_time unset).
class ScanAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Progress {
    std::uint64_t files_scanned = 0;
    std::uint64_t images_found = 0;
    std::uint64_t geotagged_count = 0;
    std::uint64_t unreadable_count = 0;
};

using FileReader =
    std::function<std::optional<std::vector<std::uint8_t>>(const std::filesystem::path&)>;

struct VerifyOptions {
    double dop_threshold = 5.0;
    bool altitude_check = false;
    double altitude_tolerance_m = 200.0;
};

struct ScanConfig {
    std::filesystem::path root;
    std::filesystem::path workspace;
    int thumbnail_max_px = 256;
    bool reverse_geocode = false;
    VerifyOptions verify;
    // cache_path defaults to <workspace>/geocache.tsv when left empty.
    geo_services::GeoProviderConfig geo;

    // Defaults to geoexif::read_file. Must never open for writing.
    FileReader reader;
    // Called from worker threads under a lock.
    std::function<void(const Progress&)> on_progress;
    std::function<void(const std::string&)> log;

    // Throws ScanAborted when root is not a readable directory, the
    // workspace lies inside root, or the thumbnail size is not positive.
    void validate() const;
};

enum class Classification { geotagged, non_geotagged };

struct ImageAsset {
    std::filesystem::path path;
    std::string content_hash;
    exif::ImageKind kind = exif::ImageKind::not_image;
    std::optional<exif::ExifRecord> exif;
    DeviceFingerprint fingerprint;
    std::optional<Timestamp> exif_datetime;
    std::optional<Timestamp> gps_datetime;
    std::optional<geo::GeoPoint> position;
    std::optional<double> altitude_m;
    std::optional<std::string> thumbnail;  // workspace-relative
    std::optional<std::string> address;
    std::vector<VerificationFinding> findings;
};

// detect, parse, fingerprint, timestamps, classify. No thumbnail, no
// verification, no geo services. Absent when the bytes are not JPEG/TIFF.
std::optional<ImageAsset> build_asset(const std::filesystem::path& path,
                                      std::span<const std::uint8_t> bytes);

// Sets asset.position when the four GPS position tags are present and
// convertible; otherwise clears it and, for malformed values, appends a
// MALFORMED_METADATA finding.
Classification classify(ImageAsset& asset);

// Consistency checks on one asset. services is consulted only for the
// altitude check and may be null when that check is off.
std::vector<VerificationFinding> verify_asset(const ImageAsset& asset, const VerifyOptions& options,
                                              geo_services::GeoServices* services);

struct Grouping {
    std::uint32_t multiples = 0;
    bool reference = false;
};

// One entry per input asset; every input must have a position.
std::vector<Grouping> group_same_coordinates(std::span<const ImageAsset> geotagged);

// One entry per input asset; non-geotagged assets get zeros.
std::vector<kernels::SlotCounts> compute_timeslot_links(std::span<const ImageAsset> assets);

// Ordered by ordre.
std::vector<DeviceRow> rank_devices(std::span<const ImageAsset> assets);

// JSON object of the harvested tags and parser warnings stored with each row.
std::string metadata_json(const ImageAsset& asset);

// Full scan into the workspace store. Returns the finished run.
AnalysisRow scan_tree(const ScanConfig& config);

}  // namespace geoexif::indexer
