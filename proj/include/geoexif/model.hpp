#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "geoexif/geo.hpp"
#include "geoexif/kernels.hpp"
#include "geoexif/timestamp.hpp"

namespace geoexif {

enum class FindingCode {
    timestamp_mismatch,
    low_gps_accuracy,
    non_gps_positioning,
    altitude_implausible,
    malformed_metadata,
    // Informational companions for checks that could not run.
    altitude_unverified,
    capture_time_missing,
    thumbnail_unavailable,
};

enum class Severity { info, warning };

std::string_view to_string(FindingCode code);
std::string_view to_string(Severity severity);
std::optional<FindingCode> parse_finding_code(std::string_view text);

struct VerificationFinding {
    FindingCode code;
    Severity severity;
    std::string detail;  // carries the raw values that triggered it

    friend bool operator==(const VerificationFinding&, const VerificationFinding&) = default;
};

std::string findings_to_json(const std::vector<VerificationFinding>& findings);
std::vector<VerificationFinding> findings_from_json(std::string_view json);

using RunId = std::int64_t;

struct AnalysisRow {
    RunId id = 0;
    std::string root;
    Timestamp start_time{};
    std::optional<Timestamp> end_time;
    std::uint64_t files_scanned = 0;
    std::uint64_t images_found = 0;
    std::uint64_t geotagged_count = 0;
    std::uint64_t unreadable_count = 0;

    friend bool operator==(const AnalysisRow&, const AnalysisRow&) = default;
};

struct DeviceRow {
    std::string fake_id;
    std::string make;
    std::string model;
    int ordre = 0;
    int color = 0;
    std::uint32_t nb_fake_id = 0;

    friend bool operator==(const DeviceRow&, const DeviceRow&) = default;
};

// Every image of a run, geotagged or not. Its id is shared with the marker
// row when the image is geotagged.
struct AssetRow {
    std::int64_t id = 0;
    std::string name;
    std::string path;
    std::string content_hash;
    std::string kind;
    std::string fake_id;
    std::optional<Timestamp> datetime;
    std::optional<Timestamp> gps_datetime;
    bool geotagged = false;
    std::optional<std::string> thumb_name;
    std::string metadata;  // JSON object of harvested tags
    std::vector<VerificationFinding> findings;

    friend bool operator==(const AssetRow&, const AssetRow&) = default;
};

struct MarkerRow {
    std::int64_t id = 0;
    std::string name;
    std::string path;
    std::string content_hash;
    std::optional<std::string> thumb_name;
    std::string make;
    std::string model;
    std::string fake_id;
    std::optional<Timestamp> datetime;
    std::optional<Timestamp> gps_datetime;
    double lat = 0;  // rounded to 6 decimals
    double lng = 0;
    std::uint32_t multiples = 0;
    bool reference = false;
    std::string type;
    int color = 0;
    int ordre = 0;
    std::uint32_t nb_fake_id = 0;
    kernels::SlotCounts non_geotag{};  // indexed like kernels::slot_hours
    std::string metadata;
    std::optional<std::string> address;
    std::vector<VerificationFinding> findings;

    std::uint32_t non_geotag_h(int hours) const;

    friend bool operator==(const MarkerRow&, const MarkerRow&) = default;
};

// Conjunctive filter over reference markers. slot_hours keeps markers with at
// least one linked non-geotagged image within that window.
struct FilterSpec {
    std::optional<geo::ZoneFilter> zone;
    std::optional<std::set<std::string>> devices;
    std::optional<Timestamp> date_from;
    std::optional<Timestamp> date_to;
    std::optional<int> slot_hours;

    // Throws std::invalid_argument when date_from > date_to or the slot is
    // not one of the fixed widths.
    void validate() const;

    bool empty() const;

    // Human-readable echo for reports.
    std::string describe() const;
};

inline constexpr int device_palette_size = 12;

}  // namespace geoexif
