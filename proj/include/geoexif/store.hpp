#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoexif/model.hpp"

struct sqlite3;

namespace geoexif {

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Embedded analysis store (SQLite file in the workspace).
///
/// Tables: `analysis` (one row per run), `devices` (the per-run identifier
/// table), `markers` (geotagged images) and `assets` (every image, so the
/// non-geotagged side of time-slot links stays queryable). Readers only ever
/// see runs whose end_time is set; a scan writes its rows and its end_time in
/// one transaction.
class Store {
public:
    enum class Mode { read_write, read_only };

    static std::filesystem::path default_path(const std::filesystem::path& workspace);

    explicit Store(const std::filesystem::path& db_path, Mode mode = Mode::read_write);
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    // Records the run start; committed immediately so an aborted scan leaves
    // a row without end_time behind.
    RunId begin_run(const std::string& root, Timestamp start);

    void persist_devices(RunId run, std::span<const DeviceRow> rows);
    void persist_assets(RunId run, std::span<const AssetRow> rows);
    void persist_markers(RunId run, std::span<const MarkerRow> rows);
    // Writes counters and end_time.
    void persist_run(const AnalysisRow& row);

    // Runs body inside BEGIN/COMMIT, rolling back if it throws.
    void transaction(const std::function<void()>& body);

    std::optional<AnalysisRow> run(RunId id) const;
    std::vector<AnalysisRow> runs() const;
    std::optional<AnalysisRow> latest_finished_run() const;

    std::vector<DeviceRow> devices(RunId run) const;  // by ordre
    std::vector<MarkerRow> markers(RunId run) const;  // by id
    std::vector<AssetRow> assets(RunId run) const;    // by id
    std::optional<MarkerRow> marker(RunId run, std::int64_t id) const;
    std::optional<AssetRow> asset(RunId run, std::int64_t id) const;
    std::size_t marker_count(RunId run) const;

    // Reference markers matching every present clause, ordered by
    // (ordre, datetime, id); markers without a datetime sort last within
    // their device.
    std::vector<MarkerRow> query_markers(RunId run, const FilterSpec& filter) const;

    // Non-geotagged images of the marker's device within +/-slot hours of
    // its datetime. Throws NotFound for an unknown marker and
    // std::invalid_argument for an unsupported slot.
    std::vector<AssetRow> linked_non_geotagged(RunId run, std::int64_t marker_id, int slot) const;

    // Every marker at the same rounded coordinate, reference first.
    std::vector<MarkerRow> same_location_group(RunId run, std::int64_t marker_id) const;

private:
    void exec(const char* sql) const;

    sqlite3* db_ = nullptr;
};

}  // namespace geoexif
