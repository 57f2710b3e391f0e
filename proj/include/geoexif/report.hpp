#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "geoexif/model.hpp"
#include "geoexif/store.hpp"

namespace geoexif::report {

struct LinkedItem {
    AssetRow asset;
    std::optional<std::string> thumbnail;  // data URI
};

struct Entry {
    MarkerRow marker;
    std::optional<std::string> thumbnail;  // data URI
    std::vector<LinkedItem> linked;        // for the active slot
};

struct DeviceSummary {
    std::string fake_id;
    std::uint32_t nb_fake_id = 0;
    int ordre = 0;
    std::size_t entries = 0;  // markers of this device in the report
};

struct TimelineDay {
    std::string day;  // YYYY-MM-DD, or "undated"
    std::vector<std::size_t> entries;  // indexes into ReportDocument::entries
};

struct ReportDocument {
    Timestamp generated_at{};
    RunId run = 0;
    std::string filter_echo;
    int slot = 1;
    std::vector<DeviceSummary> device_summary;  // by ordre
    std::vector<Entry> entries;                 // query_markers order
    std::vector<TimelineDay> timeline;          // days ascending, undated last
};

// Pure function of the store contents and the filter, apart from
// generated_at. Thumbnails are read from the workspace and embedded.
ReportDocument build_report(const Store& store, RunId run, const FilterSpec& filter, int slot,
                            const std::filesystem::path& workspace);

// Self-contained HTML; needs neither network nor workspace to render.
std::string render_html(const ReportDocument& doc);
std::string render_json(const ReportDocument& doc);

}  // namespace geoexif::report
