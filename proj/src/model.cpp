#include "geoexif/model.hpp"

#include <array>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace geoexif {
namespace {

constexpr std::array<std::pair<FindingCode, std::string_view>, 8> code_names = {{
    {FindingCode::timestamp_mismatch, "TIMESTAMP_MISMATCH"},
    {FindingCode::low_gps_accuracy, "LOW_GPS_ACCURACY"},
    {FindingCode::non_gps_positioning, "NON_GPS_POSITIONING"},
    {FindingCode::altitude_implausible, "ALTITUDE_IMPLAUSIBLE"},
    {FindingCode::malformed_metadata, "MALFORMED_METADATA"},
    {FindingCode::altitude_unverified, "ALTITUDE_UNVERIFIED"},
    {FindingCode::capture_time_missing, "CAPTURE_TIME_MISSING"},
    {FindingCode::thumbnail_unavailable, "THUMBNAIL_UNAVAILABLE"},
}};

}  // namespace

std::string_view to_string(FindingCode code)
{
    for (const auto& [c, name] : code_names) {
        if (c == code) {
            return name;
        }
    }
    return "UNKNOWN";
}

std::string_view to_string(Severity severity)
{
    return severity == Severity::info ? "INFO" : "WARNING";
}

std::optional<FindingCode> parse_finding_code(std::string_view text)
{
    for (const auto& [c, name] : code_names) {
        if (name == text) {
            return c;
        }
    }
    return std::nullopt;
}

std::string findings_to_json(const std::vector<VerificationFinding>& findings)
{
    auto arr = nlohmann::json::array();
    for (const auto& f : findings) {
        arr.push_back({{"code", to_string(f.code)},
                       {"severity", to_string(f.severity)},
                       {"detail", f.detail}});
    }
    return arr.dump();
}

std::vector<VerificationFinding> findings_from_json(std::string_view json)
{
    std::vector<VerificationFinding> out;
    const auto arr = nlohmann::json::parse(json, nullptr, false);
    if (!arr.is_array()) {
        return out;
    }
    for (const auto& item : arr) {
        const auto code = parse_finding_code(item.value("code", ""));
        if (!code) {
            continue;
        }
        out.push_back({*code,
                       item.value("severity", "") == "INFO" ? Severity::info : Severity::warning,
                       item.value("detail", "")});
    }
    return out;
}

std::uint32_t MarkerRow::non_geotag_h(int hours) const
{
    const auto idx = kernels::slot_index(hours);
    if (!idx) {
        throw std::invalid_argument("unsupported slot width " + std::to_string(hours));
    }
    return non_geotag[*idx];
}

void FilterSpec::validate() const
{
    if (date_from && date_to && *date_from > *date_to) {
        throw std::invalid_argument("date_from is after date_to");
    }
    if (slot_hours && !kernels::slot_index(*slot_hours)) {
        throw std::invalid_argument("slot must be one of 1,2,3,4,5,12,24");
    }
}

bool FilterSpec::empty() const
{
    return !zone && !devices && !date_from && !date_to && !slot_hours;
}

std::string FilterSpec::describe() const
{
    if (empty()) {
        return "no filter (all markers)";
    }
    std::string out;
    const auto add = [&](const std::string& part) {
        if (!out.empty()) {
            out += "; ";
        }
        out += part;
    };
    if (zone) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "zone: within %.3f km of (%.6f, %.6f)", zone->radius_km(),
                      zone->center().latitude(), zone->center().longitude());
        add(buf);
    }
    if (devices) {
        std::string list;
        for (const auto& d : *devices) {
            list += (list.empty() ? "" : ", ") + d;
        }
        add("devices: " + list);
    }
    if (date_from) {
        add("from: " + format_iso(*date_from));
    }
    if (date_to) {
        add("to: " + format_iso(*date_to));
    }
    if (slot_hours) {
        add("linked within +/-" + std::to_string(*slot_hours) + " h");
    }
    return out;
}

}  // namespace geoexif
