#include "geoexif/report.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "geoexif/digest.hpp"
#include "geoexif/markup.hpp"

namespace geoexif::report {
namespace {

std::optional<std::string> embed(const std::filesystem::path& workspace,
                                 const std::optional<std::string>& thumb)
{
    if (!thumb) {
        return std::nullopt;
    }
    const auto bytes = read_file(workspace / *thumb);
    if (!bytes) {
        return std::nullopt;
    }
    return "data:image/jpeg;base64," + base64_encode(*bytes);
}

std::string fixed6(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string when(const std::optional<Timestamp>& t)
{
    return t ? format_iso(*t) : "";
}

nlohmann::ordered_json findings_json(const std::vector<VerificationFinding>& findings)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : findings) {
        arr.push_back({{"code", to_string(f.code)},
                       {"severity", to_string(f.severity)},
                       {"detail", f.detail}});
    }
    return arr;
}

nlohmann::ordered_json opt(const std::optional<std::string>& s)
{
    return s ? nlohmann::ordered_json(*s) : nlohmann::ordered_json();
}

constexpr const char* style = R"css(
body{font-family:sans-serif;margin:2em;color:#222}
h1{font-size:1.4em}h2{font-size:1.15em;margin-top:2em}
table{border-collapse:collapse}td,th{border:1px solid #bbb;padding:.3em .6em;text-align:left;vertical-align:top}
.banner{background:#fff3cd;border:1px solid #e0c36a;padding:1em;margin:1em 0}
.entry{border-top:1px solid #ccc;padding:1em 0}
.entry img{max-width:256px;float:right;margin-left:1em}
.linked img{max-width:96px;vertical-align:middle;margin-right:.5em}
.caveat{font-style:italic;color:#7a5b00}
.warning{color:#a00}.info{color:#555}
.clear{clear:both}
)css";

}  // namespace

ReportDocument build_report(const Store& store, RunId run, const FilterSpec& filter, int slot,
                            const std::filesystem::path& workspace)
{
    if (!kernels::slot_index(slot)) {
        throw std::invalid_argument("slot must be one of 1,2,3,4,5,12,24");
    }
    ReportDocument doc;
    doc.generated_at = now_utc();
    doc.run = run;
    doc.filter_echo = filter.describe();
    doc.slot = slot;

    for (auto& m : store.query_markers(run, filter)) {
        Entry e;
        e.thumbnail = embed(workspace, m.thumb_name);
        for (auto& a : store.linked_non_geotagged(run, m.id, slot)) {
            LinkedItem item;
            item.thumbnail = embed(workspace, a.thumb_name);
            item.asset = std::move(a);
            e.linked.push_back(std::move(item));
        }
        e.marker = std::move(m);
        doc.entries.push_back(std::move(e));
    }

    std::map<std::string, std::size_t> per_device;
    for (const auto& e : doc.entries) {
        ++per_device[e.marker.fake_id];
    }
    for (const auto& d : store.devices(run)) {
        if (const auto it = per_device.find(d.fake_id); it != per_device.end()) {
            doc.device_summary.push_back({d.fake_id, d.nb_fake_id, d.ordre, it->second});
        }
    }

    std::map<std::string, std::vector<std::size_t>> days;
    std::vector<std::size_t> undated;
    for (std::size_t i = 0; i < doc.entries.size(); ++i) {
        const auto& t = doc.entries[i].marker.datetime;
        if (t) {
            days[format_day(*t)].push_back(i);
        } else {
            undated.push_back(i);
        }
    }
    for (auto& [day, idx] : days) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return *doc.entries[a].marker.datetime < *doc.entries[b].marker.datetime;
        });
        doc.timeline.push_back({day, std::move(idx)});
    }
    if (!undated.empty()) {
        doc.timeline.push_back({"undated", std::move(undated)});
    }
    return doc;
}

std::string render_json(const ReportDocument& doc)
{
    nlohmann::ordered_json j;
    j["generated_at"] = format_iso(doc.generated_at);
    j["run"] = doc.run;
    j["filter"] = doc.filter_echo;
    j["slot"] = doc.slot;
    j["no_matches"] = doc.entries.empty();
    auto devices = nlohmann::ordered_json::array();
    for (const auto& d : doc.device_summary) {
        devices.push_back({{"fake_id", d.fake_id},
                           {"nb_fake_id", d.nb_fake_id},
                           {"ordre", d.ordre},
                           {"entries", d.entries}});
    }
    j["device_summary"] = devices;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : doc.entries) {
        const auto& m = e.marker;
        auto linked = nlohmann::ordered_json::array();
        for (const auto& l : e.linked) {
            linked.push_back({{"id", l.asset.id},
                              {"name", l.asset.name},
                              {"path", l.asset.path},
                              {"datetime", when(l.asset.datetime)},
                              {"sha256", l.asset.content_hash},
                              {"thumbnail", opt(l.thumbnail)}});
        }
        entries.push_back({{"id", m.id},
                           {"name", m.name},
                           {"path", m.path},
                           {"sha256", m.content_hash},
                           {"fake_id", m.fake_id},
                           {"make", m.make},
                           {"model", m.model},
                           {"ordre", m.ordre},
                           {"datetime", when(m.datetime)},
                           {"gps_datetime", when(m.gps_datetime)},
                           {"lat", fixed6(m.lat)},
                           {"lng", fixed6(m.lng)},
                           {"multiples", m.multiples},
                           {"address", opt(m.address)},
                           {"findings", findings_json(m.findings)},
                           {"thumbnail", opt(e.thumbnail)},
                           {"linked", linked}});
    }
    j["entries"] = entries;
    auto timeline = nlohmann::ordered_json::array();
    for (const auto& day : doc.timeline) {
        auto ids = nlohmann::ordered_json::array();
        for (const auto i : day.entries) {
            ids.push_back(doc.entries[i].marker.id);
        }
        timeline.push_back({{"day", day.day}, {"ids", ids}});
    }
    j["timeline"] = timeline;
    return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string render_html(const ReportDocument& doc)
{
    const auto esc = [](std::string_view s) { return escape_markup(s); };
    std::string h;
    h += "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Live report</title><style>";
    h += style;
    h += "</style></head><body>\n";
    h += "<h1>Live report</h1>\n<table>\n";
    h += "<tr><th>Generated</th><td>" + esc(format_iso(doc.generated_at)) + " UTC</td></tr>\n";
    h += "<tr><th>Run</th><td>" + std::to_string(doc.run) + "</td></tr>\n";
    h += "<tr><th>Filter</th><td>" + esc(doc.filter_echo) + "</td></tr>\n";
    h += "<tr><th>Linked window</th><td>+/-" + std::to_string(doc.slot) + " h</td></tr>\n";
    h += "<tr><th>Markers</th><td>" + std::to_string(doc.entries.size()) + "</td></tr>\n</table>\n";

    if (doc.entries.empty()) {
        h += "<div class=\"banner\">No matches: no marker satisfies the current filter.</div>\n";
        h += "</body></html>\n";
        return h;
    }

    h += "<h2>Devices</h2>\n<table><tr><th>Rank</th><th>Device id</th><th>Images in run</th>"
         "<th>Markers in report</th></tr>\n";
    for (const auto& d : doc.device_summary) {
        h += "<tr><td>" + std::to_string(d.ordre) + "</td><td>" + esc(d.fake_id) + "</td><td>"
             + std::to_string(d.nb_fake_id) + "</td><td>" + std::to_string(d.entries)
             + "</td></tr>\n";
    }
    h += "</table>\n<h2>Markers</h2>\n";
    for (const auto& e : doc.entries) {
        const auto& m = e.marker;
        h += "<div class=\"entry\" id=\"m" + std::to_string(m.id) + "\">";
        if (e.thumbnail) {
            h += "<img alt=\"" + esc(m.name) + "\" src=\"" + *e.thumbnail + "\">";
        }
        h += "<b>" + esc(m.name) + "</b> (#" + std::to_string(m.id) + ")<br>\n";
        h += "Path: " + esc(m.path) + "<br>\nSHA-256: <code>" + esc(m.content_hash)
             + "</code><br>\n";
        h += "Device: " + esc(m.fake_id) + " (rank " + std::to_string(m.ordre) + ")<br>\n";
        h += "Taken: " + esc(when(m.datetime)) + "; GPS time: " + esc(when(m.gps_datetime))
             + " UTC<br>\n";
        h += "Position: " + fixed6(m.lat) + ", " + fixed6(m.lng);
        if (m.multiples > 0) {
            h += " (location of " + std::to_string(m.multiples + 1) + " photos)";
        }
        h += "<br>\n";
        if (m.address) {
            h += "Address: " + esc(*m.address) + "<br>\n";
        }
        if (!m.findings.empty()) {
            h += "<ul>";
            for (const auto& f : m.findings) {
                h += std::string("<li class=\"") + (f.severity == Severity::warning ? "warning" : "info")
                     + "\">" + esc(to_string(f.code)) + ": " + esc(f.detail) + "</li>";
            }
            h += "</ul>\n";
        }
        if (!e.linked.empty()) {
            h += "<div class=\"linked\"><p class=\"caveat\">Same device, not geotagged, taken within "
                 "+/-" + std::to_string(doc.slot) + " h. Their position is not recorded; "
                 "treat it as unconfirmed.</p><ul>";
            for (const auto& l : e.linked) {
                h += "<li>";
                if (l.thumbnail) {
                    h += "<img alt=\"" + esc(l.asset.name) + "\" src=\"" + *l.thumbnail + "\">";
                }
                h += esc(l.asset.name) + " (" + esc(when(l.asset.datetime)) + ") "
                     + esc(l.asset.path) + "</li>";
            }
            h += "</ul></div>\n";
        }
        h += "<div class=\"clear\"></div></div>\n";
    }
    h += "<h2>Timeline</h2>\n";
    for (const auto& day : doc.timeline) {
        h += "<h3>" + esc(day.day) + "</h3><ul>";
        for (const auto i : day.entries) {
            const auto& m = doc.entries[i].marker;
            h += "<li>" + esc(when(m.datetime)) + " <a href=\"#m" + std::to_string(m.id) + "\">"
                 + esc(m.name) + "</a> " + esc(m.fake_id) + "</li>";
        }
        h += "</ul>\n";
    }
    h += "</body></html>\n";
    return h;
}

}  // namespace geoexif::report
