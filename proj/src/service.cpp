#include "geoexif/service.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <regex>
#include <set>

#include <httplib.h>

#include "geoexif/digest.hpp"
#include "geoexif/exif.hpp"
#include "geoexif/markup.hpp"
#include "geoexif/report.hpp"
#include "geoexif/store.hpp"

namespace geoexif::service {
namespace fs = std::filesystem;
namespace {

constexpr const char* linked_caveat =
    "Same device and close in time, but not geotagged: the position of this image is unconfirmed.";

std::string fixed6(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::optional<std::int64_t> to_int(std::string_view s)
{
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || s.empty()) {
        return std::nullopt;
    }
    return v;
}

double to_double(const std::string& name, const std::string& s)
{
    double v = 0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || s.empty() || !std::isfinite(v)) {
        throw std::invalid_argument(name + ": not a number: " + s);
    }
    return v;
}

std::optional<std::string> single(const Params& params, const std::string& key)
{
    const auto [lo, hi] = params.equal_range(key);
    if (lo == hi) {
        return std::nullopt;
    }
    if (std::next(lo) != hi) {
        throw std::invalid_argument(key + " given more than once");
    }
    return lo->second;
}

Response error(int status, const std::string& message)
{
    Response r;
    r.status = status;
    r.body = nlohmann::ordered_json{{"error", message}}.dump();
    return r;
}

Response json(const nlohmann::ordered_json& body)
{
    Response r;
    r.body = body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    return r;
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

nlohmann::ordered_json link_or_null(const std::optional<std::string>& thumb, std::int64_t id)
{
    return thumb ? nlohmann::ordered_json("/thumb/" + std::to_string(id))
                 : nlohmann::ordered_json();
}

std::string content_type_for(std::span<const std::uint8_t> bytes)
{
    switch (exif::detect_image_kind(bytes)) {
    case exif::ImageKind::jpeg: return "image/jpeg";
    case exif::ImageKind::tiff: return "image/tiff";
    default: return "application/octet-stream";
    }
}

// "/thumb/12" -> ("thumb", 12); "/markers.xml" -> ("markers.xml", absent).
std::pair<std::string, std::optional<std::string>> split_path(std::string_view path)
{
    while (!path.empty() && path.front() == '/') {
        path.remove_prefix(1);
    }
    while (!path.empty() && path.back() == '/') {
        path.remove_suffix(1);
    }
    const auto slash = path.find('/');
    if (slash == std::string_view::npos) {
        return {std::string(path), std::nullopt};
    }
    return {std::string(path.substr(0, slash)), std::string(path.substr(slash + 1))};
}

}  // namespace

FilterSpec parse_filter(const Params& params)
{
    FilterSpec f;
    const auto lat = single(params, "lat");
    const auto lng = single(params, "lng");
    const auto radius = single(params, "radius_km");
    if (lat || lng || radius) {
        if (!lat || !lng || !radius) {
            throw std::invalid_argument("zone filter needs lat, lng and radius_km");
        }
        f.zone.emplace(geo::GeoPoint(to_double("lat", *lat), to_double("lng", *lng)),
                       to_double("radius_km", *radius));
    }
    const auto [lo, hi] = params.equal_range("device");
    if (lo != hi) {
        f.devices.emplace();
        for (auto it = lo; it != hi; ++it) {
            f.devices->insert(it->second);
        }
    }
    if (const auto from = single(params, "from")) {
        f.date_from = parse_iso_datetime(*from, false);
        if (!f.date_from) {
            throw std::invalid_argument("from: bad date " + *from);
        }
    }
    if (const auto to = single(params, "to")) {
        f.date_to = parse_iso_datetime(*to, true);
        if (!f.date_to) {
            throw std::invalid_argument("to: bad date " + *to);
        }
    }
    if (const auto slot = single(params, "slot")) {
        const auto v = to_int(*slot);
        if (!v) {
            throw std::invalid_argument("slot: not an integer: " + *slot);
        }
        f.slot_hours = static_cast<int>(*v);
    }
    f.validate();
    return f;
}

std::string markers_xml(const std::vector<MarkerRow>& markers)
{
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (markers.empty()) {
        return out + "<markers/>\n";
    }
    out += "<markers>\n";
    for (const auto& m : markers) {
        const auto attr = [&](const char* name, const std::string& value) {
            out += ' ';
            out += name;
            out += "=\"";
            out += escape_markup(value);
            out += '"';
        };
        out += "  <marker";
        attr("name", m.name);
        attr("brand", m.make);
        attr("model", m.model);
        attr("fake_id", m.fake_id);
        attr("date", m.datetime ? format_feed(*m.datetime) : "");
        attr("lat", fixed6(m.lat));
        attr("lng", fixed6(m.lng));
        attr("id", std::to_string(m.id));
        attr("ordre", std::to_string(m.ordre));
        attr("multiples", std::to_string(m.multiples));
        attr("non_geotaggees", "");
        attr("nb_fake_id", std::to_string(m.nb_fake_id));
        for (std::size_t k = 0; k < kernels::slot_hours.size(); ++k) {
            const auto name = "non_geotag_h" + std::to_string(kernels::slot_hours[k]);
            attr(name.c_str(), std::to_string(m.non_geotag[k]));
        }
        out += "/>\n";
    }
    return out + "</markers>\n";
}

nlohmann::ordered_json markers_json(const std::vector<MarkerRow>& markers)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto& m : markers) {
        nlohmann::ordered_json j;
        j["name"] = m.name;
        j["brand"] = m.make;
        j["model"] = m.model;
        j["fake_id"] = m.fake_id;
        j["date"] = m.datetime ? format_feed(*m.datetime) : "";
        j["lat"] = fixed6(m.lat);
        j["lng"] = fixed6(m.lng);
        j["id"] = m.id;
        j["ordre"] = m.ordre;
        j["multiples"] = m.multiples;
        j["non_geotaggees"] = "";
        j["nb_fake_id"] = m.nb_fake_id;
        for (std::size_t k = 0; k < kernels::slot_hours.size(); ++k) {
            j["non_geotag_h" + std::to_string(kernels::slot_hours[k])] = m.non_geotag[k];
        }
        arr.push_back(std::move(j));
    }
    return arr;
}

Api::Api(fs::path workspace) : workspace_(std::move(workspace)) {}

Response Api::handle(std::string_view path, const Params& params) const
{
    const auto [head, tail] = split_path(path);
    static const std::set<std::string> known = {"markers.xml", "markers.json", "report", "devices",
                                                "runs", "thumb", "image", "meta", "linked", "group"};
    if (!known.count(head)) {
        return error(404, "no such endpoint: /" + head);
    }
    const bool takes_id = head == "thumb" || head == "image" || head == "meta" || head == "linked"
                          || head == "group";
    std::optional<std::int64_t> id;
    if (takes_id) {
        id = tail ? to_int(*tail) : std::nullopt;
        if (!id) {
            return error(404, "expected /" + head + "/{id}");
        }
    } else if (tail) {
        return error(404, "no such endpoint: /" + std::string(path));
    }

    const auto db = Store::default_path(workspace_);
    if (!fs::exists(db)) {
        return error(409, "no finished analysis run in " + workspace_.string()
                              + "; run `geoexif scan` first");
    }
    try {
        const Store store(db, Store::Mode::read_only);
        if (head == "runs") {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& r : store.runs()) {
                arr.push_back({{"id", r.id},
                               {"root", r.root},
                               {"start_time", format_iso(r.start_time)},
                               {"end_time", when(r.end_time)},
                               {"finished", r.end_time.has_value()},
                               {"files_scanned", r.files_scanned},
                               {"images_found", r.images_found},
                               {"geotagged_count", r.geotagged_count},
                               {"unreadable_count", r.unreadable_count}});
            }
            return json(arr);
        }

        std::optional<AnalysisRow> run;
        if (const auto requested = single(params, "run")) {
            const auto rid = to_int(*requested);
            if (!rid) {
                return error(400, "run: not an integer: " + *requested);
            }
            run = store.run(*rid);
            if (!run) {
                return error(404, "unknown run " + *requested);
            }
            if (!run->end_time) {
                return error(409, "run " + *requested + " did not finish");
            }
        } else {
            run = store.latest_finished_run();
            if (!run) {
                return error(409, "no finished analysis run in " + workspace_.string());
            }
        }
        const RunId rid = run->id;

        if (head == "markers.xml" || head == "markers.json" || head == "report") {
            FilterSpec filter;
            try {
                filter = parse_filter(params);
            } catch (const std::invalid_argument& e) {
                return error(400, e.what());
            }
            if (head == "report") {
                const auto format = single(params, "format").value_or("html");
                if (format != "html" && format != "json") {
                    return error(400, "format must be html or json");
                }
                const auto doc = report::build_report(store, rid, filter,
                                                      filter.slot_hours.value_or(1), workspace_);
                Response r;
                if (format == "html") {
                    r.content_type = "text/html; charset=utf-8";
                    r.body = report::render_html(doc);
                } else {
                    r.body = report::render_json(doc);
                }
                return r;
            }
            const auto rows = store.query_markers(rid, filter);
            if (head == "markers.xml") {
                Response r;
                r.content_type = "application/xml; charset=utf-8";
                r.body = markers_xml(rows);
                return r;
            }
            return json(markers_json(rows));
        }
        if (head == "devices") {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& d : store.devices(rid)) {
                arr.push_back({{"fake_id", d.fake_id},
                               {"make", d.make},
                               {"model", d.model},
                               {"ordre", d.ordre},
                               {"color", d.color},
                               {"nb_fake_id", d.nb_fake_id}});
            }
            return json(arr);
        }
        if (head == "linked") {
            const auto slot_text = single(params, "slot");
            const auto slot = slot_text ? to_int(*slot_text) : std::nullopt;
            if (!slot || !kernels::slot_index(static_cast<int>(*slot))) {
                return error(400, "slot must be one of 1,2,3,4,5,12,24");
            }
            auto arr = nlohmann::ordered_json::array();
            try {
                for (const auto& a : store.linked_non_geotagged(rid, *id, static_cast<int>(*slot))) {
                    arr.push_back({{"id", a.id},
                                   {"name", a.name},
                                   {"path", a.path},
                                   {"datetime", when(a.datetime)},
                                   {"thumb", link_or_null(a.thumb_name, a.id)},
                                   {"image", "/image/" + std::to_string(a.id)},
                                   {"meta", "/meta/" + std::to_string(a.id)},
                                   {"probable_only", true},
                                   {"caveat", linked_caveat}});
                }
            } catch (const NotFound& e) {
                return error(404, std::string("unknown ") + e.what());
            }
            return json(arr);
        }
        if (head == "group") {
            auto arr = nlohmann::ordered_json::array();
            try {
                for (const auto& m : store.same_location_group(rid, *id)) {
                    arr.push_back({{"id", m.id},
                                   {"name", m.name},
                                   {"path", m.path},
                                   {"fake_id", m.fake_id},
                                   {"date", m.datetime ? format_feed(*m.datetime) : ""},
                                   {"lat", fixed6(m.lat)},
                                   {"lng", fixed6(m.lng)},
                                   {"reference", m.reference},
                                   {"thumb", link_or_null(m.thumb_name, m.id)}});
                }
            } catch (const NotFound& e) {
                return error(404, std::string("unknown ") + e.what());
            }
            return json(arr);
        }

        // thumb, image, meta work for every image of the run.
        const auto asset = store.asset(rid, *id);
        if (!asset) {
            return error(404, "unknown image " + std::to_string(*id));
        }
        if (head == "meta") {
            nlohmann::ordered_json j;
            j["id"] = asset->id;
            j["name"] = asset->name;
            j["path"] = asset->path;
            j["sha256"] = asset->content_hash;
            j["kind"] = asset->kind;
            j["fake_id"] = asset->fake_id;
            j["datetime"] = when(asset->datetime);
            j["gps_datetime"] = when(asset->gps_datetime);
            j["geotagged"] = asset->geotagged;
            if (const auto m = store.marker(rid, *id)) {
                j["lat"] = fixed6(m->lat);
                j["lng"] = fixed6(m->lng);
                j["multiples"] = m->multiples;
                j["reference"] = m->reference;
                j["ordre"] = m->ordre;
                j["address"] = m->address ? nlohmann::ordered_json(*m->address)
                                          : nlohmann::ordered_json();
            }
            j["thumb"] = link_or_null(asset->thumb_name, asset->id);
            j["findings"] = findings_json(asset->findings);
            j["metadata"] = nlohmann::ordered_json::parse(asset->metadata, nullptr, false);
            return json(j);
        }
        if (head == "thumb") {
            if (!asset->thumb_name) {
                return error(404, "no thumbnail for image " + std::to_string(*id));
            }
            const auto bytes = read_file(workspace_ / *asset->thumb_name);
            if (!bytes) {
                return error(404, "thumbnail missing from workspace");
            }
            Response r;
            r.content_type = "image/jpeg";
            r.body.assign(bytes->begin(), bytes->end());
            return r;
        }
        // image
        std::error_code ec;
        const auto bytes = fs::is_regular_file(asset->path, ec) ? read_file(asset->path)
                                                                : std::nullopt;
        if (!bytes) {
            Response r = json({{"error", "original file is no longer available"},
                               {"path", asset->path},
                               {"sha256", asset->content_hash}});
            r.status = 410;
            return r;
        }
        Response r;
        r.content_type = content_type_for(*bytes);
        r.body.assign(bytes->begin(), bytes->end());
        const auto current = sha256_hex(*bytes);
        r.headers.emplace_back("X-Content-SHA256-Recorded", asset->content_hash);
        r.headers.emplace_back("X-Content-SHA256-Current", current);
        r.headers.emplace_back("X-Image-Meta", "/meta/" + std::to_string(*id));
        return r;
    } catch (const std::invalid_argument& e) {
        return error(400, e.what());
    } catch (const StoreError& e) {
        return error(500, e.what());
    }
}

bool serve(const Api& api, const ServeOptions& options)
{
    httplib::Server server;
    static const std::regex local_origin(R"(^https?://(localhost|127\.0\.0\.1|\[::1\])(:\d+)?$)");
    const auto cors = [](const httplib::Request& req, httplib::Response& res) {
        const auto origin = req.get_header_value("Origin");
        if (!origin.empty() && std::regex_match(origin, local_origin)) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
            res.set_header("Vary", "Origin");
        }
    };
    const auto handler = [&api, cors](const httplib::Request& req, httplib::Response& res) {
        Params params(req.params.begin(), req.params.end());
        const auto r = api.handle(req.path, params);
        res.status = r.status;
        for (const auto& [k, v] : r.headers) {
            res.set_header(k, v);
        }
        cors(req, res);
        res.set_content(r.body, r.content_type);
    };
    for (const char* pattern :
         {"/markers\\.xml", "/markers\\.json", "/report", "/devices", "/runs",
          "/(thumb|image|meta|linked|group)/[^/]+"}) {
        server.Get(pattern, handler);
    }
    server.Options(".*", [cors](const httplib::Request& req, httplib::Response& res) {
        cors(req, res);
        res.status = 204;
    });
    if (options.ui_dir && !server.set_mount_point("/", options.ui_dir->string())) {
        return false;
    }
    return server.listen(options.host, options.port);
}

}  // namespace geoexif::service
