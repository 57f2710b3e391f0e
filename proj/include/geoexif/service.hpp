#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoexif/model.hpp"

namespace geoexif::service {

using Params = std::multimap<std::string, std::string>;

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

// Query parameters: lat, lng, radius_km (all three or none); device
// (repeatable, exact fake_id); from, to (YYYY-MM-DD[ HH:MM:SS], a bare `to`
// date covers the whole day); slot. Throws std::invalid_argument.
FilterSpec parse_filter(const Params& params);

// Marker feed in the XML attribute layout consumed by the map front end.
std::string markers_xml(const std::vector<MarkerRow>& markers);
nlohmann::ordered_json markers_json(const std::vector<MarkerRow>& markers);

// Request router over the workspace store. Every endpoint is read-only and
// every body is a function of the store contents and the query alone.
//
//   /markers.xml  /markers.json  /report  /devices  /runs
//   /thumb/{id}   /image/{id}    /meta/{id}  /linked/{id}?slot=h  /group/{id}
//
// Queries go to the latest finished run unless run={id} is given.
class Api {
public:
    explicit Api(std::filesystem::path workspace);

    Response handle(std::string_view path, const Params& params) const;

    const std::filesystem::path& workspace() const noexcept { return workspace_; }

private:
    std::filesystem::path workspace_;
};

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::filesystem::path> ui_dir;  // static front-end assets
};

// Blocks until the process is stopped. Only GET and OPTIONS are routed.
// Returns false when the socket cannot be bound.
bool serve(const Api& api, const ServeOptions& options);

}  // namespace geoexif::service
