// geoexif command line: scan, serve, report, get, gen-fixtures.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <httplib.h>

#include "geoexif/fixtures.hpp"
#include "geoexif/indexer.hpp"
#include "geoexif/report.hpp"
#include "geoexif/service.hpp"
#include "geoexif/store.hpp"

namespace fs = std::filesystem;
using namespace geoexif;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_aborted = 3;

std::string default_workspace()
{
    const char* env = std::getenv("GEOEXIF_WORKSPACE");
    return env ? env : "";
}

struct FilterArgs {
    std::optional<double> lat, lng, radius_km;
    std::vector<std::string> devices;
    std::optional<std::string> from, to;
    std::optional<int> slot;

    void attach(CLI::App* app)
    {
        app->add_option("--lat", lat, "Zone centre latitude");
        app->add_option("--lng", lng, "Zone centre longitude");
        app->add_option("--radius-km", radius_km, "Zone radius in km");
        app->add_option("--device", devices, "Device id (repeatable)");
        app->add_option("--from", from, "Earliest capture time, YYYY-MM-DD[ HH:MM:SS]");
        app->add_option("--to", to, "Latest capture time, YYYY-MM-DD[ HH:MM:SS]");
        app->add_option("--slot", slot, "Keep markers with linked images within +/-N h");
    }

    service::Params params() const
    {
        service::Params p;
        const auto num = [](double v) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.9g", v);
            return std::string(buf);
        };
        if (lat) p.emplace("lat", num(*lat));
        if (lng) p.emplace("lng", num(*lng));
        if (radius_km) p.emplace("radius_km", num(*radius_km));
        for (const auto& d : devices) p.emplace("device", d);
        if (from) p.emplace("from", *from);
        if (to) p.emplace("to", *to);
        if (slot) p.emplace("slot", std::to_string(*slot));
        return p;
    }
};

int run_scan(const indexer::ScanConfig& base, bool offline, const std::string& endpoint)
{
    auto config = base;
    if (!offline && !endpoint.empty()) {
        config.geo.provider = geo_services::ProviderKind::http_provider;
        config.geo.endpoint = endpoint;
    }
    config.log = [](const std::string& line) { std::cerr << "\n" << line << std::flush; };
    config.on_progress = [](const indexer::Progress& p) {
        std::cerr << "\rfiles scanned: " << p.files_scanned << "  images found: " << p.images_found
                  << "  geotagged: " << p.geotagged_count << "  unreadable: " << p.unreadable_count
                  << std::flush;
    };
    try {
        config.validate();
    } catch (const indexer::ScanAborted& e) {
        std::cerr << "geoexif scan: " << e.what() << "\n";
        return exit_usage;
    }
    try {
        const auto run = indexer::scan_tree(config);
        std::cerr << "\n";
        std::cout << "run " << run.id << " finished: files_scanned=" << run.files_scanned
                  << " images_found=" << run.images_found
                  << " geotagged_count=" << run.geotagged_count
                  << " unreadable_count=" << run.unreadable_count << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "\ngeoexif scan aborted: " << e.what() << "\n";
        return exit_aborted;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Forensic photo geolocation workbench"};
    app.require_subcommand(1);

    // scan
    indexer::ScanConfig scan;
    std::string scan_workspace = default_workspace();
    bool offline = false;
    std::string endpoint;
    auto* scan_cmd = app.add_subcommand("scan", "Index an evidence directory (read-only)");
    scan_cmd->add_option("--root", scan.root, "Evidence directory")->required();
    scan_cmd->add_option("--workspace", scan_workspace, "Output directory ($GEOEXIF_WORKSPACE)");
    scan_cmd->add_flag("--offline", offline, "Use the offline stub geo provider only");
    scan_cmd->add_option("--thumb-px", scan.thumbnail_max_px, "Longest thumbnail side")
        ->check(CLI::PositiveNumber);
    scan_cmd->add_flag("--reverse-geocode", scan.reverse_geocode, "Look up postal addresses");
    scan_cmd->add_flag("--altitude-check", scan.verify.altitude_check,
                       "Compare GPS altitude with terrain elevation");
    scan_cmd->add_option("--dop-threshold", scan.verify.dop_threshold);
    scan_cmd->add_option("--altitude-tolerance-m", scan.verify.altitude_tolerance_m);
    scan_cmd->add_option("--geo-endpoint", endpoint, "HTTP geo provider base URL");
    scan_cmd->add_option("--geo-rate", scan.geo.rate_limit_per_s, "Provider requests per second");
    scan_cmd->add_option("--address-table", scan.geo.address_table, "Offline address table");
    scan_cmd->add_option("--elevation-table", scan.geo.elevation_table, "Offline elevation table");

    // serve
    std::string serve_workspace = default_workspace();
    service::ServeOptions serve;
    std::string ui_dir;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the marker feed and API");
    serve_cmd->add_option("--workspace", serve_workspace, "Workspace ($GEOEXIF_WORKSPACE)");
    serve_cmd->add_option("--port", serve.port)->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--host", serve.host);
    serve_cmd->add_option("--ui", ui_dir, "Directory of built front-end assets");

    // report
    std::string report_workspace = default_workspace();
    std::string report_out;
    std::string report_format = "html";
    FilterArgs report_filter;
    auto* report_cmd = app.add_subcommand("report", "Write the live report for a filter");
    report_cmd->add_option("--workspace", report_workspace, "Workspace ($GEOEXIF_WORKSPACE)");
    report_cmd->add_option("--out", report_out, "Output file (default stdout)");
    report_cmd->add_option("--format", report_format)->check(CLI::IsMember({"html", "json"}));
    report_filter.attach(report_cmd);

    // get
    std::string get_workspace = default_workspace();
    std::string get_target;
    auto* get_cmd = app.add_subcommand("get", "Print an API response, e.g. '/markers.xml?slot=2'");
    get_cmd->add_option("--workspace", get_workspace, "Workspace ($GEOEXIF_WORKSPACE)");
    get_cmd->add_option("target", get_target, "Path and query")->required();

    // gen-fixtures
    fs::path fixtures_out;
    std::string fixtures_spec;
    std::size_t fixtures_count = 500;
    std::uint64_t fixtures_seed = 1;
    std::string fixtures_extension;
    auto* gen_cmd = app.add_subcommand("gen-fixtures", "Write a synthetic corpus and manifest");
    gen_cmd->add_option("--out", fixtures_out, "Output directory")->required();
    gen_cmd->add_option("--spec", fixtures_spec,
                        "Preset (session, random, grouping, verification, mixed) or JSON file")
        ->required();
    gen_cmd->add_option("--count", fixtures_count, "Image count for the random preset");
    gen_cmd->add_option("--seed", fixtures_seed);
    gen_cmd->add_option("--extension", fixtures_extension, "Rename every file to this extension");

    CLI11_PARSE(app, argc, argv);

    const auto need_workspace = [](const std::string& w, const char* cmd) {
        if (w.empty()) {
            std::cerr << "geoexif " << cmd << ": --workspace or GEOEXIF_WORKSPACE is required\n";
            return false;
        }
        return true;
    };

    if (scan_cmd->parsed()) {
        if (!need_workspace(scan_workspace, "scan")) {
            return exit_usage;
        }
        scan.workspace = scan_workspace;
        return run_scan(scan, offline, endpoint);
    }
    if (serve_cmd->parsed()) {
        if (!need_workspace(serve_workspace, "serve")) {
            return exit_usage;
        }
        if (!ui_dir.empty()) {
            serve.ui_dir = ui_dir;
        }
        const service::Api api(serve_workspace);
        std::cerr << "serving " << serve_workspace << " on http://" << serve.host << ":"
                  << serve.port << "\n";
        if (!service::serve(api, serve)) {
            std::cerr << "geoexif serve: cannot listen on " << serve.host << ":" << serve.port
                      << "\n";
            return exit_aborted;
        }
        return 0;
    }
    if (report_cmd->parsed()) {
        if (!need_workspace(report_workspace, "report")) {
            return exit_usage;
        }
        auto params = report_filter.params();
        params.emplace("format", report_format);
        const auto r = service::Api(report_workspace).handle("/report", params);
        if (r.status != 200) {
            std::cerr << "geoexif report: " << r.status << " " << r.body << "\n";
            return exit_aborted;
        }
        if (report_out.empty()) {
            std::cout << r.body;
        } else {
            std::ofstream(report_out, std::ios::binary) << r.body;
        }
        return 0;
    }
    if (get_cmd->parsed()) {
        if (!need_workspace(get_workspace, "get")) {
            return exit_usage;
        }
        const auto q = get_target.find('?');
        service::Params params;
        if (q != std::string::npos) {
            httplib::detail::parse_query_text(get_target.substr(q + 1), params);
        }
        const auto r = service::Api(get_workspace).handle(get_target.substr(0, q), params);
        std::cout << r.body;
        return r.status == 200 ? 0 : exit_aborted;
    }
    if (gen_cmd->parsed()) {
        try {
            fixtures::CorpusSpec spec;
            if (fs::is_regular_file(fixtures_spec)) {
                std::ifstream in(fixtures_spec);
                spec = fixtures::parse_corpus_spec(nlohmann::json::parse(in));
            } else {
                spec = fixtures::preset(fixtures_spec, fixtures_count, fixtures_seed);
            }
            if (!fixtures_extension.empty()) {
                spec.extension = fixtures_extension;
            }
            const auto manifest = fixtures::write_corpus(spec, fixtures_out);
            std::cout << "wrote " << manifest["files_scanned"] << " files to "
                      << (fixtures_out / "evidence").string() << ", manifest "
                      << (fixtures_out / "manifest.json").string() << "\n";
        } catch (const std::exception& e) {
            std::cerr << "geoexif gen-fixtures: " << e.what() << "\n";
            return exit_usage;
        }
        return 0;
    }
    return exit_usage;
}
