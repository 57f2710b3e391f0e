#include "geoexif/geo_services.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace geoexif::geo_services {
namespace {

std::atomic<std::uint64_t> g_network_calls{0};

std::pair<long long, long long> key4(const geo::GeoPoint& p)
{
    return {std::llround(p.latitude() * 1e4), std::llround(p.longitude() * 1e4)};
}

std::string format_coord(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void load_table(const std::filesystem::path& path,
                std::map<std::pair<long long, long long>, std::string>& into)
{
    if (path.empty()) {
        return;
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open stub table " + path.string());
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno)
                                     + ": expected \"lat lng<TAB>value\"");
        }
        std::istringstream coords(line.substr(0, tab));
        double lat = 0;
        double lng = 0;
        if (!(coords >> lat >> lng)) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno)
                                     + ": bad coordinates");
        }
        into[key4(geo::GeoPoint(lat, lng))] = line.substr(tab + 1);
    }
}

}  // namespace

void GeoProviderConfig::validate() const
{
    if (provider == ProviderKind::http_provider && (!endpoint || endpoint->empty())) {
        throw std::invalid_argument("HTTP geo provider requires an endpoint");
    }
    if (provider == ProviderKind::offline_stub && endpoint) {
        throw std::invalid_argument("offline stub provider takes no endpoint");
    }
    if (!(rate_limit_per_s > 0)) {
        throw std::invalid_argument("rate limit must be positive");
    }
}

OfflineStubProvider::OfflineStubProvider(const std::filesystem::path& address_table,
                                         const std::filesystem::path& elevation_table)
{
    load_table(address_table, addresses_);
    load_table(elevation_table, elevations_);
}

void OfflineStubProvider::add_address(const geo::GeoPoint& p, std::string address)
{
    addresses_[key4(p)] = std::move(address);
}

void OfflineStubProvider::add_elevation(const geo::GeoPoint& p, double meters)
{
    elevations_[key4(p)] = std::to_string(meters);
}

Lookup OfflineStubProvider::reverse_geocode(const geo::GeoPoint& p)
{
    const auto it = addresses_.find(key4(p));
    return it == addresses_.end() ? Lookup::not_found() : Lookup::found(it->second);
}

Lookup OfflineStubProvider::elevation(const geo::GeoPoint& p)
{
    const auto it = elevations_.find(key4(p));
    return it == elevations_.end() ? Lookup::not_found() : Lookup::found(it->second);
}

TokenBucket::TokenBucket(double rate_per_s)
    : rate_(rate_per_s),
      capacity_(std::max(1.0, rate_per_s)),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now())
{
}

void TokenBucket::acquire()
{
    std::unique_lock lock(mutex_);
    for (;;) {
        const auto now = std::chrono::steady_clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        const double wait_s = (1.0 - tokens_) / rate_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
        lock.lock();
    }
}

HttpGeoProvider::HttpGeoProvider(std::string endpoint, double rate_limit_per_s,
                                 std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), bucket_(rate_limit_per_s), timeout_(timeout)
{
    while (!endpoint_.empty() && endpoint_.back() == '/') {
        endpoint_.pop_back();
    }
}

std::uint64_t HttpGeoProvider::network_calls() noexcept
{
    return g_network_calls.load();
}

std::optional<std::string> HttpGeoProvider::get(const std::string& path)
{
    // Split "scheme://host[:port]" from an optional base path.
    const auto scheme_end = endpoint_.find("://");
    const auto path_start =
        endpoint_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string origin = endpoint_.substr(0, path_start);
    const std::string base = path_start == std::string::npos ? "" : endpoint_.substr(path_start);

    bucket_.acquire();
    ++g_network_calls;
    httplib::Client client(origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_follow_location(true);
    auto res = client.Get(base + path, {{"User-Agent", "geoexif"}});
    if (!res || res->status != 200) {
        return std::nullopt;
    }
    return res->body;
}

Lookup HttpGeoProvider::reverse_geocode(const geo::GeoPoint& p)
{
    const auto body = get("/reverse?format=jsonv2&lat=" + format_coord(p.latitude())
                          + "&lon=" + format_coord(p.longitude()));
    if (!body) {
        return Lookup::failed();
    }
    const auto doc = nlohmann::json::parse(*body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        return Lookup::failed();
    }
    if (doc.contains("display_name") && doc["display_name"].is_string()) {
        return Lookup::found(doc["display_name"].get<std::string>());
    }
    return Lookup::not_found();
}

Lookup HttpGeoProvider::elevation(const geo::GeoPoint& p)
{
    const auto body = get("/api/v1/lookup?locations=" + format_coord(p.latitude()) + ","
                          + format_coord(p.longitude()));
    if (!body) {
        return Lookup::failed();
    }
    const auto doc = nlohmann::json::parse(*body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        return Lookup::failed();
    }
    const auto& results = doc.value("results", nlohmann::json::array());
    if (results.is_array() && !results.empty() && results[0].contains("elevation")
        && results[0]["elevation"].is_number()) {
        return Lookup::found(std::to_string(results[0]["elevation"].get<double>()));
    }
    return Lookup::not_found();
}

GeoServices::GeoServices(std::unique_ptr<GeoProvider> provider, std::filesystem::path cache_path)
    : provider_(std::move(provider)), cache_path_(std::move(cache_path))
{
    load_cache();
}

void GeoServices::load_cache()
{
    if (cache_path_.empty()) {
        return;
    }
    std::ifstream in(cache_path_);
    std::string line;
    while (std::getline(in, line)) {
        // kind \t lat_e4 \t lng_e4 \t F|N \t value
        std::istringstream fields(line);
        std::string kind, lat, lng, status;
        if (!std::getline(fields, kind, '\t') || !std::getline(fields, lat, '\t')
            || !std::getline(fields, lng, '\t') || !std::getline(fields, status, '\t')
            || kind.size() != 1) {
            continue;
        }
        std::string value;
        std::getline(fields, value);
        try {
            cache_[{kind[0], std::stoll(lat), std::stoll(lng)}] =
                status == "F" ? Lookup::found(value) : Lookup::not_found();
        } catch (const std::exception&) {
            continue;
        }
    }
}

Lookup GeoServices::cached(char kind, const geo::GeoPoint& p)
{
    const auto [lat, lng] = key4(p);
    const auto key = std::make_tuple(kind, lat, lng);
    {
        std::lock_guard lock(mutex_);
        if (const auto it = cache_.find(key); it != cache_.end()) {
            return it->second;
        }
    }
    ++provider_calls_;
    Lookup result = kind == 'R' ? provider_->reverse_geocode(p) : provider_->elevation(p);
    if (result.status == Lookup::Status::failed) {
        return result;
    }
    std::lock_guard lock(mutex_);
    cache_[key] = result;
    if (!cache_path_.empty()) {
        std::ofstream out(cache_path_, std::ios::app);
        out << kind << '\t' << lat << '\t' << lng << '\t'
            << (result.status == Lookup::Status::found ? "F" : "N") << '\t' << result.value
            << '\n';
    }
    return result;
}

std::optional<std::string> GeoServices::reverse_geocode(const geo::GeoPoint& p)
{
    auto r = cached('R', p);
    if (r.status != Lookup::Status::found) {
        return std::nullopt;
    }
    return r.value;
}

std::optional<double> GeoServices::elevation_m(const geo::GeoPoint& p)
{
    auto r = cached('E', p);
    if (r.status != Lookup::Status::found) {
        return std::nullopt;
    }
    try {
        return std::stod(r.value);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::unique_ptr<GeoServices> make_services(const GeoProviderConfig& config)
{
    config.validate();
    std::unique_ptr<GeoProvider> provider;
    if (config.provider == ProviderKind::http_provider) {
        provider = std::make_unique<HttpGeoProvider>(*config.endpoint, config.rate_limit_per_s,
                                                     config.timeout);
    } else {
        provider = std::make_unique<OfflineStubProvider>(config.address_table,
                                                         config.elevation_table);
    }
    return std::make_unique<GeoServices>(std::move(provider), config.cache_path);
}

}  // namespace geoexif::geo_services
