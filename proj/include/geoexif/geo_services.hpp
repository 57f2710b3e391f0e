#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "geoexif/geo.hpp"

namespace geoexif::geo_services {

enum class ProviderKind { offline_stub, http_provider };

struct GeoProviderConfig {
    ProviderKind provider = ProviderKind::offline_stub;
    std::optional<std::string> endpoint;  // base URL, required for http_provider
    double rate_limit_per_s = 1.0;
    std::filesystem::path cache_path;     // empty: in-memory cache only
    std::filesystem::path address_table;  // offline stub tables, "lat lng<TAB>value"
    std::filesystem::path elevation_table;
    std::chrono::milliseconds timeout{5000};

    // Throws std::invalid_argument on a missing/unexpected endpoint or a
    // non-positive rate.
    void validate() const;
};

// Provider answer. failed means "ask again later" and is never cached;
// not_found is a definitive miss and is.
struct Lookup {
    enum class Status { found, not_found, failed };
    Status status = Status::not_found;
    std::string value;

    static Lookup found(std::string v) { return {Status::found, std::move(v)}; }
    static Lookup not_found() { return {Status::not_found, {}}; }
    static Lookup failed() { return {Status::failed, {}}; }
};

class GeoProvider {
public:
    virtual ~GeoProvider() = default;
    virtual Lookup reverse_geocode(const geo::GeoPoint& p) = 0;
    virtual Lookup elevation(const geo::GeoPoint& p) = 0;
};

// Tables keyed by the point rounded to 4 decimals.
class OfflineStubProvider final : public GeoProvider {
public:
    OfflineStubProvider() = default;
    OfflineStubProvider(const std::filesystem::path& address_table,
                        const std::filesystem::path& elevation_table);

    void add_address(const geo::GeoPoint& p, std::string address);
    void add_elevation(const geo::GeoPoint& p, double meters);

    Lookup reverse_geocode(const geo::GeoPoint& p) override;
    Lookup elevation(const geo::GeoPoint& p) override;

private:
    std::map<std::pair<long long, long long>, std::string> addresses_;
    std::map<std::pair<long long, long long>, std::string> elevations_;
};

// Client-side token bucket; acquire() blocks until a token is available.
class TokenBucket {
public:
    explicit TokenBucket(double rate_per_s);
    void acquire();

private:
    std::mutex mutex_;
    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
};

// HTTP adapters: reverse geocoding in the Nominatim shape
// (GET {endpoint}/reverse?format=jsonv2&lat=..&lon=.. -> "display_name") and
// elevation in the Open-Elevation shape
// (GET {endpoint}/api/v1/lookup?locations=lat,lng -> results[0].elevation).
class HttpGeoProvider final : public GeoProvider {
public:
    HttpGeoProvider(std::string endpoint, double rate_limit_per_s,
                    std::chrono::milliseconds timeout);

    Lookup reverse_geocode(const geo::GeoPoint& p) override;
    Lookup elevation(const geo::GeoPoint& p) override;

    // Process-wide count of HTTP requests issued by any instance.
    static std::uint64_t network_calls() noexcept;

private:
    std::optional<std::string> get(const std::string& path);

    std::string endpoint_;
    TokenBucket bucket_;
    std::chrono::milliseconds timeout_;
};

// Caching front for a provider. The cache is keyed by kind and the point
// rounded to 4 decimals and, when a cache path is configured, persisted as an
// append-only text file so later runs in the same workspace reuse it.
class GeoServices {
public:
    GeoServices(std::unique_ptr<GeoProvider> provider, std::filesystem::path cache_path = {});

    std::optional<std::string> reverse_geocode(const geo::GeoPoint& p);
    std::optional<double> elevation_m(const geo::GeoPoint& p);

    // Calls that reached the provider (cache misses).
    std::uint64_t provider_calls() const noexcept { return provider_calls_.load(); }

private:
    Lookup cached(char kind, const geo::GeoPoint& p);
    void load_cache();

    std::unique_ptr<GeoProvider> provider_;
    std::filesystem::path cache_path_;
    std::mutex mutex_;
    std::map<std::tuple<char, long long, long long>, Lookup> cache_;
    std::atomic<std::uint64_t> provider_calls_{0};
};

std::unique_ptr<GeoServices> make_services(const GeoProviderConfig& config);

}  // namespace geoexif::geo_services
