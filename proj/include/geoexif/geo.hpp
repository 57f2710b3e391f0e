#pragma once

#include <cstdint>
#include <utility>

namespace geoexif::geo {

inline constexpr double earth_radius_km = 6371.0;

struct DmsCoordinate {
    double degrees = 0;
    double minutes = 0;
    double seconds = 0;
    char hemisphere = 'N';
};

// minutes and seconds below 60, all parts non-negative.
bool is_canonical(const DmsCoordinate& c) noexcept;

// Signed decimal degrees; S and W are negative. Throws std::invalid_argument
// on a hemisphere outside {N, S, E, W}.
double dms_to_decimal(const DmsCoordinate& c);

class GeoPoint {
public:
    // Throws std::invalid_argument outside [-90, 90] x [-180, 180] or on NaN.
    GeoPoint(double latitude, double longitude);

    double latitude() const noexcept { return latitude_; }
    double longitude() const noexcept { return longitude_; }

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
    double latitude_;
    double longitude_;
};

class ZoneFilter {
public:
    // Throws std::invalid_argument unless radius_km > 0.
    ZoneFilter(GeoPoint center, double radius_km);

    const GeoPoint& center() const noexcept { return center_; }
    double radius_km() const noexcept { return radius_km_; }

private:
    GeoPoint center_;
    double radius_km_;
};

// Spherical law of cosines on a 6371 km sphere, acos argument clamped to
// [-1, 1] so coincident points give 0 instead of NaN.
double great_circle_distance_km(const GeoPoint& a, const GeoPoint& b) noexcept;

// Strict: distance < radius.
bool within_zone(const GeoPoint& p, const ZoneFilter& zone) noexcept;

// Coordinates scaled by 1e6 and rounded half away from zero; two points
// share a location iff their keys are equal.
using LocationKey = std::pair<std::int64_t, std::int64_t>;
LocationKey location_key(const GeoPoint& p) noexcept;

double round6(double degrees) noexcept;

}  // namespace geoexif::geo
