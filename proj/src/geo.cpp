#include "geoexif/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace geoexif::geo {
namespace {

constexpr double radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

bool is_canonical(const DmsCoordinate& c) noexcept
{
    return c.degrees >= 0 && c.minutes >= 0 && c.seconds >= 0 && c.minutes < 60
           && c.seconds < 60;
}

double dms_to_decimal(const DmsCoordinate& c)
{
    double sign = 0;
    switch (c.hemisphere) {
    case 'N':
    case 'E':
        sign = 1;
        break;
    case 'S':
    case 'W':
        sign = -1;
        break;
    default:
        throw std::invalid_argument(std::string("invalid hemisphere '") + c.hemisphere + "'");
    }
    return sign * (c.degrees + c.minutes / 60.0 + c.seconds / 3600.0);
}

GeoPoint::GeoPoint(double latitude, double longitude) : latitude_(latitude), longitude_(longitude)
{
    if (!(latitude >= -90.0 && latitude <= 90.0)) {
        throw std::invalid_argument("latitude out of range: " + std::to_string(latitude));
    }
    if (!(longitude >= -180.0 && longitude <= 180.0)) {
        throw std::invalid_argument("longitude out of range: " + std::to_string(longitude));
    }
}

ZoneFilter::ZoneFilter(GeoPoint center, double radius_km) : center_(center), radius_km_(radius_km)
{
    if (!(radius_km > 0.0) || !std::isfinite(radius_km)) {
        throw std::invalid_argument("zone radius must be positive");
    }
}

double great_circle_distance_km(const GeoPoint& a, const GeoPoint& b) noexcept
{
    const double lat_a = radians(a.latitude());
    const double lat_b = radians(b.latitude());
    // cos(dlng) written as 1 - 2 sin^2(dlng/2) so coincident points yield exactly 1.
    const double half_dlng = std::sin((radians(b.longitude()) - radians(a.longitude())) / 2);
    const double cos_angle = std::cos(lat_a - lat_b)
                             - 2 * std::cos(lat_a) * std::cos(lat_b) * half_dlng * half_dlng;
    return earth_radius_km * std::acos(std::clamp(cos_angle, -1.0, 1.0));
}

bool within_zone(const GeoPoint& p, const ZoneFilter& zone) noexcept
{
    return great_circle_distance_km(p, zone.center()) < zone.radius_km();
}

LocationKey location_key(const GeoPoint& p) noexcept
{
    return {std::llround(p.latitude() * 1e6), std::llround(p.longitude() * 1e6)};
}

double round6(double degrees) noexcept
{
    return static_cast<double>(std::llround(degrees * 1e6)) / 1e6;
}

}  // namespace geoexif::geo
