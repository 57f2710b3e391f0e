#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace geoexif {

// Wall-clock instant with second resolution. EXIF capture times carry no zone,
// so they are held as naive civil time on the same axis as UTC GPS times;
// comparisons between the two are raw wall-clock differences.
using Timestamp = std::chrono::sys_seconds;

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour = 0,
                         int minute = 0, int second = 0);

// "YYYY:MM:DD HH:MM:SS" as written by cameras. Zeroed or blank values
// ("0000:00:00 00:00:00") are absent.
std::optional<Timestamp> parse_exif_datetime(std::string_view text);

// GPSDateStamp "YYYY:MM:DD".
std::optional<std::chrono::sys_days> parse_exif_date(std::string_view text);

// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM:SS" and "YYYY-MM-DDTHH:MM:SS".
// A date-only value resolves to the start of the day, or to its last second
// when end_of_day is set.
std::optional<Timestamp> parse_iso_datetime(std::string_view text,
                                            bool end_of_day = false);

std::string format_iso(Timestamp t);      // 2013-08-11 16:03:41
std::string format_exif(Timestamp t);     // 2013:08:11 16:03:41
std::string format_feed(Timestamp t);     // 11.08.2013 16:03:41
std::string format_day(Timestamp t);      // 2013-08-11

inline std::int64_t to_seconds(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_seconds(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

Timestamp now_utc();

}  // namespace geoexif
