#include "geoexif/timestamp.hpp"

#include <charconv>
#include <cstdio>

namespace geoexif {
namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out)
{
    if (pos + len > text.size()) {
        return false;
    }
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') {
            return false;
        }
    }
    auto res = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return res.ec == std::errc{};
}

std::optional<Timestamp> civil(int y, int mo, int d, int h, int mi, int s)
{
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59
        || s < 0 || s > 60) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y},
                                          std::chrono::month{static_cast<unsigned>(mo)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return Timestamp{std::chrono::sys_days{ymd}} + std::chrono::hours{h}
           + std::chrono::minutes{mi} + std::chrono::seconds{s};
}

struct Civil {
    int y, mo, d, h, mi, s;
};

Civil split(Timestamp t)
{
    const auto day = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::year_month_day ymd{day};
    const std::chrono::hh_mm_ss hms{t - day};
    return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
            static_cast<int>(static_cast<unsigned>(ymd.day())),
            static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
            static_cast<int>(hms.seconds().count())};
}

}  // namespace

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour, int minute,
                         int second)
{
    return Timestamp{std::chrono::sys_days{std::chrono::year{year} / std::chrono::month{month}
                                           / std::chrono::day{day}}}
           + std::chrono::hours{hour} + std::chrono::minutes{minute}
           + std::chrono::seconds{second};
}

std::optional<Timestamp> parse_exif_datetime(std::string_view text)
{
    // Some writers pad with NULs or spaces.
    while (!text.empty() && (text.back() == '\0' || text.back() == ' ')) {
        text.remove_suffix(1);
    }
    while (!text.empty() && text.front() == ' ') {
        text.remove_prefix(1);
    }
    if (text.size() != 19 || text[4] != ':' || text[7] != ':' || text[13] != ':'
        || text[16] != ':') {
        return std::nullopt;
    }
    if (text[10] != ' ' && text[10] != 'T') {
        return std::nullopt;
    }
    int y, mo, d, h, mi, s;
    if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d)
        || !read_int(text, 11, 2, h) || !read_int(text, 14, 2, mi)
        || !read_int(text, 17, 2, s)) {
        return std::nullopt;
    }
    return civil(y, mo, d, h, mi, s);
}

std::optional<std::chrono::sys_days> parse_exif_date(std::string_view text)
{
    while (!text.empty() && (text.back() == '\0' || text.back() == ' ')) {
        text.remove_suffix(1);
    }
    if (text.size() != 10 || text[4] != ':' || text[7] != ':') {
        return std::nullopt;
    }
    int y, mo, d;
    if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d)) {
        return std::nullopt;
    }
    auto t = civil(y, mo, d, 0, 0, 0);
    if (!t) {
        return std::nullopt;
    }
    return std::chrono::floor<std::chrono::days>(*t);
}

std::optional<Timestamp> parse_iso_datetime(std::string_view text, bool end_of_day)
{
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    int y, mo, d;
    if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d)) {
        return std::nullopt;
    }
    if (text.size() == 10) {
        return end_of_day ? civil(y, mo, d, 23, 59, 59) : civil(y, mo, d, 0, 0, 0);
    }
    if (text.size() != 19 || (text[10] != ' ' && text[10] != 'T') || text[13] != ':'
        || text[16] != ':') {
        return std::nullopt;
    }
    int h, mi, s;
    if (!read_int(text, 11, 2, h) || !read_int(text, 14, 2, mi) || !read_int(text, 17, 2, s)) {
        return std::nullopt;
    }
    return civil(y, mo, d, h, mi, s);
}

std::string format_iso(Timestamp t)
{
    const auto c = split(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d:%02d", c.y, c.mo, c.d, c.h, c.mi,
                  c.s);
    return buf;
}

std::string format_exif(Timestamp t)
{
    const auto c = split(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d:%02d:%02d %02d:%02d:%02d", c.y, c.mo, c.d, c.h, c.mi,
                  c.s);
    return buf;
}

std::string format_feed(Timestamp t)
{
    const auto c = split(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d.%02d.%04d %02d:%02d:%02d", c.d, c.mo, c.y, c.h, c.mi,
                  c.s);
    return buf;
}

std::string format_day(Timestamp t)
{
    const auto c = split(t);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", c.y, c.mo, c.d);
    return buf;
}

Timestamp now_utc()
{
    return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

}  // namespace geoexif
