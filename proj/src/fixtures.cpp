#include "geoexif/fixtures.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

#include "geoexif/thumbnail.hpp"

namespace geoexif::fixtures {
namespace fs = std::filesystem;
namespace {

using Bytes = std::vector<std::uint8_t>;

enum : std::uint16_t { t_byte = 1, t_ascii = 2, t_short = 3, t_long = 4, t_rational = 5, t_undef = 7 };

struct Entry {
    std::uint16_t tag;
    std::uint16_t type;
    std::uint32_t count;
    Bytes data;  // already in target byte order
};

class Encoder {
public:
    explicit Encoder(exif::ByteOrder order) : le_(order == exif::ByteOrder::little_endian) {}

    void u16(Bytes& out, std::uint16_t v) const
    {
        if (le_) {
            out.push_back(static_cast<std::uint8_t>(v));
            out.push_back(static_cast<std::uint8_t>(v >> 8));
        } else {
            out.push_back(static_cast<std::uint8_t>(v >> 8));
            out.push_back(static_cast<std::uint8_t>(v));
        }
    }
    void u32(Bytes& out, std::uint32_t v) const
    {
        if (le_) {
            for (int s = 0; s < 32; s += 8) {
                out.push_back(static_cast<std::uint8_t>(v >> s));
            }
        } else {
            for (int s = 24; s >= 0; s -= 8) {
                out.push_back(static_cast<std::uint8_t>(v >> s));
            }
        }
    }

    Entry ascii(std::uint16_t tag, const std::string& s) const
    {
        Bytes d(s.begin(), s.end());
        d.push_back(0);
        return {tag, t_ascii, static_cast<std::uint32_t>(d.size()), d};
    }
    Entry shorts(std::uint16_t tag, std::initializer_list<std::uint16_t> vs) const
    {
        Bytes d;
        for (auto v : vs) {
            u16(d, v);
        }
        return {tag, t_short, static_cast<std::uint32_t>(vs.size()), d};
    }
    Entry longs(std::uint16_t tag, std::uint32_t v) const
    {
        Bytes d;
        u32(d, v);
        return {tag, t_long, 1, d};
    }
    Entry bytes(std::uint16_t tag, Bytes d, std::uint16_t type = t_byte) const
    {
        const auto n = static_cast<std::uint32_t>(d.size());
        return {tag, type, n, std::move(d)};
    }
    Entry rationals(std::uint16_t tag,
                    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& vs) const
    {
        Bytes d;
        for (const auto& [n, den] : vs) {
            u32(d, n);
            u32(d, den);
        }
        return {tag, t_rational, static_cast<std::uint32_t>(vs.size()), d};
    }

private:
    bool le_;
};

std::size_t data_size(const std::vector<Entry>& entries)
{
    std::size_t n = 0;
    for (const auto& e : entries) {
        if (e.data.size() > 4) {
            n += e.data.size() + (e.data.size() & 1);
        }
    }
    return n;
}

// Each IFD is laid out as [out-of-line values][entry table]; the IFD offset
// points at the table.
Bytes serialize_ifd(const Encoder& enc, std::vector<Entry> entries, std::uint32_t data_start,
                    std::uint16_t declared = 0)
{
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.tag < b.tag; });
    Bytes data;
    std::vector<std::uint32_t> value_offsets;
    for (const auto& e : entries) {
        if (e.data.size() > 4) {
            value_offsets.push_back(data_start + static_cast<std::uint32_t>(data.size()));
            data.insert(data.end(), e.data.begin(), e.data.end());
            if (data.size() & 1) {
                data.push_back(0);
            }
        } else {
            value_offsets.push_back(0);
        }
    }
    Bytes table;
    enc.u16(table, declared ? declared : static_cast<std::uint16_t>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        enc.u16(table, e.tag);
        enc.u16(table, e.type);
        enc.u32(table, e.count);
        if (e.data.size() > 4) {
            enc.u32(table, value_offsets[i]);
        } else {
            Bytes inline_value = e.data;
            inline_value.resize(4, 0);
            table.insert(table.end(), inline_value.begin(), inline_value.end());
        }
    }
    enc.u32(table, 0);
    data.insert(data.end(), table.begin(), table.end());
    return data;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> to_dms(double value, bool zero_den)
{
    const double a = std::abs(value);
    auto deg = static_cast<std::uint32_t>(std::floor(a));
    const double rem_min = (a - deg) * 60.0;
    auto min = static_cast<std::uint32_t>(std::floor(rem_min));
    const double sec = (rem_min - min) * 60.0;
    auto sec_e6 = static_cast<std::uint32_t>(std::llround(sec * 1e6));
    if (sec_e6 >= 60'000'000U) {
        sec_e6 -= 60'000'000U;
        if (++min == 60) {
            min = 0;
            ++deg;
        }
    }
    return {{deg, 1}, {min, 1}, {sec_e6, zero_den ? 0U : 1'000'000U}};
}

bool geotag_expected(const ExifSpec& s)
{
    return s.lat && s.lng && !s.zero_denominator_lat && !s.truncate_ifd0_after;
}

Bytes build_block(const ExifSpec& spec, bool tiff_file)
{
    const Encoder enc(spec.byte_order);
    std::vector<Entry> ifd0;
    std::vector<Entry> exif_ifd;
    std::vector<Entry> gps;

    if (tiff_file) {
        ifd0.push_back(enc.shorts(0x0100, {16}));
        ifd0.push_back(enc.shorts(0x0101, {16}));
    }
    if (spec.make) {
        ifd0.push_back(enc.ascii(exif::tag::make, *spec.make));
    }
    if (spec.model) {
        ifd0.push_back(enc.ascii(exif::tag::model, *spec.model));
    }
    if (spec.truncate_ifd0_after) {
        // Pad IFD0 with SHORT entries up to ten, then cut the table.
        std::uint16_t t = 0x0112;
        while (ifd0.size() < 10) {
            ifd0.push_back(enc.shorts(t++, {1}));
        }
        const auto n = static_cast<std::size_t>(*spec.truncate_ifd0_after);
        Bytes out = spec.byte_order == exif::ByteOrder::little_endian
                        ? Bytes{'I', 'I', 42, 0}
                        : Bytes{'M', 'M', 0, 42};
        const auto ds = static_cast<std::uint32_t>(8 + data_size(ifd0));
        enc.u32(out, ds);
        auto body = serialize_ifd(enc, ifd0, 8);
        out.insert(out.end(), body.begin(), body.end());
        out.resize(ds + 2 + 12 * n);
        return out;
    }
    if (spec.datetime) {
        ifd0.push_back(enc.ascii(exif::tag::date_time, *spec.datetime));
        exif_ifd.push_back(enc.ascii(exif::tag::date_time_original, *spec.datetime));
    }
    if (spec.owner_name) {
        exif_ifd.push_back(enc.ascii(exif::tag::owner_name, *spec.owner_name));
    }
    if (spec.serial_number) {
        exif_ifd.push_back(enc.ascii(exif::tag::serial_number, *spec.serial_number));
    }
    if (spec.lens_model) {
        exif_ifd.push_back(enc.ascii(exif::tag::lens_model, *spec.lens_model));
    }
    if (!exif_ifd.empty()) {
        exif_ifd.push_back(enc.bytes(0x9000, {'0', '2', '3', '0'}, t_undef));
    }

    if (spec.lat && spec.lng) {
        gps.push_back(enc.bytes(exif::tag::gps_version_id, {2, 3, 0, 0}));
        gps.push_back(enc.ascii(exif::tag::gps_latitude_ref, *spec.lat < 0 ? "S" : "N"));
        gps.push_back(enc.rationals(exif::tag::gps_latitude, to_dms(*spec.lat, spec.zero_denominator_lat)));
        gps.push_back(enc.ascii(exif::tag::gps_longitude_ref, *spec.lng < 0 ? "W" : "E"));
        gps.push_back(enc.rationals(exif::tag::gps_longitude, to_dms(*spec.lng, false)));
    }
    if (spec.altitude_m) {
        gps.push_back(enc.bytes(exif::tag::gps_altitude_ref, {*spec.altitude_m < 0 ? std::uint8_t{1} : std::uint8_t{0}}));
        gps.push_back(enc.rationals(
            exif::tag::gps_altitude,
            {{static_cast<std::uint32_t>(std::llround(std::abs(*spec.altitude_m) * 100)), 100}}));
    }
    if (spec.gps_time) {
        int h = 0, m = 0, s = 0;
        std::sscanf(spec.gps_time->c_str(), "%d:%d:%d", &h, &m, &s);
        gps.push_back(enc.rationals(exif::tag::gps_time_stamp,
                                    {{static_cast<std::uint32_t>(h), 1},
                                     {static_cast<std::uint32_t>(m), 1},
                                     {static_cast<std::uint32_t>(s), 1}}));
    }
    if (spec.dop) {
        gps.push_back(enc.rationals(exif::tag::gps_dop,
                                    {{static_cast<std::uint32_t>(std::llround(*spec.dop * 1000)), 1000}}));
    }
    if (spec.processing_method) {
        Bytes d{'A', 'S', 'C', 'I', 'I', 0, 0, 0};
        d.insert(d.end(), spec.processing_method->begin(), spec.processing_method->end());
        gps.push_back(enc.bytes(exif::tag::gps_processing_method, d, t_undef));
    }
    if (spec.gps_date) {
        gps.push_back(enc.ascii(exif::tag::gps_date_stamp, *spec.gps_date));
    }

    // Pointer entries are inline LONGs, so sizes are known before offsets.
    if (!exif_ifd.empty()) {
        ifd0.push_back(enc.longs(exif::tag::exif_ifd_pointer, 0));
    }
    if (!gps.empty()) {
        ifd0.push_back(enc.longs(exif::tag::gps_ifd_pointer, 0));
    }
    const auto table = [](const std::vector<Entry>& e) { return 2 + 12 * e.size() + 4; };
    const std::size_t ifd0_data = 8;
    const std::size_t ifd0_table = ifd0_data + data_size(ifd0);
    const std::size_t exif_data = ifd0_table + table(ifd0);
    const std::size_t exif_table = exif_data + data_size(exif_ifd);
    const std::size_t gps_data = exif_ifd.empty() ? exif_data : exif_table + table(exif_ifd);
    const std::size_t gps_table = gps_data + data_size(gps);
    for (auto& e : ifd0) {
        if (e.tag == exif::tag::exif_ifd_pointer) {
            e = enc.longs(e.tag, static_cast<std::uint32_t>(exif_table));
        } else if (e.tag == exif::tag::gps_ifd_pointer) {
            e = enc.longs(e.tag, static_cast<std::uint32_t>(gps_table));
        }
    }

    Bytes out = spec.byte_order == exif::ByteOrder::little_endian ? Bytes{'I', 'I', 42, 0}
                                                                    : Bytes{'M', 'M', 0, 42};
    enc.u32(out, static_cast<std::uint32_t>(ifd0_table));
    const auto append = [&](const Bytes& b) { out.insert(out.end(), b.begin(), b.end()); };
    append(serialize_ifd(enc, ifd0, static_cast<std::uint32_t>(ifd0_data)));
    if (!exif_ifd.empty()) {
        append(serialize_ifd(enc, exif_ifd, static_cast<std::uint32_t>(exif_data)));
    }
    if (!gps.empty()) {
        append(serialize_ifd(enc, gps, static_cast<std::uint32_t>(gps_data)));
    }
    return out;
}

std::optional<std::int64_t> parse_time(const std::optional<std::string>& text)
{
    if (!text) {
        return std::nullopt;
    }
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (std::sscanf(text->c_str(), "%d:%d:%d %d:%d:%d", &y, &mo, &d, &h, &mi, &s) != 6) {
        return std::nullopt;
    }
    using namespace std::chrono;
    const sys_days day{year{y} / month{static_cast<unsigned>(mo)} / static_cast<unsigned>(d)};
    return day.time_since_epoch().count() * 86400LL + h * 3600LL + mi * 60LL + s;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return "";
    }
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::string fmt_time(std::int64_t secs)
{
    using namespace std::chrono;
    const sys_seconds t{seconds{secs}};
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d:%02u:%02u %02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::string target_name(const FileSpec& f, const std::optional<std::string>& extension)
{
    if (!extension) {
        return f.name;
    }
    fs::path p(f.name);
    p.replace_extension(*extension);
    return p.generic_string();
}

ExifSpec camera(const std::string& make, const std::string& model)
{
    ExifSpec s;
    s.make = make;
    s.model = model;
    return s;
}

void set_gps(ExifSpec& s, double lat, double lng, std::int64_t utc)
{
    s.lat = lat;
    s.lng = lng;
    const auto text = fmt_time(utc);
    s.gps_date = text.substr(0, 10);
    s.gps_time = text.substr(11);
    s.processing_method = "GPS";
    s.dop = 2.0;
}

CorpusSpec preset_session()
{
    CorpusSpec c;
    const auto t0 = *parse_time("2013:08:11 16:03:41");
    int shot = 4400;
    const auto sony = [&](std::int64_t t, std::optional<std::pair<double, double>> pos,
                          std::optional<int> number = std::nullopt) {
        FileSpec f;
        f.name = "DCIM/100MSDCF/DSC0" + std::to_string(number ? *number : shot++) + ".JPG";
        f.exif = camera("SONY", "DSC-HX100V");
        f.exif->datetime = fmt_time(t);
        if (pos) {
            set_gps(*f.exif, pos->first, pos->second, t - 2 * 3600);
        }
        c.files.push_back(f);
    };
    sony(t0, std::pair{43.203640, 5.822985}, 4487);
    sony(t0 + 216, std::pair{43.203777, 5.823039}, 4488);
    sony(t0 + 271, std::pair{43.203777, 5.823008}, 4489);
    sony(t0 + 320, std::pair{43.203838, 5.823083}, 4490);
    for (int k = 0; k < 11; ++k) {
        sony(t0 + 600 + k * 30, std::nullopt);
    }
    sony(t0 - 7100, std::nullopt);
    sony(t0 - 7100, std::nullopt);
    sony(t0 + 4100, std::nullopt);
    sony(t0 + 4100, std::nullopt);
    for (int k = 0; k < 10; ++k) {
        sony(t0 + 9000 + k * 10, std::nullopt);
    }

    const auto other = [&](const std::string& name, const std::string& make,
                           const std::string& model, std::int64_t t,
                           std::optional<std::pair<double, double>> pos) {
        FileSpec f;
        f.name = name;
        f.exif = camera(make, model);
        f.exif->datetime = fmt_time(t);
        if (pos) {
            set_gps(*f.exif, pos->first, pos->second, t);
        }
        c.files.push_back(f);
    };
    const auto t1 = *parse_time("2013:07:02 10:15:00");
    other("phone/IMG_0001.JPG", "Apple", "iPhone 4", t1, std::pair{43.296482, 5.369780});
    other("phone/IMG_0002.JPG", "Apple", "iPhone 4", t1 + 900, std::pair{43.295100, 5.374100});
    other("phone/IMG_0003.JPG", "Apple", "iPhone 4", t1 + 1800, std::pair{43.284900, 5.358600});
    other("phone/IMG_0004.JPG", "Apple", "iPhone 4", t1 + 2400, std::nullopt);
    other("phone/IMG_0005.JPG", "Apple", "iPhone 4", t1 + 5000, std::nullopt);
    other("phone/IMG_0006.JPG", "Apple", "iPhone 4", t1 + 90000, std::nullopt);
    const auto t2 = *parse_time("2013:06:20 08:00:00");
    other("nikon/DSC_0101.JPG", "NIKON CORPORATION", "NIKON D300", t2, std::pair{34.052235, -118.243683});
    other("nikon/DSC_0102.JPG", "NIKON CORPORATION", "NIKON D300", t2 + 3000, std::pair{34.040713, -118.246769});
    other("nikon/DSC_0103.JPG", "NIKON CORPORATION", "NIKON D300", t2 + 3500, std::nullopt);
    other("nikon/DSC_0104.JPG", "NIKON CORPORATION", "NIKON D300", t2 + 20000, std::nullopt);
    return c;
}

CorpusSpec preset_random(std::size_t count, std::uint64_t seed)
{
    struct Device {
        std::string make, model;
        std::optional<std::string> serial, owner;
        double weight;
    };
    const std::vector<Device> devices = {
        {"Canon", "Canon EOS 5D Mark II", std::nullopt, std::nullopt, 5},
        {"Canon", "Canon EOS 5D Mark II", std::string("0420601234"), std::nullopt, 3},
        {"NIKON CORPORATION", "NIKON D300", std::nullopt, std::nullopt, 4},
        {"Apple", "iPhone 4S", std::nullopt, std::nullopt, 6},
        {"Apple", "iPhone 4S", std::nullopt, std::string("J. Doe"), 2},
        {"SAMSUNG", "GT-I9300", std::nullopt, std::nullopt, 3},
        {"SONY", "DSC-HX100V", std::nullopt, std::nullopt, 2},
    };
    const std::vector<std::pair<double, double>> cities = {
        {43.203640, 5.822985}, {48.856600, 2.352200}, {34.052200, -118.243700},
        {-33.868800, 151.209300}, {57.649110, 10.407440}};

    std::mt19937_64 rng(seed);
    const auto uniform = [&](double a, double b) {
        return a + (b - a) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    const auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    double total_weight = 0;
    for (const auto& d : devices) {
        total_weight += d.weight;
    }

    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) {
        order[i] = i;
    }
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_geo = static_cast<std::size_t>(std::llround(0.4 * static_cast<double>(count)));
    std::vector<bool> geotag(count, false);
    for (std::size_t i = 0; i < n_geo; ++i) {
        geotag[order[i]] = true;
    }

    const auto base = *parse_time("2013:08:01 00:00:00");
    std::vector<std::pair<double, double>> used;
    CorpusSpec c;
    for (std::size_t i = 0; i < count; ++i) {
        FileSpec f;
        char name[64];
        std::snprintf(name, sizeof name, "batch%zu/IMG_%05zu.JPG", i % 4, i);
        f.name = name;
        if (!geotag[i] && uniform(0, 1) < 0.03) {
            c.files.push_back(f);  // no EXIF at all
            continue;
        }
        double w = uniform(0, total_weight);
        std::size_t d = 0;
        while (d + 1 < devices.size() && w >= devices[d].weight) {
            w -= devices[d].weight;
            ++d;
        }
        ExifSpec s = camera(devices[d].make, devices[d].model);
        s.serial_number = devices[d].serial;
        s.owner_name = devices[d].owner;
        s.byte_order = rng() & 1 ? exif::ByteOrder::little_endian : exif::ByteOrder::big_endian;
        std::optional<std::int64_t> t;
        if (uniform(0, 1) >= 0.04) {
            const auto day = static_cast<std::int64_t>(pick(4));
            const auto centre = base + day * 86400 + static_cast<std::int64_t>(uniform(8, 20) * 3600);
            // Mixture of tight bursts and spread-out shots.
            const double spread = uniform(0, 1) < 0.5 ? 1800 : 6 * 3600;
            t = centre + static_cast<std::int64_t>(uniform(-spread, spread));
            s.datetime = fmt_time(*t);
        }
        if (geotag[i]) {
            std::pair<double, double> pos;
            if (!used.empty() && uniform(0, 1) < 0.08) {
                pos = used[pick(used.size())];
            } else {
                const auto& city = cities[pick(cities.size())];
                pos = {std::llround((city.first + uniform(-0.05, 0.05)) * 1e6) / 1e6,
                       std::llround((city.second + uniform(-0.05, 0.05)) * 1e6) / 1e6};
                used.push_back(pos);
            }
            set_gps(s, pos.first, pos.second, t.value_or(base) - 3600);
            s.dop = std::round(uniform(1, 4) * 10) / 10;
        }
        f.exif = s;
        c.files.push_back(f);
    }
    return c;
}

CorpusSpec preset_grouping()
{
    CorpusSpec c;
    const auto t0 = *parse_time("2014:05:03 11:00:00");
    const auto add = [&](const std::string& name, const std::string& make, double lat, double lng,
                         std::int64_t dt) {
        FileSpec f;
        f.name = name;
        f.exif = camera(make, make == "Canon" ? "Canon PowerShot S100" : "NEX-5N");
        f.exif->datetime = fmt_time(t0 + dt);
        set_gps(*f.exif, lat, lng, t0 + dt);
        c.files.push_back(f);
    };
    // Six at one spot, deliberately not in path order of capture.
    add("tour/e.jpg", "Canon", 48.858370, 2.294481, 0);
    add("tour/b.jpg", "SONY", 48.858370, 2.294481, 60);
    add("tour/f.jpg", "Canon", 48.858370, 2.294481, 120);
    add("tour/a.jpg", "SONY", 48.858370, 2.294481, 180);
    add("tour/d.jpg", "Canon", 48.858370, 2.294481, 240);
    add("tour/c.jpg", "Canon", 48.858370, 2.294481, 300);
    // Differ only in the 8th decimal.
    add("louvre/x1.jpg", "Canon", 48.86000001, 2.33600004, 4000);
    add("louvre/x2.jpg", "SONY", 48.86000004, 2.33600001, 4100);
    // Three of a kind.
    add("arc/t1.jpg", "SONY", 48.873792, 2.295028, 8000);
    add("arc/t2.jpg", "SONY", 48.873792, 2.295028, 8100);
    add("arc/t3.jpg", "Canon", 48.873792, 2.295028, 8200);
    add("solo/s.jpg", "Canon", 48.846222, 2.346414, 9000);
    return c;
}

CorpusSpec preset_verification()
{
    CorpusSpec c;
    const auto t0 = *parse_time("2015:03:14 09:26:53");
    const auto geo = [&](const std::string& name) {
        FileSpec f;
        f.name = name;
        f.exif = camera("Apple", "iPhone 5");
        f.exif->datetime = fmt_time(t0);
        set_gps(*f.exif, 45.764043, 4.835659, t0);
        f.exif->altitude_m = 170.0;
        c.files.push_back(f);
        return c.files.size() - 1;
    };
    geo("clean.jpg");
    {
        auto& f = c.files[geo("timestamp_25h.jpg")];
        set_gps(*f.exif, 45.764043, 4.835659, t0 + 25 * 3600);
    }
    c.files[geo("wlan.jpg")].exif->processing_method = "WLAN";
    c.files[geo("dop_9_9.jpg")].exif->dop = 9.9;
    c.files[geo("zero_denominator.jpg")].exif->zero_denominator_lat = true;
    c.files[geo("corrupt_pixels.jpg")].corrupt_pixels = true;
    {
        auto& f = c.files[geo("no_capture_time.jpg")];
        f.exif->datetime.reset();
    }
    {
        FileSpec f;
        f.name = "truncated_ifd.jpg";
        f.exif = camera("Apple", "iPhone 5");
        f.exif->byte_order = exif::ByteOrder::big_endian;
        f.exif->truncate_ifd0_after = 3;
        c.files.push_back(f);
    }
    {
        auto& f = c.files[geo("scan.tif")];
        f.format = Format::tiff;
        f.exif->byte_order = exif::ByteOrder::big_endian;
    }
    {
        FileSpec f;
        f.name = "no_exif.jpg";
        c.files.push_back(f);
    }
    {
        FileSpec f;
        f.name = "notes.txt";
        f.format = Format::text;
        f.text = "case notes\n";
        c.files.push_back(f);
    }
    {
        FileSpec f;
        f.name = "diagram.png";
        f.format = Format::png;
        c.files.push_back(f);
    }
    return c;
}

CorpusSpec preset_mixed()
{
    CorpusSpec c;
    const auto t0 = *parse_time("2012:12:24 18:00:00");
    for (int i = 0; i < 20; ++i) {
        FileSpec f;
        f.name = "photos/P" + std::to_string(1000 + i) + ".JPG";
        f.exif = camera(i % 3 ? "Canon" : "FUJIFILM", i % 3 ? "Canon EOS 600D" : "X100S");
        f.exif->datetime = fmt_time(t0 + i * 1200);
        if (i < 12) {
            set_gps(*f.exif, 50.0 + i * 0.01, 4.0 + i * 0.01, t0 + i * 1200);
        }
        c.files.push_back(f);
    }
    for (int i = 0; i < 5; ++i) {
        FileSpec f;
        f.name = "docs/readme" + std::to_string(i) + ".txt";
        f.format = Format::text;
        f.text = "not an image " + std::to_string(i) + "\n";
        c.files.push_back(f);
    }
    return c;
}

std::optional<std::string> opt_string(const nlohmann::json& j, const char* key)
{
    if (j.contains(key) && j[key].is_string()) {
        return j[key].get<std::string>();
    }
    return std::nullopt;
}

std::optional<double> opt_double(const nlohmann::json& j, const char* key)
{
    if (j.contains(key) && j[key].is_number()) {
        return j[key].get<double>();
    }
    return std::nullopt;
}

}  // namespace

std::vector<std::uint8_t> build_tiff_block(const ExifSpec& spec)
{
    return build_block(spec, false);
}

std::vector<std::uint8_t> make_jpeg(const ExifSpec* spec, int width, int height,
                                    std::uint64_t seed, bool corrupt_pixels)
{
    thumbnail::RgbImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
    std::mt19937_64 rng(seed);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            auto* p = &img.pixels[(static_cast<std::size_t>(y) * width + x) * 3];
            const auto noise = rng();
            p[0] = static_cast<std::uint8_t>(x * 255 / std::max(1, width - 1));
            p[1] = static_cast<std::uint8_t>(y * 255 / std::max(1, height - 1));
            p[2] = static_cast<std::uint8_t>(noise & 0xFF);
        }
    }
    auto jpeg = thumbnail::encode_jpeg(img, 90);
    if (corrupt_pixels) {
        // Keep everything up to and including the SOS header, then half the scan.
        for (std::size_t i = 2; i + 3 < jpeg.size(); ++i) {
            if (jpeg[i] == 0xFF && jpeg[i + 1] == 0xDA) {
                const std::size_t header_end = i + 2 + (jpeg[i + 2] << 8 | jpeg[i + 3]);
                jpeg.resize(header_end + (jpeg.size() - header_end) / 4);
                break;
            }
        }
    }
    if (!spec) {
        return jpeg;
    }
    const auto block = build_block(*spec, false);
    Bytes app1 = {0xFF, 0xE1};
    const std::size_t len = 2 + 6 + block.size();
    app1.push_back(static_cast<std::uint8_t>(len >> 8));
    app1.push_back(static_cast<std::uint8_t>(len));
    for (char ch : std::string_view("Exif\0\0", 6)) {
        app1.push_back(static_cast<std::uint8_t>(ch));
    }
    app1.insert(app1.end(), block.begin(), block.end());
    jpeg.insert(jpeg.begin() + 2, app1.begin(), app1.end());
    return jpeg;
}

std::string expected_fake_id(const std::optional<ExifSpec>& spec)
{
    if (!spec) {
        return "UNKNOWN-DEVICE";
    }
    std::string id = trim(spec->make.value_or("")) + trim(spec->model.value_or(""));
    if (!spec->truncate_ifd0_after) {
        for (const auto& extra : {spec->serial_number, spec->owner_name, spec->lens_model}) {
            if (extra && !trim(*extra).empty()) {
                id += " | " + trim(*extra);
            }
        }
    }
    return id.empty() ? "UNKNOWN-DEVICE" : id;
}

CorpusSpec preset(const std::string& name, std::size_t count, std::uint64_t seed)
{
    if (name == "session") {
        return preset_session();
    }
    if (name == "random") {
        return preset_random(count, seed);
    }
    if (name == "grouping") {
        return preset_grouping();
    }
    if (name == "verification") {
        return preset_verification();
    }
    if (name == "mixed") {
        return preset_mixed();
    }
    throw std::invalid_argument("unknown fixture preset: " + name);
}

CorpusSpec parse_corpus_spec(const nlohmann::json& doc)
{
    CorpusSpec c;
    if (doc.contains("preset")) {
        c = preset(doc.at("preset").get<std::string>(), doc.value("count", std::size_t{500}),
                   doc.value("seed", std::uint64_t{1}));
    }
    c.extension = opt_string(doc, "extension");
    for (const auto& jf : doc.value("files", nlohmann::json::array())) {
        FileSpec f;
        f.name = jf.at("name").get<std::string>();
        const auto format = jf.value("format", std::string("jpeg"));
        f.format = format == "tiff"   ? Format::tiff
                   : format == "text" ? Format::text
                   : format == "png"  ? Format::png
                                      : Format::jpeg;
        if (format != "jpeg" && format != "tiff" && format != "text" && format != "png") {
            throw std::invalid_argument("unknown format " + format);
        }
        f.corrupt_pixels = jf.value("corrupt_pixels", false);
        f.width = jf.value("width", 32);
        f.height = jf.value("height", 24);
        f.text = jf.value("text", std::string());
        if (jf.contains("exif")) {
            const auto& je = jf["exif"];
            ExifSpec s;
            s.byte_order = je.value("byte_order", std::string("II")) == "MM"
                               ? exif::ByteOrder::big_endian
                               : exif::ByteOrder::little_endian;
            s.make = opt_string(je, "make");
            s.model = opt_string(je, "model");
            s.serial_number = opt_string(je, "serial_number");
            s.owner_name = opt_string(je, "owner_name");
            s.lens_model = opt_string(je, "lens_model");
            s.datetime = opt_string(je, "datetime");
            s.lat = opt_double(je, "lat");
            s.lng = opt_double(je, "lng");
            s.altitude_m = opt_double(je, "altitude_m");
            s.gps_date = opt_string(je, "gps_date");
            s.gps_time = opt_string(je, "gps_time");
            s.processing_method = opt_string(je, "processing_method");
            s.dop = opt_double(je, "dop");
            s.zero_denominator_lat = je.value("zero_denominator_lat", false);
            if (je.contains("truncate_ifd0_after")) {
                s.truncate_ifd0_after = je["truncate_ifd0_after"].get<int>();
            }
            f.exif = s;
        }
        c.files.push_back(f);
    }
    return c;
}

nlohmann::json write_corpus(const CorpusSpec& spec, const fs::path& out)
{
    const fs::path root = out / "evidence";
    fs::create_directories(root);

    struct Expect {
        std::string path;
        bool image = false;
        bool geotagged = false;
        std::string fake_id;
        std::optional<std::int64_t> time;
        std::int64_t lat_e6 = 0, lng_e6 = 0;
        std::vector<std::string> findings;
    };
    std::vector<Expect> expects;
    std::uint64_t seed = 0;
    for (const auto& f : spec.files) {
        const auto name = target_name(f, spec.extension);
        const fs::path dest = root / fs::path(name);
        fs::create_directories(dest.parent_path());
        Bytes bytes;
        Expect e;
        e.path = name;
        switch (f.format) {
        case Format::jpeg:
            bytes = make_jpeg(f.exif ? &*f.exif : nullptr, f.width, f.height, ++seed, f.corrupt_pixels);
            e.image = true;
            break;
        case Format::tiff:
            bytes = build_block(f.exif.value_or(ExifSpec{}), true);
            e.image = true;
            break;
        case Format::text:
            bytes.assign(f.text.begin(), f.text.end());
            break;
        case Format::png:
            bytes = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n', 0, 0, 0, 0};
            break;
        }
        std::ofstream os(dest, std::ios::binary);
        os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!os) {
            throw std::runtime_error("cannot write " + dest.string());
        }
        if (e.image) {
            e.fake_id = expected_fake_id(f.exif);
            if (f.exif) {
                const auto& s = *f.exif;
                if (!s.truncate_ifd0_after) {
                    e.time = parse_time(s.datetime);
                }
                e.geotagged = geotag_expected(s);
                if (e.geotagged) {
                    e.lat_e6 = std::llround(*s.lat * 1e6);
                    e.lng_e6 = std::llround(*s.lng * 1e6);
                }
                if (s.zero_denominator_lat || s.truncate_ifd0_after) {
                    e.findings.push_back("MALFORMED_METADATA");
                }
                if (e.geotagged || (!s.truncate_ifd0_after && s.processing_method)) {
                    std::string method = s.processing_method.value_or("");
                    if (method == "CELLID" || method == "WLAN" || method == "MANUAL") {
                        e.findings.push_back("NON_GPS_POSITIONING");
                    } else if (method == "GPS" && s.dop && *s.dop > 5.0) {
                        e.findings.push_back("LOW_GPS_ACCURACY");
                    }
                }
                if (e.time && s.gps_date && s.gps_time) {
                    const auto g = parse_time(*s.gps_date + " " + *s.gps_time);
                    if (g && std::llabs(*g - *e.time) > 24 * 3600) {
                        e.findings.push_back("TIMESTAMP_MISMATCH");
                    }
                }
                if (e.geotagged && !e.time) {
                    e.findings.push_back("CAPTURE_TIME_MISSING");
                }
            }
            if (f.format == Format::tiff || f.corrupt_pixels) {
                e.findings.push_back("THUMBNAIL_UNAVAILABLE");
            }
            std::sort(e.findings.begin(), e.findings.end());
        }
        expects.push_back(std::move(e));
    }
    std::sort(expects.begin(), expects.end(),
              [](const Expect& a, const Expect& b) { return a.path < b.path; });

    nlohmann::ordered_json m;
    m["root"] = "evidence";
    std::size_t images = 0, geotagged = 0;
    std::map<std::string, std::uint32_t> per_device;
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::string>> buckets;
    auto files = nlohmann::ordered_json::array();
    for (const auto& e : expects) {
        files.push_back({{"path", e.path}, {"image", e.image}, {"geotagged", e.geotagged},
                         {"fake_id", e.image ? nlohmann::ordered_json(e.fake_id) : nlohmann::ordered_json()},
                         {"findings", e.findings}});
        if (e.image) {
            ++images;
            ++per_device[e.fake_id];
        }
        if (e.geotagged) {
            ++geotagged;
            buckets[{e.lat_e6, e.lng_e6}].push_back(e.path);
        }
    }
    m["files_scanned"] = expects.size();
    m["images_found"] = images;
    m["geotagged_count"] = geotagged;
    m["non_geotagged_count"] = images - geotagged;

    std::vector<std::pair<std::string, std::uint32_t>> devices(per_device.begin(), per_device.end());
    std::stable_sort(devices.begin(), devices.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    auto jdevices = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < devices.size(); ++i) {
        jdevices.push_back({{"fake_id", devices[i].first},
                            {"nb_fake_id", devices[i].second},
                            {"ordre", i + 1}});
    }
    m["devices"] = jdevices;

    auto markers = nlohmann::ordered_json::array();
    for (const auto& g : expects) {
        if (!g.geotagged) {
            continue;
        }
        auto counts = nlohmann::ordered_json::object();
        for (const int h : {1, 2, 3, 4, 5, 12, 24}) {
            std::uint32_t n = 0;
            for (const auto& u : expects) {
                if (u.image && !u.geotagged && u.fake_id == g.fake_id && u.time && g.time
                    && std::llabs(*u.time - *g.time) <= h * 3600LL) {
                    ++n;
                }
            }
            counts["h" + std::to_string(h)] = n;
        }
        const auto& bucket = buckets.at({g.lat_e6, g.lng_e6});
        markers.push_back({{"path", g.path},
                           {"fake_id", g.fake_id},
                           {"lat_e6", g.lat_e6},
                           {"lng_e6", g.lng_e6},
                           {"datetime", g.time ? nlohmann::ordered_json(fmt_time(*g.time)) : nlohmann::ordered_json()},
                           {"multiples", bucket.size() - 1},
                           {"reference", bucket.front() == g.path},
                           {"non_geotag", counts}});
    }
    m["markers"] = markers;

    auto jbuckets = nlohmann::ordered_json::array();
    for (const auto& [key, paths] : buckets) {
        jbuckets.push_back({{"lat_e6", key.first},
                            {"lng_e6", key.second},
                            {"size", paths.size()},
                            {"reference", paths.front()}});
    }
    m["buckets"] = jbuckets;
    m["files"] = files;

    std::ofstream(out / "manifest.json") << m.dump(2) << '\n';
    return nlohmann::json::parse(m.dump());
}

}  // namespace geoexif::fixtures
