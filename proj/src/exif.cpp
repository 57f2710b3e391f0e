#include "geoexif/exif.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <set>

namespace geoexif::exif {
namespace {

struct Reader {
    ByteSpan bytes;
    bool little_endian = false;

    bool has(std::uint64_t offset, std::uint64_t len) const noexcept
    {
        return offset <= bytes.size() && len <= bytes.size() - offset;
    }

    std::optional<std::uint16_t> u16(std::uint64_t offset) const noexcept
    {
        if (!has(offset, 2)) {
            return std::nullopt;
        }
        const auto b0 = bytes[offset];
        const auto b1 = bytes[offset + 1];
        return little_endian ? static_cast<std::uint16_t>(b0 | (b1 << 8))
                             : static_cast<std::uint16_t>((b0 << 8) | b1);
    }

    std::optional<std::uint32_t> u32(std::uint64_t offset) const noexcept
    {
        if (!has(offset, 4)) {
            return std::nullopt;
        }
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint32_t b = bytes[offset + i];
            v |= little_endian ? (b << (8 * i)) : (b << (8 * (3 - i)));
        }
        return v;
    }
};

std::uint16_t decode16(const std::uint8_t* p, bool le)
{
    return le ? static_cast<std::uint16_t>(p[0] | (p[1] << 8))
              : static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

std::uint32_t decode32(const std::uint8_t* p, bool le)
{
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        const std::uint32_t b = p[i];
        v |= le ? (b << (8 * i)) : (b << (8 * (3 - i)));
    }
    return v;
}

std::uint64_t decode64(const std::uint8_t* p, bool le)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        const std::uint64_t b = p[i];
        v |= le ? (b << (8 * i)) : (b << (8 * (7 - i)));
    }
    return v;
}

TagPayload decode_payload(std::uint16_t type, std::uint32_t count,
                          const std::vector<std::uint8_t>& raw, bool le)
{
    const std::uint8_t* p = raw.data();
    switch (static_cast<TagType>(type)) {
    case TagType::ascii: {
        std::string s(raw.begin(), raw.end());
        const auto nul = s.find('\0');
        if (nul != std::string::npos) {
            s.resize(nul);
        }
        return s;
    }
    case TagType::byte:
        return std::vector<std::uint64_t>(raw.begin(), raw.end());
    case TagType::short_: {
        std::vector<std::uint64_t> v(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            v[i] = decode16(p + 2 * i, le);
        }
        return v;
    }
    case TagType::long_: {
        std::vector<std::uint64_t> v(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            v[i] = decode32(p + 4 * i, le);
        }
        return v;
    }
    case TagType::rational: {
        std::vector<RationalU> v(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            v[i] = {decode32(p + 8 * i, le), decode32(p + 8 * i + 4, le)};
        }
        return v;
    }
    case TagType::sbyte: {
        std::vector<std::int64_t> v(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            v[i] = static_cast<std::int8_t>(p[i]);
        }
        return v;
    }
    case TagType::sshort: {
        std::vector<std::int64_t> v(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            v[i] = static_cast<std::int16_t>(decode16(p + 2 * i, le));
        }
        return v;
    }
    case TagType::slong: {
        std::vector<std::int64_t> v(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            v[i] = static_cast<std::int32_t>(decode32(p + 4 * i, le));
        }
        return v;
    }
    case TagType::srational: {
        std::vector<RationalS> v(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            v[i] = {static_cast<std::int32_t>(decode32(p + 8 * i, le)),
                    static_cast<std::int32_t>(decode32(p + 8 * i + 4, le))};
        }
        return v;
    }
    case TagType::float_: {
        std::vector<double> v(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            const std::uint32_t bits = decode32(p + 4 * i, le);
            float f;
            std::memcpy(&f, &bits, sizeof f);
            v[i] = f;
        }
        return v;
    }
    case TagType::double_: {
        std::vector<double> v(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            const std::uint64_t bits = decode64(p + 8 * i, le);
            double d;
            std::memcpy(&d, &bits, sizeof d);
            v[i] = d;
        }
        return v;
    }
    case TagType::undefined:
        break;
    }
    return raw;
}

std::string hex_string(std::uint16_t v)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%04X", v);
    return buf;
}

class TiffParser {
public:
    TiffParser(ByteSpan bytes, ExifRecord& record) : reader_{bytes, false}, record_(record) {}

    bool parse_header()
    {
        if (reader_.bytes.size() < 8) {
            record_.warnings.emplace_back("TIFF header truncated");
            return false;
        }
        if (reader_.bytes[0] == 'I' && reader_.bytes[1] == 'I') {
            reader_.little_endian = true;
            record_.byte_order = ByteOrder::little_endian;
        } else if (reader_.bytes[0] == 'M' && reader_.bytes[1] == 'M') {
            reader_.little_endian = false;
            record_.byte_order = ByteOrder::big_endian;
        } else {
            record_.warnings.emplace_back("invalid TIFF byte-order mark");
            return false;
        }
        if (reader_.u16(2) != 42) {
            record_.warnings.emplace_back("invalid TIFF magic number");
            return false;
        }
        first_ifd_ = *reader_.u32(4);
        return true;
    }

    void run()
    {
        const auto next = parse_ifd(first_ifd_, Ifd::ifd0);
        if (next && *next != 0) {
            parse_ifd(*next, Ifd::ifd1);
        }
        record_.has_gps = std::any_of(record_.tags.begin(), record_.tags.end(),
                                      [](const auto& kv) { return kv.first.ifd == Ifd::gps; });
    }

private:
    // Returns the next-IFD offset when the IFD was read completely.
    std::optional<std::uint32_t> parse_ifd(std::uint32_t offset, Ifd ifd)
    {
        if (!visited_.insert(offset).second) {
            record_.warnings.push_back("IFD loop at offset " + std::to_string(offset));
            return std::nullopt;
        }
        const auto count = reader_.u16(offset);
        if (!count) {
            record_.warnings.push_back(std::string(to_string(ifd)) + " offset "
                                       + std::to_string(offset) + " out of range");
            return std::nullopt;
        }
        for (std::uint32_t i = 0; i < *count; ++i) {
            const std::uint64_t entry = std::uint64_t{offset} + 2 + 12ULL * i;
            if (!reader_.has(entry, 12)) {
                record_.warnings.push_back(std::string(to_string(ifd)) + " declares "
                                           + std::to_string(*count) + " entries, truncated after "
                                           + std::to_string(i));
                return std::nullopt;
            }
            parse_entry(entry, ifd);
        }
        return reader_.u32(std::uint64_t{offset} + 2 + 12ULL * *count);
    }

    void parse_entry(std::uint64_t entry, Ifd ifd)
    {
        const std::uint16_t tag = *reader_.u16(entry);
        const std::uint16_t type = *reader_.u16(entry + 2);
        const std::uint32_t count = *reader_.u32(entry + 4);
        const std::string where = std::string(to_string(ifd)) + " tag " + hex_string(tag);

        if (is_pointer(ifd, tag)) {
            const auto target = *reader_.u32(entry + 8);
            if ((type != static_cast<std::uint16_t>(TagType::long_) && type != 13) || count != 1) {
                record_.warnings.push_back(where + ": malformed sub-IFD pointer");
                return;
            }
            const Ifd sub = tag == tag::exif_ifd_pointer  ? Ifd::exif
                            : tag == tag::gps_ifd_pointer ? Ifd::gps
                                                          : Ifd::interop;
            parse_ifd(target, sub);
            return;
        }

        const std::size_t unit = type_size(type);
        if (unit == 0) {
            record_.warnings.push_back(where + ": unknown type " + std::to_string(type));
            return;
        }
        const std::uint64_t total = std::uint64_t{unit} * count;
        std::uint64_t value_offset = entry + 8;
        if (total > 4) {
            value_offset = *reader_.u32(entry + 8);
        }
        if (!reader_.has(value_offset, total)) {
            record_.warnings.push_back(where + ": value of " + std::to_string(total)
                                       + " bytes outside segment");
            return;
        }
        TagValue value;
        value.type = type;
        value.count = count;
        value.raw.assign(reader_.bytes.begin() + value_offset,
                         reader_.bytes.begin() + value_offset + total);
        value.payload = decode_payload(type, count, value.raw, reader_.little_endian);
        if (!record_.tags.emplace(TagKey{ifd, tag}, std::move(value)).second) {
            record_.warnings.push_back(where + ": duplicate entry ignored");
        }
    }

    static bool is_pointer(Ifd ifd, std::uint16_t tag)
    {
        return (ifd == Ifd::ifd0 && (tag == tag::exif_ifd_pointer || tag == tag::gps_ifd_pointer))
               || (ifd == Ifd::exif && tag == tag::interop_ifd_pointer);
    }

    Reader reader_;
    ExifRecord& record_;
    std::uint32_t first_ifd_ = 0;
    std::set<std::uint32_t> visited_;
};

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string trim(std::string s)
{
    const auto not_space = [](unsigned char c) { return c != ' ' && c != '\0' && c != '\t'; };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::optional<std::array<RationalU, 3>> triplet(const TagValue* v, std::string_view name,
                                                std::vector<std::string>* warnings)
{
    if (!v) {
        return std::nullopt;
    }
    const auto* r = std::get_if<std::vector<RationalU>>(&v->payload);
    if (!r || r->size() != 3) {
        if (warnings) {
            warnings->push_back(std::string(name) + ": expected 3 rationals");
        }
        return std::nullopt;
    }
    return std::array<RationalU, 3>{(*r)[0], (*r)[1], (*r)[2]};
}

std::optional<char> ref_char(const ExifRecord& record, std::uint16_t tag)
{
    auto s = record.ascii(Ifd::gps, tag);
    if (!s) {
        return std::nullopt;
    }
    auto t = trim(*s);
    if (t.empty()) {
        return std::nullopt;
    }
    return t.front();
}

}  // namespace

std::string_view to_string(ImageKind kind)
{
    switch (kind) {
    case ImageKind::jpeg:
        return "jpeg";
    case ImageKind::tiff:
        return "tiff";
    case ImageKind::other_image:
        return "other_image";
    case ImageKind::not_image:
        break;
    }
    return "not_image";
}

ImageKind detect_image_kind(ByteSpan bytes) noexcept
{
    const auto starts = [&](std::initializer_list<std::uint8_t> sig) {
        return bytes.size() >= sig.size() && std::equal(sig.begin(), sig.end(), bytes.begin());
    };
    if (starts({0xFF, 0xD8, 0xFF})) {
        return ImageKind::jpeg;
    }
    if (starts({'I', 'I', 0x2A, 0x00}) || starts({'M', 'M', 0x00, 0x2A})) {
        return ImageKind::tiff;
    }
    if (starts({0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A}) || starts({'G', 'I', 'F', '8'})) {
        return ImageKind::other_image;
    }
    return ImageKind::not_image;
}

std::string_view to_string(Ifd ifd)
{
    switch (ifd) {
    case Ifd::ifd0:
        return "IFD0";
    case Ifd::exif:
        return "ExifIFD";
    case Ifd::gps:
        return "GPS";
    case Ifd::interop:
        return "InteropIFD";
    case Ifd::ifd1:
        return "IFD1";
    }
    return "?";
}

std::size_t type_size(std::uint16_t type) noexcept
{
    switch (type) {
    case 1:
    case 2:
    case 6:
    case 7:
        return 1;
    case 3:
    case 8:
        return 2;
    case 4:
    case 9:
    case 11:
    case 13:
        return 4;
    case 5:
    case 10:
    case 12:
        return 8;
    default:
        return 0;
    }
}

double rational_to_decimal(RationalU r)
{
    if (r.denominator == 0) {
        throw MalformedRational("rational " + std::to_string(r.numerator) + "/0");
    }
    return static_cast<double>(r.numerator) / static_cast<double>(r.denominator);
}

double rational_to_decimal(RationalS r)
{
    if (r.denominator == 0) {
        throw MalformedRational("rational " + std::to_string(r.numerator) + "/0");
    }
    return static_cast<double>(r.numerator) / static_cast<double>(r.denominator);
}

std::string_view tag_name(Ifd ifd, std::uint16_t t)
{
    if (ifd == Ifd::gps) {
        switch (t) {
        case tag::gps_version_id:
            return "GPSVersionID";
        case tag::gps_latitude_ref:
            return "GPSLatitudeRef";
        case tag::gps_latitude:
            return "GPSLatitude";
        case tag::gps_longitude_ref:
            return "GPSLongitudeRef";
        case tag::gps_longitude:
            return "GPSLongitude";
        case tag::gps_altitude_ref:
            return "GPSAltitudeRef";
        case tag::gps_altitude:
            return "GPSAltitude";
        case tag::gps_time_stamp:
            return "GPSTimeStamp";
        case tag::gps_dop:
            return "GPSDOP";
        case tag::gps_processing_method:
            return "GPSProcessingMethod";
        case tag::gps_date_stamp:
            return "GPSDateStamp";
        default:
            return {};
        }
    }
    switch (t) {
    case tag::make:
        return "Make";
    case tag::model:
        return "Model";
    case tag::orientation:
        return "Orientation";
    case tag::date_time:
        return "DateTime";
    case tag::date_time_original:
        return "DateTimeOriginal";
    case tag::create_date:
        return "CreateDate";
    case tag::maker_note:
        return "MakerNote";
    case tag::owner_name:
        return "OwnerName";
    case tag::serial_number:
        return "SerialNumber";
    case tag::lens_info:
        return "LensInfo";
    case tag::lens_make:
        return "LensMake";
    case tag::lens_model:
        return "LensModel";
    case tag::lens_serial_number:
        return "LensSerialNumber";
    default:
        return {};
    }
}

const TagValue* ExifRecord::find(Ifd ifd, std::uint16_t t) const
{
    const auto it = tags.find(TagKey{ifd, t});
    return it == tags.end() ? nullptr : &it->second;
}

std::optional<std::string> ExifRecord::ascii(Ifd ifd, std::uint16_t t) const
{
    const auto* v = find(ifd, t);
    if (!v) {
        return std::nullopt;
    }
    if (const auto* s = std::get_if<std::string>(&v->payload)) {
        return *s;
    }
    return std::nullopt;
}

std::optional<std::string> ExifRecord::image_ascii(std::uint16_t t) const
{
    if (auto s = ascii(Ifd::ifd0, t)) {
        return s;
    }
    return ascii(Ifd::exif, t);
}

std::optional<ByteSpan> find_jpeg_exif(ByteSpan jpeg, std::vector<std::string>* warnings)
{
    const auto warn = [&](std::string msg) {
        if (warnings) {
            warnings->push_back(std::move(msg));
        }
    };
    if (jpeg.size() < 4 || jpeg[0] != 0xFF || jpeg[1] != 0xD8) {
        return std::nullopt;
    }
    std::size_t pos = 2;
    while (pos < jpeg.size()) {
        if (jpeg[pos] != 0xFF) {
            warn("JPEG marker expected at offset " + std::to_string(pos));
            return std::nullopt;
        }
        while (pos < jpeg.size() && jpeg[pos] == 0xFF) {
            ++pos;
        }
        if (pos >= jpeg.size()) {
            break;
        }
        const std::uint8_t marker = jpeg[pos++];
        if (marker == 0xD8 || marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) {
            continue;
        }
        if (marker == 0xD9 || marker == 0xDA) {
            break;
        }
        if (pos + 2 > jpeg.size()) {
            warn("JPEG segment length truncated");
            break;
        }
        const std::size_t len = (std::size_t{jpeg[pos]} << 8) | jpeg[pos + 1];
        if (len < 2) {
            warn("JPEG segment with invalid length");
            break;
        }
        const std::size_t payload = pos + 2;
        const std::size_t end = pos + len;
        static constexpr std::uint8_t exif_id[] = {'E', 'x', 'i', 'f', 0, 0};
        if (marker == 0xE1 && payload + 6 <= jpeg.size()
            && std::equal(std::begin(exif_id), std::end(exif_id), jpeg.begin() + payload)) {
            if (end > jpeg.size()) {
                warn("APP1 segment declares " + std::to_string(len) + " bytes, file ends early");
            }
            const std::size_t stop = std::min(end, jpeg.size());
            return jpeg.subspan(payload + 6, stop - (payload + 6));
        }
        pos = end;
    }
    return std::nullopt;
}

std::optional<ExifRecord> parse_tiff(ByteSpan tiff)
{
    ExifRecord record;
    TiffParser parser(tiff, record);
    if (parser.parse_header()) {
        parser.run();
    }
    return record;
}

std::optional<ExifRecord> parse_exif(ByteSpan bytes)
{
    switch (detect_image_kind(bytes)) {
    case ImageKind::jpeg: {
        std::vector<std::string> warnings;
        const auto block = find_jpeg_exif(bytes, &warnings);
        if (!block) {
            return std::nullopt;
        }
        auto record = parse_tiff(*block);
        record->warnings.insert(record->warnings.begin(), warnings.begin(), warnings.end());
        return record;
    }
    case ImageKind::tiff:
        return parse_tiff(bytes);
    default:
        return std::nullopt;
    }
}

GpsIfd extract_gps(const ExifRecord& record, std::vector<std::string>* warnings)
{
    GpsIfd gps;
    gps.latitude_ref = ref_char(record, tag::gps_latitude_ref);
    gps.longitude_ref = ref_char(record, tag::gps_longitude_ref);
    gps.latitude = triplet(record.find(Ifd::gps, tag::gps_latitude), "GPSLatitude", warnings);
    gps.longitude = triplet(record.find(Ifd::gps, tag::gps_longitude), "GPSLongitude", warnings);
    gps.time_stamp = triplet(record.find(Ifd::gps, tag::gps_time_stamp), "GPSTimeStamp", warnings);

    if (const auto* alt = record.find(Ifd::gps, tag::gps_altitude)) {
        const auto* r = std::get_if<std::vector<RationalU>>(&alt->payload);
        if (r && r->size() == 1) {
            gps.altitude = r->front();
        } else if (warnings) {
            warnings->emplace_back("GPSAltitude: expected 1 rational");
        }
    }
    if (const auto* ref = record.find(Ifd::gps, tag::gps_altitude_ref)) {
        const auto* u = std::get_if<std::vector<std::uint64_t>>(&ref->payload);
        if (u && !u->empty()) {
            gps.altitude_ref = static_cast<std::uint8_t>(u->front());
        }
    }
    if (const auto* dop = record.find(Ifd::gps, tag::gps_dop)) {
        const auto* r = std::get_if<std::vector<RationalU>>(&dop->payload);
        try {
            if (r && r->size() == 1) {
                gps.dop = rational_to_decimal(r->front());
            } else if (warnings) {
                warnings->emplace_back("GPSDOP: expected 1 rational");
            }
        } catch (const MalformedRational& e) {
            if (warnings) {
                warnings->push_back(std::string("GPSDOP: ") + e.what());
            }
        }
    }
    if (const auto* method = record.find(Ifd::gps, tag::gps_processing_method)) {
        std::string text;
        if (const auto* s = std::get_if<std::string>(&method->payload)) {
            text = *s;
        } else if (const auto* b = std::get_if<std::vector<std::uint8_t>>(&method->payload)) {
            // UNDEFINED values start with an 8-byte character-code prefix.
            std::size_t start = 0;
            if (b->size() >= 8) {
                static constexpr std::string_view codes[] = {
                    std::string_view("ASCII\0\0\0", 8), std::string_view("UNICODE\0", 8),
                    std::string_view("JIS\0\0\0\0\0", 8), std::string_view("\0\0\0\0\0\0\0\0", 8)};
                const std::string_view head(reinterpret_cast<const char*>(b->data()), 8);
                if (std::find(std::begin(codes), std::end(codes), head) != std::end(codes)) {
                    start = 8;
                }
            }
            for (std::size_t i = start; i < b->size(); ++i) {
                const char c = static_cast<char>((*b)[i]);
                if (c >= 0x20 && c < 0x7F) {
                    text.push_back(c);
                }
            }
        }
        text = trim(text);
        if (!text.empty()) {
            gps.processing_method = text;
        }
    }
    gps.date_stamp = record.ascii(Ifd::gps, tag::gps_date_stamp);
    return gps;
}

std::string render_value(const TagValue& value)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return trim(v);
            } else if constexpr (std::is_same_v<T, std::vector<std::uint8_t>>) {
                const bool printable = !v.empty() && std::all_of(v.begin(), v.end(), [](auto c) {
                    return (c >= 0x20 && c < 0x7F) || c == 0;
                });
                std::string out;
                if (printable) {
                    for (auto c : v) {
                        if (c != 0) {
                            out.push_back(static_cast<char>(c));
                        }
                    }
                    return trim(out);
                }
                static constexpr char digits[] = "0123456789abcdef";
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) {
                        out.push_back(' ');
                    }
                    out.push_back(digits[v[i] >> 4]);
                    out.push_back(digits[v[i] & 0xF]);
                }
                return out;
            } else {
                std::string out;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) {
                        out.push_back(' ');
                    }
                    if constexpr (std::is_same_v<T, std::vector<RationalU>>
                                  || std::is_same_v<T, std::vector<RationalS>>) {
                        if (v[i].denominator == 0) {
                            out += std::to_string(v[i].numerator) + "/0";
                        } else {
                            out += format_double(rational_to_decimal(v[i]));
                        }
                    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                        out += format_double(v[i]);
                    } else {
                        out += std::to_string(v[i]);
                    }
                }
                return out;
            }
        },
        value.payload);
}

}  // namespace geoexif::exif
