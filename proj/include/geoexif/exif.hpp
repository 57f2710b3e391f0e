#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace geoexif::exif {

using ByteSpan = std::span<const std::uint8_t>;

enum class ImageKind { jpeg, tiff, other_image, not_image };

std::string_view to_string(ImageKind kind);

// Content-based detection; looks at no more than the first 8 bytes.
// JPEG: FF D8 FF. TIFF: "II*\0" or "MM\0*". PNG and GIF signatures map to
// other_image. Everything else, including short input, is not_image.
ImageKind detect_image_kind(ByteSpan bytes) noexcept;

enum class ByteOrder { big_endian, little_endian };

enum class Ifd : std::uint8_t { ifd0, exif, gps, interop, ifd1 };

std::string_view to_string(Ifd ifd);

enum class TagType : std::uint16_t {
    byte = 1,
    ascii = 2,
    short_ = 3,
    long_ = 4,
    rational = 5,
    sbyte = 6,
    undefined = 7,
    sshort = 8,
    slong = 9,
    srational = 10,
    float_ = 11,
    double_ = 12,
};

// Size in bytes of one component, 0 for unknown types.
std::size_t type_size(std::uint16_t type) noexcept;

struct RationalU {
    std::uint32_t numerator = 0;
    std::uint32_t denominator = 0;
    friend bool operator==(const RationalU&, const RationalU&) = default;
};

struct RationalS {
    std::int32_t numerator = 0;
    std::int32_t denominator = 0;
    friend bool operator==(const RationalS&, const RationalS&) = default;
};

class MalformedRational : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Exact quotient; throws MalformedRational on a zero denominator.
double rational_to_decimal(RationalU r);
double rational_to_decimal(RationalS r);

// Decoded payload of one IFD entry. Unsigned integer types (BYTE, SHORT,
// LONG) share a vector, as do the signed ones. UNDEFINED keeps its bytes.
using TagPayload = std::variant<std::string,                 // ASCII
                                std::vector<std::uint64_t>,  // BYTE/SHORT/LONG
                                std::vector<std::int64_t>,   // SBYTE/SSHORT/SLONG
                                std::vector<RationalU>,      // RATIONAL
                                std::vector<RationalS>,      // SRATIONAL
                                std::vector<double>,         // FLOAT/DOUBLE
                                std::vector<std::uint8_t>>;  // UNDEFINED, unknown types

struct TagValue {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::vector<std::uint8_t> raw;  // value bytes as stored, in file byte order
    TagPayload payload;

    friend bool operator==(const TagValue&, const TagValue&) = default;
};

struct TagKey {
    Ifd ifd = Ifd::ifd0;
    std::uint16_t tag = 0;
    friend auto operator<=>(const TagKey&, const TagKey&) = default;
};

// Tag identifiers the workbench reads directly. Everything else is kept
// as an opaque entry in ExifRecord::tags.
namespace tag {
inline constexpr std::uint16_t make = 0x010F;
inline constexpr std::uint16_t model = 0x0110;
inline constexpr std::uint16_t orientation = 0x0112;
inline constexpr std::uint16_t date_time = 0x0132;
inline constexpr std::uint16_t exif_ifd_pointer = 0x8769;
inline constexpr std::uint16_t gps_ifd_pointer = 0x8825;
inline constexpr std::uint16_t interop_ifd_pointer = 0xA005;
inline constexpr std::uint16_t date_time_original = 0x9003;
inline constexpr std::uint16_t create_date = 0x9004;
inline constexpr std::uint16_t maker_note = 0x927C;
inline constexpr std::uint16_t owner_name = 0xA430;
inline constexpr std::uint16_t serial_number = 0xA431;
inline constexpr std::uint16_t lens_info = 0xA432;
inline constexpr std::uint16_t lens_make = 0xA433;
inline constexpr std::uint16_t lens_model = 0xA434;
inline constexpr std::uint16_t lens_serial_number = 0xA435;

inline constexpr std::uint16_t gps_version_id = 0x0000;
inline constexpr std::uint16_t gps_latitude_ref = 0x0001;
inline constexpr std::uint16_t gps_latitude = 0x0002;
inline constexpr std::uint16_t gps_longitude_ref = 0x0003;
inline constexpr std::uint16_t gps_longitude = 0x0004;
inline constexpr std::uint16_t gps_altitude_ref = 0x0005;
inline constexpr std::uint16_t gps_altitude = 0x0006;
inline constexpr std::uint16_t gps_time_stamp = 0x0007;
inline constexpr std::uint16_t gps_dop = 0x000B;
inline constexpr std::uint16_t gps_processing_method = 0x001B;
inline constexpr std::uint16_t gps_date_stamp = 0x001D;
}  // namespace tag

// Human-readable name for known tags, empty otherwise.
std::string_view tag_name(Ifd ifd, std::uint16_t tag);

struct ExifRecord {
    ByteOrder byte_order = ByteOrder::big_endian;
    std::map<TagKey, TagValue> tags;
    bool has_gps = false;
    std::vector<std::string> warnings;

    const TagValue* find(Ifd ifd, std::uint16_t tag) const;

    // ASCII value with trailing NULs stripped; absent if missing or not ASCII.
    std::optional<std::string> ascii(Ifd ifd, std::uint16_t tag) const;

    // Looks the tag up in IFD0 and the Exif sub-IFD, in that order.
    std::optional<std::string> image_ascii(std::uint16_t tag) const;

    friend bool operator==(const ExifRecord&, const ExifRecord&) = default;
};

// Parses the EXIF block of a JPEG (APP1 "Exif\0\0") or a bare TIFF stream.
// Returns absent when the input carries no EXIF. Malformed or truncated
// entries are skipped and noted in ExifRecord::warnings; no read ever leaves
// the provided span.
std::optional<ExifRecord> parse_exif(ByteSpan bytes);

// Parses a TIFF-structured block starting at its byte-order mark.
std::optional<ExifRecord> parse_tiff(ByteSpan tiff);

// Locates the TIFF payload of the first APP1 Exif segment in a JPEG stream.
// The returned span is clipped to the available bytes.
std::optional<ByteSpan> find_jpeg_exif(ByteSpan jpeg, std::vector<std::string>* warnings = nullptr);

// Raw GPS sub-IFD contents relevant to positioning and verification.
struct GpsIfd {
    std::optional<char> latitude_ref;
    std::optional<std::array<RationalU, 3>> latitude;
    std::optional<char> longitude_ref;
    std::optional<std::array<RationalU, 3>> longitude;
    std::optional<RationalU> altitude;
    std::uint8_t altitude_ref = 0;  // 1 = below sea level
    std::optional<std::string> processing_method;
    std::optional<double> dop;
    std::optional<std::string> date_stamp;
    std::optional<std::array<RationalU, 3>> time_stamp;
};

// Collects GPS fields from a record; shape mismatches become warnings.
GpsIfd extract_gps(const ExifRecord& record, std::vector<std::string>* warnings = nullptr);

// Text rendering of a value for reports and the device fingerprint.
// Rationals render as decimals, or "n/0" when the denominator is zero.
std::string render_value(const TagValue& value);

}  // namespace geoexif::exif
