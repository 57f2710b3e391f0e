#include "geoexif/device_id.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace geoexif {
namespace {

std::string trim(std::string_view s)
{
    const auto blank = [](unsigned char c) { return std::isspace(c) || c == '\0'; };
    while (!s.empty() && blank(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && blank(s.back())) {
        s.remove_suffix(1);
    }
    return std::string(s);
}

std::optional<std::string> identity_tag(const exif::ExifRecord& exif, std::uint16_t tag)
{
    for (auto ifd : {exif::Ifd::ifd0, exif::Ifd::exif}) {
        if (const auto* v = exif.find(ifd, tag)) {
            return trim(exif::render_value(*v));
        }
    }
    return std::nullopt;
}

}  // namespace

DeviceFingerprint build_fingerprint(const exif::ExifRecord& exif)
{
    DeviceFingerprint fp;
    fp.make = identity_tag(exif, exif::tag::make).value_or("");
    fp.model = identity_tag(exif, exif::tag::model).value_or("");

    // Append order is fixed so the id is deterministic.
    static constexpr std::array extras = {exif::tag::serial_number, exif::tag::owner_name,
                                          exif::tag::lens_info,     exif::tag::lens_make,
                                          exif::tag::lens_model,    exif::tag::lens_serial_number};
    for (const auto tag : extras) {
        if (auto value = identity_tag(exif, tag); value && !value->empty()) {
            fp.optional_infos += " | " + *value;
        }
    }
    fp.fake_id = fp.make + fp.model + fp.optional_infos;
    if (fp.fake_id.empty()) {
        fp.fake_id = unknown_device_id;
    }
    return fp;
}

DeviceFingerprint unknown_fingerprint()
{
    return {"", "", "", std::string(unknown_device_id)};
}

}  // namespace geoexif
