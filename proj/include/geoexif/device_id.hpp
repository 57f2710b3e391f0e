#pragma once

#include <string>
#include <string_view>

#include "geoexif/exif.hpp"

namespace geoexif {

inline constexpr std::string_view unknown_device_id = "UNKNOWN-DEVICE";

/// Best-effort device identity. fake_id concatenates the trimmed make and
/// model with " | "-prefixed extras (serial number, owner, lens data), so two
/// bodies of the same model only split when they record distinguishing tags.
struct DeviceFingerprint {
    std::string make;
    std::string model;
    std::string optional_infos;
    std::string fake_id;

    friend bool operator==(const DeviceFingerprint&, const DeviceFingerprint&) = default;
};

DeviceFingerprint build_fingerprint(const exif::ExifRecord& exif);

// For files without any EXIF block.
DeviceFingerprint unknown_fingerprint();

}  // namespace geoexif
