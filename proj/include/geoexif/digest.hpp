#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geoexif {

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);

// Whole-file read through a read-only stream; absent when the file cannot be
// opened or read.
std::optional<std::vector<std::uint8_t>> read_file(const std::filesystem::path& path);

}  // namespace geoexif
