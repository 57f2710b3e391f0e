#pragma once

// Data-parallel inner loops of the indexer and the store, each with a plain
// serial reference kept for testing and benchmarking. Parallel versions use
// OpenMP and must return exactly what the serial ones return.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "geoexif/geo.hpp"

namespace geoexif::kernels {

inline constexpr std::array<int, 7> slot_hours = {1, 2, 3, 4, 5, 12, 24};

// Index into slot_hours, or absent for a width outside the fixed list.
std::optional<std::size_t> slot_index(int hours) noexcept;

using SlotCounts = std::array<std::uint32_t, slot_hours.size()>;

// One image reduced to what time-slot linking needs. device is a dense index
// into the run's fingerprint table; time is seconds on the wall-clock axis.
struct TimedImage {
    std::uint32_t device = 0;
    std::optional<std::int64_t> time;
};

// For each geotagged image g and slot s: the number of non-geotagged images
// with the same device and a capture time within s hours of g (inclusive).
// Images without a time never link; a geotagged image without one gets zeros.
std::vector<SlotCounts> link_counts_serial(std::span<const TimedImage> geotagged,
                                           std::span<const TimedImage> untagged);
std::vector<SlotCounts> link_counts_parallel(std::span<const TimedImage> geotagged,
                                             std::span<const TimedImage> untagged);

// 1 where within_zone(points[i], zone).
std::vector<std::uint8_t> zone_mask_serial(std::span<const geo::GeoPoint> points,
                                           const geo::ZoneFilter& zone);
std::vector<std::uint8_t> zone_mask_parallel(std::span<const geo::GeoPoint> points,
                                             const geo::ZoneFilter& zone);

}  // namespace geoexif::kernels
