#include "geoexif/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <unordered_map>

#include <omp.h>

namespace geoexif::kernels {

std::optional<std::size_t> slot_index(int hours) noexcept
{
    const auto it = std::find(slot_hours.begin(), slot_hours.end(), hours);
    if (it == slot_hours.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - slot_hours.begin());
}

std::vector<SlotCounts> link_counts_serial(std::span<const TimedImage> geotagged,
                                           std::span<const TimedImage> untagged)
{
    std::vector<SlotCounts> counts(geotagged.size(), SlotCounts{});
    for (std::size_t i = 0; i < geotagged.size(); ++i) {
        const auto& g = geotagged[i];
        if (!g.time) {
            continue;
        }
        for (const auto& n : untagged) {
            if (n.device != g.device || !n.time) {
                continue;
            }
            const std::int64_t delta = std::llabs(*n.time - *g.time);
            for (std::size_t s = 0; s < slot_hours.size(); ++s) {
                if (delta <= std::int64_t{slot_hours[s]} * 3600) {
                    ++counts[i][s];
                }
            }
        }
    }
    return counts;
}

std::vector<SlotCounts> link_counts_parallel(std::span<const TimedImage> geotagged,
                                             std::span<const TimedImage> untagged)
{
    // Sorted capture times per device; each slot count is then the width of
    // an equal_range window.
    std::unordered_map<std::uint32_t, std::vector<std::int64_t>> times;
    for (const auto& n : untagged) {
        if (n.time) {
            times[n.device].push_back(*n.time);
        }
    }
    for (auto& [device, list] : times) {
        std::sort(list.begin(), list.end());
    }

    std::vector<SlotCounts> counts(geotagged.size(), SlotCounts{});
    const auto n = static_cast<std::int64_t>(geotagged.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& g = geotagged[i];
        if (!g.time) {
            continue;
        }
        const auto it = times.find(g.device);
        if (it == times.end()) {
            continue;
        }
        const auto& list = it->second;
        for (std::size_t s = 0; s < slot_hours.size(); ++s) {
            const std::int64_t window = std::int64_t{slot_hours[s]} * 3600;
            const auto lo = std::lower_bound(list.begin(), list.end(), *g.time - window);
            const auto hi = std::upper_bound(lo, list.end(), *g.time + window);
            counts[i][s] = static_cast<std::uint32_t>(hi - lo);
        }
    }
    return counts;
}

std::vector<std::uint8_t> zone_mask_serial(std::span<const geo::GeoPoint> points,
                                           const geo::ZoneFilter& zone)
{
    std::vector<std::uint8_t> mask(points.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        mask[i] = geo::within_zone(points[i], zone) ? 1 : 0;
    }
    return mask;
}

std::vector<std::uint8_t> zone_mask_parallel(std::span<const geo::GeoPoint> points,
                                             const geo::ZoneFilter& zone)
{
    std::vector<std::uint8_t> mask(points.size(), 0);
    const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        mask[i] = geo::within_zone(points[i], zone) ? 1 : 0;
    }
    return mask;
}

}  // namespace geoexif::kernels
