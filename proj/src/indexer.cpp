#include "geoexif/indexer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <system_error>

#include <nlohmann/json.hpp>
#include <omp.h>

#include "geoexif/digest.hpp"
#include "geoexif/store.hpp"
#include "geoexif/thumbnail.hpp"

namespace geoexif::indexer {
namespace fs = std::filesystem;
namespace {

constexpr std::size_t max_metadata_value = 4096;

std::string upper(std::string s)
{
    for (auto& c : s) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return s;
}

std::string fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::optional<Timestamp> capture_time(const exif::ExifRecord& rec)
{
    for (const auto t : {exif::tag::date_time_original, exif::tag::create_date}) {
        if (const auto s = rec.ascii(exif::Ifd::exif, t)) {
            if (const auto ts = parse_exif_datetime(*s)) {
                return ts;
            }
        }
    }
    if (const auto s = rec.ascii(exif::Ifd::ifd0, exif::tag::date_time)) {
        return parse_exif_datetime(*s);
    }
    return std::nullopt;
}

std::optional<Timestamp> gps_time(const exif::GpsIfd& gps)
{
    if (!gps.date_stamp || !gps.time_stamp) {
        return std::nullopt;
    }
    const auto day = parse_exif_date(*gps.date_stamp);
    if (!day) {
        return std::nullopt;
    }
    try {
        const double h = exif::rational_to_decimal((*gps.time_stamp)[0]);
        const double m = exif::rational_to_decimal((*gps.time_stamp)[1]);
        const double s = exif::rational_to_decimal((*gps.time_stamp)[2]);
        const auto secs = static_cast<std::int64_t>(std::floor(h * 3600 + m * 60 + s));
        return Timestamp{*day} + std::chrono::seconds{secs};
    } catch (const exif::MalformedRational&) {
        return std::nullopt;
    }
}

double dms(const std::array<exif::RationalU, 3>& parts, char ref)
{
    return geo::dms_to_decimal({exif::rational_to_decimal(parts[0]),
                                exif::rational_to_decimal(parts[1]),
                                exif::rational_to_decimal(parts[2]), ref});
}

std::string ifd_prefix(exif::Ifd ifd)
{
    return std::string(exif::to_string(ifd));
}

std::string path_key(const fs::path& p)
{
    return p.string();
}

bool is_inside(const fs::path& inner, const fs::path& outer)
{
    const auto rel = inner.lexically_relative(outer);
    return !rel.empty() && *rel.begin() != "..";
}

}  // namespace

void ScanConfig::validate() const
{
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw ScanAborted("root is not a directory: " + root.string());
    }
    if (workspace.empty()) {
        throw ScanAborted("no workspace given");
    }
    const auto r = fs::weakly_canonical(root, ec);
    const auto w = fs::weakly_canonical(workspace, ec);
    if (w == r || is_inside(w, r)) {
        throw ScanAborted("workspace " + workspace.string() + " lies inside root "
                          + root.string());
    }
    if (thumbnail_max_px <= 0) {
        throw ScanAborted("thumbnail size must be positive");
    }
}

std::optional<ImageAsset> build_asset(const fs::path& path, std::span<const std::uint8_t> bytes)
{
    const auto kind = exif::detect_image_kind(bytes);
    if (kind != exif::ImageKind::jpeg && kind != exif::ImageKind::tiff) {
        return std::nullopt;
    }
    ImageAsset asset;
    asset.path = path;
    asset.kind = kind;
    asset.content_hash = sha256_hex(bytes);
    asset.exif = exif::parse_exif(bytes);
    if (!asset.exif) {
        asset.fingerprint = unknown_fingerprint();
        classify(asset);
        return asset;
    }
    asset.fingerprint = build_fingerprint(*asset.exif);
    asset.exif_datetime = capture_time(*asset.exif);
    std::vector<std::string> gps_warnings;
    const auto gps = exif::extract_gps(*asset.exif, &gps_warnings);
    asset.gps_datetime = gps_time(gps);
    if (gps.altitude) {
        try {
            const double alt = exif::rational_to_decimal(*gps.altitude);
            asset.altitude_m = gps.altitude_ref == 1 ? -alt : alt;
        } catch (const exif::MalformedRational&) {
            gps_warnings.emplace_back("GPSAltitude: zero denominator");
        }
    }
    auto& warnings = asset.exif->warnings;
    warnings.insert(warnings.end(), gps_warnings.begin(), gps_warnings.end());
    if (!warnings.empty()) {
        std::string detail;
        for (const auto& w : warnings) {
            detail += (detail.empty() ? "" : "; ") + w;
        }
        asset.findings.push_back({FindingCode::malformed_metadata, Severity::warning, detail});
    }
    classify(asset);
    return asset;
}

Classification classify(ImageAsset& asset)
{
    asset.position.reset();
    if (!asset.exif) {
        return Classification::non_geotagged;
    }
    const auto gps = exif::extract_gps(*asset.exif);
    if (!gps.latitude || !gps.latitude_ref || !gps.longitude || !gps.longitude_ref) {
        return Classification::non_geotagged;
    }
    try {
        const double lat = dms(*gps.latitude, *gps.latitude_ref);
        const double lng = dms(*gps.longitude, *gps.longitude_ref);
        asset.position = geo::GeoPoint(lat, lng);
        return Classification::geotagged;
    } catch (const std::exception& e) {
        const auto& la = *gps.latitude;
        const auto& lo = *gps.longitude;
        std::string raw = "GPSLatitude=";
        for (const auto& r : la) {
            raw += std::to_string(r.numerator) + "/" + std::to_string(r.denominator) + " ";
        }
        raw += std::string("GPSLatitudeRef=") + *gps.latitude_ref + " GPSLongitude=";
        for (const auto& r : lo) {
            raw += std::to_string(r.numerator) + "/" + std::to_string(r.denominator) + " ";
        }
        raw += std::string("GPSLongitudeRef=") + *gps.longitude_ref;
        asset.findings.push_back({FindingCode::malformed_metadata, Severity::warning,
                                  std::string("unusable GPS position (") + e.what() + "): " + raw});
        return Classification::non_geotagged;
    }
}

std::vector<VerificationFinding> verify_asset(const ImageAsset& asset, const VerifyOptions& options,
                                              geo_services::GeoServices* services)
{
    std::vector<VerificationFinding> out;
    if (!asset.exif) {
        return out;
    }
    const auto gps = exif::extract_gps(*asset.exif);
    if (gps.processing_method) {
        const auto method = upper(*gps.processing_method);
        if (method == "CELLID" || method == "WLAN" || method == "MANUAL") {
            out.push_back({FindingCode::non_gps_positioning, Severity::info,
                           "GPSProcessingMethod=" + *gps.processing_method});
        } else if (method == "GPS" && gps.dop && *gps.dop > options.dop_threshold) {
            out.push_back({FindingCode::low_gps_accuracy, Severity::warning,
                           "GPSProcessingMethod=" + *gps.processing_method
                               + " GPSDOP=" + fixed(*gps.dop, 3)
                               + " threshold=" + fixed(options.dop_threshold, 3)});
        }
    }
    if (asset.exif_datetime && asset.gps_datetime) {
        const auto gap = std::chrono::abs(*asset.exif_datetime - *asset.gps_datetime);
        if (gap > std::chrono::hours{24}) {
            out.push_back({FindingCode::timestamp_mismatch, Severity::warning,
                           "exif_datetime=" + format_iso(*asset.exif_datetime)
                               + " (device local, zone unknown) gps_datetime="
                               + format_iso(*asset.gps_datetime) + " (UTC) gap="
                               + std::to_string(gap.count())
                               + " s; compared as raw wall-clock values"});
        }
    }
    if (options.altitude_check && asset.position && asset.altitude_m) {
        const auto ground = services ? services->elevation_m(*asset.position) : std::nullopt;
        if (!ground) {
            out.push_back({FindingCode::altitude_unverified, Severity::info,
                           "GPSAltitude=" + fixed(*asset.altitude_m, 1)
                               + " m; no elevation available for the position"});
        } else if (std::abs(*asset.altitude_m - *ground) > options.altitude_tolerance_m) {
            out.push_back({FindingCode::altitude_implausible, Severity::warning,
                           "GPSAltitude=" + fixed(*asset.altitude_m, 1) + " m elevation="
                               + fixed(*ground, 1) + " m tolerance="
                               + fixed(options.altitude_tolerance_m, 1) + " m"});
        }
    }
    return out;
}

std::vector<Grouping> group_same_coordinates(std::span<const ImageAsset> geotagged)
{
    std::map<geo::LocationKey, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < geotagged.size(); ++i) {
        if (!geotagged[i].position) {
            throw std::invalid_argument("group_same_coordinates: asset without position");
        }
        buckets[geo::location_key(*geotagged[i].position)].push_back(i);
    }
    std::vector<Grouping> out(geotagged.size());
    for (const auto& [key, members] : buckets) {
        const auto ref = *std::min_element(members.begin(), members.end(), [&](auto a, auto b) {
            return path_key(geotagged[a].path) < path_key(geotagged[b].path);
        });
        for (const auto i : members) {
            out[i] = {static_cast<std::uint32_t>(members.size() - 1), i == ref};
        }
    }
    return out;
}

std::vector<kernels::SlotCounts> compute_timeslot_links(std::span<const ImageAsset> assets)
{
    std::map<std::string, std::uint32_t> device_index;
    for (const auto& a : assets) {
        device_index.emplace(a.fingerprint.fake_id, static_cast<std::uint32_t>(device_index.size()));
    }
    std::vector<kernels::TimedImage> tagged;
    std::vector<kernels::TimedImage> untagged;
    std::vector<std::size_t> tagged_at;
    for (std::size_t i = 0; i < assets.size(); ++i) {
        const auto& a = assets[i];
        kernels::TimedImage t{device_index.at(a.fingerprint.fake_id), std::nullopt};
        if (a.exif_datetime) {
            t.time = to_seconds(*a.exif_datetime);
        }
        if (a.position) {
            tagged.push_back(t);
            tagged_at.push_back(i);
        } else {
            untagged.push_back(t);
        }
    }
    const auto counts = kernels::link_counts_parallel(tagged, untagged);
    std::vector<kernels::SlotCounts> out(assets.size(), kernels::SlotCounts{});
    for (std::size_t k = 0; k < tagged_at.size(); ++k) {
        out[tagged_at[k]] = counts[k];
    }
    return out;
}

std::vector<DeviceRow> rank_devices(std::span<const ImageAsset> assets)
{
    std::map<std::string, DeviceRow> by_id;
    for (const auto& a : assets) {
        auto& row = by_id[a.fingerprint.fake_id];
        row.fake_id = a.fingerprint.fake_id;
        row.make = a.fingerprint.make;
        row.model = a.fingerprint.model;
        ++row.nb_fake_id;
    }
    std::vector<DeviceRow> rows;
    rows.reserve(by_id.size());
    for (auto& [id, row] : by_id) {
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const DeviceRow& a, const DeviceRow& b) {
        if (a.nb_fake_id != b.nb_fake_id) {
            return a.nb_fake_id > b.nb_fake_id;
        }
        return a.fake_id < b.fake_id;
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].ordre = static_cast<int>(i + 1);
        rows[i].color = static_cast<int>(i % device_palette_size);
    }
    return rows;
}

std::string metadata_json(const ImageAsset& asset)
{
    nlohmann::ordered_json doc;
    doc["kind"] = exif::to_string(asset.kind);
    doc["sha256"] = asset.content_hash;
    auto tags = nlohmann::ordered_json::object();
    if (asset.exif) {
        for (const auto& [key, value] : asset.exif->tags) {
            auto name = std::string(exif::tag_name(key.ifd, key.tag));
            if (name.empty()) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "0x%04X", key.tag);
                name = buf;
            }
            auto text = exif::render_value(value);
            if (text.size() > max_metadata_value) {
                text = text.substr(0, max_metadata_value) + "... (" + std::to_string(value.raw.size())
                       + " bytes)";
            }
            tags[ifd_prefix(key.ifd) + "." + name] = text;
        }
        doc["warnings"] = asset.exif->warnings;
    } else {
        doc["warnings"] = nlohmann::ordered_json::array();
    }
    doc["tags"] = std::move(tags);
    if (asset.altitude_m) {
        doc["altitude_m"] = *asset.altitude_m;
    }
    return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

AnalysisRow scan_tree(const ScanConfig& config)
{
    config.validate();
    const auto log = [&](const std::string& line) {
        if (config.log) {
            config.log(line);
        }
    };
    std::error_code ec;
    fs::create_directories(config.workspace, ec);
    const fs::path thumbs_dir = config.workspace / "thumbs";
    fs::create_directories(thumbs_dir, ec);
    if (ec) {
        throw ScanAborted("cannot create " + thumbs_dir.string() + ": " + ec.message());
    }

    auto geo_config = config.geo;
    if (geo_config.cache_path.empty()) {
        geo_config.cache_path = config.workspace / "geocache.tsv";
    }
    std::unique_ptr<geo_services::GeoServices> services;
    if (config.reverse_geocode || config.verify.altitude_check) {
        services = geo_services::make_services(geo_config);
    }
    const FileReader reader = config.reader ? config.reader : FileReader(read_file);

    std::unique_ptr<Store> store;
    try {
        store = std::make_unique<Store>(Store::default_path(config.workspace));
    } catch (const StoreError& e) {
        throw ScanAborted(e.what());
    }
    AnalysisRow run;
    run.root = fs::absolute(config.root).lexically_normal().string();
    run.start_time = now_utc();
    run.id = store->begin_run(run.root, run.start_time);
    log("run " + std::to_string(run.id) + " started on " + run.root);

    // Symlinks are not followed; only regular files are visited.
    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(
             config.root, fs::directory_options::skip_permission_denied, ec);
         !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
        const auto status = it->symlink_status(ec);
        if (!ec && fs::is_regular_file(status)) {
            files.push_back(it->path());
        }
    }
    if (ec) {
        log("walk stopped early: " + ec.message());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return path_key(a) < path_key(b); });

    std::vector<std::optional<ImageAsset>> slots(files.size());
    std::atomic<std::uint64_t> scanned{0}, images{0}, tagged{0}, unreadable{0};
    std::mutex progress_mutex;
    const int thumb_px = config.thumbnail_max_px;

    #pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(files.size()); ++i) {
        const auto& path = files[static_cast<std::size_t>(i)];
        const auto bytes = reader(path);
        if (!bytes) {
            ++unreadable;
            std::lock_guard lock(progress_mutex);
            log("unreadable, skipped: " + path.string());
        } else if (auto asset = build_asset(path, *bytes)) {
            ++images;
            if (asset->position) {
                ++tagged;
            }
            if (asset->kind == exif::ImageKind::jpeg) {
                const auto name = "thumbs/" + asset->content_hash + ".jpg";
                std::string error;
                if (thumbnail::make_thumbnail(*bytes, thumb_px, config.workspace / name, &error)) {
                    asset->thumbnail = name;
                } else {
                    asset->findings.push_back(
                        {FindingCode::thumbnail_unavailable, Severity::info, error});
                }
            } else {
                asset->findings.push_back({FindingCode::thumbnail_unavailable, Severity::info,
                                           "no thumbnail for TIFF sources"});
            }
            auto checks = verify_asset(*asset, config.verify, services.get());
            asset->findings.insert(asset->findings.end(), checks.begin(), checks.end());
            if (asset->position && !asset->exif_datetime) {
                asset->findings.push_back({FindingCode::capture_time_missing, Severity::info,
                                           "no DateTimeOriginal/CreateDate/DateTime; "
                                           "time-slot links are zero"});
            }
            if (config.reverse_geocode && asset->position) {
                asset->address = services->reverse_geocode(*asset->position);
            }
            slots[static_cast<std::size_t>(i)] = std::move(asset);
        }
        ++scanned;
        if (config.on_progress) {
            std::lock_guard lock(progress_mutex);
            config.on_progress({scanned.load(), images.load(), tagged.load(), unreadable.load()});
        }
    }

    // Correlation runs single-threaded over the loaded set, except for the
    // link-count kernel.
    std::vector<ImageAsset> assets;
    for (auto& s : slots) {
        if (s) {
            assets.push_back(std::move(*s));
        }
    }
    slots.clear();

    std::vector<ImageAsset> geotagged;
    std::vector<std::size_t> geotagged_at;
    for (std::size_t i = 0; i < assets.size(); ++i) {
        if (assets[i].position) {
            geotagged.push_back(assets[i]);
            geotagged_at.push_back(i);
        }
    }
    const auto groups = group_same_coordinates(geotagged);
    const auto links = compute_timeslot_links(assets);
    const auto devices = rank_devices(assets);
    std::map<std::string, const DeviceRow*> device_of;
    for (const auto& d : devices) {
        device_of[d.fake_id] = &d;
    }

    std::vector<AssetRow> asset_rows;
    asset_rows.reserve(assets.size());
    for (std::size_t i = 0; i < assets.size(); ++i) {
        const auto& a = assets[i];
        AssetRow row;
        row.id = static_cast<std::int64_t>(i + 1);
        row.name = a.path.filename().string();
        row.path = a.path.string();
        row.content_hash = a.content_hash;
        row.kind = std::string(exif::to_string(a.kind));
        row.fake_id = a.fingerprint.fake_id;
        row.datetime = a.exif_datetime;
        row.gps_datetime = a.gps_datetime;
        row.geotagged = a.position.has_value();
        row.thumb_name = a.thumbnail;
        row.metadata = metadata_json(a);
        row.findings = a.findings;
        asset_rows.push_back(std::move(row));
    }

    std::vector<MarkerRow> marker_rows;
    marker_rows.reserve(geotagged.size());
    for (std::size_t k = 0; k < geotagged.size(); ++k) {
        const auto i = geotagged_at[k];
        const auto& a = assets[i];
        const auto& row = asset_rows[i];
        const auto& dev = *device_of.at(a.fingerprint.fake_id);
        MarkerRow m;
        m.id = row.id;
        m.name = row.name;
        m.path = row.path;
        m.content_hash = row.content_hash;
        m.thumb_name = row.thumb_name;
        m.make = a.fingerprint.make;
        m.model = a.fingerprint.model;
        m.fake_id = a.fingerprint.fake_id;
        m.datetime = a.exif_datetime;
        m.gps_datetime = a.gps_datetime;
        m.lat = geo::round6(a.position->latitude());
        m.lng = geo::round6(a.position->longitude());
        m.multiples = groups[k].multiples;
        m.reference = groups[k].reference;
        m.type = row.kind;
        m.color = dev.color;
        m.ordre = dev.ordre;
        m.nb_fake_id = dev.nb_fake_id;
        m.non_geotag = links[i];
        m.metadata = row.metadata;
        m.address = a.address;
        m.findings = a.findings;
        marker_rows.push_back(std::move(m));
    }

    run.files_scanned = scanned.load();
    run.images_found = assets.size();
    run.geotagged_count = geotagged.size();
    run.unreadable_count = unreadable.load();
    try {
        store->transaction([&] {
            store->persist_devices(run.id, devices);
            store->persist_assets(run.id, asset_rows);
            store->persist_markers(run.id, marker_rows);
            run.end_time = now_utc();
            store->persist_run(run);
        });
    } catch (const StoreError& e) {
        throw ScanAborted(std::string("store write failed, run left unfinished: ") + e.what());
    }
    log("run " + std::to_string(run.id) + " finished: " + std::to_string(run.files_scanned)
        + " files, " + std::to_string(run.images_found) + " images, "
        + std::to_string(run.geotagged_count) + " geotagged");
    return run;
}

}  // namespace geoexif::indexer
