#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "geoexif/digest.hpp"
#include "geoexif/fixtures.hpp"
#include "geoexif/indexer.hpp"
#include "geoexif/store.hpp"

namespace geoexif::testkit {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        std::string tmpl = (std::filesystem::temp_directory_path() / "geoexif-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) {
            std::abort();
        }
        path_ = tmpl;
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

// Relative path -> SHA-256 of every regular file under root.
inline std::map<std::string, std::string> digest_tree(const std::filesystem::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            const auto bytes = read_file(e.path());
            out[std::filesystem::relative(e.path(), root).generic_string()] =
                bytes ? sha256_hex(*bytes) : "unreadable";
        }
    }
    return out;
}

inline void write_text(const std::filesystem::path& p, const std::string& text)
{
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

// Generated corpus under <dir>/corpus and its scan into <dir>/ws.
struct ScannedCorpus {
    nlohmann::json manifest;
    std::filesystem::path root;
    std::filesystem::path workspace;
    AnalysisRow run;
};

inline ScannedCorpus scan_corpus(const fixtures::CorpusSpec& spec, const std::filesystem::path& dir,
                                 indexer::ScanConfig config = {})
{
    ScannedCorpus out;
    out.manifest = fixtures::write_corpus(spec, dir / "corpus");
    out.root = dir / "corpus" / "evidence";
    out.workspace = dir / "ws";
    config.root = out.root;
    config.workspace = out.workspace;
    out.run = indexer::scan_tree(config);
    return out;
}

inline ScannedCorpus scan_preset(const std::string& name, const std::filesystem::path& dir,
                                 std::size_t count = 500, std::uint64_t seed = 1)
{
    return scan_corpus(fixtures::preset(name, count, seed), dir);
}

// Manifest paths are relative to the evidence root.
inline std::string relative_path(const std::string& path, const std::filesystem::path& root)
{
    return std::filesystem::path(path).lexically_relative(root).generic_string();
}

inline std::vector<std::string> finding_codes(const std::vector<VerificationFinding>& findings)
{
    std::vector<std::string> out;
    for (const auto& f : findings) {
        out.emplace_back(to_string(f.code));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Every difference between the scanned store and the manifest, empty when
// they agree on counts, devices, markers, slot counts, grouping and findings.
inline std::vector<std::string> manifest_mismatches(const ScannedCorpus& c)
{
    std::vector<std::string> out;
    const auto& m = c.manifest;
    const auto note = [&](const std::string& what, const auto& got, const auto& want) {
        if (!(got == want)) {
            out.push_back(what + ": got " + nlohmann::json(got).dump() + ", want "
                          + nlohmann::json(want).dump());
        }
    };
    note("files_scanned", c.run.files_scanned, m["files_scanned"].get<std::uint64_t>());
    note("images_found", c.run.images_found, m["images_found"].get<std::uint64_t>());
    note("geotagged_count", c.run.geotagged_count, m["geotagged_count"].get<std::uint64_t>());

    const Store store(Store::default_path(c.workspace), Store::Mode::read_only);
    const auto devices = store.devices(c.run.id);
    note("device count", devices.size(), m["devices"].size());
    for (std::size_t i = 0; i < std::min(devices.size(), m["devices"].size()); ++i) {
        const auto& want = m["devices"][i];
        note("device " + std::to_string(i) + " fake_id", devices[i].fake_id,
             want["fake_id"].get<std::string>());
        note("device " + std::to_string(i) + " nb_fake_id", devices[i].nb_fake_id,
             want["nb_fake_id"].get<std::uint32_t>());
        note("device " + std::to_string(i) + " ordre", devices[i].ordre, want["ordre"].get<int>());
    }

    std::map<std::string, MarkerRow> markers;
    for (auto& mk : store.markers(c.run.id)) {
        markers[relative_path(mk.path, c.root)] = mk;
    }
    note("marker count", markers.size(), m["markers"].size());
    for (const auto& want : m["markers"]) {
        const auto path = want["path"].get<std::string>();
        const auto it = markers.find(path);
        if (it == markers.end()) {
            out.push_back("missing marker " + path);
            continue;
        }
        const auto& got = it->second;
        note(path + " fake_id", got.fake_id, want["fake_id"].get<std::string>());
        note(path + " lat_e6", std::llround(got.lat * 1e6), want["lat_e6"].get<std::int64_t>());
        note(path + " lng_e6", std::llround(got.lng * 1e6), want["lng_e6"].get<std::int64_t>());
        note(path + " multiples", got.multiples, want["multiples"].get<std::uint32_t>());
        note(path + " reference", got.reference, want["reference"].get<bool>());
        for (const int h : kernels::slot_hours) {
            const auto key = "h" + std::to_string(h);
            note(path + " " + key, got.non_geotag_h(h), want["non_geotag"][key].get<std::uint32_t>());
        }
    }

    std::map<std::string, AssetRow> assets;
    for (auto& a : store.assets(c.run.id)) {
        assets[relative_path(a.path, c.root)] = a;
    }
    for (const auto& want : m["files"]) {
        const auto path = want["path"].get<std::string>();
        const auto it = assets.find(path);
        if (!want["image"].get<bool>()) {
            if (it != assets.end()) {
                out.push_back("non-image stored as asset: " + path);
            }
            continue;
        }
        if (it == assets.end()) {
            out.push_back("missing asset " + path);
            continue;
        }
        note(path + " geotagged", it->second.geotagged, want["geotagged"].get<bool>());
        note(path + " asset fake_id", it->second.fake_id, want["fake_id"].get<std::string>());
        note(path + " findings", finding_codes(it->second.findings),
             want["findings"].get<std::vector<std::string>>());
    }
    return out;
}

}  // namespace geoexif::testkit
