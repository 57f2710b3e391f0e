#include <gtest/gtest.h>

#include "geoexif/fixtures.hpp"
#include "support.hpp"

using namespace geoexif;

TEST(Fixtures, MixedManifestCounts)
{
    testkit::TempDir dir;
    const auto m = fixtures::write_corpus(fixtures::preset("mixed"), dir.path());
    EXPECT_EQ(m["files_scanned"], 25);
    EXPECT_EQ(m["images_found"], 20);
    EXPECT_EQ(m["geotagged_count"], 12);
    EXPECT_EQ(m["non_geotagged_count"], 8);
    EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
    std::size_t on_disk = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir / "evidence")) {
        on_disk += e.is_regular_file();
    }
    EXPECT_EQ(on_disk, 25u);
}

TEST(Fixtures, SessionManifestRows)
{
    testkit::TempDir dir;
    const auto m = fixtures::write_corpus(fixtures::preset("session"), dir.path());
    ASSERT_GE(m["devices"].size(), 1u);
    EXPECT_EQ(m["devices"][0]["fake_id"], "SONYDSC-HX100V");
    EXPECT_EQ(m["devices"][0]["nb_fake_id"], 29);
    EXPECT_EQ(m["devices"][0]["ordre"], 1);
    bool seen_4487 = false, seen_4488 = false;
    for (const auto& mk : m["markers"]) {
        if (mk["path"] == "DCIM/100MSDCF/DSC04487.JPG") {
            seen_4487 = true;
            EXPECT_EQ(mk["lat_e6"], 43203640);
            EXPECT_EQ(mk["lng_e6"], 5822985);
            EXPECT_EQ(mk["datetime"], "2013:08:11 16:03:41");
            EXPECT_EQ(mk["non_geotag"]["h1"], 11);
            EXPECT_EQ(mk["non_geotag"]["h2"], 15);
        }
        if (mk["path"] == "DCIM/100MSDCF/DSC04488.JPG") {
            seen_4488 = true;
            EXPECT_EQ(mk["non_geotag"]["h1"], 11);
            EXPECT_EQ(mk["non_geotag"]["h2"], 13);
            for (const char* h : {"h3", "h4", "h5", "h12", "h24"}) {
                EXPECT_EQ(mk["non_geotag"][h], 25) << h;
            }
        }
    }
    EXPECT_TRUE(seen_4487);
    EXPECT_TRUE(seen_4488);
}

TEST(Fixtures, RandomPresetShape)
{
    testkit::TempDir dir;
    const auto m = fixtures::write_corpus(fixtures::preset("random", 500, 7), dir.path());
    EXPECT_EQ(m["files_scanned"], 500);
    EXPECT_EQ(m["images_found"], 500);
    EXPECT_EQ(m["geotagged_count"], 200);
    EXPECT_GE(m["devices"].size(), 7u);
    for (const auto& mk : m["markers"]) {
        int prev = 0;
        for (const char* h : {"h1", "h2", "h3", "h4", "h5", "h12", "h24"}) {
            EXPECT_GE(mk["non_geotag"][h].get<int>(), prev);
            prev = mk["non_geotag"][h].get<int>();
        }
    }
}

TEST(Fixtures, GroupingBuckets)
{
    testkit::TempDir dir;
    const auto m = fixtures::write_corpus(fixtures::preset("grouping"), dir.path());
    std::multiset<int> sizes;
    for (const auto& b : m["buckets"]) {
        sizes.insert(b["size"].get<int>());
    }
    EXPECT_EQ(sizes, (std::multiset<int>{1, 2, 3, 6}));
    for (const auto& b : m["buckets"]) {
        if (b["size"] == 6) {
            EXPECT_EQ(b["reference"], "tour/a.jpg");
        }
    }
}

TEST(Fixtures, VerificationExpectations)
{
    testkit::TempDir dir;
    const auto m = fixtures::write_corpus(fixtures::preset("verification"), dir.path());
    std::map<std::string, nlohmann::json> files;
    for (const auto& f : m["files"]) {
        files[f["path"]] = f;
    }
    EXPECT_TRUE(files.at("clean.jpg")["findings"].empty());
    EXPECT_EQ(files.at("timestamp_25h.jpg")["findings"], nlohmann::json({"TIMESTAMP_MISMATCH"}));
    EXPECT_EQ(files.at("wlan.jpg")["findings"], nlohmann::json({"NON_GPS_POSITIONING"}));
    EXPECT_EQ(files.at("dop_9_9.jpg")["findings"], nlohmann::json({"LOW_GPS_ACCURACY"}));
    EXPECT_FALSE(files.at("notes.txt")["image"]);
    EXPECT_FALSE(files.at("diagram.png")["image"]);
}

TEST(Fixtures, ExtensionRename)
{
    testkit::TempDir dir;
    auto spec = fixtures::preset("mixed");
    spec.extension = ".dat";
    const auto m = fixtures::write_corpus(spec, dir.path());
    for (const auto& f : m["files"]) {
        EXPECT_EQ(std::filesystem::path(f["path"].get<std::string>()).extension(), ".dat");
    }
    EXPECT_EQ(m["images_found"], 20);
}

TEST(Fixtures, JsonSpec)
{
    const auto doc = nlohmann::json::parse(R"({
        "extension": ".bin",
        "files": [
            {"name": "a.jpg", "exif": {"make": "Canon", "model": "EOS 5D", "serial_number": "123",
                                        "datetime": "2013:08:11 16:03:41", "lat": 1.5, "lng": -2.25,
                                        "byte_order": "MM"}},
            {"name": "b.txt", "format": "text", "text": "hi"}
        ]})");
    const auto spec = fixtures::parse_corpus_spec(doc);
    ASSERT_EQ(spec.files.size(), 2u);
    EXPECT_EQ(spec.extension, ".bin");
    EXPECT_EQ(spec.files[0].exif->byte_order, exif::ByteOrder::big_endian);
    EXPECT_EQ(fixtures::expected_fake_id(spec.files[0].exif), "CanonEOS 5D | 123");
    EXPECT_EQ(spec.files[1].format, fixtures::Format::text);
    testkit::TempDir dir;
    const auto m = fixtures::write_corpus(spec, dir.path());
    EXPECT_EQ(m["files_scanned"], 2);
    EXPECT_EQ(m["geotagged_count"], 1);

    const auto with_preset = fixtures::parse_corpus_spec(nlohmann::json::parse(
        R"({"preset": "random", "count": 30, "seed": 2})"));
    EXPECT_EQ(with_preset.files.size(), 30u);
    EXPECT_THROW(fixtures::parse_corpus_spec(nlohmann::json::parse(
                     R"({"files": [{"name": "x", "format": "gif"}]})")),
                 std::invalid_argument);
}

TEST(Fixtures, UnknownPresetThrows)
{
    EXPECT_THROW(fixtures::preset("nope"), std::invalid_argument);
}

TEST(Fixtures, Deterministic)
{
    testkit::TempDir a, b;
    fixtures::write_corpus(fixtures::preset("random", 60, 3), a.path());
    fixtures::write_corpus(fixtures::preset("random", 60, 3), b.path());
    EXPECT_EQ(testkit::digest_tree(a.path()), testkit::digest_tree(b.path()));
}

TEST(Fixtures, ExpectedFakeId)
{
    EXPECT_EQ(fixtures::expected_fake_id(std::nullopt), "UNKNOWN-DEVICE");
    fixtures::ExifSpec s;
    EXPECT_EQ(fixtures::expected_fake_id(s), "UNKNOWN-DEVICE");
    s.make = " SONY ";
    s.model = "DSC-HX100V";
    EXPECT_EQ(fixtures::expected_fake_id(s), "SONYDSC-HX100V");
}
