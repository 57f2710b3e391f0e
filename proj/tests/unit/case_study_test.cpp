#include <gtest/gtest.h>

#include "geoexif/report.hpp"
#include "geoexif/service.hpp"
#include "support.hpp"

using namespace geoexif;

namespace {

// A seized phone and a second camera. The phone has GPS fixes near the scene
// on the day, and one non-geotagged shot 40 minutes after the last fix.
nlohmann::json staged_corpus()
{
    const auto phone = [](const std::string& datetime, std::optional<std::pair<double, double>> at) {
        nlohmann::json e = {{"make", "Apple"}, {"model", "iPhone 5"}, {"serial_number", "C39KX"},
                            {"datetime", datetime}};
        if (at) {
            e["lat"] = at->first;
            e["lng"] = at->second;
            e["gps_date"] = datetime.substr(0, 10);
            e["gps_time"] = datetime.substr(11);
            e["processing_method"] = "GPS";
            e["dop"] = 1.5;
        }
        return e;
    };
    const auto camera = [](const std::string& datetime) {
        return nlohmann::json{{"make", "Canon"}, {"model", "Canon EOS 600D"}, {"datetime", datetime}};
    };
    return {{"files",
             {{{"name", "phone/DCIM/IMG_0101.JPG"},
               {"exif", phone("2013:08:11 13:10:00", std::pair{43.296482, 5.369780})}},
              {{"name", "phone/DCIM/IMG_0102.JPG"},
               {"exif", phone("2013:08:11 13:55:00", std::pair{43.295100, 5.374100})}},
              {{"name", "phone/DCIM/IMG_0103.JPG"}, {"exif", phone("2013:08:11 14:35:00", std::nullopt)}},
              {{"name", "phone/DCIM/IMG_0104.JPG"}, {"exif", phone("2013:08:11 19:30:00", std::nullopt)}},
              {{"name", "phone/DCIM/IMG_0200.JPG"},
               {"exif", phone("2013:08:14 10:00:00", std::pair{48.856600, 2.352200})}},
              {{"name", "phone/DCIM/IMG_0105.JPG"},
               {"exif", phone("2013:08:10 13:50:00", std::pair{43.296000, 5.370000})}},
              {{"name", "camera/IMG_5001.JPG"}, {"exif", camera("2013:08:11 14:30:00")}},
              {{"name", "camera/IMG_5002.JPG"},
               {"exif", {{"make", "Canon"}, {"model", "Canon EOS 600D"},
                         {"datetime", "2013:08:11 14:00:00"}, {"lat", 43.2990}, {"lng", 5.3800}}}},
              {{"name", "notes/statement.txt"}, {"format", "text"}, {"text", "witness statement\n"}}}}};
}

}  // namespace

TEST(CaseStudy, ZoneAndTimeFilterThenLinkedImageInReport)
{
    testkit::TempDir dir;
    const auto c = testkit::scan_corpus(fixtures::parse_corpus_spec(staged_corpus()), dir.path());
    ASSERT_TRUE(testkit::manifest_mismatches(c).empty());
    EXPECT_EQ(c.run.images_found, 8u);
    EXPECT_EQ(c.run.geotagged_count, 5u);

    // Investigator: 2 km around the scene, on the day of the events.
    const service::Api api(c.workspace);
    const service::Params filter = {{"lat", "43.2965"},   {"lng", "5.3698"},
                                    {"radius_km", "2"},   {"from", "2013-08-11"},
                                    {"to", "2013-08-11"}};
    const auto feed = nlohmann::json::parse(api.handle("/markers.json", filter).body);
    ASSERT_EQ(feed.size(), 3u);
    std::int64_t last_fix = 0;
    for (const auto& m : feed) {
        EXPECT_NE(m["name"], "IMG_0200.JPG");
        EXPECT_NE(m["name"], "IMG_0105.JPG");
        if (m["name"] == "IMG_0102.JPG") {
            last_fix = m["id"];
            EXPECT_EQ(m["non_geotag_h1"], 1);
            EXPECT_EQ(m["non_geotag_h12"], 2);
        }
    }
    ASSERT_NE(last_fix, 0);

    // Follow the phone's non-geotagged shot taken 40 minutes later.
    const auto linked =
        nlohmann::json::parse(api.handle("/linked/" + std::to_string(last_fix), {{"slot", "1"}}).body);
    ASSERT_EQ(linked.size(), 1u);
    EXPECT_EQ(linked[0]["name"], "IMG_0103.JPG");
    EXPECT_TRUE(linked[0]["probable_only"].get<bool>());
    const auto linked_id = linked[0]["id"].get<std::int64_t>();
    const auto meta = nlohmann::json::parse(api.handle("/meta/" + std::to_string(linked_id), {}).body);
    EXPECT_FALSE(meta["geotagged"].get<bool>());
    EXPECT_EQ(meta["fake_id"], "AppleiPhone 5 | C39KX");

    // The report for the same filter carries the linked image with its hash.
    auto report_params = filter;
    report_params.emplace("slot", "1");
    report_params.emplace("format", "json");
    const auto rep = nlohmann::json::parse(api.handle("/report", report_params).body);
    bool in_report = false;
    for (const auto& e : rep["entries"]) {
        for (const auto& l : e["linked"]) {
            if (l["id"] == linked_id) {
                in_report = true;
                EXPECT_EQ(e["id"], last_fix);
                EXPECT_EQ(l["sha256"], meta["sha256"]);
            }
            // Another device's shot at the same time is never linked to the phone.
            if (e["fake_id"] != "CanonCanon EOS 600D") {
                EXPECT_NE(l["name"], "IMG_5001.JPG");
            }
        }
    }
    EXPECT_TRUE(in_report);

    report_params.erase("format");
    const auto html = api.handle("/report", report_params).body;
    EXPECT_NE(html.find("IMG_0103.JPG"), std::string::npos);
    EXPECT_EQ(html.find("IMG_0104.JPG"), std::string::npos);
}
