#include <gtest/gtest.h>

#include <regex>

#include "geoexif/report.hpp"
#include "geoexif/service.hpp"
#include "support.hpp"

using namespace geoexif;

namespace {

class ReportSession : public ::testing::Test {
protected:
    static void SetUpTestSuite()
    {
        dir_ = new testkit::TempDir;
        corpus_ = new testkit::ScannedCorpus(testkit::scan_preset("session", dir_->path()));
        store_ = new Store(Store::default_path(corpus_->workspace), Store::Mode::read_only);
    }
    static void TearDownTestSuite()
    {
        delete store_;
        delete corpus_;
        delete dir_;
    }
    static report::ReportDocument build(const FilterSpec& filter, int slot = 1)
    {
        return report::build_report(*store_, corpus_->run.id, filter, slot, corpus_->workspace);
    }

    static testkit::TempDir* dir_;
    static testkit::ScannedCorpus* corpus_;
    static Store* store_;
};
testkit::TempDir* ReportSession::dir_ = nullptr;
testkit::ScannedCorpus* ReportSession::corpus_ = nullptr;
Store* ReportSession::store_ = nullptr;

}  // namespace

TEST_F(ReportSession, EntriesMatchFeedOrder)
{
    const auto doc = build({});
    const auto feed = store_->query_markers(corpus_->run.id, {});
    ASSERT_EQ(doc.entries.size(), feed.size());
    for (std::size_t i = 0; i < feed.size(); ++i) {
        EXPECT_EQ(doc.entries[i].marker.id, feed[i].id);
    }
}

TEST_F(ReportSession, TimelinePartitionsEntries)
{
    const auto doc = build({});
    std::vector<std::size_t> seen;
    std::string prev_day;
    for (const auto& day : doc.timeline) {
        if (day.day != "undated") {
            EXPECT_LT(prev_day, day.day);
            prev_day = day.day;
        }
        for (std::size_t k = 0; k < day.entries.size(); ++k) {
            const auto& m = doc.entries[day.entries[k]].marker;
            if (day.day != "undated") {
                ASSERT_TRUE(m.datetime);
                EXPECT_EQ(format_day(*m.datetime), day.day);
                if (k > 0) {
                    EXPECT_LE(*doc.entries[day.entries[k - 1]].marker.datetime, *m.datetime);
                }
            }
            seen.push_back(day.entries[k]);
        }
    }
    std::sort(seen.begin(), seen.end());
    std::vector<std::size_t> all(doc.entries.size());
    std::iota(all.begin(), all.end(), 0);
    EXPECT_EQ(seen, all);
}

TEST_F(ReportSession, DeviceSummaryCountsEntries)
{
    const auto doc = build({});
    std::size_t total = 0;
    int prev_ordre = 0;
    for (const auto& d : doc.device_summary) {
        EXPECT_GT(d.ordre, prev_ordre);
        prev_ordre = d.ordre;
        total += d.entries;
    }
    EXPECT_EQ(total, doc.entries.size());
    ASSERT_FALSE(doc.device_summary.empty());
    EXPECT_EQ(doc.device_summary[0].fake_id, "SONYDSC-HX100V");
    EXPECT_EQ(doc.device_summary[0].nb_fake_id, 29u);
    EXPECT_EQ(doc.device_summary[0].entries, 4u);
}

TEST_F(ReportSession, DeviceFilterNarrowsToNikon)
{
    FilterSpec f;
    f.devices = std::set<std::string>{"NIKON CORPORATIONNIKON D300"};
    const auto doc = build(f);
    ASSERT_EQ(doc.entries.size(), 2u);
    for (const auto& e : doc.entries) {
        EXPECT_EQ(e.marker.fake_id, "NIKON CORPORATIONNIKON D300");
    }
    ASSERT_EQ(doc.device_summary.size(), 1u);
    EXPECT_NE(doc.filter_echo.find("NIKON D300"), std::string::npos) << doc.filter_echo;
}

TEST_F(ReportSession, LinkedImagesFollowSlot)
{
    FilterSpec f;
    f.zone = geo::ZoneFilter({43.203640, 5.822985}, 0.001);
    const auto one = build(f, 1);
    ASSERT_EQ(one.entries.size(), 1u);
    EXPECT_EQ(one.entries[0].marker.name, "DSC04487.JPG");
    EXPECT_EQ(one.entries[0].linked.size(), 11u);
    const auto two = build(f, 2);
    EXPECT_EQ(two.entries[0].linked.size(), 15u);
    for (const auto& l : two.entries[0].linked) {
        EXPECT_FALSE(l.asset.geotagged);
        EXPECT_EQ(l.asset.fake_id, "SONYDSC-HX100V");
    }
    EXPECT_THROW(build(f, 6), std::invalid_argument);
}

TEST_F(ReportSession, HtmlIsSelfContained)
{
    FilterSpec f;
    f.zone = geo::ZoneFilter({43.203640, 5.822985}, 0.001);
    const auto html = report::render_html(build(f, 2));
    EXPECT_TRUE(html.starts_with("<!DOCTYPE html>"));
    EXPECT_NE(html.find("DSC04487.JPG"), std::string::npos);
    EXPECT_NE(html.find("data:image/jpeg;base64,"), std::string::npos);
    static const std::regex external(R"((src|href)="(https?:)?//)");
    EXPECT_FALSE(std::regex_search(html, external));
    EXPECT_EQ(html.find("<script"), std::string::npos);
    EXPECT_EQ(html.find("<link"), std::string::npos);
    const std::regex img(R"(<img [^>]*src="([^"]*)\")");
    for (auto it = std::sregex_iterator(html.begin(), html.end(), img); it != std::sregex_iterator();
         ++it) {
        EXPECT_TRUE((*it)[1].str().starts_with("data:")) << (*it)[1].str().substr(0, 40);
    }
    EXPECT_NE(html.find(corpus_->manifest["files"][0]["path"].get<std::string>().substr(0, 4)),
              std::string::npos);
}

TEST_F(ReportSession, NoMatchesBanner)
{
    FilterSpec f;
    f.devices = std::set<std::string>{"nobody"};
    const auto doc = build(f);
    EXPECT_TRUE(doc.entries.empty());
    EXPECT_NE(report::render_html(doc).find("No matches"), std::string::npos);
    const auto j = nlohmann::json::parse(report::render_json(doc));
    EXPECT_TRUE(j["no_matches"].get<bool>());
    EXPECT_TRUE(j["entries"].empty());
}

TEST_F(ReportSession, JsonCarriesProvenance)
{
    FilterSpec f;
    f.zone = geo::ZoneFilter({43.203640, 5.822985}, 0.001);
    const auto j = nlohmann::json::parse(report::render_json(build(f, 2)));
    EXPECT_FALSE(j["no_matches"].get<bool>());
    EXPECT_EQ(j["slot"], 2);
    ASSERT_EQ(j["entries"].size(), 1u);
    const auto& e = j["entries"][0];
    EXPECT_EQ(e["name"], "DSC04487.JPG");
    EXPECT_EQ(e["lat"], "43.203640");
    EXPECT_EQ(e["lng"], "5.822985");
    EXPECT_EQ(e["datetime"], "2013-08-11 16:03:41");
    EXPECT_EQ(e["gps_datetime"], "2013-08-11 14:03:41");
    EXPECT_EQ(e["sha256"].get<std::string>().size(), 64u);
    EXPECT_EQ(e["linked"].size(), 15u);
    EXPECT_TRUE(e["thumbnail"].get<std::string>().starts_with("data:image/jpeg;base64,"));
    EXPECT_EQ(j["timeline"][0]["day"], "2013-08-11");
}

TEST_F(ReportSession, ServiceReportMatchesBuilder)
{
    const service::Api api(corpus_->workspace);
    const auto r = api.handle("/report", {{"device", "NIKON CORPORATIONNIKON D300"}, {"format", "json"}});
    ASSERT_EQ(r.status, 200);
    const auto j = nlohmann::json::parse(r.body);
    EXPECT_EQ(j["entries"].size(), 2u);
    const auto html = api.handle("/report", {});
    EXPECT_EQ(html.content_type, "text/html; charset=utf-8");
    const auto feed = nlohmann::json::parse(api.handle("/markers.json", {}).body);
    EXPECT_EQ(nlohmann::json::parse(api.handle("/report", {{"format", "json"}}).body)["entries"].size(),
              feed.size());
}
