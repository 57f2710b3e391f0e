#include <gtest/gtest.h>

#include "geoexif/timestamp.hpp"

using namespace geoexif;

TEST(Timestamp, ParsesCameraDatetime)
{
    const auto t = parse_exif_datetime("2013:08:11 16:03:41");
    ASSERT_TRUE(t);
    EXPECT_EQ(*t, make_timestamp(2013, 8, 11, 16, 3, 41));
    EXPECT_EQ(format_feed(*t), "11.08.2013 16:03:41");
    EXPECT_EQ(format_iso(*t), "2013-08-11 16:03:41");
    EXPECT_EQ(format_exif(*t), "2013:08:11 16:03:41");
    EXPECT_EQ(format_day(*t), "2013-08-11");
}

TEST(Timestamp, ToleratesTrailingNulAndPadding)
{
    using namespace std::string_view_literals;
    EXPECT_TRUE(parse_exif_datetime("2013:08:11 16:03:41\0"sv));
    EXPECT_TRUE(parse_exif_datetime(" 2013:08:11 16:03:41 "));
}

TEST(Timestamp, RejectsZeroedAndMalformed)
{
    EXPECT_FALSE(parse_exif_datetime("0000:00:00 00:00:00"));
    EXPECT_FALSE(parse_exif_datetime("    :  :     :  :  "));
    EXPECT_FALSE(parse_exif_datetime(""));
    EXPECT_FALSE(parse_exif_datetime("2013:13:11 16:03:41"));
    EXPECT_FALSE(parse_exif_datetime("2013:02:30 16:03:41"));
    EXPECT_FALSE(parse_exif_datetime("2013:08:11 25:03:41"));
    EXPECT_FALSE(parse_exif_datetime("2013-08-11 16:03:41x"));
}

TEST(Timestamp, GpsDateStamp)
{
    const auto d = parse_exif_date("2013:08:11");
    ASSERT_TRUE(d);
    EXPECT_EQ(Timestamp{*d}, make_timestamp(2013, 8, 11));
    EXPECT_FALSE(parse_exif_date("2013:08"));
}

TEST(Timestamp, IsoFilterValues)
{
    EXPECT_EQ(parse_iso_datetime("2013-08-11"), make_timestamp(2013, 8, 11));
    EXPECT_EQ(parse_iso_datetime("2013-08-11", true), make_timestamp(2013, 8, 11, 23, 59, 59));
    EXPECT_EQ(parse_iso_datetime("2013-08-11 16:03:41"), make_timestamp(2013, 8, 11, 16, 3, 41));
    EXPECT_EQ(parse_iso_datetime("2013-08-11T16:03:41", true),
              make_timestamp(2013, 8, 11, 16, 3, 41));
    EXPECT_FALSE(parse_iso_datetime("11.08.2013"));
}

TEST(Timestamp, SecondsRoundTrip)
{
    const auto t = make_timestamp(1999, 12, 31, 23, 59, 59);
    EXPECT_EQ(from_seconds(to_seconds(t)), t);
    EXPECT_EQ(to_seconds(make_timestamp(1970, 1, 1)), 0);
}
