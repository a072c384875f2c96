#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "geolink/data_io.hpp"
#include "geolink/error.hpp"
#include "geolink/wkt.hpp"
#include "support/random_geometry.hpp"

namespace geolink {
namespace {

namespace fs = std::filesystem;

const fs::path kData = GEOLINK_TEST_DATA_DIR;

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "geolink_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

TEST(Wkt, ParsesSupportedTypes) {
  auto p = parse_wkt("POLYGON((0 0,10 0,10 10,0 10,0 0))");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_TRUE(p[0].is_polygon());
  auto l = parse_wkt("  linestring z (1 2 3, 4 5 6)");
  ASSERT_EQ(l.size(), 1u);
  EXPECT_EQ(l[0].mbr(), (Mbr{1, 2, 4, 5}));
  auto mp = parse_wkt("MULTIPOLYGON(((0 0,1 0,1 1,0 0)),((5 5,6 5,6 6,5 5)))");
  EXPECT_EQ(mp.size(), 2u);
  auto ml = parse_wkt("MULTILINESTRING((0 0,1 1),EMPTY,(2 2,3 3))");
  EXPECT_EQ(ml.size(), 2u);
}

TEST(Wkt, ClassifiesFailures) {
  auto cause = [](const char* text) {
    try {
      parse_wkt(text);
    } catch (const WktError& e) {
      return e.cause();
    }
    ADD_FAILURE() << "no error for " << text;
    return SkipCause::ParseError;
  };
  EXPECT_EQ(cause("POINT(1 1)"), SkipCause::UnsupportedType);
  EXPECT_EQ(cause("GEOMETRYCOLLECTION EMPTY"), SkipCause::UnsupportedType);
  EXPECT_EQ(cause("POLYGON EMPTY"), SkipCause::EmptyGeometry);
  EXPECT_EQ(cause("POLYGON((0 0,10 0))"), SkipCause::InvalidGeometry);
  EXPECT_EQ(cause("LINESTRING(0 0, 1)"), SkipCause::ParseError);
  EXPECT_EQ(cause("LINESTRING(0 0, 1 1) trailing"), SkipCause::ParseError);
  EXPECT_EQ(cause("CIRCLE(0 0)"), SkipCause::ParseError);
}

TEST(Wkt, RoundTripsCoordinates) {
  const auto g = Geometry::line_string({{0.1, 1e-300}, {123456.789, -2.5}});
  const auto back = parse_wkt(to_wkt(g));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].rings(), g.rings());
}

TEST(ReadDataset, SingleValidPolygon) {
  const auto path = temp_file("one.tsv");
  spit(path, "0\tPOLYGON((0 0,10 0,10 10,0 10,0 0))\n");
  auto d = read_dataset(DatasetDescriptor::tsv(path, 1));
  ASSERT_EQ(d.profiles.size(), 1u);
  EXPECT_TRUE(d.profiles[0].geometry.is_polygon());
  EXPECT_EQ(d.skips.total(), 0u);
}

TEST(ReadDataset, ShortRingIsSkipped) {
  const auto path = temp_file("short.tsv");
  spit(path, "1\tPOLYGON((0 0,10 0))\n");
  auto d = read_dataset(DatasetDescriptor::tsv(path, 1));
  EXPECT_TRUE(d.profiles.empty());
  EXPECT_EQ(d.skips.total(), 1u);
  EXPECT_EQ(d.skips.invalid_geometry, 1u);
}

TEST(ReadDataset, PointIsUnsupported) {
  const auto path = temp_file("point.tsv");
  spit(path, "2\tPOINT(1 1)\n");
  auto d = read_dataset(DatasetDescriptor::tsv(path, 1));
  EXPECT_TRUE(d.profiles.empty());
  EXPECT_EQ(d.skips.unsupported_type, 1u);
}

TEST(ReadDataset, MissingFileIsIoFailure) {
  EXPECT_THROW(read_dataset(DatasetDescriptor::tsv(kData / "does_not_exist.tsv")), IoFailure);
}

TEST(StreamTarget, EmptyFileYieldsNothing) {
  auto s = stream_target(DatasetDescriptor::tsv(kData / "empty.tsv"));
  EXPECT_FALSE(s.next().has_value());
  EXPECT_EQ(s.skips().total(), 0u);
}

TEST(StreamTarget, ThreeValidOneCorrupt) {
  auto desc = DatasetDescriptor::tsv(kData / "three_valid_one_corrupt.tsv", 1);
  desc.uri_column = 0;
  auto s = stream_target(desc);
  std::vector<GeometryProfile> got;
  while (auto p = s.next()) got.push_back(std::move(*p));
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(s.skips().total(), 1u);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i].geometry.id(), i);
  EXPECT_EQ(*got[1].uri, "2");
  EXPECT_EQ(estimate_record_count(desc), 4u);
}

TEST(ReadDataset, CsvWithHeaderQuotesAndCrlf) {
  auto desc = DatasetDescriptor::csv(kData / "mixed.csv", 2);
  desc.has_header = true;
  desc.uri_column = 0;
  auto d = read_dataset(desc);
  // g1, g2 and the two exploded parts of g4.
  ASSERT_EQ(d.profiles.size(), 4u);
  EXPECT_EQ(*d.profiles[0].uri, "g1");
  EXPECT_EQ(d.profiles[0].attributes[1], (std::pair<std::string, std::string>{"name", "outer, big"}));
  EXPECT_EQ(*d.profiles[2].uri, "g4");
  EXPECT_EQ(*d.profiles[3].uri, "g4");
  EXPECT_EQ(d.profiles[3].geometry.id(), 3u);
  EXPECT_EQ(d.skips.unsupported_type, 1u);
  EXPECT_EQ(d.skips.empty_geometry, 1u);
  EXPECT_EQ(d.label(3), "g4");
}

TEST(ReadDataset, GeoJsonFeatureCollection) {
  auto d = read_dataset(DatasetDescriptor::geojson(kData / "fixture.geojson"));
  ASSERT_EQ(d.profiles.size(), 4u);
  EXPECT_EQ(*d.profiles[0].uri, "g1");
  EXPECT_EQ(*d.profiles[1].uri, "7");
  EXPECT_EQ(*d.profiles[2].uri, "lines");
  EXPECT_EQ(*d.profiles[3].uri, "lines");
  EXPECT_EQ(d.skips.unsupported_type, 1u);
  EXPECT_EQ(d.skips.empty_geometry, 1u);
  EXPECT_THROW(read_dataset(DatasetDescriptor::geojson(kData / "not_collection.geojson")), FormatError);
}

TEST(ReadDataset, MemoryBudgetIsEnforced) {
  auto desc = DatasetDescriptor::tsv(kData / "three_valid_one_corrupt.tsv", 1);
  EXPECT_THROW(read_dataset(desc, 10), MemoryBudgetExceeded);
  EXPECT_NO_THROW(read_dataset(desc, 1 << 20));
}

TEST(ReadDataset, StreamAgreesOnCorruptedCorpora) {
  const char* corrupt[] = {"POINT(1 1)", "POLYGON((0 0,1 1))", "LINESTRING(", "", "POLYGON EMPTY",
                           "MULTIPOINT((1 1))", "LINESTRING(nan 1, 2 2)"};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto data = testing::random_dataset(seed, 60);
    std::mt19937_64 rng(seed);
    std::ostringstream text;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (rng() % 5 == 0) text << "bad" << i << '\t' << corrupt[rng() % 7] << '\n';
      text << "r" << i << '\t' << to_wkt(data[i]) << (rng() % 2 ? "\r\n" : "\n");
    }
    const auto path = temp_file("corpus.tsv");
    spit(path, text.str());
    auto desc = DatasetDescriptor::tsv(path, 1);
    desc.uri_column = 0;
    const auto eager = read_dataset(desc);
    const auto again = read_dataset(desc);
    auto s = stream_target(desc);
    std::size_t n = 0;
    while (auto p = s.next()) {
      ASSERT_LT(n, eager.profiles.size());
      EXPECT_EQ(p->geometry.id(), eager.profiles[n].geometry.id());
      EXPECT_EQ(p->geometry.rings(), eager.profiles[n].geometry.rings());
      EXPECT_EQ(p->uri, eager.profiles[n].uri);
      EXPECT_EQ(again.profiles[n].geometry.id(), eager.profiles[n].geometry.id());
      ++n;
    }
    EXPECT_EQ(n, eager.profiles.size());
    EXPECT_EQ(n, data.size());
    EXPECT_EQ(s.skips().total(), eager.skips.total());
  }
}

TEST(WriteLinks, ExactFormat) {
  const auto path = temp_file("links.tsv");
  const std::vector<LinkTriple> links = {{"s0", "contains", "t1"}};
  EXPECT_EQ(write_links(links, path), 1u);
  EXPECT_EQ(slurp(path), "s0\tcontains\tt1\n");
  EXPECT_EQ(read_links(path), links);
}

TEST(WriteLinks, EmptyStream) {
  const auto path = temp_file("none.tsv");
  EXPECT_EQ(write_links({}, path), 0u);
  EXPECT_EQ(slurp(path), "");
}

TEST(WriteLinks, UnwritablePath) {
  EXPECT_THROW(LinkWriter(kData / "no_such_dir" / "x.tsv"), IoFailure);
}

TEST(DataFormat, Names) {
  EXPECT_EQ(parse_data_format("geojson"), DataFormat::GeoJson);
  EXPECT_EQ(data_format_name(DataFormat::CsvWkt), "csv");
  EXPECT_THROW(parse_data_format("shp"), ConfigError);
}

}  // namespace
}  // namespace geolink
