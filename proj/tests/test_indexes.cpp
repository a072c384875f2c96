#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "geolink/error.hpp"
#include "geolink/grid_index.hpp"
#include "geolink/sweep_join.hpp"
#include "geolink/tree_index.hpp"
#include "support/fixtures.hpp"
#include "support/random_geometry.hpp"

namespace geolink {
namespace {

using Pairs = std::vector<std::pair<GeometryId, GeometryId>>;
using testing::fig1_source;
using testing::fig1_target;
using testing::mbr_pairs;
using testing::random_dataset;

Pairs collect(const std::function<void(const PairCallback&)>& run) {
  Pairs out;
  run([&](GeometryId s, GeometryId t) { out.emplace_back(s, t); });
  return out;
}

/// Sorted pairs; fails the test on duplicates.
Pairs sorted_unique(Pairs p) {
  std::sort(p.begin(), p.end());
  EXPECT_EQ(std::adjacent_find(p.begin(), p.end()), p.end()) << "duplicate candidate pair";
  return p;
}

Pairs probe_all(const SourceIndex& idx, const Dataset& target) {
  Pairs out;
  std::vector<GeometryId> c;
  for (std::size_t j = 0; j < target.size(); ++j) {
    idx.candidates(target[j].mbr(), c);
    EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
    for (GeometryId s : c) out.emplace_back(s, static_cast<GeometryId>(j));
  }
  return out;
}

// ------------------------------------------------------------ grid_index

TEST(Granularity, MeansOfDimensions) {
  const auto s = fig1_source();
  const auto t = fig1_target();
  const auto g = dynamic_granularity(s);
  EXPECT_DOUBLE_EQ(g.tile_width, 6.0);
  EXPECT_DOUBLE_EQ(g.tile_height, 6.0);
  const auto both = dynamic_granularity(s, t);
  EXPECT_DOUBLE_EQ(both.tile_width, 4.25);
  EXPECT_DOUBLE_EQ(both.tile_height, 5.0);
  const Dataset one = {testing::fig1_l4(0)};
  const auto g1 = dynamic_granularity(one);
  EXPECT_DOUBLE_EQ(g1.tile_height, 8.0);
  EXPECT_DOUBLE_EQ(g1.tile_width, 8.0);  // zero width borrows the height
  EXPECT_THROW(dynamic_granularity(Dataset{}), EmptyDataset);
}

TEST(TilesFor, FloorArithmetic) {
  const GridSpec g{6, 6};
  EXPECT_EQ(tiles_for(testing::fig1_p1().mbr(), g), (TileSpan{0, 1, 0, 1}));
  EXPECT_EQ(tiles_for(testing::fig1_p1().mbr(), g).size(), 4u);
  EXPECT_EQ(tiles_for(testing::fig1_p2().mbr(), g), (TileSpan{0, 0, 0, 0}));
  EXPECT_EQ(tiles_for(testing::fig1_l3().mbr(), g), (TileSpan{1, 2, 0, 0}));
  EXPECT_EQ(tiles_for(Mbr{-0.5, -6, -0.1, -6}, g), (TileSpan{-1, -1, -1, -1}));
}

TEST(Equigrid, SourceOnlyCells) {
  const auto s = fig1_source();
  const auto grid = Equigrid::build_source_only(s, {6, 6});
  ASSERT_EQ(grid.cells().size(), 4u);
  EXPECT_EQ(grid.cell({0, 0})->source, (std::vector<GeometryId>{0, 1}));
  EXPECT_EQ(grid.cell({1, 0})->source, (std::vector<GeometryId>{0}));
  EXPECT_EQ(grid.cell({0, 1})->source, (std::vector<GeometryId>{0}));
  EXPECT_EQ(grid.cell({1, 1})->source, (std::vector<GeometryId>{0}));
  const auto coarse = Equigrid::build_source_only(s, {100, 100});
  ASSERT_EQ(coarse.cells().size(), 1u);
  EXPECT_EQ(coarse.cell({0, 0})->source, (std::vector<GeometryId>{0, 1}));
  EXPECT_THROW(Equigrid::build_source_only(Dataset{}, {1, 1}), EmptyDataset);
}

TEST(Equigrid, BothDatasetsCoLocateTargets) {
  const auto s = fig1_source();
  const auto t = fig1_target();
  const GridSpec g{6, 6};
  const auto grid = Equigrid::build_both(s, t, g);
  for (std::size_t j = 0; j < t.size(); ++j) {
    tiles_for(t[j].mbr(), g).for_each([&](TileKey k) {
      const auto* c = grid.cell(k);
      ASSERT_NE(c, nullptr);
      EXPECT_NE(std::find(c->target.begin(), c->target.end(), j), c->target.end());
    });
  }
}

TEST(Equigrid, CandidatesFor) {
  const auto s = fig1_source();
  const auto grid = Equigrid::build_source_only(s, {6, 6});
  EXPECT_EQ(grid.candidates_for(testing::fig1_l3()), (std::vector<GeometryId>{0}));
  EXPECT_TRUE(grid.candidates_for(Geometry::line_string({{50, 50}, {60, 60}})).empty());
  EXPECT_EQ(grid.candidates_for(testing::fig1_p1()), (std::vector<GeometryId>{0, 1}));
}

TEST(ReferencePoint, Owner) {
  const GridSpec g{6, 6};
  const auto p1 = testing::fig1_p1().mbr();
  const auto p2 = testing::fig1_p2().mbr();
  EXPECT_EQ(reference_point_owner(p1, p2, g), (TileKey{0, 0}));
  EXPECT_EQ(reference_point_owner(p1, p1, g), (TileKey{0, 1}));
  // Two MBRs that share four tiles are owned by exactly one of them.
  const Mbr a{5, 5, 7, 7};
  const Mbr b{4, 4, 8, 8};
  const auto shared = span_overlap(tiles_for(a, g), tiles_for(b, g));
  EXPECT_EQ(shared, 4u);
  int owners = 0;
  tiles_for(a, g).for_each([&](TileKey k) { owners += reference_point_owner(a, b, g) == k; });
  EXPECT_EQ(owners, 1);
}

TEST(ReferencePoint, Symmetric) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 5000; ++i) {
    Mbr a{u(rng), u(rng), 0, 0};
    a.x_max = a.x_min + std::abs(u(rng));
    a.y_max = a.y_min + std::abs(u(rng));
    Mbr b{u(rng), u(rng), 0, 0};
    b.x_max = b.x_min + std::abs(u(rng));
    b.y_max = b.y_min + std::abs(u(rng));
    if (!mbr_intersects(a, b)) continue;
    const GridSpec g{1 + std::abs(u(rng)) / 5, 1 + std::abs(u(rng)) / 5};
    EXPECT_EQ(reference_point_owner(a, b, g), reference_point_owner(b, a, g));
  }
}

TEST(Radon, FixtureMatchesNestedLoop) {
  const auto s = fig1_source();
  const auto t = fig1_target();
  const auto expected = mbr_pairs(s, t);
  // Only P1-L3 meet; L4 at x = 12 clears P1's MBR.
  EXPECT_EQ(expected, (Pairs{{0, 0}}));
  const auto g = dynamic_granularity(s, t);
  EXPECT_EQ(sorted_unique(collect([&](auto& e) { radon_join(s, t, g, e); })), expected);
  EXPECT_EQ(sorted_unique(collect([&](auto& e) { radon_join(s, t, GridSpec{1, 1}, e); })), expected);
}

TEST(Radon, DisjointDatasets) {
  const Dataset s = {testing::GeometryGen::box(0, 0, 1, 1)};
  const Dataset t = {testing::GeometryGen::box(5, 5, 6, 6)};
  EXPECT_TRUE(collect([&](auto& e) { radon_join(s, t, dynamic_granularity(s, t), e); }).empty());
}

TEST(Radon, CompleteOnRandomInputs) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto s = random_dataset(seed, 50 + seed * 30);
    const auto t = random_dataset(seed + 1000, 40 + seed * 35);
    const auto expected = mbr_pairs(s, t);
    for (const GridSpec g : {dynamic_granularity(s, t), GridSpec{1, 1}, GridSpec{37, 3}, GridSpec{1000, 1000}}) {
      EXPECT_EQ(sorted_unique(collect([&](auto& e) { radon_join(s, t, g, e); })), expected);
      const auto grid = Equigrid::build_source_only(s, g);
      EXPECT_EQ(sorted_unique(probe_all(grid, t)), expected);
    }
  }
}

TEST(CompactGrid, MatchesMbrPairs) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto s = random_dataset(seed, 50 + seed * 30);
    const auto t = random_dataset(seed + 1000, 40 + seed * 35);
    const auto expected = mbr_pairs(s, t);
    for (const GridSpec g : {dynamic_granularity(s), GridSpec{1, 1}, GridSpec{37, 3}, GridSpec{1000, 1000}}) {
      EXPECT_EQ(sorted_unique(probe_all(CompactGrid(s, g), t)), expected);
    }
  }
}

TEST(CompactGrid, CellsMatchEquigrid) {
  const auto s = random_dataset(77, 400);
  const GridSpec g = dynamic_granularity(s);
  const CompactGrid compact(s, g);
  const auto grid = Equigrid::build_source_only(s, g);
  EXPECT_EQ(compact.cell_count(), grid.cells().size());
  EXPECT_LT(compact.memory_bytes(), grid.memory_bytes());
}

TEST(CompactGrid, TinyTilesAreWidened) {
  // Horizontal lines: one row each however thin the rows are.
  const Dataset s = {Geometry::line_string({{0, 0}, {1, 0}}), Geometry::line_string({{0, 100}, {5, 100}})};
  const Dataset t = {testing::GeometryGen::box(0.5, -1, 0.7, 1), testing::GeometryGen::box(4, 99, 6, 101),
                     testing::GeometryGen::box(2, 50, 3, 51)};
  const CompactGrid grid(s, {1000, 1e-9});
  EXPECT_EQ(grid.spec().tile_width, 1000);
  EXPECT_GT(grid.spec().tile_height, 1e-9);
  EXPECT_EQ(sorted_unique(probe_all(grid, t)), mbr_pairs(s, t));
}

TEST(CompactGrid, Empty) { EXPECT_THROW(CompactGrid(Dataset{}, {1, 1}), EmptyDataset); }

// ------------------------------------------------------------ sweep_join

TEST(PlaneSweep, Fixture) {
  const auto s = fig1_source();
  const auto t = fig1_target();
  for (auto st : {SweepStructure::List, SweepStructure::Striped}) {
    EXPECT_EQ(sorted_unique(collect([&](auto& e) { plane_sweep(s, t, st, e); })), mbr_pairs(s, t));
  }
}

TEST(PlaneSweep, XDisjoint) {
  const Dataset s = {testing::GeometryGen::box(0, 0, 1, 1)};
  const Dataset t = {testing::GeometryGen::box(5, 0, 6, 1)};
  EXPECT_TRUE(collect([&](auto& e) { plane_sweep(s, t, SweepStructure::List, e); }).empty());
}

TEST(PlaneSweep, VariantsAgreeAndPeakIsBounded) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto s = random_dataset(seed, 200);
    const auto t = random_dataset(seed + 77, 150);
    const auto expected = mbr_pairs(s, t);
    SweepStats list_stats;
    EXPECT_EQ(sorted_unique(collect([&](auto& e) { plane_sweep(s, t, SweepStructure::List, e, &list_stats); })),
              expected);
    SweepStats striped_stats;
    EXPECT_EQ(
        sorted_unique(collect([&](auto& e) { plane_sweep(s, t, SweepStructure::Striped, e, &striped_stats); })),
        expected);
    EXPECT_GE(striped_stats.stripes, 1u);
    EXPECT_LE(striped_stats.stripes, 4 * s.size());
    // Maximum number of MBRs stabbed by one vertical line, probed at every x_min.
    std::size_t stab = 0;
    for (const auto* d : {&s, &t}) {
      for (const auto& g : *d) {
        std::size_t c = 0;
        for (const auto* e : {&s, &t}) {
          for (const auto& h : *e) c += h.mbr().x_min <= g.mbr().x_min && g.mbr().x_min <= h.mbr().x_max;
        }
        stab = std::max(stab, c);
      }
    }
    EXPECT_LE(list_stats.peak_active, stab);
  }
}

TEST(Pbsm, MatchesPlaneSweep) {
  const auto s = fig1_source();
  const auto t = fig1_target();
  EXPECT_EQ(sorted_unique(collect([&](auto& e) { pbsm(s, t, 1, 1, e); })), mbr_pairs(s, t));
  EXPECT_EQ(sorted_unique(collect([&](auto& e) { pbsm(s, t, 4, 4, e); })), mbr_pairs(s, t));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto s2 = random_dataset(seed, 150);
    s2.push_back(testing::GeometryGen::translated(testing::GeometryGen::box(0, 0, 108, 108), 0, 0,
                                                  static_cast<GeometryId>(s2.size())));
    const auto t2 = random_dataset(seed + 9, 120);
    const auto expected = mbr_pairs(s2, t2);
    for (int n : {1, 3, 8, 64}) {
      EXPECT_EQ(sorted_unique(collect([&](auto& e) { pbsm(s2, t2, n, n == 3 ? 5 : n, e); })), expected);
    }
  }
  EXPECT_THROW(pbsm(s, t, 0, 1, [](GeometryId, GeometryId) {}), ConfigError);
}

TEST(StripeSweep, BuildAndProbe) {
  const auto s = fig1_source();
  StripeIndex map(s, StripeStorage::Map);
  EXPECT_DOUBLE_EQ(map.stripe_width(), 6.0);
  EXPECT_EQ(map.stripe_contents(0), (std::vector<GeometryId>{0, 1}));
  EXPECT_EQ(map.stripe_contents(1), (std::vector<GeometryId>{0}));
  EXPECT_EQ(map.stripe_count(), 2u);
  StripeIndex str(s, StripeStorage::Str);
  EXPECT_EQ(str.stripe_contents(0), (std::vector<GeometryId>{0, 1}));
  std::vector<GeometryId> c;
  for (const SourceIndex* idx : {static_cast<const SourceIndex*>(&map), static_cast<const SourceIndex*>(&str)}) {
    idx->candidates(testing::fig1_l3().mbr(), c);
    EXPECT_EQ(c, (std::vector<GeometryId>{0}));
    // L4 sits at x = 12, right of P1's MBR: same stripe, no MBR contact.
    idx->candidates(testing::fig1_l4().mbr(), c);
    EXPECT_TRUE(c.empty());
    idx->candidates(Mbr{-20, 0, -15, 5}, c);
    EXPECT_TRUE(c.empty());
  }
  const Dataset single = {testing::GeometryGen::box(13, 0, 20, 1)};
  StripeIndex one(single, StripeStorage::Map);
  EXPECT_EQ(one.stripe_count(), 2u);  // width 7: stripes 1 and 2
}

TEST(StripeSweep, VariantsMatchGrid) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = random_dataset(seed, 250);
    const auto t = random_dataset(seed + 3, 250);
    const auto expected = mbr_pairs(s, t);
    EXPECT_EQ(sorted_unique(probe_all(StripeIndex(s, StripeStorage::Map), t)), expected);
    EXPECT_EQ(sorted_unique(probe_all(StripeIndex(s, StripeStorage::Str, 4), t)), expected);
  }
}

// ------------------------------------------------------------ tree_index

std::vector<Geometry> boxes(std::initializer_list<std::array<double, 4>> bs) {
  std::vector<Geometry> out;
  for (auto b : bs) out.push_back(testing::GeometryGen::box(b[0], b[1], b[2], b[3]));
  return out;
}

TEST(RTree, BelowCapacityIsOneLeaf) {
  const auto s = boxes({{0, 0, 1, 1}, {2, 2, 3, 3}, {4, 4, 5, 5}});
  RTree t(s, 4);
  EXPECT_TRUE(t.root_is_leaf());
  EXPECT_EQ(t.node_count(), 1u);
  EXPECT_TRUE(t.audit());
}

TEST(RTree, OverflowSplitsRoot) {
  const auto s = boxes({{0, 0, 1, 1}, {2, 2, 3, 3}, {4, 4, 5, 5}, {10, 10, 13, 13}, {20, 0, 22, 2}});
  RTree t(s, 4);
  EXPECT_FALSE(t.root_is_leaf());
  const auto kids = t.root_child_mbrs();
  ASSERT_EQ(kids.size(), 2u);
  std::string why;
  EXPECT_TRUE(t.audit(&why)) << why;
  // The two largest boxes seed different leaves.
  bool a_in_0 = kids[0].contains(s[3].mbr());
  bool b_in_0 = kids[0].contains(s[4].mbr());
  EXPECT_NE(a_in_0, b_in_0);
}

TEST(RTree, AuditHoldsAfterEveryInsertion) {
  const auto s = random_dataset(42, 400);
  for (std::size_t m : {4u, 5u, 16u}) {
    RTree t(m);
    for (std::size_t i = 0; i < s.size(); ++i) {
      t.insert(s[i].mbr(), static_cast<GeometryId>(i));
      std::string why;
      ASSERT_TRUE(t.audit(&why)) << "M=" << m << " after " << i << ": " << why;
    }
    EXPECT_EQ(t.size(), s.size());
  }
}

TEST(Quadtree, OneSplitDepthTwo) {
  const auto s = boxes({{0, 0, 100, 100}});
  const auto tiny = boxes({{80, 80, 80.5, 80.5}, {80.1, 80.1, 80.6, 80.6}, {80.2, 80.2, 80.7, 80.7}});
  Quadtree q(tiny, 2, 16, Mbr{0, 0, 100, 100});
  EXPECT_EQ(q.split_count(), 1u);
  EXPECT_EQ(q.depth(), 2u);
  EXPECT_EQ(q.root_entry_count(), 0u);
  Dataset mixed = tiny;
  mixed.push_back(s[0]);
  Quadtree q2(mixed, 2);
  EXPECT_EQ(q2.root_entry_count(), 1u);  // spans every quadrant
}

TEST(Quadtree, MaxDepthKeepsEntries) {
  Dataset same;
  for (int i = 0; i < 50; ++i) same.push_back(testing::GeometryGen::box(1, 1, 1.001, 1.001));
  Quadtree q(same, 2, 3, Mbr{0, 0, 8, 8});
  EXPECT_EQ(q.depth(), 3u);
  std::vector<GeometryId> c;
  q.candidates(Mbr{1, 1, 1, 1}, c);
  EXPECT_EQ(c.size(), 50u);
}

TEST(CrTree, QuantizationIsConservative) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1000, 1000);
  for (int bits : {4, 8, 16}) {
    for (int i = 0; i < 10000; ++i) {
      Mbr ref{u(rng), u(rng), 0, 0};
      ref.x_max = ref.x_min + std::abs(u(rng)) * (i % 17 == 0 ? 0 : 1);
      ref.y_max = ref.y_min + std::abs(u(rng));
      std::uniform_real_distribution<double> ux(ref.x_min, ref.x_max);
      std::uniform_real_distribution<double> uy(ref.y_min, ref.y_max);
      double x0 = ux(rng), x1 = ux(rng), y0 = uy(rng), y1 = uy(rng);
      if (i % 5 == 0) x1 = x0;
      const Mbr m{std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1)};
      const Mbr back = dequantize(quantize(m, ref, bits), ref, bits);
      ASSERT_TRUE(back.contains(m)) << bits << " bits, case " << i;
      ASSERT_TRUE(ref.contains(back));
    }
  }
}

TEST(CrTree, RawIsSupersetAndFilteredIsExact) {
  const auto s = random_dataset(3, 600);
  const auto t = random_dataset(4, 600);
  const auto expected = mbr_pairs(s, t);
  for (int bits : {4, 8, 16}) {
    CrTree tree(s, 8, bits);
    std::vector<GeometryId> raw;
    std::vector<GeometryId> exact;
    Pairs got;
    std::size_t extra = 0;
    for (std::size_t j = 0; j < t.size(); ++j) {
      tree.query_raw(t[j].mbr(), raw);
      tree.candidates(t[j].mbr(), exact);
      EXPECT_TRUE(std::includes(raw.begin(), raw.end(), exact.begin(), exact.end()));
      extra += raw.size() - exact.size();
      for (GeometryId id : exact) got.emplace_back(id, static_cast<GeometryId>(j));
    }
    EXPECT_EQ(sorted_unique(got), expected);
    if (bits == 4) EXPECT_GT(extra, 0u);
  }
  EXPECT_THROW(CrTree(s, 16, 7), ConfigError);
}

TEST(Trees, FixtureQueries) {
  const auto s = fig1_source();
  RTree r(s);
  Quadtree q(s);
  CrTree c(s);
  std::vector<GeometryId> out;
  for (const SourceIndex* idx : {static_cast<const SourceIndex*>(&r), static_cast<const SourceIndex*>(&q),
                                 static_cast<const SourceIndex*>(&c)}) {
    idx->candidates(testing::fig1_l3().mbr(), out);
    EXPECT_EQ(out, (std::vector<GeometryId>{0}));
    idx->candidates(Mbr{100, 100, 110, 110}, out);
    EXPECT_TRUE(out.empty());
  }
}

TEST(Trees, CrossIndexEquality) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto s = random_dataset(seed * 13, 300);
    const auto t = random_dataset(seed * 17, 300);
    const auto grid = Equigrid::build_source_only(s, dynamic_granularity(s));
    const auto expected = sorted_unique(probe_all(grid, t));
    EXPECT_EQ(expected, mbr_pairs(s, t));
    for (std::size_t m : {4u, 16u}) {
      EXPECT_EQ(sorted_unique(probe_all(RTree(s, m), t)), expected);
      EXPECT_EQ(sorted_unique(probe_all(Quadtree(s, m), t)), expected);
      EXPECT_EQ(sorted_unique(probe_all(CrTree(s, m), t)), expected);
      std::vector<IndexEntry> entries;
      for (std::size_t i = 0; i < s.size(); ++i) entries.push_back({s[i].mbr(), static_cast<GeometryId>(i)});
      EXPECT_EQ(sorted_unique(probe_all(StrTree(entries, m), t)), expected);
    }
  }
}

}  // namespace
}  // namespace geolink
