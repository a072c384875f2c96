#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "geolink/batch_pipeline.hpp"
#include "geolink/error.hpp"
#include "geolink/progressive.hpp"
#include "support/fixtures.hpp"
#include "support/link_oracle.hpp"

using namespace geolink;
using namespace geolink::testing;

namespace {

// Tile count of an MBR on a w x h grid, by direct floor arithmetic.
double tile_count(const Mbr& m, double w, double h) {
  return (std::floor(m.x_max / w) - std::floor(m.x_min / w) + 1) * (std::floor(m.y_max / h) - std::floor(m.y_min / h) + 1);
}

double shared_tiles(const Mbr& a, const Mbr& b, double w, double h) {
  const double x = std::min(std::floor(a.x_max / w), std::floor(b.x_max / w)) -
                   std::max(std::floor(a.x_min / w), std::floor(b.x_min / w)) + 1;
  const double y = std::min(std::floor(a.y_max / h), std::floor(b.y_max / h)) -
                   std::max(std::floor(a.y_min / h), std::floor(b.y_min / h)) + 1;
  return std::max(0.0, x) * std::max(0.0, y);
}

std::vector<std::pair<GeometryId, GeometryId>> pairs_of(const ProgressiveTrace& t) {
  std::vector<std::pair<GeometryId, GeometryId>> out;
  for (const auto& s : t) out.emplace_back(s.source, s.target);
  return out;
}

std::vector<std::pair<GeometryId, GeometryId>> pairs_of(const std::vector<WeightedPair>& v) {
  std::vector<std::pair<GeometryId, GeometryId>> out;
  for (const auto& p : v) out.emplace_back(p.source, p.target);
  return out;
}

std::vector<WeightedPair> random_pairs(std::mt19937_64& rng, std::size_t n, GeometryId ids = 20) {
  std::set<std::pair<GeometryId, GeometryId>> seen;
  std::vector<WeightedPair> out;
  std::uniform_int_distribution<GeometryId> id(0, ids - 1);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  while (out.size() < n) {
    const GeometryId s = id(rng), t = id(rng);
    if (!seen.insert({s, t}).second) continue;
    out.push_back({s, t, std::round(w(rng) * 8) / 8, 0.0});
  }
  return out;
}

ProgressiveTrace trace_of(const std::vector<bool>& related) {
  ProgressiveTrace t;
  for (std::size_t i = 0; i < related.size(); ++i) t.push_back({i + 1, 0, static_cast<GeometryId>(i), related[i]});
  return t;
}

}  // namespace

TEST(Names, ParseRoundTrip) {
  for (auto s : kAllSchemes) EXPECT_EQ(parse_scheme(scheme_name(s)), s);
  for (auto a : kAllProgressive) EXPECT_EQ(parse_progressive(progressive_name(a)), a);
  EXPECT_THROW(parse_scheme("cosine"), ConfigError);
  EXPECT_THROW(parse_progressive("opti"), ConfigError);
}

TEST(Weights, FixtureValues) {
  const Geometry p1 = fig1_p1(), p2 = fig1_p2();
  const PairWeigher w(GridSpec{6, 6}, 4, WeightScheme::JS);
  EXPECT_DOUBLE_EQ(w.weight(p1, p2, WeightScheme::CF), 1.0);
  EXPECT_DOUBLE_EQ(w.weight(p1, p2, WeightScheme::JS), 0.25);
  EXPECT_DOUBLE_EQ(w.weight(p1, p2, WeightScheme::MBRO), 0.04);
  EXPECT_DOUBLE_EQ(w.weight(p1, p2, WeightScheme::ISP), 0.1);
  const PairWeigher minarea(GridSpec{6, 6}, 4, WeightScheme::MBRO, std::nullopt, MbroMode::MinArea);
  EXPECT_DOUBLE_EQ(minarea.weight(p1, p2, WeightScheme::MBRO), 1.0);
}

TEST(Weights, ChiSquareMatchesClosedForm) {
  const Geometry s = GeometryGen::box(0.2, 0.2, 1.8, 0.8);
  const Geometry t = GeometryGen::box(1.2, 0.2, 2.8, 0.8);
  const PairWeigher w(GridSpec{1, 1}, 10, WeightScheme::X2);
  // N (ad - bc)^2 / (r1 r2 c1 c2) with a=1, b=1, c=1, d=7.
  EXPECT_DOUBLE_EQ(w.weight(s, t, WeightScheme::X2), 10.0 * 36 / (2 * 8 * 2 * 8));
  // s covers every nonempty tile, so an expected count is 0 and so is the weight.
  const Geometry inner = GeometryGen::box(0.3, 0.3, 0.7, 0.7);
  const PairWeigher full(GridSpec{1, 1}, 2, WeightScheme::X2);
  EXPECT_DOUBLE_EQ(full.weight(s, inner, WeightScheme::X2), 0.0);
}

TEST(Weights, DegenerateMbro) {
  const Geometry a = Geometry::line_string({{0, 0}, {4, 0}});
  const Geometry b = Geometry::line_string({{0, 0}, {4, 0}});
  const Geometry c = Geometry::line_string({{1, 0}, {3, 0}});
  const PairWeigher w(GridSpec{1, 1}, 1, WeightScheme::MBRO);
  EXPECT_DOUBLE_EQ(w.weight(a, b, WeightScheme::MBRO), 1.0);
  EXPECT_DOUBLE_EQ(w.weight(a, c, WeightScheme::MBRO), 0.0);
}

TEST(Weights, MatchTileArithmeticOnRandomPairs) {
  const Dataset s = random_dataset(3, 80, 40);
  const Dataset t = random_dataset(4, 80, 40);
  const PairWeigher w(GridSpec{3, 5}, 1000, WeightScheme::JS);
  for (const auto& [i, j] : mbr_pairs(s, t)) {
    const double a = tile_count(s[i].mbr(), 3, 5), b = tile_count(t[j].mbr(), 3, 5);
    const double cf = shared_tiles(s[i].mbr(), t[j].mbr(), 3, 5);
    ASSERT_DOUBLE_EQ(w.weight(s[i], t[j], WeightScheme::CF), cf);
    ASSERT_DOUBLE_EQ(w.weight(s[i], t[j], WeightScheme::JS), cf / (a + b - cf));
    const double n = 1000, d = n - a - b + cf;
    const double x2 = n * std::pow(cf * d - (a - cf) * (b - cf), 2) / (a * (n - a) * b * (n - b));
    ASSERT_NEAR(w.weight(s[i], t[j], WeightScheme::X2), x2, 1e-9 * std::max(1.0, x2));
  }
}

TEST(Weights, CompositeRequiresDistinctSchemes) {
  EXPECT_THROW(PairWeigher(GridSpec{1, 1}, 1, WeightScheme::JS, WeightScheme::JS), ConfigError);
}

TEST(Schedule, TopBudgetSortsAndTruncates) {
  std::vector<WeightedPair> v = {{0, 0, 0.2, 0}, {1, 0, 0.9, 0}, {0, 1, 0.5, 0}, {2, 2, 0.5, 0}};
  EXPECT_EQ(pairs_of(schedule_top(v, 10)),
            (std::vector<std::pair<GeometryId, GeometryId>>{{1, 0}, {0, 1}, {2, 2}, {0, 0}}));
  EXPECT_EQ(pairs_of(schedule_top(v, 1)), (std::vector<std::pair<GeometryId, GeometryId>>{{1, 0}}));
}

TEST(Schedule, CompositeBreaksTiesBySecondary) {
  // Two targets touching the source in one tile each: equal JS, different MBRO.
  const Dataset s = {GeometryGen::box(0, 0, 4, 4, 0)};
  Dataset t = {GeometryGen::box(3, 3, 5, 5), GeometryGen::box(1, 1, 3, 3)};
  ProgressiveConfig cfg;
  cfg.scheme = WeightScheme::JS;
  cfg.secondary = WeightScheme::MBRO;
  cfg.grid = GridSpec{10, 10};
  const auto pairs = schedule_top(weighted_candidates(s, t, cfg), 10);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].weight, pairs[1].weight);
  EXPECT_EQ(pairs[0].target, 1u);  // larger MBR overlap first
  EXPECT_GT(pairs[0].tiebreak, pairs[1].tiebreak);
}

TEST(Schedule, BudgetOneOnFixturePicksMaxJaccard) {
  const Dataset d = fig1_dataset();
  ProgressiveConfig cfg;
  cfg.scheme = WeightScheme::JS;
  cfg.budget = 1;
  cfg.grid = GridSpec{6, 6};
  const auto res = run_progressive(d, d, cfg);
  ASSERT_EQ(res.trace.size(), 1u);
  double best = -1;
  std::pair<GeometryId, GeometryId> arg;
  for (const auto& [i, j] : mbr_pairs(d, d)) {
    const double a = tile_count(d[i].mbr(), 6, 6), b = tile_count(d[j].mbr(), 6, 6);
    const double cf = shared_tiles(d[i].mbr(), d[j].mbr(), 6, 6);
    if (cf / (a + b - cf) > best) best = cf / (a + b - cf), arg = {i, j};
  }
  EXPECT_EQ(std::make_pair(res.trace[0].source, res.trace[0].target), arg);
}

TEST(Dynamic, NoRelatedKeepsStaticOrder) {
  std::mt19937_64 rng(5);
  const auto pairs = random_pairs(rng, 60);
  const auto order = schedule_top(pairs, 40);
  const auto trace = run_dynamic(order, 40, [](GeometryId, GeometryId) { return false; });
  EXPECT_EQ(pairs_of(trace), pairs_of(order));
}

TEST(Dynamic, RelatedPairPromotesNeighbour) {
  const std::vector<WeightedPair> order = {{1, 1, 0.9, 0}, {2, 3, 0.8, 0}, {1, 2, 0.5, 0}};
  const auto trace = run_dynamic(order, 3, [](GeometryId s, GeometryId t) { return s == 1 && t == 1; });
  EXPECT_EQ(pairs_of(trace), (std::vector<std::pair<GeometryId, GeometryId>>{{1, 1}, {1, 2}, {2, 3}}));
  EXPECT_TRUE(trace[0].related);
  EXPECT_FALSE(trace[1].related);
}

TEST(Local, EveryTargetRepresented) {
  std::mt19937_64 rng(9);
  const auto pairs = random_pairs(rng, 150, 30);
  std::set<GeometryId> targets;
  for (const auto& p : pairs) targets.insert(p.target);
  const auto kept = schedule_local(pairs, targets.size() + 3);
  std::set<GeometryId> covered;
  for (const auto& p : kept) covered.insert(p.target);
  EXPECT_EQ(covered, targets);
  EXPECT_EQ(kept.size(), targets.size() + 3);
  EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end(), ranks_before));
}

TEST(Local, SmallBudgetKeepsBestTargets) {
  const std::vector<WeightedPair> pairs = {
      {0, 0, 0.9, 0}, {1, 0, 0.8, 0}, {0, 1, 0.3, 0}, {1, 1, 0.2, 0}, {0, 2, 0.7, 0}, {2, 2, 0.1, 0}};
  // |T'| = 3, BU = 2 -> quota 1: best pair of each target, then the top 2.
  EXPECT_EQ(pairs_of(schedule_local(pairs, 2)), (std::vector<std::pair<GeometryId, GeometryId>>{{0, 0}, {0, 2}}));
}

TEST(GeometryOrdered, HarvestsTopGeometryFirst) {
  // Source 7 carries high weights on all its pairs; the single best pair elsewhere is (1, 9).
  const std::vector<WeightedPair> pairs = {{7, 0, 0.8, 0}, {7, 1, 0.8, 0}, {7, 2, 0.8, 0}, {1, 9, 0.95, 0},
                                           {1, 3, 0.0, 0}, {1, 4, 0.0, 0}, {2, 5, 0.1, 0}};
  const auto out = schedule_geometry_ordered(pairs, 3);
  // Ranking: t9 (0.95), s7 (0.8), t0 ... -> (1,9),(7,0),(7,1).
  EXPECT_EQ(pairs_of(out), (std::vector<std::pair<GeometryId, GeometryId>>{{1, 9}, {7, 0}, {7, 1}}));
  const auto all = schedule_geometry_ordered(pairs, 100);
  EXPECT_EQ(all.size(), pairs.size());
}

TEST(GeometryOrdered, UniformWeightsFallBackToIdOrder) {
  std::vector<WeightedPair> pairs;
  for (GeometryId s = 0; s < 3; ++s) {
    for (GeometryId t = 0; t < 3; ++t) pairs.push_back({2 - s, 2 - t, 1.0, 0});
  }
  const auto out = schedule_geometry_ordered(pairs, 9);
  std::vector<std::pair<GeometryId, GeometryId>> expected;
  for (GeometryId s = 0; s < 3; ++s) {
    for (GeometryId t = 0; t < 3; ++t) expected.emplace_back(s, t);
  }
  EXPECT_EQ(pairs_of(out), expected);
}

TEST(Iterative, RoundRobinAcrossGeometries) {
  const std::vector<WeightedPair> pairs = {{1, 1, 0.9, 0}, {1, 2, 0.8, 0}, {2, 1, 0.7, 0}, {2, 2, 0.6, 0}};
  const auto out = schedule_iterative(pairs, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_NE(out[0].source, out[1].source);
  // Ranking s1 (0.85), t1 (0.8), t2 (0.7), s2 (0.65): s1 takes (1,1), t1 takes (2,1).
  EXPECT_EQ(pairs_of(out), (std::vector<std::pair<GeometryId, GeometryId>>{{1, 1}, {2, 1}}));
  const auto all = schedule_iterative(pairs, 10);
  EXPECT_EQ(all.size(), 4u);
  std::set<std::pair<GeometryId, GeometryId>> uniq;
  for (const auto& p : all) uniq.insert({p.source, p.target});
  EXPECT_EQ(uniq.size(), 4u);
}

TEST(Iterative, SpreadsWhereGeometryOrderedConcentrates) {
  // Source 0 has many strong pairs whose targets are diluted by source 4;
  // sources 1..3 have one moderate pair each.
  std::vector<WeightedPair> pairs;
  for (GeometryId t = 0; t < 6; ++t) {
    pairs.push_back({0, t, 0.9, 0});
    pairs.push_back({4, t, 0.0, 0});
  }
  for (GeometryId s = 1; s <= 3; ++s) pairs.push_back({s, 10 + s, 0.6, 0});
  auto distinct_sources = [](const std::vector<WeightedPair>& v) {
    std::set<GeometryId> s;
    for (const auto& p : v) s.insert(p.source);
    return s.size();
  };
  const auto go = schedule_geometry_ordered(pairs, 4);
  const auto it = schedule_iterative(pairs, 4);
  EXPECT_EQ(distinct_sources(go), 1u);
  EXPECT_EQ(distinct_sources(it), 4u);
}

TEST(Pradon, TileOrderFollowsCandidateCounts) {
  // Tile (0,0): one pair; tile (5,0): three pairs.
  const Dataset s = {GeometryGen::box(0.1, 0.1, 0.9, 0.9, 0), GeometryGen::box(5.1, 0.1, 5.9, 0.9, 1)};
  const Dataset t = {GeometryGen::box(0.2, 0.2, 0.8, 0.8, 0), GeometryGen::box(5.2, 0.2, 5.8, 0.8, 1),
                     GeometryGen::box(5.3, 0.3, 5.7, 0.7, 2), GeometryGen::box(5.4, 0.4, 5.6, 0.6, 3)};
  ProgressiveConfig cfg;
  cfg.algorithm = ProgressiveAlgorithm::PRadon;
  cfg.grid = GridSpec{1, 1};
  cfg.budget = 10;
  cfg.tile_order = TileOrder::Increasing;
  auto res = run_progressive(s, t, cfg);
  ASSERT_EQ(res.trace.size(), 4u);
  EXPECT_EQ(res.trace[0].source, 0u);
  cfg.tile_order = TileOrder::Decreasing;
  res = run_progressive(s, t, cfg);
  EXPECT_EQ(res.trace[3].source, 0u);
  EXPECT_EQ(res.candidates, 4u);
}

TEST(Pradon, SingleTileIsWeightOrder) {
  const Dataset s = random_dataset(21, 20, 10);
  const Dataset t = random_dataset(22, 20, 10);
  ProgressiveConfig cfg;
  cfg.algorithm = ProgressiveAlgorithm::PRadon;
  cfg.scheme = WeightScheme::MBRO;
  cfg.grid = GridSpec{1000, 1000};
  cfg.budget = 1000;
  const auto res = run_progressive(s, t, cfg);
  ProgressiveConfig pg = cfg;
  pg.algorithm = ProgressiveAlgorithm::PG;
  EXPECT_EQ(pairs_of(res.trace), pairs_of(schedule_top(weighted_candidates(s, t, pg), 1000)));
}

TEST(Progressive, FullBudgetEqualsBatch) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Dataset s = random_dataset(seed * 3, 150, 50);
    const Dataset t = random_dataset(seed * 3 + 1, 120, 50);
    const LinkSet batch = nested_loop_links(s, t);
    for (auto a : kAllProgressive) {
      for (auto sch : kAllSchemes) {
        ProgressiveConfig cfg;
        cfg.algorithm = a;
        cfg.scheme = sch;
        cfg.budget = s.size() * t.size();
        const auto res = run_progressive(s, t, cfg);
        EXPECT_TRUE(res.links.same_links(batch)) << progressive_name(a) << "/" << scheme_name(sch);
        EXPECT_EQ(res.trace.size(), mbr_pairs(s, t).size());
        EXPECT_EQ(res.candidates, mbr_pairs(s, t).size());
      }
    }
  }
}

TEST(Progressive, BudgetBoundsTrace) {
  const Dataset s = random_dataset(61, 100, 40);
  const Dataset t = random_dataset(62, 100, 40);
  for (auto a : kAllProgressive) {
    ProgressiveConfig cfg;
    cfg.algorithm = a;
    cfg.budget = 17;
    const auto res = run_progressive(s, t, cfg);
    EXPECT_EQ(res.trace.size(), 17u) << progressive_name(a);
    std::set<std::pair<GeometryId, GeometryId>> seen;
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
      EXPECT_EQ(res.trace[i].step, i + 1);
      EXPECT_TRUE(seen.insert({res.trace[i].source, res.trace[i].target}).second);
      EXPECT_TRUE(mbr_intersects(s[res.trace[i].source].mbr(), t[res.trace[i].target].mbr()));
    }
  }
  ProgressiveConfig zero;
  zero.budget = 0;
  EXPECT_THROW(run_progressive(s, t, zero), ConfigError);
}

TEST(Progressive, MonotoneTransformKeepsOrder) {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 20; ++round) {
    const auto pairs = random_pairs(rng, 80);
    auto squashed = pairs, affine = pairs;
    for (auto& p : squashed) p.weight = std::exp(3 * p.weight) + 1;
    for (auto& p : affine) p.weight = 2.5 * p.weight + 4;
    for (std::size_t bu : {5u, 30u, 80u}) {
      EXPECT_EQ(pairs_of(schedule_top(pairs, bu)), pairs_of(schedule_top(squashed, bu)));
      EXPECT_EQ(pairs_of(schedule_local(pairs, bu)), pairs_of(schedule_local(squashed, bu)));
      EXPECT_EQ(pairs_of(schedule_geometry_ordered(pairs, bu)), pairs_of(schedule_geometry_ordered(affine, bu)));
      EXPECT_EQ(pairs_of(schedule_iterative(pairs, bu)), pairs_of(schedule_iterative(affine, bu)));
    }
  }
}

TEST(Progressive, RelatedFirstWeightsGivePerfectPgr) {
  std::mt19937_64 rng(23);
  std::bernoulli_distribution coin(0.3);
  for (int round = 0; round < 20; ++round) {
    auto pairs = random_pairs(rng, 60);
    std::set<std::pair<GeometryId, GeometryId>> related;
    for (auto& p : pairs) {
      const bool r = coin(rng);
      if (r) related.insert({p.source, p.target});
      p.weight = (r ? 2.0 : 1.0) + p.weight / 10;
    }
    auto verify = [&](GeometryId s, GeometryId t) { return related.count({s, t}) > 0; };
    for (auto order : {schedule_top(pairs, 60), schedule_local(pairs, 60), schedule_geometry_ordered(pairs, 60)}) {
      ProgressiveTrace trace;
      for (const auto& p : order) trace.push_back({trace.size() + 1, p.source, p.target, verify(p.source, p.target)});
      const auto m = compute_metrics(trace, related.size(), 60);
      if (!related.empty()) EXPECT_DOUBLE_EQ(m.pgr, 1.0);
    }
  }
}

TEST(Metrics, HandDerivedTraces) {
  auto m = compute_metrics(trace_of({true, true, false, false}), 2, 4);
  EXPECT_DOUBLE_EQ(m.pgr, 1.0);
  EXPECT_DOUBLE_EQ(m.precision, 0.5);
  EXPECT_DOUBLE_EQ(m.recall, 1.0);
  m = compute_metrics(trace_of({false, false, true, true}), 2, 4);
  EXPECT_DOUBLE_EQ(m.pgr, 3.0 / 7.0);
  m = compute_metrics(trace_of({true, false, true}), 5, 3);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
}

TEST(Metrics, ZeroDenominatorsAreFlagged) {
  auto m = compute_metrics({}, 0, 5);
  EXPECT_TRUE(m.precision_undefined);
  EXPECT_TRUE(m.recall_undefined);
  EXPECT_TRUE(m.pgr_undefined);
  EXPECT_EQ(m.pgr, 0.0);
  m = compute_metrics(trace_of({false, false}), 0, 2);
  EXPECT_FALSE(m.precision_undefined);
  EXPECT_TRUE(m.pgr_undefined);
}

TEST(Metrics, PgrIsOneExactlyForRelatedFirst) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<bool> rel(n);
    for (std::size_t k = 0; k < n; ++k) rel[k] = rng() % 3 == 0;
    const std::size_t related = std::count(rel.begin(), rel.end(), true);
    const auto m = compute_metrics(trace_of(rel), related, n);
    bool first = true;
    for (std::size_t k = 0; k < n; ++k) {
      if (k >= related && rel[k]) first = false;
    }
    ASSERT_GE(m.pgr, 0.0);
    ASSERT_LE(m.pgr, 1.0 + 1e-12);
    if (related == 0) {
      ASSERT_TRUE(m.pgr_undefined);
    } else {
      ASSERT_EQ(m.pgr == 1.0, first) << i;
    }
  }
}

TEST(RandomOrder, CoversCandidatesDeterministically) {
  const Dataset s = random_dataset(71, 80, 30);
  const Dataset t = random_dataset(72, 80, 30);
  const auto a = run_random_order(s, t, 1000000, 5);
  const auto b = run_random_order(s, t, 1000000, 5);
  const auto c = run_random_order(s, t, 1000000, 6);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_NE(pairs_of(a.trace), pairs_of(c.trace));
  EXPECT_TRUE(a.links.same_links(nested_loop_links(s, t)));
}

TEST(Trace, WritesTsv) {
  const auto path = std::filesystem::temp_directory_path() / "geolink_trace.tsv";
  write_trace(trace_of({true, false}), path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "step\tsource\ttarget\trelated\n1\t0\t0\t1\n2\t0\t1\t0\n");
}

TEST(Progressive, AcceptFilterRestrictsCandidates) {
  const Dataset s = random_dataset(81, 60, 30);
  const Dataset t = random_dataset(82, 60, 30);
  for (auto a : kAllProgressive) {
    ProgressiveConfig cfg;
    cfg.algorithm = a;
    cfg.budget = 100000;
    cfg.accept = [](GeometryId s, GeometryId) { return s % 2 == 0; };
    const auto res = run_progressive(s, t, cfg);
    for (const auto& st : res.trace) EXPECT_EQ(st.source % 2, 0u);
    std::size_t expected = 0;
    for (const auto& [i, j] : mbr_pairs(s, t)) expected += i % 2 == 0;
    EXPECT_EQ(res.trace.size(), expected) << progressive_name(a);
  }
}
