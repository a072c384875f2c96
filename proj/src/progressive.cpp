#include "geolink/progressive.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "geolink/de9im.hpp"
#include "geolink/error.hpp"

namespace geolink {

namespace {

using Clock = std::chrono::steady_clock;

struct SchemeName {
  WeightScheme scheme;
  std::string_view name;
};
constexpr SchemeName kSchemeNames[] = {{WeightScheme::CF, "cf"},
                                       {WeightScheme::JS, "js"},
                                       {WeightScheme::X2, "x2"},
                                       {WeightScheme::MBRO, "mbro"},
                                       {WeightScheme::ISP, "isp"}};

struct AlgoName {
  ProgressiveAlgorithm algorithm;
  std::string_view name;
};
constexpr AlgoName kAlgoNames[] = {{ProgressiveAlgorithm::PG, "pg"},   {ProgressiveAlgorithm::DPG, "dpg"},
                                   {ProgressiveAlgorithm::LPG, "lpg"}, {ProgressiveAlgorithm::GOG, "gog"},
                                   {ProgressiveAlgorithm::IPG, "ipg"}, {ProgressiveAlgorithm::PRadon, "pradon"}};

double chi_square(double n11, double row1, double col1, double n) {
  const double obs[2][2] = {{n11, row1 - n11}, {col1 - n11, n - row1 - col1 + n11}};
  const double rows[2] = {row1, n - row1};
  const double cols[2] = {col1, n - col1};
  double x2 = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double e = rows[i] * cols[j] / n;
      if (!(e > 0.0)) return 0.0;
      x2 += (obs[i][j] - e) * (obs[i][j] - e) / e;
    }
  }
  return x2;
}

/// Verifies one pair into `links`; degenerate pairs count as unrelated.
bool verify_recording(LinkSet& links, const Geometry& s, const Geometry& t, GeometryId sid, GeometryId tid) {
  RelationSet rels;
  try {
    rels = verify_pair(s, t);
  } catch (const DegenerateGeometry&) {
    links.record_degenerate();
    return false;
  }
  links.record(sid, tid, rels);
  return rels.bits() != 0;
}

struct GeomKey {
  int side;  // 0 source, 1 target
  GeometryId id;
  friend auto operator<=>(const GeomKey&, const GeomKey&) = default;
};

/// Geometries of both sides ranked by decreasing average pair weight, each
/// with its pairs (indices into `pairs`) in schedule order.
std::vector<std::vector<std::size_t>> ranked_geometries(const std::vector<WeightedPair>& pairs) {
  std::map<GeomKey, std::vector<std::size_t>> by_geom;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    by_geom[{0, pairs[i].source}].push_back(i);
    by_geom[{1, pairs[i].target}].push_back(i);
  }
  struct Ranked {
    double avg;
    GeomKey key;
    std::vector<std::size_t> idx;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(by_geom.size());
  for (auto& [k, idx] : by_geom) {
    double sum = 0.0;
    for (std::size_t i : idx) sum += pairs[i].weight;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return ranks_before(pairs[a], pairs[b]); });
    ranked.push_back({sum / static_cast<double>(idx.size()), k, std::move(idx)});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.avg > b.avg; });
  std::vector<std::vector<std::size_t>> out;
  out.reserve(ranked.size());
  for (auto& r : ranked) out.push_back(std::move(r.idx));
  return out;
}

void sort_schedule(std::vector<WeightedPair>& v) { std::sort(v.begin(), v.end(), ranks_before); }

std::vector<WeightedPair> pradon_schedule(std::span<const Geometry> source, std::span<const Geometry> target,
                                          const ProgressiveConfig& cfg) {
  const GridSpec g = cfg.grid ? *cfg.grid : dynamic_granularity(source, target);
  const Equigrid grid = Equigrid::build_both(source, target, g);
  const PairWeigher w(g, grid.cells().size(), cfg.scheme, cfg.secondary, cfg.mbro_mode);
  struct Tile {
    TileKey key;
    std::vector<WeightedPair> pairs;
  };
  std::vector<Tile> tiles;
  for (const TileKey& k : grid.sorted_keys()) {
    const auto& c = *grid.cell(k);
    Tile tile{k, {}};
    for (GeometryId s : c.source) {
      for (GeometryId t : c.target) {
        const Mbr& sm = source[s].mbr();
        const Mbr& tm = target[t].mbr();
        if (!mbr_intersects(sm, tm) || !(reference_point_owner(sm, tm, g) == k)) continue;
        if (cfg.accept && !cfg.accept(s, t)) continue;
        tile.pairs.push_back(w.weigh(source[s], target[t], s, t));
      }
    }
    if (tile.pairs.empty()) continue;
    sort_schedule(tile.pairs);
    tiles.push_back(std::move(tile));
  }
  std::stable_sort(tiles.begin(), tiles.end(), [&](const Tile& a, const Tile& b) {
    return cfg.tile_order == TileOrder::Increasing ? a.pairs.size() < b.pairs.size()
                                                    : a.pairs.size() > b.pairs.size();
  });
  std::vector<WeightedPair> out;
  for (auto& t : tiles) out.insert(out.end(), t.pairs.begin(), t.pairs.end());
  return out;
}

ProgressiveTrace run_static(const std::vector<WeightedPair>& order, std::size_t budget, const PairVerifierFn& verify) {
  ProgressiveTrace trace;
  const std::size_t n = std::min(order.size(), budget);
  trace.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = order[i];
    trace.push_back({i + 1, p.source, p.target, verify(p.source, p.target)});
  }
  return trace;
}

}  // namespace

std::string_view scheme_name(WeightScheme s) noexcept {
  for (const auto& n : kSchemeNames) {
    if (n.scheme == s) return n.name;
  }
  return "unknown";
}

WeightScheme parse_scheme(std::string_view name) {
  for (const auto& n : kSchemeNames) {
    if (n.name == name) return n.scheme;
  }
  throw ConfigError("unknown weighting scheme '" + std::string(name) + "' (expected cf, js, x2, mbro or isp)");
}

std::string_view progressive_name(ProgressiveAlgorithm a) noexcept {
  for (const auto& n : kAlgoNames) {
    if (n.algorithm == a) return n.name;
  }
  return "unknown";
}

ProgressiveAlgorithm parse_progressive(std::string_view name) {
  for (const auto& n : kAlgoNames) {
    if (n.name == name) return n.algorithm;
  }
  throw ConfigError("unknown progressive algorithm '" + std::string(name) +
                    "' (expected pg, dpg, lpg, gog, ipg or pradon)");
}

bool ranks_before(const WeightedPair& a, const WeightedPair& b) noexcept {
  if (a.weight != b.weight) return a.weight > b.weight;
  if (a.tiebreak != b.tiebreak) return a.tiebreak > b.tiebreak;
  if (a.source != b.source) return a.source < b.source;
  return a.target < b.target;
}

PairWeigher::PairWeigher(GridSpec grid, std::size_t nonempty_tiles, WeightScheme scheme,
                         std::optional<WeightScheme> secondary, MbroMode mbro)
    : grid_(grid), n_(static_cast<double>(nonempty_tiles)), scheme_(scheme), secondary_(secondary), mbro_(mbro) {
  if (secondary_ && *secondary_ == scheme_) throw ConfigError("composite scheme needs two different schemes");
}

double PairWeigher::weight(const Geometry& s, const Geometry& t, WeightScheme scheme) const {
  switch (scheme) {
    case WeightScheme::CF:
    case WeightScheme::JS:
    case WeightScheme::X2: {
      const TileSpan a = tiles_for(s.mbr(), grid_);
      const TileSpan b = tiles_for(t.mbr(), grid_);
      const double cf = static_cast<double>(span_overlap(a, b));
      const double na = static_cast<double>(a.size());
      const double nb = static_cast<double>(b.size());
      if (scheme == WeightScheme::CF) return cf;
      if (scheme == WeightScheme::JS) return cf / (na + nb - cf);
      // The source-only grid may not cover every target tile.
      return chi_square(cf, na, nb, std::max(n_, na + nb - cf));
    }
    case WeightScheme::MBRO: {
      const Mbr& a = s.mbr();
      const Mbr& b = t.mbr();
      const double inter = mbr_intersects(a, b) ? mbr_intersection(a, b).area() : 0.0;
      const double denom = mbro_ == MbroMode::Jaccard ? a.area() + b.area() - inter : std::min(a.area(), b.area());
      if (!(denom > 0.0)) return a == b ? 1.0 : 0.0;
      return inter / denom;
    }
    case WeightScheme::ISP:
      return 1.0 / static_cast<double>(s.num_points() + t.num_points());
  }
  return 0.0;
}

WeightedPair PairWeigher::weigh(const Geometry& s, const Geometry& t, GeometryId sid, GeometryId tid) const {
  return {sid, tid, weight(s, t, scheme_), secondary_ ? weight(s, t, *secondary_) : 0.0};
}

std::vector<WeightedPair> schedule_top(std::vector<WeightedPair> pairs, std::size_t budget) {
  if (budget < pairs.size()) {
    std::partial_sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(budget), pairs.end(), ranks_before);
    pairs.resize(budget);
  } else {
    sort_schedule(pairs);
  }
  return pairs;
}

std::vector<WeightedPair> schedule_local(std::vector<WeightedPair> pairs, std::size_t budget) {
  std::map<GeometryId, std::vector<WeightedPair>> by_target;
  for (const auto& p : pairs) by_target[p.target].push_back(p);
  if (by_target.empty()) return {};
  const std::size_t quota = std::max<std::size_t>(1, budget / by_target.size());
  std::vector<WeightedPair> kept, rest;
  for (auto& [t, v] : by_target) {
    sort_schedule(v);
    const std::size_t k = std::min(quota, v.size());
    kept.insert(kept.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k));
    rest.insert(rest.end(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  }
  kept = schedule_top(std::move(kept), budget);
  if (kept.size() < budget) {
    auto extra = schedule_top(std::move(rest), budget - kept.size());
    kept.insert(kept.end(), extra.begin(), extra.end());
  }
  sort_schedule(kept);
  return kept;
}

std::vector<WeightedPair> schedule_geometry_ordered(std::vector<WeightedPair> pairs, std::size_t budget) {
  std::vector<bool> taken(pairs.size(), false);
  std::vector<WeightedPair> out;
  for (const auto& idx : ranked_geometries(pairs)) {
    for (std::size_t i : idx) {
      if (out.size() >= budget) break;
      if (taken[i]) continue;
      taken[i] = true;
      out.push_back(pairs[i]);
    }
    if (out.size() >= budget) break;
  }
  sort_schedule(out);
  return out;
}

std::vector<WeightedPair> schedule_iterative(std::vector<WeightedPair> pairs, std::size_t budget) {
  const auto ranked = ranked_geometries(pairs);
  std::vector<std::size_t> cursor(ranked.size(), 0);
  std::vector<bool> taken(pairs.size(), false);
  std::vector<WeightedPair> out;
  bool progress = true;
  while (out.size() < budget && progress) {
    progress = false;
    for (std::size_t g = 0; g < ranked.size() && out.size() < budget; ++g) {
      auto& c = cursor[g];
      while (c < ranked[g].size() && taken[ranked[g][c]]) ++c;
      if (c == ranked[g].size()) continue;
      const std::size_t i = ranked[g][c++];
      taken[i] = true;
      out.push_back(pairs[i]);
      progress = true;
    }
  }
  return out;
}

ProgressiveTrace run_dynamic(std::vector<WeightedPair> pairs, std::size_t budget, const PairVerifierFn& verify) {
  const std::size_t n = pairs.size();
  std::vector<WeightedPair> current = pairs;
  auto cmp = [&](std::size_t a, std::size_t b) {
    if (ranks_before(current[a], current[b])) return true;
    if (ranks_before(current[b], current[a])) return false;
    return a < b;
  };
  std::set<std::size_t, decltype(cmp)> queue(cmp);
  std::unordered_map<GeometryId, std::vector<std::size_t>> by_source, by_target;
  for (std::size_t i = 0; i < n; ++i) {
    queue.insert(i);
    by_source[pairs[i].source].push_back(i);
    by_target[pairs[i].target].push_back(i);
  }
  std::unordered_map<GeometryId, std::size_t> deg_s, deg_t;
  std::vector<bool> done(n, false);
  ProgressiveTrace trace;
  while (!queue.empty() && trace.size() < budget) {
    const std::size_t i = *queue.begin();
    queue.erase(queue.begin());
    done[i] = true;
    const auto& p = pairs[i];
    const bool related = verify(p.source, p.target);
    trace.push_back({trace.size() + 1, p.source, p.target, related});
    if (!related) continue;
    ++deg_s[p.source];
    ++deg_t[p.target];
    auto reweigh = [&](std::size_t j) {
      if (done[j]) return;
      queue.erase(j);
      const auto& b = pairs[j];
      const double boost = 1.0 + static_cast<double>(deg_s[b.source] + deg_t[b.target]);
      current[j].weight = b.weight * boost;
      queue.insert(j);
    };
    for (std::size_t j : by_source[p.source]) reweigh(j);
    for (std::size_t j : by_target[p.target]) reweigh(j);
  }
  return trace;
}

std::vector<WeightedPair> weighted_candidates(std::span<const Geometry> source, std::span<const Geometry> target,
                                              const ProgressiveConfig& cfg) {
  if (source.empty() || target.empty()) return {};
  const GridSpec g = cfg.grid ? *cfg.grid : dynamic_granularity(source);
  const Equigrid grid = Equigrid::build_source_only(source, g);
  const PairWeigher w(g, grid.cells().size(), cfg.scheme, cfg.secondary, cfg.mbro_mode);
  std::vector<WeightedPair> out;
  std::vector<GeometryId> cands;
  for (std::size_t j = 0; j < target.size(); ++j) {
    grid.candidates_for(target[j].mbr(), cands);
    const auto tid = static_cast<GeometryId>(j);
    for (GeometryId s : cands) {
      if (cfg.accept && !cfg.accept(s, tid)) continue;
      out.push_back(w.weigh(source[s], target[j], s, tid));
    }
  }
  return out;
}

ProgressiveResult run_progressive(std::span<const Geometry> source, std::span<const Geometry> target,
                                  const ProgressiveConfig& cfg) {
  if (cfg.budget == 0) throw ConfigError("budget must be at least 1");
  if (cfg.secondary && *cfg.secondary == cfg.scheme) throw ConfigError("composite scheme needs two different schemes");
  ProgressiveResult res;
  if (source.empty() || target.empty()) return res;

  const auto t0 = Clock::now();
  std::vector<WeightedPair> order;
  if (cfg.algorithm == ProgressiveAlgorithm::PRadon) {
    order = pradon_schedule(source, target, cfg);
    res.candidates = order.size();
  } else {
    auto pairs = weighted_candidates(source, target, cfg);
    res.candidates = pairs.size();
    switch (cfg.algorithm) {
      case ProgressiveAlgorithm::PG:
      case ProgressiveAlgorithm::DPG:
        order = schedule_top(std::move(pairs), cfg.budget);
        break;
      case ProgressiveAlgorithm::LPG:
        order = schedule_local(std::move(pairs), cfg.budget);
        break;
      case ProgressiveAlgorithm::GOG:
        order = schedule_geometry_ordered(std::move(pairs), cfg.budget);
        break;
      case ProgressiveAlgorithm::IPG:
        order = schedule_iterative(std::move(pairs), cfg.budget);
        break;
      case ProgressiveAlgorithm::PRadon:
        break;
    }
  }
  const auto t1 = Clock::now();

  PairVerifierFn verify = [&](GeometryId s, GeometryId t) {
    return verify_recording(res.links, source[s], target[t], s, t);
  };
  if (cfg.algorithm == ProgressiveAlgorithm::DPG) {
    res.trace = run_dynamic(std::move(order), cfg.budget, verify);
  } else {
    res.trace = run_static(order, cfg.budget, verify);
  }
  res.links.normalize();
  res.timings.filtering = t1 - t0;
  res.timings.verification = Clock::now() - t1;
  return res;
}

ProgressiveResult run_random_order(std::span<const Geometry> source, std::span<const Geometry> target,
                                   std::size_t budget, std::uint64_t seed, const PairFilter& accept) {
  ProgressiveResult res;
  if (source.empty() || target.empty()) return res;
  const auto t0 = Clock::now();
  const Equigrid grid = Equigrid::build_source_only(source, dynamic_granularity(source));
  std::vector<WeightedPair> pairs;
  std::vector<GeometryId> cands;
  for (std::size_t j = 0; j < target.size(); ++j) {
    grid.candidates_for(target[j].mbr(), cands);
    for (GeometryId s : cands) {
      if (!accept || accept(s, static_cast<GeometryId>(j))) pairs.push_back({s, static_cast<GeometryId>(j), 0.0, 0.0});
    }
  }
  res.candidates = pairs.size();
  std::mt19937_64 rng(seed);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const auto t1 = Clock::now();
  res.trace = run_static(pairs, budget, [&](GeometryId s, GeometryId t) {
    return verify_recording(res.links, source[s], target[t], s, t);
  });
  res.links.normalize();
  res.timings.filtering = t1 - t0;
  res.timings.verification = Clock::now() - t1;
  return res;
}

ProgressiveMetrics compute_metrics(const ProgressiveTrace& trace, std::size_t total_related, std::size_t budget) {
  ProgressiveMetrics m;
  const std::size_t n = trace.size();
  double auc = 0.0;
  std::size_t found = 0;
  for (const auto& s : trace) {
    if (s.related) ++found;
    auc += static_cast<double>(found);
  }
  if (n == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(found) / static_cast<double>(n);
  }
  const std::size_t k = std::min(budget, total_related);
  if (k == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = static_cast<double>(found) / static_cast<double>(k);
  }
  const std::size_t kk = std::min(k, n);
  double optimal = 0.0;
  for (std::size_t i = 1; i <= n; ++i) optimal += static_cast<double>(std::min(i, kk));
  if (!(optimal > 0.0)) {
    m.pgr_undefined = true;
  } else {
    m.pgr = auc / optimal;
  }
  return m;
}

void write_trace(const ProgressiveTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open trace file " + path.string());
  out << "step\tsource\ttarget\trelated\n";
  for (const auto& s : trace) out << s.step << '\t' << s.source << '\t' << s.target << '\t' << (s.related ? 1 : 0) << '\n';
  if (!out) throw IoFailure("failed writing trace file " + path.string());
}

}  // namespace geolink
