#include "geolink/parallel_exec.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <map>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "geolink/error.hpp"

namespace geolink {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  std::int64_t q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

/// Tile range of a macro cell.
TileSpan macro_tiles(const PartitionGrid& g, const TileKey& m) {
  const auto fx = static_cast<std::int64_t>(g.factor_x);
  const auto fy = static_cast<std::int64_t>(g.factor_y);
  return {m.x * fx, m.x * fx + fx - 1, m.y * fy, m.y * fy + fy - 1};
}

TileSpan clip(const TileSpan& a, const TileSpan& b) {
  return {std::max(a.x_lo, b.x_lo), std::min(a.x_hi, b.x_hi), std::max(a.y_lo, b.y_lo), std::min(a.y_hi, b.y_hi)};
}

bool is_empty(const TileSpan& s) { return s.x_lo > s.x_hi || s.y_lo > s.y_hi; }

struct UnitOutput {
  LinkSet links;
  ProgressiveTrace trace;
};

UnitOutput run_batch_unit(const PartitionSet& parts, const Partition& p, std::span<const Geometry> source,
                          std::span<const Geometry> target) {
  UnitOutput out;
  for (const auto& [s, t] : unit_candidates(parts, p, source, target)) verify_into(out.links, source[s], target[t], s, t);
  return out;
}

UnitOutput run_progressive_unit(const PartitionSet& parts, const Partition& p, std::span<const Geometry> source,
                                std::span<const Geometry> target, const ProgressiveConfig& base,
                                std::size_t budget) {
  UnitOutput out;
  if (budget == 0) return out;
  Dataset ls, lt;
  ls.reserve(p.source.size());
  lt.reserve(p.target.size());
  for (GeometryId id : p.source) ls.push_back(source[id]);
  for (GeometryId id : p.target) lt.push_back(target[id]);
  ProgressiveConfig cfg = base;
  cfg.budget = budget;
  cfg.grid = parts.grid.tiles;
  const TileKey key = p.key;
  cfg.accept = [&](GeometryId s, GeometryId t) { return parts.grid.owner(ls[s].mbr(), lt[t].mbr()) == key; };
  ProgressiveResult r = run_progressive(ls, lt, cfg);
  r.links.remap(p.source, p.target);
  out.links = std::move(r.links);
  out.trace = std::move(r.trace);
  for (auto& st : out.trace) {
    st.source = p.source[st.source];
    st.target = p.target[st.target];
  }
  return out;
}

}  // namespace

TileKey PartitionGrid::macro_of(const TileKey& tile) const noexcept {
  return {floor_div(tile.x, static_cast<std::int64_t>(factor_x)), floor_div(tile.y, static_cast<std::int64_t>(factor_y))};
}

TileKey PartitionGrid::owner(const Mbr& a, const Mbr& b) const noexcept {
  return macro_of(reference_point_owner(a, b, tiles));
}

PartitionSet partition_datasets(std::span<const Geometry> source, std::span<const Geometry> target,
                                std::size_t factor_x, std::size_t factor_y, std::optional<GridSpec> tiles) {
  if (source.empty()) throw EmptyDataset("cannot partition an empty source dataset");
  if (factor_x == 0 || factor_y == 0) throw ConfigError("macro grid factors must be positive");
  PartitionSet out;
  out.grid = {tiles ? *tiles : dynamic_granularity(source), factor_x, factor_y};
  const PartitionGrid& g = out.grid;
  auto macro_span = [&](const Mbr& m) {
    const TileSpan t = tiles_for(m, g.tiles);
    const TileKey lo = g.macro_of({t.x_lo, t.y_lo});
    const TileKey hi = g.macro_of({t.x_hi, t.y_hi});
    return TileSpan{lo.x, hi.x, lo.y, hi.y};
  };
  std::map<TileKey, Partition> cells;
  for (std::size_t i = 0; i < source.size(); ++i) {
    macro_span(source[i].mbr()).for_each([&](TileKey k) { cells[k].source.push_back(static_cast<GeometryId>(i)); });
  }
  for (std::size_t j = 0; j < target.size(); ++j) {
    const TileSpan span = macro_span(target[j].mbr());
    const auto id = static_cast<GeometryId>(j);
    if (span.size() > cells.size()) {
      for (auto& [k, p] : cells) {
        if (span.contains(k)) p.target.push_back(id);
      }
    } else {
      span.for_each([&](TileKey k) {
        if (auto it = cells.find(k); it != cells.end()) it->second.target.push_back(id);
      });
    }
  }
  const double mw = g.tiles.tile_width * static_cast<double>(factor_x);
  const double mh = g.tiles.tile_height * static_cast<double>(factor_y);
  for (auto& [k, p] : cells) {
    p.id = out.partitions.size();
    p.key = k;
    p.bounds = {static_cast<double>(k.x) * mw, static_cast<double>(k.y) * mh, static_cast<double>(k.x + 1) * mw,
                static_cast<double>(k.y + 1) * mh};
    out.partitions.push_back(std::move(p));
  }
  return out;
}

std::vector<WorkUnit> global_join(const PartitionSet& parts, std::size_t workers) {
  if (workers == 0) throw ConfigError("at least one worker is required");
  std::vector<WorkUnit> units;
  for (std::size_t i = 0; i < parts.partitions.size(); ++i) {
    const auto& p = parts.partitions[i];
    if (p.source.empty() || p.target.empty()) continue;
    units.push_back({i, units.size() % workers, 0, 0});
  }
  return units;
}

std::vector<std::pair<GeometryId, GeometryId>> unit_candidates(const PartitionSet& parts, const Partition& p,
                                                               std::span<const Geometry> source,
                                                               std::span<const Geometry> target) {
  const GridSpec& g = parts.grid.tiles;
  const TileSpan range = macro_tiles(parts.grid, p.key);
  std::unordered_map<TileKey, std::vector<GeometryId>, TileKeyHash> cells;
  for (GeometryId s : p.source) {
    const TileSpan span = clip(tiles_for(source[s].mbr(), g), range);
    if (!is_empty(span)) span.for_each([&](TileKey k) { cells[k].push_back(s); });
  }
  std::vector<std::pair<GeometryId, GeometryId>> out;
  for (GeometryId t : p.target) {
    const Mbr& tm = target[t].mbr();
    const TileSpan span = clip(tiles_for(tm, g), range);
    if (is_empty(span)) continue;
    auto visit = [&](const TileKey& k, const std::vector<GeometryId>& ids) {
      for (GeometryId s : ids) {
        const Mbr& sm = source[s].mbr();
        if (mbr_intersects(sm, tm) && reference_point_owner(sm, tm, g) == k) out.emplace_back(s, t);
      }
    };
    if (span.size() > cells.size()) {
      for (const auto& [k, ids] : cells) {
        if (span.contains(k)) visit(k, ids);
      }
    } else {
      span.for_each([&](TileKey k) {
        if (auto it = cells.find(k); it != cells.end()) visit(k, it->second);
      });
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> split_budget(std::size_t budget, std::span<const std::size_t> weights) {
  std::vector<std::size_t> out(weights.size(), 0);
  const std::size_t total = std::accumulate(weights.begin(), weights.end(), std::size_t{0});
  if (total == 0) return out;
  std::vector<std::pair<long double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const long double exact = static_cast<long double>(budget) * weights[i] / total;
    out[i] = static_cast<std::size_t>(exact);
    assigned += out[i];
    rema.emplace_back(exact - out[i], i);
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < budget && k < rema.size(); ++k, ++assigned) ++out[rema[k].second];
  return out;
}

ParallelResult parallel_interlink(std::span<const Geometry> source, std::span<const Geometry> target,
                                  const ParallelConfig& cfg) {
  if (cfg.workers == 0) throw ConfigError("at least one worker is required");
  if (cfg.mode == ParallelMode::Progressive && cfg.progressive.budget == 0) {
    throw ConfigError("budget must be at least 1");
  }
  ParallelResult res;
  if (source.empty() || target.empty()) return res;

  const auto t0 = Clock::now();
  const PartitionSet parts = partition_datasets(source, target, cfg.macro_x, cfg.macro_y, cfg.tiles);
  std::vector<WorkUnit> units = global_join(parts, cfg.workers);
  if (cfg.mode == ParallelMode::Progressive) {
    std::vector<std::size_t> counts;
    for (auto& u : units) {
      u.candidates = unit_candidates(parts, parts.partitions[u.partition], source, target).size();
      counts.push_back(u.candidates);
    }
    const auto budgets = split_budget(cfg.progressive.budget, counts);
    for (std::size_t i = 0; i < units.size(); ++i) units[i].budget = budgets[i];
  }
  const auto t1 = Clock::now();

  std::vector<UnitOutput> outputs(units.size());
  std::vector<std::exception_ptr> errors(cfg.workers);
  std::vector<std::size_t> failed(cfg.workers, 0);
  auto work = [&](std::size_t w) {
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (units[i].worker != w) continue;
      const Partition& p = parts.partitions[units[i].partition];
      try {
        if (cfg.before_unit) cfg.before_unit(units[i]);
        outputs[i] = cfg.mode == ParallelMode::Batch
                         ? run_batch_unit(parts, p, source, target)
                         : run_progressive_unit(parts, p, source, target, cfg.progressive, units[i].budget);
      } catch (...) {
        errors[w] = std::current_exception();
        failed[w] = p.id;
        return;
      }
    }
  };
  if (cfg.workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < cfg.workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (std::size_t w = 0; w < cfg.workers; ++w) {
    if (!errors[w]) continue;
    try {
      std::rethrow_exception(errors[w]);
    } catch (const std::exception& e) {
      throw WorkerFailure(failed[w], e.what());
    } catch (...) {
      throw WorkerFailure(failed[w], "unknown error");
    }
  }

  for (std::size_t i = 0; i < units.size(); ++i) {
    auto& o = outputs[i];
    res.units.push_back({units[i], o.links.verified(), o.links.related()});
    res.links.merge(o.links);
    for (auto st : o.trace) {
      st.step = res.trace.size() + 1;
      res.trace.push_back(st);
    }
    if (cfg.mode == ParallelMode::Batch) res.units.back().unit.candidates = o.links.verified();
  }
  res.links.normalize();
  res.timings.filtering = t1 - t0;
  res.timings.verification = Clock::now() - t1;
  return res;
}

}  // namespace geolink
