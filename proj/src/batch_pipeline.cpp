#include "geolink/batch_pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include "geolink/error.hpp"
#include "verifier.hpp"

namespace geolink {

namespace {

using Clock = std::chrono::steady_clock;

struct NamedAlgorithm {
  Algorithm algorithm;
  std::string_view name;
};

constexpr NamedAlgorithm kNames[] = {
    {Algorithm::Radon, "radon"},          {Algorithm::StaticRadon, "static-radon"},
    {Algorithm::Giant, "giant"},          {Algorithm::StaticGiant, "static-giant"},
    {Algorithm::PlaneSweep, "plane-sweep"}, {Algorithm::Pbsm, "pbsm"},
    {Algorithm::StripeSweep, "stripe-sweep"}, {Algorithm::RTree, "rtree"},
    {Algorithm::Quadtree, "quadtree"},    {Algorithm::CrTree, "crtree"},
};

GridSpec extent_grid(const Mbr& ext, std::size_t divisions) {
  const double n = static_cast<double>(std::max<std::size_t>(divisions, 1));
  double w = ext.width() / n;
  double h = ext.height() / n;
  if (!(w > 0.0)) w = h;
  if (!(h > 0.0)) h = w;
  if (!(w > 0.0)) w = h = 1.0;
  return {w, h};
}

GridSpec static_grid(const AlgorithmConfig& cfg, const Mbr& ext) {
  if (cfg.static_grid) {
    if (!(cfg.static_grid->tile_width > 0.0) || !(cfg.static_grid->tile_height > 0.0)) {
      throw ConfigError("static tile width and height must be positive");
    }
    return *cfg.static_grid;
  }
  return extent_grid(ext, cfg.static_divisions);
}

std::size_t budget_of(const AlgorithmConfig& cfg) {
  return cfg.memory_budget ? cfg.memory_budget : default_memory_budget();
}

/// Probes `probe` against an index over `indexed`; `probe_is_target` tells
/// which side each belongs to in the original orientation.
void probe_all(const SourceIndex& index, std::span<const Geometry> indexed, std::span<const Geometry> probe,
               bool probe_is_target, detail::Verifier& v) {
  std::vector<GeometryId> cands;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    index.candidates(probe[i].mbr(), cands);
    const auto pid = static_cast<GeometryId>(i);
    for (GeometryId c : cands) {
      if (probe_is_target) {
        v.add(indexed[c], probe[i], c, pid);
      } else {
        v.add(probe[i], indexed[c], pid, c);
      }
    }
  }
}

/// Runs a memory-intensive join: `prepare` builds the structure (filtering)
/// and returns a callable that emits pairs (verification).
template <typename Prepare>
void run_intensive(std::span<const Geometry> source, std::span<const Geometry> target, Prepare&& prepare,
                   detail::Verifier& v, RunTimings& timings) {
  const auto t0 = Clock::now();
  auto join = prepare();
  const auto t1 = Clock::now();
  join([&](GeometryId s, GeometryId t) { v.add(source[s], target[t], s, t); });
  const auto t2 = Clock::now();
  timings.filtering += t1 - t0;
  timings.verification += t2 - t1;
}

void run_intensive_algorithm(std::span<const Geometry> source, std::span<const Geometry> target,
                             const AlgorithmConfig& cfg, detail::Verifier& v, RunTimings& timings) {
  switch (cfg.algorithm) {
    case Algorithm::Radon:
    case Algorithm::StaticRadon:
      run_intensive(
          source, target,
          [&] {
            GridSpec g;
            if (cfg.algorithm == Algorithm::Radon) {
              g = dynamic_granularity(source, target);
            } else {
              Mbr ext = extent_of(source);
              ext.expand(extent_of(target));
              g = static_grid(cfg, ext);
            }
            auto grid = std::make_shared<Equigrid>(Equigrid::build_both(source, target, g));
            return [grid, source, target](const PairCallback& emit) { radon_join(*grid, source, target, emit); };
          },
          v, timings);
      break;
    case Algorithm::PlaneSweep:
      run_intensive(
          source, target,
          [&] {
            auto join = std::make_shared<PlaneSweepJoin>(source, target, cfg.sweep_structure);
            return [join](const PairCallback& emit) { join->run(emit); };
          },
          v, timings);
      break;
    case Algorithm::Pbsm:
      run_intensive(
          source, target,
          [&] {
            auto join = std::make_shared<PbsmJoin>(source, target, cfg.pbsm_nx, cfg.pbsm_ny);
            return [join](const PairCallback& emit) { join->run(emit); };
          },
          v, timings);
      break;
    default:
      throw ConfigError("not a memory-intensive algorithm");
  }
}

std::string label_or_id(const std::optional<std::string>& uri, GeometryId id) {
  return uri ? *uri : std::to_string(id);
}

}  // namespace

std::string_view algorithm_name(Algorithm a) noexcept {
  for (const auto& n : kNames) {
    if (n.algorithm == a) return n.name;
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& n : kNames) {
    if (n.name == name) return n.algorithm;
  }
  std::string known;
  for (const auto& n : kNames) known += (known.empty() ? "" : ", ") + std::string(n.name);
  throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected one of: " + known + ")");
}

bool is_memory_frugal(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::Radon:
    case Algorithm::StaticRadon:
    case Algorithm::PlaneSweep:
    case Algorithm::Pbsm:
      return false;
    default:
      return true;
  }
}

std::size_t default_memory_budget() {
  std::ifstream in("/proc/meminfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("MemAvailable:", 0) != 0) continue;
    std::istringstream ss(line.substr(13));
    std::size_t kib = 0;
    if (ss >> kib && kib > 0) return kib / 4 * 3 * 1024;
  }
  return std::size_t{4} << 30;
}

std::unique_ptr<SourceIndex> build_source_index(std::span<const Geometry> indexed, const AlgorithmConfig& cfg) {
  if (indexed.empty()) throw EmptyDataset("cannot index an empty dataset");
  switch (cfg.algorithm) {
    case Algorithm::Giant:
      return std::make_unique<CompactGrid>(indexed, dynamic_granularity(indexed));
    case Algorithm::StaticGiant:
      return std::make_unique<CompactGrid>(indexed, static_grid(cfg, extent_of(indexed)));
    case Algorithm::StripeSweep:
      return std::make_unique<StripeIndex>(indexed, cfg.stripe_storage, cfg.node_capacity);
    case Algorithm::RTree:
      return std::make_unique<RTree>(indexed, cfg.node_capacity);
    case Algorithm::Quadtree:
      return std::make_unique<Quadtree>(indexed, cfg.node_capacity, cfg.quadtree_max_depth);
    case Algorithm::CrTree:
      return std::make_unique<CrTree>(indexed, cfg.node_capacity, cfg.quant_bits);
    default:
      throw ConfigError(std::string(algorithm_name(cfg.algorithm)) + " does not build a source-only index");
  }
}

InterlinkResult interlink(std::span<const Geometry> source, std::span<const Geometry> target,
                          const AlgorithmConfig& cfg) {
  InterlinkResult res;
  detail::Verifier v(cfg.threads, cfg.on_verify, cfg.self_join);
  if (source.empty() || target.empty()) {
    res.links = v.finish();
    return res;
  }
  if (!is_memory_frugal(cfg.algorithm)) {
    run_intensive_algorithm(source, target, cfg, v, res.timings);
    const auto t0 = Clock::now();
    res.links = v.finish();
    res.timings.verification += Clock::now() - t0;
    return res;
  }
  res.swapped = cfg.allow_swap && target.size() < source.size();
  const auto indexed = res.swapped ? target : source;
  const auto probe = res.swapped ? source : target;
  const auto t0 = Clock::now();
  const auto index = build_source_index(indexed, cfg);
  const auto t1 = Clock::now();
  probe_all(*index, indexed, probe, !res.swapped, v);
  res.links = v.finish();
  const auto t2 = Clock::now();
  res.timings.filtering = t1 - t0;
  res.timings.verification = t2 - t1;
  return res;
}

std::vector<LinkTriple> to_triples(const LinkSet& links, const std::function<std::string(GeometryId)>& source_label,
                                   const std::function<std::string(GeometryId)>& target_label) {
  std::vector<LinkTriple> out;
  out.reserve(links.size());
  for (const Link& l : links.links()) {
    out.push_back({source_label(l.source), std::string(relation_name(l.relation)), target_label(l.target)});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FileInterlinkResult interlink_files(const DatasetDescriptor& source, const DatasetDescriptor& target,
                                    const AlgorithmConfig& cfg) {
  FileInterlinkResult res;
  InterlinkResult& run = res.run;
  const std::size_t budget = budget_of(cfg);
  detail::Verifier v(cfg.threads, cfg.on_verify, cfg.self_join);

  if (!is_memory_frugal(cfg.algorithm)) {
    const auto t0 = Clock::now();
    LoadedDataset s = read_dataset(source, budget);
    std::size_t used = 0;
    for (const auto& p : s.profiles) used += p.geometry.memory_bytes();
    LoadedDataset t = read_dataset(target, budget - std::min(used, budget));
    res.source_skips = s.skips;
    res.target_skips = t.skips;
    const Dataset sg = s.take_geometries();
    const Dataset tg = t.take_geometries();
    run.timings.filtering += Clock::now() - t0;
    if (!sg.empty() && !tg.empty()) run_intensive_algorithm(sg, tg, cfg, v, run.timings);
    const auto t1 = Clock::now();
    run.links = v.finish();
    run.timings.verification += Clock::now() - t1;
    res.triples = to_triples(
        run.links, [&](GeometryId id) { return s.label(id); }, [&](GeometryId id) { return t.label(id); });
    return res;
  }

  // Memory-frugal: load the side with fewer records, stream the other.
  run.swapped = cfg.allow_swap && estimate_record_count(target) < estimate_record_count(source);
  const DatasetDescriptor& loaded_desc = run.swapped ? target : source;
  const DatasetDescriptor& streamed_desc = run.swapped ? source : target;

  const auto t0 = Clock::now();
  LoadedDataset loaded = read_dataset(loaded_desc, budget);
  const Dataset indexed = loaded.take_geometries();
  std::unique_ptr<SourceIndex> index;
  if (!indexed.empty()) index = build_source_index(indexed, cfg);
  const auto t1 = Clock::now();

  // Labels of streamed records are kept only for those that produced links.
  std::map<GeometryId, std::string> streamed_labels;
  ProfileStream stream = stream_target(streamed_desc);
  // With a pool, streamed geometries are gathered in chunks so the queued
  // pairs can point at them until the chunk is flushed.
  const std::size_t chunk = cfg.threads > 1 ? 1024 * cfg.threads : 1;
  std::vector<GeometryProfile> batch;
  std::vector<GeometryId> cands;
  auto process = [&] {
    for (const GeometryProfile& p : batch) {
      if (!index) break;
      index->candidates(p.geometry.mbr(), cands);
      const GeometryId pid = p.geometry.id();
      for (GeometryId c : cands) {
        if (run.swapped) {
          v.add(p.geometry, indexed[c], pid, c);
        } else {
          v.add(indexed[c], p.geometry, c, pid);
        }
      }
      if (!cands.empty()) streamed_labels.emplace(pid, label_or_id(p.uri, pid));
    }
    v.flush();
    batch.clear();
  };
  while (auto p = stream.next()) {
    batch.push_back(std::move(*p));
    if (batch.size() >= chunk) process();
  }
  process();
  run.links = v.finish();
  const auto t2 = Clock::now();
  run.timings.filtering = t1 - t0;
  run.timings.verification = t2 - t1;

  (run.swapped ? res.target_skips : res.source_skips) = loaded.skips;
  (run.swapped ? res.source_skips : res.target_skips) = stream.skips();
  auto loaded_label = [&](GeometryId id) { return loaded.label(id); };
  auto streamed_label = [&](GeometryId id) {
    auto it = streamed_labels.find(id);
    return it == streamed_labels.end() ? std::to_string(id) : it->second;
  };
  if (run.swapped) {
    res.triples = to_triples(run.links, streamed_label, loaded_label);
  } else {
    res.triples = to_triples(run.links, loaded_label, streamed_label);
  }
  return res;
}

}  // namespace geolink
