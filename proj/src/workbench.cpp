#include "geolink/workbench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <sstream>

#include "geolink/error.hpp"
#include "geolink/wkt.hpp"

namespace geolink {

using nlohmann::json;

// ---- oracle ---------------------------------------------------------------

LinkSet brute_force_oracle(std::span<const Geometry> source, std::span<const Geometry> target, std::size_t cap,
                           bool self_join) {
  if (!source.empty() && target.size() > cap / source.size()) {
    throw CapExceeded("oracle over " + std::to_string(source.size()) + " x " + std::to_string(target.size()) +
                      " pairs exceeds the cap of " + std::to_string(cap));
  }
  LinkSet out;
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (std::size_t j = 0; j < target.size(); ++j) {
      if (self_join && !(i < j)) continue;
      if (!mbr_intersects(source[i].mbr(), target[j].mbr())) continue;
      verify_into(out, source[i], target[j], static_cast<GeometryId>(i), static_cast<GeometryId>(j));
    }
  }
  out.normalize();
  return out;
}

std::string links_hash(const LinkSet& links) {
  auto sorted = links.links();
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ULL;
    }
  };
  for (const Link& l : sorted) {
    mix(l.source);
    mix(static_cast<std::uint64_t>(l.relation));
    mix(l.target);
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

// ---- documentation and parameters ---------------------------------------

namespace {

ParamDoc int_param(std::string name, std::string desc, long def, long lo, long hi, bool searchable = true) {
  ParamDoc p;
  p.name = std::move(name);
  p.description = std::move(desc);
  p.default_value = std::to_string(def);
  p.min = static_cast<double>(lo);
  p.max = static_cast<double>(hi);
  p.integer = true;
  p.searchable = searchable;
  return p;
}

ParamDoc choice_param(std::string name, std::string desc, std::vector<std::string> choices, bool searchable = true) {
  ParamDoc p;
  p.name = std::move(name);
  p.description = std::move(desc);
  p.default_value = choices.front();
  p.choices = std::move(choices);
  p.searchable = searchable;
  return p;
}

ParamDoc free_param(std::string name, std::string desc, std::string def) {
  ParamDoc p;
  p.name = std::move(name);
  p.description = std::move(desc);
  p.default_value = std::move(def);
  p.searchable = false;
  return p;
}

std::vector<ParamDoc> batch_common() {
  return {int_param("threads", "verification workers (1 = strictly serial)", 1, 1, 256, false),
          choice_param("swap", "index the smaller dataset (memory-frugal algorithms)", {"true", "false"}, false)};
}

std::vector<ParamDoc> static_grid_params() {
  return {free_param("tile-width", "static tile width in data units", "auto"),
          free_param("tile-height", "static tile height in data units", "auto"),
          int_param("divisions", "tiles per axis over the extent when the tile size is auto", 100, 10, 1000)};
}

ParamDoc capacity_param() { return int_param("node-capacity", "maximum entries per node", 16, 4, 64); }

std::vector<ParamDoc> progressive_common() {
  return {int_param("budget", "maximum number of verifications (BU)", 1000, 1, 1000000000, false),
          choice_param("scheme", "weighting scheme", {"js", "cf", "x2", "mbro", "isp"}),
          choice_param("secondary-scheme", "tie-breaking scheme of a composite", {"none", "cf", "js", "x2", "mbro", "isp"},
                       false),
          choice_param("mbro-mode", "MBR overlap normalization", {"jaccard", "min-area"}, false)};
}

AlgorithmDoc batch_doc(std::string name, std::string summary, std::vector<ParamDoc> params) {
  AlgorithmDoc d{std::move(name), std::move(summary), false, false, std::move(params)};
  for (auto& p : batch_common()) d.parameters.push_back(std::move(p));
  return d;
}

AlgorithmDoc progressive_doc(std::string name, std::string summary, std::vector<ParamDoc> extra = {}) {
  AlgorithmDoc d{std::move(name), std::move(summary), true, false, progressive_common()};
  for (auto& p : extra) d.parameters.push_back(std::move(p));
  return d;
}

std::vector<AlgorithmDoc> make_docs() {
  std::vector<AlgorithmDoc> d;
  d.push_back(batch_doc("radon", "Equigrid over both datasets with tile size from their mean MBR size; each tile "
                                 "joins its sources and targets, reference point removes repeats.",
                        {}));
  d.push_back(batch_doc("static-radon", "RADON with a user-fixed tile size.", static_grid_params()));
  d.push_back(batch_doc("giant", "Equigrid over the source only (mean source MBR size); targets are streamed and "
                                 "probe the grid one at a time.",
                        {}));
  d.push_back(batch_doc("static-giant", "GIA.nt with a user-fixed tile size.", static_grid_params()));
  d.push_back(batch_doc("plane-sweep", "Sort both datasets by x_min and sweep, pairing active geometries whose "
                                       "y-extents overlap.",
                        {choice_param("sweep-structure", "active-set structure", {"list", "striped"})}));
  d.push_back(batch_doc("pbsm", "Partition both datasets on a grid and plane-sweep each partition.",
                        {choice_param("pbsm-partitions", "partition grid NxM (any NxM is accepted)",
                                      {"64x64", "16x16", "32x32", "128x128", "256x256"})}));
  d.push_back(batch_doc("stripe-sweep", "Vertical stripes of the mean source width over the source; targets probe "
                                        "the stripes they cross.",
                        {choice_param("stripe-storage", "per-stripe storage", {"map", "str"}), capacity_param()}));
  d.push_back(batch_doc("rtree", "Source R-Tree built by insertion with quadratic split; targets are window queries.",
                        {capacity_param()}));
  d.push_back(batch_doc("quadtree", "Source region quadtree; entries spanning a split stay at the node.",
                        {capacity_param(), int_param("max-depth", "maximum tree depth", 16, 4, 32)}));
  d.push_back(batch_doc("crtree", "STR-packed source tree with MBRs quantized relative to their parent.",
                        {capacity_param(), choice_param("quant-bits", "bits per quantized coordinate", {"8", "4", "16"})}));
  d.push_back(progressive_doc("pg", "Progressive GIA.nt: top-BU weighted candidates verified in decreasing weight."));
  d.push_back(progressive_doc("dpg", "Dynamic Progressive GIA.nt: as pg, but a related pair boosts the pending "
                                     "pairs sharing one of its geometries."));
  d.push_back(progressive_doc("lpg", "Local Progressive GIA.nt: a quota of candidates per target, then the top BU."));
  d.push_back(progressive_doc("gog", "Geometry-ordered GIA.nt: candidates of the geometries with the highest "
                                     "average weight first."));
  d.push_back(progressive_doc("ipg", "Iterative Progressive GIA.nt: round-robin over geometries ranked by average "
                                     "weight, one best pair each."));
  AlgorithmDoc par{"parallel",
                   "Partitions both datasets into macro cells of the source Equigrid and joins the cells on "
                   "worker threads; in progressive mode the budget is split by candidate counts.",
                   false,
                   true,
                   {int_param("workers", "worker threads", 1, 1, 256, false),
                    choice_param("macro-grid", "tiles per partition NxM", {"8x8", "2x2", "4x4", "16x16"}),
                    choice_param("mode", "batch or progressive local joins", {"batch", "progressive"}, false),
                    choice_param("local-algorithm", "budget-aware algorithm of each unit (progressive mode)",
                                 {"pg", "dpg", "lpg", "gog", "ipg", "pradon"}, false)}};
  for (auto& p : progressive_common()) par.parameters.push_back(std::move(p));
  d.push_back(progressive_doc("pradon", "Progressive RADON: tiles by candidate count, pairs in decreasing weight.",
                              {choice_param("tile-order", "tile visiting order", {"dec", "inc"})}));
  d.push_back(std::move(par));
  return d;
}

long parse_int(std::string_view name, std::string_view v, long lo, long hi) {
  long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || out < lo || out > hi) {
    throw ConfigError("parameter " + std::string(name) + ": expected an integer in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "], got '" + std::string(v) + "'");
  }
  return out;
}

double parse_positive(std::string_view name, std::string_view v) {
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !(out > 0.0) || !std::isfinite(out)) {
    throw ConfigError("parameter " + std::string(name) + ": expected a positive number, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view name, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("parameter " + std::string(name) + ": expected true or false, got '" + std::string(v) + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

const ParamDoc* find_param(const AlgorithmDoc& doc, std::string_view name) {
  for (const auto& p : doc.parameters) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void require_param(const AlgorithmDoc& doc, std::string_view name) {
  if (!find_param(doc, name)) {
    throw ConfigError("algorithm " + doc.name + " has no parameter '" + std::string(name) + "'");
  }
}

}  // namespace

const std::vector<AlgorithmDoc>& algorithm_docs() {
  static const std::vector<AlgorithmDoc> docs = make_docs();
  return docs;
}

const AlgorithmDoc& find_doc(std::string_view name) {
  for (const auto& d : algorithm_docs()) {
    if (d.name == name) return d;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string render_doc(const AlgorithmDoc& doc, const ParamMap& current) {
  std::ostringstream out;
  out << doc.name << (doc.parallel ? " (parallel)" : doc.progressive ? " (budget-aware)" : " (batch)") << "\n  "
      << doc.summary << "\n";
  if (doc.parameters.empty()) return out.str();
  out << "parameters:\n";
  for (const auto& p : doc.parameters) {
    out << "  --" << p.name << "  " << p.description << " [default " << p.default_value;
    if (!p.choices.empty()) {
      out << "; one of";
      for (const auto& c : p.choices) out << ' ' << c;
    } else if (p.min && p.max) {
      out << "; range " << fmt_double(*p.min) << ".." << fmt_double(*p.max);
    }
    out << ']';
    if (auto it = current.find(p.name); it != current.end()) out << " current " << it->second;
    out << '\n';
  }
  return out.str();
}

std::vector<std::string> search_domain(const ParamDoc& p) {
  if (!p.choices.empty()) return p.choices;
  if (!p.min || !p.max) return {p.default_value};
  const double def = std::stod(p.default_value);
  std::vector<double> v = {def, *p.min, *p.max, std::sqrt(*p.min * def), std::sqrt(def * *p.max)};
  if (p.integer) {
    for (auto& x : v) x = std::round(x);
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<std::string> out;
  for (double x : v) out.push_back(p.integer ? std::to_string(static_cast<long>(x)) : fmt_double(x));
  return out;
}

void apply_param(AlgorithmConfig& cfg, std::string_view name, std::string_view value) {
  const AlgorithmDoc& doc = find_doc(algorithm_name(cfg.algorithm));
  require_param(doc, name);
  if (name == "threads") {
    cfg.threads = static_cast<std::size_t>(parse_int(name, value, 1, 256));
  } else if (name == "swap") {
    cfg.allow_swap = parse_bool(name, value);
  } else if (name == "tile-width" || name == "tile-height") {
    if (value == "auto") {
      cfg.static_grid.reset();
      return;
    }
    const double v = parse_positive(name, value);
    if (!cfg.static_grid) cfg.static_grid = GridSpec{v, v};
    (name == "tile-width" ? cfg.static_grid->tile_width : cfg.static_grid->tile_height) = v;
  } else if (name == "divisions") {
    cfg.static_divisions = static_cast<std::size_t>(parse_int(name, value, 1, 1000000));
  } else if (name == "sweep-structure") {
    if (value == "list") {
      cfg.sweep_structure = SweepStructure::List;
    } else if (value == "striped") {
      cfg.sweep_structure = SweepStructure::Striped;
    } else {
      throw ConfigError("sweep-structure must be list or striped");
    }
  } else if (name == "pbsm-partitions") {
    const auto [nx, ny] = parse_dims(name, value);
    cfg.pbsm_nx = static_cast<int>(nx);
    cfg.pbsm_ny = static_cast<int>(ny);
  } else if (name == "stripe-storage") {
    if (value == "map") {
      cfg.stripe_storage = StripeStorage::Map;
    } else if (value == "str") {
      cfg.stripe_storage = StripeStorage::Str;
    } else {
      throw ConfigError("stripe-storage must be map or str");
    }
  } else if (name == "node-capacity") {
    cfg.node_capacity = static_cast<std::size_t>(parse_int(name, value, 4, 1 << 16));
  } else if (name == "max-depth") {
    cfg.quadtree_max_depth = static_cast<std::size_t>(parse_int(name, value, 1, 64));
  } else if (name == "quant-bits") {
    cfg.quant_bits = static_cast<int>(parse_int(name, value, 4, 16));
    if (cfg.quant_bits != 4 && cfg.quant_bits != 8 && cfg.quant_bits != 16) {
      throw ConfigError("quant-bits must be 4, 8 or 16");
    }
  }
}

namespace {

void apply_progressive(ProgressiveConfig& cfg, std::string_view name, std::string_view value) {
  if (name == "budget") {
    cfg.budget = static_cast<std::size_t>(parse_int(name, value, 1, 1000000000));
  } else if (name == "scheme") {
    cfg.scheme = parse_scheme(value);
  } else if (name == "secondary-scheme") {
    if (value == "none") {
      cfg.secondary.reset();
    } else {
      cfg.secondary = parse_scheme(value);
    }
  } else if (name == "mbro-mode") {
    if (value == "jaccard") {
      cfg.mbro_mode = MbroMode::Jaccard;
    } else if (value == "min-area") {
      cfg.mbro_mode = MbroMode::MinArea;
    } else {
      throw ConfigError("mbro-mode must be jaccard or min-area");
    }
  } else if (name == "tile-order") {
    if (value == "inc") {
      cfg.tile_order = TileOrder::Increasing;
    } else if (value == "dec") {
      cfg.tile_order = TileOrder::Decreasing;
    } else {
      throw ConfigError("tile-order must be inc or dec");
    }
  }
}

ParamMap progressive_values(const ProgressiveConfig& cfg) {
  return {
      {"budget", std::to_string(cfg.budget)},
      {"scheme", std::string(scheme_name(cfg.scheme))},
      {"secondary-scheme", cfg.secondary ? std::string(scheme_name(*cfg.secondary)) : "none"},
      {"mbro-mode", cfg.mbro_mode == MbroMode::Jaccard ? "jaccard" : "min-area"},
      {"tile-order", cfg.tile_order == TileOrder::Increasing ? "inc" : "dec"},
  };
}

ParamMap documented(const AlgorithmDoc& doc, const ParamMap& all) {
  ParamMap out;
  for (const auto& p : doc.parameters) out[p.name] = all.at(p.name);
  return out;
}

}  // namespace

std::pair<std::size_t, std::size_t> parse_dims(std::string_view flag, std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos) throw ConfigError(std::string(flag) + ": expected NxM, got '" + std::string(text) + "'");
  const auto n = parse_int(flag, text.substr(0, x), 1, 1 << 20);
  const auto m = parse_int(flag, text.substr(x + 1), 1, 1 << 20);
  return {static_cast<std::size_t>(n), static_cast<std::size_t>(m)};
}

void apply_param(ProgressiveConfig& cfg, std::string_view name, std::string_view value) {
  require_param(find_doc(progressive_name(cfg.algorithm)), name);
  apply_progressive(cfg, name, value);
}

void apply_param(ParallelConfig& cfg, std::string_view name, std::string_view value) {
  require_param(find_doc("parallel"), name);
  if (name == "workers") {
    cfg.workers = static_cast<std::size_t>(parse_int(name, value, 1, 256));
  } else if (name == "macro-grid") {
    std::tie(cfg.macro_x, cfg.macro_y) = parse_dims(name, value);
  } else if (name == "mode") {
    if (value == "batch") {
      cfg.mode = ParallelMode::Batch;
    } else if (value == "progressive") {
      cfg.mode = ParallelMode::Progressive;
    } else {
      throw ConfigError("mode must be batch or progressive");
    }
  } else if (name == "local-algorithm") {
    cfg.progressive.algorithm = parse_progressive(value);
  } else {
    apply_progressive(cfg.progressive, name, value);
  }
}

ParamMap describe(const AlgorithmConfig& cfg) {
  ParamMap all = {
      {"threads", std::to_string(cfg.threads)},
      {"swap", cfg.allow_swap ? "true" : "false"},
      {"tile-width", cfg.static_grid ? fmt_double(cfg.static_grid->tile_width) : "auto"},
      {"tile-height", cfg.static_grid ? fmt_double(cfg.static_grid->tile_height) : "auto"},
      {"divisions", std::to_string(cfg.static_divisions)},
      {"sweep-structure", cfg.sweep_structure == SweepStructure::List ? "list" : "striped"},
      {"pbsm-partitions", std::to_string(cfg.pbsm_nx) + "x" + std::to_string(cfg.pbsm_ny)},
      {"stripe-storage", cfg.stripe_storage == StripeStorage::Map ? "map" : "str"},
      {"node-capacity", std::to_string(cfg.node_capacity)},
      {"max-depth", std::to_string(cfg.quadtree_max_depth)},
      {"quant-bits", std::to_string(cfg.quant_bits)},
  };
  return documented(find_doc(algorithm_name(cfg.algorithm)), all);
}

ParamMap describe(const ProgressiveConfig& cfg) {
  return documented(find_doc(progressive_name(cfg.algorithm)), progressive_values(cfg));
}

ParamMap describe(const ParallelConfig& cfg) {
  ParamMap all = progressive_values(cfg.progressive);
  all["workers"] = std::to_string(cfg.workers);
  all["macro-grid"] = std::to_string(cfg.macro_x) + "x" + std::to_string(cfg.macro_y);
  all["mode"] = cfg.mode == ParallelMode::Batch ? "batch" : "progressive";
  all["local-algorithm"] = std::string(progressive_name(cfg.progressive.algorithm));
  return documented(find_doc("parallel"), all);
}

// ---- benchmarking ---------------------------------------------------------

namespace {

std::map<std::string, std::size_t> relation_counts(const LinkSet& l) {
  std::map<std::string, std::size_t> out;
  for (std::size_t r = 0; r < kRelationCount; ++r) {
    out[std::string(relation_name(static_cast<Relation>(r)))] = l.count(static_cast<Relation>(r));
  }
  return out;
}

template <typename Run>
auto timed_runs(std::size_t reps, bool warmup, Run&& run) {
  if (warmup) run();
  reps = std::max<std::size_t>(reps, 1);
  double tf = 0, tv = 0;
  decltype(run()) last;
  for (std::size_t i = 0; i < reps; ++i) {
    last = run();
    tf += last.timings.filtering_ms();
    tv += last.timings.verification_ms();
  }
  return std::tuple{std::move(last), tf / static_cast<double>(reps), tv / static_cast<double>(reps)};
}

std::size_t budget_for(double fraction, std::size_t candidates) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(candidates))));
}

json row_json(const BenchmarkRow& r) {
  json j = {{"kind", r.kind},
            {"algorithm", r.algorithm},
            {"params", r.params},
            {"t_f_ms", r.t_f_ms},
            {"t_v_ms", r.t_v_ms},
            {"verified", r.verified},
            {"related", r.related},
            {"links", r.links},
            {"per_relation_counts", r.per_relation},
            {"links_hash", r.links_hash}};
  if (r.matches_reference) j["matches_reference"] = *r.matches_reference;
  if (r.error) j["error"] = *r.error;
  if (r.budget_fraction) j["budget_fraction"] = *r.budget_fraction;
  if (r.budget) j["budget"] = *r.budget;
  if (r.precision) j["precision"] = *r.precision;
  if (r.recall) j["recall"] = *r.recall;
  if (r.pgr) j["pgr"] = *r.pgr;
  return j;
}

template <typename T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

BenchmarkRow batch_row(const AlgorithmConfig& cfg, const InterlinkResult& r) {
  BenchmarkRow row;
  row.kind = "batch";
  row.algorithm = std::string(algorithm_name(cfg.algorithm));
  row.params = describe(cfg);
  row.t_f_ms = r.timings.filtering_ms();
  row.t_v_ms = r.timings.verification_ms();
  row.verified = r.links.verified();
  row.related = r.links.related();
  row.links = r.links.size();
  row.per_relation = relation_counts(r.links);
  row.links_hash = links_hash(r.links);
  return row;
}

BenchmarkReport run_benchmark(std::span<const Geometry> source, std::span<const Geometry> target,
                              const SuiteConfig& cfg) {
  if (cfg.batch.empty() && cfg.progressive.empty()) throw ConfigError("benchmark needs at least one algorithm");
  BenchmarkReport rep;
  AlgorithmConfig ref_cfg;
  ref_cfg.algorithm = Algorithm::Giant;
  const LinkSet reference = interlink(source, target, ref_cfg).links;
  rep.candidates = reference.verified();
  rep.total_related = reference.related();
  std::optional<LinkSet> oracle;
  if (source.empty() || target.size() <= cfg.oracle_cap / source.size()) {
    oracle = brute_force_oracle(source, target, cfg.oracle_cap);
    rep.oracle_hash = links_hash(*oracle);
  }

  for (const auto& c : cfg.batch) {
    try {
      auto [res, tf, tv] = timed_runs(cfg.repetitions, cfg.warmup, [&] { return interlink(source, target, c); });
      BenchmarkRow row = batch_row(c, res);
      row.t_f_ms = tf;
      row.t_v_ms = tv;
      row.matches_reference = res.links.same_links(reference) && (!oracle || res.links.same_links(*oracle));
      rep.batch_equal = rep.batch_equal && *row.matches_reference;
      rep.rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      BenchmarkRow row;
      row.kind = "batch";
      row.algorithm = std::string(algorithm_name(c.algorithm));
      row.error = e.what();
      rep.batch_equal = false;
      rep.rows.push_back(std::move(row));
    }
  }

  for (const auto& base : cfg.progressive) {
    for (double f : cfg.budget_fractions) {
      ProgressiveConfig c = base;
      c.budget = budget_for(f, rep.candidates);
      BenchmarkRow row;
      row.kind = "progressive";
      row.algorithm = std::string(progressive_name(c.algorithm));
      row.budget_fraction = f;
      row.budget = c.budget;
      try {
        auto [res, tf, tv] =
            timed_runs(cfg.repetitions, cfg.warmup, [&] { return run_progressive(source, target, c); });
        row.params = describe(c);
        row.t_f_ms = tf;
        row.t_v_ms = tv;
        row.verified = res.links.verified();
        row.related = res.links.related();
        row.links = res.links.size();
        row.per_relation = relation_counts(res.links);
        row.links_hash = links_hash(res.links);
        const auto m = compute_metrics(res.trace, rep.total_related, c.budget);
        row.precision = m.precision;
        row.recall = m.recall;
        row.pgr = m.pgr;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

std::string row_to_json(const BenchmarkRow& r) { return row_json(r).dump(2); }

std::string report_to_json(const BenchmarkReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back(row_json(row));
  json j = {{"version", r.version},
            {"source", r.source},
            {"target", r.target},
            {"candidates", r.candidates},
            {"total_related", r.total_related},
            {"batch_equal", r.batch_equal},
            {"rows", rows}};
  if (r.oracle_hash) j["oracle_hash"] = *r.oracle_hash;
  return j.dump(2);
}

BenchmarkReport report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    BenchmarkReport r;
    r.version = j.at("version").get<int>();
    if (r.version != 1) throw FormatError("unsupported report version " + std::to_string(r.version));
    r.source = j.value("source", "");
    r.target = j.value("target", "");
    r.candidates = j.value("candidates", std::size_t{0});
    r.total_related = j.value("total_related", std::size_t{0});
    r.batch_equal = j.value("batch_equal", true);
    r.oracle_hash = opt<std::string>(j, "oracle_hash");
    for (const auto& jr : j.at("rows")) {
      BenchmarkRow row;
      row.kind = jr.at("kind").get<std::string>();
      row.algorithm = jr.at("algorithm").get<std::string>();
      row.params = jr.value("params", ParamMap{});
      row.t_f_ms = jr.value("t_f_ms", 0.0);
      row.t_v_ms = jr.value("t_v_ms", 0.0);
      row.verified = jr.value("verified", std::size_t{0});
      row.related = jr.value("related", std::size_t{0});
      row.links = jr.value("links", std::size_t{0});
      row.per_relation = jr.value("per_relation_counts", std::map<std::string, std::size_t>{});
      row.links_hash = jr.value("links_hash", "");
      row.matches_reference = opt<bool>(jr, "matches_reference");
      row.error = opt<std::string>(jr, "error");
      row.budget_fraction = opt<double>(jr, "budget_fraction");
      row.budget = opt<std::size_t>(jr, "budget");
      row.precision = opt<double>(jr, "precision");
      row.recall = opt<double>(jr, "recall");
      row.pgr = opt<double>(jr, "pgr");
      r.rows.push_back(std::move(row));
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

std::string render_table(const BenchmarkReport& r) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "kind" << std::setw(14) << "algorithm" << std::right << std::setw(8)
      << "budget" << std::setw(12) << "t_f_ms" << std::setw(12) << "t_v_ms" << std::setw(10) << "verified"
      << std::setw(10) << "related" << std::setw(8) << "pgr" << "  status\n";
  out << std::fixed;
  for (const auto& row : r.rows) {
    out << std::left << std::setw(12) << row.kind << std::setw(14) << row.algorithm << std::right << std::setw(8)
        << (row.budget ? std::to_string(*row.budget) : "-") << std::setw(12) << std::setprecision(2) << row.t_f_ms
        << std::setw(12) << row.t_v_ms << std::setw(10) << row.verified << std::setw(10) << row.related;
    if (row.pgr) {
      out << std::setw(8) << std::setprecision(3) << *row.pgr;
    } else {
      out << std::setw(8) << "-";
    }
    if (row.error) {
      out << "  error: " << *row.error;
    } else if (row.matches_reference) {
      out << (*row.matches_reference ? "  ok" : "  MISMATCH");
    } else {
      out << "  ok";
    }
    out << '\n';
  }
  out << "candidates " << r.candidates << ", related pairs " << r.total_related << ", batch outputs "
      << (r.batch_equal ? "equal" : "DIFFER") << '\n';
  return out.str();
}

// ---- grid search ----------------------------------------------------------

Objective parse_objective(std::string_view name) {
  if (name == "min-runtime") return Objective::MinRuntime;
  if (name == "max-pgr") return Objective::MaxPgr;
  throw ConfigError("objective must be min-runtime or max-pgr");
}

GridSearchResult grid_search(std::span<const Geometry> source, std::span<const Geometry> target,
                             const GridSearchConfig& cfg) {
  const AlgorithmDoc& doc = find_doc(cfg.algorithm);
  if (doc.parallel) throw ConfigError("grid search covers single algorithms, not the parallel executor");
  if (cfg.objective == Objective::MaxPgr && !doc.progressive) {
    throw ConfigError("max-pgr applies to budget-aware algorithms only");
  }
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& p : doc.parameters) {
    if (auto it = cfg.domains.find(p.name); it != cfg.domains.end()) {
      axes.emplace_back(p.name, it->second);
    } else if (p.searchable) {
      axes.emplace_back(p.name, search_domain(p));
    }
  }
  for (const auto& [name, values] : cfg.domains) {
    require_param(doc, name);
    if (values.empty()) throw ConfigError("empty search domain for " + name);
  }

  std::size_t candidates = 0, total_related = 0;
  if (doc.progressive) {
    AlgorithmConfig ref;
    const LinkSet l = interlink(source, target, ref).links;
    candidates = l.verified();
    total_related = l.related();
  }

  GridSearchResult out;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    ParamMap params;
    for (std::size_t a = 0; a < axes.size(); ++a) params[axes[a].first] = axes[a].second[idx[a]];
    Trial trial{params, 0.0};
    if (doc.progressive) {
      ProgressiveConfig c;
      c.algorithm = parse_progressive(cfg.algorithm);
      c.budget = budget_for(cfg.budget_fraction, candidates);
      for (const auto& [k, v] : params) apply_param(c, k, v);
      auto [res, tf, tv] = timed_runs(cfg.repetitions, false, [&] { return run_progressive(source, target, c); });
      trial.score = cfg.objective == Objective::MaxPgr ? compute_metrics(res.trace, total_related, c.budget).pgr
                                                       : tf + tv;
    } else {
      AlgorithmConfig c;
      c.algorithm = parse_algorithm(cfg.algorithm);
      for (const auto& [k, v] : params) apply_param(c, k, v);
      auto [res, tf, tv] = timed_runs(cfg.repetitions, false, [&] { return interlink(source, target, c); });
      trial.score = tf + tv;
    }
    out.trials.push_back(std::move(trial));

    std::size_t a = 0;
    while (a < axes.size() && ++idx[a] == axes[a].second.size()) idx[a++] = 0;
    if (a == axes.size()) break;
  }
  for (std::size_t i = 1; i < out.trials.size(); ++i) {
    const bool better = cfg.objective == Objective::MaxPgr ? out.trials[i].score > out.trials[out.best].score
                                                           : out.trials[i].score < out.trials[out.best].score;
    if (better) out.best = i;
  }
  return out;
}

// ---- synthetic data -------------------------------------------------------

SynthProfile parse_profile(std::string_view name) {
  if (name == "uniform") return SynthProfile::Uniform;
  if (name == "clustered") return SynthProfile::Clustered;
  if (name == "skewed") return SynthProfile::Skewed;
  throw ConfigError("profile must be uniform, clustered or skewed");
}

namespace {

double snap(double v) { return std::round(v * 8.0) / 8.0; }

class ShapeMaker {
 public:
  explicit ShapeMaker(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  /// A rectangle, a convex polygon or a polyline of roughly w x h around (cx, cy).
  Geometry shape(double cx, double cy, double w, double h, GeometryId id) {
    for (;;) {
      try {
        const int kind = pick(20);
        if (kind < 1) return rect(cx, cy, w, h, id);
        if (kind < 2) return convex(cx, cy, w, h, id);
        if (kind < 4) return ell(cx, cy, w, h, id);
        return polyline(cx, cy, w, h, id);
      } catch (const InvalidGeometry&) {
        w = std::max(w, 1.0);
        h = std::max(h, 1.0);
      }
    }
  }

  static Geometry rect(double cx, double cy, double w, double h, GeometryId id) {
    const double x0 = snap(cx - w / 2), x1 = snap(cx + w / 2), y0 = snap(cy - h / 2), y1 = snap(cy + h / 2);
    return Geometry::polygon({{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}}, id);
  }

  Geometry convex(double cx, double cy, double w, double h, GeometryId id) {
    const int n = 3 + pick(4);
    std::vector<double> ang;
    for (int i = 0; i < n; ++i) ang.push_back((i + uniform(0.15, 0.85)) * 2 * std::numbers::pi / n);
    std::vector<Coordinate> ring;
    for (double a : ang) ring.push_back({snap(cx + w / 2 * std::cos(a)), snap(cy + h / 2 * std::sin(a))});
    ring.push_back(ring.front());
    return Geometry::polygon({ring}, id);
  }

  /// L-shaped polygon filling one corner of its MBR.
  Geometry ell(double cx, double cy, double w, double h, GeometryId id) {
    const double x0 = snap(cx - w / 2), x1 = snap(cx + w / 2), y0 = snap(cy - h / 2), y1 = snap(cy + h / 2);
    const double xm = snap(x0 + (x1 - x0) * 0.25), ym = snap(y0 + (y1 - y0) * 0.25);
    std::vector<Coordinate> r = {{x0, y0}, {x1, y0}, {x1, ym}, {xm, ym}, {xm, y1}, {x0, y1}, {x0, y0}};
    if (pick(2)) {
      for (auto& p : r) p.x = x0 + x1 - p.x;
      std::reverse(r.begin(), r.end());
    }
    return Geometry::polygon({r}, id);
  }

  /// Zigzag from one side of the box to the other.
  Geometry polyline(double cx, double cy, double w, double h, GeometryId id) {
    const int n = pick(3) == 0 ? 3 : 2;
    const bool up = chance(0.93);
    std::vector<Coordinate> pts;
    for (int i = 0; i < n; ++i) {
      const double f = static_cast<double>(i) / (n - 1);
      const double y = (up ? f : 1 - f) + (n > 2 ? uniform(-0.2, 0.2) : 0.0);
      pts.push_back({snap(cx - w / 2 + f * w), snap(cy - h / 2 + y * h)});
    }
    return Geometry::line_string(pts, id);
  }

  /// A target related to `s` by construction.
  Geometry derived(const Geometry& s, GeometryId id) {
    const Mbr& m = s.mbr();
    Coordinate c{0, 0};
    const auto& ring = s.rings().front();
    const std::size_t n = s.is_polygon() ? ring.size() - 1 : ring.size();
    for (std::size_t i = 0; i < n; ++i) c = {c.x + ring[i].x, c.y + ring[i].y};
    c = {c.x / n, c.y / n};
    const int mode = pick(4);
    try {
      if (mode == 0) return transformed(s, id, [](Coordinate p) { return p; });
      if (mode == 1 && s.is_polygon()) {
        return transformed(s, id, [&](Coordinate p) { return Coordinate{c.x + (p.x - c.x) / 2, c.y + (p.y - c.y) / 2}; });
      }
      if (mode == 2) {
        const double dx = snap(m.width() * 0.3), dy = snap(m.height() * 0.2);
        return transformed(s, id, [&](Coordinate p) { return Coordinate{p.x + dx, p.y + dy}; });
      }
      // A line through an interior point (polygons) or a vertex (lines).
      const Coordinate p = s.is_polygon() ? Coordinate{snap(c.x), snap(c.y)} : ring[ring.size() / 2];
      if (s.is_polygon() && pick(2) == 0) {
        return Geometry::line_string({{snap(m.x_min - 1), p.y}, {snap(m.x_max + 1), p.y}}, id);
      }
      return Geometry::line_string({{p.x - 1, snap(m.y_min - 1)}, {p.x + 1, snap(m.y_max + 1)}}, id);
    } catch (const InvalidGeometry&) {
      return transformed(s, id, [](Coordinate p) { return p; });
    }
  }

 private:
  template <typename F>
  static Geometry transformed(const Geometry& g, GeometryId id, F&& f) {
    auto rings = g.rings();
    for (auto& r : rings) {
      for (auto& p : r) {
        const Coordinate q = f(p);
        p = {snap(q.x), snap(q.y)};
      }
    }
    return g.is_line() ? Geometry::line_string(std::move(rings.front()), id) : Geometry::polygon(std::move(rings), id);
  }

  std::mt19937_64 rng_;
};

}  // namespace

SynthData synth_generate(const SynthConfig& cfg) {
  if (cfg.related_fraction < 0.0 || cfg.related_fraction > 1.0) {
    throw ConfigError("related fraction must lie in [0, 1]");
  }
  ShapeMaker mk(cfg.seed);
  SynthData out;
  const double extent = 12.0 * std::sqrt(static_cast<double>(std::max<std::size_t>(cfg.source_count, 1)));
  const std::size_t nclusters = std::max<std::size_t>(1, cfg.source_count / 40);
  std::vector<Coordinate> centers;
  for (std::size_t k = 0; k < nclusters; ++k) centers.push_back({mk.uniform(0, extent), mk.uniform(0, extent)});

  auto size = [&] {
    const double scale = cfg.profile == SynthProfile::Skewed ? std::exp(mk.normal(0.6)) : 1.0;
    return std::pair{mk.uniform(1.5, 4.0) * scale, mk.uniform(1.5, 4.0) * scale};
  };
  auto position = [&](std::size_t cluster) -> Coordinate {
    switch (cfg.profile) {
      case SynthProfile::Uniform:
        return {mk.uniform(0, extent), mk.uniform(0, extent)};
      case SynthProfile::Skewed:
        return {extent * std::pow(mk.uniform(0, 1), 3), extent * std::pow(mk.uniform(0, 1), 3)};
      case SynthProfile::Clustered:
        break;
    }
    const Coordinate& c = centers[cluster % centers.size()];
    return {c.x + mk.normal(8.0), c.y + mk.normal(8.0)};
  };

  // Geometries come out cluster by cluster, as a region-ordered export would.
  std::vector<std::size_t> cluster_of;
  for (std::size_t i = 0; i < cfg.source_count; ++i) {
    cluster_of.push_back(static_cast<std::size_t>(mk.pick(static_cast<int>(nclusters))));
  }
  std::sort(cluster_of.begin(), cluster_of.end());
  for (std::size_t i = 0; i < cfg.source_count; ++i) {
    const auto p = position(cluster_of[i]);
    const auto [w, h] = size();
    out.source.push_back(mk.shape(p.x, p.y, w, h, static_cast<GeometryId>(i)));
  }
  const bool derive = cfg.profile != SynthProfile::Uniform && !out.source.empty();
  for (std::size_t j = 0; j < cfg.target_count; ++j) {
    const auto id = static_cast<GeometryId>(j);
    // Target j pairs with a source at the same relative position, so prefixes
    // keep their derived pairs.
    const std::size_t i = out.source.empty() ? 0 : j * out.source.size() / cfg.target_count;
    if (derive && mk.chance(cfg.related_fraction)) {
      out.target.push_back(mk.derived(out.source[i], id));
      continue;
    }
    const auto p = position(cluster_of.empty() ? 0 : cluster_of[i]);
    const auto [w, h] = size();
    out.target.push_back(mk.shape(p.x, p.y, w, h, id));
  }
  return out;
}

SynthData synth_subset(const SynthData& d, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) throw ConfigError("subset fraction must lie in (0, 1]");
  auto prefix = [&](const Dataset& v) {
    const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(v.size())));
    return Dataset(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(n, v.size())));
  };
  return {prefix(d.source), prefix(d.target)};
}

void write_synth(const SynthData& d, const std::filesystem::path& source_path,
                 const std::filesystem::path& target_path) {
  auto write = [](const Dataset& v, const std::filesystem::path& p, const char* prefix) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + p.string() + " for writing");
    for (std::size_t i = 0; i < v.size(); ++i) out << prefix << i << '\t' << to_wkt(v[i]) << '\n';
    if (!out) throw IoFailure("failed writing " + p.string());
  };
  write(d.source, source_path, "src:");
  write(d.target, target_path, "tgt:");
}

}  // namespace geolink
