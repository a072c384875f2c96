// geolink command line interface.
//
// Exit codes: 0 success, 1 run error, 2 configuration error.

#include <CLI11.hpp>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "geolink/batch_pipeline.hpp"
#include "geolink/data_io.hpp"
#include "geolink/error.hpp"
#include "geolink/parallel_exec.hpp"
#include "geolink/progressive.hpp"
#include "geolink/workbench.hpp"

namespace {

using namespace geolink;

constexpr int kRunError = 1;
constexpr int kConfigError = 2;

/// How delimited input files are read; geometry column -1 means "detect".
struct InputOptions {
  std::string source;
  std::string target;
  std::string format = "auto";
  int geometry_column = -1;
  int uri_column = -1;
  bool header = false;
};

void add_inputs(CLI::App* cmd, InputOptions& in, bool target_required = true) {
  cmd->add_option("--source", in.source, "source dataset (TSV, CSV or GeoJSON)")->required();
  auto* t = cmd->add_option("--target", in.target, "target dataset");
  if (target_required) t->required();
  cmd->add_option("--format", in.format, "input format: auto, tsv, csv or geojson")
      ->check(CLI::IsMember({"auto", "tsv", "csv", "geojson"}));
  cmd->add_option("--geometry-column", in.geometry_column, "0-based WKT column of delimited files (default: detect)");
  cmd->add_option("--uri-column", in.uri_column, "0-based URI column of delimited files");
  cmd->add_flag("--header", in.header, "delimited files start with a header line");
}

bool looks_like_wkt(std::string_view f) {
  while (!f.empty() && (f.front() == ' ' || f.front() == '"')) f.remove_prefix(1);
  for (const char* kw : {"POINT", "LINESTRING", "POLYGON", "MULTI", "GEOMETRYCOLLECTION"}) {
    const std::string_view k(kw);
    if (f.size() >= k.size()) {
      bool eq = true;
      for (std::size_t i = 0; i < k.size(); ++i) eq = eq && std::toupper(static_cast<unsigned char>(f[i])) == k[i];
      if (eq) return true;
    }
  }
  return false;
}

DatasetDescriptor descriptor(const std::string& path, const InputOptions& in) {
  std::string fmt = in.format;
  if (fmt == "auto") {
    const std::string ext = std::filesystem::path(path).extension().string();
    fmt = ext == ".csv" ? "csv" : (ext == ".geojson" || ext == ".json") ? "geojson" : "tsv";
  }
  DatasetDescriptor d = fmt == "geojson" ? DatasetDescriptor::geojson(path)
                        : fmt == "csv"   ? DatasetDescriptor::csv(path)
                                         : DatasetDescriptor::tsv(path);
  if (fmt == "geojson") return d;
  d.has_header = in.header;
  if (in.geometry_column >= 0) {
    d.geometry_column = in.geometry_column;
  } else {
    // First field that reads as WKT on the first data line; a URI is assumed
    // in column 0 when the geometry is elsewhere.
    std::ifstream f(path);
    std::string line;
    if (in.header) std::getline(f, line);
    if (std::getline(f, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto fields = split_delimited(line, d.delimiter);
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (looks_like_wkt(fields[i])) {
          d.geometry_column = static_cast<int>(i);
          if (i > 0 && in.uri_column < 0) d.uri_column = 0;
          break;
        }
      }
    }
  }
  if (in.uri_column >= 0) d.uri_column = in.uri_column;
  return d;
}

struct Loaded {
  LoadedDataset source;
  LoadedDataset target;
  Dataset s;
  Dataset t;
};

Loaded load(const InputOptions& in) {
  Loaded l;
  l.source = read_dataset(descriptor(in.source, in));
  l.target = read_dataset(descriptor(in.target, in));
  l.s = l.source.take_geometries();
  l.t = l.target.take_geometries();
  const auto skipped = l.source.skips.total() + l.target.skips.total();
  if (skipped) std::cerr << "skipped " << skipped << " unusable records\n";
  return l;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  out << text << '\n';
}

/// Registers one option per documented parameter of the given kinds.
void add_params(CLI::App* cmd, std::map<std::string, std::string>& values, bool progressive, bool parallel) {
  std::set<std::string> seen;
  for (const auto& d : algorithm_docs()) {
    if (d.progressive != progressive || d.parallel != parallel) continue;
    for (const auto& p : d.parameters) {
      if (!seen.insert(p.name).second) continue;
      cmd->add_option_function<std::string>(
          "--" + p.name, [&values, name = p.name](const std::string& v) { values[name] = v; },
          p.description + " (default " + p.default_value + ")");
    }
  }
}

template <typename Config>
void apply_all(Config& cfg, const std::map<std::string, std::string>& values) {
  for (const auto& [k, v] : values) apply_param(cfg, k, v);
}

void summarize(const LinkSet& links, const RunTimings& t) {
  std::cerr << "verified " << links.verified() << ", related " << links.related() << ", links " << links.size()
            << ", filtering " << t.filtering_ms() << " ms, verification " << t.verification_ms() << " ms\n";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geolink: topological interlinking of geometry datasets"};
  app.require_subcommand(1);

  // interlink
  InputOptions il_in;
  std::string il_algorithm = "giant", il_output, il_report;
  bool il_self = false;
  std::map<std::string, std::string> il_params;
  auto* il = app.add_subcommand("interlink", "compute all links with a batch algorithm");
  add_inputs(il, il_in);
  il->add_option("--algorithm,--tree", il_algorithm, "batch algorithm (see `geolink inspect`)");
  il->add_option("--output", il_output, "link TSV: source, relation, target");
  il->add_option("--report", il_report, "JSON run report");
  il->add_flag("--self-join", il_self, "source and target are the same dataset; keep pairs with s < t");
  add_params(il, il_params, false, false);

  // progressive
  InputOptions pr_in;
  std::string pr_algorithm = "pg", pr_output, pr_report, pr_trace;
  std::map<std::string, std::string> pr_params;
  auto* pr = app.add_subcommand("progressive", "verify at most --budget candidate pairs, most promising first");
  add_inputs(pr, pr_in);
  pr->add_option("--algorithm", pr_algorithm, "pg, dpg, lpg, gog, ipg or pradon");
  pr->add_option("--output", pr_output, "link TSV");
  pr->add_option("--report", pr_report, "JSON run report");
  pr->add_option("--trace", pr_trace, "trace TSV: step, source, target, related");
  add_params(pr, pr_params, true, false);

  // parallel
  InputOptions pa_in;
  std::string pa_output, pa_report, pa_trace;
  std::map<std::string, std::string> pa_params;
  auto* pa = app.add_subcommand("parallel", "partitioned multi-worker interlinking");
  add_inputs(pa, pa_in);
  pa->add_option("--output", pa_output, "link TSV");
  pa->add_option("--report", pa_report, "JSON run report");
  pa->add_option("--trace", pa_trace, "trace TSV (progressive mode)");
  add_params(pa, pa_params, false, true);

  // bench
  InputOptions be_in;
  std::string be_batch = "all", be_progressive = "all", be_scheme = "js", be_fractions, be_report;
  std::size_t be_reps = 1, be_cap = kDefaultOracleCap;
  bool be_no_warmup = false;
  auto* be = app.add_subcommand("bench", "run several algorithms on one pair of datasets and compare them");
  add_inputs(be, be_in);
  be->add_option("--batch", be_batch, "comma-separated batch algorithms, 'all' or 'none'");
  be->add_option("--progressive", be_progressive, "comma-separated budget-aware algorithms, 'all' or 'none'");
  be->add_option("--scheme", be_scheme, "weighting scheme of the budget-aware runs");
  be->add_option("--budget-fractions", be_fractions, "comma-separated fractions of |C| (default 0.05..0.50)");
  be->add_option("--repetitions", be_reps, "timed repetitions per row")->check(CLI::PositiveNumber);
  be->add_flag("--no-warmup", be_no_warmup, "skip the discarded warm-up run");
  be->add_option("--oracle-cap", be_cap, "largest |S|*|T| checked against the brute-force oracle");
  be->add_option("--report", be_report, "JSON report");

  // grid-search
  InputOptions gs_in;
  std::string gs_algorithm, gs_objective = "min-runtime";
  double gs_fraction = 0.1;
  std::size_t gs_reps = 1;
  std::vector<std::string> gs_domains;
  auto* gs = app.add_subcommand("grid-search", "try every combination of parameter values");
  add_inputs(gs, gs_in);
  gs->add_option("--algorithm", gs_algorithm, "algorithm to tune")->required();
  gs->add_option("--objective", gs_objective, "min-runtime or max-pgr");
  gs->add_option("--budget-fraction", gs_fraction, "budget as a fraction of |C| (budget-aware algorithms)");
  gs->add_option("--repetitions", gs_reps, "timed repetitions per trial")->check(CLI::PositiveNumber);
  gs->add_option("--domain", gs_domains, "override a domain: name=v1,v2,...");

  // synth
  std::string sy_profile = "clustered", sy_source_out, sy_target_out;
  SynthConfig sy_cfg;
  auto* sy = app.add_subcommand("synth", "write a synthetic pair of datasets");
  sy->add_option("--profile", sy_profile, "uniform, clustered or skewed");
  sy->add_option("--source-count", sy_cfg.source_count, "source geometries");
  sy->add_option("--target-count", sy_cfg.target_count, "target geometries");
  sy->add_option("--seed", sy_cfg.seed, "random seed");
  sy->add_option("--related-fraction", sy_cfg.related_fraction, "share of targets derived from a source");
  sy->add_option("--source-out", sy_source_out, "source TSV")->required();
  sy->add_option("--target-out", sy_target_out, "target TSV")->required();

  // report
  std::string re_input, re_format = "table";
  auto* re = app.add_subcommand("report", "render a JSON benchmark report");
  re->add_option("input", re_input, "report written by `geolink bench --report`")->required();
  re->add_option("--format", re_format, "table or json")->check(CLI::IsMember({"table", "json"}));

  // inspect
  std::string in_name;
  auto* ins = app.add_subcommand("inspect", "describe an algorithm and its parameters");
  ins->add_option("algorithm", in_name, "algorithm name; omit to list all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*il) {
      AlgorithmConfig cfg;
      cfg.algorithm = parse_algorithm(il_algorithm);
      cfg.self_join = il_self;
      apply_all(cfg, il_params);
      const auto res = interlink_files(descriptor(il_in.source, il_in), descriptor(il_in.target, il_in), cfg);
      if (!il_output.empty()) write_links(res.triples, il_output);
      if (!il_report.empty()) write_text(il_report, row_to_json(batch_row(cfg, res.run)));
      summarize(res.run.links, res.run.timings);
    } else if (*pr) {
      ProgressiveConfig cfg;
      cfg.algorithm = parse_progressive(pr_algorithm);
      if (!pr_params.count("budget")) throw ConfigError("--budget is required");
      apply_all(cfg, pr_params);
      const Loaded l = load(pr_in);
      const auto res = run_progressive(l.s, l.t, cfg);
      if (!pr_output.empty()) {
        write_links(to_triples(res.links, [&](GeometryId i) { return l.source.label(i); },
                               [&](GeometryId j) { return l.target.label(j); }),
                    pr_output);
      }
      if (!pr_trace.empty()) write_trace(res.trace, pr_trace);
      if (!pr_report.empty()) {
        BenchmarkRow row;
        row.kind = "progressive";
        row.algorithm = pr_algorithm;
        row.params = describe(cfg);
        row.t_f_ms = res.timings.filtering_ms();
        row.t_v_ms = res.timings.verification_ms();
        row.verified = res.links.verified();
        row.related = res.links.related();
        row.links = res.links.size();
        row.links_hash = links_hash(res.links);
        row.budget = cfg.budget;
        write_text(pr_report, row_to_json(row));
      }
      std::cerr << "candidates " << res.candidates << ", ";
      summarize(res.links, res.timings);
    } else if (*pa) {
      ParallelConfig cfg;
      apply_all(cfg, pa_params);
      const Loaded l = load(pa_in);
      const auto res = parallel_interlink(l.s, l.t, cfg);
      if (!pa_output.empty()) {
        write_links(to_triples(res.links, [&](GeometryId i) { return l.source.label(i); },
                               [&](GeometryId j) { return l.target.label(j); }),
                    pa_output);
      }
      if (!pa_trace.empty()) write_trace(res.trace, pa_trace);
      if (!pa_report.empty()) {
        BenchmarkRow row;
        row.kind = "parallel";
        row.algorithm = "parallel";
        row.params = describe(cfg);
        row.t_f_ms = res.timings.filtering_ms();
        row.t_v_ms = res.timings.verification_ms();
        row.verified = res.links.verified();
        row.related = res.links.related();
        row.links = res.links.size();
        row.links_hash = links_hash(res.links);
        write_text(pa_report, row_to_json(row));
      }
      std::cerr << res.units.size() << " units, ";
      summarize(res.links, res.timings);
    } else if (*be) {
      SuiteConfig cfg;
      cfg.repetitions = be_reps;
      cfg.warmup = !be_no_warmup;
      cfg.oracle_cap = be_cap;
      if (!be_fractions.empty()) {
        cfg.budget_fractions.clear();
        for (const auto& f : split_list(be_fractions)) {
          double v = 0;
          try {
            v = std::stod(f);
          } catch (const std::exception&) {
            throw ConfigError("bad budget fraction '" + f + "'");
          }
          if (!(v > 0.0) || v > 1.0) throw ConfigError("budget fractions must lie in (0, 1]");
          cfg.budget_fractions.push_back(v);
        }
      }
      auto add_batch = [&](Algorithm a) {
        AlgorithmConfig c;
        c.algorithm = a;
        cfg.batch.push_back(c);
      };
      if (be_batch == "all") {
        for (Algorithm a : kAllAlgorithms) add_batch(a);
      } else if (be_batch != "none") {
        for (const auto& n : split_list(be_batch)) add_batch(parse_algorithm(n));
      }
      const WeightScheme scheme = parse_scheme(be_scheme);
      auto add_prog = [&](ProgressiveAlgorithm a) {
        ProgressiveConfig p;
        p.algorithm = a;
        p.scheme = scheme;
        cfg.progressive.push_back(p);
      };
      if (be_progressive == "all") {
        for (ProgressiveAlgorithm a : kAllProgressive) add_prog(a);
      } else if (be_progressive != "none") {
        for (const auto& n : split_list(be_progressive)) add_prog(parse_progressive(n));
      }
      const Loaded l = load(be_in);
      BenchmarkReport rep = run_benchmark(l.s, l.t, cfg);
      rep.source = be_in.source;
      rep.target = be_in.target;
      if (!be_report.empty()) write_text(be_report, report_to_json(rep));
      std::cout << render_table(rep);
      if (!rep.batch_equal) return kRunError;
    } else if (*gs) {
      GridSearchConfig cfg;
      cfg.algorithm = gs_algorithm;
      cfg.objective = parse_objective(gs_objective);
      cfg.budget_fraction = gs_fraction;
      cfg.repetitions = gs_reps;
      for (const auto& d : gs_domains) {
        const auto eq = d.find('=');
        if (eq == std::string::npos) throw ConfigError("--domain expects name=v1,v2,...");
        cfg.domains[d.substr(0, eq)] = split_list(d.substr(eq + 1));
      }
      const Loaded l = load(gs_in);
      const auto res = grid_search(l.s, l.t, cfg);
      for (std::size_t i = 0; i < res.trials.size(); ++i) {
        const auto& t = res.trials[i];
        std::cout << (i == res.best ? "* " : "  ") << t.score;
        for (const auto& [k, v] : t.params) std::cout << "  " << k << '=' << v;
        std::cout << '\n';
      }
      std::cout << "best (" << (cfg.objective == Objective::MaxPgr ? "pgr" : "ms") << " "
                << res.trials[res.best].score << "):";
      for (const auto& [k, v] : res.trials[res.best].params) std::cout << " --" << k << ' ' << v;
      std::cout << '\n';
    } else if (*sy) {
      sy_cfg.profile = parse_profile(sy_profile);
      write_synth(synth_generate(sy_cfg), sy_source_out, sy_target_out);
    } else if (*re) {
      std::ifstream f(re_input, std::ios::binary);
      if (!f) throw IoFailure("cannot open " + re_input);
      std::stringstream ss;
      ss << f.rdbuf();
      const BenchmarkReport rep = report_from_json(ss.str());
      std::cout << (re_format == "json" ? report_to_json(rep) + "\n" : render_table(rep));
    } else if (*ins) {
      if (in_name.empty()) {
        for (const auto& d : algorithm_docs()) {
          std::cout << d.name << (d.parallel ? "  (parallel)" : d.progressive ? "  (budget-aware)" : "  (batch)")
                    << '\n';
        }
      } else {
        std::cout << render_doc(find_doc(in_name));
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRunError;
  }
  return 0;
}
