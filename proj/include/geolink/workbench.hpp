#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geolink/batch_pipeline.hpp"
#include "geolink/linkset.hpp"
#include "geolink/parallel_exec.hpp"
#include "geolink/progressive.hpp"

namespace geolink {

// ---- oracle ---------------------------------------------------------------

inline constexpr std::size_t kDefaultOracleCap = 1'000'000;

/// Nested loop over all pairs: MBR test, then the kernel. Throws CapExceeded
/// when |S|*|T| exceeds `cap`.
LinkSet brute_force_oracle(std::span<const Geometry> source, std::span<const Geometry> target,
                           std::size_t cap = kDefaultOracleCap, bool self_join = false);

/// FNV-1a over the sorted links.
std::string links_hash(const LinkSet& links);

// ---- documentation and parameters ---------------------------------------

struct ParamDoc {
  std::string name;
  std::string description;
  std::string default_value;
  std::optional<double> min;
  std::optional<double> max;
  std::vector<std::string> choices;  // enumerated parameters
  bool integer = false;
  /// Part of the grid-search domain.
  bool searchable = true;
};

struct AlgorithmDoc {
  std::string name;
  std::string summary;
  bool progressive = false;
  /// The multi-worker executor rather than a single algorithm.
  bool parallel = false;
  std::vector<ParamDoc> parameters;
};

using ParamMap = std::map<std::string, std::string>;

const std::vector<AlgorithmDoc>& algorithm_docs();
/// Throws ConfigError for unknown names.
const AlgorithmDoc& find_doc(std::string_view name);
/// Plain-text help: name, summary, then one line per parameter with its
/// current value when `current` has one.
std::string render_doc(const AlgorithmDoc& doc, const ParamMap& current = {});

/// Values tried by grid search: the choices, or default, min, max and the
/// geometric midpoints of [min, default] and [default, max].
std::vector<std::string> search_domain(const ParamDoc& p);

/// Set one documented parameter; throws ConfigError on bad names or values.
void apply_param(AlgorithmConfig& cfg, std::string_view name, std::string_view value);
void apply_param(ProgressiveConfig& cfg, std::string_view name, std::string_view value);
void apply_param(ParallelConfig& cfg, std::string_view name, std::string_view value);
/// Current values of the documented parameters.
ParamMap describe(const AlgorithmConfig& cfg);
ParamMap describe(const ProgressiveConfig& cfg);
ParamMap describe(const ParallelConfig& cfg);

/// "NxM" with positive N and M; throws ConfigError.
std::pair<std::size_t, std::size_t> parse_dims(std::string_view flag, std::string_view text);

// ---- benchmarking ---------------------------------------------------------

struct BenchmarkRow {
  std::string kind;  // "batch" or "progressive"
  std::string algorithm;
  ParamMap params;
  double t_f_ms = 0.0;
  double t_v_ms = 0.0;
  std::size_t verified = 0;
  std::size_t related = 0;
  std::size_t links = 0;
  std::map<std::string, std::size_t> per_relation;
  std::string links_hash;
  std::optional<bool> matches_reference;
  std::optional<std::string> error;
  // progressive rows
  std::optional<double> budget_fraction;
  std::optional<std::size_t> budget;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> pgr;
};

struct BenchmarkReport {
  int version = 1;
  std::string source;
  std::string target;
  std::size_t candidates = 0;
  std::size_t total_related = 0;
  std::optional<std::string> oracle_hash;
  bool batch_equal = true;
  std::vector<BenchmarkRow> rows;
};

inline const std::vector<double> kDefaultBudgetFractions = {0.05, 0.10, 0.15, 0.20, 0.25,
                                                            0.30, 0.35, 0.40, 0.45, 0.50};

struct SuiteConfig {
  std::vector<AlgorithmConfig> batch;
  /// Budgets come from budget_fractions x |C|; the configs' budgets are ignored.
  std::vector<ProgressiveConfig> progressive;
  std::vector<double> budget_fractions = kDefaultBudgetFractions;
  std::size_t repetitions = 1;
  bool warmup = true;
  std::size_t oracle_cap = kDefaultOracleCap;
};

/// One row per batch config and per (progressive config, budget). Timings are
/// means over the repetitions after a discarded warm-up run. Failures are
/// recorded in the row and the suite continues.
BenchmarkReport run_benchmark(std::span<const Geometry> source, std::span<const Geometry> target,
                              const SuiteConfig& cfg);

BenchmarkRow batch_row(const AlgorithmConfig& cfg, const InterlinkResult& r);

std::string report_to_json(const BenchmarkReport& r);
std::string row_to_json(const BenchmarkRow& r);
/// Throws FormatError on malformed input or an unknown version.
BenchmarkReport report_from_json(std::string_view text);
std::string render_table(const BenchmarkReport& r);

// ---- grid search ----------------------------------------------------------

enum class Objective { MinRuntime, MaxPgr };
Objective parse_objective(std::string_view name);  // min-runtime, max-pgr

struct Trial {
  ParamMap params;
  double score = 0.0;  // ms for MinRuntime, PGR for MaxPgr
};

struct GridSearchResult {
  std::vector<Trial> trials;
  std::size_t best = 0;
};

struct GridSearchConfig {
  std::string algorithm;
  Objective objective = Objective::MinRuntime;
  /// Progressive budget as a fraction of |C|.
  double budget_fraction = 0.1;
  std::size_t repetitions = 1;
  /// Replaces the documented domain of the named parameters.
  std::map<std::string, std::vector<std::string>> domains;
};

/// Tries the cartesian product of the searchable parameter domains.
GridSearchResult grid_search(std::span<const Geometry> source, std::span<const Geometry> target,
                             const GridSearchConfig& cfg);

// ---- synthetic data -------------------------------------------------------

enum class SynthProfile { Uniform, Clustered, Skewed };
SynthProfile parse_profile(std::string_view name);  // uniform, clustered, skewed

struct SynthConfig {
  SynthProfile profile = SynthProfile::Clustered;
  std::size_t source_count = 1000;
  std::size_t target_count = 1000;
  std::uint64_t seed = 1;
  /// Share of targets derived from a source (copies, shrunk or shifted
  /// copies, crossing lines); ignored by the uniform profile.
  double related_fraction = 0.3;
};

struct SynthData {
  Dataset source;
  Dataset target;
};

/// Deterministic for a given config. Geometries are scattered at constant
/// density, so candidate counts grow linearly with the counts.
SynthData synth_generate(const SynthConfig& cfg);
/// Prefixes of both datasets; derived targets stay paired with their source.
SynthData synth_subset(const SynthData& d, double fraction);
/// Writes `<uri>\t<WKT>` TSV files with URIs src:<i> and tgt:<j>.
void write_synth(const SynthData& d, const std::filesystem::path& source_path,
                 const std::filesystem::path& target_path);

}  // namespace geolink
