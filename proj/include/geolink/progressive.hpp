#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "geolink/grid_index.hpp"
#include "geolink/linkset.hpp"

namespace geolink {

enum class WeightScheme { CF, JS, X2, MBRO, ISP };
enum class MbroMode { Jaccard, MinArea };
enum class ProgressiveAlgorithm { PG, DPG, LPG, GOG, IPG, PRadon };
enum class TileOrder { Increasing, Decreasing };

std::string_view scheme_name(WeightScheme s) noexcept;
WeightScheme parse_scheme(std::string_view name);  // cf, js, x2, mbro, isp
std::string_view progressive_name(ProgressiveAlgorithm a) noexcept;
ProgressiveAlgorithm parse_progressive(std::string_view name);  // pg, dpg, lpg, gog, ipg, pradon

inline constexpr ProgressiveAlgorithm kAllProgressive[] = {
    ProgressiveAlgorithm::PG,  ProgressiveAlgorithm::DPG, ProgressiveAlgorithm::LPG,
    ProgressiveAlgorithm::GOG, ProgressiveAlgorithm::IPG, ProgressiveAlgorithm::PRadon};
inline constexpr WeightScheme kAllSchemes[] = {WeightScheme::CF, WeightScheme::JS, WeightScheme::X2,
                                               WeightScheme::MBRO, WeightScheme::ISP};

struct WeightedPair {
  GeometryId source = 0;
  GeometryId target = 0;
  double weight = 0.0;
  double tiebreak = 0.0;  // secondary scheme of a composite, else 0

  friend bool operator==(const WeightedPair&, const WeightedPair&) = default;
};

/// Schedule order: weight desc, tiebreak desc, source asc, target asc.
bool ranks_before(const WeightedPair& a, const WeightedPair& b) noexcept;

/// Pair weights over a fixed grid. `nonempty_tiles` is the N of the
/// chi-square contingency table.
class PairWeigher {
 public:
  PairWeigher(GridSpec grid, std::size_t nonempty_tiles, WeightScheme scheme,
              std::optional<WeightScheme> secondary = std::nullopt, MbroMode mbro = MbroMode::Jaccard);

  double weight(const Geometry& s, const Geometry& t, WeightScheme scheme) const;
  WeightedPair weigh(const Geometry& s, const Geometry& t, GeometryId sid, GeometryId tid) const;
  const GridSpec& grid() const noexcept { return grid_; }

 private:
  GridSpec grid_;
  double n_;
  WeightScheme scheme_;
  std::optional<WeightScheme> secondary_;
  MbroMode mbro_;
};

/// Keeps pairs whose reference point falls in the caller's partition.
using PairFilter = std::function<bool(GeometryId source, GeometryId target)>;

struct ProgressiveConfig {
  ProgressiveAlgorithm algorithm = ProgressiveAlgorithm::PG;
  WeightScheme scheme = WeightScheme::JS;
  std::optional<WeightScheme> secondary;
  std::size_t budget = 1;
  TileOrder tile_order = TileOrder::Decreasing;
  MbroMode mbro_mode = MbroMode::Jaccard;
  /// Grid for weighting; defaults to the dynamic granularity (source only,
  /// or both datasets for pradon).
  std::optional<GridSpec> grid;
  PairFilter accept;
};

struct TraceStep {
  std::size_t step = 0;  // 1-based
  GeometryId source = 0;
  GeometryId target = 0;
  bool related = false;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};
using ProgressiveTrace = std::vector<TraceStep>;

struct ProgressiveResult {
  LinkSet links;
  ProgressiveTrace trace;
  /// Number of candidate pairs |C| the schedule was drawn from.
  std::size_t candidates = 0;
  RunTimings timings;
};

/// Returns whether the pair turned out related.
using PairVerifierFn = std::function<bool(GeometryId source, GeometryId target)>;

// Schedulers over precomputed weighted candidates. Each returns the pairs to
// verify, in verification order, at most `budget` long.
std::vector<WeightedPair> schedule_top(std::vector<WeightedPair> pairs, std::size_t budget);
/// Per-target quota max(1, floor(BU / |T'|)); unused budget goes to the best
/// remaining pairs so a full budget covers every candidate.
std::vector<WeightedPair> schedule_local(std::vector<WeightedPair> pairs, std::size_t budget);
std::vector<WeightedPair> schedule_geometry_ordered(std::vector<WeightedPair> pairs, std::size_t budget);
std::vector<WeightedPair> schedule_iterative(std::vector<WeightedPair> pairs, std::size_t budget);
/// Processes `pairs` by current maximum; a related pair (s, t) boosts every
/// pending pair sharing s or t to base * (1 + deg(s) + deg(t)).
ProgressiveTrace run_dynamic(std::vector<WeightedPair> pairs, std::size_t budget, const PairVerifierFn& verify);

/// Weighted, MBR-intersecting candidates from a source-only grid.
std::vector<WeightedPair> weighted_candidates(std::span<const Geometry> source, std::span<const Geometry> target,
                                              const ProgressiveConfig& cfg);

ProgressiveResult run_progressive(std::span<const Geometry> source, std::span<const Geometry> target,
                                  const ProgressiveConfig& cfg);

/// Same candidates verified in a uniformly random order.
ProgressiveResult run_random_order(std::span<const Geometry> source, std::span<const Geometry> target,
                                   std::size_t budget, std::uint64_t seed, const PairFilter& accept = {});

struct ProgressiveMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double pgr = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool pgr_undefined = false;
};

/// PGR = sum of cumulative related counts over the trace divided by the same
/// sum for the ordering that puts min(BU, total_related) related pairs first.
ProgressiveMetrics compute_metrics(const ProgressiveTrace& trace, std::size_t total_related, std::size_t budget);

/// step, source, target, related (0/1) with a header line.
void write_trace(const ProgressiveTrace& trace, const std::filesystem::path& path);

}  // namespace geolink
