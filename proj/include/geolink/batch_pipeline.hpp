#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geolink/data_io.hpp"
#include "geolink/grid_index.hpp"
#include "geolink/linkset.hpp"
#include "geolink/source_index.hpp"
#include "geolink/sweep_join.hpp"
#include "geolink/tree_index.hpp"

namespace geolink {

enum class Algorithm {
  Radon,
  StaticRadon,
  Giant,
  StaticGiant,
  PlaneSweep,
  Pbsm,
  StripeSweep,
  RTree,
  Quadtree,
  CrTree,
};

inline constexpr std::array<Algorithm, 10> kAllAlgorithms = {
    Algorithm::Radon,      Algorithm::StaticRadon, Algorithm::Giant,       Algorithm::StaticGiant,
    Algorithm::PlaneSweep, Algorithm::Pbsm,        Algorithm::StripeSweep, Algorithm::RTree,
    Algorithm::Quadtree,   Algorithm::CrTree};

std::string_view algorithm_name(Algorithm a) noexcept;
/// Throws ConfigError for unknown names.
Algorithm parse_algorithm(std::string_view name);
/// True when only the indexed side is held in memory and the other is streamed.
bool is_memory_frugal(Algorithm a) noexcept;

/// 75% of MemAvailable, or 4 GiB when it cannot be read.
std::size_t default_memory_budget();

struct AlgorithmConfig {
  Algorithm algorithm = Algorithm::Giant;
  /// Tile size of the static variants; when unset the indexed extent is
  /// divided into static_divisions x static_divisions tiles.
  std::optional<GridSpec> static_grid;
  std::size_t static_divisions = 100;
  SweepStructure sweep_structure = SweepStructure::List;
  int pbsm_nx = 64;
  int pbsm_ny = 64;
  StripeStorage stripe_storage = StripeStorage::Map;
  std::size_t node_capacity = kDefaultNodeCapacity;
  std::size_t quadtree_max_depth = 16;
  int quant_bits = 8;
  /// Memory-frugal algorithms index the smaller dataset.
  bool allow_swap = true;
  /// Source and target are the same dataset: only pairs with source < target.
  bool self_join = false;
  /// Verification workers; 1 keeps the run strictly serial.
  std::size_t threads = 1;
  std::size_t memory_budget = 0;  // 0 = default_memory_budget()
  /// Called once per verified pair, in the original orientation.
  std::function<void(GeometryId source, GeometryId target)> on_verify;
};

struct InterlinkResult {
  LinkSet links;
  RunTimings timings;
  bool swapped = false;
};

/// Builds the source-only index a memory-frugal algorithm uses. The
/// geometries must outlive the index.
std::unique_ptr<SourceIndex> build_source_index(std::span<const Geometry> indexed, const AlgorithmConfig& cfg);

/// Filtering then Verification over in-memory datasets. The LinkSet holds
/// positions into `source` and `target` and comes back normalized.
InterlinkResult interlink(std::span<const Geometry> source, std::span<const Geometry> target,
                          const AlgorithmConfig& cfg);

struct FileInterlinkResult {
  InterlinkResult run;
  SkipReport source_skips;
  SkipReport target_skips;
  /// Links mapped to URIs (or ids), sorted and duplicate-free.
  std::vector<LinkTriple> triples;
};

/// File-based run: memory-frugal algorithms load the indexed side and stream
/// the other; memory-intensive ones load both and throw MemoryBudgetExceeded
/// when the loads exceed the budget.
FileInterlinkResult interlink_files(const DatasetDescriptor& source, const DatasetDescriptor& target,
                                    const AlgorithmConfig& cfg);

/// Maps a LinkSet's ids to labels and removes duplicate triples.
std::vector<LinkTriple> to_triples(const LinkSet& links, const std::function<std::string(GeometryId)>& source_label,
                                   const std::function<std::string(GeometryId)>& target_label);

}  // namespace geolink
