#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "geolink/grid_index.hpp"
#include "geolink/linkset.hpp"
#include "geolink/progressive.hpp"

namespace geolink {

/// A macro cell of the source-derived Equigrid: `factor_x` x `factor_y`
/// tiles merged into one partition.
struct Partition {
  std::size_t id = 0;
  TileKey key;  // macro-cell coordinates
  Mbr bounds;
  std::vector<GeometryId> source;
  std::vector<GeometryId> target;
};

struct PartitionGrid {
  GridSpec tiles;
  std::size_t factor_x = 8;
  std::size_t factor_y = 8;

  TileKey macro_of(const TileKey& tile) const noexcept;
  /// Macro cell owning the pair's reference point.
  TileKey owner(const Mbr& a, const Mbr& b) const noexcept;
};

struct PartitionSet {
  PartitionGrid grid;
  /// Partitions holding at least one source, in ascending key order.
  std::vector<Partition> partitions;
};

/// Partitions both datasets by the Equigrid of the source's mean MBR size
/// (or `tiles` when given). Targets join only partitions that hold sources.
/// Throws EmptyDataset when the source is empty.
PartitionSet partition_datasets(std::span<const Geometry> source, std::span<const Geometry> target,
                                std::size_t factor_x = 8, std::size_t factor_y = 8,
                                std::optional<GridSpec> tiles = std::nullopt);

struct WorkUnit {
  std::size_t partition = 0;  // index into PartitionSet::partitions
  std::size_t worker = 0;
  std::size_t candidates = 0;  // owned MBR-intersecting pairs
  std::size_t budget = 0;      // progressive mode
};

/// Partitions with sources and targets, assigned round-robin to `workers`.
std::vector<WorkUnit> global_join(const PartitionSet& parts, std::size_t workers);

/// Owned MBR-intersecting pairs of one partition, sorted.
std::vector<std::pair<GeometryId, GeometryId>> unit_candidates(const PartitionSet& parts, const Partition& p,
                                                               std::span<const Geometry> source,
                                                               std::span<const Geometry> target);

/// Largest-remainder split of `budget` proportional to `weights`.
std::vector<std::size_t> split_budget(std::size_t budget, std::span<const std::size_t> weights);

enum class ParallelMode { Batch, Progressive };

struct ParallelConfig {
  std::size_t workers = 1;
  std::size_t macro_x = 8;
  std::size_t macro_y = 8;
  std::optional<GridSpec> tiles;
  ParallelMode mode = ParallelMode::Batch;
  /// Progressive mode: algorithm, scheme and the total budget BU.
  ProgressiveConfig progressive;
  /// Test hook: called by the worker before each unit.
  std::function<void(const WorkUnit&)> before_unit;
};

struct UnitReport {
  WorkUnit unit;
  std::size_t verified = 0;
  std::size_t related = 0;
};

struct ParallelResult {
  LinkSet links;
  RunTimings timings;
  std::vector<UnitReport> units;
  /// Progressive mode: the traces of all units concatenated in unit order,
  /// with global ids and renumbered steps.
  ProgressiveTrace trace;
};

/// Three stages: partitioning, global join, local join on `workers`
/// threads. A failing unit raises WorkerFailure with its partition id.
ParallelResult parallel_interlink(std::span<const Geometry> source, std::span<const Geometry> target,
                                  const ParallelConfig& cfg);

}  // namespace geolink
