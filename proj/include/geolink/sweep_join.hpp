#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "geolink/geometry.hpp"
#include "geolink/linkset.hpp"
#include "geolink/source_index.hpp"

namespace geolink {

class StrTree;

enum class SweepStructure { List, Striped };
enum class StripeStorage { Map, Str };

struct SweepStats {
  /// Largest number of simultaneously active geometries (both datasets).
  std::size_t peak_active = 0;
  std::size_t stripes = 1;
};

struct SweepItem {
  const Mbr* mbr = nullptr;
  GeometryId id = 0;
  std::uint8_t tag = 0;  // 0 source, 1 target
};

/// Plane sweep over x_min with ties broken by (dataset, id). A pair is
/// emitted when both are active and their y-extents overlap. Construction
/// sorts (the filtering step); run() sweeps. Datasets must outlive it.
class PlaneSweepJoin {
 public:
  PlaneSweepJoin(std::span<const Geometry> source, std::span<const Geometry> target, SweepStructure structure);
  void run(const PairCallback& emit, SweepStats* stats = nullptr) const;

 private:
  SweepStructure structure_;
  std::vector<SweepItem> items_;
  Mbr extent_;
  double avg_width_ = 1.0;
  std::size_t source_count_ = 0;
};

/// Partition-based spatial merge join over an nx x ny grid spanning both
/// datasets; duplicates across partitions are removed by reference point.
class PbsmJoin {
 public:
  PbsmJoin(std::span<const Geometry> source, std::span<const Geometry> target, int nx, int ny);
  void run(const PairCallback& emit) const;

 private:
  std::size_t nx_;
  std::size_t ny_;
  Mbr extent_;
  std::vector<std::vector<SweepItem>> parts_;
};

void plane_sweep(std::span<const Geometry> source, std::span<const Geometry> target,
                 SweepStructure structure, const PairCallback& emit, SweepStats* stats = nullptr);

void pbsm(std::span<const Geometry> source, std::span<const Geometry> target, int nx, int ny,
          const PairCallback& emit);

/// Vertical stripes of the average source width holding source ids (map
/// storage) or an STR tree each (STR storage).
class StripeIndex final : public SourceIndex {
 public:
  StripeIndex(std::span<const Geometry> source, StripeStorage storage, std::size_t node_capacity = 16);
  ~StripeIndex() override;

  void candidates(const Mbr& t, std::vector<GeometryId>& out) const override;
  std::size_t memory_bytes() const noexcept override;

  double stripe_width() const noexcept { return width_; }
  std::int64_t stripe_of(double x) const noexcept;
  /// Ids stored in a stripe (map storage), sorted; empty when absent.
  std::vector<GeometryId> stripe_contents(std::int64_t stripe) const;
  std::size_t stripe_count() const noexcept;

 private:
  StripeStorage storage_;
  double width_ = 1.0;
  std::vector<Mbr> mbrs_;
  std::unordered_map<std::int64_t, std::vector<GeometryId>> ids_;
  std::unordered_map<std::int64_t, std::unique_ptr<StrTree>> trees_;
};

}  // namespace geolink
