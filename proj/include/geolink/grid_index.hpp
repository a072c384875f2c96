#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "geolink/geometry.hpp"
#include "geolink/linkset.hpp"
#include "geolink/source_index.hpp"

namespace geolink {

struct GridSpec {
  double tile_width = 1.0;
  double tile_height = 1.0;
};

struct TileKey {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const TileKey&, const TileKey&) = default;
  friend auto operator<=>(const TileKey&, const TileKey&) = default;
};

struct TileKeyHash {
  std::size_t operator()(const TileKey& k) const noexcept {
    const auto h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL ^
                   (static_cast<std::uint64_t>(k.y) + 0x7F4A7C159E3779B9ULL);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

/// Inclusive range of tile indices.
struct TileSpan {
  std::int64_t x_lo = 0;
  std::int64_t x_hi = 0;
  std::int64_t y_lo = 0;
  std::int64_t y_hi = 0;

  std::uint64_t size() const noexcept {
    return static_cast<std::uint64_t>(x_hi - x_lo + 1) * static_cast<std::uint64_t>(y_hi - y_lo + 1);
  }
  bool contains(const TileKey& k) const noexcept {
    return x_lo <= k.x && k.x <= x_hi && y_lo <= k.y && k.y <= y_hi;
  }
  template <typename F>
  void for_each(F&& f) const {
    for (std::int64_t x = x_lo; x <= x_hi; ++x) {
      for (std::int64_t y = y_lo; y <= y_hi; ++y) f(TileKey{x, y});
    }
  }

  friend bool operator==(const TileSpan&, const TileSpan&) = default;
};

/// Number of tiles shared by two spans.
std::uint64_t span_overlap(const TileSpan& a, const TileSpan& b) noexcept;

/// Mean MBR width and height. A zero mean on one axis borrows the other;
/// all-degenerate input falls back to 1x1. Throws EmptyDataset.
GridSpec dynamic_granularity(std::span<const Geometry> geoms);
GridSpec dynamic_granularity(std::span<const Geometry> a, std::span<const Geometry> b);

/// floor(v / w), clamped to a safe integer range.
std::int64_t tile_index(double v, double w) noexcept;

TileSpan tiles_for(const Mbr& m, const GridSpec& g) noexcept;

/// Tile holding (max x_min, min y_max) of two intersecting rectangles.
TileKey reference_point_owner(const Mbr& a, const Mbr& b, const GridSpec& g) noexcept;

/// Uniform grid mapping tiles to the ids of the geometries whose MBR meets them.
class Equigrid final : public SourceIndex {
 public:
  struct Cell {
    std::vector<GeometryId> source;
    std::vector<GeometryId> target;
  };
  using CellMap = std::unordered_map<TileKey, Cell, TileKeyHash>;

  /// Indexes the source only (GIA.nt). Throws EmptyDataset.
  static Equigrid build_source_only(std::span<const Geometry> source, const GridSpec& g);
  /// Indexes both datasets (RADON). Throws EmptyDataset.
  static Equigrid build_both(std::span<const Geometry> source, std::span<const Geometry> target,
                             const GridSpec& g);

  const GridSpec& spec() const noexcept { return spec_; }
  const CellMap& cells() const noexcept { return cells_; }
  const Cell* cell(const TileKey& k) const;

  /// Sorted, duplicate-free ids of sources whose MBR intersects `t`.
  void candidates_for(const Mbr& t, std::vector<GeometryId>& out) const;
  std::vector<GeometryId> candidates_for(const Geometry& t) const;
  void candidates(const Mbr& t, std::vector<GeometryId>& out) const override { candidates_for(t, out); }

  /// Cell keys in ascending order.
  std::vector<TileKey> sorted_keys() const;

  std::size_t memory_bytes() const noexcept override;

 private:
  explicit Equigrid(const GridSpec& g) : spec_(g) {}
  void insert(const Mbr& m, GeometryId id, bool target);

  GridSpec spec_;
  CellMap cells_;
  std::vector<Mbr> source_mbrs_;
};

/// Source-only grid with the same tiles and candidates as an Equigrid, laid
/// out flat: occupied rows in order, each row's occupied cells in order, and
/// one id array. Keeps a view of `source`, which must outlive it.
class CompactGrid final : public SourceIndex {
 public:
  /// Throws EmptyDataset.
  CompactGrid(std::span<const Geometry> source, const GridSpec& g);

  /// May be coarser than requested when the tile range overflows 32 bits.
  const GridSpec& spec() const noexcept { return spec_; }
  std::size_t cell_count() const noexcept { return cell_x_.size(); }

  void candidates(const Mbr& t, std::vector<GeometryId>& out) const override;
  std::size_t memory_bytes() const noexcept override;

 private:
  std::span<const Geometry> source_;
  GridSpec spec_;
  std::int64_t x0_ = 0;
  std::int64_t y0_ = 0;
  std::int64_t nx_ = 0;
  std::int64_t ny_ = 0;
  std::vector<std::uint32_t> row_y_;      // occupied rows, ascending
  std::vector<std::uint32_t> row_begin_;  // first cell of each row, plus an end marker
  std::vector<std::uint32_t> cell_x_;
  std::vector<std::uint32_t> cell_begin_;  // first id of each cell, plus an end marker
  std::vector<GeometryId> ids_;
};

/// Emits every MBR-intersecting pair once, in tile-major order, verifying a
/// pair only in the tile that owns its reference point.
void radon_join(std::span<const Geometry> source, std::span<const Geometry> target,
                const GridSpec& g, const PairCallback& emit);
/// Same over a grid built with build_both.
void radon_join(const Equigrid& grid, std::span<const Geometry> source,
                std::span<const Geometry> target, const PairCallback& emit);

}  // namespace geolink
