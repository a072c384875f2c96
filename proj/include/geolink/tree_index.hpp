#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geolink/geometry.hpp"
#include "geolink/source_index.hpp"

namespace geolink {

inline constexpr std::size_t kDefaultNodeCapacity = 16;

struct IndexEntry {
  Mbr mbr;
  GeometryId id = 0;
};

/// Dynamic R-Tree with Guttman insertion. Overflowing nodes split around the
/// two largest child MBRs; the rest go where the enlargement is least.
class RTree final : public SourceIndex {
 public:
  explicit RTree(std::size_t max_entries = kDefaultNodeCapacity);
  RTree(std::span<const Geometry> source, std::size_t max_entries = kDefaultNodeCapacity);

  void insert(const Mbr& m, GeometryId id);

  void candidates(const Mbr& t, std::vector<GeometryId>& out) const override;
  std::size_t memory_bytes() const noexcept override;

  std::size_t size() const noexcept { return size_; }
  std::size_t height() const noexcept;
  std::size_t node_count() const noexcept { return nodes_.size(); }
  bool root_is_leaf() const noexcept { return nodes_[root_].leaf; }
  /// MBRs of the root's children (entries when the root is a leaf).
  std::vector<Mbr> root_child_mbrs() const;
  /// Checks tight MBRs, capacity bounds and uniform leaf depth; the reason
  /// for the first violation goes to `why`.
  bool audit(std::string* why = nullptr) const;

 private:
  struct Node {
    Mbr mbr;
    bool leaf = true;
    std::vector<std::uint32_t> children;  // node indices
    std::vector<IndexEntry> entries;      // leaf payload
  };

  std::optional<std::uint32_t> insert_rec(std::uint32_t node, const IndexEntry& e);
  std::uint32_t split(std::uint32_t node);
  void refresh(std::uint32_t node);
  bool audit_rec(std::uint32_t node, std::size_t depth, std::size_t& leaf_depth, std::string* why) const;

  std::size_t max_entries_;
  std::size_t min_entries_;
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
  std::size_t size_ = 0;
};

/// Region quadtree over fixed bounds. Entries spanning several quadrants
/// stay at the internal node; an overflowing leaf splits once per insertion.
class Quadtree final : public SourceIndex {
 public:
  Quadtree(std::span<const Geometry> source, std::size_t max_entries = kDefaultNodeCapacity,
           std::size_t max_depth = 16, std::optional<Mbr> bounds = std::nullopt);

  void candidates(const Mbr& t, std::vector<GeometryId>& out) const override;
  std::size_t memory_bytes() const noexcept override;

  /// Number of levels; a lone root has depth 1.
  std::size_t depth() const noexcept;
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t root_entry_count() const noexcept { return nodes_[0].entries.size(); }
  std::size_t split_count() const noexcept { return (nodes_.size() - 1) / 4; }

 private:
  enum Quadrant { NE = 0, NW = 1, SE = 2, SW = 3 };
  struct Node {
    Mbr bounds;
    std::size_t depth = 1;
    std::int32_t first_child = -1;  // four consecutive nodes: NE, NW, SE, SW
    std::vector<IndexEntry> entries;
  };

  void insert(const IndexEntry& e);
  std::array<Mbr, 4> quadrants(const Mbr& b) const noexcept;
  int fitting_child(std::size_t node, const Mbr& m) const noexcept;
  void split(std::size_t node);

  std::size_t max_entries_;
  std::size_t max_depth_;
  std::vector<Node> nodes_;
};

/// Sort-Tile-Recursive packed R-Tree with exact MBRs.
class StrTree final : public SourceIndex {
 public:
  explicit StrTree(std::vector<IndexEntry> entries, std::size_t max_entries = kDefaultNodeCapacity);

  void candidates(const Mbr& t, std::vector<GeometryId>& out) const override;
  std::size_t memory_bytes() const noexcept override;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  struct Node {
    Mbr mbr;
    std::uint32_t first = 0;  // first child in the level below (or entry)
    std::uint32_t count = 0;
  };

  std::vector<IndexEntry> entries_;
  std::vector<std::vector<Node>> levels_;  // levels_[0] = leaves, back() = root level
};

/// Quantized offsets of a child box inside a reference box.
struct QuantizedMbr {
  std::uint16_t x0 = 0;
  std::uint16_t y0 = 0;
  std::uint16_t x1 = 0;
  std::uint16_t y1 = 0;
};

/// Conservative quantization: dequantize(quantize(m)) contains m whenever
/// `ref` contains m. `bits` is one of 4, 8, 16.
QuantizedMbr quantize(const Mbr& m, const Mbr& ref, int bits) noexcept;
Mbr dequantize(const QuantizedMbr& q, const Mbr& ref, int bits) noexcept;

/// CR-Tree: an STR-packed tree whose nodes keep one exact reference box and
/// quantized child boxes. Queries prune on the dequantized boxes and finish
/// with an exact MBR test against the source geometries, which must outlive
/// the tree.
class CrTree final : public SourceIndex {
 public:
  CrTree(std::span<const Geometry> source, std::size_t max_entries = kDefaultNodeCapacity,
         int quant_bits = 8);

  void candidates(const Mbr& t, std::vector<GeometryId>& out) const override;
  /// Candidates before the exact MBR test: a superset of candidates().
  void query_raw(const Mbr& t, std::vector<GeometryId>& out) const;
  std::size_t memory_bytes() const noexcept override;
  int quant_bits() const noexcept { return bits_; }

 private:
  struct Node {
    Mbr ref;
    std::uint32_t first = 0;
    std::uint32_t count = 0;
  };

  void query_rec(std::size_t level, std::uint32_t node, const Mbr& t,
                 std::vector<GeometryId>& out) const;

  std::span<const Geometry> source_;
  int bits_;
  std::size_t bytes_per_value_;
  std::vector<std::vector<Node>> levels_;
  std::vector<std::vector<std::uint8_t>> quantized_;  // per level below each node level
  std::vector<GeometryId> entry_ids_;
};

}  // namespace geolink
