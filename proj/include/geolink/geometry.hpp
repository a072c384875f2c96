#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace geolink {

/// Planar Cartesian coordinate.
struct Coordinate {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

/// Axis-aligned minimum bounding rectangle with closed extents.
struct Mbr {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }

  void expand(const Coordinate& c) noexcept;
  void expand(const Mbr& other) noexcept;
  bool contains(const Mbr& other) const noexcept {
    return x_min <= other.x_min && other.x_max <= x_max && y_min <= other.y_min &&
           other.y_max <= y_max;
  }

  static Mbr of(std::span<const Coordinate> coords) noexcept;

  friend bool operator==(const Mbr&, const Mbr&) = default;
};

/// Boundary contact counts as intersecting.
inline bool mbr_intersects(const Mbr& a, const Mbr& b) noexcept {
  return a.x_min <= b.x_max && b.x_min <= a.x_max && a.y_min <= b.y_max &&
         b.y_min <= a.y_max;
}

/// Intersection box of two intersecting rectangles.
inline Mbr mbr_intersection(const Mbr& a, const Mbr& b) noexcept {
  return {a.x_min > b.x_min ? a.x_min : b.x_min, a.y_min > b.y_min ? a.y_min : b.y_min,
          a.x_max < b.x_max ? a.x_max : b.x_max, a.y_max < b.y_max ? a.y_max : b.y_max};
}

enum class GeometryKind : std::uint8_t { LineString, Polygon };

using GeometryId = std::uint32_t;

/// A LineString or a Polygon with holes.
///
/// Construction validates the structural invariants and normalizes the
/// representation: consecutive duplicate vertices are dropped, polygon shells
/// are stored counter-clockwise and holes clockwise, so the interior always
/// lies to the left of every directed boundary edge. Instances are immutable
/// apart from the dataset-local id.
class Geometry {
 public:
  /// Throws InvalidGeometry unless the path has at least two distinct points.
  static Geometry line_string(std::vector<Coordinate> path, GeometryId id = 0);

  /// Throws InvalidGeometry unless every ring is closed, has at least four
  /// coordinates and a non-zero area.
  static Geometry polygon(std::vector<std::vector<Coordinate>> rings, GeometryId id = 0);

  GeometryKind kind() const noexcept { return kind_; }
  bool is_polygon() const noexcept { return kind_ == GeometryKind::Polygon; }
  bool is_line() const noexcept { return kind_ == GeometryKind::LineString; }

  /// Topological dimension: 1 for LineStrings, 2 for Polygons.
  int dimension() const noexcept { return is_polygon() ? 2 : 1; }

  GeometryId id() const noexcept { return id_; }
  void set_id(GeometryId id) noexcept { id_ = id; }

  const Mbr& mbr() const noexcept { return mbr_; }

  /// Polygon: shell followed by holes. LineString: a single open path.
  const std::vector<std::vector<Coordinate>>& rings() const noexcept { return rings_; }
  std::span<const Coordinate> path() const noexcept { return rings_.front(); }

  /// Total number of stored coordinates (closing vertices included).
  std::size_t num_points() const noexcept;

  /// LineString whose first and last coordinates coincide (empty boundary).
  bool is_closed_line() const noexcept {
    return is_line() && rings_.front().front() == rings_.front().back();
  }

  /// Approximate heap plus inline footprint in bytes.
  std::size_t memory_bytes() const noexcept;

 private:
  Geometry() = default;

  GeometryKind kind_ = GeometryKind::LineString;
  GeometryId id_ = 0;
  Mbr mbr_;
  std::vector<std::vector<Coordinate>> rings_;
};

inline Mbr mbr_of(const Geometry& g) noexcept { return g.mbr(); }

using Dataset = std::vector<Geometry>;

/// Union of all MBRs; throws EmptyDataset for an empty input.
Mbr extent_of(std::span<const Geometry> geoms);

/// Signed area via the shoelace formula; positive for counter-clockwise rings.
double signed_area(std::span<const Coordinate> ring) noexcept;

}  // namespace geolink
