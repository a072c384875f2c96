#include "geolink/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geolink/error.hpp"

namespace geolink {

void Mbr::expand(const Coordinate& c) noexcept {
  x_min = std::min(x_min, c.x);
  y_min = std::min(y_min, c.y);
  x_max = std::max(x_max, c.x);
  y_max = std::max(y_max, c.y);
}

void Mbr::expand(const Mbr& other) noexcept {
  x_min = std::min(x_min, other.x_min);
  y_min = std::min(y_min, other.y_min);
  x_max = std::max(x_max, other.x_max);
  y_max = std::max(y_max, other.y_max);
}

Mbr Mbr::of(std::span<const Coordinate> coords) noexcept {
  if (coords.empty()) return {};
  Mbr box{coords[0].x, coords[0].y, coords[0].x, coords[0].y};
  for (const auto& c : coords.subspan(1)) box.expand(c);
  return box;
}

double signed_area(std::span<const Coordinate> ring) noexcept {
  if (ring.size() < 3) return 0.0;
  // Shifted to the first vertex to limit cancellation.
  const Coordinate o = ring[0];
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
    twice += (ring[i].x - o.x) * (ring[i + 1].y - o.y) - (ring[i + 1].x - o.x) * (ring[i].y - o.y);
  }
  return twice / 2.0;
}

namespace {

void check_finite(const std::vector<Coordinate>& coords) {
  for (const auto& c : coords) {
    if (!std::isfinite(c.x) || !std::isfinite(c.y)) {
      throw InvalidGeometry("non-finite coordinate");
    }
  }
}

void drop_repeated(std::vector<Coordinate>& coords) {
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
}

}  // namespace

Geometry Geometry::line_string(std::vector<Coordinate> path, GeometryId id) {
  check_finite(path);
  drop_repeated(path);
  if (path.size() < 2) throw InvalidGeometry("LineString needs at least two distinct points");
  Geometry g;
  g.kind_ = GeometryKind::LineString;
  g.id_ = id;
  g.mbr_ = Mbr::of(path);
  g.rings_.push_back(std::move(path));
  return g;
}

Geometry Geometry::polygon(std::vector<std::vector<Coordinate>> rings, GeometryId id) {
  if (rings.empty()) throw InvalidGeometry("Polygon without rings");
  for (std::size_t r = 0; r < rings.size(); ++r) {
    auto& ring = rings[r];
    check_finite(ring);
    if (ring.size() < 2 || ring.front() != ring.back()) {
      throw InvalidGeometry("ring " + std::to_string(r) + " is not closed");
    }
    drop_repeated(ring);
    if (ring.size() < 4) {
      throw InvalidGeometry("ring " + std::to_string(r) + " has fewer than four points");
    }
    const double area = signed_area(ring);
    if (area == 0.0) throw InvalidGeometry("ring " + std::to_string(r) + " has zero area");
    const bool want_ccw = r == 0;
    if ((area > 0.0) != want_ccw) std::reverse(ring.begin(), ring.end());
  }
  Geometry g;
  g.kind_ = GeometryKind::Polygon;
  g.id_ = id;
  g.mbr_ = Mbr::of(rings.front());
  g.rings_ = std::move(rings);
  return g;
}

std::size_t Geometry::num_points() const noexcept {
  std::size_t n = 0;
  for (const auto& r : rings_) n += r.size();
  return n;
}

std::size_t Geometry::memory_bytes() const noexcept {
  std::size_t bytes = sizeof(Geometry) + rings_.capacity() * sizeof(std::vector<Coordinate>);
  for (const auto& r : rings_) bytes += r.capacity() * sizeof(Coordinate);
  return bytes;
}

Mbr extent_of(std::span<const Geometry> geoms) {
  if (geoms.empty()) throw EmptyDataset("cannot compute the extent of an empty dataset");
  Mbr box = geoms.front().mbr();
  for (const auto& g : geoms.subspan(1)) box.expand(g.mbr());
  return box;
}

}  // namespace geolink
