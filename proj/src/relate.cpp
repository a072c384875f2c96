// DE-9IM computation by exact noding of the two boundaries.
//
// Every edge of each geometry is split at the points where it meets the other
// geometry's linework. The resulting nodes and open sub-segments are located
// against the other geometry; for two polygons the faces on either side of
// each boundary sub-segment give the area cells.

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "geolink/de9im.hpp"
#include "geolink/error.hpp"
#include "predicates.hpp"

namespace geolink {
namespace {

using detail::QPoint;
using detail::orient;

struct Event {
  QPoint p;
  QPoint q;  // overlap end; unused for point events
  bool overlap = false;
  bool same_direction = false;
};

using EdgeKey = std::uint64_t;

constexpr EdgeKey edge_key(std::uint32_t ring, std::uint32_t index) {
  return (static_cast<EdgeKey>(ring) << 32) | index;
}

using EventMap = std::unordered_map<EdgeKey, std::vector<Event>>;

struct EdgeBox {
  double x_min, x_max, y_min, y_max;
  std::uint32_t ring;
  std::uint32_t index;
};

std::vector<EdgeBox> edge_boxes(const Geometry& g) {
  std::vector<EdgeBox> out;
  out.reserve(g.num_points());
  const auto& rings = g.rings();
  for (std::uint32_t r = 0; r < rings.size(); ++r) {
    const auto& ring = rings[r];
    for (std::uint32_t i = 0; i + 1 < ring.size(); ++i) {
      const auto& a = ring[i];
      const auto& b = ring[i + 1];
      out.push_back({std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y),
                     std::max(a.y, b.y), r, i});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const EdgeBox& l, const EdgeBox& r) { return l.x_min < r.x_min; });
  return out;
}

/// Position of a point along the dominant axis of segment a->b, increasing
/// in the direction of travel. Exact because the point lies on the segment.
mpq_class along(const Coordinate& a, const Coordinate& b, const QPoint& p) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  if (std::fabs(dx) >= std::fabs(dy)) return dx > 0 ? mpq_class(p.x) : mpq_class(-p.x);
  return dy > 0 ? mpq_class(p.y) : mpq_class(-p.y);
}

double axis_value(const Coordinate& c, bool use_x) { return use_x ? c.x : c.y; }

/// Records the intersection of edge (a1,a2) of A with edge (b1,b2) of B.
void intersect_edges(const Coordinate& a1, const Coordinate& a2, const Coordinate& b1,
                     const Coordinate& b2, std::vector<Event>& on_a, std::vector<Event>& on_b) {
  const int o1 = orient(b1, b2, a1);
  const int o2 = orient(b1, b2, a2);
  if (o1 == 0 && o2 == 0) {
    const bool use_x = a1.x != a2.x;
    const Coordinate* a_lo = &a1;
    const Coordinate* a_hi = &a2;
    if (axis_value(*a_lo, use_x) > axis_value(*a_hi, use_x)) std::swap(a_lo, a_hi);
    const Coordinate* b_lo = &b1;
    const Coordinate* b_hi = &b2;
    if (axis_value(*b_lo, use_x) > axis_value(*b_hi, use_x)) std::swap(b_lo, b_hi);
    const Coordinate* lo = axis_value(*a_lo, use_x) >= axis_value(*b_lo, use_x) ? a_lo : b_lo;
    const Coordinate* hi = axis_value(*a_hi, use_x) <= axis_value(*b_hi, use_x) ? a_hi : b_hi;
    const double vlo = axis_value(*lo, use_x);
    const double vhi = axis_value(*hi, use_x);
    if (vlo > vhi) return;
    Event e;
    e.p = QPoint(*lo);
    if (vlo < vhi) {
      e.q = QPoint(*hi);
      e.overlap = true;
      const double dot = (a2.x - a1.x) * (b2.x - b1.x) + (a2.y - a1.y) * (b2.y - b1.y);
      e.same_direction = dot > 0;
    }
    on_a.push_back(e);
    on_b.push_back(std::move(e));
    return;
  }
  if (o1 * o2 > 0) return;
  const int o3 = orient(a1, a2, b1);
  const int o4 = orient(a1, a2, b2);
  if (o3 * o4 > 0) return;
  Event e;
  if (o1 == 0) {
    e.p = QPoint(a1);
  } else if (o2 == 0) {
    e.p = QPoint(a2);
  } else if (o3 == 0) {
    e.p = QPoint(b1);
  } else if (o4 == 0) {
    e.p = QPoint(b2);
  } else {
    const QPoint qa1(a1), qa2(a2), qb1(b1), qb2(b2);
    const mpq_class d1 = detail::orient_value(qb1, qb2, qa1);
    const mpq_class d2 = detail::orient_value(qb1, qb2, qa2);
    const mpq_class t = d1 / (d1 - d2);
    e.p = QPoint(qa1.x + t * (qa2.x - qa1.x), qa1.y + t * (qa2.y - qa1.y));
  }
  on_a.push_back(e);
  on_b.push_back(std::move(e));
}

void collect_events(const Geometry& a, const Geometry& b, EventMap& ev_a, EventMap& ev_b) {
  const auto ea = edge_boxes(a);
  const auto eb = edge_boxes(b);
  const auto& ra = a.rings();
  const auto& rb = b.rings();
  auto test = [&](const EdgeBox& x, const EdgeBox& y) {
    if (x.y_max < y.y_min || y.y_max < x.y_min) return;
    std::vector<Event> on_a;
    std::vector<Event> on_b;
    intersect_edges(ra[x.ring][x.index], ra[x.ring][x.index + 1], rb[y.ring][y.index],
                    rb[y.ring][y.index + 1], on_a, on_b);
    if (on_a.empty()) return;
    auto& da = ev_a[edge_key(x.ring, x.index)];
    for (auto& e : on_a) da.push_back(std::move(e));
    auto& db = ev_b[edge_key(y.ring, y.index)];
    for (auto& e : on_b) db.push_back(std::move(e));
  };
  // Forward scan over both x-sorted edge lists.
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ea.size() && j < eb.size()) {
    if (ea[i].x_min <= eb[j].x_min) {
      for (std::size_t k = j; k < eb.size() && eb[k].x_min <= ea[i].x_max; ++k) test(ea[i], eb[k]);
      ++i;
    } else {
      for (std::size_t k = i; k < ea.size() && ea[k].x_min <= eb[j].x_max; ++k) test(ea[k], eb[j]);
      ++j;
    }
  }
}

/// Winding-number point-in-polygon with exact orientation tests.
template <typename P>
Location locate_in_polygon(const P& p, const Geometry& poly) {
  bool inside_shell = false;
  const auto& rings = poly.rings();
  for (std::size_t r = 0; r < rings.size(); ++r) {
    const auto& ring = rings[r];
    int winding = 0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const Coordinate& u = ring[i];
      const Coordinate& v = ring[i + 1];
      const int cu = detail::compare_y(u, p);
      const int cv = detail::compare_y(v, p);
      if (cu > 0 && cv > 0) continue;
      if (cu < 0 && cv < 0) continue;
      const int side = orient(u, v, p);
      if (side == 0 && detail::between(std::min(u.x, v.x), std::max(u.x, v.x), detail::coord_x(p)) &&
          detail::between(std::min(u.y, v.y), std::max(u.y, v.y), detail::coord_y(p))) {
        return Location::Boundary;
      }
      if (cu <= 0) {
        if (cv > 0 && side > 0) ++winding;
      } else if (cv <= 0 && side < 0) {
        --winding;
      }
    }
    const bool inside = winding != 0;
    if (r == 0) {
      if (!inside) return Location::Exterior;
      inside_shell = true;
    } else if (inside) {
      return Location::Exterior;
    }
  }
  return inside_shell ? Location::Interior : Location::Exterior;
}

/// Location of a point known to lie on `g`'s linework.
Location linework_location(const Geometry& g, const QPoint& p) {
  if (g.is_polygon()) return Location::Boundary;
  if (g.is_closed_line()) return Location::Interior;
  const auto path = g.path();
  if (p == QPoint(path.front()) || p == QPoint(path.back())) return Location::Boundary;
  return Location::Interior;
}

struct Node {
  QPoint p;
  mpq_class key;
  bool on_other = false;
  bool vertex = false;  // an original vertex of the edge
};

/// Nodes and sub-segments of geometry `self` located against `other`; the
/// matrix rows refer to `self`.
class SideAnalyzer {
 public:
  SideAnalyzer(const Geometry& self, const Geometry& other, const EventMap& events,
               IntersectionMatrix& m)
      : self_(self), other_(other), events_(events), m_(m) {}

  void run() {
    const auto& rings = self_.rings();
    for (std::uint32_t r = 0; r < rings.size(); ++r) walk_ring(r);
  }

 private:
  Location self_location_of_segment() const {
    return self_.is_polygon() ? Location::Boundary : Location::Interior;
  }

  Location self_location_of_vertex(const Coordinate& c) const {
    if (self_.is_polygon()) return Location::Boundary;
    if (self_.is_closed_line()) return Location::Interior;
    const auto path = self_.path();
    return (c == path.front() || c == path.back()) ? Location::Boundary : Location::Interior;
  }

  Location self_location_of_node(const Node& n) const {
    if (self_.is_polygon()) return Location::Boundary;
    if (self_.is_closed_line()) return Location::Interior;
    const auto path = self_.path();
    return (n.p == QPoint(path.front()) || n.p == QPoint(path.back())) ? Location::Boundary
                                                                       : Location::Interior;
  }

  void area_faces(Location other_loc, bool same_direction) {
    if (!self_.is_polygon() || !other_.is_polygon()) return;
    using L = Location;
    switch (other_loc) {
      case L::Interior:
        m_.raise(L::Interior, L::Interior, Dim::Surface);
        m_.raise(L::Exterior, L::Interior, Dim::Surface);
        break;
      case L::Exterior:
        m_.raise(L::Interior, L::Exterior, Dim::Surface);
        break;
      case L::Boundary:
        if (same_direction) {
          m_.raise(L::Interior, L::Interior, Dim::Surface);
        } else {
          m_.raise(L::Interior, L::Exterior, Dim::Surface);
          m_.raise(L::Exterior, L::Interior, Dim::Surface);
        }
        break;
    }
  }

  /// Region (interior or exterior) of an open sub-segment that avoids the
  /// other geometry's linework.
  template <typename P>
  Location region_of(const P& p) const {
    if (other_.is_line()) return Location::Exterior;
    const Location loc = locate_in_polygon(p, other_);
    if (loc == Location::Boundary) {
      throw DegenerateGeometry("sub-segment point unexpectedly on the other boundary");
    }
    return loc;
  }

  void walk_ring(std::uint32_t r) {
    const auto& ring = self_.rings()[r];
    const Location seg_self = self_location_of_segment();
    // Region of the last sub-segment when its end node does not touch the
    // other linework; carried across such nodes.
    bool carry_valid = false;
    Location carry = Location::Exterior;

    for (std::uint32_t i = 0; i + 1 < ring.size(); ++i) {
      const Coordinate& a = ring[i];
      const Coordinate& b = ring[i + 1];
      auto it = events_.find(edge_key(r, i));
      if (it == events_.end()) {
        // Whole edge avoids the other linework.
        const Location loc = carry_valid ? carry : region_of(a);
        m_.raise(seg_self, loc, Dim::Curve);
        m_.raise(self_location_of_vertex(a), loc, Dim::Point);
        m_.raise(self_location_of_vertex(b), loc, Dim::Point);
        area_faces(loc, false);
        carry_valid = true;
        carry = loc;
        continue;
      }
      const auto& evs = it->second;
      std::vector<Node> nodes;
      nodes.reserve(2 + evs.size() * 2);
      auto push = [&](QPoint p, bool vertex) {
        Node n;
        n.key = along(a, b, p);
        n.p = std::move(p);
        n.vertex = vertex;
        nodes.push_back(std::move(n));
      };
      push(QPoint(a), true);
      push(QPoint(b), true);
      for (const auto& e : evs) {
        push(e.p, false);
        if (e.overlap) push(e.q, false);
      }
      std::sort(nodes.begin(), nodes.end(),
                [](const Node& l, const Node& rr) { return l.key < rr.key; });
      // Merge equal nodes, keeping the vertex flag.
      std::vector<Node> uniq;
      uniq.reserve(nodes.size());
      for (auto& n : nodes) {
        if (!uniq.empty() && uniq.back().key == n.key) {
          uniq.back().vertex = uniq.back().vertex || n.vertex;
          continue;
        }
        uniq.push_back(std::move(n));
      }
      struct Interval {
        mpq_class lo, hi;
        bool same_direction;
      };
      std::vector<Interval> overlaps;
      for (const auto& e : evs) {
        if (e.overlap) {
          mpq_class k1 = along(a, b, e.p);
          mpq_class k2 = along(a, b, e.q);
          if (k1 > k2) std::swap(k1, k2);
          overlaps.push_back({k1, k2, e.same_direction});
        }
      }
      for (auto& n : uniq) {
        for (const auto& e : evs) {
          if (!e.overlap && along(a, b, e.p) == n.key) {
            n.on_other = true;
            break;
          }
        }
        if (!n.on_other) {
          for (const auto& iv : overlaps) {
            if (iv.lo <= n.key && n.key <= iv.hi) {
              n.on_other = true;
              break;
            }
          }
        }
      }
      // Vertex a may touch the other linework only through the previous edge;
      // the same touching edge is always tested against this edge too.
      for (std::size_t s = 0; s + 1 < uniq.size(); ++s) {
        const Node& n0 = uniq[s];
        const Node& n1 = uniq[s + 1];
        int covered = 0;  // 0 none, 1 same direction, 2 opposite, 3 both
        for (const auto& iv : overlaps) {
          if (iv.lo <= n0.key && n1.key <= iv.hi) covered |= iv.same_direction ? 1 : 2;
        }
        Location loc;
        bool same_dir = false;
        if (covered != 0) {
          if (covered == 3 && other_.is_polygon()) {
            throw DegenerateGeometry("boundary edge shared in both directions");
          }
          loc = other_.is_polygon() ? Location::Boundary : Location::Interior;
          same_dir = covered == 1;
          carry_valid = false;
        } else {
          if (!n0.on_other && carry_valid) {
            loc = carry;
          } else if (!n0.on_other && n0.vertex) {
            loc = region_of(a);
          } else if (!n1.on_other && n1.vertex) {
            loc = region_of(b);
          } else {
            const QPoint mid((n0.p.x + n1.p.x) / 2, (n0.p.y + n1.p.y) / 2);
            loc = region_of(mid);
          }
          carry_valid = !n1.on_other;
          carry = loc;
        }
        m_.raise(seg_self, loc, Dim::Curve);
        area_faces(loc, same_dir);
        if (!n0.on_other) m_.raise(self_location_of_node(n0), loc, Dim::Point);
        if (!n1.on_other) m_.raise(self_location_of_node(n1), loc, Dim::Point);
      }
      for (const auto& n : uniq) {
        if (n.on_other) {
          m_.raise(self_location_of_node(n), linework_location(other_, n.p), Dim::Point);
        }
      }
    }
  }

  const Geometry& self_;
  const Geometry& other_;
  const EventMap& events_;
  IntersectionMatrix& m_;
};

}  // namespace

IntersectionMatrix relate(const Geometry& a, const Geometry& b) {
  IntersectionMatrix m;
  m.set(Location::Exterior, Location::Exterior, Dim::Surface);
  if (a.is_polygon() && b.is_line()) m.set(Location::Interior, Location::Exterior, Dim::Surface);
  if (a.is_line() && b.is_polygon()) m.set(Location::Exterior, Location::Interior, Dim::Surface);

  EventMap ev_a;
  EventMap ev_b;
  if (mbr_intersects(a.mbr(), b.mbr())) collect_events(a, b, ev_a, ev_b);

  SideAnalyzer(a, b, ev_a, m).run();
  IntersectionMatrix from_b;
  SideAnalyzer(b, a, ev_b, from_b).run();
  m.merge(from_b.transposed());
  return m;
}

}  // namespace geolink
