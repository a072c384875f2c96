#pragma once

// The four-geometry configuration used throughout the tests: a LineString g3
// crosses LineString g4 and touches Polygon g1, which contains Polygon g2.

#include "geolink/geometry.hpp"

namespace geolink::testing {

inline Geometry fig1_p1(GeometryId id = 0) {
  return Geometry::polygon({{{0, 0}, {10, 0}, {10, 10}, {0, 10}, {0, 0}}}, id);
}
inline Geometry fig1_p2(GeometryId id = 1) {
  return Geometry::polygon({{{2, 2}, {4, 2}, {4, 4}, {2, 4}, {2, 2}}}, id);
}
inline Geometry fig1_l3(GeometryId id = 2) { return Geometry::line_string({{10, 5}, {15, 5}}, id); }
inline Geometry fig1_l4(GeometryId id = 3) { return Geometry::line_string({{12, 0}, {12, 8}}, id); }

/// All four geometries as one dataset with ids 0..3.
inline Dataset fig1_dataset() { return {fig1_p1(0), fig1_p2(1), fig1_l3(2), fig1_l4(3)}; }

/// Source {P1, P2} and target {L3, L4}.
inline Dataset fig1_source() { return {fig1_p1(0), fig1_p2(1)}; }
inline Dataset fig1_target() { return {fig1_l3(0), fig1_l4(1)}; }

}  // namespace geolink::testing
