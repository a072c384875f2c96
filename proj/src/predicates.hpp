#pragma once

// Exact geometric predicates: a floating-point filter with a rational fallback.

#include <gmpxx.h>

#include <cmath>

#include "geolink/geometry.hpp"

namespace geolink::detail {

struct QPoint {
  mpq_class x;
  mpq_class y;

  QPoint() = default;
  explicit QPoint(const Coordinate& c) : x(c.x), y(c.y) {}
  QPoint(mpq_class qx, mpq_class qy) : x(std::move(qx)), y(std::move(qy)) {}

  friend bool operator==(const QPoint& a, const QPoint& b) { return a.x == b.x && a.y == b.y; }
};

inline int sign_of(const mpq_class& v) { return sgn(v); }

/// Exact value of the orientation determinant of (a, b, c).
inline mpq_class orient_value(const QPoint& a, const QPoint& b, const QPoint& c) {
  return (a.x - c.x) * (b.y - c.y) - (a.y - c.y) * (b.x - c.x);
}

inline int orient_exact(const Coordinate& a, const Coordinate& b, const Coordinate& c) {
  return sign_of(orient_value(QPoint(a), QPoint(b), QPoint(c)));
}

/// Sign of the orientation of c relative to the directed line a->b:
/// +1 left turn, -1 right turn, 0 collinear. Exact for any finite doubles.
inline int orient(const Coordinate& a, const Coordinate& b, const Coordinate& c) {
  const double detleft = (a.x - c.x) * (b.y - c.y);
  const double detright = (a.y - c.y) * (b.x - c.x);
  const double det = detleft - detright;
  // Error bound of the two-product determinant with rounded differences.
  constexpr double kEps = 1.1102230246251565e-16;
  constexpr double kBound = (3.0 + 16.0 * kEps) * kEps;
  const double err = kBound * (std::fabs(detleft) + std::fabs(detright));
  if (det > err) return 1;
  if (-det > err) return -1;
  if (detleft == 0.0 && detright == 0.0) return 0;
  return orient_exact(a, b, c);
}

inline int orient(const Coordinate& a, const Coordinate& b, const QPoint& c) {
  return sign_of(orient_value(QPoint(a), QPoint(b), c));
}

inline int compare_y(const Coordinate& a, const Coordinate& p) {
  return a.y < p.y ? -1 : (a.y > p.y ? 1 : 0);
}

inline int compare_y(const Coordinate& a, const QPoint& p) { return -cmp(p.y, a.y); }

inline bool between(double lo, double hi, double v) { return lo <= v && v <= hi; }

inline bool between(double lo, double hi, const mpq_class& v) {
  return cmp(v, lo) >= 0 && cmp(v, hi) <= 0;
}

inline const double& coord_x(const Coordinate& c) { return c.x; }
inline const double& coord_y(const Coordinate& c) { return c.y; }
inline const mpq_class& coord_x(const QPoint& c) { return c.x; }
inline const mpq_class& coord_y(const QPoint& c) { return c.y; }

}  // namespace geolink::detail
