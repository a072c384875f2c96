#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "geolink/geometry.hpp"

namespace geolink {

enum class Location : std::uint8_t { Interior = 0, Boundary = 1, Exterior = 2 };

/// Dimension value of one DE-9IM cell; -1 encodes the empty set.
enum class Dim : std::int8_t { Empty = -1, Point = 0, Curve = 1, Surface = 2 };

/// 3x3 DE-9IM matrix indexed (interior|boundary|exterior) of A by the same of B.
class IntersectionMatrix {
 public:
  IntersectionMatrix() { cells_.fill(Dim::Empty); }

  Dim at(Location a, Location b) const noexcept { return cells_[index(a, b)]; }
  void set(Location a, Location b, Dim d) noexcept { cells_[index(a, b)] = d; }

  /// Raises the cell to at least `d`.
  void raise(Location a, Location b, Dim d) noexcept {
    auto& c = cells_[index(a, b)];
    if (static_cast<int>(d) > static_cast<int>(c)) c = d;
  }

  void merge(const IntersectionMatrix& other) noexcept;
  IntersectionMatrix transposed() const noexcept;

  /// Nine characters from {F,0,1,2}, row-major: "212101212".
  std::string to_string() const;
  static IntersectionMatrix from_string(std::string_view text);

  /// OGC pattern match; pattern characters are T, F, *, 0, 1, 2.
  bool matches(std::string_view pattern) const;

  friend bool operator==(const IntersectionMatrix&, const IntersectionMatrix&) = default;

 private:
  static constexpr std::size_t index(Location a, Location b) noexcept {
    return static_cast<std::size_t>(a) * 3 + static_cast<std::size_t>(b);
  }

  std::array<Dim, 9> cells_{};
};

/// The nine positive topological relations; disjoint is never materialized.
enum class Relation : std::uint8_t {
  Equals = 0,
  Intersects,
  Touches,
  Within,
  Contains,
  Covers,
  CoveredBy,
  Crosses,
  Overlaps,
};

inline constexpr std::size_t kRelationCount = 9;

inline constexpr std::array<Relation, kRelationCount> kAllRelations = {
    Relation::Equals,    Relation::Intersects, Relation::Touches,
    Relation::Within,    Relation::Contains,   Relation::Covers,
    Relation::CoveredBy, Relation::Crosses,    Relation::Overlaps};

std::string_view relation_name(Relation r) noexcept;
std::optional<Relation> parse_relation(std::string_view name) noexcept;

/// contains<->within, covers<->coveredBy; every other relation is symmetric.
Relation transpose(Relation r) noexcept;

class RelationSet {
 public:
  constexpr RelationSet() = default;

  bool has(Relation r) const noexcept { return (bits_ >> static_cast<unsigned>(r)) & 1U; }
  void insert(Relation r) noexcept { bits_ |= static_cast<std::uint16_t>(1U << static_cast<unsigned>(r)); }
  bool empty() const noexcept { return bits_ == 0; }
  std::size_t size() const noexcept;
  std::uint16_t bits() const noexcept { return bits_; }

  RelationSet transposed() const noexcept;
  std::string to_string() const;

  template <typename F>
  void for_each(F&& f) const {
    for (auto r : kAllRelations) {
      if (has(r)) f(r);
    }
  }

  friend bool operator==(const RelationSet&, const RelationSet&) = default;

 private:
  std::uint16_t bits_ = 0;
};

/// Computes the DE-9IM matrix of two valid geometries with exact predicates.
/// The result of relate(b, a) is the transpose of relate(a, b).
/// Throws DegenerateGeometry when the rings are too corrupt to resolve.
IntersectionMatrix relate(const Geometry& a, const Geometry& b);

/// Applies the OGC matrix masks; dim_a and dim_b are 1 (lines) or 2 (areas).
RelationSet extract_relations(const IntersectionMatrix& m, int dim_a, int dim_b);

/// relate followed by extract_relations. An empty set means disjoint.
RelationSet verify_pair(const Geometry& a, const Geometry& b);

}  // namespace geolink
