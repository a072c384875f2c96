#include "geolink/de9im.hpp"

#include <bit>
#include <stdexcept>

namespace geolink {

void IntersectionMatrix::merge(const IntersectionMatrix& other) noexcept {
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (static_cast<int>(other.cells_[i]) > static_cast<int>(cells_[i])) cells_[i] = other.cells_[i];
  }
}

IntersectionMatrix IntersectionMatrix::transposed() const noexcept {
  IntersectionMatrix t;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) t.cells_[c * 3 + r] = cells_[r * 3 + c];
  }
  return t;
}

std::string IntersectionMatrix::to_string() const {
  std::string s(9, 'F');
  for (std::size_t i = 0; i < 9; ++i) {
    if (cells_[i] != Dim::Empty) s[i] = static_cast<char>('0' + static_cast<int>(cells_[i]));
  }
  return s;
}

IntersectionMatrix IntersectionMatrix::from_string(std::string_view text) {
  if (text.size() != 9) throw std::invalid_argument("DE-9IM string must have 9 characters");
  IntersectionMatrix m;
  for (std::size_t i = 0; i < 9; ++i) {
    const char c = text[i];
    if (c == 'F' || c == 'f') {
      m.cells_[i] = Dim::Empty;
    } else if (c >= '0' && c <= '2') {
      m.cells_[i] = static_cast<Dim>(c - '0');
    } else {
      throw std::invalid_argument("invalid DE-9IM character");
    }
  }
  return m;
}

bool IntersectionMatrix::matches(std::string_view pattern) const {
  if (pattern.size() != 9) throw std::invalid_argument("DE-9IM pattern must have 9 characters");
  for (std::size_t i = 0; i < 9; ++i) {
    const Dim d = cells_[i];
    switch (pattern[i]) {
      case '*':
        break;
      case 'T':
        if (d == Dim::Empty) return false;
        break;
      case 'F':
        if (d != Dim::Empty) return false;
        break;
      case '0':
      case '1':
      case '2':
        if (static_cast<int>(d) != pattern[i] - '0') return false;
        break;
      default:
        throw std::invalid_argument("invalid DE-9IM pattern character");
    }
  }
  return true;
}

namespace {

constexpr std::array<std::string_view, kRelationCount> kNames = {
    "equals", "intersects", "touches", "within", "contains",
    "covers", "coveredBy",  "crosses", "overlaps"};

}  // namespace

std::string_view relation_name(Relation r) noexcept { return kNames[static_cast<std::size_t>(r)]; }

std::optional<Relation> parse_relation(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Relation>(i);
  }
  return std::nullopt;
}

Relation transpose(Relation r) noexcept {
  switch (r) {
    case Relation::Within:
      return Relation::Contains;
    case Relation::Contains:
      return Relation::Within;
    case Relation::Covers:
      return Relation::CoveredBy;
    case Relation::CoveredBy:
      return Relation::Covers;
    default:
      return r;
  }
}

std::size_t RelationSet::size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }

RelationSet RelationSet::transposed() const noexcept {
  RelationSet t;
  for_each([&](Relation r) { t.insert(transpose(r)); });
  return t;
}

std::string RelationSet::to_string() const {
  std::string s = "{";
  for_each([&](Relation r) {
    if (s.size() > 1) s += ',';
    s += relation_name(r);
  });
  s += '}';
  return s;
}

RelationSet extract_relations(const IntersectionMatrix& m, int dim_a, int dim_b) {
  using L = Location;
  auto t = [&](L a, L b) { return m.at(a, b) != Dim::Empty; };
  const bool ii = t(L::Interior, L::Interior);
  const bool ib = t(L::Interior, L::Boundary);
  const bool ie = t(L::Interior, L::Exterior);
  const bool bi = t(L::Boundary, L::Interior);
  const bool bb = t(L::Boundary, L::Boundary);
  const bool be = t(L::Boundary, L::Exterior);
  const bool ei = t(L::Exterior, L::Interior);
  const bool eb = t(L::Exterior, L::Boundary);

  RelationSet out;
  const bool intersects = ii || ib || bi || bb;
  if (!intersects) return out;
  out.insert(Relation::Intersects);
  if (ii && !ie && !be && !ei && !eb) out.insert(Relation::Equals);
  if (!ii) out.insert(Relation::Touches);
  if (ii && !ie && !be) out.insert(Relation::Within);
  if (ii && !ei && !eb) out.insert(Relation::Contains);
  if (!ei && !eb) out.insert(Relation::Covers);
  if (!ie && !be) out.insert(Relation::CoveredBy);
  if (dim_a < dim_b) {
    if (ii && ie) out.insert(Relation::Crosses);
  } else if (dim_a > dim_b) {
    if (ii && ei) out.insert(Relation::Crosses);
  } else if (dim_a == 1) {
    if (m.at(L::Interior, L::Interior) == Dim::Point) out.insert(Relation::Crosses);
    if (m.at(L::Interior, L::Interior) == Dim::Curve && ie && ei) out.insert(Relation::Overlaps);
  } else if (ii && ie && ei) {
    out.insert(Relation::Overlaps);
  }
  return out;
}

RelationSet verify_pair(const Geometry& a, const Geometry& b) {
  return extract_relations(relate(a, b), a.dimension(), b.dimension());
}

}  // namespace geolink
