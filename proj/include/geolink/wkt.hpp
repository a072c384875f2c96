#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "geolink/error.hpp"
#include "geolink/geometry.hpp"

namespace geolink {

/// Why an input record was not turned into a geometry.
enum class SkipCause { ParseError, UnsupportedType, EmptyGeometry, InvalidGeometry };

std::string_view skip_cause_name(SkipCause cause) noexcept;

class WktError : public Error {
 public:
  WktError(SkipCause cause, const std::string& what) : Error(what), cause_(cause) {}
  SkipCause cause() const noexcept { return cause_; }

 private:
  SkipCause cause_;
};

/// Parses POLYGON, MULTIPOLYGON, LINESTRING and MULTILINESTRING text; MULTI
/// types are exploded into one geometry per member. Z/M ordinates are
/// ignored. Throws WktError describing the skip cause.
std::vector<Geometry> parse_wkt(std::string_view text);

/// Shortest round-tripping text for each coordinate.
std::string to_wkt(const Geometry& g);

}  // namespace geolink
