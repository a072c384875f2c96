#pragma once

#include <cstddef>
#include <vector>

#include "geolink/geometry.hpp"

namespace geolink {

/// An index over the source dataset that the target side probes one
/// geometry at a time (memory-frugal algorithms).
class SourceIndex {
 public:
  virtual ~SourceIndex() = default;

  /// Fills `out` with the sorted, duplicate-free positions of the sources
  /// whose MBR intersects `t`.
  virtual void candidates(const Mbr& t, std::vector<GeometryId>& out) const = 0;

  /// Approximate footprint of the index structure itself.
  virtual std::size_t memory_bytes() const noexcept = 0;
};

}  // namespace geolink
