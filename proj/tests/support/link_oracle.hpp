#pragma once

// Nested-loop Filtering followed by the kernel: the reference LinkSet that
// every index must reproduce.

#include "geolink/linkset.hpp"
#include "support/random_geometry.hpp"

namespace geolink::testing {

inline LinkSet nested_loop_links(const Dataset& s, const Dataset& t, bool self_join = false) {
  LinkSet out;
  for (const auto& [i, j] : mbr_pairs(s, t)) {
    if (self_join && !(i < j)) continue;
    verify_into(out, s[i], t[j], i, j);
  }
  out.normalize();
  return out;
}

}  // namespace geolink::testing
