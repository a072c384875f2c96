#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "geolink/linkset.hpp"

namespace geolink::detail {

/// Collects candidate pairs and verifies them into a LinkSet. With one
/// thread every pair is verified on arrival; with more, pairs are queued and
/// verified in batches split across a short-lived pool. Queued geometries
/// must stay alive until the next flush().
class Verifier {
 public:
  using Observer = std::function<void(GeometryId, GeometryId)>;

  Verifier(std::size_t threads, Observer observer, bool self_join);

  void add(const Geometry& source, const Geometry& target, GeometryId sid, GeometryId tid);
  void flush();
  /// Flushes and returns the normalized LinkSet.
  LinkSet finish();

 private:
  struct Task {
    const Geometry* source;
    const Geometry* target;
    GeometryId sid;
    GeometryId tid;
  };

  std::size_t threads_;
  Observer observer_;
  bool self_join_;
  std::vector<Task> queue_;
  LinkSet links_;
};

}  // namespace geolink::detail
