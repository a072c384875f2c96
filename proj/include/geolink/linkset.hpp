#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "geolink/de9im.hpp"
#include "geolink/geometry.hpp"

namespace geolink {

/// A (source, target) pair surviving Filtering.
struct CandidatePair {
  GeometryId source = 0;
  GeometryId target = 0;
  double weight = 0.0;

  friend bool operator==(const CandidatePair& a, const CandidatePair& b) noexcept {
    return a.source == b.source && a.target == b.target;
  }
};

struct Link {
  GeometryId source = 0;
  Relation relation = Relation::Intersects;
  GeometryId target = 0;

  friend bool operator==(const Link&, const Link&) = default;
  friend auto operator<=>(const Link&, const Link&) = default;
};

/// Output of a run: one link per (pair, positive relation), seen from the
/// source side, plus the verification counters.
class LinkSet {
 public:
  /// Records one verified pair and its relations.
  void record(GeometryId source, GeometryId target, RelationSet relations);
  /// Records a pair the kernel could not resolve.
  void record_degenerate() noexcept {
    ++verified_;
    ++degenerate_;
  }

  /// Appends another set; call normalize() afterwards for sorted order.
  void merge(const LinkSet& other);
  /// Sorts the links and drops duplicates, fixing the counters.
  void normalize();
  /// Rewrites local ids as `source_ids[id]` / `target_ids[id]`; counters are kept.
  void remap(const std::vector<GeometryId>& source_ids, const std::vector<GeometryId>& target_ids);

  const std::vector<Link>& links() const noexcept { return links_; }
  std::size_t size() const noexcept { return links_.size(); }
  bool empty() const noexcept { return links_.empty(); }

  std::size_t verified() const noexcept { return verified_; }
  std::size_t related() const noexcept { return related_; }
  std::size_t degenerate() const noexcept { return degenerate_; }
  std::size_t count(Relation r) const noexcept { return per_relation_[static_cast<std::size_t>(r)]; }

  /// Set equality of the links; counters are ignored.
  bool same_links(const LinkSet& other) const;

 private:
  std::vector<Link> links_;
  std::array<std::size_t, kRelationCount> per_relation_{};
  std::size_t verified_ = 0;
  std::size_t related_ = 0;
  std::size_t degenerate_ = 0;
};

/// verify_pair with DegenerateGeometry mapped to the degenerate counter.
void verify_into(LinkSet& out, const Geometry& source, const Geometry& target,
                 GeometryId source_id, GeometryId target_id);

struct RunTimings {
  std::chrono::nanoseconds filtering{0};
  std::chrono::nanoseconds verification{0};

  double filtering_ms() const noexcept { return filtering.count() / 1e6; }
  double verification_ms() const noexcept { return verification.count() / 1e6; }
};

using PairCallback = std::function<void(GeometryId source, GeometryId target)>;

}  // namespace geolink
