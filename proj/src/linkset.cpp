#include "geolink/linkset.hpp"

#include <algorithm>

#include "geolink/error.hpp"

namespace geolink {

void LinkSet::record(GeometryId source, GeometryId target, RelationSet relations) {
  ++verified_;
  if (relations.empty()) return;
  ++related_;
  relations.for_each([&](Relation r) {
    links_.push_back({source, r, target});
    ++per_relation_[static_cast<std::size_t>(r)];
  });
}

void LinkSet::merge(const LinkSet& other) {
  links_.insert(links_.end(), other.links_.begin(), other.links_.end());
  for (std::size_t i = 0; i < per_relation_.size(); ++i) per_relation_[i] += other.per_relation_[i];
  verified_ += other.verified_;
  related_ += other.related_;
  degenerate_ += other.degenerate_;
}

void LinkSet::normalize() {
  std::sort(links_.begin(), links_.end());
  links_.erase(std::unique(links_.begin(), links_.end()), links_.end());
  per_relation_.fill(0);
  for (const auto& l : links_) ++per_relation_[static_cast<std::size_t>(l.relation)];
}

void LinkSet::remap(const std::vector<GeometryId>& source_ids, const std::vector<GeometryId>& target_ids) {
  for (auto& l : links_) {
    l.source = source_ids.at(l.source);
    l.target = target_ids.at(l.target);
  }
}

bool LinkSet::same_links(const LinkSet& other) const {
  auto a = links_;
  auto b = other.links_;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return a == b;
}

void verify_into(LinkSet& out, const Geometry& source, const Geometry& target,
                 GeometryId source_id, GeometryId target_id) {
  RelationSet rels;
  try {
    rels = verify_pair(source, target);
  } catch (const DegenerateGeometry&) {
    out.record_degenerate();
    return;
  }
  out.record(source_id, target_id, rels);
}

}  // namespace geolink
