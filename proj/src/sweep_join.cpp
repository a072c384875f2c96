#include "geolink/sweep_join.hpp"

#include <algorithm>
#include <cmath>
#include <list>

#include "geolink/error.hpp"
#include "geolink/grid_index.hpp"
#include "geolink/tree_index.hpp"

namespace geolink {

namespace {

bool y_overlap(const Mbr& a, const Mbr& b) noexcept { return a.y_min <= b.y_max && b.y_min <= a.y_max; }

std::vector<SweepItem> sorted_items(std::span<const Geometry> source, std::span<const Geometry> target) {
  std::vector<SweepItem> items;
  items.reserve(source.size() + target.size());
  for (std::size_t i = 0; i < source.size(); ++i) items.push_back({&source[i].mbr(), static_cast<GeometryId>(i), 0});
  for (std::size_t i = 0; i < target.size(); ++i) items.push_back({&target[i].mbr(), static_cast<GeometryId>(i), 1});
  std::sort(items.begin(), items.end(), [](const SweepItem& a, const SweepItem& b) {
    if (a.mbr->x_min != b.mbr->x_min) return a.mbr->x_min < b.mbr->x_min;
    if (a.tag != b.tag) return a.tag < b.tag;
    return a.id < b.id;
  });
  return items;
}

/// One list of active geometries per dataset. `accept` filters emitted pairs.
template <typename Accept>
std::size_t list_sweep(const std::vector<SweepItem>& items, const PairCallback& emit, Accept&& accept) {
  std::list<SweepItem> active[2];
  std::size_t peak = 0;
  for (const SweepItem& cur : items) {
    const double x = cur.mbr->x_min;
    for (auto& lst : active) {
      for (auto it = lst.begin(); it != lst.end();) {
        it = it->mbr->x_max < x ? lst.erase(it) : std::next(it);
      }
    }
    for (const SweepItem& other : active[1 - cur.tag]) {
      if (!y_overlap(*cur.mbr, *other.mbr)) continue;
      const SweepItem& s = cur.tag == 0 ? cur : other;
      const SweepItem& t = cur.tag == 0 ? other : cur;
      if (accept(*s.mbr, *t.mbr)) emit(s.id, t.id);
    }
    active[cur.tag].push_back(cur);
    peak = std::max(peak, active[0].size() + active[1].size());
  }
  return peak;
}

std::size_t clamp_index(double v, double lo, double width, std::size_t n) noexcept {
  if (!(width > 0.0)) return 0;
  const double q = std::floor((v - lo) / width);
  if (q <= 0.0) return 0;
  if (q >= static_cast<double>(n - 1)) return n - 1;
  return static_cast<std::size_t>(q);
}

}  // namespace

PlaneSweepJoin::PlaneSweepJoin(std::span<const Geometry> source, std::span<const Geometry> target,
                               SweepStructure structure)
    : structure_(structure), source_count_(source.size()) {
  if (source.empty() || target.empty()) throw EmptyDataset("plane sweep needs two nonempty datasets");
  items_ = sorted_items(source, target);
  if (structure_ == SweepStructure::Striped) {
    extent_ = extent_of(source);
    extent_.expand(extent_of(target));
    double avg = 0.0;
    for (const auto& g : source) avg += g.mbr().width();
    avg /= static_cast<double>(source.size());
    avg_width_ = avg > 0.0 ? avg : 1.0;
  }
}

void PlaneSweepJoin::run(const PairCallback& emit, SweepStats* stats) const {
  SweepStats st;
  if (structure_ == SweepStructure::List) {
    st.peak_active = list_sweep(items_, emit, [](const Mbr&, const Mbr&) { return true; });
  } else {
    // Vertical stripes of the average source width, each swept on its own;
    // a pair belongs to the stripe holding the larger of the two x_min.
    const Mbr& ext = extent_;
    std::size_t n = 1;
    if (ext.width() > 0.0) {
      n = static_cast<std::size_t>(
          std::min<double>(std::ceil(ext.width() / avg_width_), 4.0 * static_cast<double>(source_count_)));
      n = std::max<std::size_t>(n, 1);
    }
    const double sw = ext.width() / static_cast<double>(n);
    std::vector<std::vector<SweepItem>> stripes(n);
    for (const auto& it : items_) {
      const std::size_t lo = clamp_index(it.mbr->x_min, ext.x_min, sw, n);
      const std::size_t hi = clamp_index(it.mbr->x_max, ext.x_min, sw, n);
      for (std::size_t k = lo; k <= hi; ++k) stripes[k].push_back(it);
    }
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t peak = list_sweep(stripes[k], emit, [&](const Mbr& a, const Mbr& b) {
        return clamp_index(std::max(a.x_min, b.x_min), ext.x_min, sw, n) == k;
      });
      st.peak_active = std::max(st.peak_active, peak);
    }
    st.stripes = n;
  }
  if (stats) *stats = st;
}

void plane_sweep(std::span<const Geometry> source, std::span<const Geometry> target, SweepStructure structure,
                 const PairCallback& emit, SweepStats* stats) {
  PlaneSweepJoin(source, target, structure).run(emit, stats);
}

PbsmJoin::PbsmJoin(std::span<const Geometry> source, std::span<const Geometry> target, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("PBSM needs at least one partition per axis");
  if (source.empty() || target.empty()) throw EmptyDataset("PBSM needs two nonempty datasets");
  nx_ = static_cast<std::size_t>(nx);
  ny_ = static_cast<std::size_t>(ny);
  extent_ = extent_of(source);
  extent_.expand(extent_of(target));
  const double cw = extent_.width() / static_cast<double>(nx_);
  const double ch = extent_.height() / static_cast<double>(ny_);
  parts_.resize(nx_ * ny_);
  for (const auto& it : sorted_items(source, target)) {
    const std::size_t x0 = clamp_index(it.mbr->x_min, extent_.x_min, cw, nx_);
    const std::size_t x1 = clamp_index(it.mbr->x_max, extent_.x_min, cw, nx_);
    const std::size_t y0 = clamp_index(it.mbr->y_min, extent_.y_min, ch, ny_);
    const std::size_t y1 = clamp_index(it.mbr->y_max, extent_.y_min, ch, ny_);
    for (std::size_t x = x0; x <= x1; ++x) {
      for (std::size_t y = y0; y <= y1; ++y) parts_[x * ny_ + y].push_back(it);
    }
  }
}

void PbsmJoin::run(const PairCallback& emit) const {
  const double cw = extent_.width() / static_cast<double>(nx_);
  const double ch = extent_.height() / static_cast<double>(ny_);
  for (std::size_t x = 0; x < nx_; ++x) {
    for (std::size_t y = 0; y < ny_; ++y) {
      const auto& part = parts_[x * ny_ + y];
      if (part.size() < 2) continue;
      list_sweep(part, emit, [&](const Mbr& a, const Mbr& b) {
        return clamp_index(std::max(a.x_min, b.x_min), extent_.x_min, cw, nx_) == x &&
               clamp_index(std::min(a.y_max, b.y_max), extent_.y_min, ch, ny_) == y;
      });
    }
  }
}

void pbsm(std::span<const Geometry> source, std::span<const Geometry> target, int nx, int ny,
          const PairCallback& emit) {
  PbsmJoin(source, target, nx, ny).run(emit);
}

StripeIndex::StripeIndex(std::span<const Geometry> source, StripeStorage storage, std::size_t node_capacity)
    : storage_(storage) {
  if (source.empty()) throw EmptyDataset("cannot index an empty source dataset");
  double avg = 0.0;
  for (const auto& g : source) avg += g.mbr().width();
  avg /= static_cast<double>(source.size());
  width_ = avg > 0.0 ? avg : 1.0;
  mbrs_.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Mbr& m = source[i].mbr();
    mbrs_.push_back(m);
    for (auto k = stripe_of(m.x_min); k <= stripe_of(m.x_max); ++k) ids_[k].push_back(static_cast<GeometryId>(i));
  }
  if (storage_ == StripeStorage::Str) {
    for (auto& [k, ids] : ids_) {
      std::vector<IndexEntry> entries;
      entries.reserve(ids.size());
      for (GeometryId id : ids) entries.push_back({mbrs_[id], id});
      trees_.emplace(k, std::make_unique<StrTree>(std::move(entries), node_capacity));
    }
    ids_.clear();
  }
}

StripeIndex::~StripeIndex() = default;

std::int64_t StripeIndex::stripe_of(double x) const noexcept { return tile_index(x, width_); }

std::size_t StripeIndex::stripe_count() const noexcept {
  return storage_ == StripeStorage::Map ? ids_.size() : trees_.size();
}

std::vector<GeometryId> StripeIndex::stripe_contents(std::int64_t stripe) const {
  if (storage_ == StripeStorage::Map) {
    auto it = ids_.find(stripe);
    return it == ids_.end() ? std::vector<GeometryId>{} : it->second;
  }
  auto it = trees_.find(stripe);
  if (it == trees_.end()) return {};
  std::vector<GeometryId> out;
  it->second->candidates({-INFINITY, -INFINITY, INFINITY, INFINITY}, out);
  return out;
}

void StripeIndex::candidates(const Mbr& t, std::vector<GeometryId>& out) const {
  out.clear();
  const auto lo = stripe_of(t.x_min);
  const auto hi = stripe_of(t.x_max);
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (storage_ == StripeStorage::Map) {
    auto gather = [&](const std::vector<GeometryId>& ids) { out.insert(out.end(), ids.begin(), ids.end()); };
    if (span > ids_.size()) {
      for (const auto& [k, ids] : ids_) {
        if (lo <= k && k <= hi) gather(ids);
      }
    } else {
      for (auto k = lo; k <= hi; ++k) {
        if (auto it = ids_.find(k); it != ids_.end()) gather(it->second);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    std::erase_if(out, [&](GeometryId id) { return !mbr_intersects(mbrs_[id], t); });
    return;
  }
  std::vector<GeometryId> part;
  auto probe = [&](const StrTree& tree) {
    tree.candidates(t, part);
    out.insert(out.end(), part.begin(), part.end());
  };
  if (span > trees_.size()) {
    for (const auto& [k, tree] : trees_) {
      if (lo <= k && k <= hi) probe(*tree);
    }
  } else {
    for (auto k = lo; k <= hi; ++k) {
      if (auto it = trees_.find(k); it != trees_.end()) probe(*it->second);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

std::size_t StripeIndex::memory_bytes() const noexcept {
  std::size_t bytes = sizeof(*this) + mbrs_.capacity() * sizeof(Mbr);
  for (const auto& [k, ids] : ids_) bytes += sizeof(k) + sizeof(ids) + 2 * sizeof(void*) + ids.capacity() * sizeof(GeometryId);
  for (const auto& [k, tree] : trees_) bytes += sizeof(k) + 2 * sizeof(void*) + tree->memory_bytes();
  return bytes;
}

}  // namespace geolink
