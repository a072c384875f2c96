#include "geolink/grid_index.hpp"

#include <algorithm>
#include <cmath>

#include "geolink/error.hpp"

namespace geolink {

namespace {

constexpr double kIndexLimit = 4.0e18;

void accumulate(std::span<const Geometry> geoms, double& w, double& h) {
  for (const auto& g : geoms) {
    w += g.mbr().width();
    h += g.mbr().height();
  }
}

GridSpec finish_granularity(double w, double h) {
  if (w <= 0.0 && h <= 0.0) return {1.0, 1.0};
  if (w <= 0.0) w = h;
  if (h <= 0.0) h = w;
  return {w, h};
}

}  // namespace

std::uint64_t span_overlap(const TileSpan& a, const TileSpan& b) noexcept {
  const auto x0 = std::max(a.x_lo, b.x_lo);
  const auto x1 = std::min(a.x_hi, b.x_hi);
  const auto y0 = std::max(a.y_lo, b.y_lo);
  const auto y1 = std::min(a.y_hi, b.y_hi);
  if (x0 > x1 || y0 > y1) return 0;
  return static_cast<std::uint64_t>(x1 - x0 + 1) * static_cast<std::uint64_t>(y1 - y0 + 1);
}

GridSpec dynamic_granularity(std::span<const Geometry> geoms) {
  if (geoms.empty()) throw EmptyDataset("cannot derive a grid from an empty dataset");
  double w = 0.0;
  double h = 0.0;
  accumulate(geoms, w, h);
  const auto n = static_cast<double>(geoms.size());
  return finish_granularity(w / n, h / n);
}

GridSpec dynamic_granularity(std::span<const Geometry> a, std::span<const Geometry> b) {
  if (a.empty() && b.empty()) throw EmptyDataset("cannot derive a grid from empty datasets");
  double w = 0.0;
  double h = 0.0;
  accumulate(a, w, h);
  accumulate(b, w, h);
  const auto n = static_cast<double>(a.size() + b.size());
  return finish_granularity(w / n, h / n);
}

std::int64_t tile_index(double v, double w) noexcept {
  const double q = std::floor(v / w);
  if (q >= kIndexLimit) return static_cast<std::int64_t>(kIndexLimit);
  if (q <= -kIndexLimit) return -static_cast<std::int64_t>(kIndexLimit);
  return static_cast<std::int64_t>(q);
}

TileSpan tiles_for(const Mbr& m, const GridSpec& g) noexcept {
  return {tile_index(m.x_min, g.tile_width), tile_index(m.x_max, g.tile_width),
          tile_index(m.y_min, g.tile_height), tile_index(m.y_max, g.tile_height)};
}

TileKey reference_point_owner(const Mbr& a, const Mbr& b, const GridSpec& g) noexcept {
  const double x = std::max(a.x_min, b.x_min);
  const double y = std::min(a.y_max, b.y_max);
  return {tile_index(x, g.tile_width), tile_index(y, g.tile_height)};
}

void Equigrid::insert(const Mbr& m, GeometryId id, bool target) {
  tiles_for(m, spec_).for_each([&](TileKey k) {
    auto& c = cells_[k];
    (target ? c.target : c.source).push_back(id);
  });
}

Equigrid Equigrid::build_source_only(std::span<const Geometry> source, const GridSpec& g) {
  if (source.empty()) throw EmptyDataset("cannot index an empty source dataset");
  Equigrid grid(g);
  grid.source_mbrs_.reserve(source.size());
  // Rehashing a large node map touches every node; size it once.
  std::size_t entries = 0;
  for (const auto& s : source) entries += static_cast<std::size_t>(std::min<std::uint64_t>(tiles_for(s.mbr(), g).size(), 1u << 20));
  grid.cells_.reserve(std::min(entries, std::size_t{1} << 26));
  for (std::size_t i = 0; i < source.size(); ++i) {
    grid.source_mbrs_.push_back(source[i].mbr());
    grid.insert(source[i].mbr(), static_cast<GeometryId>(i), false);
  }
  return grid;
}

Equigrid Equigrid::build_both(std::span<const Geometry> source, std::span<const Geometry> target,
                              const GridSpec& g) {
  Equigrid grid = build_source_only(source, g);
  if (target.empty()) throw EmptyDataset("cannot index an empty target dataset");
  for (std::size_t i = 0; i < target.size(); ++i) {
    grid.insert(target[i].mbr(), static_cast<GeometryId>(i), true);
  }
  return grid;
}

const Equigrid::Cell* Equigrid::cell(const TileKey& k) const {
  auto it = cells_.find(k);
  return it == cells_.end() ? nullptr : &it->second;
}

void Equigrid::candidates_for(const Mbr& t, std::vector<GeometryId>& out) const {
  out.clear();
  const TileSpan span = tiles_for(t, spec_);
  auto visit = [&](const TileKey& k, const Cell& c) {
    for (GeometryId s : c.source) {
      const Mbr& sm = source_mbrs_[s];
      if (mbr_intersects(sm, t) && reference_point_owner(sm, t, spec_) == k) out.push_back(s);
    }
  };
  if (span.size() > cells_.size()) {
    for (const auto& [k, c] : cells_) {
      if (span.contains(k)) visit(k, c);
    }
  } else {
    span.for_each([&](TileKey k) {
      if (auto it = cells_.find(k); it != cells_.end()) visit(k, it->second);
    });
  }
  std::sort(out.begin(), out.end());
}

std::vector<GeometryId> Equigrid::candidates_for(const Geometry& t) const {
  std::vector<GeometryId> out;
  candidates_for(t.mbr(), out);
  return out;
}

std::vector<TileKey> Equigrid::sorted_keys() const {
  std::vector<TileKey> keys;
  keys.reserve(cells_.size());
  for (const auto& kv : cells_) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::size_t Equigrid::memory_bytes() const noexcept {
  std::size_t bytes = sizeof(*this) + source_mbrs_.capacity() * sizeof(Mbr) +
                      cells_.bucket_count() * sizeof(void*);
  for (const auto& [k, c] : cells_) {
    bytes += sizeof(TileKey) + sizeof(Cell) + 2 * sizeof(void*) +
             (c.source.capacity() + c.target.capacity()) * sizeof(GeometryId);
  }
  return bytes;
}

CompactGrid::CompactGrid(std::span<const Geometry> source, const GridSpec& g) : source_(source), spec_(g) {
  if (source.empty()) throw EmptyDataset("cannot index an empty source dataset");
  Mbr ext = source[0].mbr();
  for (const auto& s : source) ext.expand(s.mbr());
  // Relative tile coordinates must fit 32 bits; widen the tiles otherwise.
  constexpr double kMaxTiles = 2147483648.0;
  if ((ext.x_max - ext.x_min) / spec_.tile_width >= kMaxTiles - 2) spec_.tile_width = (ext.x_max - ext.x_min) / (kMaxTiles / 2);
  if ((ext.y_max - ext.y_min) / spec_.tile_height >= kMaxTiles - 2) spec_.tile_height = (ext.y_max - ext.y_min) / (kMaxTiles / 2);
  const TileSpan all = tiles_for(ext, spec_);
  x0_ = all.x_lo;
  y0_ = all.y_lo;
  nx_ = all.x_hi - all.x_lo + 1;
  ny_ = all.y_hi - all.y_lo + 1;

  // Sweep the rows upwards. A source is active from its first row to its
  // last; each row's entries are sorted by (x, id).
  auto span_of = [&](GeometryId i) { return tiles_for(source[i].mbr(), spec_); };
  std::vector<std::pair<std::uint32_t, GeometryId>> order(source.size());  // (first row, id)
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto id = static_cast<GeometryId>(i);
    order[i] = {static_cast<std::uint32_t>(span_of(id).y_lo - y0_), id};
  }
  std::sort(order.begin(), order.end());
  std::vector<GeometryId> active;
  std::vector<std::pair<std::uint32_t, GeometryId>> row;
  std::size_t next = 0;
  std::int64_t y = 0;
  while (next < order.size() || !active.empty()) {
    if (active.empty()) y = y0_ + order[next].first;
    while (next < order.size() && y0_ + order[next].first == y) active.push_back(order[next++].second);
    row.clear();
    for (GeometryId i : active) {
      const TileSpan sp = span_of(i);
      for (auto x = sp.x_lo; x <= sp.x_hi; ++x) row.emplace_back(static_cast<std::uint32_t>(x - x0_), i);
    }
    std::sort(row.begin(), row.end());
    row_y_.push_back(static_cast<std::uint32_t>(y - y0_));
    row_begin_.push_back(static_cast<std::uint32_t>(cell_x_.size()));
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k == 0 || row[k].first != row[k - 1].first) {
        cell_x_.push_back(row[k].first);
        cell_begin_.push_back(static_cast<std::uint32_t>(ids_.size()));
      }
      ids_.push_back(row[k].second);
    }
    std::erase_if(active, [&](GeometryId i) { return span_of(i).y_hi <= y; });
    ++y;
  }
  row_begin_.push_back(static_cast<std::uint32_t>(cell_x_.size()));
  cell_begin_.push_back(static_cast<std::uint32_t>(ids_.size()));
  row_y_.shrink_to_fit();
  row_begin_.shrink_to_fit();
  cell_x_.shrink_to_fit();
  cell_begin_.shrink_to_fit();
  ids_.shrink_to_fit();
}

void CompactGrid::candidates(const Mbr& t, std::vector<GeometryId>& out) const {
  out.clear();
  const TileSpan sp = tiles_for(t, spec_);
  const auto y_lo = std::max<std::int64_t>(sp.y_lo - y0_, 0), y_hi = std::min<std::int64_t>(sp.y_hi - y0_, ny_ - 1);
  const auto x_lo = std::max<std::int64_t>(sp.x_lo - x0_, 0), x_hi = std::min<std::int64_t>(sp.x_hi - x0_, nx_ - 1);
  if (y_lo > y_hi || x_lo > x_hi) return;
  auto r = static_cast<std::size_t>(
      std::lower_bound(row_y_.begin(), row_y_.end(), static_cast<std::uint32_t>(y_lo)) - row_y_.begin());
  for (; r < row_y_.size() && row_y_[r] <= y_hi; ++r) {
    const auto first = cell_x_.begin() + row_begin_[r], last = cell_x_.begin() + row_begin_[r + 1];
    for (auto c = std::lower_bound(first, last, static_cast<std::uint32_t>(x_lo)); c != last && *c <= x_hi; ++c) {
      const auto ci = static_cast<std::size_t>(c - cell_x_.begin());
      const TileKey k{x0_ + *c, y0_ + row_y_[r]};
      for (auto e = cell_begin_[ci]; e < cell_begin_[ci + 1]; ++e) {
        const Mbr& sm = source_[ids_[e]].mbr();
        if (mbr_intersects(sm, t) && reference_point_owner(sm, t, spec_) == k) out.push_back(ids_[e]);
      }
    }
  }
  std::sort(out.begin(), out.end());
}

std::size_t CompactGrid::memory_bytes() const noexcept {
  return sizeof(*this) + (row_y_.capacity() + row_begin_.capacity() + cell_x_.capacity() + cell_begin_.capacity()) *
                             sizeof(std::uint32_t) +
         ids_.capacity() * sizeof(GeometryId);
}

void radon_join(std::span<const Geometry> source, std::span<const Geometry> target,
                const GridSpec& g, const PairCallback& emit) {
  if (source.empty() || target.empty()) throw EmptyDataset("RADON needs two nonempty datasets");
  radon_join(Equigrid::build_both(source, target, g), source, target, emit);
}

void radon_join(const Equigrid& grid, std::span<const Geometry> source,
                std::span<const Geometry> target, const PairCallback& emit) {
  const GridSpec& g = grid.spec();
  for (const TileKey& k : grid.sorted_keys()) {
    const auto& c = *grid.cell(k);
    if (c.target.empty()) continue;
    for (GeometryId s : c.source) {
      const Mbr& sm = source[s].mbr();
      for (GeometryId t : c.target) {
        const Mbr& tm = target[t].mbr();
        if (mbr_intersects(sm, tm) && reference_point_owner(sm, tm, g) == k) emit(s, t);
      }
    }
  }
}

}  // namespace geolink
