#include "geolink/tree_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geolink/error.hpp"

namespace geolink {

namespace {

Mbr united(const Mbr& a, const Mbr& b) noexcept {
  Mbr m = a;
  m.expand(b);
  return m;
}

double enlargement(const Mbr& base, const Mbr& add) noexcept { return united(base, add).area() - base.area(); }

template <typename T, typename GetMbr>
Mbr cover(const std::vector<T>& items, std::size_t first, std::size_t count, GetMbr get) {
  Mbr m = get(items[first]);
  for (std::size_t i = first + 1; i < first + count; ++i) m.expand(get(items[i]));
  return m;
}

/// Sort-Tile-Recursive grouping: reorders `items` and returns the
/// [first, count) ranges of consecutive groups of at most `cap` items.
template <typename T, typename GetMbr>
std::vector<std::pair<std::uint32_t, std::uint32_t>> str_groups(std::vector<T>& items, std::size_t cap,
                                                                 GetMbr get) {
  const std::size_t n = items.size();
  const std::size_t pages = (n + cap - 1) / cap;
  const auto slices = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(pages))));
  const std::size_t slice_len = slices * cap;
  std::stable_sort(items.begin(), items.end(),
                   [&](const T& a, const T& b) { return get(a).x_min < get(b).x_min; });
  std::vector<std::pair<std::uint32_t, std::uint32_t>> groups;
  for (std::size_t s = 0; s < n; s += slice_len) {
    const std::size_t e = std::min(n, s + slice_len);
    std::stable_sort(items.begin() + static_cast<std::ptrdiff_t>(s), items.begin() + static_cast<std::ptrdiff_t>(e),
                     [&](const T& a, const T& b) { return get(a).y_min < get(b).y_min; });
    for (std::size_t g = s; g < e; g += cap) {
      groups.emplace_back(static_cast<std::uint32_t>(g), static_cast<std::uint32_t>(std::min(cap, e - g)));
    }
  }
  return groups;
}

std::vector<IndexEntry> entries_of(std::span<const Geometry> source) {
  std::vector<IndexEntry> out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) out.push_back({source[i].mbr(), static_cast<GeometryId>(i)});
  return out;
}

void require_capacity(std::size_t m) {
  if (m < 4) throw ConfigError("node capacity must be at least 4");
}

}  // namespace

// ---------------------------------------------------------------- R-Tree

RTree::RTree(std::size_t max_entries)
    : max_entries_(max_entries),
      min_entries_(std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(0.4 * static_cast<double>(max_entries))))) {
  require_capacity(max_entries);
  nodes_.push_back(Node{});
}

RTree::RTree(std::span<const Geometry> source, std::size_t max_entries) : RTree(max_entries) {
  if (source.empty()) throw EmptyDataset("cannot index an empty source dataset");
  for (std::size_t i = 0; i < source.size(); ++i) insert(source[i].mbr(), static_cast<GeometryId>(i));
}

void RTree::insert(const Mbr& m, GeometryId id) {
  const IndexEntry e{m, id};
  if (size_ == 0) nodes_[root_].mbr = m;
  if (auto sibling = insert_rec(root_, e)) {
    Node r;
    r.leaf = false;
    r.children = {root_, *sibling};
    r.mbr = united(nodes_[root_].mbr, nodes_[*sibling].mbr);
    nodes_.push_back(std::move(r));
    root_ = static_cast<std::uint32_t>(nodes_.size() - 1);
  }
  ++size_;
}

std::optional<std::uint32_t> RTree::insert_rec(std::uint32_t node, const IndexEntry& e) {
  if (nodes_[node].leaf) {
    nodes_[node].entries.push_back(e);
  } else {
    std::uint32_t best = 0;
    double best_enl = std::numeric_limits<double>::infinity();
    double best_area = std::numeric_limits<double>::infinity();
    for (std::uint32_t c : nodes_[node].children) {
      const double enl = enlargement(nodes_[c].mbr, e.mbr);
      const double area = nodes_[c].mbr.area();
      if (enl < best_enl || (enl == best_enl && area < best_area)) {
        best = c;
        best_enl = enl;
        best_area = area;
      }
    }
    if (auto sibling = insert_rec(best, e)) nodes_[node].children.push_back(*sibling);
  }
  const std::size_t fill = nodes_[node].leaf ? nodes_[node].entries.size() : nodes_[node].children.size();
  if (fill > max_entries_) return split(node);
  refresh(node);
  return std::nullopt;
}

void RTree::refresh(std::uint32_t node) {
  Node& n = nodes_[node];
  if (n.leaf) {
    if (!n.entries.empty()) n.mbr = cover(n.entries, 0, n.entries.size(), [](const IndexEntry& x) { return x.mbr; });
  } else {
    n.mbr = nodes_[n.children.front()].mbr;
    for (std::uint32_t c : n.children) n.mbr.expand(nodes_[c].mbr);
  }
}

std::uint32_t RTree::split(std::uint32_t node) {
  const bool leaf = nodes_[node].leaf;
  std::vector<Mbr> boxes;
  if (leaf) {
    for (const auto& e : nodes_[node].entries) boxes.push_back(e.mbr);
  } else {
    for (std::uint32_t c : nodes_[node].children) boxes.push_back(nodes_[c].mbr);
  }
  const std::size_t n = boxes.size();

  // Seeds: the two largest boxes by area, then by half-perimeter, then by position.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (boxes[a].area() != boxes[b].area()) return boxes[a].area() > boxes[b].area();
    const double pa = boxes[a].width() + boxes[a].height();
    const double pb = boxes[b].width() + boxes[b].height();
    if (pa != pb) return pa > pb;
    return a < b;
  });
  const std::size_t s1 = order[0];
  const std::size_t s2 = order[1];

  std::vector<int> group(n, -1);
  group[s1] = 0;
  group[s2] = 1;
  Mbr gm[2] = {boxes[s1], boxes[s2]};
  std::size_t count[2] = {1, 1};
  std::size_t left = n - 2;
  for (std::size_t i = 0; i < n; ++i) {
    if (group[i] != -1) continue;
    int g;
    if (count[0] + left == min_entries_) {
      g = 0;
    } else if (count[1] + left == min_entries_) {
      g = 1;
    } else {
      const double e0 = enlargement(gm[0], boxes[i]);
      const double e1 = enlargement(gm[1], boxes[i]);
      if (e0 != e1) {
        g = e0 < e1 ? 0 : 1;
      } else if (gm[0].area() != gm[1].area()) {
        g = gm[0].area() < gm[1].area() ? 0 : 1;
      } else {
        g = count[0] <= count[1] ? 0 : 1;
      }
    }
    group[i] = g;
    gm[g].expand(boxes[i]);
    ++count[g];
    --left;
  }

  Node sibling;
  sibling.leaf = leaf;
  Node& cur = nodes_[node];
  if (leaf) {
    std::vector<IndexEntry> keep;
    for (std::size_t i = 0; i < n; ++i) (group[i] == 0 ? keep : sibling.entries).push_back(cur.entries[i]);
    cur.entries = std::move(keep);
  } else {
    std::vector<std::uint32_t> keep;
    for (std::size_t i = 0; i < n; ++i) (group[i] == 0 ? keep : sibling.children).push_back(cur.children[i]);
    cur.children = std::move(keep);
  }
  cur.mbr = gm[0];
  sibling.mbr = gm[1];
  nodes_.push_back(std::move(sibling));
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

void RTree::candidates(const Mbr& t, std::vector<GeometryId>& out) const {
  out.clear();
  if (size_ == 0) return;
  std::vector<std::uint32_t> stack{root_};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (!mbr_intersects(n.mbr, t)) continue;
    if (n.leaf) {
      for (const auto& e : n.entries) {
        if (mbr_intersects(e.mbr, t)) out.push_back(e.id);
      }
    } else {
      for (std::uint32_t c : n.children) stack.push_back(c);
    }
  }
  std::sort(out.begin(), out.end());
}

std::size_t RTree::memory_bytes() const noexcept {
  std::size_t bytes = sizeof(*this) + nodes_.capacity() * sizeof(Node);
  for (const auto& n : nodes_) {
    bytes += n.children.capacity() * sizeof(std::uint32_t) + n.entries.capacity() * sizeof(IndexEntry);
  }
  return bytes;
}

std::size_t RTree::height() const noexcept {
  std::size_t h = 1;
  std::uint32_t n = root_;
  while (!nodes_[n].leaf) {
    n = nodes_[n].children.front();
    ++h;
  }
  return h;
}

std::vector<Mbr> RTree::root_child_mbrs() const {
  std::vector<Mbr> out;
  const Node& r = nodes_[root_];
  if (r.leaf) {
    for (const auto& e : r.entries) out.push_back(e.mbr);
  } else {
    for (std::uint32_t c : r.children) out.push_back(nodes_[c].mbr);
  }
  return out;
}

bool RTree::audit(std::string* why) const {
  if (size_ == 0) return true;
  std::size_t leaf_depth = 0;
  return audit_rec(root_, 1, leaf_depth, why);
}

bool RTree::audit_rec(std::uint32_t node, std::size_t depth, std::size_t& leaf_depth, std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = "node " + std::to_string(node) + ": " + msg;
    return false;
  };
  const Node& n = nodes_[node];
  const bool is_root = node == root_;
  const std::size_t fill = n.leaf ? n.entries.size() : n.children.size();
  if (fill == 0) return fail("empty node");
  if (fill > max_entries_) return fail("over capacity");
  if (!is_root && fill < min_entries_) return fail("under minimum fill");
  if (!n.leaf && is_root && fill < 2) return fail("internal root with one child");
  Mbr tight = n.leaf ? n.entries.front().mbr : nodes_[n.children.front()].mbr;
  if (n.leaf) {
    for (const auto& e : n.entries) tight.expand(e.mbr);
    if (leaf_depth == 0) leaf_depth = depth;
    if (leaf_depth != depth) return fail("leaves at different depths");
  } else {
    for (std::uint32_t c : n.children) {
      tight.expand(nodes_[c].mbr);
      if (!audit_rec(c, depth + 1, leaf_depth, why)) return false;
    }
  }
  if (!(tight == n.mbr)) return fail("MBR is not tight");
  return true;
}

// ---------------------------------------------------------------- Quadtree

Quadtree::Quadtree(std::span<const Geometry> source, std::size_t max_entries, std::size_t max_depth,
                   std::optional<Mbr> bounds)
    : max_entries_(max_entries), max_depth_(max_depth) {
  if (source.empty()) throw EmptyDataset("cannot index an empty source dataset");
  if (max_entries < 1) throw ConfigError("node capacity must be positive");
  if (max_depth < 1) throw ConfigError("maximum depth must be positive");
  Node root;
  root.bounds = bounds ? *bounds : extent_of(source);
  nodes_.push_back(std::move(root));
  for (std::size_t i = 0; i < source.size(); ++i) insert({source[i].mbr(), static_cast<GeometryId>(i)});
}

std::array<Mbr, 4> Quadtree::quadrants(const Mbr& b) const noexcept {
  const double cx = b.x_min + b.width() / 2.0;
  const double cy = b.y_min + b.height() / 2.0;
  return {Mbr{cx, cy, b.x_max, b.y_max}, Mbr{b.x_min, cy, cx, b.y_max}, Mbr{cx, b.y_min, b.x_max, cy},
          Mbr{b.x_min, b.y_min, cx, cy}};
}

int Quadtree::fitting_child(std::size_t node, const Mbr& m) const noexcept {
  const auto first = nodes_[node].first_child;
  for (int q = 0; q < 4; ++q) {
    if (nodes_[static_cast<std::size_t>(first + q)].bounds.contains(m)) return q;
  }
  return -1;
}

void Quadtree::insert(const IndexEntry& e) {
  std::size_t node = 0;
  while (nodes_[node].first_child >= 0) {
    const int q = fitting_child(node, e.mbr);
    if (q < 0) break;
    node = static_cast<std::size_t>(nodes_[node].first_child + q);
  }
  nodes_[node].entries.push_back(e);
  if (nodes_[node].first_child < 0 && nodes_[node].entries.size() > max_entries_ &&
      nodes_[node].depth < max_depth_) {
    split(node);
  }
}

void Quadtree::split(std::size_t node) {
  const auto quads = quadrants(nodes_[node].bounds);
  const auto first = static_cast<std::int32_t>(nodes_.size());
  const std::size_t depth = nodes_[node].depth + 1;
  for (const auto& q : quads) {
    Node child;
    child.bounds = q;
    child.depth = depth;
    nodes_.push_back(std::move(child));
  }
  nodes_[node].first_child = first;
  std::vector<IndexEntry> stay;
  for (const auto& e : nodes_[node].entries) {
    const int q = fitting_child(node, e.mbr);
    if (q < 0) {
      stay.push_back(e);
    } else {
      nodes_[static_cast<std::size_t>(first + q)].entries.push_back(e);
    }
  }
  nodes_[node].entries = std::move(stay);
}

void Quadtree::candidates(const Mbr& t, std::vector<GeometryId>& out) const {
  out.clear();
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t idx = stack.back();
    stack.pop_back();
    const Node& n = nodes_[idx];
    // Entries outside user-supplied bounds live at the root.
    if (idx != 0 && !mbr_intersects(n.bounds, t)) continue;
    for (const auto& e : n.entries) {
      if (mbr_intersects(e.mbr, t)) out.push_back(e.id);
    }
    if (n.first_child >= 0) {
      for (int q = 0; q < 4; ++q) stack.push_back(static_cast<std::size_t>(n.first_child + q));
    }
  }
  std::sort(out.begin(), out.end());
}

std::size_t Quadtree::memory_bytes() const noexcept {
  std::size_t bytes = sizeof(*this) + nodes_.capacity() * sizeof(Node);
  for (const auto& n : nodes_) bytes += n.entries.capacity() * sizeof(IndexEntry);
  return bytes;
}

std::size_t Quadtree::depth() const noexcept {
  std::size_t d = 1;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

// ---------------------------------------------------------------- STR tree

StrTree::StrTree(std::vector<IndexEntry> entries, std::size_t max_entries) : entries_(std::move(entries)) {
  require_capacity(max_entries);
  if (entries_.empty()) return;
  auto groups = str_groups(entries_, max_entries, [](const IndexEntry& e) { return e.mbr; });
  std::vector<Node> level;
  for (auto [f, c] : groups) {
    level.push_back({cover(entries_, f, c, [](const IndexEntry& e) { return e.mbr; }), f, c});
  }
  levels_.push_back(std::move(level));
  while (levels_.back().size() > 1) {
    auto& below = levels_.back();
    groups = str_groups(below, max_entries, [](const Node& n) { return n.mbr; });
    std::vector<Node> up;
    for (auto [f, c] : groups) up.push_back({cover(below, f, c, [](const Node& n) { return n.mbr; }), f, c});
    levels_.push_back(std::move(up));
  }
}

void StrTree::candidates(const Mbr& t, std::vector<GeometryId>& out) const {
  out.clear();
  if (levels_.empty()) return;
  std::vector<std::pair<std::size_t, std::uint32_t>> stack{{levels_.size() - 1, 0}};
  while (!stack.empty()) {
    auto [level, idx] = stack.back();
    stack.pop_back();
    const Node& n = levels_[level][idx];
    if (!mbr_intersects(n.mbr, t)) continue;
    for (std::uint32_t c = n.first; c < n.first + n.count; ++c) {
      if (level == 0) {
        if (mbr_intersects(entries_[c].mbr, t)) out.push_back(entries_[c].id);
      } else {
        stack.emplace_back(level - 1, c);
      }
    }
  }
  std::sort(out.begin(), out.end());
}

std::size_t StrTree::memory_bytes() const noexcept {
  std::size_t bytes = sizeof(*this) + entries_.capacity() * sizeof(IndexEntry);
  for (const auto& l : levels_) bytes += l.capacity() * sizeof(Node);
  return bytes;
}

// ---------------------------------------------------------------- CR-Tree

namespace {

std::uint32_t quant_max(int bits) noexcept { return (1U << bits) - 1U; }

double dequant_value(std::uint32_t q, double lo, double hi, std::uint32_t top) noexcept {
  if (q == 0) return lo;
  if (q >= top) return hi;
  return lo + (hi - lo) * (static_cast<double>(q) / static_cast<double>(top));
}

std::uint16_t quant_low(double v, double lo, double hi, std::uint32_t top) noexcept {
  if (!(hi > lo) || v <= lo) return 0;
  if (v >= hi) return static_cast<std::uint16_t>(top);
  auto q = static_cast<std::int64_t>(std::floor((v - lo) / (hi - lo) * top));
  q = std::clamp<std::int64_t>(q, 0, top);
  while (q > 0 && dequant_value(static_cast<std::uint32_t>(q), lo, hi, top) > v) --q;
  return static_cast<std::uint16_t>(q);
}

std::uint16_t quant_high(double v, double lo, double hi, std::uint32_t top) noexcept {
  if (!(hi > lo)) return 0;
  if (v >= hi) return static_cast<std::uint16_t>(top);
  if (v <= lo) return 0;
  auto q = static_cast<std::int64_t>(std::ceil((v - lo) / (hi - lo) * top));
  q = std::clamp<std::int64_t>(q, 0, top);
  while (q < static_cast<std::int64_t>(top) && dequant_value(static_cast<std::uint32_t>(q), lo, hi, top) < v) ++q;
  return static_cast<std::uint16_t>(q);
}

}  // namespace

QuantizedMbr quantize(const Mbr& m, const Mbr& ref, int bits) noexcept {
  const std::uint32_t top = quant_max(bits);
  return {quant_low(m.x_min, ref.x_min, ref.x_max, top), quant_low(m.y_min, ref.y_min, ref.y_max, top),
          quant_high(m.x_max, ref.x_min, ref.x_max, top), quant_high(m.y_max, ref.y_min, ref.y_max, top)};
}

Mbr dequantize(const QuantizedMbr& q, const Mbr& ref, int bits) noexcept {
  const std::uint32_t top = quant_max(bits);
  // A degenerate reference axis dequantizes to the whole (zero-length) axis.
  auto hi = [&](std::uint16_t v, double lo, double h) { return h > lo ? dequant_value(v, lo, h, top) : h; };
  return {dequant_value(q.x0, ref.x_min, ref.x_max, top), dequant_value(q.y0, ref.y_min, ref.y_max, top),
          hi(q.x1, ref.x_min, ref.x_max), hi(q.y1, ref.y_min, ref.y_max)};
}

CrTree::CrTree(std::span<const Geometry> source, std::size_t max_entries, int quant_bits)
    : source_(source), bits_(quant_bits), bytes_per_value_(quant_bits <= 8 ? 1 : 2) {
  require_capacity(max_entries);
  if (quant_bits != 4 && quant_bits != 8 && quant_bits != 16) {
    throw ConfigError("quantization bits must be 4, 8 or 16");
  }
  if (source.empty()) throw EmptyDataset("cannot index an empty source dataset");
  auto entries = entries_of(source);
  auto get_entry = [](const IndexEntry& e) { return e.mbr; };
  auto get_node = [](const Node& n) { return n.ref; };

  auto groups = str_groups(entries, max_entries, get_entry);
  std::vector<Node> level;
  for (auto [f, c] : groups) level.push_back({cover(entries, f, c, get_entry), f, c});
  levels_.push_back(std::move(level));
  while (levels_.back().size() > 1) {
    auto& below = levels_.back();
    groups = str_groups(below, max_entries, get_node);
    std::vector<Node> up;
    for (auto [f, c] : groups) up.push_back({cover(below, f, c, get_node), f, c});
    levels_.push_back(std::move(up));
  }

  entry_ids_.reserve(entries.size());
  for (const auto& e : entries) entry_ids_.push_back(e.id);
  // quantized_[l] holds the boxes of the children of level-l nodes.
  quantized_.resize(levels_.size());
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const std::size_t children = l == 0 ? entries.size() : levels_[l - 1].size();
    quantized_[l].assign(children * 4 * bytes_per_value_, 0);
    for (const Node& n : levels_[l]) {
      for (std::uint32_t c = n.first; c < n.first + n.count; ++c) {
        const Mbr& child = l == 0 ? entries[c].mbr : levels_[l - 1][c].ref;
        const QuantizedMbr q = quantize(child, n.ref, bits_);
        const std::size_t base = c * 4 * bytes_per_value_;
        const std::uint16_t vals[4] = {q.x0, q.y0, q.x1, q.y1};
        for (int k = 0; k < 4; ++k) {
          if (bytes_per_value_ == 1) {
            quantized_[l][base + k] = static_cast<std::uint8_t>(vals[k]);
          } else {
            quantized_[l][base + 2 * k] = static_cast<std::uint8_t>(vals[k] & 0xFF);
            quantized_[l][base + 2 * k + 1] = static_cast<std::uint8_t>(vals[k] >> 8);
          }
        }
      }
    }
  }
}

void CrTree::query_rec(std::size_t level, std::uint32_t node, const Mbr& t, std::vector<GeometryId>& out) const {
  const Node& n = levels_[level][node];
  const auto& q = quantized_[level];
  for (std::uint32_t c = n.first; c < n.first + n.count; ++c) {
    const std::size_t base = c * 4 * bytes_per_value_;
    QuantizedMbr qm;
    std::uint16_t* vals[4] = {&qm.x0, &qm.y0, &qm.x1, &qm.y1};
    for (int k = 0; k < 4; ++k) {
      *vals[k] = bytes_per_value_ == 1
                     ? q[base + k]
                     : static_cast<std::uint16_t>(q[base + 2 * k] | (q[base + 2 * k + 1] << 8));
    }
    if (!mbr_intersects(dequantize(qm, n.ref, bits_), t)) continue;
    if (level == 0) {
      out.push_back(entry_ids_[c]);
    } else {
      query_rec(level - 1, c, t, out);
    }
  }
}

void CrTree::query_raw(const Mbr& t, std::vector<GeometryId>& out) const {
  out.clear();
  const std::size_t top = levels_.size() - 1;
  if (!mbr_intersects(levels_[top][0].ref, t)) return;
  query_rec(top, 0, t, out);
  std::sort(out.begin(), out.end());
}

void CrTree::candidates(const Mbr& t, std::vector<GeometryId>& out) const {
  query_raw(t, out);
  std::erase_if(out, [&](GeometryId id) { return !mbr_intersects(source_[id].mbr(), t); });
}

std::size_t CrTree::memory_bytes() const noexcept {
  std::size_t bytes = sizeof(*this) + entry_ids_.capacity() * sizeof(GeometryId);
  for (const auto& l : levels_) bytes += l.capacity() * sizeof(Node);
  for (const auto& q : quantized_) bytes += q.capacity();
  return bytes;
}

}  // namespace geolink
