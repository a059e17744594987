#pragma once

// Base tree over a fixed set of x-coordinates. Leaves hold up to m consecutive
// coordinates; internal nodes group r consecutive nodes of the level below.
// Slab boundaries sit at half-integers, stored doubled (odd values), so no
// endpoint or query x lies on a boundary and every x has one leaf.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "dpl/geometry.hpp"
#include "dpl/io_model.hpp"

namespace dpl {

struct SlabNode {
  std::uint32_t parent = UINT32_MAX;
  std::uint32_t index_in_parent = 0;
  std::uint32_t level = 0;  // 0 = leaf level
  Coord lo2 = 0, hi2 = 0;   // doubled open slab (lo2/2, hi2/2)
  std::vector<std::uint32_t> kids;
  bool leaf() const { return kids.empty(); }
};

// Where a segment is stored: node u and the spanned child range [f, l]
// (f = l = 0 and leaf = true for an endpoint leaf).
struct Assignment {
  std::uint32_t node;
  std::uint16_t f, l;
  bool leaf;
};

class SlabTree {
 public:
  SlabTree() = default;
  SlabTree(std::vector<Coord> xs, std::size_t leaf_size, std::size_t r) : r_(r) {
    if (leaf_size == 0 || r < 2) throw Fault("SlabTree: bad parameters");
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    if (xs.empty()) throw Fault("SlabTree: empty universe");
    xs_ = std::move(xs);
    std::vector<std::uint32_t> level;
    for (std::size_t k = 0; k < xs_.size(); k += leaf_size) {
      SlabNode n;
      n.lo2 = 2 * xs_[k] - 1;
      std::size_t next = k + leaf_size;
      n.hi2 = next < xs_.size() ? 2 * xs_[next] - 1 : 2 * xs_.back() + 1;
      level.push_back(add(n));
    }
    leaves_ = level;
    std::uint32_t lv = 0;
    while (level.size() > 1) {
      ++lv;
      std::vector<std::uint32_t> up;
      for (std::size_t k = 0; k < level.size(); k += r_) {
        SlabNode n;
        n.level = lv;
        std::size_t end = std::min(level.size(), k + r_);
        for (std::size_t c = k; c < end; ++c) n.kids.push_back(level[c]);
        n.lo2 = nodes_[level[k]].lo2;
        n.hi2 = nodes_[level[end - 1]].hi2;
        std::uint32_t id = add(n);
        for (std::size_t c = k; c < end; ++c) {
          nodes_[level[c]].parent = id;
          nodes_[level[c]].index_in_parent = static_cast<std::uint32_t>(c - k);
        }
        up.push_back(id);
      }
      level = std::move(up);
    }
    root_ = level.front();
  }

  std::uint32_t root() const { return root_; }
  std::size_t height() const { return nodes_[root_].level; }
  std::size_t degree() const { return r_; }
  std::size_t size() const { return nodes_.size(); }
  const SlabNode& node(std::uint32_t u) const { return nodes_[u]; }
  const std::vector<std::uint32_t>& leaves() const { return leaves_; }
  const std::vector<Coord>& universe() const { return xs_; }
  bool in_universe(Coord x) const { return std::binary_search(xs_.begin(), xs_.end(), x); }

  static bool spans(const Segment& s, const SlabNode& n) { return 2 * s.left.x < n.lo2 && 2 * s.right.x > n.hi2; }
  static bool contains_x(const SlabNode& n, Coord x) { return n.lo2 < 2 * x && 2 * x < n.hi2; }

  std::optional<std::uint32_t> leaf_of(Coord x) const {
    const SlabNode& r = nodes_[root_];
    if (!contains_x(r, x)) return std::nullopt;
    std::uint32_t u = root_;
    while (!nodes_[u].leaf()) u = child_toward(u, x);
    return u;
  }

  // Child of internal node u whose slab holds x.
  std::uint32_t child_toward(std::uint32_t u, Coord x) const {
    const auto& k = nodes_[u].kids;
    std::size_t i = std::upper_bound(k.begin(), k.end(), 2 * x, [&](Coord v, std::uint32_t c) { return v < nodes_[c].hi2; }) - k.begin();
    return k[std::min(i, k.size() - 1)];
  }

  // Root-to-leaf node sequence for x (x must lie in the root slab).
  std::vector<std::uint32_t> path(Coord x) const {
    std::vector<std::uint32_t> p{root_};
    while (!nodes_[p.back()].leaf()) p.push_back(child_toward(p.back(), x));
    return p;
  }

  // Nodes storing s: internal nodes where s spans a child but not the node,
  // and the leaves holding its endpoints.
  std::vector<Assignment> assign(const Segment& s) const {
    if (!in_universe(s.left.x) || !in_universe(s.right.x)) throw Fault("segment endpoint outside the x-universe");
    std::vector<Assignment> out;
    walk(root_, s, out);
    return out;
  }

  bool is_ancestor(std::uint32_t a, std::uint32_t u) const {
    while (nodes_[u].parent != UINT32_MAX) {
      u = nodes_[u].parent;
      if (u == a) return true;
    }
    return false;
  }

 private:
  std::uint32_t add(SlabNode n) {
    nodes_.push_back(std::move(n));
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  void walk(std::uint32_t u, const Segment& s, std::vector<Assignment>& out) const {
    const SlabNode& n = nodes_[u];
    if (n.leaf()) {
      if (contains_x(n, s.left.x) || contains_x(n, s.right.x)) out.push_back({u, 0, 0, true});
      return;
    }
    int f = -1, l = -1;
    for (std::size_t i = 0; i < n.kids.size(); ++i) {
      const SlabNode& c = nodes_[n.kids[i]];
      if (spans(s, c)) {
        if (f < 0) f = static_cast<int>(i);
        l = static_cast<int>(i);
      } else if (contains_x(c, s.left.x) || contains_x(c, s.right.x)) {
        walk(n.kids[i], s, out);
      }
    }
    if (f >= 0) out.push_back({u, static_cast<std::uint16_t>(f), static_cast<std::uint16_t>(l), false});
  }

  std::size_t r_ = 2;
  std::vector<Coord> xs_;
  std::vector<SlabNode> nodes_;
  std::vector<std::uint32_t> leaves_;
  std::uint32_t root_ = 0;
};

}  // namespace dpl
