#pragma once

// Augmented catalogs AC(u) over a slab tree.
//
// AC(root) = C(root); AC(u) = C(u) plus the bridges E_i(parent) copied down.
// Every catalog ends with a +inf sentinel that spans everything, is a bridge
// for every child and weighs 1 in leaves. E_i(u) is chosen greedily: scanning
// AC(u) in order, each child counts the items spanning it since its last
// bridge; an item becomes a bridge for the child with the largest count once
// that count reaches d - r. This keeps at most d - 1 items of L_i(u) strictly
// between consecutive E_i bridges, and each item is a bridge for one child.
//
// Gaps are closed on the right: items of L_i(u) in (e1, e2] get
// weight_i = W((e1, e2], u_i) / d, where W sums AC(u_i) over the same range.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpl/biased_tree.hpp"
#include "dpl/geometry.hpp"
#include "dpl/slab_tree.hpp"

namespace dpl {

inline constexpr std::uint32_t kSentinelSlot = UINT32_MAX;
inline constexpr std::uint32_t kNoPos = UINT32_MAX;

struct CatItem {
  std::uint32_t slot = kSentinelSlot;
  std::uint16_t f = 0, l = 0;          // spanned children
  std::int16_t bridge = -1;            // i if in E_i(u)
  bool up = false;                     // in UP(u)
  std::uint32_t child_pos = kNoPos;    // position of the copy in AC(u_bridge)

  bool sentinel() const { return slot == kSentinelSlot; }
  bool spans_child(std::size_t i) const { return sentinel() || (f <= i && i <= l); }
  bool is_bridge_for(std::size_t i) const { return sentinel() || bridge == static_cast<int>(i); }
};

struct Catalog {
  std::vector<CatItem> ac;
  std::vector<Weight> w;
  std::vector<std::uint32_t> up_pos;  // ascending; last is the sentinel
};

// Number of (f, l) classes for k children, and the index of (f, l).
inline std::size_t class_count(std::size_t k) { return k * (k + 1) / 2; }
inline std::size_t class_index(std::size_t k, std::size_t f, std::size_t l) { return f * k - f * (f - 1) / 2 + (l - f); }

class CatalogSet {
 public:
  CatalogSet() = default;

  // slots[s] are the segments; `live` lists the slots to store.
  CatalogSet(const SlabTree& tree, const std::vector<Segment>& slots, const std::vector<std::uint32_t>& live, std::size_t d)
      : tree_(&tree), slots_(&slots), d_(d) {
    if (d_ < tree.degree() + 1) throw Fault("CatalogSet: d must exceed r");
    cats_.resize(tree.size());
    std::vector<std::vector<CatItem>> own(tree.size());
    for (std::uint32_t s : live)
      for (const Assignment& a : tree.assign(slots[s])) own[a.node].push_back({s, a.f, a.l, -1, false, kNoPos});
    // top-down: order each catalog, pick bridges, copy them down
    std::vector<std::vector<CatItem>> inbound(tree.size());
    std::vector<std::uint32_t> order;
    collect_top_down(order);
    for (std::uint32_t u : order) {
      std::vector<CatItem> items = std::move(own[u]);
      for (CatItem c : inbound[u]) items.push_back(c);
      arrange(u, items);
      if (!tree.node(u).leaf()) {
        const auto& kids = tree.node(u).kids;
        for (const CatItem& it : cats_[u].ac) {
          if (it.sentinel() || it.bridge < 0) continue;
          std::uint16_t last = static_cast<std::uint16_t>(tree.node(kids[it.bridge]).kids.empty() ? 0 : tree.node(kids[it.bridge]).kids.size() - 1);
          inbound[kids[it.bridge]].push_back({it.slot, 0, last, -1, true, kNoPos});
        }
      }
    }
    link_children();
    compute_weights();
  }

  std::size_t d() const { return d_; }
  const SlabTree& tree() const { return *tree_; }
  const Catalog& at(std::uint32_t u) const { return cats_[u]; }
  Catalog& at(std::uint32_t u) { return cats_[u]; }
  const Segment& seg(std::uint32_t slot) const { return (*slots_)[slot]; }

  // Total catalog size over the leaves: the n of the level-weight bound.
  std::size_t leaf_total() const {
    std::size_t n = 0;
    for (std::uint32_t l : tree_->leaves()) n += cats_[l].ac.size();
    return n;
  }

  // Selects E_i(u) over an ordered catalog (sentinel last).
  static void choose_bridges(std::vector<CatItem>& ac, std::size_t kids, std::size_t d) {
    std::vector<std::size_t> cnt(kids, 0);
    std::size_t t = d - kids;
    for (CatItem& it : ac) {
      if (it.sentinel()) break;
      it.bridge = -1;
      int best = -1;
      for (std::size_t i = it.f; i <= it.l; ++i)
        if (cnt[i] >= t && (best < 0 || cnt[i] > cnt[best])) best = static_cast<int>(i);
      for (std::size_t i = it.f; i <= it.l; ++i) cnt[i] = static_cast<int>(i) == best ? 0 : cnt[i] + 1;
      it.bridge = static_cast<std::int16_t>(best);
    }
  }

  // Integer weights scaled by d^level (leaves are level 0).
  std::vector<std::vector<__int128>> exact_weights() const {
    std::vector<std::vector<__int128>> ex(cats_.size());
    std::vector<std::uint32_t> order;
    collect_top_down(order);
    for (std::size_t k = order.size(); k-- > 0;) {
      std::uint32_t u = order[k];
      const Catalog& c = cats_[u];
      const SlabNode& n = tree_->node(u);
      ex[u].assign(c.ac.size(), n.leaf() ? 1 : 0);
      if (n.leaf()) continue;
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        std::uint32_t ch = n.kids[i];
        std::unordered_map<std::uint32_t, std::size_t> where;
        for (std::size_t p = 0; p < cats_[ch].ac.size(); ++p)
          if (cats_[ch].ac[p].up || cats_[ch].ac[p].sentinel()) where[cats_[ch].ac[p].slot] = p;
        std::vector<std::size_t> gap;
        std::size_t from = 0;
        for (std::size_t p = 0; p < c.ac.size(); ++p) {
          const CatItem& it = c.ac[p];
          if (!it.spans_child(i)) continue;
          gap.push_back(p);
          auto hit = where.find(it.slot);
          if (hit == where.end()) continue;
          __int128 s = 0;
          for (std::size_t x = from; x <= hit->second; ++x) s += ex[ch][x];
          for (std::size_t g : gap) ex[u][g] += s;
          gap.clear();
          from = hit->second + 1;
        }
      }
    }
    return ex;
  }

  // Property and weight checks shared by both variants.
  void audit(std::vector<std::string>& out) const {
    std::vector<std::uint32_t> order;
    collect_top_down(order);
    for (std::uint32_t u : order) {
      const Catalog& c = cats_[u];
      const SlabNode& n = tree_->node(u);
      std::string tag = "catalog " + std::to_string(u) + ": ";
      if (c.ac.empty() || !c.ac.back().sentinel()) out.push_back(tag + "sentinel missing");
      for (const CatItem& it : c.ac) {
        if (it.sentinel() || !it.up) continue;
        if (n.parent == UINT32_MAX || !SlabTree::spans(seg(it.slot), n)) out.push_back(tag + "copied item does not span the node (property i)");
      }
      if (n.leaf()) continue;
      std::vector<std::unordered_map<std::uint32_t, std::size_t>> kid_pos(n.kids.size());
      for (std::size_t i = 0; i < n.kids.size(); ++i)
        for (std::size_t p = 0; p < cats_[n.kids[i]].ac.size(); ++p)
          if (cats_[n.kids[i]].ac[p].up || cats_[n.kids[i]].ac[p].sentinel()) kid_pos[i][cats_[n.kids[i]].ac[p].slot] = p;
      std::vector<std::size_t> run(n.kids.size(), 0);
      for (const CatItem& it : c.ac) {
        std::size_t shared = 0;
        for (std::size_t i = 0; i < n.kids.size(); ++i) {
          bool in_child = kid_pos[i].count(it.slot) != 0;
          if (in_child != it.is_bridge_for(i)) out.push_back(tag + "bridge flag differs from the copies in the child");
          if (in_child) ++shared;
          if (!it.spans_child(i)) continue;
          if (it.is_bridge_for(i)) {
            run[i] = 0;
          } else if (++run[i] > d_ - 1) {
            out.push_back(tag + "more than d items of L_i in a bridge gap (property ii)");
          }
        }
        if (!it.sentinel() && shared > 1) out.push_back(tag + "item is a bridge for two children (property iii)");
      }
    }
  }

 private:
  void collect_top_down(std::vector<std::uint32_t>& order) const {
    order.clear();
    order.push_back(tree_->root());
    for (std::size_t k = 0; k < order.size(); ++k)
      for (std::uint32_t ch : tree_->node(order[k]).kids) order.push_back(ch);
  }

  void arrange(std::uint32_t u, std::vector<CatItem>& items) {
    std::vector<Segment> segs;
    segs.reserve(items.size());
    for (const CatItem& it : items) segs.push_back(seg(it.slot));
    std::vector<std::size_t> perm = order_multislab(segs);
    Catalog& c = cats_[u];
    c.ac.clear();
    for (std::size_t i : perm) c.ac.push_back(items[i]);
    c.ac.push_back(CatItem{});
    const SlabNode& n = tree_->node(u);
    if (!n.leaf()) choose_bridges(c.ac, n.kids.size(), d_);
    c.up_pos.clear();
    for (std::size_t p = 0; p < c.ac.size(); ++p)
      if (c.ac[p].up || c.ac[p].sentinel()) c.up_pos.push_back(static_cast<std::uint32_t>(p));
  }

  void link_children() {
    for (std::uint32_t u = 0; u < cats_.size(); ++u) {
      const SlabNode& n = tree_->node(u);
      if (n.leaf()) continue;
      std::vector<std::unordered_map<std::uint32_t, std::uint32_t>> pos(n.kids.size());
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        const auto& ac = cats_[n.kids[i]].ac;
        for (std::size_t p = 0; p + 1 < ac.size(); ++p)
          if (ac[p].up) pos[i][ac[p].slot] = static_cast<std::uint32_t>(p);
      }
      for (CatItem& it : cats_[u].ac)
        if (!it.sentinel() && it.bridge >= 0) it.child_pos = pos[it.bridge].at(it.slot);
    }
  }

  // Sentinel's copy in child i is that child's last position.
  std::uint32_t copy_pos(std::uint32_t u, std::size_t i, const CatItem& it) const {
    std::uint32_t ch = tree_->node(u).kids[i];
    return it.sentinel() ? static_cast<std::uint32_t>(cats_[ch].ac.size() - 1) : it.child_pos;
  }

  void compute_weights() {
    std::vector<std::uint32_t> order;
    collect_top_down(order);
    for (std::size_t k = order.size(); k-- > 0;) {
      std::uint32_t u = order[k];
      Catalog& c = cats_[u];
      const SlabNode& n = tree_->node(u);
      c.w.assign(c.ac.size(), n.leaf() ? Weight(1) : Weight(0));
      if (n.leaf()) continue;
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        const Catalog& ch = cats_[n.kids[i]];
        std::vector<Weight> pre(ch.w.size() + 1, 0);
        for (std::size_t x = 0; x < ch.w.size(); ++x) pre[x + 1] = pre[x] + ch.w[x];
        std::vector<std::size_t> gap;
        std::size_t from = 0;
        for (std::size_t p = 0; p < c.ac.size(); ++p) {
          const CatItem& it = c.ac[p];
          if (!it.spans_child(i)) continue;
          gap.push_back(p);
          if (!it.is_bridge_for(i)) continue;
          std::size_t to = copy_pos(u, i, it) + 1;
          Weight g = (pre[to] - pre[from]) / static_cast<Weight>(d_);
          for (std::size_t x : gap) c.w[x] += g;
          gap.clear();
          from = to;
        }
      }
    }
  }

  const SlabTree* tree_ = nullptr;
  const std::vector<Segment>* slots_ = nullptr;
  std::size_t d_ = 16;
  std::vector<Catalog> cats_;
};

}  // namespace dpl

namespace dpl {

// Knobs shared by the general structures. Zero means "derive from B".
struct RayParams {
  std::size_t B = 64;
  double delta = 1.0 / 8;
  std::size_t r = 0;                 // max(2, floor(B^delta))
  std::size_t d = 0;                 // max(4, r^4)
  std::size_t leaf_size = 0;         // x-coordinates per slab leaf: B/2
  std::size_t portion_leaf = 0;      // entries per biased-tree leaf: B/2
  std::size_t buffer_cap = 0;        // max(8, floor(B^(3 delta)))
  std::size_t delete_threshold = 0;  // max(4, r^3)
  std::size_t max_set = 0;           // r^4
  std::vector<Coord> universe;       // extra x-coordinates beyond the initial endpoints

  RayParams resolved() const {
    RayParams p = *this;
    auto root = [&](double e) { return static_cast<std::size_t>(std::floor(std::pow(double(B), e) + 1e-9)); };
    if (!p.r) p.r = std::max<std::size_t>(2, root(delta));
    std::size_t r4 = p.r * p.r * p.r * p.r;
    if (!p.d) p.d = std::max<std::size_t>(4, r4);
    if (!p.leaf_size) p.leaf_size = std::max<std::size_t>(2, B / 2);
    if (!p.portion_leaf) p.portion_leaf = std::max<std::size_t>(2, B / 2);
    if (!p.buffer_cap) p.buffer_cap = std::max<std::size_t>(8, root(3 * delta));
    if (!p.delete_threshold) p.delete_threshold = std::max<std::size_t>(4, p.r * p.r * p.r);
    if (!p.max_set) p.max_set = r4;
    return p;
  }
};

// Per-level search record of one query: W_i is the weight of the searched
// range, omega_i the weight of n(v_i).
struct RayTrace {
  std::vector<double> W, omega;
  std::vector<std::size_t> depth;
  std::size_t omega_violations = 0;

  double cost(double base) const {
    double s = 0;
    for (std::size_t i = 0; i < W.size(); ++i) s += std::log(W[i] / omega[i]) / std::log(base);
    return s;
  }
};

}  // namespace dpl
