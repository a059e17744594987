#pragma once

// Static vertical ray shooting by weighted telescoping search.
//
// Each portion of AC(u) (items between consecutive up-bridges) is a biased
// tree keyed by catalog position. An internal tree node keeps, per child and
// per class (f, l), the highest position of that class below the child, so a
// query descends to the leaf holding the lowest item of L_j(u) above q.
// The bridges around n(u) come from V_j(u): all of E_j(u) plus, for every
// group of d*r^2 consecutive catalog items, its lowest and highest item of
// L_j(u). Slab leaves are scanned.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dpl/biased_tree.hpp"
#include "dpl/catalog.hpp"
#include "dpl/io_model.hpp"
#include "dpl/slab_tree.hpp"

namespace dpl {

class StaticRayShooter {
 public:
  StaticRayShooter(BlockStore& store, std::vector<Segment> segs, RayParams params)
      : store_(&store), p_(params.resolved()), slots_(std::move(segs)),
        forest_(store, BiasedParams::from_fanout(p_.r, p_.portion_leaf)) {
    for (std::size_t i = 0; i < slots_.size(); ++i)
      for (std::size_t j = i + 1; j < slots_.size(); ++j)
        if (slots_.size() <= 4096 && interiors_intersect(slots_[i], slots_[j])) throw Fault("build: segments cross");
    std::vector<Coord> xs = p_.universe;
    std::vector<std::uint32_t> live;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      xs.push_back(slots_[i].left.x), xs.push_back(slots_[i].right.x);
      live.push_back(static_cast<std::uint32_t>(i));
    }
    if (xs.empty()) xs.push_back(0);
    tree_ = SlabTree(xs, p_.leaf_size, p_.r);
    cats_ = CatalogSet(tree_, slots_, live, p_.d);
    group_ = p_.d * p_.r * p_.r;
    data_.resize(tree_.size());
    for (std::uint32_t u = 0; u < tree_.size(); ++u) build_node(u);
  }

  StaticRayShooter(const StaticRayShooter&) = delete;
  StaticRayShooter& operator=(const StaticRayShooter&) = delete;

  ~StaticRayShooter() {
    for (auto& nd : data_) {
      nd.ac_ext.release(*store_);
      for (auto& e : nd.v_ext) e.release(*store_);
      for (NodeId t : nd.portion) forest_.destroy(t);
    }
  }

  const RayParams& params() const { return p_; }
  const SlabTree& tree() const { return tree_; }
  const CatalogSet& catalogs() const { return cats_; }
  std::size_t height() const { return tree_.height(); }
  std::size_t leaf_total() const { return cats_.leaf_total(); }

  std::vector<Weight> level_weights() const {
    std::vector<Weight> out(tree_.height() + 1, 0);
    for (std::uint32_t u = 0; u < tree_.size(); ++u)
      for (Weight w : cats_.at(u).w) out[tree_.node(u).level] += w;
    return out;
  }

  std::optional<Segment> query(Point q, RayTrace* tr = nullptr) const {
    auto leaf = tree_.leaf_of(q.x);
    if (!leaf) return std::nullopt;
    std::vector<std::uint32_t> path = tree_.path(q.x);
    std::optional<Segment> best;
    auto offer = [&](std::uint32_t slot) {
      if (slot == kSentinelSlot) return;
      const Segment& s = slots_[slot];
      if (!best || hit_better(s, *best, q.x)) best = s;
    };
    std::uint32_t lo = kNoPos, hi = static_cast<std::uint32_t>(cats_.at(path[0]).ac.size() - 1);
    double prev_omega = 0;
    for (std::size_t k = 0; k < path.size(); ++k) {
      std::uint32_t u = path[k];
      const Catalog& c = cats_.at(u);
      const Data& nd = data_[u];
      if (tree_.node(u).leaf()) {
        std::uint32_t from = lo == kNoPos ? 0 : lo + 1;
        nd.ac_ext.touch_range(*store_, from, hi);
        for (std::uint32_t p = from; p <= hi; ++p) {
          const CatItem& it = c.ac[p];
          if (it.sentinel()) continue;
          const Segment& s = slots_[it.slot];
          if (spans_x(s, q.x) && compare_y(s, q.x, q.y) >= 0) offer(it.slot);
        }
        if (tr) record(*tr, prev_omega, double(hi - from + 1), 1.0, 0, k);
        break;
      }
      std::size_t j = tree_.node(path[k + 1]).index_in_parent;
      std::size_t pi = portion_of(c, hi);
      std::size_t depth = 0;
      std::uint32_t n = search_portion(u, nd.portion[pi], j, q, depth);
      if (n == kNoPos) n = hi;
      offer(c.ac[n].slot);
      if (tr) record(*tr, prev_omega, double(forest_.weight(nd.portion[pi]) + c.w[hi]), double(c.w[n]), depth, k);
      prev_omega = double(c.w[n]);
      std::uint32_t bn = bridge_at_or_after(u, j, n);
      std::uint32_t bp = bridge_before(u, j, n);
      const Catalog& ch = cats_.at(path[k + 1]);
      hi = c.ac[bn].sentinel() ? static_cast<std::uint32_t>(ch.ac.size() - 1) : c.ac[bn].child_pos;
      lo = bp == kNoPos ? kNoPos : c.ac[bp].child_pos;
    }
    return best;
  }

  // Recomputes catalogs, weights, tables and V lists; lists all mismatches.
  std::vector<std::string> audit() const {
    std::vector<std::string> out;
    cats_.audit(out);
    auto ex = cats_.exact_weights();
    std::vector<__int128> sums(tree_.height() + 1, 0);
    __int128 n = static_cast<__int128>(cats_.leaf_total());
    for (std::uint32_t u = 0; u < tree_.size(); ++u) {
      std::size_t lv = tree_.node(u).level;
      __int128 scale = 1;
      for (std::size_t i = 0; i < lv; ++i) scale *= static_cast<__int128>(p_.d);
      const Catalog& c = cats_.at(u);
      for (std::size_t p = 0; p < c.ac.size(); ++p) {
        long double want = static_cast<long double>(ex[u][p]) / static_cast<long double>(scale);
        if (std::fabs(double(want - c.w[p])) > 1e-9 * std::max(1.0, double(want)))
          out.push_back("node " + std::to_string(u) + ": weight differs from recomputation at " + std::to_string(p));
        sums[lv] += ex[u][p];
      }
    }
    for (std::size_t lv = 0; lv <= tree_.height(); ++lv) {
      __int128 scale = 1;
      for (std::size_t i = 0; i < lv; ++i) scale *= static_cast<__int128>(p_.d);
      if (sums[lv] > n * scale) out.push_back("level " + std::to_string(lv) + ": weight sum exceeds n");
    }
    for (std::uint32_t u = 0; u < tree_.size(); ++u) audit_node(u, out);
    return out;
  }

  // Test hook: overwrite one entry of a portion tree's max table.
  bool corrupt_table(std::uint32_t u) {
    for (NodeId t : data_[u].portion) {
      if (t == kNil || forest_.node(t).leaf) continue;
      auto& top = forest_.payload(t).top;
      for (auto& x : top)
        if (x != kNoPos) {
          x = x == 0 ? 1 : x - 1;
          return true;
        }
    }
    return false;
  }

  std::size_t block_count() const {
    std::size_t b = 0;
    for (const auto& nd : data_) {
      b += nd.ac_ext.block_count();
      for (const auto& e : nd.v_ext) b += e.block_count();
    }
    for (NodeId id = 0; id < forest_.node_capacity(); ++id)
      if (forest_.node(id).live) b += forest_.node(id).ext.block_count();
    return b;
  }

 private:
  struct Payload {
    std::vector<std::uint32_t> top;  // [child * classes + class] highest position
  };
  using Forest = BiasedForest<std::uint32_t, Payload>;
  struct VEntry {
    std::uint32_t pos;
    bool bridge;
  };
  struct Data {
    Extent ac_ext;
    std::vector<NodeId> portion;  // portion[k] ends just before up_pos[k]
    std::vector<std::vector<VEntry>> v;
    std::vector<Extent> v_ext;
    std::vector<std::vector<std::int32_t>> g_lo, g_hi;  // [child][group] index in v
  };

  static std::size_t portion_of(const Catalog& c, std::uint32_t hi) {
    return std::lower_bound(c.up_pos.begin(), c.up_pos.end(), hi) - c.up_pos.begin();
  }

  void record(RayTrace& tr, double prev_omega, double W, double omega, std::size_t depth, std::size_t k) const {
    if (k > 0 && prev_omega * double(p_.d) < W * (1 - 1e-12)) ++tr.omega_violations;
    tr.W.push_back(W);
    tr.omega.push_back(omega);
    tr.depth.push_back(depth);
  }

  void build_node(std::uint32_t u) {
    const Catalog& c = cats_.at(u);
    Data& nd = data_[u];
    nd.ac_ext.resize(*store_, c.ac.size());
    const SlabNode& sn = tree_.node(u);
    if (sn.leaf()) return;
    std::uint32_t from = 0;
    for (std::uint32_t up : c.up_pos) {
      std::vector<Forest::Entry> e;
      for (std::uint32_t p = from; p < up; ++p) e.push_back({p, c.w[p]});
      NodeId t = forest_.build(std::move(e));
      if (t != kNil) fill_tables(u, t);
      nd.portion.push_back(t);
      from = up + 1;
    }
    std::size_t kids = sn.kids.size();
    std::size_t groups = (c.ac.size() + group_ - 1) / group_;
    nd.v.assign(kids, {});
    nd.v_ext.resize(kids);
    nd.g_lo.assign(kids, std::vector<std::int32_t>(groups, -1));
    nd.g_hi.assign(kids, std::vector<std::int32_t>(groups, -1));
    for (std::size_t j = 0; j < kids; ++j) {
      for (std::size_t g = 0; g < groups; ++g) {
        std::int64_t lo = -1, hi = -1;
        for (std::size_t p = g * group_; p < std::min(c.ac.size(), (g + 1) * group_); ++p)
          if (c.ac[p].spans_child(j)) {
            if (lo < 0) lo = static_cast<std::int64_t>(p);
            hi = static_cast<std::int64_t>(p);
          }
        for (std::size_t p = g * group_; p < std::min(c.ac.size(), (g + 1) * group_); ++p) {
          bool br = c.ac[p].is_bridge_for(j);
          bool ext = static_cast<std::int64_t>(p) == lo || static_cast<std::int64_t>(p) == hi;
          if (!br && !ext) continue;
          if (static_cast<std::int64_t>(p) == lo) nd.g_lo[j][g] = static_cast<std::int32_t>(nd.v[j].size());
          if (static_cast<std::int64_t>(p) == hi) nd.g_hi[j][g] = static_cast<std::int32_t>(nd.v[j].size());
          nd.v[j].push_back({static_cast<std::uint32_t>(p), br});
        }
      }
      nd.v_ext[j].resize(*store_, nd.v[j].size());
    }
  }

  // Bottom-up max tables; returns the per-class highest position below t.
  std::vector<std::uint32_t> fill_tables(std::uint32_t u, NodeId t) {
    const Catalog& c = cats_.at(u);
    std::size_t kids = tree_.node(u).kids.size(), cls = class_count(kids);
    std::vector<std::uint32_t> mine(cls, kNoPos);
    const auto& n = forest_.node(t);
    if (n.leaf) {
      for (const auto& e : n.entries) {
        const CatItem& it = c.ac[e.item];
        mine[class_index(kids, it.f, it.l)] = e.item;
      }
      return mine;
    }
    std::vector<std::uint32_t> top(n.kids.size() * cls, kNoPos);
    std::vector<NodeId> ks = n.kids;
    for (std::size_t k = 0; k < ks.size(); ++k) {
      auto sub = fill_tables(u, ks[k]);
      for (std::size_t x = 0; x < cls; ++x) {
        top[k * cls + x] = sub[x];
        if (sub[x] != kNoPos) mine[x] = sub[x];
      }
    }
    forest_.payload(t).top = top;
    forest_.set_records(t, top.size());
    return mine;
  }

  bool above(std::uint32_t slot, Point q) const { return compare_y(slots_[slot], q.x, q.y) >= 0; }

  // Lowest item of L_j(u) above q in the portion, or kNoPos.
  std::uint32_t search_portion(std::uint32_t u, NodeId t, std::size_t j, Point q, std::size_t& depth) const {
    if (t == kNil) return kNoPos;
    const Catalog& c = cats_.at(u);
    std::size_t kids = tree_.node(u).kids.size(), cls = class_count(kids);
    auto leaf = forest_.descend(t, [&](NodeId x) -> std::optional<std::size_t> {
      const auto& top = forest_.node(x).payload.top;
      std::size_t nk = forest_.node(x).kids.size();
      for (std::size_t k = 0; k < nk; ++k)
        for (std::size_t f = 0; f <= j; ++f)
          for (std::size_t l = j; l < kids; ++l) {
            std::uint32_t p = top[k * cls + class_index(kids, f, l)];
            if (p != kNoPos && above(c.ac[p].slot, q)) return k;
          }
      return std::nullopt;
    });
    if (!leaf) return kNoPos;
    depth = forest_.depth(*leaf);
    for (const auto& e : forest_.node(*leaf).entries) {
      const CatItem& it = c.ac[e.item];
      if (it.spans_child(j) && above(it.slot, q)) return e.item;
    }
    return kNoPos;
  }

  // Smallest E_j position >= n (the sentinel if nothing else).
  std::uint32_t bridge_at_or_after(std::uint32_t u, std::size_t j, std::uint32_t n) const {
    const Catalog& c = cats_.at(u);
    const Data& nd = data_[u];
    std::size_t g = n / group_;
    std::uint32_t end = static_cast<std::uint32_t>(std::min(c.ac.size(), (g + 1) * group_));
    for (std::uint32_t p = n; p < end; ++p) {
      nd.ac_ext.touch_record(*store_, p);
      if (c.ac[p].is_bridge_for(j)) return p;
    }
    std::int32_t at = nd.g_hi[j][g];
    for (std::size_t k = static_cast<std::size_t>(at) + 1; k < nd.v[j].size(); ++k) {
      nd.v_ext[j].touch_record(*store_, k);
      if (nd.v[j][k].bridge) return nd.v[j][k].pos;
    }
    throw Fault("V list lost the sentinel");
  }

  // Largest E_j position < n, or kNoPos.
  std::uint32_t bridge_before(std::uint32_t u, std::size_t j, std::uint32_t n) const {
    const Catalog& c = cats_.at(u);
    const Data& nd = data_[u];
    std::size_t g = n / group_;
    for (std::uint32_t p = n; p-- > g * group_;) {
      nd.ac_ext.touch_record(*store_, p);
      if (c.ac[p].is_bridge_for(j)) return p;
    }
    std::int32_t at = nd.g_lo[j][g];
    for (std::int64_t k = static_cast<std::int64_t>(at) - 1; k >= 0; --k) {
      nd.v_ext[j].touch_record(*store_, static_cast<std::size_t>(k));
      if (nd.v[j][k].bridge) return nd.v[j][k].pos;
    }
    return kNoPos;
  }

  void audit_node(std::uint32_t u, std::vector<std::string>& out) const {
    const Catalog& c = cats_.at(u);
    const Data& nd = data_[u];
    const SlabNode& sn = tree_.node(u);
    if (sn.leaf()) return;
    std::string tag = "node " + std::to_string(u) + ": ";
    if (nd.portion.size() != c.up_pos.size()) out.push_back(tag + "portion count differs from up-bridges");
    std::uint32_t from = 0;
    for (std::size_t k = 0; k < nd.portion.size() && k < c.up_pos.size(); ++k) {
      NodeId t = nd.portion[k];
      std::vector<std::uint32_t> got;
      if (t != kNil) {
        for (const auto& e : forest_.entries(t)) got.push_back(e.item);
        for (auto& v : forest_.audit(t)) out.push_back(tag + "portion tree: " + v);
        check_tables(u, t, out);
        for (const auto& e : forest_.entries(t))
          if (e.weight != c.w[e.item]) out.push_back(tag + "portion entry weight is stale");
      }
      std::vector<std::uint32_t> want;
      for (std::uint32_t p = from; p < c.up_pos[k]; ++p) want.push_back(p);
      if (got != want) out.push_back(tag + "portion does not hold the items between its up-bridges");
      from = c.up_pos[k] + 1;
    }
    for (std::size_t j = 0; j < sn.kids.size(); ++j) {
      std::vector<std::uint32_t> bridges, listed;
      for (std::size_t p = 0; p < c.ac.size(); ++p)
        if (c.ac[p].is_bridge_for(j)) bridges.push_back(static_cast<std::uint32_t>(p));
      for (const VEntry& e : nd.v[j]) {
        if (e.bridge != c.ac[e.pos].is_bridge_for(j)) out.push_back(tag + "V list bridge flag wrong");
        if (e.bridge) listed.push_back(e.pos);
      }
      if (listed != bridges) out.push_back(tag + "V list misses bridges");
    }
  }

  std::vector<std::uint32_t> check_tables(std::uint32_t u, NodeId t, std::vector<std::string>& out) const {
    const Catalog& c = cats_.at(u);
    std::size_t kids = tree_.node(u).kids.size(), cls = class_count(kids);
    std::vector<std::uint32_t> mine(cls, kNoPos);
    const auto& n = forest_.node(t);
    if (n.leaf) {
      for (const auto& e : n.entries) mine[class_index(kids, c.ac[e.item].f, c.ac[e.item].l)] = e.item;
      return mine;
    }
    for (std::size_t k = 0; k < n.kids.size(); ++k) {
      auto sub = check_tables(u, n.kids[k], out);
      for (std::size_t x = 0; x < cls; ++x) {
        if (n.payload.top.size() != n.kids.size() * cls || n.payload.top[k * cls + x] != sub[x]) {
          out.push_back("node " + std::to_string(u) + ": max table entry differs from its subtree");
          return mine;
        }
        if (sub[x] != kNoPos) mine[x] = sub[x];
      }
    }
    return mine;
  }

  BlockStore* store_;
  RayParams p_;
  std::vector<Segment> slots_;
  SlabTree tree_;
  CatalogSet cats_;
  mutable Forest forest_;
  std::size_t group_ = 64;
  std::vector<Data> data_;
};

}  // namespace dpl
