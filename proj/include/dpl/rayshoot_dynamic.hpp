#pragma once

// Fully dynamic vertical ray shooting over a fixed x-universe.
//
// Each slab node u keeps AC(u) as portions: runs of items between
// consecutive up items (copies of the parent's bridges). A portion of an
// internal node is a biased tree whose leaves hold items; every tree node
// carries an insertion buffer B, a deletion buffer D, per-class sets Max'
// (a priority search tree of the highest items) and, per child and colour,
// the highest bridge below it. Inserted segments are cut into unit items
// that span one child and trickle down through the buffers; a unit goes
// right before the first item of L_i(u) above it. Deletions travel as
// tombstones. Bridges are never left dead: deleting one merges the two
// portions its copy separated, recursively down the copy chain.
//
// Queries per slab node: the successor n(u) by a descent over Max' sets
// (masking the tombstones met on the way), the bridge b_n by the weighted
// descent over bridge tables, then the child portion closed by b_n's copy.
//
// A portion is rebuilt (units merged, items re-ordered) once its new
// segments reach 1/r of its old ones; the whole structure is rebuilt after
// a constant fraction of its size in updates, which restores bridges and
// weights.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dpl/biased_tree.hpp"
#include "dpl/catalog.hpp"
#include "dpl/cusf.hpp"
#include "dpl/io_model.hpp"
#include "dpl/slab_tree.hpp"

namespace dpl {

struct DynamicStats {
  std::size_t flushes = 0;
  std::size_t portion_rebuilds = 0;
  std::size_t global_rebuilds = 0;
  std::size_t bridge_removals = 0;
  std::size_t max_buffer = 0;       // largest |B| seen outside a flush
  std::size_t max_deletes = 0;      // largest |D| seen outside a flush
  std::size_t max_deletes_in_flush = 0;
};

class DynamicRayShooter {
 public:
  static constexpr std::uint32_t kNone = UINT32_MAX;

  DynamicRayShooter(BlockStore& store, std::vector<Coord> universe, RayParams params, std::vector<Segment> initial = {})
      : store_(&store), p_(params.resolved()), forest_(store, BiasedParams::from_fanout(p_.r, p_.portion_leaf)) {
    for (const Segment& s : initial) {
      universe.push_back(s.left.x);
      universe.push_back(s.right.x);
    }
    if (universe.empty()) throw Fault("DynamicRayShooter: empty x-universe");
    tree_ = SlabTree(universe, p_.leaf_size, p_.r);
    for (const Segment& s : initial) {
      if (!tree_.in_universe(s.left.x) || !tree_.in_universe(s.right.x)) throw Fault("segment endpoint outside the x-universe");
      new_slot(s);
    }
    rebuild_all();
  }

  DynamicRayShooter(const DynamicRayShooter&) = delete;
  DynamicRayShooter& operator=(const DynamicRayShooter&) = delete;
  ~DynamicRayShooter() { teardown(); }

  const RayParams& params() const { return p_; }
  const SlabTree& tree() const { return tree_; }
  std::size_t size() const { return by_id_.size(); }
  const DynamicStats& stats() const { return stats_; }

  std::size_t block_count() const {
    std::size_t b = 0;
    for (NodeId id = 0; id < forest_.node_capacity(); ++id)
      if (forest_.node(id).live) b += forest_.node(id).ext.block_count();
    for (const SlabState& st : slab_) {
      if (st.v) b += st.v->block_count();
      for (const auto& [closer, pr] : st.portions) b += pr.bag_ext.block_count();
    }
    return b;
  }
  bool contains(SegmentId id) const { return by_id_.count(id) != 0; }

  std::vector<Segment> segments() const {
    std::vector<Segment> out;
    for (const auto& [id, slot] : by_id_) out.push_back(slots_[slot]);
    std::sort(out.begin(), out.end(), [](const Segment& a, const Segment& b) { return a.id < b.id; });
    return out;
  }

  // Lowest segment on or above q, or nothing.
  std::optional<Segment> query(Point q) const {
    if (!tree_.leaf_of(q.x)) return std::nullopt;
    auto above = [&](std::uint32_t e) { return compare_y(seg(e), q.x, q.y) >= 0; };
    std::optional<Segment> best;
    auto offer = [&](std::uint32_t e) {
      if (e == kNone || items_[e].slot == kSentinelSlot) return;
      const Segment& s = seg(e);
      if (!spans_x(s, q.x) || compare_y(s, q.x, q.y) < 0) return;
      if (!best || hit_better(s, *best, q.x)) best = s;
    };
    std::vector<std::uint32_t> path = tree_.path(q.x);
    std::uint32_t closer = slab_[path[0]].sentinel;
    for (std::size_t k = 0; k < path.size(); ++k) {
      std::uint32_t u = path[k];
      const PortionRec& pr = slab_[u].portions.at(closer);
      offer(closer);
      if (tree_.node(u).leaf()) {
        pr.bag_ext.touch_all(*store_);
        for (std::uint32_t e : pr.bag) offer(e);
        break;
      }
      std::size_t j = tree_.node(path[k + 1]).index_in_parent;
      std::vector<std::uint32_t> mask;
      offer(successor(pr.root, j, kids_of(u), above, mask));
      closer = child_closer(u, j, closer, pr.root, above);
    }
    return best;
  }

  void insert(const Segment& s) {
    if (by_id_.count(s.id)) throw Fault("insert: duplicate id " + std::to_string(s.id));
    if (!tree_.in_universe(s.left.x) || !tree_.in_universe(s.right.x)) throw Fault("insert: endpoint x not in the fixed universe");
    std::uint32_t slot = new_slot(s);
    auto where = locate(s);
    for (const Assignment& a : tree_.assign(s)) {
      std::uint32_t closer = where.at(a.node);
      PortionRec& pr = slab_[a.node].portions.at(closer);
      if (a.leaf) {
        std::uint32_t e = new_item(slot, a.node, 0, 0);
        pr.bag.push_back(e);
        own_[slot].push_back(e);
        pr.bag_ext.resize(*store_, pr.bag.size());
        pr.bag_ext.touch_record(*store_, pr.bag.size() - 1, true);
        continue;
      }
      for (std::size_t i = a.f; i <= a.l; ++i) {
        std::uint32_t e = new_item(slot, a.node, static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(i));
        items_[e].fresh = true;
        items_[e].span_f = a.f, items_[e].span_l = a.l;
        own_[slot].push_back(e);
        enter_root(a.node, closer, e);
      }
      ++pr.new_count;
      settle(pr.root);
      stats_.max_buffer = std::max(stats_.max_buffer, pr.root == kNil || leafnode(pr.root) ? 0 : pay(pr.root).buf.size());
      if (pr.new_count * p_.r >= std::max<std::size_t>(1, pr.old_count)) rebuild_portion(a.node, closer);
    }
    after_update();
  }

  bool erase(SegmentId id) {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return false;
    std::uint32_t slot = it->second;
    const Segment s = slots_[slot];
    auto where = locate(s);
    for (std::uint32_t e : std::vector<std::uint32_t>(own_[slot])) {
      DItem& it2 = items_[e];
      std::uint32_t u = it2.u;
      if (it2.bridge >= 0) remove_bridge(e);
      PortionRec& pr = slab_[u].portions.at(where.at(u));
      if (tree_.node(u).leaf()) {
        auto pos = std::find(pr.bag.begin(), pr.bag.end(), e);
        if (pos == pr.bag.end()) throw Fault("erase: item missing from its leaf bag");
        pr.bag.erase(pos);
        pr.bag_ext.resize(*store_, pr.bag.size());
        pr.bag_ext.touch_all(*store_, true);
        free_item(e);
        continue;
      }
      tombstone(pr.root, e);
      settle(pr.root);
      if (pr.root != kNil && !leafnode(pr.root)) stats_.max_deletes = std::max(stats_.max_deletes, pay(pr.root).del.size());
    }
    own_.erase(slot);
    by_id_.erase(it);  // the slot stays reserved until the next global rebuild
    after_update();
    return true;
  }

  // Structural audit; one line per violation.
  std::vector<std::string> audit() const;

 private:
  struct DItem {
    std::uint32_t slot = kSentinelSlot;
    std::uint32_t u = 0;
    std::uint16_t f = 0, l = 0;            // spanned children
    std::uint16_t span_f = 0, span_l = 0;  // the whole segment's range (units)
    std::int16_t bridge = -1;
    bool up = false, fresh = false, live = false;
    Weight w = 0;
    NodeId where = kNil;  // leaf or buffer node holding the item
    NodeId pst = kNil;    // node whose Max' holds it
    std::uint32_t copy = kNone;
    ListCusf::Handle vh = kNone;
  };

  struct Payload {
    std::vector<std::uint32_t> buf, del;
    std::vector<std::vector<std::uint32_t>> maxp;  // per class, highest first
    std::vector<std::uint32_t> bmax;               // [kid * colours + colour]
  };
  using Forest = BiasedForest<std::uint32_t, Payload>;

  struct PortionRec {
    NodeId root = kNil;
    std::vector<std::uint32_t> bag;  // slab leaves only
    Extent bag_ext;
    std::size_t old_count = 0, new_count = 0;
    std::uint32_t prev = kNone, next = kNone;  // neighbouring portions' closers
  };

  struct SlabState {
    std::uint32_t sentinel = kNone;
    std::unordered_map<std::uint32_t, PortionRec> portions;  // by closing up item
    std::unique_ptr<ListCusf> v;
    std::unordered_map<ListCusf::Handle, std::uint32_t> v_item;
  };

  struct Owner {
    std::uint32_t u, closer;
  };

  // ---- small helpers ------------------------------------------------------

  const Segment& seg(std::uint32_t e) const { return slots_[items_[e].slot]; }
  std::size_t kids_of(std::uint32_t u) const { return tree_.node(u).kids.size(); }
  std::size_t cls(std::uint32_t e) const { return class_index(kids_of(items_[e].u), items_[e].f, items_[e].l); }
  bool spans(std::uint32_t e, std::size_t i) const { return items_[e].f <= i && i <= items_[e].l; }
  std::size_t m() const { return p_.max_set; }
  std::size_t dcap() const { return p_.delete_threshold; }

  // a strictly below b; both span a common child and are live together.
  bool below(std::uint32_t a, std::uint32_t b) const {
    return items_[a].slot != items_[b].slot && compare_segments(seg(a), seg(b)) == Order::first_below;
  }

  static bool in(const std::vector<std::uint32_t>& v, std::uint32_t x) { return std::find(v.begin(), v.end(), x) != v.end(); }
  static void drop(std::vector<std::uint32_t>& v, std::uint32_t x) {
    auto it = std::find(v.begin(), v.end(), x);
    if (it != v.end()) v.erase(it);
  }

  std::uint32_t new_slot(const Segment& s) {
    if (by_id_.count(s.id)) throw Fault("duplicate segment id " + std::to_string(s.id));
    std::uint32_t slot;
    if (!free_slots_.empty()) {
      slot = free_slots_.back();
      free_slots_.pop_back();
      slots_[slot] = s;
    } else {
      slot = static_cast<std::uint32_t>(slots_.size());
      slots_.push_back(s);
    }
    by_id_[s.id] = slot;
    return slot;
  }

  std::uint32_t new_item(std::uint32_t slot, std::uint32_t u, std::uint16_t f, std::uint16_t l) {
    std::uint32_t e;
    if (!free_items_.empty()) {
      e = free_items_.back();
      free_items_.pop_back();
    } else {
      e = static_cast<std::uint32_t>(items_.size());
      items_.emplace_back();
    }
    items_[e] = DItem{};
    items_[e].slot = slot, items_[e].u = u, items_[e].f = f, items_[e].l = l;
    items_[e].span_f = f, items_[e].span_l = l;
    items_[e].live = true;
    return e;
  }

  void free_item(std::uint32_t e) {
    if (auto it = own_.find(items_[e].slot); it != own_.end()) drop(it->second, e);
    items_[e] = DItem{};
    free_items_.push_back(e);
  }

  Payload& pay(NodeId x) { return forest_.payload(x); }
  const Payload& pay(NodeId x) const { return forest_.node(x).payload; }
  bool leafnode(NodeId x) const { return forest_.node(x).leaf; }

  void resize(NodeId x) {
    const Payload& p = pay(x);
    std::size_t rec = p.buf.size() + p.del.size() + p.bmax.size();
    for (const auto& s : p.maxp) rec += s.size();
    for (NodeId k : forest_.node(x).kids)
      for (const auto& s : pay(k).maxp) rec += s.size();  // Nav: the children's Max' sets
    forest_.set_records(x, rec);
  }
  void dirty(NodeId x) {
    resize(x);
    forest_.touch(x, true);
  }

  // Child of x whose subtree holds node y (y strictly below x).
  NodeId child_toward(NodeId x, NodeId y) const {
    while (forest_.node(y).parent != x) {
      y = forest_.node(y).parent;
      if (y == kNil) throw Fault("child_toward: node not below");
    }
    return y;
  }
  std::size_t kid_index(NodeId x, NodeId k) const {
    const auto& ks = forest_.node(x).kids;
    return static_cast<std::size_t>(std::find(ks.begin(), ks.end(), k) - ks.begin());
  }
  bool located_in(std::uint32_t e, NodeId x) const { return located_in_node(items_[e].where, x); }
  bool located_in_node(NodeId y, NodeId x) const {
    for (; y != kNil; y = forest_.node(y).parent)
      if (y == x) return true;
    return false;
  }

  // ---- queries --------------------------------------------------------------

  // Lowest live item of L_j(u) above the probe in the portion tree under x.
  // `mask` collects the tombstones met on the way down.
  std::uint32_t successor(NodeId x, std::size_t j, std::size_t kids, const std::function<bool(std::uint32_t)>& above,
                          std::vector<std::uint32_t>& mask) const {
    if (x == kNil) return kNone;
    forest_.touch(x);
    const Payload& p = pay(x);
    std::size_t mark = mask.size();
    mask.insert(mask.end(), p.del.begin(), p.del.end());
    auto ok = [&](std::uint32_t e) { return spans(e, j) && !in(mask, e) && above(e); };
    std::uint32_t best = kNone;
    auto take = [&](std::uint32_t e) {
      if (ok(e) && (best == kNone || below(e, best))) best = e;
    };
    const auto& node = forest_.node(x);
    if (node.leaf) {
      for (const auto& en : node.entries) take(en.item);
    } else {
      for (std::uint32_t e : p.buf) take(e);
      for (const auto& s : p.maxp)
        for (std::uint32_t e : s) take(e);
      for (NodeId k : node.kids) {
        bool go = false;
        const auto& mk = pay(k).maxp;
        for (std::size_t f = 0; f <= j && !go; ++f)
          for (std::size_t l = j; l < kids && !go; ++l) {
            const auto& s = mk[class_index(kids, f, l)];
            std::uint32_t low = kNone;
            bool hit = false;
            for (std::uint32_t e : s) {
              if (in(mask, e)) continue;
              if (above(e)) hit = true;
              low = e;
            }
            if (hit) go = true;
            else if (s.size() >= m() && (low == kNone || above(low))) go = true;  // Max' may hide live items below
          }
        if (!go) continue;
        std::uint32_t r = successor(k, j, kids, above, mask);
        if (r != kNone) {
          if (best == kNone || below(r, best)) best = r;
          break;
        }
      }
    }
    mask.resize(mark);
    return best;
  }

  // First bridge for child j above the probe in the subtree of x.
  std::uint32_t bridge_above(NodeId x, std::size_t j, std::size_t kids, const std::function<bool(std::uint32_t)>& above) const {
    if (x == kNil) return kNone;
    forest_.touch(x);
    const auto& node = forest_.node(x);
    if (node.leaf) {
      for (const auto& en : node.entries)
        if (items_[en.item].bridge == static_cast<int>(j) && above(en.item)) return en.item;
      return kNone;
    }
    const Payload& p = pay(x);
    for (std::size_t k = 0; k < node.kids.size(); ++k) {
      std::uint32_t b = p.bmax[k * kids + j];
      if (b != kNone && above(b)) return bridge_above(node.kids[k], j, kids, above);
    }
    return kNone;
  }

  // Closer of the child portion below the probe: the copy of b_n.
  std::uint32_t child_closer(std::uint32_t u, std::size_t j, std::uint32_t closer, NodeId root,
                             const std::function<bool(std::uint32_t)>& above) const {
    std::uint32_t bn = bridge_above(root, j, kids_of(u), above);
    if (bn == kNone) {
      const SlabState& ss = slab_[u];
      auto h = ss.v->next(items_[closer].vh, ColorSet{static_cast<Color>(j + 1)}, true);
      if (!h) throw Fault("V list lost the sentinel");
      bn = ss.v_item.at(*h);
    }
    std::uint32_t ch = tree_.node(u).kids[j];
    return items_[bn].slot == kSentinelSlot ? slab_[ch].sentinel : items_[bn].copy;
  }

  // Portion closer of every node on the paths to both endpoints of s.
  std::unordered_map<std::uint32_t, std::uint32_t> locate(const Segment& s) const {
    std::unordered_map<std::uint32_t, std::uint32_t> out;
    auto above = [&](std::uint32_t e) { return compare_segments(seg(e), s) == Order::second_below; };
    for (Coord x : {s.left.x, s.right.x}) {
      std::vector<std::uint32_t> path = tree_.path(x);
      std::uint32_t closer = slab_[path[0]].sentinel;
      for (std::size_t k = 0; k < path.size(); ++k) {
        std::uint32_t u = path[k];
        out[u] = closer;
        if (tree_.node(u).leaf()) break;
        std::size_t j = tree_.node(path[k + 1]).index_in_parent;
        closer = child_closer(u, j, closer, slab_[u].portions.at(closer).root, above);
      }
    }
    return out;
  }

  // ---- buffers and Max' -----------------------------------------------------

  void enter_root(std::uint32_t u, std::uint32_t closer, std::uint32_t e);
  void tombstone(NodeId root, std::uint32_t e);
  void settle(NodeId root);
  void flush(NodeId x);
  void push_tombstone(NodeId k, std::uint32_t e);
  void annihilate(NodeId k, std::uint32_t e);
  NodeId route(NodeId x, std::uint32_t e, std::unordered_map<std::uint32_t, NodeId>& memo);
  void place_in_leaf(NodeId leaf, std::uint32_t e);
  void pst_add(NodeId k, std::uint32_t e);
  void pst_remove(NodeId k, std::uint32_t e);
  void refill(NodeId k, std::size_t c);
  void recompute_bmax_up(NodeId x, std::size_t kids);
  void fill_bmax(NodeId x, std::size_t kids);

  // ---- rebuilding -----------------------------------------------------------

  void remove_bridge(std::uint32_t e);
  void merge_portions(std::uint32_t u, std::uint32_t gone_closer);
  std::vector<std::uint32_t> drain(NodeId root);
  NodeId build_portion(std::uint32_t u, std::uint32_t closer, const std::vector<std::uint32_t>& seq);
  void rebuild_portion(std::uint32_t u, std::uint32_t closer);
  void rebuild_all();
  void teardown();
  void after_update();

  void audit_portion(std::uint32_t u, std::uint32_t closer, const PortionRec& pr, std::vector<std::string>& out) const;

  BlockStore* store_;
  RayParams p_;
  SlabTree tree_;
  mutable Forest forest_;
  std::vector<Segment> slots_;
  std::vector<std::uint32_t> free_slots_;
  std::unordered_map<SegmentId, std::uint32_t> by_id_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> own_;  // slot -> its items
  std::vector<DItem> items_;
  std::vector<std::uint32_t> free_items_;
  std::vector<SlabState> slab_;
  std::unordered_map<NodeId, Owner> owner_;  // portion root -> slab node
  std::size_t updates_since_build_ = 0;
  std::size_t size_at_build_ = 0;
  bool in_flush_ = false;
  DynamicStats stats_;
};

}  // namespace dpl

#include "dpl/rayshoot_dynamic_impl.hpp"
