#pragma once

// Reference structure for comparison: the same slab tree, with every node
// keeping one B+tree per child over the segments stored at the node that
// span that child. A query searches each path node independently, so it
// costs O(log_B n) per node and O(log_B^2 n) overall.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "dpl/btree.hpp"
#include "dpl/catalog.hpp"
#include "dpl/geometry.hpp"
#include "dpl/io_model.hpp"
#include "dpl/slab_tree.hpp"

namespace dpl {

class BaselineRayShooter {
 public:
  BaselineRayShooter(BlockStore& store, std::vector<Coord> universe, RayParams params, const std::vector<Segment>& initial = {})
      : store_(&store), p_(params.resolved()) {
    for (const Segment& s : initial) universe.push_back(s.left.x), universe.push_back(s.right.x);
    if (universe.empty()) throw Fault("BaselineRayShooter: empty x-universe");
    tree_ = SlabTree(universe, p_.leaf_size, p_.r);
    lists_.resize(tree_.size());
    bags_.resize(tree_.size());
    for (std::uint32_t u = 0; u < tree_.size(); ++u)
      for (std::size_t i = 0; i < tree_.node(u).kids.size(); ++i) lists_[u].emplace_back(store, p_.B);
    for (const Segment& s : initial) insert(s);
  }
  BaselineRayShooter(const BaselineRayShooter&) = delete;
  BaselineRayShooter& operator=(const BaselineRayShooter&) = delete;
  ~BaselineRayShooter() {
    for (auto& b : bags_) b.ext.release(*store_);
  }

  const SlabTree& tree() const { return tree_; }
  std::size_t size() const { return live_.size(); }

  void insert(const Segment& s) {
    if (live_.count(s.id)) throw Fault("insert: duplicate id " + std::to_string(s.id));
    for (const Assignment& a : tree_.assign(s)) {
      if (a.leaf) {
        Bag& b = bags_[a.node];
        b.segs.push_back(s);
        b.ext.resize(*store_, b.segs.size());
        b.ext.touch_record(*store_, b.segs.size() - 1, true);
        continue;
      }
      for (std::size_t i = a.f; i <= a.l; ++i) lists_[a.node][i].insert(s, less_);
    }
    live_[s.id] = s;
  }

  bool erase(SegmentId id) {
    auto it = live_.find(id);
    if (it == live_.end()) return false;
    const Segment s = it->second;
    for (const Assignment& a : tree_.assign(s)) {
      if (a.leaf) {
        Bag& b = bags_[a.node];
        b.ext.touch_all(*store_, true);
        b.segs.erase(std::find_if(b.segs.begin(), b.segs.end(), [&](const Segment& x) { return x.id == id; }));
        b.ext.resize(*store_, b.segs.size());
        continue;
      }
      for (std::size_t i = a.f; i <= a.l; ++i) lists_[a.node][i].erase(s, less_);
    }
    live_.erase(it);
    return true;
  }

  std::optional<Segment> query(Point q) const {
    if (!tree_.leaf_of(q.x)) return std::nullopt;
    std::optional<Segment> best;
    auto offer = [&](const Segment& s) {
      if (!spans_x(s, q.x) || compare_y(s, q.x, q.y) < 0) return;
      if (!best || hit_better(s, *best, q.x)) best = s;
    };
    auto path = tree_.path(q.x);
    for (std::size_t k = 0; k < path.size(); ++k) {
      std::uint32_t u = path[k];
      if (tree_.node(u).leaf()) {
        bags_[u].ext.touch_all(*store_);
        for (const Segment& s : bags_[u].segs) offer(s);
        break;
      }
      std::size_t j = tree_.node(path[k + 1]).index_in_parent;
      auto hit = lists_[u][j].first_where([&](const Segment& s) { return compare_y(s, q.x, q.y) >= 0; });
      if (hit) offer(*hit);
    }
    return best;
  }

  std::size_t block_count() const {
    std::size_t n = 0;
    for (const auto& l : lists_)
      for (const auto& t : l) n += t.block_count();
    for (const auto& b : bags_) n += b.ext.block_count();
    return n;
  }

 private:
  struct Bag {
    std::vector<Segment> segs;
    Extent ext;
  };

  BlockStore* store_;
  RayParams p_;
  SlabTree tree_;
  std::vector<std::vector<SegmentBTree>> lists_;
  std::vector<Bag> bags_;
  std::map<SegmentId, Segment> live_;
  SegmentBTree::Less less_ = [](const Segment& a, const Segment& b) {
    return a.id != b.id && compare_segments(a, b) == Order::first_below;
  };
};

}  // namespace dpl
