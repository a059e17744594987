#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "dpl/geometry.hpp"
#include "dpl/io_model.hpp"

namespace dpl {

// B+tree over items in a caller-supplied strict order; one block per node.
// Internal nodes route by the highest item under each child. Deletions leave
// nodes underfull; empty nodes are unlinked, so height stays that of the
// peak size. `Same` identifies the item to erase.
template <class T, class Same>
class BTree {
 public:
  using Less = std::function<bool(const T&, const T&)>;  // a strictly before b

  BTree(BlockStore& store, std::size_t fanout) : store_(&store), cap_(std::max<std::size_t>(4, fanout)) {}
  BTree(const BTree&) = delete;
  BTree& operator=(const BTree&) = delete;
  BTree(BTree&& o) noexcept { *this = std::move(o); }
  BTree& operator=(BTree&& o) noexcept {
    std::swap(store_, o.store_);
    std::swap(cap_, o.cap_);
    std::swap(nodes_, o.nodes_);
    std::swap(free_, o.free_);
    std::swap(root_, o.root_);
    std::swap(size_, o.size_);
    return *this;
  }
  ~BTree() {
    if (!store_) return;
    for (Node& n : nodes_)
      if (n.live) store_->free(n.block);
  }

  std::size_t size() const { return size_; }

  void insert(const T& s, const Less& less) {
    if (root_ == kNone) root_ = make(true);
    std::vector<std::uint32_t> path{root_};
    while (!nodes_[path.back()].leaf) {
      Node& n = nodes_[path.back()];
      store_->touch(n.block);
      std::size_t k = 0;
      while (k + 1 < n.kids.size() && less(n.keys[k], s)) ++k;
      path.push_back(n.kids[k]);
    }
    Node& lf = nodes_[path.back()];
    auto pos = std::find_if(lf.keys.begin(), lf.keys.end(), [&](const T& x) { return less(s, x); });
    lf.keys.insert(pos, s);
    ++size_;
    for (std::size_t k = path.size(); k-- > 0;) {
      fix_key(path, k);
      if (nodes_[path[k]].keys.size() > cap_) split(path, k);
    }
  }

  bool erase(const T& s, const Less& less) {
    if (root_ == kNone) return false;
    std::vector<std::uint32_t> path{root_};
    while (!nodes_[path.back()].leaf) {
      Node& n = nodes_[path.back()];
      store_->touch(n.block);
      std::size_t k = 0;
      while (k + 1 < n.kids.size() && less(n.keys[k], s)) ++k;
      path.push_back(n.kids[k]);
    }
    Node& lf = nodes_[path.back()];
    store_->touch(lf.block);
    auto pos = std::find_if(lf.keys.begin(), lf.keys.end(), [&](const T& x) { return Same{}(x, s); });
    if (pos == lf.keys.end()) return false;
    lf.keys.erase(pos);
    --size_;
    for (std::size_t k = path.size(); k-- > 0;) {
      Node& n = nodes_[path[k]];
      if (n.keys.empty() && k > 0) {
        Node& par = nodes_[path[k - 1]];
        std::size_t at = index_in(par, path[k]);
        par.kids.erase(par.kids.begin() + at);
        par.keys.erase(par.keys.begin() + at);
        store_->free(n.block);
        n.live = false;
        free_.push_back(path[k]);
        store_->touch(par.block, true);
        continue;
      }
      fix_key(path, k);
    }
    if (nodes_[root_].keys.empty()) {
      store_->free(nodes_[root_].block);
      nodes_[root_].live = false;
      free_.push_back(root_);
      root_ = kNone;
    }
    return true;
  }

  // Lowest segment with pred true, where pred is monotone along the order.
  std::optional<T> first_where(const std::function<bool(const T&)>& pred) const {
    if (root_ == kNone) return std::nullopt;
    std::uint32_t u = root_;
    while (true) {
      const Node& n = nodes_[u];
      store_->touch(n.block);
      auto it = std::find_if(n.keys.begin(), n.keys.end(), pred);
      if (it == n.keys.end()) return std::nullopt;
      if (n.leaf) return *it;
      u = n.kids[static_cast<std::size_t>(it - n.keys.begin())];
    }
  }

  // Highest item with pred true, where pred holds on a prefix of the order.
  std::optional<T> last_where(const std::function<bool(const T&)>& pred) const {
    if (root_ == kNone) return std::nullopt;
    std::optional<T> best;
    std::uint32_t u = root_;
    while (true) {
      const Node& n = nodes_[u];
      store_->touch(n.block);
      auto it = std::find_if_not(n.keys.begin(), n.keys.end(), pred);
      if (it != n.keys.begin()) best = *(it - 1);
      if (n.leaf || it == n.keys.end()) return best;
      u = n.kids[static_cast<std::size_t>(it - n.keys.begin())];
    }
  }

  void for_each(const std::function<void(const T&)>& fn) const {
    if (root_ != kNone) walk(root_, fn);
  }

  std::size_t block_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.live; }));
  }

 private:
  static constexpr std::uint32_t kNone = UINT32_MAX;
  struct Node {
    bool leaf = true, live = true;
    std::vector<T> keys;  // leaf: items; internal: highest item per child
    std::vector<std::uint32_t> kids;
    BlockId block{};
  };

  std::uint32_t make(bool leaf) {
    std::uint32_t id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
      nodes_[id] = Node{};
    } else {
      id = static_cast<std::uint32_t>(nodes_.size());
      nodes_.emplace_back();
    }
    nodes_[id].leaf = leaf;
    nodes_[id].block = store_->alloc();
    store_->touch(nodes_[id].block, true);
    return id;
  }

  void walk(std::uint32_t u, const std::function<void(const T&)>& fn) const {
    const Node& n = nodes_[u];
    if (n.leaf) {
      for (const T& x : n.keys) fn(x);
      return;
    }
    for (std::uint32_t k : n.kids) walk(k, fn);
  }

  static std::size_t index_in(const Node& par, std::uint32_t kid) {
    return static_cast<std::size_t>(std::find(par.kids.begin(), par.kids.end(), kid) - par.kids.begin());
  }

  // Parent's router for path[k] becomes its current highest item.
  void fix_key(const std::vector<std::uint32_t>& path, std::size_t k) {
    Node& n = nodes_[path[k]];
    store_->touch(n.block, true);
    if (k == 0 || n.keys.empty()) return;
    Node& par = nodes_[path[k - 1]];
    par.keys[index_in(par, path[k])] = n.keys.back();
  }

  void split(std::vector<std::uint32_t>& path, std::size_t k) {
    std::uint32_t u = path[k];
    std::uint32_t v = make(nodes_[u].leaf);
    Node& a = nodes_[u];
    Node& b = nodes_[v];
    std::size_t half = a.keys.size() / 2;
    b.keys.assign(a.keys.begin() + half, a.keys.end());
    a.keys.resize(half);
    if (!a.leaf) {
      b.kids.assign(a.kids.begin() + half, a.kids.end());
      a.kids.resize(half);
    }
    store_->touch(a.block, true);
    if (k == 0) {
      std::uint32_t r = make(false);
      nodes_[r].kids = {u, v};
      nodes_[r].keys = {nodes_[u].keys.back(), nodes_[v].keys.back()};
      root_ = r;
      return;
    }
    Node& par = nodes_[path[k - 1]];
    std::size_t at = index_in(par, u);
    par.keys[at] = nodes_[u].keys.back();
    par.kids.insert(par.kids.begin() + at + 1, v);
    par.keys.insert(par.keys.begin() + at + 1, nodes_[v].keys.back());
    store_->touch(par.block, true);
  }

  BlockStore* store_ = nullptr;
  std::size_t cap_ = 4;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> free_;
  std::uint32_t root_ = kNone;
  std::size_t size_ = 0;
};

struct SameSegment {
  bool operator()(const Segment& a, const Segment& b) const { return a.id == b.id; }
};
using SegmentBTree = BTree<Segment, SameSegment>;

}  // namespace dpl
