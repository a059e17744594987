#pragma once

// Biased (a,b)-trees over weighted leaf items, kept in one node pool so that
// many trees (one per portion) share storage and subtrees can move between
// trees on split/concat.
//
// Local invariant: every internal child of a node u weighs at most W(u)/a.
// A leaf of weight w at depth k has k-1 internal proper ancestors below the
// root, each shrinking the weight by a, so k <= log_a(W/w) + 1.
// Internal fanout is in [2, b]; leaves carry at most 2*leaf_cap entries.
// When a whole subtree weighs zero, leaf counts stand in for weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dpl/io_model.hpp"

namespace dpl {

using NodeId = std::uint32_t;
inline constexpr NodeId kNil = ~NodeId{0};
using Weight = long double;

struct BiasedParams {
  std::size_t a = 2;
  std::size_t b = 4;
  std::size_t leaf_cap = 32;

  // a = max(2, r/2), b = max(4, r).
  static BiasedParams from_fanout(std::size_t r, std::size_t leaf_cap) {
    return {std::max<std::size_t>(2, r / 2), std::max<std::size_t>(4, r), std::max<std::size_t>(1, leaf_cap)};
  }
};

// Nodes created, retired and restructured by one operation. `created` is in
// bottom-up order; `touched` lists surviving nodes whose subtree content
// changed, also bottom-up. Clients recompute payloads over created+touched.
struct RebalanceReport {
  NodeId root = kNil;
  std::vector<NodeId> created;
  std::vector<NodeId> touched;
  std::vector<NodeId> retired;
  std::size_t leaf_splits = 0;
  std::size_t leaf_fuses = 0;

  bool empty() const { return created.empty() && touched.empty() && retired.empty(); }
};

template <class Item, class Payload>
class BiasedForest {
 public:
  struct Entry {
    Item item;
    Weight weight = 0;
  };

  struct Node {
    NodeId parent = kNil;
    bool leaf = true;
    bool live = false;
    Weight weight = 0;
    std::size_t leaf_count = 1;
    std::vector<NodeId> kids;
    std::vector<Entry> entries;
    Payload payload{};
    Extent ext;
  };

  BiasedForest(BlockStore& store, BiasedParams p) : store_(&store), p_(p) {
    if (p_.a < 2 || p_.b < 2 * p_.a) throw Fault("BiasedForest: need a >= 2 and b >= 2a");
  }

  ~BiasedForest() {
    for (auto& n : nodes_)
      if (n.live) n.ext.release(*store_);
  }

  BiasedForest(const BiasedForest&) = delete;
  BiasedForest& operator=(const BiasedForest&) = delete;

  const BiasedParams& params() const { return p_; }
  BlockStore& store() const { return *store_; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  Payload& payload(NodeId id) { return nodes_[id].payload; }
  std::size_t live_nodes() const { return live_; }
  std::size_t node_capacity() const { return nodes_.size(); }

  // Sizes the node's block run; the payload is accounted as `records` records.
  void set_records(NodeId id, std::size_t records) { nodes_[id].ext.resize(*store_, records + nodes_[id].entries.size()); }
  void touch(NodeId id, bool dirty = false) const { nodes_[id].ext.touch_all(*store_, dirty); }

  Weight weight(NodeId root) const { return root == kNil ? 0 : nodes_[root].weight; }

  // In-place leaf edits for buffered clients. reweigh() refreshes weights up
  // the path and leaves the shape alone; the depth bound can lapse until the
  // client rebuilds.
  std::vector<Entry>& entries_of(NodeId leaf) { return nodes_[leaf].entries; }
  void reweigh(NodeId leaf) {
    Weight w = 0;
    for (const auto& e : nodes_[leaf].entries) w += e.weight;
    nodes_[leaf].weight = w;
    for (NodeId u = nodes_[leaf].parent; u != kNil; u = nodes_[u].parent) refresh_internal(u);
  }

  NodeId build(std::vector<Entry> entries, RebalanceReport* rep = nullptr) {
    RebalanceReport local;
    RebalanceReport& r = rep ? *rep : local;
    std::vector<NodeId> leaves;
    for (std::size_t i = 0; i < entries.size(); i += p_.leaf_cap) {
      std::size_t j = std::min(entries.size(), i + p_.leaf_cap);
      leaves.push_back(make_leaf({entries.begin() + i, entries.begin() + j}, r));
    }
    NodeId root = assemble(std::move(leaves), r);
    if (root != kNil) nodes_[root].parent = kNil;
    r.root = root;
    return root;
  }

  void destroy(NodeId root) {
    if (root == kNil) return;
    for (NodeId k : nodes_[root].kids) destroy(k);
    retire(root, nullptr);
  }

  // Follows chooser(node) -> child index from the root; charges one touch per
  // node on the path. Returns nullopt if the tree is empty or the chooser
  // declines.
  std::optional<NodeId> descend(NodeId root, const std::function<std::optional<std::size_t>(NodeId)>& chooser) const {
    if (root == kNil) return std::nullopt;
    NodeId u = root;
    while (true) {
      touch(u);
      if (nodes_[u].leaf) return u;
      auto i = chooser(u);
      if (!i || *i >= nodes_[u].kids.size()) return std::nullopt;
      u = nodes_[u].kids[*i];
    }
  }

  std::size_t depth(NodeId id) const {
    std::size_t d = 0;
    for (NodeId u = nodes_[id].parent; u != kNil; u = nodes_[u].parent) ++d;
    return d;
  }

  NodeId root_of(NodeId id) const {
    while (nodes_[id].parent != kNil) id = nodes_[id].parent;
    return id;
  }

  std::vector<NodeId> leaves(NodeId root) const {
    std::vector<NodeId> out;
    if (root != kNil) collect_leaves(root, out);
    return out;
  }

  std::vector<Entry> entries(NodeId root) const {
    std::vector<Entry> out;
    for (NodeId l : leaves(root))
      out.insert(out.end(), nodes_[l].entries.begin(), nodes_[l].entries.end());
    return out;
  }

  // Replaces the entries of a leaf and restores the invariants.
  RebalanceReport update_leaf(NodeId root, NodeId leaf, std::vector<Entry> fresh) {
    RebalanceReport r;
    Node& lf = nodes_[leaf];
    if (!lf.live || !lf.leaf) throw Fault("update_leaf: not a live leaf");
    bool same = fresh.size() == lf.entries.size();
    for (std::size_t i = 0; same && i < fresh.size(); ++i) same = fresh[i].weight == lf.entries[i].weight;
    lf.entries = std::move(fresh);
    if (same) {
      r.root = root;
      return r;
    }

    std::vector<NodeId> repl;
    NodeId parent = lf.parent;
    std::size_t n = nodes_[leaf].entries.size();
    if (n > 2 * p_.leaf_cap) {
      ++r.leaf_splits;
      std::vector<Entry> all = std::move(nodes_[leaf].entries);
      std::size_t pieces = (n + p_.leaf_cap - 1) / p_.leaf_cap;
      std::size_t at = 0;
      for (std::size_t k = 0; k < pieces; ++k) {
        std::size_t take = (n - at) / (pieces - k);
        std::vector<Entry> part(std::make_move_iterator(all.begin() + at), std::make_move_iterator(all.begin() + at + take));
        at += take;
        if (k == 0) {
          nodes_[leaf].entries = std::move(part);
          refresh_leaf(leaf);
          repl.push_back(leaf);
          r.touched.push_back(leaf);
        } else {
          repl.push_back(make_leaf(std::move(part), r));
        }
      }
    } else if (n == 0) {
      // dropped below
    } else {
      refresh_leaf(leaf);
      repl.push_back(leaf);
      if (n < std::max<std::size_t>(1, p_.leaf_cap / 4) && parent != kNil) {
        if (NodeId sib = adjacent_leaf_sibling(leaf); sib != kNil && nodes_[sib].entries.size() + n <= 2 * p_.leaf_cap) {
          ++r.leaf_fuses;
          std::size_t li = index_in_parent(leaf), si = index_in_parent(sib);
          auto& dst = nodes_[sib].entries;
          auto& src = nodes_[leaf].entries;
          if (si < li) dst.insert(dst.end(), src.begin(), src.end());
          else dst.insert(dst.begin(), src.begin(), src.end());
          refresh_leaf(sib);
          r.touched.push_back(sib);
          repl.clear();
        }
      }
      if (!repl.empty()) r.touched.push_back(leaf);
    }

    if (parent == kNil) {
      bool leaf_kept = std::find(repl.begin(), repl.end(), leaf) != repl.end();
      if (!leaf_kept) retire(leaf, &r);
      NodeId nr = assemble(std::move(repl), r);
      if (nr != kNil) nodes_[nr].parent = kNil;
      r.root = nr;
      return r;
    }

    auto& kids = nodes_[parent].kids;
    auto it = std::find(kids.begin(), kids.end(), leaf);
    std::size_t at = it - kids.begin();
    kids.erase(it);
    bool leaf_kept = std::find(repl.begin(), repl.end(), leaf) != repl.end();
    if (!leaf_kept) retire(leaf, &r);
    kids.insert(kids.begin() + at, repl.begin(), repl.end());
    for (NodeId k : repl) nodes_[k].parent = parent;
    r.root = repair(root, parent, r);
    return r;
  }

  // Splits before entry `index` of `leaf`: the first tree gets everything
  // before it, the second the rest.
  std::pair<NodeId, NodeId> split(NodeId root, NodeId leaf, std::size_t index, RebalanceReport* rep = nullptr) {
    RebalanceReport local;
    RebalanceReport& r = rep ? *rep : local;
    Node& lf = nodes_[leaf];
    if (index > lf.entries.size()) throw Fault("split: index past leaf end");
    std::vector<NodeId> path;
    for (NodeId u = nodes_[leaf].parent; u != kNil; u = nodes_[u].parent) path.push_back(u);
    std::reverse(path.begin(), path.end());  // root first

    std::vector<NodeId> left, right_tail;
    NodeId child = leaf;
    for (std::size_t k = path.size(); k-- > 0;) {
      const auto& kids = nodes_[path[k]].kids;
      std::size_t i = std::find(kids.begin(), kids.end(), child) - kids.begin();
      right_tail.insert(right_tail.end(), kids.begin() + i + 1, kids.end());
      child = path[k];
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      const auto& kids = nodes_[path[k]].kids;
      NodeId next = k + 1 < path.size() ? path[k + 1] : leaf;
      for (NodeId x : kids) {
        if (x == next) break;
        left.push_back(x);
      }
    }
    std::vector<NodeId> right;
    std::size_t n = nodes_[leaf].entries.size();
    if (index == 0) {
      right.push_back(leaf);
    } else if (index == n) {
      left.push_back(leaf);
    } else {
      std::vector<Entry> tail(nodes_[leaf].entries.begin() + index, nodes_[leaf].entries.end());
      nodes_[leaf].entries.resize(index);
      refresh_leaf(leaf);
      r.touched.push_back(leaf);
      left.push_back(leaf);
      right.push_back(make_leaf(std::move(tail), r));
    }
    right.insert(right.end(), right_tail.begin(), right_tail.end());
    for (NodeId u : path) retire(u, &r);
    NodeId a = assemble(std::move(left), r), b = assemble(std::move(right), r);
    if (a != kNil) nodes_[a].parent = kNil;
    if (b != kNil) nodes_[b].parent = kNil;
    (void)root;
    return {a, b};
  }

  NodeId concat(NodeId t1, NodeId t2, RebalanceReport* rep = nullptr) {
    RebalanceReport local;
    RebalanceReport& r = rep ? *rep : local;
    std::vector<NodeId> units;
    if (t1 != kNil) units.push_back(t1);
    if (t2 != kNil) units.push_back(t2);
    NodeId root = assemble(std::move(units), r);
    if (root != kNil) nodes_[root].parent = kNil;
    r.root = root;
    return root;
  }

  // Structural and bound checks; returns one line per violation.
  std::vector<std::string> audit(NodeId root) const {
    std::vector<std::string> out;
    if (root == kNil) return out;
    if (nodes_[root].parent != kNil) out.push_back("root has a parent");
    Weight total = nodes_[root].weight;
    audit_node(root, total, 0, out);
    return out;
  }

 private:
  NodeId new_node() {
    NodeId id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
      nodes_[id] = Node{};
    } else {
      id = static_cast<NodeId>(nodes_.size());
      nodes_.emplace_back();
    }
    nodes_[id].live = true;
    ++live_;
    return id;
  }

  void retire(NodeId id, RebalanceReport* r) {
    Node& n = nodes_[id];
    n.ext.release(*store_);
    n.live = false;
    n.kids.clear();
    n.entries.clear();
    n.payload = Payload{};
    free_.push_back(id);
    --live_;
    if (r) {
      r->retired.push_back(id);
      std::erase(r->created, id);
      std::erase(r->touched, id);
    }
  }

  NodeId make_leaf(std::vector<Entry> entries, RebalanceReport& r) {
    NodeId id = new_node();
    nodes_[id].leaf = true;
    nodes_[id].entries = std::move(entries);
    refresh_leaf(id);
    r.created.push_back(id);
    return id;
  }

  void refresh_leaf(NodeId id) {
    Node& n = nodes_[id];
    Weight w = 0;
    for (const auto& e : n.entries) w += e.weight;
    n.weight = w;
    n.leaf_count = 1;
    n.ext.resize(*store_, n.entries.size());
  }

  void refresh_internal(NodeId id) {
    Node& n = nodes_[id];
    Weight w = 0;
    std::size_t c = 0;
    for (NodeId k : n.kids) {
      w += nodes_[k].weight;
      c += nodes_[k].leaf_count;
    }
    n.weight = w;
    n.leaf_count = c;
  }

  NodeId make_internal(const std::vector<NodeId>& kids, RebalanceReport& r) {
    NodeId id = new_node();
    Node& n = nodes_[id];
    n.leaf = false;
    n.kids = kids;
    for (NodeId k : kids) nodes_[k].parent = id;
    refresh_internal(id);
    nodes_[id].ext.resize(*store_, 1);
    r.created.push_back(id);
    return id;
  }

  Weight key(NodeId u, bool by_count) const {
    return by_count ? static_cast<Weight>(nodes_[u].leaf_count) : nodes_[u].weight;
  }

  // Builds a subtree over an ordered run of units (leaves or valid subtrees),
  // reusing every unit that fits under the local invariant.
  NodeId assemble(std::vector<NodeId> units, RebalanceReport& r) {
    if (units.empty()) return kNil;
    if (units.size() == 1) return units[0];
    Weight total = 0;
    for (NodeId u : units) total += nodes_[u].weight;
    bool by_count = !(total > 0);
    if (by_count) {
      total = 0;
      for (NodeId u : units) total += key(u, true);
    }
    const Weight cap = total / static_cast<Weight>(p_.a);

    std::vector<NodeId> flat;
    for (NodeId u : units) {
      if (!nodes_[u].leaf && key(u, by_count) > cap) {
        for (NodeId k : nodes_[u].kids) flat.push_back(k);
        retire(u, &r);
      } else {
        flat.push_back(u);
      }
    }
    if (flat.size() <= p_.b) return make_internal(flat, r);

    std::vector<std::vector<NodeId>> groups;
    std::vector<NodeId> run;
    Weight run_w = 0;
    auto close = [&] {
      if (!run.empty()) groups.push_back(std::move(run));
      run.clear();
      run_w = 0;
    };
    for (NodeId u : flat) {
      Weight w = key(u, by_count);
      if (w > cap) {
        close();
        groups.push_back({u});
      } else {
        if (!run.empty() && run_w + w > cap) close();
        run.push_back(u);
        run_w += w;
      }
    }
    close();
    if (groups.size() > p_.b || groups.size() < 2) throw Fault("BiasedForest: grouping out of fanout bounds");

    std::vector<NodeId> kids;
    for (auto& g : groups) kids.push_back(assemble(std::move(g), r));
    return make_internal(kids, r);
  }

  bool violates(NodeId u) const {
    const Node& n = nodes_[u];
    if (n.kids.size() > p_.b || n.kids.size() < 2) return true;
    bool by_count = !(n.weight > 0);
    Weight cap = key(u, by_count) / static_cast<Weight>(p_.a);
    for (NodeId k : n.kids)
      if (!nodes_[k].leaf && key(k, by_count) > cap * (1 + 1e-12L)) return true;
    return false;
  }

  // Re-establishes the invariants on the root path of `low` after its child
  // list changed: weights are refreshed bottom-up, then the highest violating
  // node is rebuilt from the fragments hanging off the path.
  NodeId repair(NodeId root, NodeId low, RebalanceReport& r) {
    std::vector<NodeId> path;
    for (NodeId u = low; u != kNil; u = nodes_[u].parent) path.push_back(u);
    std::reverse(path.begin(), path.end());
    for (std::size_t k = path.size(); k-- > 0;) refresh_internal(path[k]);

    std::size_t v = path.size();
    for (std::size_t k = 0; k < path.size(); ++k)
      if (violates(path[k])) {
        v = k;
        break;
      }
    if (v == path.size()) {
      for (std::size_t k = path.size(); k-- > 0;) mark_touched(path[k], r);
      return root;
    }

    std::vector<NodeId> units;
    gather(path, v, units);
    NodeId up = v == 0 ? kNil : path[v - 1];
    std::size_t slot = 0;
    if (up != kNil) {
      auto& kids = nodes_[up].kids;
      slot = std::find(kids.begin(), kids.end(), path[v]) - kids.begin();
    }
    for (std::size_t k = v; k < path.size(); ++k) retire(path[k], &r);
    NodeId sub = assemble(std::move(units), r);

    if (up == kNil) {
      if (sub != kNil) nodes_[sub].parent = kNil;
      return sub;
    }
    auto& kids = nodes_[up].kids;
    if (sub == kNil) {
      kids.erase(kids.begin() + slot);
      return repair(root, up, r);
    }
    kids[slot] = sub;
    nodes_[sub].parent = up;
    for (std::size_t k = v; k-- > 0;) {
      refresh_internal(path[k]);
      mark_touched(path[k], r);
    }
    return root;
  }

  void mark_touched(NodeId u, RebalanceReport& r) {
    if (std::find(r.touched.begin(), r.touched.end(), u) == r.touched.end() &&
        std::find(r.created.begin(), r.created.end(), u) == r.created.end())
      r.touched.push_back(u);
  }

  // In-order subtrees hanging off path[v..] (the deepest path node
  // contributes all its children).
  void gather(const std::vector<NodeId>& path, std::size_t v, std::vector<NodeId>& out) const {
    const auto& kids = nodes_[path[v]].kids;
    if (v + 1 == path.size()) {
      out.insert(out.end(), kids.begin(), kids.end());
      return;
    }
    for (NodeId k : kids) {
      if (k == path[v + 1]) gather(path, v + 1, out);
      else out.push_back(k);
    }
  }

  std::size_t index_in_parent(NodeId u) const {
    const auto& kids = nodes_[nodes_[u].parent].kids;
    return std::find(kids.begin(), kids.end(), u) - kids.begin();
  }

  NodeId adjacent_leaf_sibling(NodeId u) const {
    const auto& kids = nodes_[nodes_[u].parent].kids;
    std::size_t i = index_in_parent(u);
    if (i + 1 < kids.size() && nodes_[kids[i + 1]].leaf) return kids[i + 1];
    if (i > 0 && nodes_[kids[i - 1]].leaf) return kids[i - 1];
    return kNil;
  }

  void collect_leaves(NodeId u, std::vector<NodeId>& out) const {
    if (nodes_[u].leaf) {
      out.push_back(u);
      return;
    }
    for (NodeId k : nodes_[u].kids) collect_leaves(k, out);
  }

  void audit_node(NodeId u, Weight total, std::size_t d, std::vector<std::string>& out) const {
    const Node& n = nodes_[u];
    std::string tag = "node " + std::to_string(u) + ": ";
    if (!n.live) {
      out.push_back(tag + "dead node reachable");
      return;
    }
    if (n.leaf) {
      Weight w = 0;
      for (const auto& e : n.entries) {
        if (e.weight < 0) out.push_back(tag + "negative weight");
        w += e.weight;
      }
      if (std::fabs(static_cast<double>(w - n.weight)) > 1e-9 * std::max<double>(1, static_cast<double>(w)))
        out.push_back(tag + "stale leaf weight");
      if (n.entries.size() > 2 * p_.leaf_cap) out.push_back(tag + "leaf over capacity");
      if (n.weight > 0 && total > 0) {
        long double bound = std::log(static_cast<long double>(total / n.weight)) / std::log((long double)p_.a) + 2;
        if (static_cast<long double>(d) > bound + 1e-9L)
          out.push_back(tag + "depth " + std::to_string(d) + " exceeds biased bound");
      }
      return;
    }
    if (n.kids.size() < 2 || n.kids.size() > p_.b) out.push_back(tag + "fanout " + std::to_string(n.kids.size()));
    Weight w = 0;
    std::size_t c = 0;
    bool by_count = !(n.weight > 0);
    for (NodeId k : n.kids) {
      if (nodes_[k].parent != u) out.push_back(tag + "broken parent link");
      w += nodes_[k].weight;
      c += nodes_[k].leaf_count;
    }
    if (std::fabs(static_cast<double>(w - n.weight)) > 1e-9 * std::max<double>(1, static_cast<double>(w)))
      out.push_back(tag + "stale weight");
    if (c != n.leaf_count) out.push_back(tag + "stale leaf count");
    Weight cap = key(u, by_count) / static_cast<Weight>(p_.a);
    for (NodeId k : n.kids) {
      if (!nodes_[k].leaf && key(k, by_count) > cap * (1 + 1e-9L)) out.push_back(tag + "heavy internal child");
      audit_node(k, total, d + 1, out);
    }
  }

  BlockStore* store_;
  BiasedParams p_;
  std::vector<Node> nodes_;
  std::vector<NodeId> free_;
  std::size_t live_ = 0;
};

}  // namespace dpl
