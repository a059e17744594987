#pragma once

// Weighted telescoping search over sorted number lists L(u) stored in the
// nodes of a complete degree-r tree: successor of q in the union of the lists
// on a root-to-leaf path.
//
// AL(u) = L(u) plus bridges copied from AL(parent): every d-th element and the
// +inf sentinel, which ends every AL(u) and is a bridge for every child. Each
// gap (e1, e2] between consecutive bridges of child i therefore holds at most
// d elements of AL(u). Weights: 1 in leaves; weight_i(e,u) = W(e1,e2,u_i)/d for
// e in (e1,e2], where W sums AL(u_i) over (e1,e2]; weight(e,u) = sum over i.
// Level sums never exceed n = total leaf catalog size (sentinels included).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dpl/biased_tree.hpp"
#include "dpl/io_model.hpp"

namespace dpl {

struct TelescopeTrace {
  std::vector<Weight> W;      // searched range weight per level
  std::vector<Weight> omega;  // weight of n(u_i)
  std::vector<std::size_t> depth;
  std::size_t omega_violations = 0;  // steps with omega_i < W_{i+1}/d

  double cost_log2() const {
    double s = 0;
    for (std::size_t i = 0; i < W.size(); ++i) s += std::log2(double(W[i] / omega[i]));
    return s;
  }
};

class TelescopeForest {
 public:
  // lists[u] for node u of the complete r-ary tree of the given height, in
  // BFS order (children of u are u*r+1 .. u*r+r).
  TelescopeForest(std::size_t r, std::size_t height, std::vector<std::vector<std::int64_t>> lists, std::size_t d = 0)
      : r_(r), h_(height), d_(d ? d : r * r), store_(1, 2), forest_(store_, {2, 4, 1}) {
    if (r_ < 2) throw Fault("TelescopeForest: degree must be at least 2");
    if (d_ < 2) throw Fault("TelescopeForest: d must be at least 2");
    std::size_t count = 0, width = 1;
    for (std::size_t l = 0; l <= h_; ++l, width *= r_) count += width;
    if (lists.size() != count) throw Fault("TelescopeForest: need one list per node");
    for (const auto& l : lists)
      if (!std::is_sorted(l.begin(), l.end())) throw Fault("TelescopeForest: unsorted list");
    nodes_.resize(count);
    for (std::size_t u = 0; u < count; ++u) nodes_[u].list = std::move(lists[u]);
    build();
  }

  std::size_t degree() const { return r_; }
  std::size_t height() const { return h_; }
  std::size_t d() const { return d_; }
  std::size_t node_count() const { return nodes_.size(); }
  bool is_leaf(std::size_t u) const { return u >= first_leaf(); }
  std::size_t first_leaf() const { return nodes_.size() - leaves_count(); }
  std::size_t leaves_count() const {
    std::size_t w = 1;
    for (std::size_t l = 0; l < h_; ++l) w *= r_;
    return w;
  }

  // n of the level-weight bound: total size of the leaf catalogs.
  std::size_t leaf_catalog_total() const {
    std::size_t n = 0;
    for (std::size_t u = first_leaf(); u < nodes_.size(); ++u) n += nodes_[u].al.size();
    return n;
  }

  std::size_t catalog_size(std::size_t u) const { return nodes_[u].al.size(); }
  Weight weight(std::size_t u, std::size_t idx) const { return nodes_[u].w[idx]; }
  // Test hook: overwrite one stored weight.
  void corrupt_weight(std::size_t u, std::size_t idx, Weight w) { nodes_[u].w[idx] = w; }

  std::vector<Weight> level_weights() const {
    std::vector<Weight> out(h_ + 1, 0);
    for (std::size_t u = 0; u < nodes_.size(); ++u)
      for (Weight x : nodes_[u].w) out[level_of(u)] += x;
    return out;
  }

  // Successor of q in the union of L(u) along the root-to-`leaf` path.
  std::optional<std::int64_t> path_successor(std::int64_t q, std::size_t leaf, TelescopeTrace* trace = nullptr) const {
    if (!is_leaf(leaf)) throw Fault("path_successor: not a leaf");
    std::vector<std::size_t> path;
    for (std::size_t u = leaf;; u = (u - 1) / r_) {
      path.push_back(u);
      if (u == 0) break;
    }
    std::reverse(path.begin(), path.end());

    std::optional<Elem> best;
    // root: one portion covering everything but the sentinel
    std::size_t u = 0;
    std::size_t lo = kNoIdx, hi = nodes_[0].al.size() - 1;  // search (lo, hi]
    Weight prev_omega = 0;
    for (std::size_t k = 0; k < path.size(); ++k) {
      u = path[k];
      const Node& nd = nodes_[u];
      std::size_t depth = 0;
      std::size_t n = search(nd, lo, hi, q, depth);
      Weight W = range_weight(nd, lo, hi);
      if (trace) {
        if (k > 0 && prev_omega * d_ < W * (1 - 1e-12L)) ++trace->omega_violations;
        trace->W.push_back(W);
        trace->omega.push_back(nd.w[n]);
        trace->depth.push_back(depth);
      }
      prev_omega = nd.w[n];
      if (!best || nd.al[n] < *best) best = nd.al[n];
      if (k + 1 == path.size()) break;
      std::size_t j = path[k + 1] - (u * r_ + 1);
      // finger search from n for the flanking bridges of child j
      std::size_t bn = n;
      while (!nd.bridge[j][bn]) ++bn;
      std::size_t bp = n;
      do bp = bp == 0 ? kNoIdx : bp - 1;
      while (bp != kNoIdx && !nd.bridge[j][bp]);
      lo = bp == kNoIdx ? kNoIdx : nd.down[j][bp];
      hi = nd.down[j][bn];
    }
    if (best->is_sentinel()) return std::nullopt;
    return best->value;
  }

  // Recomputes catalogs, bridges and weights from scratch and compares.
  std::vector<std::string> audit() const {
    std::vector<std::string> out;
    for (std::size_t u = 0; u < nodes_.size(); ++u) {
      const Node& nd = nodes_[u];
      std::string tag = "node " + std::to_string(u) + ": ";
      for (std::size_t i = 1; i < nd.al.size(); ++i)
        if (!(nd.al[i - 1] < nd.al[i])) out.push_back(tag + "catalog not sorted");
      if (nd.al.empty() || !nd.al.back().is_sentinel()) out.push_back(tag + "sentinel missing");
      for (const Elem& e : nd.al)
        if (!e.is_sentinel() && e.origin != u && !is_ancestor(e.origin, u))
          out.push_back(tag + "element from a non-ancestor (property i)");
      if (is_leaf(u)) continue;
      for (std::size_t i = 0; i < r_; ++i) {
        const Node& ch = nodes_[u * r_ + 1 + i];
        std::size_t run = 0;
        for (std::size_t p = 0; p < nd.al.size(); ++p) {
          bool shared = std::binary_search(ch.al.begin(), ch.al.end(), nd.al[p]);
          if (shared != static_cast<bool>(nd.bridge[i][p])) out.push_back(tag + "bridge flag differs from AL(u) ∩ AL(u_i)");
          ++run;
          if (shared) {
            if (run > d_) out.push_back(tag + "more than d elements in a bridge gap (property ii)");
            run = 0;
          }
        }
      }
    }
    // exact weights: scale level-l weights by d^l so they are integers
    std::vector<std::vector<__int128>> exact = exact_weights();
    __int128 scale = 1;
    std::vector<__int128> level_scale(h_ + 1);
    for (std::size_t l = h_ + 1; l-- > 0;) {
      level_scale[l] = scale;
      scale *= d_;
    }
    std::vector<__int128> sums(h_ + 1, 0);
    for (std::size_t u = 0; u < nodes_.size(); ++u) {
      std::size_t l = level_of(u);
      for (std::size_t p = 0; p < nodes_[u].al.size(); ++p) {
        long double want = static_cast<long double>(exact[u][p]) / static_cast<long double>(level_scale[l]);
        if (std::fabs(static_cast<double>(want - nodes_[u].w[p])) > 1e-9 * std::max(1.0, static_cast<double>(want)))
          out.push_back("node " + std::to_string(u) + ": stored weight differs from recomputation at " + std::to_string(p));
        sums[l] += exact[u][p];
      }
    }
    __int128 n = static_cast<__int128>(leaf_catalog_total());
    for (std::size_t l = 0; l <= h_; ++l)
      if (sums[l] > n * level_scale[l]) out.push_back("level " + std::to_string(l) + ": weight sum exceeds n");
    return out;
  }

 private:
  static constexpr std::size_t kNoIdx = ~std::size_t{0};

  struct Elem {
    std::int64_t value = 0;
    std::uint32_t origin = 0;
    std::uint32_t index = 0;
    bool is_sentinel() const { return origin == std::numeric_limits<std::uint32_t>::max(); }
    friend bool operator==(const Elem&, const Elem&) = default;
    friend auto operator<=>(const Elem&, const Elem&) = default;
  };
  static Elem sentinel() {
    return {std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::uint32_t>::max(), 0};
  }

  struct Payload {
    std::vector<std::int64_t> kid_max;  // largest value below each child
  };
  using Forest = BiasedForest<std::uint32_t, Payload>;

  struct Node {
    std::vector<std::int64_t> list;
    std::vector<Elem> al;
    std::vector<Weight> w;
    std::vector<std::vector<char>> bridge;       // [child][pos]: in E_i(u)
    std::vector<std::vector<std::size_t>> down;  // [child][pos]: index in AL(u_i)
    std::vector<std::size_t> up;                 // positions of up-bridges, ascending
    std::vector<NodeId> portion;                 // portion[k]: open range ending at up[k]
  };

  std::size_t level_of(std::size_t u) const {
    std::size_t l = 0;
    while (u != 0) u = (u - 1) / r_, ++l;
    return l;
  }
  bool is_ancestor(std::size_t a, std::size_t u) const {
    while (u != 0) {
      u = (u - 1) / r_;
      if (u == a) return true;
    }
    return false;
  }

  void build() {
    Node& root = nodes_[0];
    for (std::size_t i = 0; i < root.list.size(); ++i) root.al.push_back({root.list[i], 0, static_cast<std::uint32_t>(i)});
    root.al.push_back(sentinel());
    for (std::size_t u = 0; u < nodes_.size(); ++u) {
      if (is_leaf(u)) continue;
      Node& nd = nodes_[u];
      std::vector<Elem> e;
      std::vector<char> flag(nd.al.size(), 0);
      for (std::size_t p = d_ - 1; p < nd.al.size(); p += d_) flag[p] = 1;
      flag.back() = 1;
      for (std::size_t p = 0; p < nd.al.size(); ++p)
        if (flag[p]) e.push_back(nd.al[p]);
      nd.bridge.assign(r_, flag);
      nd.down.assign(r_, std::vector<std::size_t>(nd.al.size(), kNoIdx));
      for (std::size_t i = 0; i < r_; ++i) {
        std::size_t c = u * r_ + 1 + i;
        Node& ch = nodes_[c];
        std::vector<Elem> own;
        for (std::size_t k = 0; k < ch.list.size(); ++k) own.push_back({ch.list[k], static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(k)});
        ch.al.clear();
        std::merge(own.begin(), own.end(), e.begin(), e.end(), std::back_inserter(ch.al));
        for (std::size_t p = 0; p < nd.al.size(); ++p)
          if (flag[p]) {
            std::size_t at = std::lower_bound(ch.al.begin(), ch.al.end(), nd.al[p]) - ch.al.begin();
            nd.down[i][p] = at;
            ch.up.push_back(at);
          }
      }
    }
    nodes_[0].up.push_back(nodes_[0].al.size() - 1);
    compute_weights();
    for (std::size_t u = 0; u < nodes_.size(); ++u) build_portions(u);
  }

  void compute_weights() {
    for (std::size_t u = nodes_.size(); u-- > 0;) {
      Node& nd = nodes_[u];
      nd.w.assign(nd.al.size(), 0);
      if (is_leaf(u)) {
        std::fill(nd.w.begin(), nd.w.end(), Weight(1));
        continue;
      }
      for (std::size_t i = 0; i < r_; ++i) {
        const Node& ch = nodes_[u * r_ + 1 + i];
        std::vector<Weight> pre(ch.w.size() + 1, 0);
        for (std::size_t k = 0; k < ch.w.size(); ++k) pre[k + 1] = pre[k] + ch.w[k];
        std::size_t gap_start = 0;        // first AL(u) position of the gap
        std::size_t child_from = 0;       // first AL(u_i) position of the gap
        for (std::size_t p = 0; p < nd.al.size(); ++p) {
          if (!nd.bridge[i][p]) continue;
          std::size_t child_to = nd.down[i][p] + 1;
          Weight gw = (pre[child_to] - pre[child_from]) / static_cast<Weight>(d_);
          for (std::size_t x = gap_start; x <= p; ++x) nd.w[x] += gw;
          gap_start = p + 1;
          child_from = child_to;
        }
      }
    }
  }

  // Weights at level l times d^(h-l): integers, since each level divides by d once.
  std::vector<std::vector<__int128>> exact_weights() const {
    std::vector<std::vector<__int128>> ex(nodes_.size());
    for (std::size_t u = nodes_.size(); u-- > 0;) {
      const Node& nd = nodes_[u];
      ex[u].assign(nd.al.size(), is_leaf(u) ? 1 : 0);
      if (is_leaf(u)) continue;
      for (std::size_t i = 0; i < r_; ++i) {
        std::size_t c = u * r_ + 1 + i;
        const Node& ch = nodes_[c];
        std::size_t gap_start = 0, k = 0;
        for (std::size_t p = 0; p < nd.al.size(); ++p) {
          if (!std::binary_search(ch.al.begin(), ch.al.end(), nd.al[p])) continue;
          __int128 gw = 0;
          for (; k < ch.al.size() && ch.al[k] <= nd.al[p]; ++k) gw += ex[c][k];
          for (std::size_t x = gap_start; x <= p; ++x) ex[u][x] += gw;
          gap_start = p + 1;
        }
      }
    }
    return ex;
  }

  void build_portions(std::size_t u) {
    Node& nd = nodes_[u];
    std::size_t from = 0;
    for (std::size_t k = 0; k < nd.up.size(); ++k) {
      std::vector<Forest::Entry> entries;
      for (std::size_t p = from; p < nd.up[k]; ++p) entries.push_back({static_cast<std::uint32_t>(p), nd.w[p]});
      NodeId root = forest_.build(std::move(entries));
      if (root != kNil) fill_payload(root, nd);
      nd.portion.push_back(root);
      from = nd.up[k] + 1;
    }
  }

  std::int64_t fill_payload(NodeId x, const Node& nd) {
    const auto& n = forest_.node(x);
    if (n.leaf) return nd.al[n.entries.back().item].value;
    std::vector<std::int64_t> mx;
    for (NodeId k : n.kids) mx.push_back(fill_payload(k, nd));
    forest_.payload(x).kid_max = mx;
    return mx.back();
  }

  // Total weight of AL positions (lo, hi].
  Weight range_weight(const Node& nd, std::size_t lo, std::size_t hi) const {
    Weight s = 0;
    for (std::size_t p = lo == kNoIdx ? 0 : lo + 1; p <= hi; ++p) s += nd.w[p];
    return s;
  }

  // n(u): successor of q among positions (lo, hi]; hi is an up-bridge and is
  // the answer when the open portion has none.
  std::size_t search(const Node& nd, std::size_t lo, std::size_t hi, std::int64_t q, std::size_t& depth) const {
    (void)lo;
    std::size_t k = std::lower_bound(nd.up.begin(), nd.up.end(), hi) - nd.up.begin();
    NodeId root = nd.portion[k];
    if (root == kNil) return hi;
    auto leaf = forest_.descend(root, [&](NodeId x) -> std::optional<std::size_t> {
      const auto& mx = forest_.node(x).payload.kid_max;
      for (std::size_t i = 0; i < mx.size(); ++i)
        if (mx[i] >= q) return i;
      return std::nullopt;
    });
    if (!leaf) return hi;
    depth = forest_.depth(*leaf);
    for (const auto& e : forest_.node(*leaf).entries)
      if (nd.al[e.item].value >= q) return e.item;
    return hi;
  }

  std::size_t r_, h_, d_;
  BlockStore store_;
  mutable Forest forest_;
  std::vector<Node> nodes_;
};

}  // namespace dpl
