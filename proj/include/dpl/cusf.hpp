#pragma once

// Colored predecessor search. Every element has a value and a color interval
// [c1,c2]; a query (v, Cq) asks for the largest element with value <= v
// whose interval meets the color set Cq (successor queries are symmetric).
//
// An interval [c1,c2] is an "atom" (an interval color). Each element carries
// exactly one atom, and "meets Cq" becomes "atom is in the set of atoms
// meeting Cq". Atoms are materialized only when present, and elements with
// equal value are ordered by atom, lexicographically by (c1, c2).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dpl/io_model.hpp"

namespace dpl {

using Color = std::uint32_t;
using Atom = std::uint32_t;  // (c1 << 16) | c2

inline constexpr Color kMaxColor = 0xFFFF;

inline Atom make_atom(Color c1, Color c2) {
  if (c1 > c2 || c2 > kMaxColor) throw Fault("bad color interval");
  return (c1 << 16) | c2;
}
inline Color atom_lo(Atom a) { return a >> 16; }
inline Color atom_hi(Atom a) { return a & 0xFFFF; }

// A color set as sorted disjoint closed ranges.
class ColorSet {
 public:
  ColorSet() = default;
  ColorSet(std::initializer_list<Color> cs) {
    for (Color c : cs) add(c, c);
  }
  static ColorSet range(Color lo, Color hi) {
    ColorSet s;
    s.add(lo, hi);
    return s;
  }

  void add(Color lo, Color hi) {
    if (lo > hi) return;
    std::vector<std::pair<Color, Color>> out;
    bool placed = false;
    for (auto [a, b] : r_) {
      if (b + 1 < lo) {
        out.push_back({a, b});
      } else if (hi + 1 < a) {
        if (!placed) out.push_back({lo, hi}), placed = true;
        out.push_back({a, b});
      } else {
        lo = std::min(lo, a), hi = std::max(hi, b);
      }
    }
    if (!placed) out.push_back({lo, hi});
    r_ = std::move(out);
  }

  bool contains(Color c) const { return meets(make_atom(c, c)); }

  bool meets(Atom a) const {
    Color lo = atom_lo(a), hi = atom_hi(a);
    auto it = std::upper_bound(r_.begin(), r_.end(), std::pair<Color, Color>{hi, kMaxColor + 1});
    if (it == r_.begin()) return false;
    --it;
    return it->second >= lo;
  }

  bool empty() const { return r_.empty(); }

 private:
  std::vector<std::pair<Color, Color>> r_;
};

// Which atoms a query accepts: those meeting a color set, or one exact atom.
struct AtomFilter {
  const ColorSet* set = nullptr;
  Atom exact = 0;

  static AtomFilter meeting(const ColorSet& s) { return {&s, 0}; }
  static AtomFilter only(Atom a) { return {nullptr, a}; }
  bool operator()(Atom a) const { return set ? set->meets(a) : a == exact; }
};

struct CElem {
  std::uint64_t value = 0;
  Atom atom = 0;
  friend bool operator==(const CElem&, const CElem&) = default;
  friend auto operator<=>(const CElem&, const CElem&) = default;
};

// Brute-force reference used by tests and audits.
inline std::optional<CElem> scan_pred(const std::vector<CElem>& s, std::uint64_t v, AtomFilter f) {
  std::optional<CElem> best;
  for (const CElem& e : s)
    if (e.value <= v && f(e.atom) && (!best || *best < e)) best = e;
  return best;
}
inline std::optional<CElem> scan_succ(const std::vector<CElem>& s, std::uint64_t v, AtomFilter f) {
  std::optional<CElem> best;
  for (const CElem& e : s)
    if (e.value >= v && f(e.atom) && (!best || e < *best)) best = e;
  return best;
}

// ---------------------------------------------------------------------------
// B+-tree over elements sorted by (value, atom). Every internal node keeps,
// per child and per atom present below it, the minimal and maximal element.
// A query walks one root-to-leaf path, picking the rightmost (leftmost) child
// whose table proves a qualifying element.
class SmallColoredSet {
 public:
  struct AtomRange {
    Atom atom;
    CElem min, max;
  };

  SmallColoredSet(BlockStore& store, std::size_t leaf_cap, std::size_t fanout)
      : store_(&store), leaf_cap_(std::max<std::size_t>(2, leaf_cap)), fanout_(std::max<std::size_t>(2, fanout)) {}

  // Leaf capacity B and fanout max(4, sqrt B).
  static std::size_t fanout_for(std::size_t b) {
    return std::max<std::size_t>(4, static_cast<std::size_t>(std::sqrt(double(b))));
  }
  static SmallColoredSet for_block(BlockStore& store) {
    return SmallColoredSet(store, store.block_size(), fanout_for(store.block_size()));
  }

  ~SmallColoredSet() { clear(); }
  SmallColoredSet(const SmallColoredSet&) = delete;
  SmallColoredSet& operator=(const SmallColoredSet&) = delete;

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  void clear() {
    for (auto& n : nodes_)
      if (n.live) n.ext.release(*store_);
    nodes_.clear();
    free_.clear();
    root_ = kNone;
    size_ = 0;
    peak_ = 0;
  }

  void insert(CElem e) {
    if (root_ == kNone) {
      root_ = new_node(true);
      nodes_[root_].el.push_back(e);
      ++size_;
      peak_ = std::max(peak_, size_);
      save(root_);
      return;
    }
    std::vector<std::uint32_t> path = path_to(e);
    std::uint32_t leaf = path.back();
    auto& el = nodes_[leaf].el;
    auto it = std::lower_bound(el.begin(), el.end(), e);
    if (it != el.end() && *it == e) throw Fault("SmallColoredSet: duplicate element");
    el.insert(it, e);
    ++size_;
    peak_ = std::max(peak_, size_);
    fix_upward(path);
  }

  void erase(CElem e) {
    if (root_ == kNone) throw Fault("SmallColoredSet: erase from empty set");
    std::vector<std::uint32_t> path = path_to(e);
    std::uint32_t leaf = path.back();
    auto& el = nodes_[leaf].el;
    auto it = std::lower_bound(el.begin(), el.end(), e);
    if (it == el.end() || !(*it == e)) throw Fault("SmallColoredSet: erase of absent element");
    el.erase(it);
    --size_;
    fix_upward(path);
    if (size_ > 0 && size_ * 4 < peak_ && peak_ > leaf_cap_) rebuild();
  }

  bool contains(CElem e) const {
    if (root_ == kNone) return false;
    std::uint32_t u = root_;
    while (!nodes_[u].leaf) u = nodes_[u].kids[child_for(u, e)];
    const auto& el = nodes_[u].el;
    return std::binary_search(el.begin(), el.end(), e);
  }

  std::optional<CElem> pred(std::uint64_t v, AtomFilter f) const {
    if (root_ == kNone) return std::nullopt;
    std::uint32_t u = root_;
    while (true) {
      touch(u);
      const Node& n = nodes_[u];
      if (n.leaf) {
        for (auto it = n.el.rbegin(); it != n.el.rend(); ++it)
          if (it->value <= v && f(it->atom)) return *it;
        return std::nullopt;
      }
      std::optional<std::size_t> pick;
      for (std::size_t i = n.kids.size(); i-- > 0 && !pick;)
        for (const auto& ar : n.tab[i])
          if (f(ar.atom) && ar.min.value <= v) {
            pick = i;
            break;
          }
      if (!pick) return std::nullopt;
      u = n.kids[*pick];
    }
  }

  std::optional<CElem> succ(std::uint64_t v, AtomFilter f) const {
    if (root_ == kNone) return std::nullopt;
    std::uint32_t u = root_;
    while (true) {
      touch(u);
      const Node& n = nodes_[u];
      if (n.leaf) {
        for (const auto& e : n.el)
          if (e.value >= v && f(e.atom)) return e;
        return std::nullopt;
      }
      std::optional<std::size_t> pick;
      for (std::size_t i = 0; i < n.kids.size() && !pick; ++i)
        for (const auto& ar : n.tab[i])
          if (f(ar.atom) && ar.max.value >= v) {
            pick = i;
            break;
          }
      if (!pick) return std::nullopt;
      u = n.kids[*pick];
    }
  }

  std::vector<CElem> elements() const {
    std::vector<CElem> out;
    if (root_ != kNone) collect(root_, out);
    return out;
  }

  std::size_t height() const {
    std::size_t h = 0;
    for (std::uint32_t u = root_; u != kNone && !nodes_[u].leaf; u = nodes_[u].kids[0]) ++h;
    return h;
  }

  std::size_t block_count() const {
    std::size_t c = 0;
    for (const auto& n : nodes_)
      if (n.live) c += n.ext.block_count();
    return c;
  }

  // Tables equal their recomputation from the leaves; keys are sorted.
  std::vector<std::string> audit() const {
    std::vector<std::string> out;
    if (root_ == kNone) return out;
    auto all = elements();
    if (all.size() != size_) out.push_back("size mismatch");
    if (!std::is_sorted(all.begin(), all.end()) || std::adjacent_find(all.begin(), all.end()) != all.end())
      out.push_back("leaf order broken");
    audit_node(root_, out);
    return out;
  }

 private:
  static constexpr std::uint32_t kNone = ~std::uint32_t{0};

  struct Node {
    bool leaf = true;
    bool live = false;
    std::uint32_t parent = kNone;
    std::vector<CElem> el;
    std::vector<std::uint32_t> kids;
    std::vector<CElem> kmax;
    std::vector<std::vector<AtomRange>> tab;
    Extent ext;
  };

  std::uint32_t new_node(bool leaf) {
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
    nodes_[id].live = true;
    return id;
  }

  void drop(std::uint32_t id) {
    nodes_[id].ext.release(*store_);
    nodes_[id] = Node{};
    free_.push_back(id);
  }

  void touch(std::uint32_t u, bool dirty = false) const { nodes_[u].ext.touch_all(*store_, dirty); }

  std::size_t records(const Node& n) const {
    if (n.leaf) return n.el.size();
    std::size_t r = 2 * n.kids.size();
    for (const auto& t : n.tab) r += 3 * t.size();
    return r;
  }

  void save(std::uint32_t u) { nodes_[u].ext.resize(*store_, records(nodes_[u])); }

  std::size_t child_for(std::uint32_t u, const CElem& e) const {
    const auto& km = nodes_[u].kmax;
    std::size_t i = std::lower_bound(km.begin(), km.end(), e) - km.begin();
    return std::min(i, km.size() - 1);
  }

  std::vector<std::uint32_t> path_to(const CElem& e) const {
    std::vector<std::uint32_t> path{root_};
    touch(root_);
    while (!nodes_[path.back()].leaf) {
      std::uint32_t next = nodes_[path.back()].kids[child_for(path.back(), e)];
      touch(next);
      path.push_back(next);
    }
    return path;
  }

  CElem max_of(std::uint32_t u) const {
    const Node& n = nodes_[u];
    return n.leaf ? n.el.back() : n.kmax.back();
  }

  std::vector<AtomRange> summary(std::uint32_t u) const {
    std::map<Atom, AtomRange> acc;
    auto add = [&](const AtomRange& r) {
      auto [it, fresh] = acc.try_emplace(r.atom, r);
      if (!fresh) {
        it->second.min = std::min(it->second.min, r.min);
        it->second.max = std::max(it->second.max, r.max);
      }
    };
    const Node& n = nodes_[u];
    if (n.leaf) {
      for (const auto& e : n.el) add({e.atom, e, e});
    } else {
      for (const auto& t : n.tab)
        for (const auto& r : t) add(r);
    }
    std::vector<AtomRange> out;
    for (auto& [a, r] : acc) out.push_back(r);
    return out;
  }

  void set_child_info(std::uint32_t parent, std::size_t i) {
    std::uint32_t c = nodes_[parent].kids[i];
    nodes_[parent].kmax[i] = max_of(c);
    nodes_[parent].tab[i] = summary(c);
  }

  // Splits overfull nodes, drops empty ones and refreshes tables along the path.
  void fix_upward(const std::vector<std::uint32_t>& path) {
    for (std::size_t k = path.size(); k-- > 0;) {
      std::uint32_t u = path[k];
      Node& n = nodes_[u];
      bool empty_node = n.leaf ? n.el.empty() : n.kids.empty();
      std::uint32_t parent = k > 0 ? path[k - 1] : kNone;
      if (empty_node) {
        if (parent == kNone) {
          drop(u);
          root_ = kNone;
          return;
        }
        auto& pk = nodes_[parent].kids;
        std::size_t i = std::find(pk.begin(), pk.end(), u) - pk.begin();
        pk.erase(pk.begin() + i);
        nodes_[parent].kmax.erase(nodes_[parent].kmax.begin() + i);
        nodes_[parent].tab.erase(nodes_[parent].tab.begin() + i);
        drop(u);
        continue;
      }
      std::size_t cap = n.leaf ? leaf_cap_ : fanout_;
      std::size_t cnt = n.leaf ? n.el.size() : n.kids.size();
      std::uint32_t sib = kNone;
      if (cnt > cap) {
        sib = new_node(nodes_[u].leaf);
        Node& a = nodes_[u];
        Node& b = nodes_[sib];
        std::size_t half = cnt / 2;
        if (a.leaf) {
          b.el.assign(a.el.begin() + half, a.el.end());
          a.el.resize(half);
        } else {
          b.kids.assign(a.kids.begin() + half, a.kids.end());
          b.kmax.assign(a.kmax.begin() + half, a.kmax.end());
          b.tab.assign(a.tab.begin() + half, a.tab.end());
          a.kids.resize(half);
          a.kmax.resize(half);
          a.tab.resize(half);
          for (std::uint32_t c : b.kids) nodes_[c].parent = sib;
        }
        save(sib);
        if (parent == kNone) {
          std::uint32_t r = new_node(false);
          nodes_[r].kids = {u, sib};
          nodes_[r].kmax.resize(2);
          nodes_[r].tab.resize(2);
          nodes_[u].parent = nodes_[sib].parent = r;
          set_child_info(r, 0);
          set_child_info(r, 1);
          save(u);
          save(r);
          root_ = r;
          return;
        }
      }
      save(u);
      if (parent == kNone) {
        if (!nodes_[u].leaf && nodes_[u].kids.size() == 1) {
          root_ = nodes_[u].kids[0];
          nodes_[root_].parent = kNone;
          drop(u);
        }
        return;
      }
      auto& pk = nodes_[parent].kids;
      std::size_t i = std::find(pk.begin(), pk.end(), u) - pk.begin();
      set_child_info(parent, i);
      if (sib != kNone) {
        nodes_[sib].parent = parent;
        nodes_[parent].kids.insert(nodes_[parent].kids.begin() + i + 1, sib);
        nodes_[parent].kmax.insert(nodes_[parent].kmax.begin() + i + 1, CElem{});
        nodes_[parent].tab.insert(nodes_[parent].tab.begin() + i + 1, std::vector<AtomRange>{});
        set_child_info(parent, i + 1);
      }
    }
  }

  void rebuild() {
    auto all = elements();
    clear();
    if (all.empty()) return;
    std::vector<std::uint32_t> level;
    std::size_t per = std::max<std::size_t>(1, leaf_cap_ / 2 + 1);
    for (std::size_t i = 0; i < all.size(); i += per) {
      std::uint32_t l = new_node(true);
      nodes_[l].el.assign(all.begin() + i, all.begin() + std::min(all.size(), i + per));
      save(l);
      level.push_back(l);
    }
    std::size_t fan = std::max<std::size_t>(2, fanout_ / 2 + 1);
    while (level.size() > 1) {
      std::vector<std::uint32_t> up;
      for (std::size_t i = 0; i < level.size(); i += fan) {
        std::uint32_t p = new_node(false);
        for (std::size_t j = i; j < std::min(level.size(), i + fan); ++j) {
          nodes_[p].kids.push_back(level[j]);
          nodes_[level[j]].parent = p;
        }
        nodes_[p].kmax.resize(nodes_[p].kids.size());
        nodes_[p].tab.resize(nodes_[p].kids.size());
        for (std::size_t j = 0; j < nodes_[p].kids.size(); ++j) set_child_info(p, j);
        save(p);
        up.push_back(p);
      }
      level = std::move(up);
    }
    root_ = level[0];
    size_ = peak_ = all.size();
  }

  void collect(std::uint32_t u, std::vector<CElem>& out) const {
    const Node& n = nodes_[u];
    if (n.leaf) {
      out.insert(out.end(), n.el.begin(), n.el.end());
      return;
    }
    for (std::uint32_t c : n.kids) collect(c, out);
  }

  void audit_node(std::uint32_t u, std::vector<std::string>& out) const {
    const Node& n = nodes_[u];
    if (n.leaf) {
      if (n.el.empty() || n.el.size() > leaf_cap_) out.push_back("leaf size out of range");
      return;
    }
    if (n.kids.empty() || n.kids.size() > fanout_) out.push_back("fanout out of range");
    for (std::size_t i = 0; i < n.kids.size(); ++i) {
      std::uint32_t c = n.kids[i];
      if (nodes_[c].parent != u) out.push_back("parent link");
      if (!(n.kmax[i] == max_of(c))) out.push_back("stale child max");
      auto s = summary(c);
      bool same = s.size() == n.tab[i].size();
      for (std::size_t j = 0; same && j < s.size(); ++j)
        same = s[j].atom == n.tab[i][j].atom && s[j].min == n.tab[i][j].min && s[j].max == n.tab[i][j].max;
      if (!same) out.push_back("stale color table");
      audit_node(c, out);
    }
  }

  BlockStore* store_;
  std::size_t leaf_cap_;
  std::size_t fanout_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> free_;
  std::uint32_t root_ = kNone;
  std::size_t size_ = 0;
  std::size_t peak_ = 0;
};

// ---------------------------------------------------------------------------
// Recursive colored predecessor structure over values in [0, V).
//
// V <= B^2, or few elements: one SmallColoredSet. Otherwise [0, V) is cut
// into subintervals of width U = B^h, h = ceil(log_B(V) / 2). Cell r keeps,
// per atom, the minimal and maximal element of S[r][atom] and its size. The
// elements strictly between min and max live in D[r] (values relative to the
// cell), created while some class of r has at least 3 elements. D_top holds
// (r, atom) for every nonempty class.
class RecursiveColoredSet {
 public:
  RecursiveColoredSet(BlockStore& store, std::uint64_t universe, std::size_t depth = 0)
      : store_(&store), v_(std::max<std::uint64_t>(1, universe)), depth_(depth), small_(SmallColoredSet::for_block(store)) {
    const std::uint64_t b = store.block_size();
    b2_ = b * b;
    if (v_ > b2_) {
      // h = ceil(log_B V / 2); U = B^h
      std::size_t lg = 0;
      for (std::uint64_t p = 1; p < v_; p *= b) ++lg;
      std::size_t h = (lg + 1) / 2;
      u_ = 1;
      for (std::size_t i = 0; i < h; ++i) u_ *= b;
      cells_count_ = (v_ + u_ - 1) / u_;
    }
  }

  RecursiveColoredSet(const RecursiveColoredSet&) = delete;
  RecursiveColoredSet& operator=(const RecursiveColoredSet&) = delete;
  ~RecursiveColoredSet() { drop_cells(); }

  std::uint64_t universe() const { return v_; }
  std::size_t size() const { return k_; }
  bool is_small() const { return small_mode_; }

  void insert(CElem e) {
    if (e.value >= v_) throw Fault("RecursiveColoredSet: value outside universe");
    if (small_mode_) {
      small_.insert(e);
      ++k_;
      if (v_ > b2_ && k_ > b2_) to_recursive();
      return;
    }
    insert_split(e);
    ++k_;
  }

  void erase(CElem e) {
    if (e.value >= v_) throw Fault("RecursiveColoredSet: value outside universe");
    if (small_mode_) {
      small_.erase(e);
      --k_;
      return;
    }
    erase_split(e);
    --k_;
    if (k_ * 4 < b2_) to_small();
  }

  std::optional<CElem> pred(std::uint64_t v, AtomFilter f) const {
    if (k_ == 0) return std::nullopt;
    if (v >= v_) v = v_ - 1;
    if (small_mode_) return small_.pred(v, f);
    std::uint64_t r = v / u_;
    if (const Cell* c = cell(r)) {
      std::optional<CElem> best;
      bool any = false, need_d = false;
      for (const auto& cl : c->cls) {
        if (!f(cl.atom) || cl.min.value > v) continue;
        any = true;
        CElem cand = cl.max.value <= v ? cl.max : cl.min;
        if (!best || *best < cand) best = cand;
        if (cl.max.value > v && cl.count >= 3) need_d = true;
      }
      if (any) {
        if (need_d && c->d) {
          if (auto x = c->d->pred(v - r * u_, f)) {
            CElem abs{x->value + r * u_, x->atom};
            if (*best < abs) best = abs;
          }
        }
        return best;
      }
    }
    if (r == 0 || !top_) return std::nullopt;
    auto t = top_->pred(r - 1, f);
    if (!t) return std::nullopt;
    const Cell* c = cell(t->value);
    std::optional<CElem> best;
    for (const auto& cl : c->cls)
      if (f(cl.atom) && (!best || *best < cl.max)) best = cl.max;
    return best;
  }

  std::optional<CElem> succ(std::uint64_t v, AtomFilter f) const {
    if (k_ == 0 || v >= v_) return std::nullopt;
    if (small_mode_) return small_.succ(v, f);
    std::uint64_t r = v / u_;
    if (const Cell* c = cell(r)) {
      std::optional<CElem> best;
      bool any = false, need_d = false;
      for (const auto& cl : c->cls) {
        if (!f(cl.atom) || cl.max.value < v) continue;
        any = true;
        CElem cand = cl.min.value >= v ? cl.min : cl.max;
        if (!best || cand < *best) best = cand;
        if (cl.min.value < v && cl.count >= 3) need_d = true;
      }
      if (any) {
        if (need_d && c->d) {
          if (auto x = c->d->succ(v - r * u_, f)) {
            CElem abs{x->value + r * u_, x->atom};
            if (abs < *best) best = abs;
          }
        }
        return best;
      }
    }
    if (r + 1 >= cells_count_ || !top_) return std::nullopt;
    auto t = top_->succ(r + 1, f);
    if (!t) return std::nullopt;
    const Cell* c = cell(t->value);
    std::optional<CElem> best;
    for (const auto& cl : c->cls)
      if (f(cl.atom) && (!best || cl.min < *best)) best = cl.min;
    return best;
  }

  std::vector<CElem> elements() const {
    if (small_mode_) return small_.elements();
    std::vector<CElem> out;
    for (const auto& [r, c] : cells_) {
      for (const auto& cl : c.cls) {
        out.push_back(cl.min);
        if (cl.count >= 2) out.push_back(cl.max);
      }
      if (c.d)
        for (CElem x : c.d->elements()) out.push_back({x.value + r * u_, x.atom});
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Number of structure levels on the deepest recursion path.
  std::size_t levels() const {
    if (small_mode_) return 1;
    std::size_t m = top_ ? top_->levels() : 0;
    for (const auto& [r, c] : cells_)
      if (c.d) m = std::max(m, c.d->levels());
    return m + 1;
  }

  bool has_child(std::uint64_t r) const {
    const Cell* c = cell_peek(r);
    return c && c->d;
  }

  std::size_t block_count() const {
    if (small_mode_) return small_.block_count();
    std::size_t n = top_ ? top_->block_count() : 0;
    for (const auto& [r, c] : cells_) n += c.ext.block_count() + (c.d ? c.d->block_count() : 0);
    return n;
  }

  // Min/max tables are the true class extrema, D[r] holds exactly the
  // middles, D_top holds exactly the nonempty classes; recursively.
  std::vector<std::string> audit() const {
    std::vector<std::string> out;
    if (small_mode_) {
      out = small_.audit();
      if (small_.size() != k_) out.push_back("size mismatch");
      return out;
    }
    std::size_t total = 0;
    std::vector<CElem> top_want;
    for (const auto& [r, c] : cells_) {
      std::vector<CElem> mids = c.d ? c.d->elements() : std::vector<CElem>{};
      bool need_d = false;
      for (const auto& cl : c.cls) {
        std::vector<CElem> mine;
        for (CElem x : mids)
          if (x.atom == cl.atom) mine.push_back({x.value + r * u_, x.atom});
        if (cl.count == 0) out.push_back("empty class kept");
        if (cl.count != mine.size() + (cl.count >= 2 ? 2 : 1)) out.push_back("class count mismatch");
        for (CElem x : mine)
          if (!(cl.min < x && x < cl.max)) out.push_back("middle outside min/max");
        if (cl.count >= 2 && !(cl.min < cl.max)) out.push_back("min not below max");
        if (cl.min.value / u_ != r || cl.max.value / u_ != r) out.push_back("element in wrong cell");
        if (cl.count >= 3) need_d = true;
        total += cl.count;
        top_want.push_back({r, cl.atom});
      }
      if (need_d != static_cast<bool>(c.d)) out.push_back("child structure presence wrong");
      if (c.cls.empty()) out.push_back("empty cell kept");
      if (c.d) {
        auto sub = c.d->audit();
        out.insert(out.end(), sub.begin(), sub.end());
      }
    }
    if (total != k_) out.push_back("size mismatch");
    std::sort(top_want.begin(), top_want.end());
    std::vector<CElem> top_have = top_ ? top_->elements() : std::vector<CElem>{};
    if (top_have != top_want) out.push_back("top structure out of sync");
    if (top_) {
      auto sub = top_->audit();
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }

 private:
  struct Class {
    Atom atom;
    CElem min, max;
    std::size_t count = 0;
  };
  struct Cell {
    std::vector<Class> cls;  // sorted by atom
    Extent ext;
    std::unique_ptr<RecursiveColoredSet> d;
  };

  const Cell* cell_peek(std::uint64_t r) const {
    auto it = cells_.find(r);
    return it == cells_.end() ? nullptr : &it->second;
  }
  const Cell* cell(std::uint64_t r) const {
    const Cell* c = cell_peek(r);
    if (c) c->ext.touch_all(*store_);
    return c;
  }
  void save(Cell& c) { c.ext.resize(*store_, 1 + 3 * c.cls.size()); }

  RecursiveColoredSet& child(Cell& c) {
    if (!c.d) c.d = std::make_unique<RecursiveColoredSet>(*store_, u_, depth_ + 1);
    return *c.d;
  }
  RecursiveColoredSet& top() {
    if (!top_) top_ = std::make_unique<RecursiveColoredSet>(*store_, cells_count_, depth_ + 1);
    return *top_;
  }
  CElem rel(CElem e, std::uint64_t r) const { return {e.value - r * u_, e.atom}; }
  CElem abs(CElem e, std::uint64_t r) const { return {e.value + r * u_, e.atom}; }

  void insert_split(CElem e) {
    std::uint64_t r = e.value / u_;
    auto [it, fresh] = cells_.try_emplace(r);
    Cell& c = it->second;
    if (!fresh) c.ext.touch_all(*store_, true);
    auto pos = std::lower_bound(c.cls.begin(), c.cls.end(), e.atom, [](const Class& a, Atom b) { return a.atom < b; });
    if (pos == c.cls.end() || pos->atom != e.atom) {
      c.cls.insert(pos, Class{e.atom, e, e, 1});
      save(c);
      top().insert({r, e.atom});
      return;
    }
    Class& cl = *pos;
    if (e == cl.min || e == cl.max) throw Fault("RecursiveColoredSet: duplicate element");
    if (cl.count == 1) {
      if (e < cl.min) cl.min = e;
      else cl.max = e;
    } else if (e < cl.min) {
      child(c).insert(rel(cl.min, r));
      cl.min = e;
    } else if (cl.max < e) {
      child(c).insert(rel(cl.max, r));
      cl.max = e;
    } else {
      child(c).insert(rel(e, r));
    }
    ++cl.count;
    save(c);
  }

  void erase_split(CElem e) {
    std::uint64_t r = e.value / u_;
    auto it = cells_.find(r);
    if (it == cells_.end()) throw Fault("RecursiveColoredSet: erase of absent element");
    Cell& c = it->second;
    c.ext.touch_all(*store_, true);
    auto pos = std::lower_bound(c.cls.begin(), c.cls.end(), e.atom, [](const Class& a, Atom b) { return a.atom < b; });
    if (pos == c.cls.end() || pos->atom != e.atom) throw Fault("RecursiveColoredSet: erase of absent element");
    Class& cl = *pos;
    if (cl.count == 1) {
      if (!(e == cl.min)) throw Fault("RecursiveColoredSet: erase of absent element");
      c.cls.erase(pos);
      top_->erase({r, e.atom});
      if (c.cls.empty()) {
        c.ext.release(*store_);
        cells_.erase(it);
      } else {
        save(c);
      }
      return;
    }
    if (cl.count == 2) {
      if (e == cl.min) cl.min = cl.max;
      else if (e == cl.max) cl.max = cl.min;
      else throw Fault("RecursiveColoredSet: erase of absent element");
    } else if (e == cl.min) {
      CElem m = abs(*c.d->succ(0, AtomFilter::only(e.atom)), r);
      c.d->erase(rel(m, r));
      cl.min = m;
    } else if (e == cl.max) {
      CElem m = abs(*c.d->pred(u_ - 1, AtomFilter::only(e.atom)), r);
      c.d->erase(rel(m, r));
      cl.max = m;
    } else {
      if (!c.d) throw Fault("RecursiveColoredSet: erase of absent element");
      c.d->erase(rel(e, r));
    }
    --cl.count;
    if (c.d && c.d->size() == 0) c.d.reset();
    save(c);
  }

  void drop_cells() {
    for (auto& [r, c] : cells_) c.ext.release(*store_);
    cells_.clear();
    top_.reset();
  }

  void to_recursive() {
    auto all = small_.elements();
    small_.clear();
    small_mode_ = false;
    for (CElem e : all) insert_split(e);
  }

  void to_small() {
    auto all = elements();
    drop_cells();
    small_mode_ = true;
    for (CElem e : all) small_.insert(e);
  }

  BlockStore* store_;
  std::uint64_t v_;
  std::size_t depth_;
  std::uint64_t b2_ = 0;
  std::uint64_t u_ = 0;
  std::uint64_t cells_count_ = 0;
  std::size_t k_ = 0;
  bool small_mode_ = true;
  SmallColoredSet small_;
  std::unordered_map<std::uint64_t, Cell> cells_;
  std::unique_ptr<RecursiveColoredSet> top_;
};

// ---------------------------------------------------------------------------
// List-CUSF: an ordered list whose elements carry color intervals; given an
// element, find the first later (or last earlier) element meeting a color
// set. The list is cut into chunks of fewer than 2g elements. Chunks carry
// increasing labels in [1, L]; D_v holds (label, atom) for every atom present
// in a chunk, and each chunk answers in-chunk queries with its own D_m keyed
// by gapped local keys.
class ListCusf {
 public:
  using Handle = std::uint32_t;

  // g = B^{1+2f} when B >= log^2 K, else (log_B K)^4; `chunk_target` overrides.
  static std::size_t default_chunk(std::size_t b, std::size_t k, double f) {
    double lg = std::log2(std::max<double>(4, double(k)));
    double g = double(b) >= lg * lg ? std::pow(double(b), 1 + 2 * f) : std::pow(lg / std::log2(double(b)), 4);
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(g)));
  }

  explicit ListCusf(BlockStore& store, std::size_t capacity_hint = 1024, std::size_t chunk_target = 0, double f = 0.25)
      : store_(&store),
        g_(chunk_target ? std::max<std::size_t>(2, chunk_target) : default_chunk(store.block_size(), capacity_hint, f)),
        labels_max_(4 * std::max<std::uint64_t>(64, capacity_hint)),
        dv_(std::make_unique<RecursiveColoredSet>(store, labels_max_ + 1)) {}

  ~ListCusf() {
    for (auto& c : chunks_)
      if (c.live) c.ext.release(*store_);
  }
  ListCusf(const ListCusf&) = delete;
  ListCusf& operator=(const ListCusf&) = delete;

  std::size_t size() const { return size_; }
  std::size_t chunk_target() const { return g_; }
  std::size_t chunk_count() const { return labels_.size(); }
  std::size_t relabels() const { return relabels_; }
  bool alive(Handle h) const { return h < elems_.size() && elems_[h].live; }
  Atom atom(Handle h) const { return checked(h).atom; }

  Handle push_back(Atom a) {
    if (tail_ == kNone) return first_element(a);
    return place(tail_, chunks_[tail_].hs.size(), a);
  }
  Handle push_front(Atom a) {
    if (head_ == kNone) return first_element(a);
    return place(head_, 0, a);
  }
  Handle insert_after(Handle h, Atom a) {
    const Elem& e = checked(h);
    return place(e.chunk, index_of(h) + 1, a);
  }
  Handle insert_before(Handle h, Atom a) {
    const Elem& e = checked(h);
    return place(e.chunk, index_of(h), a);
  }

  void erase(Handle h) {
    checked(h);
    std::uint32_t c = elems_[h].chunk;
    std::size_t i = index_of(h);
    Chunk& ch = chunks_[c];
    ch.ext.touch_record(*store_, i, true);
    ch.dm->erase({ch.keys[i], elems_[h].atom});
    ch.hs.erase(ch.hs.begin() + i);
    ch.keys.erase(ch.keys.begin() + i);
    drop_atom(c, elems_[h].atom);
    elems_[h].live = false;
    free_elems_.push_back(h);
    --size_;
    if (chunks_[c].hs.empty()) {
      remove_chunk(c);
      return;
    }
    save(c);
    if (chunks_[c].hs.size() < g_ / 2) absorb(c);
  }

  void set_atom(Handle h, Atom a) {
    checked(h);
    std::uint32_t c = elems_[h].chunk;
    std::size_t i = index_of(h);
    Chunk& ch = chunks_[c];
    ch.ext.touch_record(*store_, i, true);
    ch.dm->erase({ch.keys[i], elems_[h].atom});
    drop_atom(c, elems_[h].atom);
    elems_[h].atom = a;
    chunks_[c].dm->insert({chunks_[c].keys[i], a});
    add_atom(c, a);
  }

  // First element after h (at or after h when inclusive) meeting cs.
  std::optional<Handle> next(Handle h, const ColorSet& cs, bool inclusive = false) const {
    const Elem& e = checked(h);
    const Chunk& ch = chunks_[e.chunk];
    ch.ext.touch_record(*store_, index_of(h));
    AtomFilter f = AtomFilter::meeting(cs);
    if (auto x = ch.dm->succ(e.key + (inclusive ? 0 : 1), f)) return handle_at(e.chunk, x->value);
    auto y = dv_->succ(ch.label + 1, f);
    if (!y) return std::nullopt;
    return first_in(labels_.at(y->value), f);
  }

  std::optional<Handle> prev(Handle h, const ColorSet& cs, bool inclusive = false) const {
    const Elem& e = checked(h);
    const Chunk& ch = chunks_[e.chunk];
    ch.ext.touch_record(*store_, index_of(h));
    AtomFilter f = AtomFilter::meeting(cs);
    if (auto x = ch.dm->pred(e.key - (inclusive ? 0 : 1), f)) return handle_at(e.chunk, x->value);
    if (ch.label <= 1) return std::nullopt;
    auto y = dv_->pred(ch.label - 1, f);
    if (!y) return std::nullopt;
    return last_in(labels_.at(y->value), f);
  }

  std::optional<Handle> first(const ColorSet& cs) const {
    if (head_ == kNone) return std::nullopt;
    auto y = dv_->succ(0, AtomFilter::meeting(cs));
    if (!y) return std::nullopt;
    return first_in(labels_.at(y->value), AtomFilter::meeting(cs));
  }
  std::optional<Handle> last(const ColorSet& cs) const {
    if (tail_ == kNone) return std::nullopt;
    auto y = dv_->pred(labels_max_, AtomFilter::meeting(cs));
    if (!y) return std::nullopt;
    return last_in(labels_.at(y->value), AtomFilter::meeting(cs));
  }

  // Plain list neighbors, ignoring colors.
  std::optional<Handle> after(Handle h) const {
    const Elem& e = checked(h);
    std::size_t i = index_of(h);
    const Chunk& ch = chunks_[e.chunk];
    if (i + 1 < ch.hs.size()) return ch.hs[i + 1];
    if (ch.next == kNone) return std::nullopt;
    chunks_[ch.next].ext.touch_record(*store_, 0);
    return chunks_[ch.next].hs.front();
  }
  std::optional<Handle> before(Handle h) const {
    const Elem& e = checked(h);
    std::size_t i = index_of(h);
    const Chunk& ch = chunks_[e.chunk];
    if (i > 0) return ch.hs[i - 1];
    if (ch.prev == kNone) return std::nullopt;
    const Chunk& p = chunks_[ch.prev];
    p.ext.touch_record(*store_, p.hs.size() - 1);
    return p.hs.back();
  }

  std::vector<Handle> order() const {
    std::vector<Handle> out;
    for (std::uint32_t c = head_; c != kNone; c = chunks_[c].next)
      out.insert(out.end(), chunks_[c].hs.begin(), chunks_[c].hs.end());
    return out;
  }

  std::size_t block_count() const {
    std::size_t n = dv_->block_count();
    for (const auto& c : chunks_)
      if (c.live) n += c.ext.block_count() + c.dm->block_count();
    return n;
  }

  std::vector<std::string> audit() const {
    std::vector<std::string> out;
    std::uint64_t last_label = 0;
    std::size_t total = 0;
    std::vector<CElem> want;
    for (std::uint32_t c = head_; c != kNone; c = chunks_[c].next) {
      const Chunk& ch = chunks_[c];
      if (ch.label <= last_label || ch.label > labels_max_) out.push_back("labels not increasing");
      last_label = ch.label;
      if (ch.hs.empty() || ch.hs.size() >= 2 * g_) out.push_back("chunk size out of range");
      if (!std::is_sorted(ch.keys.begin(), ch.keys.end()) ||
          std::adjacent_find(ch.keys.begin(), ch.keys.end()) != ch.keys.end())
        out.push_back("local keys not increasing");
      std::map<Atom, std::uint32_t> atoms;
      std::vector<CElem> mine;
      for (std::size_t i = 0; i < ch.hs.size(); ++i) {
        const Elem& e = elems_[ch.hs[i]];
        if (!e.live || e.chunk != c || e.key != ch.keys[i]) out.push_back("element record out of sync");
        ++atoms[e.atom];
        mine.push_back({e.key, e.atom});
      }
      std::sort(mine.begin(), mine.end());
      if (ch.dm->elements() != mine) out.push_back("chunk structure out of sync");
      if (atoms != ch.atoms) out.push_back("chunk atom counts out of sync");
      for (auto& [a, n] : atoms) want.push_back({ch.label, a});
      auto it = labels_.find(ch.label);
      if (it == labels_.end() || it->second != c) out.push_back("label map out of sync");
      total += ch.hs.size();
    }
    if (total != size_) out.push_back("size mismatch");
    std::sort(want.begin(), want.end());
    if (dv_->elements() != want) out.push_back("label structure out of sync");
    auto sub = dv_->audit();
    out.insert(out.end(), sub.begin(), sub.end());
    return out;
  }

 private:
  static constexpr std::uint32_t kNone = ~std::uint32_t{0};
  static constexpr std::uint64_t kGap = std::uint64_t{1} << 20;

  struct Elem {
    std::uint32_t chunk = kNone;
    std::uint64_t key = 0;
    Atom atom = 0;
    bool live = false;
  };
  struct Chunk {
    std::vector<Handle> hs;
    std::vector<std::uint64_t> keys;
    std::uint64_t label = 0;
    std::unique_ptr<SmallColoredSet> dm;
    std::map<Atom, std::uint32_t> atoms;
    Extent ext;
    std::uint32_t prev = kNone, next = kNone;
    bool live = false;
  };

  const Elem& checked(Handle h) const {
    if (!alive(h)) throw Fault("ListCusf: stale element reference");
    return elems_[h];
  }

  std::size_t index_of(Handle h) const {
    const Elem& e = elems_[h];
    const auto& keys = chunks_[e.chunk].keys;
    return std::lower_bound(keys.begin(), keys.end(), e.key) - keys.begin();
  }

  Handle handle_at(std::uint32_t c, std::uint64_t key) const {
    const auto& keys = chunks_[c].keys;
    return chunks_[c].hs[std::lower_bound(keys.begin(), keys.end(), key) - keys.begin()];
  }

  std::optional<Handle> first_in(std::uint32_t c, AtomFilter f) const {
    chunks_[c].ext.touch_record(*store_, 0);
    auto x = chunks_[c].dm->succ(0, f);
    if (!x) return std::nullopt;
    return handle_at(c, x->value);
  }
  std::optional<Handle> last_in(std::uint32_t c, AtomFilter f) const {
    chunks_[c].ext.touch_record(*store_, 0);
    auto x = chunks_[c].dm->pred(~std::uint64_t{0}, f);
    if (!x) return std::nullopt;
    return handle_at(c, x->value);
  }

  void save(std::uint32_t c) { chunks_[c].ext.resize(*store_, 1 + chunks_[c].hs.size()); }

  Handle new_elem() {
    Handle h;
    if (!free_elems_.empty()) {
      h = free_elems_.back();
      free_elems_.pop_back();
    } else {
      h = static_cast<Handle>(elems_.size());
      elems_.emplace_back();
    }
    elems_[h] = Elem{};
    elems_[h].live = true;
    return h;
  }

  std::uint32_t new_chunk() {
    std::uint32_t c;
    if (!free_chunks_.empty()) {
      c = free_chunks_.back();
      free_chunks_.pop_back();
      chunks_[c] = Chunk{};
    } else {
      c = static_cast<std::uint32_t>(chunks_.size());
      chunks_.emplace_back();
    }
    chunks_[c].live = true;
    chunks_[c].dm = std::make_unique<SmallColoredSet>(*store_, store_->block_size(), SmallColoredSet::fanout_for(store_->block_size()));
    return c;
  }

  Handle first_element(Atom a) {
    std::uint32_t c = new_chunk();
    chunks_[c].label = (labels_max_ + 1) / 2;
    labels_[chunks_[c].label] = c;
    head_ = tail_ = c;
    Handle h = new_elem();
    elems_[h].chunk = c;
    elems_[h].key = kGap;
    elems_[h].atom = a;
    chunks_[c].hs.push_back(h);
    chunks_[c].keys.push_back(kGap);
    chunks_[c].dm->insert({kGap, a});
    add_atom(c, a);
    save(c);
    ++size_;
    return h;
  }

  void add_atom(std::uint32_t c, Atom a) {
    if (chunks_[c].atoms[a]++ == 0) dv_->insert({chunks_[c].label, a});
  }
  void drop_atom(std::uint32_t c, Atom a) {
    auto it = chunks_[c].atoms.find(a);
    if (--it->second == 0) {
      chunks_[c].atoms.erase(it);
      dv_->erase({chunks_[c].label, a});
    }
  }

  // Reassigns keys (i+1)*gap and rebuilds D_m.
  void renumber(std::uint32_t c) {
    Chunk& ch = chunks_[c];
    ch.dm->clear();
    for (std::size_t i = 0; i < ch.hs.size(); ++i) {
      ch.keys[i] = (i + 1) * kGap;
      elems_[ch.hs[i]].key = ch.keys[i];
      elems_[ch.hs[i]].chunk = c;
      ch.dm->insert({ch.keys[i], elems_[ch.hs[i]].atom});
    }
  }

  Handle place(std::uint32_t c, std::size_t pos, Atom a) {
    auto gap_ok = [&] {
      const auto& k = chunks_[c].keys;
      std::uint64_t lo = pos == 0 ? 0 : k[pos - 1];
      std::uint64_t hi = pos == k.size() ? k.back() + 2 * kGap : k[pos];
      return hi - lo >= 2;
    };
    if (!gap_ok()) renumber(c);
    const auto& k = chunks_[c].keys;
    std::uint64_t lo = pos == 0 ? 0 : k[pos - 1];
    std::uint64_t hi = pos == k.size() ? k.back() + 2 * kGap : k[pos];
    std::uint64_t key = lo + (hi - lo) / 2;
    Handle h = new_elem();
    elems_[h].chunk = c;
    elems_[h].key = key;
    elems_[h].atom = a;
    Chunk& ch = chunks_[c];
    ch.hs.insert(ch.hs.begin() + pos, h);
    ch.keys.insert(ch.keys.begin() + pos, key);
    ch.dm->insert({key, a});
    add_atom(c, a);
    save(c);
    ch.ext.touch_record(*store_, pos, true);
    ++size_;
    if (chunks_[c].hs.size() >= 2 * g_) split_chunk(c);
    return h;
  }

  void split_chunk(std::uint32_t c) {
    std::uint32_t n = new_chunk();
    Chunk& a = chunks_[c];
    Chunk& b = chunks_[n];
    std::size_t half = a.hs.size() / 2;
    b.hs.assign(a.hs.begin() + half, a.hs.end());
    b.keys.assign(a.keys.begin() + half, a.keys.end());
    a.hs.resize(half);
    a.keys.resize(half);
    b.prev = c;
    b.next = a.next;
    if (a.next != kNone) chunks_[a.next].prev = n;
    else tail_ = n;
    a.next = n;
    // drop the moved atoms from c, then register n under a fresh label
    for (Handle h : chunks_[n].hs) drop_atom(c, elems_[h].atom);
    renumber(c);
    assign_label(n);
    renumber(n);
    for (Handle h : chunks_[n].hs) add_atom(n, elems_[h].atom);
    save(c);
    save(n);
  }

  void remove_chunk(std::uint32_t c) {
    Chunk& ch = chunks_[c];
    labels_.erase(ch.label);
    if (ch.prev != kNone) chunks_[ch.prev].next = ch.next;
    else head_ = ch.next;
    if (ch.next != kNone) chunks_[ch.next].prev = ch.prev;
    else tail_ = ch.prev;
    ch.ext.release(*store_);
    chunks_[c] = Chunk{};
    free_chunks_.push_back(c);
  }

  // Merges an underfull chunk into a neighbor, splitting again if needed.
  void absorb(std::uint32_t c) {
    std::uint32_t into = chunks_[c].next != kNone ? chunks_[c].next : chunks_[c].prev;
    if (into == kNone) return;
    bool before = chunks_[c].next == into;
    for (Handle h : chunks_[c].hs) drop_atom(c, elems_[h].atom);
    std::vector<Handle> moved = chunks_[c].hs;
    Chunk& dst = chunks_[into];
    if (before) dst.hs.insert(dst.hs.begin(), moved.begin(), moved.end());
    else dst.hs.insert(dst.hs.end(), moved.begin(), moved.end());
    dst.keys.assign(dst.hs.size(), 0);
    remove_chunk(c);
    renumber(into);
    for (Handle h : moved) add_atom(into, elems_[h].atom);
    save(into);
    if (chunks_[into].hs.size() >= 2 * g_) split_chunk(into);
  }

  void move_label(std::uint32_t c, std::uint64_t label) {
    Chunk& ch = chunks_[c];
    if (ch.label == label) return;
    for (auto& [a, n] : ch.atoms) dv_->erase({ch.label, a});
    labels_.erase(ch.label);
    ch.label = label;
    labels_[label] = c;
    for (auto& [a, n] : ch.atoms) dv_->insert({ch.label, a});
    ++relabels_;
  }

  // Gives chunk n (already linked, not yet labeled, no atoms registered) a
  // label between its neighbors, relabeling the smallest aligned window of
  // density at most 1/2 around it when no gap is free.
  void assign_label(std::uint32_t n) {
    std::uint64_t lo = chunks_[n].prev == kNone ? 0 : chunks_[chunks_[n].prev].label;
    std::uint64_t hi = chunks_[n].next == kNone ? labels_max_ + 1 : chunks_[chunks_[n].next].label;
    if (hi - lo >= 2) {
      chunks_[n].label = lo + (hi - lo) / 2;
      labels_[chunks_[n].label] = n;
      return;
    }
    for (std::uint64_t w = 2; w <= labels_max_; w *= 2) {
      std::uint64_t start = ((lo == 0 ? 1 : lo) - 1) / w * w + 1;
      std::uint64_t end = start + w;  // labels in [start, end)
      if (end > labels_max_ + 1) break;
      std::vector<std::uint32_t> in;
      for (std::uint32_t c = first_chunk_from(start); c != kNone && (c == n || chunks_[c].label < end); c = chunks_[c].next)
        in.push_back(c);
      if (2 * in.size() > w) continue;
      spread(in, start, w);
      return;
    }
    // no sparse window: double the label space and rebuild D_v
    labels_max_ *= 2;
    std::vector<std::uint32_t> all;
    for (std::uint32_t c = head_; c != kNone; c = chunks_[c].next) all.push_back(c);
    dv_ = std::make_unique<RecursiveColoredSet>(*store_, labels_max_ + 1);
    labels_.clear();
    std::uint64_t step = labels_max_ / (all.size() + 1);
    for (std::size_t i = 0; i < all.size(); ++i) {
      Chunk& ch = chunks_[all[i]];
      ch.label = (i + 1) * step;
      labels_[ch.label] = all[i];
      for (auto& [a, cnt] : ch.atoms) dv_->insert({ch.label, a});
      ++relabels_;
    }
  }

  // First chunk in list order whose label is >= start, treating the
  // unlabeled chunk n as positioned by its neighbors.
  std::uint32_t first_chunk_from(std::uint64_t start) const {
    auto it = labels_.lower_bound(start);
    std::uint32_t c = it == labels_.end() ? kNone : it->second;
    // the unlabeled chunk sits right before its successor, or at the end
    std::uint32_t cand = c == kNone ? tail_ : chunks_[c].prev;
    while (cand != kNone && chunks_[cand].label == 0) {
      c = cand;
      cand = chunks_[cand].prev;
    }
    return c;
  }

  void spread(const std::vector<std::uint32_t>& in, std::uint64_t start, std::uint64_t w) {
    std::uint64_t step = w / (in.size() + 1);
    // clear old labels first so intermediate assignments never collide
    for (std::uint32_t c : in)
      if (chunks_[c].label != 0) {
        for (auto& [a, n] : chunks_[c].atoms) dv_->erase({chunks_[c].label, a});
        labels_.erase(chunks_[c].label);
      }
    for (std::size_t i = 0; i < in.size(); ++i) {
      Chunk& ch = chunks_[in[i]];
      bool had = ch.label != 0;
      ch.label = start + (i + 1) * step - 1;
      labels_[ch.label] = in[i];
      for (auto& [a, n] : ch.atoms) dv_->insert({ch.label, a});
      if (had) ++relabels_;
    }
  }

  BlockStore* store_;
  std::size_t g_;
  std::uint64_t labels_max_;
  std::unique_ptr<RecursiveColoredSet> dv_;
  std::vector<Elem> elems_;
  std::vector<Handle> free_elems_;
  std::vector<Chunk> chunks_;
  std::vector<std::uint32_t> free_chunks_;
  std::map<std::uint64_t, std::uint32_t> labels_;
  std::uint32_t head_ = kNone, tail_ = kNone;
  std::size_t size_ = 0;
  std::size_t relabels_ = 0;
};

// CUSF with values: a list-CUSF whose order is (value, atom) order. Queries
// start from a given element; pred returns the largest element with value at
// most that element's value whose interval meets the color set.
class CusfStructure {
 public:
  using Handle = ListCusf::Handle;

  explicit CusfStructure(BlockStore& store, std::size_t capacity_hint = 1024, std::size_t chunk_target = 0)
      : list_(store, capacity_hint, chunk_target) {}

  std::size_t size() const { return list_.size(); }
  const ListCusf& list() const { return list_; }
  CElem element(Handle h) const { return {value_.at(h), list_.atom(h)}; }

  Handle insert_first(std::uint64_t v, Atom a) {
    if (list_.size() != 0) throw Fault("CusfStructure: insert_first on nonempty set");
    return record(list_.push_back(a), v);
  }
  Handle insert_after(Handle h, std::uint64_t v, Atom a) {
    CElem e{v, a};
    if (!(element(h) < e)) throw Fault("CusfStructure: insertion breaks order");
    if (auto n = list_.after(h); n && !(e < element(*n))) throw Fault("CusfStructure: insertion breaks order");
    return record(list_.insert_after(h, a), v);
  }
  Handle insert_before(Handle h, std::uint64_t v, Atom a) {
    CElem e{v, a};
    if (!(e < element(h))) throw Fault("CusfStructure: insertion breaks order");
    if (auto p = list_.before(h); p && !(element(*p) < e)) throw Fault("CusfStructure: insertion breaks order");
    return record(list_.insert_before(h, a), v);
  }
  void erase(Handle h) { list_.erase(h); }

  std::optional<Handle> pred(Handle h, const ColorSet& cs) const {
    std::uint64_t v = element(h).value;
    for (auto n = list_.after(h); n && value_[*n] == v; n = list_.after(h)) h = *n;
    return list_.prev(h, cs, true);
  }
  std::optional<Handle> succ(Handle h, const ColorSet& cs) const {
    std::uint64_t v = element(h).value;
    for (auto p = list_.before(h); p && value_[*p] == v; p = list_.before(h)) h = *p;
    return list_.next(h, cs, true);
  }

  std::vector<std::string> audit() const {
    auto out = list_.audit();
    auto ord = list_.order();
    for (std::size_t i = 1; i < ord.size(); ++i)
      if (!(element(ord[i - 1]) < element(ord[i]))) out.push_back("values out of order");
    return out;
  }

 private:
  Handle record(Handle h, std::uint64_t v) {
    if (value_.size() <= h) value_.resize(h + 1);
    value_[h] = v;
    return h;
  }

  ListCusf list_;
  std::vector<std::uint64_t> value_;
};

}  // namespace dpl
