#pragma once

// Vertical ray shooting among horizontal segments.
//
// HorizCatalogTree stores horizontal pieces in a slab tree the segment-tree
// way and links the catalogs of neighbouring levels by fractional cascading:
// AC(v) is cut into groups of g..2g consecutive elements and one element per
// group of a child (its representative) is copied into the parent. Two colored
// lists over AC(v) drive the descent: in D(v) an own element carries the
// interval of children it spans (copies are dummy), in E(v) a copy carries the
// child it came from (own elements are dummy). Leaves keep unordered bags.
//
// Elements are ordered by a 64-bit value: y, then id, then a tag naming the
// own element a copy descends from. A copy inherits the value of its origin,
// so every value in one catalog is distinct and copies keep child order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpl/btree.hpp"
#include "dpl/cusf.hpp"
#include "dpl/geometry.hpp"
#include "dpl/io_model.hpp"
#include "dpl/slab_tree.hpp"

namespace dpl {

enum class Ray { Down, Up };

// A horizontal piece over doubled x-range [l2, r2] at height y.
struct HSeg {
  SegmentId id = 0;
  Coord l2 = 0, r2 = 0, y = 0;
  bool covers(Coord x) const { return l2 <= 2 * x && 2 * x <= r2; }
};

inline constexpr Coord kHorizYBound = Coord(1) << 31;
inline constexpr SegmentId kHorizIdBound = SegmentId(1) << 24;
inline constexpr unsigned kTagBits = 6;

inline HSeg hseg_of(const Segment& s) {
  if (s.left.y != s.right.y) throw Fault("horizontal: segment " + std::to_string(s.id) + " is not horizontal");
  if (s.left.x >= s.right.x) throw Fault("horizontal: segment " + std::to_string(s.id) + " has no length");
  if (s.left.y <= -kHorizYBound || s.left.y >= kHorizYBound) throw Fault("horizontal: y out of range");
  if (s.id < 0 || s.id >= kHorizIdBound) throw Fault("horizontal: id out of range");
  return {s.id, 2 * s.left.x, 2 * s.right.x, s.left.y};
}

inline std::uint64_t hvalue(Coord y, SegmentId id, unsigned tag) {
  std::uint64_t k = (std::uint64_t(y + kHorizYBound) << 24) | std::uint64_t(id);
  return (k << kTagBits) | tag;
}
// Elements at or below (Down) or at or above (Up) height y.
inline std::uint64_t hprobe(Coord y, Ray dir) {
  return dir == Ray::Down ? hvalue(y, kHorizIdBound - 1, (1u << kTagBits) - 1) : hvalue(y, 0, 0);
}

// Is a a better hit than b for a ray in direction dir? Ties (shared endpoints
// at one height) go to the smaller id in both directions.
inline bool hbetter(const HSeg& a, const HSeg& b, Ray dir) {
  if (a.y != b.y) return dir == Ray::Down ? a.y > b.y : a.y < b.y;
  return a.id < b.id;
}

inline bool hreaches(const HSeg& h, Coord qx, Coord qy, Ray dir) {
  return h.covers(qx) && (dir == Ray::Down ? h.y <= qy : h.y >= qy);
}

class HorizCatalogTree {
 public:
  static constexpr std::uint32_t kNone = UINT32_MAX;
  struct Hit {
    std::uint32_t node;
    HSeg seg;
  };

  HorizCatalogTree(BlockStore& store, const SlabTree& tree, std::size_t group)
      : store_(&store), tree_(&tree), g_(std::max<std::size_t>(2, group)), ns_(tree.size()) {}
  HorizCatalogTree(const HorizCatalogTree&) = delete;
  HorizCatalogTree& operator=(const HorizCatalogTree&) = delete;
  ~HorizCatalogTree() {
    for (Group& g : groups_)
      if (g.live) g.ext.release(*store_);
    for (NodeState& s : ns_)
      if (s.bag_live) s.bag_ext.release(*store_);
  }

  std::size_t group_size() const { return g_; }
  std::size_t size() const { return reg_.size(); }
  bool contains(SegmentId id) const { return reg_.count(id) != 0; }
  std::size_t element_count() const { return elems_.size() - free_elems_.size(); }
  std::size_t catalog_size(std::uint32_t v) const { return ns_[v].elems; }
  std::size_t group_count(std::uint32_t v) const { return ns_[v].groups; }

  // Nodes storing h: internal nodes where h spans a child but not the node,
  // and leaves h reaches into without spanning.
  std::vector<Assignment> assign(const HSeg& h) const {
    std::vector<Assignment> out;
    const SlabNode& r = tree_->node(tree_->root());
    if (h.l2 <= r.lo2 && h.r2 >= r.hi2) {
      out.push_back({tree_->root(), 0, static_cast<std::uint16_t>(r.kids.empty() ? 0 : r.kids.size() - 1), r.leaf()});
      return out;
    }
    if (h.l2 < r.hi2 && h.r2 > r.lo2) walk(tree_->root(), h, out);
    return out;
  }

  void insert(const HSeg& h) {
    if (reg_.count(h.id)) throw Fault("horizontal: duplicate id " + std::to_string(h.id));
    auto as = assign(h);
    if (as.size() >= (1u << kTagBits)) throw Fault("horizontal: tree too deep for element tags");
    auto& places = reg_[h.id];
    for (std::size_t t = 0; t < as.size(); ++t) places.push_back(place(h, as[t], static_cast<unsigned>(t)));
  }

  // One own element at node v spanning children [f, l] (a bag entry if v is a leaf).
  void insert_at(const HSeg& h, std::uint32_t v, std::uint16_t f, std::uint16_t l) {
    if (reg_.count(h.id)) throw Fault("horizontal: duplicate id " + std::to_string(h.id));
    reg_[h.id].push_back(place(h, {v, f, l, tree_->node(v).leaf()}, 0));
  }

  bool erase(SegmentId id) {
    auto it = reg_.find(id);
    if (it == reg_.end()) return false;
    for (const Place& p : it->second) {
      if (p.elem != kNone) {
        remove_elem(p.elem);
        continue;
      }
      NodeState& s = ns_[p.node];
      s.bag_ext.touch_all(*store_, true);
      s.bag.erase(std::find_if(s.bag.begin(), s.bag.end(), [&](const HSeg& x) { return x.id == id; }));
      s.bag_ext.resize(*store_, s.bag.size());
    }
    reg_.erase(it);
    return true;
  }

  // Best reaching element of each path node (s'(v) at internal nodes, the
  // bag's best at the leaf), in path order.
  std::vector<Hit> along(Coord qx, Coord qy, Ray dir) const {
    std::vector<Hit> out;
    if (!tree_->leaf_of(qx)) return out;
    const auto path = tree_->path(qx);
    const std::uint64_t probe = hprobe(qy, dir);
    std::uint32_t s = tree_->node(path[0]).leaf() ? kNone : locate(path[0], probe, dir);
    for (std::size_t k = 0; k < path.size(); ++k) {
      const std::uint32_t u = path[k];
      const NodeState& st = ns_[u];
      if (tree_->node(u).leaf()) {
        if (!st.bag_live) break;
        st.bag_ext.touch_all(*store_);
        std::optional<HSeg> best;
        for (const HSeg& h : st.bag)
          if (hreaches(h, qx, qy, dir) && (!best || hbetter(h, *best, dir))) best = h;
        if (best) out.push_back({u, *best});
        break;
      }
      const std::uint32_t child = path[k + 1];
      const ColorSet cs{static_cast<Color>(tree_->node(child).index_in_parent + 1)};
      std::uint32_t s1 = kNone;
      if (s != kNone) {
        auto c = dir == Ray::Down ? st.D->pred(elems_[s].dh, cs) : st.D->succ(elems_[s].dh, cs);
        if (c) out.push_back({u, elems_[st.dmap.at(*c)].seg});
        auto e = dir == Ray::Down ? st.E->pred(elems_[s].eh, cs) : st.E->succ(elems_[s].eh, cs);
        if (e) s1 = st.emap.at(*e);
      }
      if (!tree_->node(child).leaf()) s = cascade(child, s1, probe, dir);
    }
    return out;
  }

  std::optional<HSeg> shoot(Coord qx, Coord qy, Ray dir) const {
    std::optional<HSeg> best;
    for (const Hit& h : along(qx, qy, dir))
      if (!best || hbetter(h.seg, *best, dir)) best = h.seg;
    return best;
  }

  std::size_t block_count() const {
    std::size_t n = 0;
    for (const NodeState& s : ns_) {
      if (s.D) n += s.D->list().block_count() + s.E->list().block_count() + s.dir->block_count();
      if (s.bag_live) n += s.bag_ext.block_count();
    }
    for (const Group& g : groups_)
      if (g.live) n += g.ext.block_count();
    return n;
  }

  // Group sizes within [ceil(g/2), 2g] (a lone group may be smaller).
  std::size_t max_group() const {
    std::size_t m = 0;
    for (const Group& g : groups_)
      if (g.live) m = std::max(m, g.el.size());
    return m;
  }

  std::vector<std::string> audit() const {
    std::vector<std::string> out;
    auto bad = [&](std::uint32_t v, const std::string& m) { out.push_back("node " + std::to_string(v) + ": " + m); };
    const std::size_t lo = (g_ + 1) / 2;
    std::size_t copies_seen = 0, elems_seen = 0;
    for (std::uint32_t v = 0; v < ns_.size(); ++v) {
      const NodeState& st = ns_[v];
      const SlabNode& n = tree_->node(v);
      if (n.leaf()) {
        for (const HSeg& h : st.bag)
          if (h.l2 <= n.lo2 && h.r2 >= n.hi2) bad(v, "bag piece spans its leaf");
        continue;
      }
      if (!st.D) {
        if (st.head != kNone || st.elems) bad(v, "elements without colored lists");
        continue;
      }
      std::vector<std::uint32_t> order;
      std::size_t groups = 0;
      for (std::uint32_t g = st.head, prev = kNone; g != kNone; prev = g, g = groups_[g].next) {
        const Group& G = groups_[g];
        ++groups;
        if (G.prev != prev) bad(v, "group chain broken");
        if (G.node != v) bad(v, "group owned by another node");
        if (G.el.empty()) bad(v, "empty group");
        if (G.el.size() > 2 * g_) bad(v, "group over 2g");
        if (G.el.size() < lo && !(G.prev == kNone && G.next == kNone)) bad(v, "group under g/2");
        if ((g == st.head) != (G.lb == 0)) bad(v, "head label");
        for (std::uint32_t e : G.el) {
          if (elems_[e].group != g) bad(v, "element group link");
          if (elems_[e].val < G.lb) bad(v, "element below its group label");
          if (!order.empty() && elems_[order.back()].val >= elems_[e].val) bad(v, "values not increasing");
          order.push_back(e);
        }
        if (prev != kNone && !groups_[prev].el.empty() && elems_[groups_[prev].el.back()].val >= G.lb) bad(v, "label overlaps previous group");
        if (v == tree_->root()) {
          if (G.rep != kNone) bad(v, "root group has a representative");
        } else if (G.rep == kNone || elems_[G.rep].group != g || elems_[G.rep].up == kNone) {
          bad(v, "group without representative");
        } else {
          const Elem& c = elems_[elems_[G.rep].up];
          if (c.node != n.parent || c.down != G.rep || c.own || c.f != n.index_in_parent) bad(v, "bad representative copy");
        }
        bool listed = false;
        st.dir->for_each([&](const DirEntry& d) { listed |= d.gid == g && d.lb == G.lb; });
        if (!listed) bad(v, "group missing from directory");
      }
      if (groups != st.groups || st.dir->size() != groups) bad(v, "group count");
      if (st.tail != kNone && groups_[st.tail].next != kNone) bad(v, "tail");
      if (order.size() != st.elems) bad(v, "element count");
      elems_seen += order.size();
      auto dl = st.D->list().order(), el = st.E->list().order();
      if (dl.size() != order.size() || el.size() != order.size()) {
        bad(v, "colored lists out of step");
        continue;
      }
      for (std::size_t i = 0; i < order.size(); ++i) {
        const Elem& x = elems_[order[i]];
        if (x.dh != dl[i] || x.eh != el[i]) bad(v, "colored list order");
        Atom da = x.own ? make_atom(x.f + 1, x.l + 1) : make_atom(0, 0);
        Atom ea = x.own ? make_atom(0, 0) : make_atom(x.f + 1, x.f + 1);
        if (st.D->list().atom(x.dh) != da || st.E->list().atom(x.eh) != ea) bad(v, "atom");
        if (!x.own) {
          ++copies_seen;
          if (x.down == kNone || elems_[x.down].up != order[i]) bad(v, "copy without origin");
          else if (elems_[x.down].val != x.val) bad(v, "copy value differs");
        } else if (x.l >= n.kids.size() || x.f > x.l) {
          bad(v, "own span");
        } else {
          const SlabNode& a = tree_->node(n.kids[x.f]);
          const SlabNode& b = tree_->node(n.kids[x.l]);
          if (!(x.seg.l2 <= a.lo2 && x.seg.r2 >= b.hi2)) bad(v, "own element does not span its children");
        }
      }
    }
    if (elems_seen != element_count()) out.push_back("elements leaked: " + std::to_string(element_count() - elems_seen));
    (void)copies_seen;
    return out;
  }

 private:
  struct Place {
    std::uint32_t node;
    std::uint32_t elem;  // kNone for a leaf bag entry
  };
  struct Elem {
    std::uint64_t val = 0;
    HSeg seg;
    std::uint32_t node = kNone, group = kNone;
    bool own = false;
    std::uint16_t f = 0, l = 0;  // own: spanned children; copy: source child
    CusfStructure::Handle dh = 0, eh = 0;
    std::uint32_t up = kNone, down = kNone;
  };
  struct Group {
    bool live = false;
    std::uint32_t node = kNone;
    std::uint64_t lb = 0;
    std::vector<std::uint32_t> el;
    Extent ext;
    std::uint32_t rep = kNone, prev = kNone, next = kNone;
  };
  struct DirEntry {
    std::uint64_t lb;
    std::uint32_t gid;
  };
  struct SameGroup {
    bool operator()(const DirEntry& a, const DirEntry& b) const { return a.gid == b.gid; }
  };
  using Dir = BTree<DirEntry, SameGroup>;
  struct NodeState {
    std::unique_ptr<CusfStructure> D, E;
    std::unordered_map<CusfStructure::Handle, std::uint32_t> dmap, emap;
    std::unique_ptr<Dir> dir;
    std::uint32_t head = kNone, tail = kNone;
    std::size_t groups = 0, elems = 0;
    std::vector<HSeg> bag;
    Extent bag_ext;
    bool bag_live = false;
  };

  void walk(std::uint32_t u, const HSeg& h, std::vector<Assignment>& out) const {
    const SlabNode& n = tree_->node(u);
    if (n.leaf()) {
      out.push_back({u, 0, 0, true});
      return;
    }
    int f = -1, l = -1;
    for (std::size_t i = 0; i < n.kids.size(); ++i) {
      const SlabNode& c = tree_->node(n.kids[i]);
      if (h.l2 <= c.lo2 && h.r2 >= c.hi2) {
        if (f < 0) f = static_cast<int>(i);
        l = static_cast<int>(i);
      } else if (h.l2 < c.hi2 && h.r2 > c.lo2) {
        walk(n.kids[i], h, out);
      }
    }
    if (f >= 0) out.push_back({u, static_cast<std::uint16_t>(f), static_cast<std::uint16_t>(l), false});
  }

  Place place(const HSeg& h, const Assignment& a, unsigned tag) {
    if (a.leaf) {
      NodeState& s = ns_[a.node];
      s.bag.push_back(h);
      s.bag_live = true;
      s.bag_ext.resize(*store_, s.bag.size());
      s.bag_ext.touch_record(*store_, s.bag.size() - 1, true);
      return {a.node, kNone};
    }
    return {a.node, insert_elem(a.node, hvalue(h.y, h.id, tag), h, true, a.f, a.l)};
  }

  static bool dir_less(const DirEntry& a, const DirEntry& b) { return a.lb < b.lb || (a.lb == b.lb && a.gid < b.gid); }

  NodeState& state(std::uint32_t v) {
    NodeState& s = ns_[v];
    if (!s.D) {
      s.D = std::make_unique<CusfStructure>(*store_, 64);
      s.E = std::make_unique<CusfStructure>(*store_, 64);
      s.dir = std::make_unique<Dir>(*store_, store_->block_size());
    }
    return s;
  }

  std::uint32_t new_elem() {
    if (!free_elems_.empty()) {
      std::uint32_t e = free_elems_.back();
      free_elems_.pop_back();
      elems_[e] = Elem{};
      return e;
    }
    elems_.emplace_back();
    return static_cast<std::uint32_t>(elems_.size() - 1);
  }
  std::uint32_t new_group(std::uint32_t v) {
    std::uint32_t g;
    if (!free_groups_.empty()) {
      g = free_groups_.back();
      free_groups_.pop_back();
    } else {
      groups_.emplace_back();
      g = static_cast<std::uint32_t>(groups_.size() - 1);
    }
    groups_[g] = Group{};
    groups_[g].live = true;
    groups_[g].node = v;
    ++ns_[v].groups;
    return g;
  }

  void dir_set(std::uint32_t g, std::uint64_t lb) {
    NodeState& s = ns_[groups_[g].node];
    s.dir->erase({groups_[g].lb, g}, dir_less);
    groups_[g].lb = lb;
    s.dir->insert({lb, g}, dir_less);
  }

  std::uint32_t find_group(std::uint32_t v, std::uint64_t val) const {
    const NodeState& s = ns_[v];
    auto d = s.dir->last_where([&](const DirEntry& e) { return e.lb <= val; });
    return d ? d->gid : s.head;
  }

  std::uint32_t last_le(std::uint32_t g, std::uint64_t probe) const {
    const Group& G = groups_[g];
    G.ext.touch_all(*store_);
    std::uint32_t r = kNone;
    for (std::uint32_t e : G.el) {
      if (elems_[e].val > probe) break;
      r = e;
    }
    return r;
  }
  std::uint32_t first_ge(std::uint32_t g, std::uint64_t probe) const {
    const Group& G = groups_[g];
    G.ext.touch_all(*store_);
    for (std::uint32_t e : G.el)
      if (elems_[e].val >= probe) return e;
    return kNone;
  }

  // s(v) at a node with no cascade information: directory search.
  std::uint32_t locate(std::uint32_t v, std::uint64_t probe, Ray dir) const {
    const NodeState& s = ns_[v];
    if (s.head == kNone) return kNone;
    std::uint32_t g = find_group(v, probe);
    if (dir == Ray::Down) {
      std::uint32_t r = last_le(g, probe);
      if (r == kNone && groups_[g].prev != kNone) r = last_le(groups_[g].prev, probe);
      return r;
    }
    std::uint32_t r = first_ge(g, probe);
    if (r == kNone && groups_[g].next != kNone) r = first_ge(groups_[g].next, probe);
    return r;
  }

  // s(child) from the nearest copy s1 of the child's elements in the parent:
  // it lies in the group of down(s1) or the group just past it.
  std::uint32_t cascade(std::uint32_t child, std::uint32_t s1, std::uint64_t probe, Ray dir) const {
    const NodeState& c = ns_[child];
    if (c.head == kNone) return kNone;
    if (dir == Ray::Down) {
      std::uint32_t g = s1 != kNone ? elems_[elems_[s1].down].group : c.head;
      if (s1 != kNone && groups_[g].next != kNone)
        if (std::uint32_t r = last_le(groups_[g].next, probe); r != kNone) return r;
      return last_le(g, probe);
    }
    std::uint32_t g = s1 != kNone ? elems_[elems_[s1].down].group : c.tail;
    if (s1 != kNone && groups_[g].prev != kNone)
      if (std::uint32_t r = first_ge(groups_[g].prev, probe); r != kNone) return r;
    return first_ge(g, probe);
  }

  std::uint32_t insert_elem(std::uint32_t v, std::uint64_t val, const HSeg& h, bool own, std::uint16_t f, std::uint16_t l) {
    NodeState& s = state(v);
    if (s.head == kNone) {
      std::uint32_t g = new_group(v);
      s.head = s.tail = g;
      s.dir->insert({0, g}, dir_less);
    }
    const std::uint32_t g = find_group(v, val);
    std::vector<std::uint32_t>& el = groups_[g].el;
    const std::size_t pos = std::upper_bound(el.begin(), el.end(), val, [&](std::uint64_t x, std::uint32_t e) { return x < elems_[e].val; }) - el.begin();
    if (pos > 0 && elems_[el[pos - 1]].val == val) throw Fault("horizontal: duplicate catalog value");
    std::uint32_t prev = pos > 0 ? el[pos - 1] : (groups_[g].prev != kNone ? groups_[groups_[g].prev].el.back() : kNone);
    std::uint32_t next = pos < el.size() ? el[pos] : (groups_[g].next != kNone ? groups_[groups_[g].next].el.front() : kNone);

    const std::uint32_t id = new_elem();
    Elem& x = elems_[id];
    x.val = val, x.seg = h, x.node = v, x.group = g, x.own = own, x.f = f, x.l = l;
    const Atom da = own ? make_atom(f + 1, l + 1) : make_atom(0, 0);
    const Atom ea = own ? make_atom(0, 0) : make_atom(f + 1, f + 1);
    if (prev != kNone) {
      x.dh = s.D->insert_after(elems_[prev].dh, val, da);
      x.eh = s.E->insert_after(elems_[prev].eh, val, ea);
    } else if (next != kNone) {
      x.dh = s.D->insert_before(elems_[next].dh, val, da);
      x.eh = s.E->insert_before(elems_[next].eh, val, ea);
    } else {
      x.dh = s.D->insert_first(val, da);
      x.eh = s.E->insert_first(val, ea);
    }
    s.dmap[x.dh] = id;
    s.emap[x.eh] = id;
    groups_[g].el.insert(groups_[g].el.begin() + static_cast<std::ptrdiff_t>(pos), id);
    ++s.elems;
    groups_[g].ext.resize(*store_, groups_[g].el.size());
    if (groups_[g].el.size() > 2 * g_) split_group(g);
    else ensure_rep(g);
    return id;
  }

  void split_group(std::uint32_t g) {
    const std::uint32_t v = groups_[g].node;
    const std::uint32_t h = new_group(v);
    Group& A = groups_[g];
    Group& Bg = groups_[h];
    const std::size_t mid = A.el.size() / 2;
    Bg.el.assign(A.el.begin() + static_cast<std::ptrdiff_t>(mid), A.el.end());
    A.el.resize(mid);
    Bg.lb = elems_[Bg.el.front()].val;
    Bg.prev = g;
    Bg.next = A.next;
    if (A.next != kNone) groups_[A.next].prev = h;
    else ns_[v].tail = h;
    A.next = h;
    for (std::uint32_t e : Bg.el) elems_[e].group = h;
    if (A.rep != kNone && elems_[A.rep].group == h) Bg.rep = A.rep, A.rep = kNone;
    A.ext.resize(*store_, A.el.size());
    Bg.ext.resize(*store_, Bg.el.size());
    ns_[v].dir->insert({Bg.lb, h}, dir_less);
    ensure_rep(g);
    ensure_rep(h);
  }

  void ensure_rep(std::uint32_t g) {
    const std::uint32_t v = groups_[g].node;
    if (v == tree_->root() || groups_[g].rep != kNone || groups_[g].el.empty()) return;
    const std::uint32_t e = groups_[g].el[groups_[g].el.size() / 2];
    groups_[g].rep = e;
    const SlabNode& n = tree_->node(v);
    const auto i = static_cast<std::uint16_t>(n.index_in_parent);
    const std::uint32_t c = insert_elem(n.parent, elems_[e].val, elems_[e].seg, false, i, i);
    elems_[c].down = e;
    elems_[e].up = c;
  }

  // Drops the parent copy of e, leaving e's group without a representative.
  void unlink_rep(std::uint32_t e) {
    const std::uint32_t c = elems_[e].up;
    if (c == kNone) return;
    elems_[e].up = kNone;
    elems_[c].down = kNone;
    groups_[elems_[e].group].rep = kNone;
    remove_elem(c);
  }

  void remove_elem(std::uint32_t id) {
    unlink_rep(id);
    std::uint32_t orphan = kNone;
    if (const std::uint32_t d = elems_[id].down; d != kNone) {
      elems_[d].up = kNone;
      orphan = elems_[d].group;
      groups_[orphan].rep = kNone;
    }
    const std::uint32_t v = elems_[id].node, g = elems_[id].group;
    NodeState& s = ns_[v];
    s.D->erase(elems_[id].dh);
    s.E->erase(elems_[id].eh);
    s.dmap.erase(elems_[id].dh);
    s.emap.erase(elems_[id].eh);
    auto& el = groups_[g].el;
    el.erase(std::find(el.begin(), el.end(), id));
    --s.elems;
    free_elems_.push_back(id);
    if (el.empty()) {
      drop_group(g);
    } else {
      groups_[g].ext.resize(*store_, el.size());
      std::uint32_t keep = g;
      if (el.size() < (g_ + 1) / 2) {
        if (groups_[g].next != kNone) merge_groups(g, groups_[g].next);
        else if (groups_[g].prev != kNone) keep = groups_[g].prev, merge_groups(keep, g);
      }
      if (groups_[keep].live) ensure_rep(keep);
    }
    if (orphan != kNone) ensure_rep(orphan);
  }

  // Appends group b to its predecessor a.
  void merge_groups(std::uint32_t a, std::uint32_t b) {
    if (groups_[b].rep != kNone) unlink_rep(groups_[b].rep);
    for (std::uint32_t e : groups_[b].el) elems_[e].group = a;
    groups_[a].el.insert(groups_[a].el.end(), groups_[b].el.begin(), groups_[b].el.end());
    groups_[b].el.clear();
    drop_group(b);
    groups_[a].ext.resize(*store_, groups_[a].el.size());
    if (groups_[a].el.size() > 2 * g_) split_group(a);
    else ensure_rep(a);
  }

  void drop_group(std::uint32_t g) {
    Group& G = groups_[g];
    NodeState& s = ns_[G.node];
    s.dir->erase({G.lb, g}, dir_less);
    if (G.prev != kNone) groups_[G.prev].next = G.next;
    else s.head = G.next;
    if (G.next != kNone) groups_[G.next].prev = G.prev;
    else s.tail = G.prev;
    if (G.prev == kNone && G.next != kNone) dir_set(G.next, 0);
    G.ext.release(*store_);
    G.live = false;
    G.el.clear();
    --s.groups;
    free_groups_.push_back(g);
  }

  BlockStore* store_;
  const SlabTree* tree_;
  std::size_t g_;
  std::vector<NodeState> ns_;
  std::vector<Elem> elems_;
  std::vector<std::uint32_t> free_elems_;
  std::vector<Group> groups_;
  std::vector<std::uint32_t> free_groups_;
  std::unordered_map<SegmentId, std::vector<Place>> reg_;
};

struct HorizParams {
  std::size_t B = 64;
  std::size_t r = 0;          // max(2, floor(B^(1/3)))
  std::size_t leaf_size = 0;  // B x-coordinates per leaf
  std::size_t group = 0;      // fixed g; 0 sizes g = ceil(log_B n) from the live count

  HorizParams resolved() const {
    HorizParams p = *this;
    if (!p.r) p.r = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(std::cbrt(double(B)) + 1e-9)));
    if (!p.leaf_size) p.leaf_size = std::max<std::size_t>(2, B);
    return p;
  }
};

// n rounded to the nearest power of two (at least 1).
inline std::size_t round_pow2(std::size_t n) {
  if (n <= 1) return 1;
  std::size_t p = 1;
  while (p * 2 <= n) p *= 2;
  return (n - p) * 2 >= p ? p * 2 : p;
}

inline std::size_t horiz_group(std::size_t B, std::size_t n_ref) {
  double l = std::log(double(std::max<std::size_t>(n_ref, 2))) / std::log(double(B));
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(l - 1e-9)));
}

// Live horizontal segments by id and by row; rejects overlapping interiors.
class HorizIndex {
 public:
  HSeg add(const Segment& s) {
    HSeg h = hseg_of(s);
    if (live_.count(s.id)) throw Fault("horizontal: duplicate id " + std::to_string(s.id));
    auto& row = rows_[h.y];
    auto it = row.lower_bound(s.right.x);
    if (it != row.begin() && std::prev(it)->second.first > s.left.x)
      throw Fault("horizontal: segment " + std::to_string(s.id) + " overlaps segment " + std::to_string(std::prev(it)->second.second));
    row[s.left.x] = {s.right.x, s.id};
    live_[s.id] = s;
    return h;
  }
  std::optional<Segment> remove(SegmentId id) {
    auto it = live_.find(id);
    if (it == live_.end()) return std::nullopt;
    Segment s = it->second;
    auto row = rows_.find(s.left.y);
    row->second.erase(s.left.x);
    if (row->second.empty()) rows_.erase(row);
    live_.erase(it);
    return s;
  }
  const Segment& at(SegmentId id) const { return live_.at(id); }
  std::size_t size() const { return live_.size(); }
  std::vector<Segment> segments() const {
    std::vector<Segment> out;
    for (const auto& [id, s] : live_) out.push_back(s);
    return out;
  }

 private:
  std::map<Coord, std::map<Coord, std::pair<Coord, SegmentId>>> rows_;
  std::map<SegmentId, Segment> live_;
};

inline SlabTree horiz_tree(std::vector<Coord> universe, const std::vector<Segment>& initial, const HorizParams& p) {
  for (const Segment& s : initial) universe.push_back(s.left.x), universe.push_back(s.right.x);
  if (universe.empty()) throw Fault("horizontal: empty x-universe");
  return SlabTree(universe, p.leaf_size, p.r);
}

// The augmented-catalog structure: every segment lives in the catalogs of
// the nodes it is assigned to, so space is O(n log_B n) words.
class HorizRayShooter {
 public:
  HorizRayShooter(BlockStore& store, std::vector<Coord> universe, HorizParams params, const std::vector<Segment>& initial = {})
      : store_(&store), p_(params.resolved()), tree_(horiz_tree(std::move(universe), initial, p_)) {
    n_ref_ = round_pow2(initial.size());
    cat_ = std::make_unique<HorizCatalogTree>(store, tree_, group_for(n_ref_));
    for (const Segment& s : initial) insert(s);
  }

  const SlabTree& tree() const { return tree_; }
  const HorizCatalogTree& catalog() const { return *cat_; }
  std::size_t size() const { return idx_.size(); }
  std::size_t group_size() const { return cat_->group_size(); }
  std::size_t rebuilds() const { return rebuilds_; }

  void insert(const Segment& s) {
    if (!tree_.in_universe(s.left.x) || !tree_.in_universe(s.right.x)) throw Fault("horizontal: endpoint outside the x-universe");
    cat_->insert(idx_.add(s));
    after_update();
  }
  bool erase(SegmentId id) {
    if (!idx_.remove(id)) return false;
    cat_->erase(id);
    after_update();
    return true;
  }
  std::optional<Segment> query(Point q, Ray dir = Ray::Up) const {
    auto h = cat_->shoot(q.x, q.y, dir);
    if (!h) return std::nullopt;
    return idx_.at(h->id);
  }
  std::size_t block_count() const { return cat_->block_count(); }
  std::vector<std::string> audit() const { return cat_->audit(); }

 private:
  std::size_t group_for(std::size_t n_ref) const { return p_.group ? p_.group : horiz_group(p_.B, n_ref); }

  // Thresholds follow n rounded to a power of two; the catalogs are rebuilt
  // when that drifts by 2x and the group size changes with it.
  void after_update() {
    std::size_t now = round_pow2(idx_.size());
    if (now < 2 * n_ref_ && 2 * now > n_ref_) return;
    n_ref_ = now;
    if (group_for(n_ref_) == cat_->group_size()) return;
    ++rebuilds_;
    cat_.reset();
    cat_ = std::make_unique<HorizCatalogTree>(*store_, tree_, group_for(n_ref_));
    for (const Segment& s : idx_.segments()) cat_->insert(hseg_of(s));
  }

  BlockStore* store_;
  HorizParams p_;
  SlabTree tree_;
  HorizIndex idx_;
  std::size_t n_ref_ = 1, rebuilds_ = 0;
  std::unique_ptr<HorizCatalogTree> cat_;
};

// Linear-space variant. A segment with endpoints in different leaves is cut
// at v_s, the lowest node whose slab holds both endpoints: s_m covers the
// children of v_s strictly between the endpoint children c_l and c_r and goes
// to the catalog tree Pi_m; s_l (inside c_l) joins S_l(c_l) and s_r (inside
// c_r) joins S_r(c_r). Segments inside one leaf sit in a leaf bag.
//
// S_r(u) is kept as a y-ordered chain of blocks of g..2g pieces. The winner of
// a block is its piece reaching furthest right; a catalog tree D_r holds all
// winners, and D_y holds every y of S_r(u) at parent(u) colored with u's
// index. For the best hit s* in S_r(u) with u on the query path, the block of
// s* also holds the D_y predecessor of s-'s height or the D_y successor of
// s+'s height, where s- and s+ are the nearest winners below and above q.
// The left side is the mirror image with the leftmost piece winning.
class HorizLinearRayShooter {
 public:
  static constexpr std::uint32_t kNone = UINT32_MAX;
  enum Side { kLeft = 0, kRight = 1 };

  HorizLinearRayShooter(BlockStore& store, std::vector<Coord> universe, HorizParams params, const std::vector<Segment>& initial = {})
      : store_(&store), p_(params.resolved()), tree_(horiz_tree(std::move(universe), initial, p_)), short_(tree_.size()) {
    n_ref_ = round_pow2(initial.size());
    setup(group_for(n_ref_));
    for (const Segment& s : initial) insert(s);
  }
  HorizLinearRayShooter(const HorizLinearRayShooter&) = delete;
  HorizLinearRayShooter& operator=(const HorizLinearRayShooter&) = delete;
  ~HorizLinearRayShooter() { teardown(); }

  const SlabTree& tree() const { return tree_; }
  std::size_t size() const { return idx_.size(); }
  std::size_t group_size() const { return g_; }
  const HorizCatalogTree& middle() const { return *mid_; }
  const HorizCatalogTree& winners(Side s) const { return *win_[s]; }
  std::size_t rebuilds() const { return rebuilds_; }

  void insert(const Segment& s) {
    if (!tree_.in_universe(s.left.x) || !tree_.in_universe(s.right.x)) throw Fault("horizontal: endpoint outside the x-universe");
    add(idx_.add(s));
    after_update();
  }
  bool erase(SegmentId id) {
    auto s = idx_.remove(id);
    if (!s) return false;
    remove(hseg_of(*s));
    after_update();
    return true;
  }

  std::optional<Segment> query(Point q, Ray dir = Ray::Up) const {
    auto leaf = tree_.leaf_of(q.x);
    if (!leaf) return std::nullopt;
    std::optional<HSeg> best;
    auto offer = [&](const HSeg& h) {
      if (hreaches(h, q.x, q.y, dir) && (!best || hbetter(h, *best, dir))) best = h;
    };
    const Bag& bag = short_[*leaf];
    if (bag.live) {
      bag.ext.touch_all(*store_);
      for (const HSeg& h : bag.segs) offer(h);
    }
    if (auto m = mid_->shoot(q.x, q.y, dir)) offer(*m);
    for (int side : {kLeft, kRight}) {
      auto probe_along = [&](const HSeg& w, Ray d) {
        for (const auto& hit : ys_[side]->along(q.x, w.y, d)) {
          const Block& b = blocks_[where_[side].at(hit.seg.id)];
          b.ext.touch_all(*store_);
          for (const HSeg& h : b.segs) offer(h);
        }
      };
      if (auto lo = win_[side]->shoot(q.x, q.y, Ray::Down)) probe_along(*lo, Ray::Down);
      if (auto hi = win_[side]->shoot(q.x, q.y, Ray::Up)) probe_along(*hi, Ray::Up);
    }
    if (!best) return std::nullopt;
    return idx_.at(best->id);
  }

  std::size_t block_count() const {
    std::size_t n = mid_->block_count();
    for (int side : {kLeft, kRight}) {
      n += win_[side]->block_count() + ys_[side]->block_count();
      for (const Chain& c : chains_[side])
        if (c.dir) n += c.dir->block_count();
    }
    for (const Block& b : blocks_)
      if (b.live) n += b.ext.block_count();
    for (const Bag& b : short_)
      if (b.live) n += b.ext.block_count();
    return n;
  }

  std::vector<std::string> audit() const {
    std::vector<std::string> out;
    for (auto* t : {mid_.get(), win_[0].get(), win_[1].get(), ys_[0].get(), ys_[1].get()})
      for (auto& m : t->audit()) out.push_back(m);
    std::size_t pieces[2] = {0, 0};
    for (int side : {kLeft, kRight}) {
      std::size_t winners = 0;
      for (std::uint32_t u = 0; u < chains_[side].size(); ++u) {
        const Chain& c = chains_[side][u];
        std::size_t count = 0;
        std::uint64_t last = 0;
        bool first = true;
        for (std::uint32_t b = c.head, prev = kNone; b != kNone; prev = b, b = blocks_[b].next) {
          const Block& B = blocks_[b];
          ++count;
          if (B.prev != prev || B.node != u || B.side != side) out.push_back("block chain broken");
          if (B.segs.empty()) out.push_back("empty block");
          if (B.segs.size() > 2 * g_) out.push_back("block over 2g");
          if (B.segs.size() < g_ && !(B.prev == kNone && B.next == kNone)) out.push_back("block under g");
          for (const HSeg& h : B.segs) {
            std::uint64_t v = hvalue(h.y, h.id, 0);
            if (!first && v <= last) out.push_back("block order");
            if (v < B.lb) out.push_back("piece below block label");
            first = false, last = v;
            if (where_[side].count(h.id) == 0 || where_[side].at(h.id) != b) out.push_back("piece registry");
            if (!ys_[side]->contains(h.id)) out.push_back("piece missing from D_y");
            ++pieces[side];
          }
          if (!B.segs.empty()) {
            ++winners;
            HSeg w = B.segs.front();
            for (const HSeg& h : B.segs)
              if (wins(side, h, w)) w = h;
            if (B.win != w.id || !win_[side]->contains(w.id)) out.push_back("stale block winner");
          }
        }
        if (count != c.count) out.push_back("block count");
      }
      if (winners != win_[side]->size()) out.push_back("D_r holds more than the block winners");
      if (ys_[side]->size() != pieces[side] || where_[side].size() != pieces[side]) out.push_back("D_y out of step");
    }
    return out;
  }

 private:
  struct Bag {
    std::vector<HSeg> segs;
    Extent ext;
    bool live = false;
  };
  struct Block {
    bool live = false;
    std::uint32_t node = kNone;
    int side = 0;
    std::uint64_t lb = 0;
    std::vector<HSeg> segs;  // y order
    Extent ext;
    SegmentId win = -1;
    std::uint32_t prev = kNone, next = kNone;
  };
  struct LbEntry {
    std::uint64_t lb;
    std::uint32_t block;
  };
  struct SameBlock {
    bool operator()(const LbEntry& a, const LbEntry& b) const { return a.block == b.block; }
  };
  using Dir = BTree<LbEntry, SameBlock>;
  struct Chain {
    std::unique_ptr<Dir> dir;
    std::uint32_t head = kNone;
    std::size_t count = 0;
  };
  struct Cut {
    bool is_short = false;
    std::uint32_t leaf = kNone, vs = kNone, cl = kNone, cr = kNone;
  };

  static bool lb_less(const LbEntry& a, const LbEntry& b) { return a.lb < b.lb || (a.lb == b.lb && a.block < b.block); }
  static bool wins(int side, const HSeg& a, const HSeg& b) {
    if (side == kRight) return a.r2 > b.r2 || (a.r2 == b.r2 && a.id < b.id);
    return a.l2 < b.l2 || (a.l2 == b.l2 && a.id < b.id);
  }

  std::size_t group_for(std::size_t n_ref) const { return p_.group ? p_.group : horiz_group(p_.B, n_ref); }

  void setup(std::size_t g) {
    g_ = g;
    mid_ = std::make_unique<HorizCatalogTree>(*store_, tree_, g);
    for (int side : {kLeft, kRight}) {
      win_[side] = std::make_unique<HorizCatalogTree>(*store_, tree_, g);
      ys_[side] = std::make_unique<HorizCatalogTree>(*store_, tree_, g);
      chains_[side].clear();
      chains_[side].resize(tree_.size());
      where_[side].clear();
    }
  }
  void teardown() {
    for (Block& b : blocks_)
      if (b.live) b.ext.release(*store_);
    blocks_.clear();
    free_blocks_.clear();
    for (Bag& b : short_)
      if (b.live) b.ext.release(*store_), b.live = false, b.segs.clear();
    mid_.reset();
    for (int side : {kLeft, kRight}) {
      win_[side].reset();
      ys_[side].reset();
      chains_[side].clear();
    }
  }

  void after_update() {
    std::size_t now = round_pow2(idx_.size());
    if (now < 2 * n_ref_ && 2 * now > n_ref_) return;
    n_ref_ = now;
    if (group_for(n_ref_) == g_) return;
    ++rebuilds_;
    teardown();
    short_.assign(tree_.size(), Bag{});
    setup(group_for(n_ref_));
    for (const Segment& s : idx_.segments()) add(hseg_of(s));
  }

  Cut cut(const HSeg& h) const {
    Cut c;
    auto pl = tree_.path(h.l2 / 2), pr = tree_.path(h.r2 / 2);
    if (pl.back() == pr.back()) {
      c.is_short = true;
      c.leaf = pl.back();
      return c;
    }
    std::size_t k = 1;
    while (pl[k] == pr[k]) ++k;
    c.vs = pl[k - 1], c.cl = pl[k], c.cr = pr[k];
    return c;
  }

  HSeg piece(int side, std::uint32_t u, const HSeg& h) const {
    const SlabNode& n = tree_.node(u);
    return side == kRight ? HSeg{h.id, n.lo2, h.r2, h.y} : HSeg{h.id, h.l2, n.hi2, h.y};
  }

  void add(const HSeg& h) {
    Cut c = cut(h);
    if (c.is_short) {
      Bag& b = short_[c.leaf];
      b.segs.push_back(h);
      b.live = true;
      b.ext.resize(*store_, b.segs.size());
      b.ext.touch_record(*store_, b.segs.size() - 1, true);
      return;
    }
    const SlabNode& v = tree_.node(c.vs);
    const auto il = tree_.node(c.cl).index_in_parent, ir = tree_.node(c.cr).index_in_parent;
    if (ir > il + 1) {
      HSeg m{h.id, tree_.node(v.kids[il + 1]).lo2, tree_.node(v.kids[ir - 1]).hi2, h.y};
      mid_->insert_at(m, c.vs, static_cast<std::uint16_t>(il + 1), static_cast<std::uint16_t>(ir - 1));
    }
    add_piece(kLeft, c.cl, piece(kLeft, c.cl, h));
    add_piece(kRight, c.cr, piece(kRight, c.cr, h));
  }

  void remove(const HSeg& h) {
    Cut c = cut(h);
    if (c.is_short) {
      Bag& b = short_[c.leaf];
      b.ext.touch_all(*store_, true);
      b.segs.erase(std::find_if(b.segs.begin(), b.segs.end(), [&](const HSeg& x) { return x.id == h.id; }));
      b.ext.resize(*store_, b.segs.size());
      return;
    }
    mid_->erase(h.id);
    remove_piece(kLeft, h.id);
    remove_piece(kRight, h.id);
  }

  std::uint32_t new_block(int side, std::uint32_t u) {
    std::uint32_t b;
    if (!free_blocks_.empty()) {
      b = free_blocks_.back();
      free_blocks_.pop_back();
    } else {
      blocks_.emplace_back();
      b = static_cast<std::uint32_t>(blocks_.size() - 1);
    }
    blocks_[b] = Block{};
    blocks_[b].live = true;
    blocks_[b].node = u;
    blocks_[b].side = side;
    ++chains_[side][u].count;
    return b;
  }

  // Re-derives the winner of block b and swaps it into the winner tree.
  void refresh_winner(std::uint32_t b) {
    Block& B = blocks_[b];
    const int side = B.side;
    SegmentId w = -1;
    const HSeg* best = nullptr;
    for (const HSeg& h : B.segs)
      if (!best || wins(side, h, *best)) best = &h;
    if (best) w = best->id;
    if (w == B.win) return;
    if (B.win >= 0) win_[side]->erase(B.win);
    B.win = w;
    if (best) win_[side]->insert(*best);
  }

  void add_piece(int side, std::uint32_t u, const HSeg& p) {
    Chain& c = chains_[side][u];
    if (!c.dir) c.dir = std::make_unique<Dir>(*store_, store_->block_size());
    const std::uint64_t val = hvalue(p.y, p.id, 0);
    std::uint32_t b;
    if (c.head == kNone) {
      b = new_block(side, u);
      chains_[side][u].head = b;
      c.dir->insert({0, b}, lb_less);
    } else {
      auto d = c.dir->last_where([&](const LbEntry& e) { return e.lb <= val; });
      b = d ? d->block : c.head;
    }
    Block& B = blocks_[b];
    auto pos = std::upper_bound(B.segs.begin(), B.segs.end(), val, [](std::uint64_t x, const HSeg& h) { return x < hvalue(h.y, h.id, 0); });
    B.segs.insert(pos, p);
    B.ext.resize(*store_, B.segs.size());
    where_[side][p.id] = b;
    const SlabNode& n = tree_.node(u);
    const auto i = static_cast<std::uint16_t>(n.index_in_parent);
    ys_[side]->insert_at(HSeg{p.id, n.lo2, n.hi2, p.y}, n.parent, i, i);
    refresh_winner(b);
    if (blocks_[b].segs.size() > 2 * g_) split_block(b);
  }

  void split_block(std::uint32_t b) {
    const int side = blocks_[b].side;
    const std::uint32_t u = blocks_[b].node;
    const std::uint32_t h = new_block(side, u);
    Block& A = blocks_[b];
    Block& N = blocks_[h];
    const std::size_t mid = A.segs.size() / 2;
    N.segs.assign(A.segs.begin() + static_cast<std::ptrdiff_t>(mid), A.segs.end());
    A.segs.resize(mid);
    N.lb = hvalue(N.segs.front().y, N.segs.front().id, 0);
    N.prev = b;
    N.next = A.next;
    if (A.next != kNone) blocks_[A.next].prev = h;
    A.next = h;
    for (const HSeg& x : N.segs) where_[side][x.id] = h;
    A.ext.resize(*store_, A.segs.size());
    N.ext.resize(*store_, N.segs.size());
    chains_[side][u].dir->insert({N.lb, h}, lb_less);
    if (std::any_of(N.segs.begin(), N.segs.end(), [&](const HSeg& x) { return x.id == A.win; })) N.win = A.win, A.win = -1;
    refresh_winner(b);
    refresh_winner(h);
  }

  void remove_piece(int side, SegmentId id) {
    const std::uint32_t b = where_[side].at(id);
    where_[side].erase(id);
    ys_[side]->erase(id);
    Block& B = blocks_[b];
    B.ext.touch_all(*store_, true);
    B.segs.erase(std::find_if(B.segs.begin(), B.segs.end(), [&](const HSeg& h) { return h.id == id; }));
    B.ext.resize(*store_, B.segs.size());
    if (B.win == id) {
      win_[side]->erase(id);
      B.win = -1;
      refresh_winner(b);
    }
    if (B.segs.empty()) {
      drop_block(b);
      return;
    }
    if (B.segs.size() < g_) {
      if (B.next != kNone) merge_blocks(b, B.next);
      else if (B.prev != kNone) merge_blocks(B.prev, b);
    }
  }

  void merge_blocks(std::uint32_t a, std::uint32_t b) {
    const int side = blocks_[a].side;
    for (const HSeg& x : blocks_[b].segs) where_[side][x.id] = a;
    if (blocks_[b].win >= 0) win_[side]->erase(blocks_[b].win), blocks_[b].win = -1;
    blocks_[a].segs.insert(blocks_[a].segs.end(), blocks_[b].segs.begin(), blocks_[b].segs.end());
    blocks_[b].segs.clear();
    drop_block(b);
    blocks_[a].ext.resize(*store_, blocks_[a].segs.size());
    refresh_winner(a);
    if (blocks_[a].segs.size() > 2 * g_) split_block(a);
  }

  void drop_block(std::uint32_t b) {
    Block& B = blocks_[b];
    Chain& c = chains_[B.side][B.node];
    if (B.win >= 0) win_[B.side]->erase(B.win);
    c.dir->erase({B.lb, b}, lb_less);
    if (B.prev != kNone) blocks_[B.prev].next = B.next;
    else c.head = B.next;
    if (B.next != kNone) blocks_[B.next].prev = B.prev;
    if (B.prev == kNone && B.next != kNone) {
      Block& N = blocks_[B.next];
      c.dir->erase({N.lb, B.next}, lb_less);
      N.lb = 0;
      c.dir->insert({0, B.next}, lb_less);
    }
    B.ext.release(*store_);
    B.live = false;
    B.segs.clear();
    --c.count;
    free_blocks_.push_back(b);
  }

  BlockStore* store_;
  HorizParams p_;
  SlabTree tree_;
  HorizIndex idx_;
  std::size_t g_ = 2, n_ref_ = 1, rebuilds_ = 0;
  std::unique_ptr<HorizCatalogTree> mid_, win_[2], ys_[2];
  std::vector<Chain> chains_[2];
  std::vector<Block> blocks_;
  std::vector<std::uint32_t> free_blocks_;
  std::unordered_map<SegmentId, std::uint32_t> where_[2];
  std::vector<Bag> short_;
};

}  // namespace dpl
