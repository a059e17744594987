#pragma once

// Out-of-class members of DynamicRayShooter. Included from its header.

#include <numeric>

namespace dpl {

// ---- buffers ----------------------------------------------------------------

inline void DynamicRayShooter::enter_root(std::uint32_t u, std::uint32_t closer, std::uint32_t e) {
  PortionRec& pr = slab_[u].portions.at(closer);
  if (pr.root == kNil) {
    pr.root = build_portion(u, closer, {e});
    return;
  }
  if (leafnode(pr.root)) {
    place_in_leaf(pr.root, e);
  } else {
    pay(pr.root).buf.push_back(e);
    items_[e].where = pr.root;
    dirty(pr.root);
  }
  pst_add(pr.root, e);
}

inline void DynamicRayShooter::tombstone(NodeId root, std::uint32_t e) { push_tombstone(root, e); }

inline void DynamicRayShooter::settle(NodeId root) {
  if (root == kNil || leafnode(root)) return;
  const Payload& p = pay(root);
  if (p.buf.size() > p_.buffer_cap || p.del.size() > dcap()) flush(root);
}

// Tombstone for e arrives at k: it dies here if e sits here, else waits in D(k).
inline void DynamicRayShooter::push_tombstone(NodeId k, std::uint32_t e) {
  if (leafnode(k) || items_[e].where == k) {
    annihilate(k, e);
    return;
  }
  pay(k).del.push_back(e);
  if (in_flush_) stats_.max_deletes_in_flush = std::max(stats_.max_deletes_in_flush, pay(k).del.size());
  if (items_[e].pst == k) pst_remove(k, e);
  dirty(k);
}

inline void DynamicRayShooter::annihilate(NodeId k, std::uint32_t e) {
  if (items_[e].where != k) throw Fault("annihilate: tombstone reached a node not holding its item");
  if (leafnode(k)) {
    auto& en = forest_.entries_of(k);
    en.erase(std::find_if(en.begin(), en.end(), [&](const auto& x) { return x.item == e; }));
    forest_.reweigh(k);
  } else {
    drop(pay(k).buf, e);
  }
  items_[e].where = kNil;
  if (items_[e].pst != kNil) pst_remove(items_[e].pst, e);
  free_item(e);
  dirty(k);
}

// Deletions go down first, so every comparison below is between items that
// were live at the same time.
inline void DynamicRayShooter::flush(NodeId x) {
  ++stats_.flushes;
  bool outer = !in_flush_;
  in_flush_ = true;
  forest_.touch(x);
  const std::vector<NodeId> kids = forest_.node(x).kids;
  std::vector<std::uint32_t> dels = std::move(pay(x).del);
  pay(x).del.clear();
  for (std::uint32_t d : dels) push_tombstone(child_toward(x, items_[d].where), d);

  std::unordered_map<std::uint32_t, NodeId> memo;
  for (std::uint32_t e : std::vector<std::uint32_t>(pay(x).buf)) route(x, e, memo);
  std::vector<std::uint32_t> bufs = std::move(pay(x).buf);
  pay(x).buf.clear();
  for (std::uint32_t e : bufs) {
    NodeId k = memo.at(e);
    if (leafnode(k)) {
      place_in_leaf(k, e);
    } else {
      pay(k).buf.push_back(e);
      items_[e].where = k;
      dirty(k);
    }
    if (items_[e].pst == kNil) pst_add(k, e);
  }
  dirty(x);
  for (NodeId k : kids) {
    if (leafnode(k)) continue;
    const Payload& p = pay(k);
    if (p.buf.size() > p_.buffer_cap || p.del.size() > dcap()) flush(k);
  }
  if (outer) in_flush_ = false;
}

// Child of x that e belongs in: the one holding the lowest item of L_i above
// e among B(x), the Max' sets on the path that point into x, and the
// children's Max' sets. A target still in B(x) is routed the same way.
inline NodeId DynamicRayShooter::route(NodeId x, std::uint32_t e, std::unordered_map<std::uint32_t, NodeId>& memo) {
  if (auto it = memo.find(e); it != memo.end()) return it->second;
  std::size_t i = items_[e].f;
  std::size_t kids = kids_of(items_[e].u);
  std::uint32_t best = kNone;
  auto consider = [&](std::uint32_t z) {
    if (z == e || z == best || !spans(z, i) || !below(e, z)) return;
    if (best == kNone || below(z, best)) best = z;
  };
  auto spanning = [&](const std::vector<std::vector<std::uint32_t>>& mp, auto&& fn) {
    for (std::size_t f = 0; f <= i; ++f)
      for (std::size_t l = i; l < kids; ++l)
        for (std::uint32_t z : mp[class_index(kids, f, l)]) fn(z);
  };
  for (std::uint32_t z : pay(x).buf) consider(z);
  for (NodeId y = x; y != kNil; y = forest_.node(y).parent)
    spanning(pay(y).maxp, [&](std::uint32_t z) {
      if (located_in(z, x)) consider(z);
    });
  const auto& ks = forest_.node(x).kids;
  for (NodeId k : ks) spanning(pay(k).maxp, consider);
  NodeId out;
  if (best == kNone) out = ks.back();
  else if (items_[best].where == x) out = route(x, best, memo);
  else out = child_toward(x, items_[best].where);
  memo[e] = out;
  return out;
}

inline void DynamicRayShooter::place_in_leaf(NodeId leaf, std::uint32_t e) {
  auto& en = forest_.entries_of(leaf);
  std::size_t i = items_[e].f;
  auto pos = std::find_if(en.begin(), en.end(), [&](const auto& x) { return spans(x.item, i) && below(e, x.item); });
  en.insert(pos, {e, items_[e].w});
  items_[e].where = leaf;
  forest_.reweigh(leaf);
  dirty(leaf);
}

// ---- Max' -------------------------------------------------------------------

// Max'_c(k) holds the highest items of its class located under k that no
// ancestor holds; between m and 2m of them unless fewer exist.
inline void DynamicRayShooter::pst_add(NodeId k, std::uint32_t e) {
  std::size_t c = cls(e);
  auto& S = pay(k).maxp[c];
  if (S.size() < m() || below(S.back(), e)) {
    S.insert(std::find_if(S.begin(), S.end(), [&](std::uint32_t z) { return below(z, e); }), e);
    items_[e].pst = k;
    if (S.size() > 2 * m()) {
      std::uint32_t y = S.back();
      S.pop_back();
      items_[y].pst = kNil;
      if (items_[y].where != k) pst_add(child_toward(k, items_[y].where), y);
    }
  } else if (items_[e].where != k) {
    pst_add(child_toward(k, items_[e].where), e);
  } else {
    items_[e].pst = kNil;
  }
  dirty(k);
  if (NodeId par = forest_.node(k).parent; par != kNil) dirty(par);
}

inline void DynamicRayShooter::pst_remove(NodeId k, std::uint32_t e) {
  std::size_t c = cls(e);
  drop(pay(k).maxp[c], e);
  items_[e].pst = kNil;
  if (pay(k).maxp[c].size() < m()) refill(k, c);
  dirty(k);
  if (NodeId par = forest_.node(k).parent; par != kNil) dirty(par);
}

// Pulls the highest free items of class c at k and the children's tops until
// Max'_c(k) holds 2m. A child's top whose tombstone waits in D(k) is killed
// on the spot rather than promoted.
inline void DynamicRayShooter::refill(NodeId k, std::size_t c) {
  const std::vector<NodeId> kids = forest_.node(k).kids;
  while (pay(k).maxp[c].size() < 2 * m()) {
    std::uint32_t best = kNone;
    NodeId from = kNil;
    auto consider = [&](std::uint32_t z, NodeId src) {
      if (best == kNone || below(best, z)) best = z, from = src;
    };
    if (leafnode(k)) {
      for (const auto& en : forest_.node(k).entries)
        if (cls(en.item) == c && items_[en.item].pst == kNil) consider(en.item, kNil);
    } else {
      for (std::uint32_t z : pay(k).buf)
        if (cls(z) == c && items_[z].pst == kNil) consider(z, kNil);
      for (NodeId k2 : kids) {
        forest_.touch(k2);
        while (!pay(k2).maxp[c].empty()) {
          std::uint32_t t = pay(k2).maxp[c].front();
          if (!in(pay(k).del, t)) {
            consider(t, k2);
            break;
          }
          drop(pay(k).del, t);
          push_tombstone(k2, t);
        }
      }
    }
    if (best == kNone) break;
    pay(k).maxp[c].push_back(best);
    items_[best].pst = k;
    if (from != kNil) {
      auto& S2 = pay(from).maxp[c];
      S2.erase(S2.begin());
      if (S2.size() < m()) refill(from, c);
      dirty(from);
    }
  }
  dirty(k);
}

inline void DynamicRayShooter::fill_bmax(NodeId x, std::size_t kids) {
  const auto& ks = forest_.node(x).kids;
  std::vector<std::uint32_t> bm(ks.size() * kids, kNone);
  for (std::size_t a = 0; a < ks.size(); ++a) {
    NodeId k = ks[a];
    auto offer = [&](std::uint32_t b) {
      if (b == kNone || items_[b].bridge < 0) return;
      std::uint32_t& slot = bm[a * kids + static_cast<std::size_t>(items_[b].bridge)];
      if (slot == kNone || below(slot, b)) slot = b;
    };
    if (leafnode(k)) {
      for (const auto& en : forest_.node(k).entries) offer(en.item);
    } else {
      for (std::uint32_t b : pay(k).bmax) offer(b);
    }
  }
  pay(x).bmax = std::move(bm);
  dirty(x);
}

inline void DynamicRayShooter::recompute_bmax_up(NodeId x, std::size_t kids) {
  for (; x != kNil; x = forest_.node(x).parent) fill_bmax(x, kids);
}

// ---- rebuilding -------------------------------------------------------------

// e stops being a bridge. Its copy below then closes nothing, so the two
// portions it separated are merged, recursively down the copy chain.
inline void DynamicRayShooter::remove_bridge(std::uint32_t e) {
  ++stats_.bridge_removals;
  std::uint32_t u = items_[e].u;
  std::size_t i = static_cast<std::size_t>(items_[e].bridge);
  SlabState& ss = slab_[u];
  if (items_[e].up) {
    ss.v->set_atom(items_[e].vh, make_atom(0, 0));
  } else {
    ss.v_item.erase(items_[e].vh);
    ss.v->erase(items_[e].vh);
    items_[e].vh = kNone;
  }
  items_[e].bridge = -1;
  if (!items_[e].up && items_[e].where != kNil) recompute_bmax_up(forest_.node(items_[e].where).parent, kids_of(u));
  std::uint32_t c = items_[e].copy;
  items_[e].copy = kNone;
  if (items_[c].bridge >= 0) remove_bridge(c);
  merge_portions(tree_.node(u).kids[i], c);
}

inline void DynamicRayShooter::merge_portions(std::uint32_t u, std::uint32_t gone) {
  SlabState& ss = slab_[u];
  PortionRec a = std::move(ss.portions.at(gone));
  ss.portions.erase(gone);
  std::uint32_t nxt = a.next;
  PortionRec& b = ss.portions.at(nxt);
  if (tree_.node(u).leaf()) {
    b.bag.insert(b.bag.begin(), a.bag.begin(), a.bag.end());
    a.bag_ext.release(*store_);
    b.bag_ext.resize(*store_, b.bag.size());
    b.bag_ext.touch_all(*store_, true);
  } else {
    std::vector<std::uint32_t> seq = drain(a.root);
    std::vector<std::uint32_t> hi = drain(b.root);
    seq.insert(seq.end(), hi.begin(), hi.end());
    b.root = build_portion(u, nxt, seq);
  }
  b.old_count += a.old_count;
  b.new_count += a.new_count;
  b.prev = a.prev;
  if (a.prev != kNone) ss.portions.at(a.prev).next = nxt;
  if (ss.v) {
    ss.v_item.erase(items_[gone].vh);
    ss.v->erase(items_[gone].vh);
  }
  free_item(gone);
}

// Pushes every buffer to the leaves and tears the tree down; returns the
// surviving items in tree order.
inline std::vector<std::uint32_t> DynamicRayShooter::drain(NodeId root) {
  std::vector<std::uint32_t> seq;
  if (root == kNil) return seq;
  std::vector<NodeId> order{root};
  for (std::size_t k = 0; k < order.size(); ++k) {
    NodeId x = order[k];
    if (leafnode(x)) continue;
    if (!pay(x).buf.empty() || !pay(x).del.empty()) flush(x);
    for (NodeId c : forest_.node(x).kids) order.push_back(c);
  }
  for (NodeId l : forest_.leaves(root)) {
    forest_.touch(l);
    for (const auto& en : forest_.node(l).entries) seq.push_back(en.item);
  }
  for (std::uint32_t e : seq) items_[e].where = kNil, items_[e].pst = kNil;
  owner_.erase(root);
  forest_.destroy(root);
  return seq;
}

// Biased tree over seq (already in multi-slab order) with Max' filled top
// down and the bridge tables bottom up.
inline NodeId DynamicRayShooter::build_portion(std::uint32_t u, std::uint32_t closer, const std::vector<std::uint32_t>& seq) {
  if (seq.empty()) return kNil;
  std::size_t kids = kids_of(u);
  Weight floor = 0;
  for (std::uint32_t e : seq)
    if (items_[e].w > 0 && (floor == 0 || items_[e].w < floor)) floor = items_[e].w;
  if (floor == 0) floor = 1;
  std::vector<Forest::Entry> entries;
  entries.reserve(seq.size());
  for (std::uint32_t e : seq) entries.push_back({e, items_[e].w > 0 ? items_[e].w : floor});
  NodeId root = forest_.build(std::move(entries));
  owner_[root] = {u, closer};
  std::vector<NodeId> order{root};
  for (std::size_t k = 0; k < order.size(); ++k)
    for (NodeId c : forest_.node(order[k]).kids) order.push_back(c);
  for (NodeId x : order) {
    Payload& p = pay(x);
    p = Payload{};
    p.maxp.assign(class_count(kids), {});
    for (const auto& en : forest_.node(x).entries) items_[en.item].where = x, items_[en.item].pst = kNil;
  }
  // pool: items of one class under x, lowest first
  std::function<void(NodeId, std::vector<std::uint32_t>, std::size_t)> fill = [&](NodeId x, std::vector<std::uint32_t> pool, std::size_t c) {
    std::size_t take = std::min(pool.size(), 2 * m());
    auto& S = pay(x).maxp[c];
    for (std::size_t t = 0; t < take; ++t) {
      std::uint32_t e = pool[pool.size() - 1 - t];
      S.push_back(e);
      items_[e].pst = x;
    }
    pool.resize(pool.size() - take);
    if (pool.empty() || leafnode(x)) return;
    const auto& ks = forest_.node(x).kids;
    std::vector<std::vector<std::uint32_t>> part(ks.size());
    for (std::uint32_t e : pool) part[kid_index(x, child_toward(x, items_[e].where))].push_back(e);
    for (std::size_t a = 0; a < ks.size(); ++a)
      if (!part[a].empty()) fill(forest_.node(x).kids[a], std::move(part[a]), c);
  };
  std::vector<std::vector<std::uint32_t>> by_class(class_count(kids));
  for (std::uint32_t e : seq) by_class[cls(e)].push_back(e);
  for (std::size_t c = 0; c < by_class.size(); ++c)
    if (!by_class[c].empty()) fill(root, std::move(by_class[c]), c);
  for (std::size_t k = order.size(); k-- > 0;)
    if (!leafnode(order[k])) fill_bmax(order[k], kids);
  for (NodeId x : order) dirty(x);
  return root;
}

// Merges each new segment's units into one item and re-sorts the portion.
inline void DynamicRayShooter::rebuild_portion(std::uint32_t u, std::uint32_t closer) {
  ++stats_.portion_rebuilds;
  std::vector<std::uint32_t> seq = drain(slab_[u].portions.at(closer).root);
  slab_[u].portions.at(closer).root = kNil;
  std::vector<std::uint32_t> keep;
  std::unordered_map<std::uint32_t, std::uint32_t> merged;  // slot -> merged item
  for (std::uint32_t e : seq) {
    if (!items_[e].fresh) {
      keep.push_back(e);
      continue;
    }
    std::uint32_t slot = items_[e].slot;
    if (!merged.count(slot)) {
      std::uint16_t f = items_[e].span_f, l = items_[e].span_l;
      std::uint32_t nu = new_item(slot, u, f, l);
      own_[slot].push_back(nu);
      merged[slot] = nu;
      keep.push_back(nu);
    }
    free_item(e);
  }
  std::vector<Segment> segs;
  segs.reserve(keep.size());
  for (std::uint32_t e : keep) segs.push_back(seg(e));
  std::vector<std::uint32_t> sorted;
  sorted.reserve(keep.size());
  for (std::size_t k : order_multislab(segs)) sorted.push_back(keep[k]);
  PortionRec& pr = slab_[u].portions.at(closer);
  pr.root = build_portion(u, closer, sorted);
  pr.old_count = sorted.size();
  pr.new_count = 0;
}

inline void DynamicRayShooter::teardown() {
  for (SlabState& ss : slab_)
    for (auto& [c, pr] : ss.portions) {
      if (pr.root != kNil) forest_.destroy(pr.root);
      pr.bag_ext.release(*store_);
    }
  slab_.clear();
  owner_.clear();
}

// Fresh catalogs from the live segments: new bridges, weights and portions.
inline void DynamicRayShooter::rebuild_all() {
  ++stats_.global_rebuilds;
  teardown();
  std::vector<Segment> live;
  live.reserve(by_id_.size());
  for (const auto& [id, slot] : by_id_) live.push_back(slots_[slot]);
  std::sort(live.begin(), live.end(), [](const Segment& a, const Segment& b) { return a.id < b.id; });
  slots_ = std::move(live);
  by_id_.clear();
  free_slots_.clear();
  own_.clear();
  items_.clear();
  free_items_.clear();
  for (std::uint32_t k = 0; k < slots_.size(); ++k) by_id_[slots_[k].id] = k;
  std::vector<std::uint32_t> all(slots_.size());
  std::iota(all.begin(), all.end(), 0u);
  CatalogSet cs(tree_, slots_, all, p_.d);

  slab_.resize(tree_.size());
  std::vector<std::vector<std::uint32_t>> ids(tree_.size());
  for (std::uint32_t u = 0; u < tree_.size(); ++u) {
    const Catalog& cat = cs.at(u);
    std::size_t kids = kids_of(u);
    std::uint16_t last = static_cast<std::uint16_t>(kids == 0 ? 0 : kids - 1);
    for (std::size_t p = 0; p < cat.ac.size(); ++p) {
      const CatItem& ci = cat.ac[p];
      std::uint32_t e = ci.sentinel() ? new_item(kSentinelSlot, u, 0, last) : new_item(ci.slot, u, ci.f, ci.l);
      items_[e].up = ci.up || ci.sentinel();
      items_[e].bridge = ci.sentinel() ? -1 : ci.bridge;
      items_[e].w = cat.w[p];
      if (ci.sentinel()) slab_[u].sentinel = e;
      else if (!ci.up) own_[ci.slot].push_back(e);
      ids[u].push_back(e);
    }
  }
  for (std::uint32_t u = 0; u < tree_.size(); ++u) {
    const Catalog& cat = cs.at(u);
    SlabState& ss = slab_[u];
    std::size_t kids = kids_of(u);
    bool leaf = tree_.node(u).leaf();
    if (!leaf) {
      ss.v = std::make_unique<ListCusf>(*store_);
      for (std::size_t p = 0; p < cat.ac.size(); ++p) {
        const CatItem& ci = cat.ac[p];
        std::uint32_t e = ids[u][p];
        Atom a;
        if (ci.sentinel()) a = make_atom(1, static_cast<Color>(kids));
        else if (ci.bridge >= 0) a = make_atom(static_cast<Color>(ci.bridge + 1), static_cast<Color>(ci.bridge + 1));
        else if (ci.up) a = make_atom(0, 0);
        else continue;
        if (!ci.sentinel() && ci.bridge >= 0) items_[e].copy = ids[tree_.node(u).kids[ci.bridge]][ci.child_pos];
        items_[e].vh = ss.v->push_back(a);
        ss.v_item[items_[e].vh] = e;
      }
    }
    std::size_t start = 0;
    std::uint32_t prev = kNone;
    for (std::uint32_t q : cat.up_pos) {
      std::uint32_t closer = ids[u][q];
      std::vector<std::uint32_t> seq(ids[u].begin() + start, ids[u].begin() + q);
      PortionRec& pr = ss.portions[closer];
      pr.prev = prev;
      if (prev != kNone) ss.portions.at(prev).next = closer;
      pr.old_count = seq.size();
      if (leaf) {
        pr.bag = seq;
        pr.bag_ext.resize(*store_, pr.bag.size());
        pr.bag_ext.touch_all(*store_, true);
      } else {
        pr.root = build_portion(u, closer, seq);
      }
      prev = closer;
      start = q + 1;
    }
  }
  size_at_build_ = by_id_.size();
  updates_since_build_ = 0;
}

inline void DynamicRayShooter::after_update() {
  if (++updates_since_build_ >= std::max<std::size_t>(32, size_at_build_ / 2)) rebuild_all();
}

// ---- audit ------------------------------------------------------------------

inline void DynamicRayShooter::audit_portion(std::uint32_t u, std::uint32_t closer, const PortionRec& pr,
                                             std::vector<std::string>& out) const {
  std::string at = "node " + std::to_string(u) + " portion " + std::to_string(closer) + ": ";
  auto bad = [&](const std::string& why) { out.push_back(at + why); };
  if (tree_.node(u).leaf() || pr.root == kNil) return;
  auto ow = owner_.find(pr.root);
  if (ow == owner_.end() || ow->second.u != u || ow->second.closer != closer) bad("root not registered to this portion");
  std::size_t kids = kids_of(u);
  std::vector<NodeId> order{pr.root};
  for (std::size_t k = 0; k < order.size(); ++k)
    for (NodeId c : forest_.node(order[k]).kids) order.push_back(c);
  std::unordered_set<std::uint32_t> dead;
  for (NodeId x : order)
    if (!leafnode(x))
      for (std::uint32_t e : pay(x).del) dead.insert(e);

  // every item located here, with its node
  std::vector<std::uint32_t> located;
  for (NodeId x : order) {
    const auto& n = forest_.node(x);
    if (n.leaf) {
      for (const auto& en : n.entries) {
        located.push_back(en.item);
        if (items_[en.item].where != x) bad("leaf entry with a stale location");
      }
      continue;
    }
    const Payload& p = pay(x);
    if (p.buf.size() > p_.buffer_cap) bad("insertion buffer over capacity");
    if (p.del.size() > dcap()) bad("deletion buffer over capacity");
    for (std::uint32_t e : p.buf) {
      located.push_back(e);
      if (items_[e].where != x) bad("buffered item with a stale location");
      if (in(p.del, e)) bad("item and its tombstone wait at the same node");
    }
    for (std::uint32_t e : p.del)
      if (items_[e].where == kNil || !located_in(e, x) || items_[e].where == x) bad("tombstone not above its item");
  }

  for (NodeId x : order) {
    const Payload& p = pay(x);
    if (p.maxp.size() != class_count(kids)) {
      bad("Max' table has the wrong shape");
      continue;
    }
    for (std::size_t c = 0; c < p.maxp.size(); ++c) {
      const auto& S = p.maxp[c];
      if (S.size() > 2 * m()) bad("Max' set larger than 2m");
      std::uint32_t low = kNone;
      for (std::size_t a = 0; a < S.size(); ++a) {
        std::uint32_t e = S[a];
        if (items_[e].pst != x) bad("Max' member does not point back");
        if (cls(e) != c) bad("Max' member in the wrong class");
        if (!located_in(e, x)) bad("Max' member not under its node");
        if (a > 0 && !below(e, S[a - 1])) bad("Max' set out of order");
        if (!dead.count(e)) low = e;
      }
      // the rest of the class under x sits below Max'(x)
      bool under = false;
      for (std::uint32_t e : located) {
        if (cls(e) != c || dead.count(e) || !located_in(e, x)) continue;
        NodeId q = items_[e].pst;
        if (q == x || (q != kNil && q != x && !located_in_node(q, x))) continue;
        under = true;
        if (low != kNone && !below(e, low)) bad("item under a node rises above its Max' set");
      }
      if (under && S.size() < m()) bad("Max' set under m while its subtree holds more");
    }
  }
  for (std::uint32_t e : located)
    if (items_[e].pst != kNil && !in(pay(items_[e].pst).maxp[cls(e)], e)) bad("item points to a Max' set missing it");

  // settled order per child
  std::vector<std::uint32_t> seq;
  for (NodeId l : forest_.leaves(pr.root))
    for (const auto& en : forest_.node(l).entries)
      if (!dead.count(en.item)) seq.push_back(en.item);
  for (std::size_t i = 0; i < kids; ++i) {
    std::uint32_t prev = kNone;
    for (std::uint32_t e : seq) {
      if (!spans(e, i)) continue;
      if (prev != kNone && !below(prev, e)) bad("L_" + std::to_string(i) + " out of order in the leaves");
      prev = e;
    }
  }

  // bridge tables
  for (std::size_t k = order.size(); k-- > 0;) {
    NodeId x = order[k];
    if (leafnode(x)) continue;
    const auto& ks = forest_.node(x).kids;
    if (pay(x).bmax.size() != ks.size() * kids) {
      bad("bridge table has the wrong shape");
      continue;
    }
    for (std::size_t a = 0; a < ks.size(); ++a)
      for (std::size_t j = 0; j < kids; ++j) {
        std::uint32_t want = kNone;
        for (NodeId l : forest_.leaves(ks[a]))
          for (const auto& en : forest_.node(l).entries)
            if (items_[en.item].bridge == static_cast<int>(j)) want = en.item;
        if (pay(x).bmax[a * kids + j] != want) bad("bridge table entry is stale");
      }
  }
}

inline std::vector<std::string> DynamicRayShooter::audit() const {
  std::vector<std::string> out;
  try {
    for (std::uint32_t u = 0; u < tree_.size(); ++u) {
      const SlabState& ss = slab_[u];
      std::string at = "node " + std::to_string(u) + ": ";
      std::size_t kids = kids_of(u);
      // portion chain: from the first portion to the sentinel
      std::size_t walked = 0;
      std::uint32_t first = kNone;
      for (const auto& [c, pr] : ss.portions)
        if (pr.prev == kNone) {
          if (first != kNone) out.push_back(at + "two portions without a predecessor");
          first = c;
        }
      for (std::uint32_t c = first; c != kNone; c = ss.portions.at(c).next) {
        ++walked;
        if (ss.portions.at(c).next == kNone && c != ss.sentinel) out.push_back(at + "portion chain does not end at the sentinel");
      }
      if (walked != ss.portions.size()) out.push_back(at + "portion chain misses portions");
      for (const auto& [c, pr] : ss.portions) audit_portion(u, c, pr, out);
      if (tree_.node(u).leaf()) continue;
      // V: bridges and closers in vertical order per colour
      std::vector<std::uint32_t> last(kids + 1, kNone);
      std::size_t count = 0;
      std::uint32_t tail = kNone;
      for (auto h = ss.v->first(ColorSet::range(0, static_cast<Color>(kids))); h; h = ss.v->after(*h)) {
        std::uint32_t e = ss.v_item.at(*h);
        ++count;
        tail = e;
        if (items_[e].vh != *h) out.push_back(at + "V handle does not point back");
        if (items_[e].slot == kSentinelSlot) continue;
        int b = items_[e].bridge;
        if (b < 0 && !items_[e].up) out.push_back(at + "V holds an item that is neither bridge nor closer");
        if (b >= 0) {
          std::uint32_t& prev = last[static_cast<std::size_t>(b) + 1];
          if (prev != kNone && !below(prev, e)) out.push_back(at + "V out of order for a colour");
          prev = e;
          std::uint32_t c = items_[e].copy;
          std::uint32_t ch = tree_.node(u).kids[static_cast<std::size_t>(b)];
          if (c == kNone || items_[c].slot != items_[e].slot || items_[c].u != ch || !items_[c].up || !slab_[ch].portions.count(c))
            out.push_back(at + "bridge without a closing copy in its child");
        }
        if (items_[e].up && !ss.portions.count(e)) out.push_back(at + "closer without a portion");
      }
      if (count != ss.v_item.size()) out.push_back(at + "V size differs from its handle map");
      if (tail != ss.sentinel) out.push_back(at + "V does not end at the sentinel");
    }
    for (const auto& [id, slot] : by_id_) {
      auto it = own_.find(slot);
      if (it == own_.end() || it->second.empty()) out.push_back("segment " + std::to_string(id) + " has no items");
      else
        for (std::uint32_t e : it->second)
          if (items_[e].slot != slot || !items_[e].live) out.push_back("segment " + std::to_string(id) + " owns a freed item");
    }
  } catch (const Fault& f) {
    out.push_back(std::string("audit aborted: ") + f.what());
  }
  return out;
}

}  // namespace dpl
