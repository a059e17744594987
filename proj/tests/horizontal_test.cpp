#include <gtest/gtest.h>

#include <map>
#include <random>

#include "dpl/horizontal.hpp"
#include "dpl/workload.hpp"

using namespace dpl;

namespace {

Segment hs(SegmentId id, Coord x1, Coord x2, Coord y) { return make_segment(id, {x1, y}, {x2, y}); }

std::vector<Coord> span(Coord lo, Coord hi) {
  std::vector<Coord> xs;
  for (Coord x = lo; x <= hi; ++x) xs.push_back(x);
  return xs;
}

HorizParams tiny(std::size_t group = 2) {
  HorizParams p;
  p.B = 8;
  p.r = 3;
  p.leaf_size = 4;
  p.group = group;
  return p;
}

// Rows of segments whose ends often touch, so shared-endpoint ties occur.
std::vector<Segment> touching_pool(std::size_t n, Coord width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Segment> out;
  std::vector<Coord> cursor;
  while (out.size() < n) {
    std::size_t row = rng() % (cursor.size() + 1);
    if (row == cursor.size()) cursor.push_back(0);
    Coord len = 1 + static_cast<Coord>(rng() % static_cast<std::uint64_t>(1 + (rng() % 3 == 0 ? width / 2 : 6)));
    Coord x1 = cursor[row] + static_cast<Coord>(rng() % 2);
    if (x1 + len > width) {
      row = cursor.size();
      cursor.push_back(0);
      x1 = 0;
    }
    cursor[row] = x1 + len;
    out.push_back(hs(static_cast<SegmentId>(out.size() + 1), x1, x1 + len, static_cast<Coord>(row) * 3));
  }
  return out;
}

template <class S>
void check_queries(const S& s, const std::map<SegmentId, Segment>& live, Point q) {
  std::vector<Segment> segs;
  for (auto& [id, x] : live) segs.push_back(x);
  auto up = s.query(q, Ray::Up);
  auto want_up = oracle_successor(q, segs);
  ASSERT_EQ(up.has_value(), want_up.has_value()) << "up at " << q.x << "," << q.y;
  if (up) ASSERT_EQ(up->id, want_up->id) << "up at " << q.x << "," << q.y;
  auto dn = s.query(q, Ray::Down);
  auto want_dn = oracle_predecessor(q, segs);
  ASSERT_EQ(dn.has_value(), want_dn.has_value()) << "down at " << q.x << "," << q.y;
  if (dn) ASSERT_EQ(dn->id, want_dn->id) << "down at " << q.x << "," << q.y;
}

template <class S>
void fuzz(S& s, const std::vector<Segment>& pool, Coord width, std::uint64_t seed, std::size_t ops, std::size_t audit_every) {
  std::mt19937_64 rng(seed);
  std::map<SegmentId, Segment> live;
  std::size_t next = 0;
  Coord ymax = 1;
  for (const Segment& x : pool) ymax = std::max(ymax, x.left.y + 1);
  for (std::size_t i = 0; i < ops; ++i) {
    unsigned c = rng() % 10;
    if (c < 4 && next < pool.size()) {
      s.insert(pool[next]);
      live[pool[next].id] = pool[next];
      ++next;
    } else if (c < 6 && !live.empty()) {
      auto it = live.begin();
      std::advance(it, static_cast<std::ptrdiff_t>(rng() % live.size()));
      ASSERT_TRUE(s.erase(it->first));
      live.erase(it);
    } else {
      Point q{static_cast<Coord>(rng() % static_cast<std::uint64_t>(width + 1)), static_cast<Coord>(rng() % static_cast<std::uint64_t>(ymax + 2)) - 1};
      check_queries(s, live, q);
    }
    if (audit_every && i % audit_every == 0) {
      auto a = s.audit();
      ASSERT_TRUE(a.empty()) << "op " << i << ": " << a.front();
    }
  }
  EXPECT_EQ(s.size(), live.size());
  auto a = s.audit();
  EXPECT_TRUE(a.empty()) << a.front();
}

}  // namespace

TEST(HorizValue, OrdersByHeightThenId) {
  EXPECT_LT(hvalue(-5, 7, 0), hvalue(-4, 0, 0));
  EXPECT_LT(hvalue(3, 1, 63), hvalue(3, 2, 0));
  EXPECT_LT(hvalue(3, 2, 0), hvalue(3, 2, 1));
  EXPECT_LE(hvalue(3, 9, 5), hprobe(3, Ray::Down));
  EXPECT_GT(hvalue(4, 0, 0), hprobe(3, Ray::Down));
  EXPECT_GE(hvalue(3, 0, 0), hprobe(3, Ray::Up));
  EXPECT_LT(hvalue(2, kHorizIdBound - 1, 63), hprobe(3, Ray::Up));
}

TEST(HorizValue, RejectsBadSegments) {
  EXPECT_THROW(hseg_of(make_segment(1, {0, 0}, {5, 1})), Fault);
  EXPECT_THROW(hseg_of(hs(1, 3, 3, 0)), Fault);
  EXPECT_THROW(hseg_of(hs(kHorizIdBound, 0, 1, 0)), Fault);
  EXPECT_THROW(hseg_of(hs(1, 0, 1, kHorizYBound)), Fault);
}

TEST(HorizParamsTest, GroupSizeFollowsRoundedCount) {
  EXPECT_EQ(round_pow2(0), 1u);
  EXPECT_EQ(round_pow2(5), 4u);
  EXPECT_EQ(round_pow2(6), 8u);
  EXPECT_EQ(round_pow2(1024), 1024u);
  EXPECT_EQ(horiz_group(64, 1 << 10), 2u);
  EXPECT_EQ(horiz_group(64, 1 << 16), 3u);
  EXPECT_EQ(horiz_group(64, 1 << 18), 3u);
  EXPECT_EQ(horiz_group(64, (1 << 18) * 2), 4u);
  EXPECT_EQ(HorizParams{}.resolved().r, 4u);
}

TEST(HorizCatalog, InsertIntoEmptyFillsOnePath) {
  BlockStore store(8, 256);
  SlabTree t(span(0, 63), 4, 3);
  HorizCatalogTree c(store, t, 2);
  // spans the leaf holding 8..11 (slab (7.5, 11.5)): one own element at its
  // parent, bag entries in the two neighbouring leaves
  c.insert(hseg_of(hs(1, 7, 12, 5)));
  auto leaf = *t.leaf_of(9);
  std::uint32_t own = t.node(leaf).parent;
  std::size_t total = 0;
  for (std::uint32_t u = 0; u < t.size(); ++u) total += c.catalog_size(u);
  // the own element plus one copy per ancestor
  std::size_t depth = 0;
  for (std::uint32_t u = own; u != t.root(); u = t.node(u).parent) ++depth;
  EXPECT_EQ(total, depth + 1);
  for (std::uint32_t u = own; u != UINT32_MAX; u = t.node(u).parent) EXPECT_EQ(c.catalog_size(u), 1u);
  EXPECT_TRUE(c.audit().empty());
  auto hit = c.shoot(9, 0, Ray::Up);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->id, 1);
  EXPECT_FALSE(c.shoot(9, 6, Ray::Up));
  EXPECT_FALSE(c.shoot(13, 0, Ray::Up));
}

TEST(HorizCatalog, GroupSplitPromotesOneRepresentative) {
  BlockStore store(8, 256);
  SlabTree t(span(0, 63), 4, 3);
  HorizCatalogTree c(store, t, 2);
  auto leaf = *t.leaf_of(9);
  std::uint32_t v = t.node(leaf).parent, p = t.node(v).parent;
  for (Coord k = 0; k < 4; ++k) c.insert(hseg_of(hs(k + 1, 7, 12, k)));
  ASSERT_EQ(c.group_count(v), 1u);
  ASSERT_EQ(c.catalog_size(p), 1u);
  c.insert(hseg_of(hs(5, 7, 12, 4)));  // 5 > 2g elements: split
  EXPECT_EQ(c.group_count(v), 2u);
  EXPECT_EQ(c.catalog_size(p), 2u);
  EXPECT_TRUE(c.audit().empty());
  for (Coord k = 0; k < 5; ++k) c.erase(k + 1);
  EXPECT_EQ(c.element_count(), 0u);
  EXPECT_TRUE(c.audit().empty());
}

TEST(HorizCatalog, StaircaseGivesInnermostBelow) {
  BlockStore store(8, 256);
  HorizRayShooter s(store, span(0, 40), tiny());
  s.insert(hs(1, 0, 40, 1));
  s.insert(hs(2, 10, 30, 2));
  s.insert(hs(3, 15, 25, 3));
  EXPECT_EQ(s.query({20, 10}, Ray::Down)->id, 3);
  EXPECT_EQ(s.query({12, 10}, Ray::Down)->id, 2);
  EXPECT_EQ(s.query({5, 10}, Ray::Down)->id, 1);
  EXPECT_EQ(s.query({20, 0}, Ray::Up)->id, 1);
  EXPECT_FALSE(s.query({20, 0}, Ray::Down));
  EXPECT_FALSE(s.query({20, 4}, Ray::Up));
}

TEST(HorizAugmented, RejectsOverlapsButAllowsTouching) {
  BlockStore store(8, 256);
  HorizRayShooter s(store, span(0, 40), tiny());
  s.insert(hs(1, 0, 10, 5));
  EXPECT_THROW(s.insert(hs(2, 9, 20, 5)), Fault);
  EXPECT_THROW(s.insert(hs(3, 2, 4, 5)), Fault);
  EXPECT_THROW(s.insert(hs(1, 20, 30, 6)), Fault);
  s.insert(hs(4, 10, 20, 5));
  EXPECT_EQ(s.query({10, 0}, Ray::Up)->id, 1);
  EXPECT_EQ(s.query({10, 9}, Ray::Down)->id, 1);
  EXPECT_FALSE(s.erase(2));
  EXPECT_TRUE(s.erase(1));
  EXPECT_EQ(s.query({10, 0}, Ray::Up)->id, 4);
}

TEST(HorizAugmented, FuzzMatchesOracle) {
  auto pool = touching_pool(600, 200, 3);
  BlockStore store(8, 256);
  HorizRayShooter s(store, span(0, 200), tiny());
  fuzz(s, pool, 200, 11, 3000, 50);
}

TEST(HorizAugmented, FuzzWithSizedGroupsAndRebuilds) {
  auto pool = touching_pool(3000, 4000, 5);
  HorizParams p;
  p.B = 8;
  BlockStore store(8, 512);
  HorizRayShooter s(store, span(0, 4000), p);
  fuzz(s, pool, 4000, 12, 6000, 500);
  EXPECT_GE(s.rebuilds(), 1u);
}

TEST(HorizLinear, AllShortSegmentsStayInLeaves) {
  BlockStore store(8, 256);
  HorizLinearRayShooter s(store, span(0, 63), tiny());
  s.insert(hs(1, 8, 10, 1));
  s.insert(hs(2, 12, 14, 2));
  EXPECT_EQ(s.middle().element_count(), 0u);
  EXPECT_EQ(s.winners(HorizLinearRayShooter::kRight).size(), 0u);
  EXPECT_EQ(s.query({9, 0})->id, 1);
  EXPECT_EQ(s.query({13, 0})->id, 2);
  EXPECT_FALSE(s.query({11, 0}));
}

TEST(HorizLinear, CutsAtTheLowestCommonNode) {
  BlockStore store(8, 256);
  HorizLinearRayShooter s(store, span(0, 63), tiny());
  // leaves of 4 coordinates, fanout 3: [0,11] is one level-1 node with
  // children [0,3] [4,7] [8,11]; 1..9 spans [4,7] only
  s.insert(hs(1, 1, 9, 3));
  EXPECT_EQ(s.middle().size(), 1u);
  EXPECT_EQ(s.winners(HorizLinearRayShooter::kLeft).size(), 1u);
  EXPECT_EQ(s.winners(HorizLinearRayShooter::kRight).size(), 1u);
  for (Coord x = 0; x <= 12; ++x) {
    auto h = s.query({x, 0});
    EXPECT_EQ(h.has_value(), x >= 1 && x <= 9) << x;
  }
  // adjacent children: no middle part
  s.insert(hs(2, 2, 5, 4));
  EXPECT_EQ(s.middle().size(), 1u);
  EXPECT_EQ(s.query({5, 4})->id, 2);
  EXPECT_TRUE(s.audit().empty());
}

TEST(HorizLinear, WinnerReplacedByLongerPiece) {
  BlockStore store(8, 256);
  HorizLinearRayShooter s(store, span(0, 63), tiny());
  s.insert(hs(1, 1, 5, 1));  // right piece in [4,7] reaching 5
  ASSERT_TRUE(s.winners(HorizLinearRayShooter::kRight).contains(1));
  s.insert(hs(2, 2, 7, 2));  // same block, reaches 7
  EXPECT_TRUE(s.winners(HorizLinearRayShooter::kRight).contains(2));
  EXPECT_FALSE(s.winners(HorizLinearRayShooter::kRight).contains(1));
  EXPECT_EQ(s.query({6, 0})->id, 2);
  EXPECT_EQ(s.query({5, 0})->id, 1);
  s.erase(2);
  EXPECT_TRUE(s.winners(HorizLinearRayShooter::kRight).contains(1));
  EXPECT_TRUE(s.audit().empty());
}

TEST(HorizLinear, FuzzMatchesOracle) {
  auto pool = touching_pool(600, 200, 4);
  BlockStore store(8, 256);
  HorizLinearRayShooter s(store, span(0, 200), tiny());
  fuzz(s, pool, 200, 13, 3000, 50);
}

TEST(HorizLinear, FuzzWithSizedBlocksAndRebuilds) {
  auto pool = touching_pool(3000, 4000, 6);
  HorizParams p;
  p.B = 8;
  BlockStore store(8, 512);
  HorizLinearRayShooter s(store, span(0, 4000), p);
  fuzz(s, pool, 4000, 14, 6000, 500);
  EXPECT_GE(s.rebuilds(), 1u);
}

TEST(HorizLinear, GeneratedWorkloadMatchesOracle) {
  Workload w = generate("random-horizontal", 1500, 8);
  HorizParams p;
  p.B = 16;
  BlockStore store(16, 16 * 16);
  HorizLinearRayShooter lin(store, w.universe(), p);
  HorizRayShooter aug(store, w.universe(), p);
  std::map<SegmentId, Segment> live;
  for (const Op& o : w.ops) {
    if (o.kind == Op::Insert) lin.insert(o.seg), aug.insert(o.seg), live[o.seg.id] = o.seg;
    else if (o.kind == Op::Delete) lin.erase(o.id), aug.erase(o.id), live.erase(o.id);
    else check_queries(lin, live, o.q), check_queries(aug, live, o.q);
  }
  EXPECT_TRUE(lin.audit().empty());
  EXPECT_TRUE(aug.audit().empty());
}

TEST(HorizSpace, LinearVariantBlocksGrowLinearly) {
  auto per_segment = [](std::size_t n) {
    auto pool = touching_pool(n, static_cast<Coord>(5 * n), 9);
    HorizParams p;
    p.B = 16;
    p.group = 3;
    BlockStore store(16, 16 * 64);
    HorizLinearRayShooter lin(store, span(0, static_cast<Coord>(5 * n)), p);
    for (const Segment& x : pool) lin.insert(x);
    EXPECT_LE(lin.middle().size(), n);
    return double(lin.block_count()) / double(n);
  };
  double small = per_segment(1000), large = per_segment(8000);
  EXPECT_LT(large, 1.25 * small);
}
