#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dpl/rayshoot_static.hpp"
#include "test_support.hpp"

using namespace dpl;

namespace {

RayParams small(std::size_t B, std::size_t r, std::size_t d) {
  RayParams p;
  p.B = B;
  p.r = r;
  p.d = d;
  p.leaf_size = 2;
  p.portion_leaf = 2;
  return p;
}

Point random_query(std::mt19937_64& rng, Coord box) {
  return {Coord(rng() % (box + 1)), Coord(rng() % (box + 3)) - 1};
}

void expect_matches_oracle(const std::vector<Segment>& segs, RayParams p, std::uint64_t seed, Coord box, int queries) {
  BlockStore store(64, 64 * 64);
  StaticRayShooter s(store, segs, p);
  auto v = s.audit();
  ASSERT_TRUE(v.empty()) << v.front();
  std::mt19937_64 rng(seed);
  for (int i = 0; i < queries; ++i) {
    Point q = random_query(rng, box);
    if (!s.tree().leaf_of(q.x)) continue;
    auto got = s.query(q);
    auto want = oracle_successor(q, segs);
    ASSERT_EQ(got.has_value(), want.has_value()) << q.x << "," << q.y;
    if (got) ASSERT_EQ(got->id, want->id) << q.x << "," << q.y;
  }
}

}  // namespace

TEST(SlabTree, AssignmentCoversEachSegmentOnce) {
  auto segs = fixtures::random_segments(200, 3, 100);
  std::vector<Coord> xs;
  for (auto& s : segs) xs.push_back(s.left.x), xs.push_back(s.right.x);
  SlabTree t(xs, 2, 3);
  for (Coord x = 0; x <= 100; ++x) {
    if (!t.leaf_of(x)) continue;
    for (auto& s : segs) {
      if (!spans_x(s, x)) continue;
      // exactly one node on the path to x stores s, as a spanned child or a leaf
      int hits = 0;
      auto path = t.path(x);
      for (auto& a : t.assign(s)) {
        for (std::size_t k = 0; k < path.size(); ++k) {
          if (a.node != path[k]) continue;
          if (a.leaf) ++hits;
          else {
            std::size_t j = t.node(path[k + 1]).index_in_parent;
            if (a.f <= j && j <= a.l) ++hits;
          }
        }
      }
      ASSERT_EQ(hits, 1) << "segment " << s.id << " x=" << x;
    }
  }
}

TEST(SlabTree, RejectsEndpointOutsideUniverse) {
  SlabTree t({0, 4, 8}, 2, 2);
  EXPECT_THROW(t.assign(make_segment(1, {0, 0}, {5, 0})), Fault);
}

TEST(Catalog, GreedyBridgesKeepGapsBelowD) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto segs = fixtures::random_segments(300, seed, 200);
    BlockStore store(64, 64 * 64);
    StaticRayShooter s(store, segs, small(64, 3, 10));
    auto v = s.audit();
    EXPECT_TRUE(v.empty()) << v.front();
    auto lw = s.level_weights();
    for (Weight w : lw) EXPECT_LE(w, Weight(s.leaf_total()) * (1 + 1e-12L));
  }
}

TEST(GeneralStatic, MatchesOracleSmall) {
  for (auto [r, d] : {std::pair{2, 4}, std::pair{3, 5}, std::pair{4, 16}, std::pair{2, 16}})
    expect_matches_oracle(fixtures::random_segments(150, r * 7 + d, 60), small(64, r, d), r + d, 60, 1500);
}

TEST(GeneralStatic, MatchesOracleDefaults) {
  RayParams p;
  p.B = 64;
  expect_matches_oracle(fixtures::random_segments(600, 11, 400), p, 5, 400, 1000);
}

TEST(GeneralStatic, AllSegmentsSpanTheRoot) {
  // stacked horizontals over the whole universe: everything sits at the root
  std::vector<Segment> segs;
  for (int i = 0; i < 50; ++i) segs.push_back(make_segment(i + 1, {0, 2 * i}, {100, 2 * i}));
  RayParams p = small(64, 2, 4);
  p.universe = {10, 20, 30, 40, 50, 60, 70, 80, 90};
  BlockStore store(64, 64 * 64);
  StaticRayShooter s(store, segs, p);
  EXPECT_TRUE(s.audit().empty());
  for (int y = -1; y < 100; y += 3) {
    auto got = s.query({55, y});
    auto want = oracle_successor({55, y}, segs);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (got) EXPECT_EQ(got->id, want->id);
  }
}

TEST(GeneralStatic, OneSegmentPerLeafSlab) {
  std::vector<Segment> segs;
  for (int i = 0; i < 32; ++i) segs.push_back(make_segment(i + 1, {4 * i, i}, {4 * i + 2, i + 1}));
  expect_matches_oracle(segs, small(64, 2, 4), 3, 130, 2000);
}

TEST(GeneralStatic, TraceTelescopes) {
  auto segs = fixtures::random_segments(800, 21, 500);
  RayParams p;
  p.B = 64;
  BlockStore store(64, 64 * 64);
  StaticRayShooter s(store, segs, p);
  auto rp = s.params();
  std::mt19937_64 rng(4);
  double logr = std::log(double(rp.r)) / std::log(double(rp.B));
  for (int i = 0; i < 500; ++i) {
    Point q = random_query(rng, 500);
    if (!s.tree().leaf_of(q.x)) continue;
    RayTrace tr;
    s.query(q, &tr);
    ASSERT_EQ(tr.W.size(), s.height() + 1);
    EXPECT_EQ(tr.omega_violations, 0u);
    // only the telescoping part; the per-step d/r factor is examined in acceptance
    double bound = std::log(tr.W[0]) / std::log(double(rp.B)) + 2.0 * (s.height() + 1) * logr * 2 + 1;
    EXPECT_LE(tr.cost(double(rp.B)), bound);
  }
}

TEST(GeneralStatic, CorruptedTableIsReported) {
  auto segs = fixtures::random_segments(300, 8, 200);
  BlockStore store(64, 64 * 64);
  StaticRayShooter s(store, segs, small(64, 3, 10));
  ASSERT_TRUE(s.audit().empty());
  bool done = false;
  for (std::uint32_t u = 0; u < s.tree().size() && !done; ++u) done = s.corrupt_table(u);
  ASSERT_TRUE(done);
  EXPECT_FALSE(s.audit().empty());
}
