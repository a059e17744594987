#include <gtest/gtest.h>

#include <map>

#include "dpl/baseline.hpp"
#include "dpl/workload.hpp"

using namespace dpl;

TEST(SegmentBTree, KeepsVerticalOrderThroughSplitsAndDeletes) {
  BlockStore store(4, 64);
  SegmentBTree t(store, 4);
  auto less = [](const Segment& a, const Segment& b) { return a.id != b.id && compare_segments(a, b) == Order::first_below; };
  std::vector<Segment> segs;
  for (Coord k = 0; k < 200; ++k) segs.push_back(make_segment(static_cast<SegmentId>(k + 1), {0, (k * 37) % 200}, {10, (k * 37) % 200}));
  for (auto& s : segs) t.insert(s, less);
  EXPECT_EQ(t.size(), 200u);
  for (Coord y = -1; y <= 200; y += 7) {
    auto hit = t.first_where([&](const Segment& s) { return compare_y(s, 5, y) >= 0; });
    if (y >= 200) EXPECT_FALSE(hit);
    else ASSERT_EQ(hit->left.y, std::max<Coord>(y, 0));
  }
  for (std::size_t k = 0; k < segs.size(); k += 2) EXPECT_TRUE(t.erase(segs[k], less));
  EXPECT_FALSE(t.erase(segs[0], less));
  for (Coord y = 0; y < 200; ++y) {
    auto hit = t.first_where([&](const Segment& s) { return compare_y(s, 5, y) >= 0; });
    auto want = oracle_successor({5, y}, std::vector<Segment>(segs.begin(), segs.end()));
    // only odd-indexed segments survive
    std::vector<Segment> live;
    for (std::size_t k = 1; k < segs.size(); k += 2) live.push_back(segs[k]);
    want = oracle_successor({5, y}, live);
    ASSERT_EQ(hit.has_value(), want.has_value());
    if (hit) ASSERT_EQ(hit->id, want->id);
  }
}

TEST(Baseline, MixedOpsMatchOracle) {
  Workload w = generate("random-general", 1200, 21);
  RayParams p;
  p.B = 32;
  BlockStore store(32, 32 * 16);
  BaselineRayShooter b(store, w.universe(), p);
  std::map<SegmentId, Segment> live;
  for (const Op& o : w.ops) {
    if (o.kind == Op::Insert) b.insert(o.seg), live[o.seg.id] = o.seg;
    else if (o.kind == Op::Delete) ASSERT_EQ(b.erase(o.id), live.erase(o.id) == 1);
    else {
      std::vector<Segment> segs;
      for (auto& [id, s] : live) segs.push_back(s);
      auto got = b.query(o.q);
      auto want = oracle_successor(o.q, segs);
      ASSERT_EQ(got.has_value(), want.has_value());
      if (got) ASSERT_EQ(got->id, want->id);
    }
  }
  EXPECT_EQ(b.size(), live.size());
}
