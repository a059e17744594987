#include <gtest/gtest.h>

#include <map>
#include <random>

#include "dpl/rayshoot_dynamic.hpp"
#include "dpl/workload.hpp"

using namespace dpl;

namespace {

RayParams small(std::size_t r, std::size_t d) {
  RayParams p;
  p.B = 16;
  p.r = r;
  p.d = d;
  p.leaf_size = 2;
  p.portion_leaf = 2;
  p.buffer_cap = 3;
  p.delete_threshold = 3;
  p.max_set = 2;
  return p;
}

// Replays w against the structure and the oracle; audits every `every` ops.
void replay(const Workload& w, RayParams p, std::size_t every, std::size_t initial = 0) {
  BlockStore store(p.B, 64 * p.B);
  std::vector<Segment> first;
  std::size_t k = 0;
  for (; k < w.ops.size() && first.size() < initial; ++k)
    if (w.ops[k].kind == Op::Insert) first.push_back(w.ops[k].seg);
  std::map<SegmentId, Segment> live;
  for (auto& s : first) live[s.id] = s;
  DynamicRayShooter ds(store, w.universe(), p, first);
  auto v = ds.audit();
  ASSERT_TRUE(v.empty()) << v.front();
  for (; k < w.ops.size(); ++k) {
    const Op& o = w.ops[k];
    if (o.kind == Op::Insert) {
      ds.insert(o.seg);
      live[o.seg.id] = o.seg;
    } else if (o.kind == Op::Delete) {
      ASSERT_EQ(ds.erase(o.id), live.erase(o.id) == 1) << "op " << k;
    } else {
      std::vector<Segment> segs;
      for (auto& [id, s] : live) segs.push_back(s);
      auto got = ds.query(o.q);
      auto want = oracle_successor(o.q, segs);
      ASSERT_EQ(got.has_value(), want.has_value()) << "op " << k << " at " << o.q.x << "," << o.q.y;
      if (got) ASSERT_EQ(got->id, want->id) << "op " << k << " at " << o.q.x << "," << o.q.y;
    }
    if (every && k % every == 0) {
      auto a = ds.audit();
      ASSERT_TRUE(a.empty()) << "op " << k << ": " << a.front();
    }
  }
  EXPECT_EQ(ds.size(), live.size());
  auto a = ds.audit();
  ASSERT_TRUE(a.empty()) << a.front();
}

}  // namespace

TEST(GeneralDynamic, StaticStartMatchesOracle) {
  Workload w = mixed_ops(band_pool(300, 5, 16, 600), 300, 3.0, 0.0, 5);
  replay(w, small(3, 16), 0, 300);
}

TEST(GeneralDynamic, InsertOnlyMatchesOracle) {
  Workload w = mixed_ops(band_pool(400, 7, 16, 800), 400, 1.0, 0.0, 7);
  replay(w, small(3, 16), 25);
}

TEST(GeneralDynamic, MixedOpsMatchOracle) {
  for (std::uint64_t seed : {1, 2, 3}) {
    Workload w = mixed_ops(band_pool(500, seed, 16, 900), 500, 1.0, 0.3, seed);
    replay(w, small(3, 16), 50);
  }
}

TEST(GeneralDynamic, MixedOpsWithInitialSet) {
  Workload w = mixed_ops(band_pool(600, 11, 8, 900), 600, 1.0, 0.4, 11);
  replay(w, small(4, 32), 50, 200);
}

TEST(GeneralDynamic, AdversarialReorder) {
  replay(adversarial_reorder(64, 3), small(3, 16), 20);
}

TEST(GeneralDynamic, DefaultParameters) {
  Workload w = generate("random-general", 1500, 9);
  RayParams p;
  p.B = 64;
  replay(w, p, 250);
}

TEST(GeneralDynamic, BuffersStayUnderCapsAndBridgesGetRemoved) {
  Workload w = mixed_ops(band_pool(1500, 4, 16, 2400), 1500, 0.0, 0.5, 4);
  RayParams p = small(3, 16);
  BlockStore store(p.B, 64 * p.B);
  std::vector<Segment> first;
  std::size_t k = 0;
  for (; first.size() < 750; ++k)
    if (w.ops[k].kind == Op::Insert) first.push_back(w.ops[k].seg);
  DynamicRayShooter ds(store, w.universe(), p, first);
  for (; k < w.ops.size(); ++k) {
    const Op& o = w.ops[k];
    if (o.kind == Op::Insert) ds.insert(o.seg);
    else if (o.kind == Op::Delete) ds.erase(o.id);
  }
  const DynamicStats& st = ds.stats();
  EXPECT_GT(st.flushes, 0u);
  EXPECT_GT(st.bridge_removals, 0u);
  EXPECT_GT(st.global_rebuilds, 1u);
  EXPECT_LE(st.max_buffer, ds.params().buffer_cap);
  EXPECT_LE(st.max_deletes, ds.params().delete_threshold);
  auto a = ds.audit();
  EXPECT_TRUE(a.empty()) << a.front();
}

TEST(GeneralDynamic, RejectsForeignCoordinatesAndDuplicates) {
  BlockStore store(16, 1024);
  DynamicRayShooter ds(store, {0, 10, 20}, small(3, 16));
  ds.insert(make_segment(1, {0, 0}, {10, 1}));
  EXPECT_THROW(ds.insert(make_segment(2, {0, 5}, {15, 5})), Fault);
  EXPECT_THROW(ds.insert(make_segment(1, {10, 5}, {20, 5})), Fault);
  EXPECT_FALSE(ds.erase(7));
  EXPECT_TRUE(ds.erase(1));
  EXPECT_FALSE(ds.query({5, -3}).has_value());
}
