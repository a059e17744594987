#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dpl/biased_tree.hpp"

using namespace dpl;

namespace {

struct Empty {};
using Forest = BiasedForest<int, Empty>;
using Entry = Forest::Entry;

std::vector<Entry> unit_entries(int n, Weight w = 1) {
  std::vector<Entry> out;
  for (int i = 0; i < n; ++i) out.push_back({i, w});
  return out;
}

std::vector<int> items(const Forest& f, NodeId root) {
  std::vector<int> out;
  for (const auto& e : f.entries(root)) out.push_back(e.item);
  return out;
}

void expect_clean(const Forest& f, NodeId root) {
  auto v = f.audit(root);
  EXPECT_TRUE(v.empty()) << (v.empty() ? "" : v.front());
}

}  // namespace

TEST(BiasedTree, RejectsTooNarrowFanout) {
  BlockStore store(8, 64);
  EXPECT_THROW((Forest(store, {2, 3, 4})), Fault);
}

TEST(BiasedTree, EmptyBuild) {
  BlockStore store(8, 64);
  Forest f(store, {2, 4, 4});
  NodeId root = f.build({});
  EXPECT_EQ(root, kNil);
  EXPECT_FALSE(f.descend(root, [](NodeId) { return std::size_t{0}; }).has_value());
}

TEST(BiasedTree, UniformDepthWithinBound) {
  BlockStore store(8, 64);
  for (auto p : {BiasedParams{2, 4, 4}, BiasedParams{4, 8, 4}}) {
    Forest f(store, p);
    NodeId root = f.build(unit_entries(4096));
    expect_clean(f, root);
    std::size_t leaves = f.leaves(root).size();
    for (NodeId l : f.leaves(root))
      EXPECT_LE(f.depth(l), std::log(double(leaves)) / std::log(double(p.a)) + 2 + 1e-9);
    EXPECT_EQ(items(f, root).size(), 4096u);
  }
}

TEST(BiasedTree, HeavyItemSitsNearRoot) {
  BlockStore store(8, 64);
  Forest f(store, {2, 4, 1});
  auto e = unit_entries(1000);
  e[617].weight = std::ldexp(1.0L, 30);
  NodeId root = f.build(e);
  expect_clean(f, root);
  for (NodeId l : f.leaves(root))
    if (f.node(l).entries.front().item == 617) EXPECT_LE(f.depth(l), 2u);
}

TEST(BiasedTree, LeafOrderMatchesInput) {
  BlockStore store(8, 64);
  Forest f(store, {2, 4, 3});
  std::mt19937_64 rng(1);
  std::vector<Entry> e;
  for (int i = 0; i < 500; ++i) e.push_back({i, Weight(rng() % 4 == 0 ? 0 : rng() % 1000)});
  NodeId root = f.build(e);
  expect_clean(f, root);
  std::vector<int> want(500);
  for (int i = 0; i < 500; ++i) want[i] = i;
  EXPECT_EQ(items(f, root), want);
}

TEST(BiasedTree, DescendLeftmostAndByScan) {
  BlockStore store(8, 64);
  Forest f(store, {2, 4, 2});
  NodeId root = f.build(unit_entries(300));
  auto left = f.descend(root, [](NodeId) { return std::size_t{0}; });
  ASSERT_TRUE(left);
  EXPECT_EQ(f.node(*left).entries.front().item, 0);
  // route to the leaf holding `target` using per-child max item
  for (int target : {0, 1, 57, 150, 299}) {
    auto got = f.descend(root, [&](NodeId u) -> std::optional<std::size_t> {
      const auto& kids = f.node(u).kids;
      for (std::size_t i = 0; i < kids.size(); ++i)
        if (f.entries(kids[i]).back().item >= target) return i;
      return std::nullopt;
    });
    ASSERT_TRUE(got);
    bool found = false;
    for (const auto& e : f.node(*got).entries) found |= e.item == target;
    EXPECT_TRUE(found) << target;
  }
}

TEST(BiasedTree, DescendChargesAtMostDepthPlusOneBlocks) {
  BlockStore store(8, 16);
  Forest f(store, {2, 4, 4});
  NodeId root = f.build(unit_entries(2000));
  for (NodeId l : f.leaves(root)) {
    store.clear_cache();
    IoStats before = store.stats();
    NodeId at = l;
    std::vector<NodeId> path;
    for (NodeId u = l; u != kNil; u = f.node(u).parent) path.push_back(u);
    std::size_t k = path.size() - 1;
    auto got = f.descend(root, [&](NodeId u) -> std::optional<std::size_t> {
      const auto& kids = f.node(u).kids;
      --k;
      return std::find(kids.begin(), kids.end(), path[k]) - kids.begin();
    });
    ASSERT_EQ(got, at);
    EXPECT_LE((store.stats() - before).reads, f.depth(l) + 1);
  }
}

TEST(BiasedTree, UnchangedWeightsReportNothing) {
  BlockStore store(8, 64);
  Forest f(store, {2, 4, 4});
  NodeId root = f.build(unit_entries(40));
  NodeId l = f.leaves(root)[3];
  auto same = f.node(l).entries;
  EXPECT_TRUE(f.update_leaf(root, l, same).empty());
}

TEST(BiasedTree, OverflowSplitsExactlyOneLeaf) {
  BlockStore store(8, 64);
  Forest f(store, {2, 4, 4});
  NodeId root = f.build(unit_entries(40));
  NodeId l = f.leaves(root)[2];
  auto e = f.node(l).entries;
  while (e.size() <= 8) e.push_back({1000 + int(e.size()), 1});
  auto rep = f.update_leaf(root, l, e);
  EXPECT_EQ(rep.leaf_splits, 1u);
  expect_clean(f, rep.root);
  EXPECT_EQ(items(f, rep.root).size(), 40u + e.size() - 4);
}

TEST(BiasedTree, RandomWeightUpdatesKeepInvariant) {
  BlockStore store(8, 64);
  Forest f(store, {2, 4, 4});
  NodeId root = f.build(unit_entries(400));
  std::mt19937_64 rng(3);
  std::vector<int> want = items(f, root);
  for (int step = 0; step < 10000; ++step) {
    auto ls = f.leaves(root);
    NodeId l = ls[rng() % ls.size()];
    auto e = f.node(l).entries;
    for (auto& x : e) x.weight = (rng() % 5 == 0) ? 0 : std::ldexp(1.0L, int(rng() % 40));
    auto rep = f.update_leaf(root, l, e);
    root = rep.root;
    auto v = f.audit(root);
    ASSERT_TRUE(v.empty()) << step << ": " << v.front();
  }
  EXPECT_EQ(items(f, root), want);
}

TEST(BiasedTree, RandomInsertDeleteKeepsOrderAndInvariant) {
  BlockStore store(8, 64);
  Forest f(store, {3, 6, 4});
  NodeId root = f.build(unit_entries(50));
  std::vector<int> want = items(f, root);
  std::mt19937_64 rng(4);
  int next = 1000;
  for (int step = 0; step < 3000 && root != kNil; ++step) {
    auto ls = f.leaves(root);
    NodeId l = ls[rng() % ls.size()];
    auto e = f.node(l).entries;
    int first = e.front().item;
    auto pos = std::find(want.begin(), want.end(), first) - want.begin();
    if (rng() % 2) {
      std::size_t at = rng() % (e.size() + 1);
      Weight w = Weight(rng() % 3);
      e.insert(e.begin() + at, {next, w});
      want.insert(want.begin() + pos + at, next++);
    } else {
      std::size_t at = rng() % e.size();
      e.erase(e.begin() + at);
      want.erase(want.begin() + pos + at);
    }
    root = f.update_leaf(root, l, e).root;
    auto v = f.audit(root);
    ASSERT_TRUE(v.empty()) << step << ": " << v.front();
    ASSERT_EQ(items(f, root), want);
  }
}

TEST(BiasedTree, SplitAtMedianAndConcatBack) {
  BlockStore store(8, 64);
  Forest f(store, {2, 4, 1});
  NodeId root = f.build(unit_entries(1024));
  auto before = items(f, root);
  NodeId mid = f.leaves(root)[512];
  auto [l, r] = f.split(root, mid, 0);
  EXPECT_EQ(f.leaves(l).size(), 512u);
  EXPECT_EQ(f.leaves(r).size(), 512u);
  expect_clean(f, l);
  expect_clean(f, r);
  NodeId back = f.concat(l, r);
  expect_clean(f, back);
  EXPECT_EQ(items(f, back), before);
}

TEST(BiasedTree, SplitInsideLeaf) {
  BlockStore store(8, 64);
  Forest f(store, {2, 4, 4});
  NodeId root = f.build(unit_entries(20));
  NodeId leaf = f.leaves(root)[2];  // items 8..11
  auto [l, r] = f.split(root, leaf, 1);
  EXPECT_EQ(items(f, l).back(), 8);
  EXPECT_EQ(items(f, r).front(), 9);
}

TEST(BiasedTree, RandomSplitConcatKeepsInvariant) {
  BlockStore store(8, 64);
  Forest f(store, {2, 4, 4});
  std::mt19937_64 rng(5);
  std::vector<Entry> e;
  for (int i = 0; i < 600; ++i) e.push_back({i, std::ldexp(1.0L, int(rng() % 20))});
  std::vector<NodeId> trees{f.build(e)};
  for (int op = 0; op < 1000; ++op) {
    if (trees.size() > 1 && rng() % 2) {
      std::size_t i = rng() % (trees.size() - 1);
      NodeId c = f.concat(trees[i], trees[i + 1]);
      trees.erase(trees.begin() + i, trees.begin() + i + 2);
      trees.insert(trees.begin() + i, c);
    } else {
      std::size_t i = rng() % trees.size();
      auto ls = f.leaves(trees[i]);
      NodeId leaf = ls[rng() % ls.size()];
      auto [a, b] = f.split(trees[i], leaf, rng() % (f.node(leaf).entries.size() + 1));
      trees.erase(trees.begin() + i);
      if (b != kNil) trees.insert(trees.begin() + i, b);
      if (a != kNil) trees.insert(trees.begin() + i, a);
    }
    std::vector<int> all;
    for (NodeId t : trees) {
      auto v = f.audit(t);
      ASSERT_TRUE(v.empty()) << op << ": " << v.front();
      auto it = items(f, t);
      all.insert(all.end(), it.begin(), it.end());
    }
    ASSERT_EQ(all.size(), 600u);
    for (int i = 0; i < 600; ++i) ASSERT_EQ(all[i], i);
  }
}

TEST(BiasedTree, ZeroWeightTreesStayShallow) {
  BlockStore store(8, 64);
  Forest f(store, {2, 4, 2});
  NodeId root = f.build(unit_entries(2, 0));
  for (int i = 0; i < 200; ++i) root = f.concat(root, f.build(unit_entries(2, 0)));
  std::size_t deepest = 0;
  for (NodeId l : f.leaves(root)) deepest = std::max(deepest, f.depth(l));
  EXPECT_LE(deepest, 12u);
  expect_clean(f, root);
}
