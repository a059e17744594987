#include <gtest/gtest.h>

#include <random>

#include "dpl/geometry.hpp"
#include "test_support.hpp"

using namespace dpl;

namespace {

Segment seg(SegmentId id, Coord x1, Coord y1, Coord x2, Coord y2) { return make_segment(id, {x1, y1}, {x2, y2}); }

// Every comparable pair must appear in the order compare_segments dictates.
bool is_valid_extension(const std::vector<Segment>& segs, const std::vector<std::size_t>& order) {
  std::vector<std::size_t> pos(segs.size());
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
  for (std::size_t i = 0; i < segs.size(); ++i)
    for (std::size_t j = 0; j < segs.size(); ++j) {
      if (i == j) continue;
      if (compare_segments(segs[i], segs[j]) == Order::first_below && pos[i] > pos[j]) return false;
    }
  return true;
}

}  // namespace

TEST(SideOf, Examples) {
  EXPECT_EQ(side_of(seg(1, 0, 0, 10, 0), {5, 3}), Side::above);
  EXPECT_EQ(side_of(seg(1, 0, 0, 4, 8), {2, 4}), Side::on);
  // (4,8) x (3,1) = 4*1 - 8*3 = -20
  EXPECT_EQ(side_of(seg(1, 0, 0, 4, 8), {3, 1}), Side::below);
  EXPECT_THROW(side_of(seg(1, 0, 0, 4, 8), {5, 1}), Fault);
}

TEST(Segment, VerticalAndOutOfRangeRejected) {
  EXPECT_THROW(seg(1, 3, 0, 3, 9), Fault);
  EXPECT_THROW(seg(1, 0, 0, kCoordLimit, 1), Fault);
  Segment s = seg(2, 9, 1, 1, 5);
  EXPECT_EQ(s.left, (Point{1, 5}));
}

TEST(CompareSegments, Examples) {
  EXPECT_EQ(compare_segments(seg(1, 0, 0, 10, 0), seg(2, 0, 5, 10, 5)), Order::first_below);
  // at x=3: s1 has y=6, s2 has y=1
  EXPECT_EQ(compare_segments(seg(1, 0, 0, 4, 8), seg(2, 2, 1, 10, 1)), Order::second_below);
  EXPECT_EQ(compare_segments(seg(1, 0, 0, 2, 0), seg(2, 5, 0, 9, 0)), Order::incomparable);
  EXPECT_THROW(compare_segments(seg(1, 0, 0, 10, 10), seg(2, 0, 10, 10, 0)), Fault);
  EXPECT_THROW(compare_segments(seg(1, 0, 0, 10, 0), seg(2, 5, 0, 15, 0)), Fault);
}

TEST(CompareSegments, AntisymmetricAndTransitiveOnALine) {
  auto segs = fixtures::random_segments(60, 11);
  for (const auto& a : segs)
    for (const auto& b : segs) {
      if (a.id == b.id) continue;
      Order ab = compare_segments(a, b), ba = compare_segments(b, a);
      if (ab == Order::first_below) EXPECT_EQ(ba, Order::second_below);
      if (ab == Order::incomparable) EXPECT_EQ(ba, Order::incomparable);
    }
  for (Coord x = 1; x < 64; x += 3) {
    std::vector<Segment> line;
    for (const auto& s : segs)
      if (s.left.x < x && x < s.right.x) line.push_back(s);
    for (const auto& a : line)
      for (const auto& b : line)
        for (const auto& c : line)
          if (a.id != b.id && b.id != c.id && compare_segments(a, b) == Order::first_below && compare_segments(b, c) == Order::first_below)
            EXPECT_EQ(compare_segments(a, c), Order::first_below);
  }
}

TEST(CompareSegments, TranslationInvariant) {
  auto segs = fixtures::random_segments(40, 5);
  const Coord t = Coord{1} << 20;
  for (const auto& a : segs)
    for (const auto& b : segs) {
      if (a.id == b.id) continue;
      Segment a2 = seg(a.id, a.left.x + t, a.left.y - t, a.right.x + t, a.right.y - t);
      Segment b2 = seg(b.id, b.left.x + t, b.left.y - t, b.right.x + t, b.right.y - t);
      EXPECT_EQ(compare_segments(a, b), compare_segments(a2, b2));
    }
}

TEST(OrderMultislab, ChainSortedByY) {
  std::vector<Segment> segs;
  for (int i = 0; i < 10; ++i) segs.push_back(seg(i, 0, (i * 7) % 10 * 3, 100, (i * 7) % 10 * 3 + 1));
  auto order = order_multislab(segs);
  for (std::size_t i = 1; i < order.size(); ++i)
    EXPECT_LT(segs[order[i - 1]].left.y, segs[order[i]].left.y);
}

TEST(OrderMultislab, RandomInstancesAreValidExtensions) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto segs = fixtures::random_segments(50, seed);
    EXPECT_TRUE(is_valid_extension(segs, order_multislab(segs))) << seed;
    EXPECT_TRUE(is_valid_extension(segs, order_multislab_quadratic(segs))) << seed;
  }
}

TEST(OrderMultislab, ReorderAfterDeleteInsertStaysValid) {
  // A staircase whose order is forced through one long segment; replacing it
  // rotates the order of most of the others.
  std::vector<Segment> segs;
  for (int i = 0; i < 8; ++i) segs.push_back(seg(i + 1, 10 * i, 100 - 10 * i, 10 * i + 8, 100 - 10 * i));
  segs.push_back(seg(100, 0, 0, 80, 0));
  auto before = order_multislab(segs);
  EXPECT_TRUE(is_valid_extension(segs, before));
  segs.pop_back();
  segs.push_back(seg(101, 0, 200, 80, 200));
  auto after = order_multislab(segs);
  EXPECT_TRUE(is_valid_extension(segs, after));
}

TEST(OrderMultislab, CycleFromCrossingInputFaults) {
  std::vector<Segment> segs{seg(1, 0, 0, 10, 10), seg(2, 0, 10, 10, 0)};
  EXPECT_THROW(order_multislab_quadratic(segs), Fault);
}

TEST(OracleSuccessor, Basics) {
  std::vector<Segment> none;
  EXPECT_FALSE(oracle_successor({1, 1}, none).has_value());
  std::vector<Segment> one{seg(7, 0, 5, 10, 5)};
  EXPECT_EQ(oracle_successor({4, 3}, one)->id, 7);
  EXPECT_EQ(oracle_successor({4, 5}, one)->id, 7);  // closed ray
  EXPECT_FALSE(oracle_successor({4, 6}, one).has_value());
  EXPECT_FALSE(oracle_successor({11, 0}, one).has_value());
}

TEST(OracleSuccessor, SharedEndpointTieGoesToSmallerId) {
  std::vector<Segment> segs{seg(9, 0, 10, 5, 5), seg(4, 5, 5, 10, 12)};
  EXPECT_EQ(oracle_successor({5, 0}, segs)->id, 4);
  EXPECT_EQ(oracle_predecessor({5, 20}, segs)->id, 4);
}

TEST(OracleSuccessor, MirrorsPredecessorUnderReflection) {
  auto segs = fixtures::random_segments(200, 3);
  std::vector<Segment> flipped;
  for (const auto& s : segs) flipped.push_back(seg(s.id, s.left.x, -s.left.y, s.right.x, -s.right.y));
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<Coord> c(0, 64);
  for (int i = 0; i < 100; ++i) {
    Point q{c(rng), c(rng)};
    auto up = oracle_successor(q, segs);
    auto down = oracle_predecessor({q.x, -q.y}, flipped);
    ASSERT_EQ(up.has_value(), down.has_value());
    if (up) EXPECT_EQ(up->id, down->id);
  }
}

TEST(ValidateInsert, Examples) {
  std::vector<Segment> live{seg(1, 0, 0, 10, 0)};
  EXPECT_TRUE(validate_insert(seg(2, 20, 0, 30, 5), live));
  EXPECT_FALSE(validate_insert(seg(3, 5, -5, 6, 5), live));
  EXPECT_TRUE(validate_insert(seg(4, 10, 0, 20, 9), live));
  EXPECT_TRUE(validate_insert(seg(5, 5, 0, 8, 9), live));  // T-junction
  EXPECT_FALSE(validate_insert(seg(6, 5, 0, 15, 0), live));  // collinear overlap
}
