#include <gtest/gtest.h>

#include <sstream>

#include "dpl/workload.hpp"

using namespace dpl;

namespace {

// Replays the inserts and deletes, checking each insert against the live set.
bool replay_valid(const Workload& w) {
  std::vector<Segment> live;
  for (const Op& o : w.ops) {
    if (o.kind == Op::Insert) {
      if (!validate_insert(o.seg, live)) return false;
      live.push_back(o.seg);
    } else if (o.kind == Op::Delete) {
      auto it = std::find_if(live.begin(), live.end(), [&](const Segment& s) { return s.id == o.id; });
      if (it == live.end()) return false;
      live.erase(it);
    }
  }
  return true;
}

}  // namespace

TEST(Workload, StaircaseIsNested) {
  Workload w = generate("staircase", 3, 1);
  ASSERT_EQ(w.ops.size(), 3u);
  for (std::size_t k = 1; k < 3; ++k) {
    EXPECT_LT(w.ops[k].seg.left.x, w.ops[k - 1].seg.left.x);
    EXPECT_GT(w.ops[k].seg.right.x, w.ops[k - 1].seg.right.x);
  }
}

TEST(Workload, SameSeedSameBytes) {
  for (const char* kind : {"random-general", "random-horizontal", "staircase", "adversarial-reorder"})
    EXPECT_EQ(generate(kind, 300, 9).to_text(), generate(kind, 300, 9).to_text()) << kind;
}

TEST(Workload, GeneratedInsertsNeverCross) {
  EXPECT_TRUE(replay_valid(generate("random-general", 1 << 12, 3)));
  EXPECT_TRUE(replay_valid(generate("random-horizontal", 2000, 4)));
  EXPECT_TRUE(replay_valid(generate("adversarial-reorder", 200, 5)));
}

TEST(Workload, HorizontalKindIsHorizontal) {
  for (const Op& o : generate("random-horizontal", 500, 2).ops)
    if (o.kind == Op::Insert) EXPECT_EQ(o.seg.left.y, o.seg.right.y);
}

TEST(Workload, TextRoundTrip) {
  Workload w = generate("random-general", 200, 6);
  std::istringstream in(w.to_text());
  Workload back = Workload::parse(in);
  EXPECT_EQ(back.to_text(), w.to_text());
  EXPECT_EQ(back.header.at("kind"), "random-general");
}

TEST(Workload, ParseErrorsNameTheLine) {
  std::istringstream in("I 0 0 4 4\nQ 1\n");
  try {
    Workload::parse(in);
    FAIL();
  } catch (const Fault& f) {
    EXPECT_NE(std::string(f.what()).find("line 2"), std::string::npos);
  }
  std::istringstream d("D 1\n");
  EXPECT_THROW(Workload::parse(d), Fault);
  std::istringstream v("I 3 0 3 5\n");
  EXPECT_THROW(Workload::parse(v), Fault);
}
