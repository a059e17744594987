#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "dpl/io_model.hpp"

using dpl::BlockId;
using dpl::BlockStore;
using dpl::IoStats;

namespace {

// Reference LRU: counts misses with a deque, front = most recent.
std::uint64_t reference_misses(const std::vector<BlockId>& seq, std::size_t frames) {
  std::deque<BlockId> cache;
  std::uint64_t misses = 0;
  for (BlockId id : seq) {
    auto it = std::find(cache.begin(), cache.end(), id);
    if (it != cache.end()) {
      cache.erase(it);
    } else {
      ++misses;
      if (cache.size() == frames) cache.pop_back();
    }
    cache.push_front(id);
  }
  return misses;
}

}  // namespace

TEST(BlockStore, AllocReturnsFreshIds) {
  BlockStore store(4, 16);
  BlockId a = store.alloc(), b = store.alloc();
  EXPECT_NE(a, b);
}

TEST(BlockStore, ColdTouchIsAMiss) {
  BlockStore store(4, 16);
  BlockId a = store.alloc();
  store.touch(a);
  EXPECT_EQ(store.stats().reads, 1u);
}

TEST(BlockStore, AllocationIsFree) {
  BlockStore store(4, 16);
  ASSERT_EQ(store.frame_count(), 4u);
  for (int i = 0; i < 100; ++i) store.alloc();
  EXPECT_EQ(store.stats(), (IoStats{0, 0, 0}));
}

TEST(BlockStore, LruOrder) {
  BlockStore store(4, 8);
  ASSERT_EQ(store.frame_count(), 2u);
  BlockId a = store.alloc(), b = store.alloc(), c = store.alloc();
  store.touch(a);
  store.touch(b);
  store.touch(a);
  store.touch(c);
  EXPECT_EQ(store.stats().reads, 3u);
  EXPECT_TRUE(store.is_resident(a));
  EXPECT_FALSE(store.is_resident(b));
  EXPECT_TRUE(store.is_resident(c));
}

TEST(BlockStore, DirtyEvictionWritesBack) {
  BlockStore store(4, 8);
  BlockId a = store.alloc(), b = store.alloc(), c = store.alloc();
  store.touch(a, true);
  store.touch(b);
  store.touch(c);  // evicts a
  EXPECT_EQ(store.stats().writes, 1u);
  store.touch(b);
  store.touch(a);  // evicts c (clean)
  EXPECT_EQ(store.stats().writes, 1u);
}

TEST(BlockStore, ResidentTouchesAreHits) {
  BlockStore store(4, 16);
  BlockId a = store.alloc();
  for (int i = 0; i < 1000; ++i) store.touch(a);
  EXPECT_EQ(store.stats().reads, 1u);
  EXPECT_EQ(store.stats().accesses, 1000u);
}

TEST(BlockStore, StatsResetKeepsResidency) {
  BlockStore store(4, 16);
  EXPECT_EQ(store.stats(), (IoStats{0, 0, 0}));
  BlockId a = store.alloc();
  store.touch(a, true);
  EXPECT_EQ(store.stats().reads, 1u);
  store.reset_stats();
  EXPECT_EQ(store.stats(), (IoStats{0, 0, 0}));
  EXPECT_TRUE(store.is_resident(a));
  store.touch(a);
  EXPECT_EQ(store.stats().reads, 0u);
}

TEST(BlockStore, UnknownAndFreedIdsFault) {
  BlockStore store(4, 16);
  EXPECT_THROW(store.touch(42), dpl::Fault);
  BlockId a = store.alloc();
  store.touch(a);
  store.free(a);
  EXPECT_THROW(store.touch(a), dpl::Fault);
  EXPECT_THROW(store.free(a), dpl::Fault);
}

TEST(BlockStore, RejectsTooSmallMemory) {
  EXPECT_THROW(BlockStore(8, 8), dpl::Fault);
  EXPECT_THROW(BlockStore(0, 8), dpl::Fault);
}

TEST(BlockStore, ReadsMatchReferenceLruOnRandomSequences) {
  std::mt19937_64 rng(7);
  for (std::size_t frames : {2u, 3u, 5u, 16u}) {
    BlockStore store(8, 8 * frames);
    std::vector<BlockId> ids;
    for (int i = 0; i < 40; ++i) ids.push_back(store.alloc());
    std::vector<BlockId> seq;
    std::uniform_int_distribution<int> pick(0, 39);
    for (int i = 0; i < 5000; ++i) {
      // skew towards a hot set so hits and misses both occur
      int j = (rng() % 3 == 0) ? pick(rng) : pick(rng) % 6;
      seq.push_back(ids[j]);
    }
    std::uint64_t prev_reads = 0, prev_writes = 0;
    for (BlockId id : seq) {
      store.touch(id, rng() % 2 == 0);
      ASSERT_LE(store.resident_count(), frames);
      ASSERT_GE(store.stats().reads, prev_reads);
      ASSERT_GE(store.stats().writes, prev_writes);
      prev_reads = store.stats().reads;
      prev_writes = store.stats().writes;
    }
    EXPECT_EQ(store.stats().reads, reference_misses(seq, frames)) << "frames=" << frames;
    EXPECT_LE(store.stats().reads, store.stats().accesses);
  }
}

TEST(Extent, SpansCeilRecordsOverB) {
  BlockStore store(4, 32);
  dpl::Extent e;
  e.resize(store, 9);
  EXPECT_EQ(e.block_count(), 3u);
  e.resize(store, 0);
  EXPECT_EQ(e.block_count(), 1u);
  e.release(store);
  EXPECT_EQ(store.live_blocks(), 0u);
}
