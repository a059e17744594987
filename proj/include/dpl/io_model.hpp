#pragma once

// Simulated external memory: blocks of B records, an M-record internal
// memory managed as a fully associative LRU cache, and exact transfer counts.

#include <cstddef>
#include <cstdint>
#include <list>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dpl {

// Raised on contract violations (unknown ids, crossing segments, ...).
class Fault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using BlockId = std::uint64_t;
inline constexpr BlockId kNoBlock = ~BlockId{0};

struct IoStats {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t accesses = 0;

  friend bool operator==(const IoStats&, const IoStats&) = default;
  IoStats operator-(const IoStats& o) const {
    return {reads - o.reads, writes - o.writes, accesses - o.accesses};
  }
};

// What a block holds. Structures keep their data in ordinary objects and
// declare how many records each of their blocks carries; the simulator
// charges transfers, which never depend on the contents.
struct BlockPayload {
  std::size_t records = 0;
};

class BlockStore {
 public:
  explicit BlockStore(std::size_t block_size = 64, std::size_t memory = 64 * 64)
      : block_size_(block_size), memory_(memory) {
    if (block_size_ == 0) throw Fault("BlockStore: block size must be positive");
    if (memory_ < 2 * block_size_) throw Fault("BlockStore: memory must hold at least two blocks");
    frames_ = memory_ / block_size_;
  }

  BlockStore(const BlockStore&) = delete;
  BlockStore& operator=(const BlockStore&) = delete;

  std::size_t block_size() const { return block_size_; }
  std::size_t memory() const { return memory_; }
  std::size_t frame_count() const { return frames_; }
  std::size_t live_blocks() const { return blocks_.size(); }
  std::size_t resident_count() const { return lru_.size(); }

  BlockId alloc() {
    BlockId id = next_id_++;
    blocks_.emplace(id, Block{});
    return id;
  }

  void free(BlockId id) {
    auto it = blocks_.find(id);
    if (it == blocks_.end()) throw Fault("BlockStore::free: unknown block " + std::to_string(id));
    if (it->second.resident) lru_.erase(it->second.pos);
    blocks_.erase(it);
  }

  bool contains(BlockId id) const { return blocks_.count(id) != 0; }
  bool is_resident(BlockId id) const {
    auto it = blocks_.find(id);
    return it != blocks_.end() && it->second.resident;
  }

  BlockPayload& touch(BlockId id, bool dirty = false) {
    auto it = blocks_.find(id);
    if (it == blocks_.end()) throw Fault("BlockStore::touch: unknown block " + std::to_string(id));
    Block& b = it->second;
    ++stats_.accesses;
    if (b.resident) {
      lru_.splice(lru_.begin(), lru_, b.pos);
    } else {
      ++stats_.reads;
      if (lru_.size() == frames_) evict_one();
      lru_.push_front(id);
      b.pos = lru_.begin();
      b.resident = true;
    }
    b.dirty = b.dirty || dirty;
    return b.payload;
  }

  // Writes back every dirty resident block; residency is kept.
  void flush() {
    for (BlockId id : lru_) {
      Block& b = blocks_.at(id);
      if (b.dirty) {
        ++stats_.writes;
        b.dirty = false;
      }
    }
  }

  // Drops all residency (charging write-backs) so the next touches are cold.
  void clear_cache() {
    while (!lru_.empty()) evict_one();
  }

  IoStats stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

 private:
  struct Block {
    BlockPayload payload;
    bool resident = false;
    bool dirty = false;
    std::list<BlockId>::iterator pos{};
  };

  void evict_one() {
    BlockId victim = lru_.back();
    lru_.pop_back();
    Block& b = blocks_.at(victim);
    if (b.dirty) ++stats_.writes;
    b.dirty = false;
    b.resident = false;
  }

  std::size_t block_size_;
  std::size_t memory_;
  std::size_t frames_;
  BlockId next_id_ = 0;
  std::unordered_map<BlockId, Block> blocks_;
  std::list<BlockId> lru_;  // front = most recently used
  IoStats stats_;
};

// A run of blocks holding `records` records, B per block. Structures whose
// node payload outgrows one block at small B use an Extent for it.
class Extent {
 public:
  Extent() = default;

  void resize(BlockStore& store, std::size_t records) {
    std::size_t want = records == 0 ? 1 : (records + store.block_size() - 1) / store.block_size();
    while (ids_.size() < want) ids_.push_back(store.alloc());
    while (ids_.size() > want) {
      store.free(ids_.back());
      ids_.pop_back();
    }
    records_ = records;
    std::size_t left = records;
    for (BlockId id : ids_) {
      std::size_t here = left < store.block_size() ? left : store.block_size();
      store.touch(id, true).records = here;
      left -= here;
    }
  }

  void release(BlockStore& store) {
    for (BlockId id : ids_) store.free(id);
    ids_.clear();
    records_ = 0;
  }

  void touch_all(BlockStore& store, bool dirty = false) const {
    for (BlockId id : ids_) store.touch(id, dirty);
  }

  void touch_record(BlockStore& store, std::size_t index, bool dirty = false) const {
    if (ids_.empty()) return;
    std::size_t b = index / store.block_size();
    if (b >= ids_.size()) b = ids_.size() - 1;
    store.touch(ids_[b], dirty);
  }

  void touch_range(BlockStore& store, std::size_t first, std::size_t last, bool dirty = false) const {
    if (ids_.empty() || first > last) return;
    std::size_t lo = first / store.block_size();
    std::size_t hi = last / store.block_size();
    if (hi >= ids_.size()) hi = ids_.size() - 1;
    for (std::size_t b = lo; b <= hi; ++b) store.touch(ids_[b], dirty);
  }

  std::size_t block_count() const { return ids_.size(); }
  std::size_t records() const { return records_; }
  const std::vector<BlockId>& ids() const { return ids_; }

 private:
  std::vector<BlockId> ids_;
  std::size_t records_ = 0;
};

}  // namespace dpl
