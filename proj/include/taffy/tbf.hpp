#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "taffy/hash.hpp"
#include "taffy/sbbf.hpp"

namespace taffy {

/**
 * Taffy block filter: a growable filter built from a sequence of split block
 * Bloom filter levels. Level i (counting from 1) is sized for 2^i keys at a
 * false positive target of 6*epsilon/(i^2*pi^2); the targets sum to epsilon
 * over all levels, so the whole filter never exceeds its budget no matter how
 * far it grows.
 *
 * Inserts always land in the newest level. Once 2^i inserts have gone into
 * level i, level i+1 is allocated and becomes the insert target. Duplicate
 * inserts count toward that budget; the filter cannot detect them. Lookups
 * probe every level, newest first.
 */
class TaffyBlockFilter {
 public:
  struct Level {
    uint64_t capacity;
    double target_fpp;
    SplitBlockBloomFilter filter;
  };

  explicit TaffyBlockFilter(double epsilon, uint64_t seed = 0)
      : epsilon_(epsilon), seed_(seed), hash_(splitmix64_at(seed, kHashTag)) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
      throw std::invalid_argument("tbf: epsilon must be in (0, 1)");
    }
    add_level();
  }

  static double level_fpp(double epsilon, int i) {
    return 6.0 * epsilon / (static_cast<double>(i) * i *
                            std::numbers::pi * std::numbers::pi);
  }

  void insert(uint64_t key) { insert_hash(hash_(key)); }
  bool contains(uint64_t key) const { return find_hash(hash_(key)); }

  void insert_hash(uint64_t digest) {
    levels_.back().filter.insert_hash(digest);
    ++size_;
    if (++inserts_in_current_ >= levels_.back().capacity) {
      add_level();
    }
  }

  bool find_hash(uint64_t digest) const noexcept {
    for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
      if (it->filter.find_hash(digest)) return true;
    }
    return false;
  }

  double epsilon() const noexcept { return epsilon_; }
  uint64_t seed() const noexcept { return seed_; }
  const HashFunction64& hash() const noexcept { return hash_; }
  uint64_t size() const noexcept { return size_; }
  uint64_t inserts_in_current() const noexcept { return inserts_in_current_; }
  size_t level_count() const noexcept { return levels_.size(); }
  const std::vector<Level>& levels() const noexcept { return levels_; }
  std::vector<Level>& levels() noexcept { return levels_; }

  uint64_t allocated_bytes() const noexcept {
    uint64_t bytes = 0;
    for (const Level& level : levels_) bytes += level.filter.allocated_bytes();
    return bytes;
  }

  // Restores counters after deserialization; levels are rebuilt by the caller.
  void restore_counters(uint64_t size, uint64_t inserts_in_current) noexcept {
    size_ = size;
    inserts_in_current_ = inserts_in_current;
  }

  static constexpr uint64_t kHashTag = 0x7b1;

 private:
  void add_level() {
    const int i = static_cast<int>(levels_.size()) + 1;
    const uint64_t capacity = uint64_t{1} << i;
    const double target = level_fpp(epsilon_, i);
    levels_.push_back(Level{capacity, target,
                            SplitBlockBloomFilter(capacity, target)});
    inserts_in_current_ = 0;
  }

  double epsilon_;
  uint64_t seed_;
  HashFunction64 hash_;
  std::vector<Level> levels_;
  uint64_t inserts_in_current_ = 0;
  uint64_t size_ = 0;
};

}  // namespace taffy
