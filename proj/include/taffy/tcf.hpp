#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "taffy/feistel.hpp"
#include "taffy/hash.hpp"
#include "taffy/slot.hpp"

namespace taffy {

// Splits a permuted (a+F)-bit value into its implicitly stored bucket index
// (top a bits) and its F-bit fingerprint.
struct BucketFingerprint {
  uint64_t bucket;
  uint64_t fingerprint;
};

constexpr BucketFingerprint split_permuted(uint64_t permuted,
                                           int fingerprint_bits) noexcept {
  return {permuted >> fingerprint_bits, permuted & low_mask(fingerprint_bits)};
}

class FrozenTaffyCuckooFilter;

/**
 * Taffy cuckoo filter: a growable two-sided cuckoo table over quotiented
 * (fingerprint, tail) elements.
 *
 * A key's 64-bit digest splits into a prefix of a+F bits and a tail of up to
 * T bits. Each side permutes the prefix with its own seeded Feistel network;
 * the top a bits of the permuted value select a bucket (stored implicitly)
 * and the low F bits are the fingerprint stored in a slot alongside the
 * unpermuted tail. Because the permutations invert, an occupant's prefix can
 * be reconstructed from its bucket index and fingerprint, which is what makes
 * eviction and whole-structure doubling possible without the original keys.
 *
 * On upsize the prefix grows by one bit stolen from the front of the tail;
 * an element whose tail is already empty is replaced by both single-bit
 * extensions of its prefix, so lookups never lose a positive.
 */
class TaffyCuckooFilter {
 public:
  static constexpr int kFingerprintBits = 10;  // F
  static constexpr int kMaxTailBits = 5;       // T
  static constexpr int kSlotsPerBucket = 4;    // b
  static constexpr int kMaxKicks = 64;
  static constexpr size_t kMaxStash = 4;
  static constexpr double kMaxLoad = 0.9;

  using SlotT = Slot<kFingerprintBits, kMaxTailBits>;

  struct StashEntry {
    uint64_t prefix;  // unpermuted, a+F bits
    uint16_t tail;
    uint8_t tail_len;
  };

  struct Side {
    FeistelPermutation perm;
    std::vector<uint16_t> slots;  // 2^a buckets of b slots
  };

  explicit TaffyCuckooFilter(uint64_t seed = 0) : TaffyCuckooFilter(seed, 0) {}

  // Pre-sized construction; log_buckets is the per-side bucket count exponent.
  TaffyCuckooFilter(uint64_t seed, int log_buckets)
      : seed_(seed),
        log_buckets_(log_buckets),
        hash_(splitmix64_at(seed, kTagHash)),
        rng_(splitmix64_at(seed, kTagRng)),
        sides_{make_side(seed, 0, log_buckets),
               make_side(seed, 1, log_buckets)} {
    if (log_buckets < 0 || log_buckets + kFingerprintBits + kMaxTailBits > 64) {
      throw std::length_error("tcf: digest space exhausted");
    }
  }

  void insert(uint64_t key) { insert_hash(hash_(key)); }
  bool contains(uint64_t key) const { return find_hash(hash_(key)); }

  void insert_hash(uint64_t digest) {
    const uint64_t prefix = prefix_of(digest);
    const uint64_t tail = key_tail_of(digest);
    if (contains_exact(prefix, tail, kMaxTailBits)) return;
    place(prefix, tail, kMaxTailBits);
    while (over_limits()) upsize();
  }

  bool find_hash(uint64_t digest) const noexcept {
    const uint64_t prefix = prefix_of(digest);
    const uint64_t key_tail = key_tail_of(digest);
    for (const Side& side : sides_) {
      const auto [bucket, fp] =
          split_permuted(side.perm.permute(prefix), kFingerprintBits);
      const uint16_t* slots = &side.slots[bucket * kSlotsPerBucket];
      for (int j = 0; j < kSlotsPerBucket; ++j) {
        const SlotT slot{slots[j]};
        if (!slot.empty() && slot.fingerprint() == fp &&
            slot.tail_matches(key_tail)) {
          return true;
        }
      }
    }
    for (const StashEntry& e : stash_) {
      if (e.prefix == prefix &&
          e.tail == (key_tail >> (kMaxTailBits - e.tail_len))) {
        return true;
      }
    }
    return false;
  }

  // Doubles the bucket arrays and migrates every element, stealing one tail
  // bit per element to extend its prefix (or duplicating elements whose tails
  // are already empty).
  void upsize() {
    TaffyCuckooFilter next(seed_, log_buckets_ + 1, rng_);
    for_each_element([&next](int, uint64_t, SlotT slot, uint64_t prefix) {
      next.migrate_lengthened(prefix, slot.tail_bits(), slot.tail_len());
    });
    for (const StashEntry& e : stash_) {
      next.migrate_lengthened(e.prefix, e.tail, e.tail_len);
    }
    *this = std::move(next);
  }

  FrozenTaffyCuckooFilter freeze() const;

  int log_buckets() const noexcept { return log_buckets_; }
  uint64_t seed() const noexcept { return seed_; }
  const HashFunction64& hash() const noexcept { return hash_; }
  uint64_t occupied() const noexcept { return occupied_; }
  size_t stash_size() const noexcept { return stash_.size(); }
  uint64_t slot_count() const noexcept {
    return 2ull * buckets_per_side() * kSlotsPerBucket;
  }
  uint64_t allocated_bytes() const noexcept { return slot_count() * 2; }
  uint64_t buckets_per_side() const noexcept {
    return uint64_t{1} << log_buckets_;
  }
  int prefix_bits() const noexcept { return log_buckets_ + kFingerprintBits; }

  const std::array<Side, 2>& sides() const noexcept { return sides_; }
  std::array<Side, 2>& sides() noexcept { return sides_; }
  const std::vector<StashEntry>& stash() const noexcept { return stash_; }
  std::vector<StashEntry>& stash() noexcept { return stash_; }
  uint64_t rng_state() const noexcept { return rng_.state(); }
  void restore_counters(uint64_t occupied, uint64_t rng_state) noexcept {
    occupied_ = occupied;
    rng_.set_state(rng_state);
  }

  // Visits every stored slot as (side, bucket, slot, reconstructed prefix).
  template <class Fn>
  void for_each_element(Fn fn) const {
    for (int s = 0; s < 2; ++s) {
      for (uint64_t bucket = 0; bucket < buckets_per_side(); ++bucket) {
        for (int j = 0; j < kSlotsPerBucket; ++j) {
          const SlotT slot{sides_[s].slots[bucket * kSlotsPerBucket + j]};
          if (slot.empty()) continue;
          const uint64_t prefix = sides_[s].perm.invert(
              bucket << kFingerprintBits | slot.fingerprint());
          fn(s, bucket, slot, prefix);
        }
      }
    }
  }

  uint64_t count_empty_tails() const {
    uint64_t n = 0;
    for_each_element([&n](int, uint64_t, SlotT slot, uint64_t) {
      if (slot.tail_len() == 0) ++n;
    });
    for (const StashEntry& e : stash_) {
      if (e.tail_len == 0) ++n;
    }
    return n;
  }

  static constexpr uint64_t kTagHash = 0x01;
  static constexpr uint64_t kTagRng = 0x02;
  static constexpr uint64_t kTagPermBase = 0x10;  // + side

 private:
  TaffyCuckooFilter(uint64_t seed, int log_buckets, SplitMix64 rng)
      : TaffyCuckooFilter(seed, log_buckets) {
    rng_ = rng;
  }

  static Side make_side(uint64_t seed, int side, int log_buckets) {
    return Side{
        FeistelPermutation(seed, kTagPermBase + side,
                           log_buckets + kFingerprintBits),
        std::vector<uint16_t>((uint64_t{1} << log_buckets) * kSlotsPerBucket,
                              0)};
  }

  uint64_t prefix_of(uint64_t digest) const noexcept {
    return digest >> (64 - prefix_bits());
  }
  uint64_t key_tail_of(uint64_t digest) const noexcept {
    return (digest >> (64 - prefix_bits() - kMaxTailBits)) &
           low_mask(kMaxTailBits);
  }

  bool over_limits() const noexcept {
    return static_cast<double>(occupied_) >
               kMaxLoad * static_cast<double>(slot_count()) ||
           stash_.size() > kMaxStash;
  }

  bool contains_exact(uint64_t prefix, uint64_t tail, int tail_len) const {
    const uint16_t raw = SlotT::encode(0, tail, tail_len).raw;
    for (const Side& side : sides_) {
      const auto [bucket, fp] =
          split_permuted(side.perm.permute(prefix), kFingerprintBits);
      const uint16_t want =
          static_cast<uint16_t>(raw | fp << (kMaxTailBits + 1));
      const uint16_t* slots = &side.slots[bucket * kSlotsPerBucket];
      for (int j = 0; j < kSlotsPerBucket; ++j) {
        if (slots[j] == want) return true;
      }
    }
    for (const StashEntry& e : stash_) {
      if (e.prefix == prefix && e.tail == tail && e.tail_len == tail_len) {
        return true;
      }
    }
    return false;
  }

  // Homes one element, evicting occupants along a bounded chain; the element
  // displaced after the kick limit goes to the stash.
  void place(uint64_t prefix, uint64_t tail, int tail_len) {
    for (int kick = 0;; ++kick) {
      uint64_t buckets[2];
      uint64_t fps[2];
      for (int s = 0; s < 2; ++s) {
        const auto [bucket, fp] =
            split_permuted(sides_[s].perm.permute(prefix), kFingerprintBits);
        buckets[s] = bucket;
        fps[s] = fp;
        uint16_t* slots = &sides_[s].slots[buckets[s] * kSlotsPerBucket];
        for (int j = 0; j < kSlotsPerBucket; ++j) {
          if (SlotT{slots[j]}.empty()) {
            slots[j] = SlotT::encode(fps[s], tail, tail_len).raw;
            ++occupied_;
            return;
          }
        }
      }
      if (kick == kMaxKicks) break;
      const int s = static_cast<int>(rng_.next() & 1);
      const int j = static_cast<int>(rng_.next() % kSlotsPerBucket);
      uint16_t& victim_raw = sides_[s].slots[buckets[s] * kSlotsPerBucket + j];
      const SlotT victim{victim_raw};
      victim_raw = SlotT::encode(fps[s], tail, tail_len).raw;
      prefix = sides_[s].perm.invert(buckets[s] << kFingerprintBits |
                                     victim.fingerprint());
      tail = victim.tail_bits();
      tail_len = victim.tail_len();
    }
    stash_.push_back(StashEntry{prefix, static_cast<uint16_t>(tail),
                                static_cast<uint8_t>(tail_len)});
    ++occupied_;
  }

  // Re-homes an element from a filter one bit narrower than this one.
  void migrate_lengthened(uint64_t prefix, uint64_t tail, int tail_len) {
    if (tail_len > 0) {
      const uint64_t first = tail >> (tail_len - 1);
      place(prefix << 1 | first, tail & low_mask(tail_len - 1), tail_len - 1);
    } else {
      place(prefix << 1, 0, 0);
      place(prefix << 1 | 1, 0, 0);
    }
  }

  uint64_t seed_;
  int log_buckets_;
  HashFunction64 hash_;
  SplitMix64 rng_;
  std::array<Side, 2> sides_;
  std::vector<StashEntry> stash_;
  uint64_t occupied_ = 0;
};

/**
 * Read-optimized form of a taffy cuckoo filter with every tail dropped.
 * Slots carry F+1 bits of information (fingerprint plus a presence flag), so
 * the serialized form is substantially smaller than the growable filter's;
 * the accepted digest set can only widen. Immutable and safe to share across
 * threads.
 */
class FrozenTaffyCuckooFilter {
 public:
  static constexpr int kFingerprintBits = TaffyCuckooFilter::kFingerprintBits;
  static constexpr int kSlotsPerBucket = TaffyCuckooFilter::kSlotsPerBucket;

  struct Side {
    FeistelPermutation perm;
    std::vector<uint16_t> slots;  // fingerprint << 1 | present
  };

  FrozenTaffyCuckooFilter(uint64_t seed, int log_buckets,
                          std::array<std::vector<uint16_t>, 2> slots,
                          std::vector<uint64_t> stash_prefixes)
      : seed_(seed),
        log_buckets_(log_buckets),
        hash_(splitmix64_at(seed, TaffyCuckooFilter::kTagHash)),
        sides_{Side{FeistelPermutation(
                        seed, TaffyCuckooFilter::kTagPermBase + 0,
                        log_buckets + kFingerprintBits),
                    std::move(slots[0])},
               Side{FeistelPermutation(
                        seed, TaffyCuckooFilter::kTagPermBase + 1,
                        log_buckets + kFingerprintBits),
                    std::move(slots[1])}},
        stash_(std::move(stash_prefixes)) {}

  bool contains(uint64_t key) const { return find_hash(hash_(key)); }

  bool find_hash(uint64_t digest) const noexcept {
    const uint64_t prefix = digest >> (64 - prefix_bits());
    for (const Side& side : sides_) {
      const auto [bucket, fp] =
          split_permuted(side.perm.permute(prefix), kFingerprintBits);
      const uint16_t want = static_cast<uint16_t>(fp << 1 | 1);
      const uint16_t* slots = &side.slots[bucket * kSlotsPerBucket];
      for (int j = 0; j < kSlotsPerBucket; ++j) {
        if (slots[j] == want) return true;
      }
    }
    for (uint64_t p : stash_) {
      if (p == prefix) return true;
    }
    return false;
  }

  TaffyCuckooFilter thaw() const {
    TaffyCuckooFilter out(seed_, log_buckets_);
    uint64_t occupied = 0;
    for (int s = 0; s < 2; ++s) {
      auto& slots = out.sides()[s].slots;
      for (size_t i = 0; i < slots.size(); ++i) {
        const uint16_t word = sides_[s].slots[i];
        if (word & 1) {
          slots[i] = TaffyCuckooFilter::SlotT::encode(word >> 1, 0, 0).raw;
          ++occupied;
        }
      }
    }
    for (uint64_t p : stash_) {
      out.stash().push_back(TaffyCuckooFilter::StashEntry{p, 0, 0});
      ++occupied;
    }
    out.restore_counters(occupied, out.rng_state());
    return out;
  }

  uint64_t seed() const noexcept { return seed_; }
  int log_buckets() const noexcept { return log_buckets_; }
  int prefix_bits() const noexcept { return log_buckets_ + kFingerprintBits; }
  uint64_t buckets_per_side() const noexcept {
    return uint64_t{1} << log_buckets_;
  }
  uint64_t slot_count() const noexcept {
    return 2ull * buckets_per_side() * kSlotsPerBucket;
  }
  const std::array<Side, 2>& sides() const noexcept { return sides_; }
  const std::vector<uint64_t>& stash() const noexcept { return stash_; }
  const HashFunction64& hash() const noexcept { return hash_; }

 private:
  uint64_t seed_;
  int log_buckets_;
  HashFunction64 hash_;
  std::array<Side, 2> sides_;
  std::vector<uint64_t> stash_;
};

inline FrozenTaffyCuckooFilter TaffyCuckooFilter::freeze() const {
  std::array<std::vector<uint16_t>, 2> slots{
      std::vector<uint16_t>(sides_[0].slots.size(), 0),
      std::vector<uint16_t>(sides_[1].slots.size(), 0)};
  for (int s = 0; s < 2; ++s) {
    for (uint64_t bucket = 0; bucket < buckets_per_side(); ++bucket) {
      for (int j = 0; j < kSlotsPerBucket; ++j) {
        const SlotT slot{sides_[s].slots[bucket * kSlotsPerBucket + j]};
        if (slot.empty()) continue;
        const uint16_t word = slot.fingerprint() << 1 | 1;
        // Tails dropped; identical fingerprints in a bucket collapse.
        uint16_t* out = &slots[s][bucket * kSlotsPerBucket];
        int free = -1;
        bool dup = false;
        for (int k = kSlotsPerBucket - 1; k >= 0; --k) {
          if (out[k] == word) dup = true;
          if (out[k] == 0) free = k;
        }
        if (!dup) out[free] = word;
      }
    }
  }
  std::vector<uint64_t> prefixes;
  prefixes.reserve(stash_.size());
  for (const StashEntry& e : stash_) prefixes.push_back(e.prefix);
  return FrozenTaffyCuckooFilter(seed_, log_buckets_, std::move(slots),
                                 std::move(prefixes));
}

}  // namespace taffy
