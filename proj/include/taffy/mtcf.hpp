#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "taffy/feistel.hpp"
#include "taffy/hash.hpp"
#include "taffy/slot.hpp"

namespace taffy {

class FrozenMinimalTaffyCuckooFilter;

/**
 * Minimal taffy cuckoo filter: a DySECT-style table of 2^p levels that grows
 * by doubling one level at a time, so allocated space tracks the stored set
 * far more closely than the whole-structure doubling of a taffy cuckoo
 * filter.
 *
 * A digest is addressed through four permutations, one per (side, width)
 * pair, at widths p+a+F-1 and p+a+F where 2^a is the bucket count of the
 * smallest levels. The top p permuted bits pick a level, the next a or a+1
 * its bucket, and whatever remains is the fingerprint: F or F-1 bits,
 * recorded per slot with a length flag. A short-width image that lands in an
 * already-doubled level would leave only F-2 fingerprint bits, so that
 * candidate is skipped. When an eviction moves an element somewhere that
 * needs a longer address, the missing bit is stolen from the front of its
 * tail; with an empty tail both single-bit extensions are inserted.
 *
 * The cursor separates doubled levels (below it) from not-yet-doubled ones.
 * When it wraps, every level has doubled, a increases by one, and the
 * short-width permutation becomes the previous long-width one, which keeps
 * every stored address valid across the wrap.
 */
class MinimalTaffyCuckooFilter {
 public:
  static constexpr int kFingerprintBits = 9;  // F
  static constexpr int kMaxTailBits = 5;      // T
  static constexpr int kSlotsPerBucket = 4;   // b
  static constexpr int kLevelsLog = 5;        // p
  static constexpr uint32_t kLevels = 32;
  static constexpr int kMaxKicks = 64;
  static constexpr size_t kMaxStash = 4;
  static constexpr double kMaxLoad = 0.9;

  using SlotT = FlaggedSlot<kFingerprintBits, kMaxTailBits>;

  enum WidthClass : int { kShort = 0, kLong = 1 };

  struct StashEntry {
    uint64_t prefix;
    uint16_t tail;
    uint8_t tail_len;
    uint8_t width;  // absolute prefix width in bits
  };

  struct Level {
    std::array<std::vector<uint16_t>, 2> sides;
  };

  explicit MinimalTaffyCuckooFilter(uint64_t seed = 0)
      : MinimalTaffyCuckooFilter(seed, 0, 0) {}

  MinimalTaffyCuckooFilter(uint64_t seed, int a, uint32_t cursor)
      : seed_(seed),
        a_(a),
        cursor_(cursor),
        hash_(splitmix64_at(seed, kTagHash)),
        rng_(splitmix64_at(seed, kTagRng)),
        perms_(make_perms(seed, a)) {
    if (a < 0 || cursor >= kLevels ||
        kLevelsLog + a + kFingerprintBits + kMaxTailBits > 64) {
      throw std::length_error("mtcf: bad geometry");
    }
    levels_.resize(kLevels);
    for (uint32_t i = 0; i < kLevels; ++i) {
      const size_t n = (uint64_t{1} << log_buckets(i)) * kSlotsPerBucket;
      levels_[i].sides[0].assign(n, 0);
      levels_[i].sides[1].assign(n, 0);
    }
  }

  void insert(uint64_t key) { insert_hash(hash_(key)); }
  bool contains(uint64_t key) const { return find_hash(hash_(key)); }

  void insert_hash(uint64_t digest) {
    Candidate cands[4];
    const int n = digest_candidates(digest, cands);
    for (int i = 0; i < n; ++i) {
      const Candidate& c = cands[i];
      const uint16_t want =
          SlotT::encode(c.fp_len, c.fp, c.tail, c.tail_len).raw;
      const uint16_t* slots = bucket_slots(c);
      for (int j = 0; j < kSlotsPerBucket; ++j) {
        if (slots[j] == want) return;
      }
    }
    const Element fresh = long_element(digest);
    for (const StashEntry& e : stash_) {
      if (e.prefix == fresh.prefix && e.width == width(kLong) &&
          e.tail == fresh.tail && e.tail_len == fresh.tail_len) {
        return;
      }
    }
    run_chain(cands, n, fresh);
    while (over_limits()) upsize();
  }

  bool find_hash(uint64_t digest) const noexcept {
    Candidate cands[4];
    const int n = digest_candidates(digest, cands);
    for (int i = 0; i < n; ++i) {
      const Candidate& c = cands[i];
      const uint16_t* slots = bucket_slots(c);
      for (int j = 0; j < kSlotsPerBucket; ++j) {
        const SlotT slot{slots[j]};
        if (!slot.empty() && slot.fingerprint_len() == c.fp_len &&
            slot.fingerprint() == c.fp && slot.tail_matches(c.tail)) {
          return true;
        }
      }
    }
    for (const StashEntry& e : stash_) {
      if (e.prefix == (digest >> (64 - e.width)) &&
          e.tail == (key_tail_at(digest, e.width) >>
                     (kMaxTailBits - e.tail_len))) {
        return true;
      }
    }
    return false;
  }

  // Doubles the bucket arrays of the level at the cursor and advances the
  // cursor, re-homing that level's elements and retrying the stash. When the
  // cursor wraps, all widths shift up by one.
  void upsize() {
    if (kLevelsLog + a_ + 1 + kFingerprintBits + kMaxTailBits > 64) {
      throw std::length_error("mtcf: digest space exhausted");
    }
    const uint32_t lvl = cursor_;
    const int old_lb = log_buckets(lvl);
    std::array<std::vector<uint16_t>, 2> old = std::move(levels_[lvl].sides);
    const size_t n = (uint64_t{1} << (old_lb + 1)) * kSlotsPerBucket;
    levels_[lvl].sides[0].assign(n, 0);
    levels_[lvl].sides[1].assign(n, 0);
    ++cursor_;

    for (int s = 0; s < 2; ++s) {
      for (uint64_t bucket = 0; bucket < (uint64_t{1} << old_lb); ++bucket) {
        for (int j = 0; j < kSlotsPerBucket; ++j) {
          const SlotT slot{old[s][bucket * kSlotsPerBucket + j]};
          if (slot.empty()) continue;
          --occupied_;
          place_element(reconstruct(lvl, s, bucket, old_lb, slot));
        }
      }
    }
    retry_stash();
    if (cursor_ == kLevels) {
      cursor_ = 0;
      ++a_;
      perms_ = make_perms(seed_, a_);
      normalize_stash_widths();
    }
  }

  FrozenMinimalTaffyCuckooFilter freeze() const;

  uint64_t seed() const noexcept { return seed_; }
  const HashFunction64& hash() const noexcept { return hash_; }
  int log_smallest_level() const noexcept { return a_; }
  uint32_t cursor() const noexcept { return cursor_; }
  uint64_t occupied() const noexcept { return occupied_; }
  size_t stash_size() const noexcept { return stash_.size(); }
  int width(int wc) const noexcept {
    return kLevelsLog + a_ + kFingerprintBits - 1 + wc;
  }
  int log_buckets(uint64_t level) const noexcept {
    return a_ + (level < cursor_ ? 1 : 0);
  }
  uint64_t slot_count() const noexcept {
    return (uint64_t{2 * kSlotsPerBucket} << a_) * (kLevels + cursor_);
  }
  uint64_t allocated_bytes() const noexcept { return slot_count() * 2; }

  // Number of buckets a lookup of this digest inspects (2..4): short-width
  // images landing in doubled levels are skipped.
  int candidate_count(uint64_t digest) const noexcept {
    Candidate cands[4];
    return digest_candidates(digest, cands);
  }

  const std::vector<Level>& levels() const noexcept { return levels_; }
  std::vector<Level>& levels() noexcept { return levels_; }
  const FeistelPermutation& permutation(int side, WidthClass wc) const noexcept {
    return perms_[side][wc];
  }
  const std::vector<StashEntry>& stash() const noexcept { return stash_; }
  std::vector<StashEntry>& stash() noexcept { return stash_; }
  uint64_t rng_state() const noexcept { return rng_.state(); }
  void restore_counters(uint64_t occupied, uint64_t rng_state) noexcept {
    occupied_ = occupied;
    rng_.set_state(rng_state);
  }

  template <class Fn>
  void for_each_slot(Fn fn) const {
    for (uint32_t lvl = 0; lvl < kLevels; ++lvl) {
      for (int s = 0; s < 2; ++s) {
        const auto& slots = levels_[lvl].sides[s];
        for (uint64_t bucket = 0; bucket * kSlotsPerBucket < slots.size();
             ++bucket) {
          for (int j = 0; j < kSlotsPerBucket; ++j) {
            const SlotT slot{slots[bucket * kSlotsPerBucket + j]};
            if (!slot.empty()) fn(lvl, s, bucket, slot);
          }
        }
      }
    }
  }

  static constexpr uint64_t kTagHash = 0x03;
  static constexpr uint64_t kTagRng = 0x04;
  // Permutation tags are keyed by absolute width so that after a cursor wrap
  // the new short-width permutation is exactly the old long-width one.
  static constexpr uint64_t perm_tag(int side, int width) {
    return 0x100 + static_cast<uint64_t>(side) * 0x80 + width;
  }

 private:
  struct Element {
    uint64_t prefix;
    int wc;
    uint64_t tail;
    int tail_len;
  };

  struct Candidate {
    uint64_t prefix;
    uint64_t tail;
    int tail_len;
    int wc;
    int side;
    uint64_t level;
    uint64_t bucket;
    uint16_t fp;
    int fp_len;
  };

  using Perms = std::array<std::array<FeistelPermutation, 2>, 2>;

  static Perms make_perms(uint64_t seed, int a) {
    const int ws = kLevelsLog + a + kFingerprintBits - 1;
    return Perms{{{FeistelPermutation(seed, perm_tag(0, ws), ws),
                   FeistelPermutation(seed, perm_tag(0, ws + 1), ws + 1)},
                  {FeistelPermutation(seed, perm_tag(1, ws), ws),
                   FeistelPermutation(seed, perm_tag(1, ws + 1), ws + 1)}}};
  }

  static uint64_t key_tail_at(uint64_t digest, int width) noexcept {
    return (digest >> (64 - width - kMaxTailBits)) & low_mask(kMaxTailBits);
  }

  Element long_element(uint64_t digest) const noexcept {
    const int w = width(kLong);
    return Element{digest >> (64 - w), kLong, key_tail_at(digest, w),
                   kMaxTailBits};
  }

  uint16_t* bucket_slots(const Candidate& c) noexcept {
    return &levels_[c.level].sides[c.side][c.bucket * kSlotsPerBucket];
  }
  const uint16_t* bucket_slots(const Candidate& c) const noexcept {
    return &levels_[c.level].sides[c.side][c.bucket * kSlotsPerBucket];
  }

  bool over_limits() const noexcept {
    return static_cast<double>(occupied_) >
               kMaxLoad * static_cast<double>(slot_count()) ||
           stash_.size() > kMaxStash;
  }

  // Appends the usable bucket candidates of one element view, both sides.
  int view_candidates(const Element& e, Candidate* out) const noexcept {
    const int w = width(e.wc);
    int n = 0;
    for (int side = 0; side < 2; ++side) {
      const uint64_t permuted = perms_[side][e.wc].permute(e.prefix);
      const uint64_t level = permuted >> (w - kLevelsLog);
      const int lb = log_buckets(level);
      const int fp_len = w - kLevelsLog - lb;
      if (fp_len < kFingerprintBits - 1) continue;  // would leave F-2 bits
      const uint64_t rest = permuted & low_mask(w - kLevelsLog);
      out[n++] = Candidate{e.prefix,
                           e.tail,
                           e.tail_len,
                           e.wc,
                           side,
                           level,
                           rest >> fp_len,
                           static_cast<uint16_t>(rest & low_mask(fp_len)),
                           fp_len};
    }
    return n;
  }

  // All usable candidates of an element, long-width views first.
  int element_candidates(const Element& e, Candidate* out) const noexcept {
    int n = 0;
    if (e.wc == kLong) {
      n += view_candidates(e, out + n);
      if (e.tail_len < kMaxTailBits) {
        n += view_candidates(shortened(e), out + n);
      }
    } else {
      if (e.tail_len >= 1) {
        n += view_candidates(lengthened(e), out + n);
      }
      n += view_candidates(e, out + n);
    }
    return n;
  }

  // Candidates of a fresh digest: all four views with full-length tails read
  // directly from the digest, long widths first.
  int digest_candidates(uint64_t digest, Candidate* out) const noexcept {
    int n = view_candidates(long_element(digest), out);
    const int ws = width(kShort);
    n += view_candidates(Element{digest >> (64 - ws), kShort,
                                 key_tail_at(digest, ws), kMaxTailBits},
                         out + n);
    return n;
  }

  // The same element one address bit shorter: the last prefix bit moves to
  // the front of the tail.
  static Element shortened(const Element& e) noexcept {
    return Element{e.prefix >> 1, kShort,
                   (e.prefix & 1) << e.tail_len | e.tail, e.tail_len + 1};
  }

  // The same element one address bit longer: the first tail bit moves to the
  // end of the prefix.
  static Element lengthened(const Element& e) noexcept {
    return Element{e.prefix << 1 | e.tail >> (e.tail_len - 1), kLong,
                   e.tail & low_mask(e.tail_len - 1), e.tail_len - 1};
  }

  Element reconstruct(uint64_t level, int side, uint64_t bucket, int lb,
                      SlotT slot) const noexcept {
    const int fp_len = slot.fingerprint_len();
    const int wc =
        fp_len == kFingerprintBits ? kLong : (lb == a_ ? kShort : kLong);
    assert(kLevelsLog + lb + fp_len == width(wc));
    const uint64_t permuted =
        (level << lb | bucket) << fp_len | slot.fingerprint();
    return Element{perms_[side][wc].invert(permuted), wc, slot.tail_bits(),
                   slot.tail_len()};
  }

  void place_element(const Element& e) {
    Candidate cands[4];
    const int n = element_candidates(e, cands);
    if (n == 0) {
      split_and_place(e);
      return;
    }
    run_chain(cands, n, e);
  }

  // A short-width element with an empty tail and no usable bucket: both
  // single-bit extensions of its prefix must be inserted.
  void split_and_place(const Element& e) {
    assert(e.wc == kShort && e.tail_len == 0);
    place_element(Element{e.prefix << 1, kLong, 0, 0});
    place_element(Element{e.prefix << 1 | 1, kLong, 0, 0});
  }

  void run_chain(Candidate* cands, int n, Element current) {
    for (int kick = 0;; ++kick) {
      for (int i = 0; i < n; ++i) {
        uint16_t* slots = bucket_slots(cands[i]);
        for (int j = 0; j < kSlotsPerBucket; ++j) {
          if (SlotT{slots[j]}.empty()) {
            slots[j] = SlotT::encode(cands[i].fp_len, cands[i].fp,
                                     cands[i].tail, cands[i].tail_len)
                           .raw;
            ++occupied_;
            return;
          }
        }
      }
      if (kick == kMaxKicks) break;
      const Candidate c = cands[rng_.next() % n];
      const int j = static_cast<int>(rng_.next() % kSlotsPerBucket);
      uint16_t& victim_raw = bucket_slots(c)[j];
      const SlotT victim{victim_raw};
      victim_raw = SlotT::encode(c.fp_len, c.fp, c.tail, c.tail_len).raw;
      current = reconstruct(c.level, c.side, c.bucket, log_buckets(c.level),
                            victim);
      n = element_candidates(current, cands);
      if (n == 0) {
        split_and_place(current);
        return;
      }
    }
    // Stash entries must stay placeable across level doublings; a short-width
    // element with an empty tail is not, so it enters as its two long-width
    // extensions.
    if (current.wc == kShort && current.tail_len == 0) {
      split_and_place(current);
      return;
    }
    stash_.push_back(StashEntry{
        current.prefix, static_cast<uint16_t>(current.tail),
        static_cast<uint8_t>(current.tail_len),
        static_cast<uint8_t>(width(current.wc))});
    ++occupied_;
  }

  void retry_stash() {
    std::vector<StashEntry> pending = std::move(stash_);
    stash_.clear();
    occupied_ -= pending.size();
    for (const StashEntry& e : pending) {
      const int wc = e.width == width(kLong) ? kLong : kShort;
      assert(e.width == width(wc));
      place_element(Element{e.prefix, wc, e.tail, e.tail_len});
    }
  }

  // After a cursor wrap the old short width is no longer addressable; stash
  // entries recorded at it steal a tail bit (or split) to reach the new
  // short width.
  void normalize_stash_widths() {
    std::vector<StashEntry> pending = std::move(stash_);
    stash_.clear();
    occupied_ -= pending.size();
    for (const StashEntry& e : pending) {
      if (e.width == width(kShort) || e.width == width(kLong)) {
        stash_.push_back(e);
        ++occupied_;
      } else if (e.tail_len > 0) {
        const Element longer = lengthened(
            Element{e.prefix, kShort, e.tail, e.tail_len});
        stash_.push_back(StashEntry{
            longer.prefix, static_cast<uint16_t>(longer.tail),
            static_cast<uint8_t>(longer.tail_len),
            static_cast<uint8_t>(e.width + 1)});
        ++occupied_;
      } else {
        stash_.push_back(StashEntry{e.prefix << 1, 0, 0,
                                    static_cast<uint8_t>(e.width + 1)});
        stash_.push_back(StashEntry{e.prefix << 1 | 1, 0, 0,
                                    static_cast<uint8_t>(e.width + 1)});
        occupied_ += 2;
      }
    }
  }

  uint64_t seed_;
  int a_;
  uint32_t cursor_;
  HashFunction64 hash_;
  SplitMix64 rng_;
  Perms perms_;
  std::vector<Level> levels_;
  std::vector<StashEntry> stash_;
  uint64_t occupied_ = 0;
};

/**
 * Read-only form of a minimal taffy cuckoo filter with all tails dropped.
 * Slots keep their fingerprint and length flag (F+1 bits of information plus
 * presence), addressing is unchanged, and the accepted set can only widen.
 */
class FrozenMinimalTaffyCuckooFilter {
 public:
  using Source = MinimalTaffyCuckooFilter;
  using SlotT = Source::SlotT;

  struct StashPrefix {
    uint64_t prefix;
    uint8_t width;
  };

  FrozenMinimalTaffyCuckooFilter(uint64_t seed, int a, uint32_t cursor,
                                 std::vector<Source::Level> levels,
                                 std::vector<StashPrefix> stash)
      : seed_(seed),
        a_(a),
        cursor_(cursor),
        hash_(splitmix64_at(seed, Source::kTagHash)),
        perms_{{{FeistelPermutation(seed, Source::perm_tag(0, short_width()),
                                    short_width()),
                 FeistelPermutation(seed, Source::perm_tag(0, short_width() + 1),
                                    short_width() + 1)},
                {FeistelPermutation(seed, Source::perm_tag(1, short_width()),
                                    short_width()),
                 FeistelPermutation(seed, Source::perm_tag(1, short_width() + 1),
                                    short_width() + 1)}}},
        levels_(std::move(levels)),
        stash_(std::move(stash)) {}

  bool contains(uint64_t key) const { return find_hash(hash_(key)); }

  bool find_hash(uint64_t digest) const noexcept {
    for (int wc = Source::kLong; wc >= Source::kShort; --wc) {
      const int w = short_width() + wc;
      const uint64_t prefix = digest >> (64 - w);
      for (int side = 0; side < 2; ++side) {
        const uint64_t permuted = perms_[side][wc].permute(prefix);
        const uint64_t level = permuted >> (w - Source::kLevelsLog);
        const int lb = log_buckets(level);
        const int fp_len = w - Source::kLevelsLog - lb;
        if (fp_len < Source::kFingerprintBits - 1) continue;
        const uint64_t rest = permuted & low_mask(w - Source::kLevelsLog);
        const uint16_t want =
            SlotT::encode(fp_len, rest & low_mask(fp_len), 0, 0).raw;
        const uint16_t* slots =
            &levels_[level].sides[side][(rest >> fp_len) *
                                        Source::kSlotsPerBucket];
        for (int j = 0; j < Source::kSlotsPerBucket; ++j) {
          if (slots[j] == want) return true;
        }
      }
    }
    for (const StashPrefix& e : stash_) {
      if (e.prefix == (digest >> (64 - e.width))) return true;
    }
    return false;
  }

  Source thaw() const {
    Source out(seed_, a_, cursor_);
    uint64_t occupied = 0;
    for (uint32_t lvl = 0; lvl < Source::kLevels; ++lvl) {
      for (int s = 0; s < 2; ++s) {
        const auto& src = levels_[lvl].sides[s];
        auto& dst = out.levels()[lvl].sides[s];
        for (size_t i = 0; i < src.size(); ++i) {
          if (!SlotT{src[i]}.empty()) {
            dst[i] = src[i];
            ++occupied;
          }
        }
      }
    }
    for (const StashPrefix& e : stash_) {
      out.stash().push_back(Source::StashEntry{e.prefix, 0, 0, e.width});
      ++occupied;
    }
    out.restore_counters(occupied, out.rng_state());
    return out;
  }

  uint64_t seed() const noexcept { return seed_; }
  int log_smallest_level() const noexcept { return a_; }
  uint32_t cursor() const noexcept { return cursor_; }
  int short_width() const noexcept {
    return Source::kLevelsLog + a_ + Source::kFingerprintBits - 1;
  }
  int log_buckets(uint64_t level) const noexcept {
    return a_ + (level < cursor_ ? 1 : 0);
  }
  const std::vector<Source::Level>& levels() const noexcept { return levels_; }
  const std::vector<StashPrefix>& stash() const noexcept { return stash_; }
  const HashFunction64& hash() const noexcept { return hash_; }

 private:
  uint64_t seed_;
  int a_;
  uint32_t cursor_;
  HashFunction64 hash_;
  std::array<std::array<FeistelPermutation, 2>, 2> perms_;
  std::vector<Source::Level> levels_;
  std::vector<StashPrefix> stash_;
};

inline FrozenMinimalTaffyCuckooFilter MinimalTaffyCuckooFilter::freeze() const {
  std::vector<Level> levels(kLevels);
  for (uint32_t lvl = 0; lvl < kLevels; ++lvl) {
    for (int s = 0; s < 2; ++s) {
      const auto& src = levels_[lvl].sides[s];
      auto& dst = levels[lvl].sides[s];
      dst.assign(src.size(), 0);
      for (uint64_t bucket = 0; bucket * kSlotsPerBucket < src.size();
           ++bucket) {
        for (int j = 0; j < kSlotsPerBucket; ++j) {
          const SlotT slot{src[bucket * kSlotsPerBucket + j]};
          if (slot.empty()) continue;
          const uint16_t word =
              SlotT::encode(slot.fingerprint_len(), slot.fingerprint(), 0, 0)
                  .raw;
          uint16_t* out = &dst[bucket * kSlotsPerBucket];
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
  }
  std::vector<FrozenMinimalTaffyCuckooFilter::StashPrefix> prefixes;
  prefixes.reserve(stash_.size());
  for (const StashEntry& e : stash_) {
    prefixes.push_back({e.prefix, e.width});
  }
  return FrozenMinimalTaffyCuckooFilter(seed_, a_, cursor_, std::move(levels),
                                        std::move(prefixes));
}

}  // namespace taffy
