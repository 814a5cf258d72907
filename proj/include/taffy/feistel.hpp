#pragma once

#include <cstdint>
#include <stdexcept>

#include "taffy/hash.hpp"

namespace taffy {

/**
 * Seeded invertible permutation on w-bit strings, 4 <= w <= 64.
 *
 * Four-round Feistel network over an unbalanced split (left ceil(w/2) bits,
 * right floor(w/2) bits). The round function is 2-independent multiply-shift:
 * the high bits of (a*x + b) truncated to the width of the half being mixed,
 * with the multiplier forced odd. Rounds alternate which half they modify, so
 * each round is its own inverse given the untouched half and the whole
 * network inverts by replaying rounds in reverse order.
 *
 * Round keys are independent of the width: the same FeistelRoundKeys value is
 * a valid permutation at every legal width, which is what lets a filter
 * extend its permutations to a wider domain when it grows.
 */
struct FeistelRoundKeys {
  static constexpr int kRounds = 4;
  uint64_t mul[kRounds];
  uint64_t add[kRounds];

  // Derives round keys from (seed, tag); tag namespaces independent
  // permutations drawn from one seed.
  static constexpr FeistelRoundKeys derive(uint64_t seed, uint64_t tag) noexcept {
    FeistelRoundKeys keys{};
    for (int r = 0; r < kRounds; ++r) {
      keys.mul[r] = splitmix64_at(seed, tag * 2 * kRounds + 2 * r) | 1;
      keys.add[r] = splitmix64_at(seed, tag * 2 * kRounds + 2 * r + 1);
    }
    return keys;
  }
};

class FeistelPermutation {
 public:
  static constexpr int kMinWidth = 4;
  static constexpr int kMaxWidth = 64;

  FeistelPermutation(const FeistelRoundKeys& keys, int width)
      : keys_(keys), width_(width) {
    if (width < kMinWidth || width > kMaxWidth) {
      throw std::invalid_argument("FeistelPermutation: width out of [4, 64]");
    }
    left_bits_ = (width + 1) / 2;
    right_bits_ = width / 2;
  }

  FeistelPermutation(uint64_t seed, uint64_t tag, int width)
      : FeistelPermutation(FeistelRoundKeys::derive(seed, tag), width) {}

  // Same round keys over a different domain width.
  FeistelPermutation with_width(int width) const {
    return FeistelPermutation(keys_, width);
  }

  uint64_t permute(uint64_t x) const noexcept {
    uint64_t left = x >> right_bits_;
    uint64_t right = x & mask(right_bits_);
    for (int r = 0; r < FeistelRoundKeys::kRounds; ++r) {
      apply_round(r, left, right);
    }
    return (left << right_bits_) | right;
  }

  uint64_t invert(uint64_t y) const noexcept {
    uint64_t left = y >> right_bits_;
    uint64_t right = y & mask(right_bits_);
    for (int r = FeistelRoundKeys::kRounds - 1; r >= 0; --r) {
      apply_round(r, left, right);
    }
    return (left << right_bits_) | right;
  }

  int width() const noexcept { return width_; }
  const FeistelRoundKeys& round_keys() const noexcept { return keys_; }

 private:
  static constexpr uint64_t mask(int bits) noexcept {
    return bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << bits) - 1;
  }

  // Even rounds mix the right half into the left, odd rounds the reverse.
  void apply_round(int r, uint64_t& left, uint64_t& right) const noexcept {
    if ((r & 1) == 0) {
      left ^= round_function(r, right, left_bits_);
    } else {
      right ^= round_function(r, left, right_bits_);
    }
  }

  uint64_t round_function(int r, uint64_t x, int out_bits) const noexcept {
    return (keys_.mul[r] * x + keys_.add[r]) >> (64 - out_bits);
  }

  FeistelRoundKeys keys_;
  int width_;
  int left_bits_;
  int right_bits_;
};

}  // namespace taffy
