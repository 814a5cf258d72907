#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace taffy {

struct SbbfParams {
  static constexpr int kBlockBits = 256;
  static constexpr int kLaneBits = 32;
  static constexpr int kLanes = 8;

  uint64_t num_blocks = 1;

  friend constexpr bool operator==(SbbfParams, SbbfParams) noexcept = default;
};

/**
 * Split block Bloom filter: an array of 256-bit blocks, each treated as a
 * split Bloom filter of eight 32-bit lanes. Insert and lookup touch exactly
 * one block and set/test one bit per lane.
 *
 * A digest's block is selected by its high 32 bits modulo the block count;
 * the lane bits come from multiplying the digest's low 32 bits by eight fixed
 * odd constants and keeping the top five bits of each product. Both choices
 * are frozen: serialized filters depend on them.
 */
class SplitBlockBloomFilter {
 public:
  static constexpr std::array<uint32_t, 8> kLaneSalts = {
      0x47b6137bU, 0x44974d91U, 0x8824ad5bU, 0xa2b7289dU,
      0x705495c7U, 0x2df1424bU, 0x9efc4947U, 0x5c6bfb31U};

  // Sizing slack over the ideal Bloom bits-per-key formula, calibrated so
  // that a filter filled to its design load measures at or below its target
  // false positive rate for epsilon in [0.0004, 0.04].
  static constexpr double kSizingSlack = 1.33;

  static SbbfParams params_for(uint64_t n, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
      throw std::invalid_argument("sbbf: epsilon must be in (0, 1)");
    }
    const double bits_per_key =
        kSizingSlack * std::log2(1.0 / epsilon) / std::log(2.0);
    const double bits = static_cast<double>(n) * bits_per_key;
    const auto blocks = static_cast<uint64_t>(
        std::ceil(bits / SbbfParams::kBlockBits));
    return SbbfParams{blocks < 1 ? 1 : blocks};
  }

  explicit SplitBlockBloomFilter(SbbfParams params)
      : num_blocks_(params.num_blocks), lanes_(params.num_blocks * 8, 0) {
    if (params.num_blocks < 1) {
      throw std::invalid_argument("sbbf: need at least one block");
    }
  }

  SplitBlockBloomFilter(uint64_t n, double epsilon)
      : SplitBlockBloomFilter(params_for(n, epsilon)) {}

  void insert_hash(uint64_t digest) noexcept {
    uint32_t* block = &lanes_[block_index(digest) * 8];
    const uint32_t x = static_cast<uint32_t>(digest);
    for (int i = 0; i < 8; ++i) {
      block[i] |= uint32_t{1} << (kLaneSalts[i] * x >> 27);
    }
  }

  bool find_hash(uint64_t digest) const noexcept {
    const uint32_t* block = &lanes_[block_index(digest) * 8];
    const uint32_t x = static_cast<uint32_t>(digest);
    for (int i = 0; i < 8; ++i) {
      if ((block[i] & (uint32_t{1} << (kLaneSalts[i] * x >> 27))) == 0) {
        return false;
      }
    }
    return true;
  }

  uint64_t num_blocks() const noexcept { return num_blocks_; }
  uint64_t allocated_bytes() const noexcept { return num_blocks_ * 32; }
  std::span<const uint32_t> lanes() const noexcept { return lanes_; }
  std::span<uint32_t> lanes() noexcept { return lanes_; }

 private:
  uint64_t block_index(uint64_t digest) const noexcept {
    return static_cast<uint32_t>(digest >> 32) % num_blocks_;
  }

  uint64_t num_blocks_;
  std::vector<uint32_t> lanes_;
};

}  // namespace taffy
