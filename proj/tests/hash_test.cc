#include "taffy/hash.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdint>

namespace taffy {
namespace {

TEST(SplitMix, MatchesReferenceStream) {
  // First output of the reference splitmix64 generator seeded with 0.
  EXPECT_EQ(splitmix64_at(0, 0), 0xe220a8397b1dcdafULL);
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.next(), splitmix64_at(0, 1));
}

TEST(Hash, Deterministic) {
  HashFunction64 h(123);
  EXPECT_EQ(h(uint64_t{42}), h(uint64_t{42}));
  EXPECT_EQ(h("abc", 3), h("abc", 3));
}

TEST(Hash, PinnedValues) {
  HashFunction64 h0(0);
  HashFunction64 h1(0x9e3779b97f4a7c15ULL);
  EXPECT_EQ(h0(uint64_t{0}), 0x7208f7fa198a2d81ULL);
  EXPECT_EQ(h0(uint64_t{1}), 0x8fbb8d815c9e092eULL);
  EXPECT_EQ(h1(uint64_t{0}), 0x09e3d84c33e3f4aeULL);
  EXPECT_EQ(h0("taffy", 5), 0x0598e4213ec9850bULL);
}

TEST(Hash, IntegerPathMatchesBytePath) {
  HashFunction64 h(77);
  const uint64_t key = 0x0123456789abcdefULL;
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(key >> (8 * i));
  EXPECT_EQ(h(key), h(bytes, 8));
}

TEST(Hash, OutputBitsAreUnbiased) {
  HashFunction64 h(2024);
  constexpr uint64_t kKeys = 1000000;
  std::array<uint64_t, 64> ones{};
  for (uint64_t k = 0; k < kKeys; ++k) {
    uint64_t digest = h(k);
    for (int b = 0; b < 64; ++b) ones[b] += digest >> b & 1;
  }
  for (int b = 0; b < 64; ++b) {
    const double freq = static_cast<double>(ones[b]) / kKeys;
    EXPECT_NEAR(freq, 0.5, 0.01) << "bit " << b;
  }
}

TEST(Hash, DifferentSeedsDisagree) {
  HashFunction64 h1(1), h2(2);
  int disagreements = 0;
  for (uint64_t k = 0; k < 1000; ++k) {
    disagreements += h1(k) != h2(k);
  }
  EXPECT_GE(disagreements, 1);
}

TEST(Hash, ShortInputsCoverAllTailLengths) {
  HashFunction64 h(5);
  const char buf[16] = "abcdefghijklmno";
  uint64_t seen[9];
  for (size_t len = 0; len <= 8; ++len) seen[len] = h(buf, len);
  for (size_t i = 0; i <= 8; ++i) {
    for (size_t j = i + 1; j <= 8; ++j) EXPECT_NE(seen[i], seen[j]);
  }
}

}  // namespace
}  // namespace taffy
