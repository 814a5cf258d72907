#pragma once

#include <cstdint>
#include <cstddef>
#include <cstring>

namespace taffy {

// Stateless indexed access into the splitmix64 output stream. All derived
// randomness in this library (hash seeds, Feistel round keys, eviction PRNG
// states) comes from splitmix64_at(seed, tag) with distinct tags, so a whole
// filter instance is reproducible from a single 64-bit seed.
constexpr uint64_t splitmix64_at(uint64_t seed, uint64_t tag) noexcept {
  uint64_t z = seed + (tag + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Small deterministic PRNG used for eviction victim selection.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(uint64_t seed) noexcept : state_(seed) {}

  constexpr uint64_t next() noexcept {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr uint64_t state() const noexcept { return state_; }
  constexpr void set_state(uint64_t s) noexcept { state_ = s; }

 private:
  uint64_t state_;
};

/**
 * Seeded 64-bit hash of arbitrary byte strings (MurmurHash64A layout).
 *
 * Deterministic across runs and platforms: the input is consumed as
 * little-endian 64-bit words regardless of host endianness. Every filter in
 * this library consumes keys only through one of these digests.
 */
class HashFunction64 {
 public:
  explicit constexpr HashFunction64(uint64_t seed = 0) noexcept : seed_(seed) {}

  uint64_t operator()(const void* data, size_t len) const noexcept {
    const uint64_t m = 0xc6a4a7935bd1e995ULL;
    const int r = 47;
    uint64_t h = seed_ ^ (static_cast<uint64_t>(len) * m);

    const unsigned char* p = static_cast<const unsigned char*>(data);
    const unsigned char* end = p + (len & ~size_t{7});
    while (p != end) {
      uint64_t k = load_le64(p);
      p += 8;
      k *= m;
      k ^= k >> r;
      k *= m;
      h ^= k;
      h *= m;
    }

    switch (len & 7) {
      case 7: h ^= uint64_t{p[6]} << 48; [[fallthrough]];
      case 6: h ^= uint64_t{p[5]} << 40; [[fallthrough]];
      case 5: h ^= uint64_t{p[4]} << 32; [[fallthrough]];
      case 4: h ^= uint64_t{p[3]} << 24; [[fallthrough]];
      case 3: h ^= uint64_t{p[2]} << 16; [[fallthrough]];
      case 2: h ^= uint64_t{p[1]} << 8; [[fallthrough]];
      case 1: h ^= uint64_t{p[0]}; h *= m; [[fallthrough]];
      default: break;
    }

    h ^= h >> r;
    h *= m;
    h ^= h >> r;
    return h;
  }

  // Hashes the key's little-endian byte representation.
  uint64_t operator()(uint64_t key) const noexcept {
    unsigned char bytes[8];
    store_le64(bytes, key);
    return (*this)(bytes, 8);
  }

  constexpr uint64_t seed() const noexcept { return seed_; }

 private:
  static uint64_t load_le64(const unsigned char* p) noexcept {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }

  static void store_le64(unsigned char* p, uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
  }

  uint64_t seed_;
};

}  // namespace taffy
