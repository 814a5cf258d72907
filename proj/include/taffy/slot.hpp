#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>

namespace taffy {

constexpr uint64_t low_mask(int bits) noexcept {
  return bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << bits) - 1;
}

// Tail values are stored value-aligned: a tail of length L occupies the low L
// bits and its first (most significant) bit is bit L-1. The on-disk/in-slot
// tail code prepends a terminating one bit: 0^(T-L) 1 tail. A tail code of
// all zeros marks an empty slot, distinct from a present element whose tail
// has length zero (code 0...01).

constexpr uint16_t tail_code(uint64_t tail, int len) {
  return static_cast<uint16_t>((uint64_t{1} << len) | tail);
}

struct DecodedTail {
  uint16_t bits;
  int len;
};

// code == 0 (empty slot) decodes to length -1; element accessors below are
// only meaningful on nonempty slots.
constexpr DecodedTail decode_tail_code(uint16_t code) noexcept {
  if (code == 0) return {0, -1};
  const int len = std::bit_width(code) - 1;
  return {static_cast<uint16_t>(code ^ (uint16_t{1} << len)), len};
}

/**
 * One 16-bit slot of a taffy cuckoo filter: fingerprint (F bits) followed by
 * a unary-terminated tail code (T+1 bits). F + T + 1 must be 16.
 */
template <int F, int T>
struct Slot {
  static_assert(F + T + 1 == 16, "slot must fill one 16-bit word");
  static constexpr uint16_t kFingerprintMask = (uint16_t{1} << F) - 1;
  static constexpr uint16_t kTailMask = (uint16_t{1} << (T + 1)) - 1;

  uint16_t raw = 0;

  static Slot encode(uint64_t fingerprint, uint64_t tail, int tail_len) {
    if (tail_len < 0 || tail_len > T) {
      throw std::out_of_range("Slot::encode: tail longer than T");
    }
    return Slot{static_cast<uint16_t>(
        (fingerprint & kFingerprintMask) << (T + 1) | tail_code(tail, tail_len))};
  }

  constexpr bool empty() const noexcept { return (raw & kTailMask) == 0; }
  constexpr uint16_t fingerprint() const noexcept {
    return static_cast<uint16_t>(raw >> (T + 1)) & kFingerprintMask;
  }
  constexpr uint16_t tail_bits() const noexcept {
    return decode_tail_code(raw & kTailMask).bits;
  }
  constexpr int tail_len() const noexcept {
    return decode_tail_code(raw & kTailMask).len;
  }

  // True iff the stored tail is a prefix of the key's T-bit tail.
  constexpr bool tail_matches(uint64_t key_tail) const noexcept {
    const auto [bits, len] = decode_tail_code(raw & kTailMask);
    return bits == (key_tail >> (T - len));
  }

  friend constexpr bool operator==(Slot a, Slot b) noexcept = default;
};

/**
 * One 16-bit slot of a minimal taffy cuckoo filter. Layout: a length flag in
 * the top bit (set when the fingerprint has F bits, clear for F-1), the
 * fingerprint, then the same unary-terminated tail code as Slot.
 * 1 + F + T + 1 must be 16.
 */
template <int F, int T>
struct FlaggedSlot {
  static_assert(1 + F + T + 1 == 16, "slot must fill one 16-bit word");
  static constexpr uint16_t kFingerprintMask = (uint16_t{1} << F) - 1;
  static constexpr uint16_t kTailMask = (uint16_t{1} << (T + 1)) - 1;

  uint16_t raw = 0;

  static FlaggedSlot encode(int fingerprint_len, uint64_t fingerprint,
                            uint64_t tail, int tail_len) {
    if (tail_len < 0 || tail_len > T) {
      throw std::out_of_range("FlaggedSlot::encode: tail longer than T");
    }
    if (fingerprint_len != F && fingerprint_len != F - 1) {
      throw std::out_of_range("FlaggedSlot::encode: fingerprint length");
    }
    const uint16_t flag = fingerprint_len == F ? 1 : 0;
    return FlaggedSlot{static_cast<uint16_t>(
        flag << 15 | (fingerprint & kFingerprintMask) << (T + 1) |
        tail_code(tail, tail_len))};
  }

  constexpr bool empty() const noexcept { return (raw & kTailMask) == 0; }
  constexpr int fingerprint_len() const noexcept { return raw >> 15 ? F : F - 1; }
  constexpr uint16_t fingerprint() const noexcept {
    return static_cast<uint16_t>(raw >> (T + 1)) & kFingerprintMask;
  }
  constexpr uint16_t tail_bits() const noexcept {
    return decode_tail_code(raw & kTailMask).bits;
  }
  constexpr int tail_len() const noexcept {
    return decode_tail_code(raw & kTailMask).len;
  }
  constexpr bool tail_matches(uint64_t key_tail) const noexcept {
    const auto [bits, len] = decode_tail_code(raw & kTailMask);
    return bits == (key_tail >> (T - len));
  }

  friend constexpr bool operator==(FlaggedSlot a, FlaggedSlot b) noexcept = default;
};

}  // namespace taffy
