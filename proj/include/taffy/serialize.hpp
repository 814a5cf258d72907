#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>

#include "taffy/mtcf.hpp"
#include "taffy/tbf.hpp"
#include "taffy/tcf.hpp"

namespace taffy {

// File layout, all integers little-endian:
//   magic "TAFY" | u8 version | u8 type tag | u64 seed | params | payload |
//   u64 checksum (FNV-1a over every preceding byte)
//
// Growable cuckoo slot arrays are written as 16-bit words in (side, bucket,
// slot) row-major order; frozen filters bit-pack their slots (11 bits each),
// which is what makes a frozen file substantially smaller than the growable
// one. Permutation round keys are never stored: they re-derive from the seed.

enum class FilterKind : uint8_t {
  tbf = 1,
  tcf = 2,
  mtcf = 3,
  frozen_tcf = 4,
  frozen_mtcf = 5,
};

enum class LoadError {
  bad_magic,
  bad_version,
  bad_type,
  bad_checksum,
  truncated,
  bad_params,
};

class SerializeError : public std::runtime_error {
 public:
  SerializeError(LoadError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  LoadError code() const noexcept { return code_; }

 private:
  LoadError code_;
};

namespace detail {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr char kMagic[4] = {'T', 'A', 'F', 'Y'};
constexpr uint8_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      fnv_ = (fnv_ ^ p[i]) * kFnvPrime;
    }
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out_) throw std::runtime_error("save: write failed");
  }

  void u8(uint8_t v) { bytes(&v, 1); }
  void u16(uint16_t v) { le(v, 2); }
  void u32(uint32_t v) { le(v, 4); }
  void u64(uint64_t v) { le(v, 8); }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }

  // LSB-first bit packing for frozen slot arrays.
  void push_bits(uint64_t value, int count) {
    bit_buf_ |= value << bit_count_;
    bit_count_ += count;
    while (bit_count_ >= 8) {
      u8(static_cast<uint8_t>(bit_buf_));
      bit_buf_ >>= 8;
      bit_count_ -= 8;
    }
  }
  void flush_bits() {
    if (bit_count_ > 0) {
      u8(static_cast<uint8_t>(bit_buf_));
      bit_buf_ = 0;
      bit_count_ = 0;
    }
  }

  // Writes the checksum of everything so far; must be the final field.
  void finish() {
    const uint64_t sum = fnv_;
    u64(sum);
  }

 private:
  void le(uint64_t v, int n) {
    unsigned char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, n);
  }

  std::ostream& out_;
  uint64_t fnv_ = kFnvOffset;
  uint64_t bit_buf_ = 0;
  int bit_count_ = 0;
};

// Parses an in-memory byte range whose checksum has already been validated.
class Reader {
 public:
  Reader(const unsigned char* data, size_t size)
      : p_(data), end_(data + size) {}

  void bytes(void* out, size_t len) {
    if (static_cast<size_t>(end_ - p_) < len) {
      throw SerializeError(LoadError::truncated, "load: unexpected end of file");
    }
    std::memcpy(out, p_, len);
    p_ += len;
  }

  uint8_t u8() {
    uint8_t v;
    bytes(&v, 1);
    return v;
  }
  uint16_t u16() { return static_cast<uint16_t>(le(2)); }
  uint32_t u32() { return static_cast<uint32_t>(le(4)); }
  uint64_t u64() { return le(8); }
  double f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  uint64_t pull_bits(int count) {
    while (bit_count_ < count) {
      bit_buf_ |= static_cast<uint64_t>(u8()) << bit_count_;
      bit_count_ += 8;
    }
    const uint64_t v = bit_buf_ & low_mask(count);
    bit_buf_ >>= count;
    bit_count_ -= count;
    return v;
  }
  void drop_bit_padding() {
    bit_buf_ = 0;
    bit_count_ = 0;
  }

  void done() const {
    if (p_ != end_) {
      throw SerializeError(LoadError::truncated, "load: trailing bytes");
    }
  }

 private:
  uint64_t le(int n) {
    unsigned char buf[8];
    bytes(buf, static_cast<size_t>(n));
    uint64_t v = 0;
    for (int i = n - 1; i >= 0; --i) v = v << 8 | buf[i];
    return v;
  }

  const unsigned char* p_;
  const unsigned char* end_;
  uint64_t bit_buf_ = 0;
  int bit_count_ = 0;
};

inline void write_header(Writer& w, FilterKind kind, uint64_t seed) {
  w.bytes(kMagic, 4);
  w.u8(kVersion);
  w.u8(static_cast<uint8_t>(kind));
  w.u64(seed);
}

}  // namespace detail

inline void save(const TaffyBlockFilter& f, std::ostream& out) {
  detail::Writer w(out);
  detail::write_header(w, FilterKind::tbf, f.seed());
  w.f64(f.epsilon());
  w.u64(f.size());
  w.u64(f.inserts_in_current());
  w.u32(static_cast<uint32_t>(f.level_count()));
  for (const auto& level : f.levels()) {
    w.u64(level.filter.num_blocks());
    for (uint32_t lane : level.filter.lanes()) w.u32(lane);
  }
  w.finish();
}

inline void save(const TaffyCuckooFilter& f, std::ostream& out) {
  detail::Writer w(out);
  detail::write_header(w, FilterKind::tcf, f.seed());
  w.u8(TaffyCuckooFilter::kFingerprintBits);
  w.u8(TaffyCuckooFilter::kMaxTailBits);
  w.u8(TaffyCuckooFilter::kSlotsPerBucket);
  w.u8(static_cast<uint8_t>(f.log_buckets()));
  w.u64(f.occupied());
  w.u64(f.rng_state());
  for (const auto& side : f.sides()) {
    for (uint16_t slot : side.slots) w.u16(slot);
  }
  w.u32(static_cast<uint32_t>(f.stash().size()));
  for (const auto& e : f.stash()) {
    w.u64(e.prefix);
    w.u8(e.tail_len);
    w.u8(static_cast<uint8_t>(e.tail));
  }
  w.finish();
}

inline void save(const MinimalTaffyCuckooFilter& f, std::ostream& out) {
  detail::Writer w(out);
  detail::write_header(w, FilterKind::mtcf, f.seed());
  w.u8(MinimalTaffyCuckooFilter::kFingerprintBits);
  w.u8(MinimalTaffyCuckooFilter::kMaxTailBits);
  w.u8(MinimalTaffyCuckooFilter::kSlotsPerBucket);
  w.u8(MinimalTaffyCuckooFilter::kLevelsLog);
  w.u8(static_cast<uint8_t>(f.log_smallest_level()));
  w.u32(f.cursor());
  w.u64(f.occupied());
  w.u64(f.rng_state());
  for (const auto& level : f.levels()) {
    for (const auto& side : level.sides) {
      for (uint16_t slot : side) w.u16(slot);
    }
  }
  w.u32(static_cast<uint32_t>(f.stash().size()));
  for (const auto& e : f.stash()) {
    w.u64(e.prefix);
    w.u8(e.width);
    w.u8(e.tail_len);
    w.u8(static_cast<uint8_t>(e.tail));
  }
  w.finish();
}

inline void save(const FrozenTaffyCuckooFilter& f, std::ostream& out) {
  detail::Writer w(out);
  detail::write_header(w, FilterKind::frozen_tcf, f.seed());
  w.u8(FrozenTaffyCuckooFilter::kFingerprintBits);
  w.u8(FrozenTaffyCuckooFilter::kSlotsPerBucket);
  w.u8(static_cast<uint8_t>(f.log_buckets()));
  for (const auto& side : f.sides()) {
    for (uint16_t slot : side.slots) {
      w.push_bits(slot, FrozenTaffyCuckooFilter::kFingerprintBits + 1);
    }
  }
  w.flush_bits();
  w.u32(static_cast<uint32_t>(f.stash().size()));
  for (uint64_t prefix : f.stash()) w.u64(prefix);
  w.finish();
}

inline void save(const FrozenMinimalTaffyCuckooFilter& f, std::ostream& out) {
  using Source = MinimalTaffyCuckooFilter;
  detail::Writer w(out);
  detail::write_header(w, FilterKind::frozen_mtcf, f.seed());
  w.u8(Source::kFingerprintBits);
  w.u8(Source::kSlotsPerBucket);
  w.u8(Source::kLevelsLog);
  w.u8(static_cast<uint8_t>(f.log_smallest_level()));
  w.u32(f.cursor());
  for (const auto& level : f.levels()) {
    for (const auto& side : level.sides) {
      for (uint16_t raw : side) {
        const Source::SlotT slot{raw};
        const uint64_t present = slot.empty() ? 0 : 1;
        const uint64_t flag =
            present && slot.fingerprint_len() == Source::kFingerprintBits ? 1
                                                                          : 0;
        const uint64_t fp = present ? slot.fingerprint() : 0;
        w.push_bits(flag << (Source::kFingerprintBits + 1) | fp << 1 | present,
                    Source::kFingerprintBits + 2);
      }
    }
  }
  w.flush_bits();
  w.u32(static_cast<uint32_t>(f.stash().size()));
  for (const auto& e : f.stash()) {
    w.u64(e.prefix);
    w.u8(e.width);
  }
  w.finish();
}

using AnyFilter =
    std::variant<TaffyBlockFilter, TaffyCuckooFilter, MinimalTaffyCuckooFilter,
                 FrozenTaffyCuckooFilter, FrozenMinimalTaffyCuckooFilter>;

namespace detail {

inline TaffyBlockFilter load_tbf(Reader& r, uint64_t seed) {
  const double epsilon = r.f64();
  const uint64_t size = r.u64();
  const uint64_t inserts_in_current = r.u64();
  const uint32_t level_count = r.u32();
  if (!(epsilon > 0.0 && epsilon < 1.0) || level_count < 1 ||
      level_count > 62) {
    throw SerializeError(LoadError::bad_params, "load: bad tbf parameters");
  }
  TaffyBlockFilter f(epsilon, seed);
  f.levels().clear();
  for (uint32_t i = 1; i <= level_count; ++i) {
    const uint64_t num_blocks = r.u64();
    if (num_blocks < 1 || num_blocks > (uint64_t{1} << 40)) {
      throw SerializeError(LoadError::bad_params, "load: bad tbf level size");
    }
    SplitBlockBloomFilter sbbf(SbbfParams{num_blocks});
    for (uint32_t& lane : sbbf.lanes()) lane = r.u32();
    f.levels().push_back(TaffyBlockFilter::Level{
        uint64_t{1} << i, TaffyBlockFilter::level_fpp(epsilon, static_cast<int>(i)),
        std::move(sbbf)});
  }
  f.restore_counters(size, inserts_in_current);
  return f;
}

inline TaffyCuckooFilter load_tcf(Reader& r, uint64_t seed) {
  const uint8_t fp_bits = r.u8();
  const uint8_t tail_bits = r.u8();
  const uint8_t bucket_slots = r.u8();
  const uint8_t a = r.u8();
  if (fp_bits != TaffyCuckooFilter::kFingerprintBits ||
      tail_bits != TaffyCuckooFilter::kMaxTailBits ||
      bucket_slots != TaffyCuckooFilter::kSlotsPerBucket ||
      a + TaffyCuckooFilter::kFingerprintBits +
              TaffyCuckooFilter::kMaxTailBits >
          64) {
    throw SerializeError(LoadError::bad_params, "load: bad tcf parameters");
  }
  const uint64_t occupied = r.u64();
  const uint64_t rng_state = r.u64();
  TaffyCuckooFilter f(seed, a);
  for (auto& side : f.sides()) {
    for (uint16_t& slot : side.slots) slot = r.u16();
  }
  const uint32_t stash_count = r.u32();
  for (uint32_t i = 0; i < stash_count; ++i) {
    TaffyCuckooFilter::StashEntry e{};
    e.prefix = r.u64();
    e.tail_len = r.u8();
    e.tail = r.u8();
    f.stash().push_back(e);
  }
  f.restore_counters(occupied, rng_state);
  return f;
}

inline MinimalTaffyCuckooFilter load_mtcf(Reader& r, uint64_t seed) {
  using Source = MinimalTaffyCuckooFilter;
  const uint8_t fp_bits = r.u8();
  const uint8_t tail_bits = r.u8();
  const uint8_t bucket_slots = r.u8();
  const uint8_t levels_log = r.u8();
  const uint8_t a = r.u8();
  const uint32_t cursor = r.u32();
  if (fp_bits != Source::kFingerprintBits ||
      tail_bits != Source::kMaxTailBits ||
      bucket_slots != Source::kSlotsPerBucket ||
      levels_log != Source::kLevelsLog || cursor >= Source::kLevels ||
      Source::kLevelsLog + a + Source::kFingerprintBits +
              Source::kMaxTailBits >
          64) {
    throw SerializeError(LoadError::bad_params, "load: bad mtcf parameters");
  }
  const uint64_t occupied = r.u64();
  const uint64_t rng_state = r.u64();
  Source f(seed, a, cursor);
  for (auto& level : f.levels()) {
    for (auto& side : level.sides) {
      for (uint16_t& slot : side) slot = r.u16();
    }
  }
  const uint32_t stash_count = r.u32();
  for (uint32_t i = 0; i < stash_count; ++i) {
    Source::StashEntry e{};
    e.prefix = r.u64();
    e.width = r.u8();
    e.tail_len = r.u8();
    e.tail = r.u8();
    f.stash().push_back(e);
  }
  f.restore_counters(occupied, rng_state);
  return f;
}

inline FrozenTaffyCuckooFilter load_frozen_tcf(Reader& r, uint64_t seed) {
  const uint8_t fp_bits = r.u8();
  const uint8_t bucket_slots = r.u8();
  const uint8_t a = r.u8();
  if (fp_bits != FrozenTaffyCuckooFilter::kFingerprintBits ||
      bucket_slots != FrozenTaffyCuckooFilter::kSlotsPerBucket || a > 54) {
    throw SerializeError(LoadError::bad_params,
                         "load: bad frozen tcf parameters");
  }
  const size_t per_side =
      (size_t{1} << a) * FrozenTaffyCuckooFilter::kSlotsPerBucket;
  std::array<std::vector<uint16_t>, 2> slots;
  for (auto& side : slots) {
    side.resize(per_side);
    for (uint16_t& slot : side) {
      slot = static_cast<uint16_t>(
          r.pull_bits(FrozenTaffyCuckooFilter::kFingerprintBits + 1));
    }
  }
  r.drop_bit_padding();
  const uint32_t stash_count = r.u32();
  std::vector<uint64_t> stash(stash_count);
  for (uint64_t& prefix : stash) prefix = r.u64();
  return FrozenTaffyCuckooFilter(seed, a, std::move(slots), std::move(stash));
}

inline FrozenMinimalTaffyCuckooFilter load_frozen_mtcf(Reader& r,
                                                       uint64_t seed) {
  using Source = MinimalTaffyCuckooFilter;
  const uint8_t fp_bits = r.u8();
  const uint8_t bucket_slots = r.u8();
  const uint8_t levels_log = r.u8();
  const uint8_t a = r.u8();
  const uint32_t cursor = r.u32();
  if (fp_bits != Source::kFingerprintBits ||
      bucket_slots != Source::kSlotsPerBucket ||
      levels_log != Source::kLevelsLog || cursor >= Source::kLevels ||
      a > 44) {
    throw SerializeError(LoadError::bad_params,
                         "load: bad frozen mtcf parameters");
  }
  std::vector<Source::Level> levels(Source::kLevels);
  for (uint32_t lvl = 0; lvl < Source::kLevels; ++lvl) {
    const int lb = a + (lvl < cursor ? 1 : 0);
    const size_t n = (size_t{1} << lb) * Source::kSlotsPerBucket;
    for (auto& side : levels[lvl].sides) {
      side.resize(n);
      for (uint16_t& slot : side) {
        const uint64_t field = r.pull_bits(Source::kFingerprintBits + 2);
        if ((field & 1) == 0) {
          slot = 0;
          continue;
        }
        const int fp_len = field >> (Source::kFingerprintBits + 1)
                               ? Source::kFingerprintBits
                               : Source::kFingerprintBits - 1;
        const uint64_t fp =
            field >> 1 & low_mask(Source::kFingerprintBits);
        slot = Source::SlotT::encode(fp_len, fp, 0, 0).raw;
      }
    }
  }
  r.drop_bit_padding();
  const uint32_t stash_count = r.u32();
  std::vector<FrozenMinimalTaffyCuckooFilter::StashPrefix> stash(stash_count);
  for (auto& e : stash) {
    e.prefix = r.u64();
    e.width = r.u8();
  }
  return FrozenMinimalTaffyCuckooFilter(seed, a, cursor, std::move(levels),
                                        std::move(stash));
}

}  // namespace detail

inline AnyFilter load(std::istream& in) {
  const std::string buf{std::istreambuf_iterator<char>(in),
                        std::istreambuf_iterator<char>()};
  const auto* data = reinterpret_cast<const unsigned char*>(buf.data());
  if (buf.size() >= 4 && std::memcmp(data, detail::kMagic, 4) != 0) {
    throw SerializeError(LoadError::bad_magic, "load: not a filter file");
  }
  if (buf.size() >= 5 && data[4] != detail::kVersion) {
    throw SerializeError(LoadError::bad_version, "load: unknown version");
  }
  if (buf.size() >= 6 && (data[5] < 1 || data[5] > 5)) {
    throw SerializeError(LoadError::bad_type, "load: unknown type tag");
  }
  if (buf.size() < 6 + 8 + 8) {
    throw SerializeError(LoadError::truncated, "load: file too short");
  }
  // Checksum covers everything before its own trailing 8 bytes.
  uint64_t fnv = detail::kFnvOffset;
  for (size_t i = 0; i + 8 < buf.size(); ++i) {
    fnv = (fnv ^ data[i]) * detail::kFnvPrime;
  }
  uint64_t stored = 0;
  for (size_t i = 0; i < 8; ++i) {
    stored |= uint64_t{data[buf.size() - 8 + i]} << (8 * i);
  }
  if (stored != fnv) {
    throw SerializeError(LoadError::bad_checksum, "load: checksum mismatch");
  }

  detail::Reader r(data + 6, buf.size() - 6 - 8);
  const auto tag = static_cast<FilterKind>(data[5]);
  const uint64_t seed = r.u64();
  AnyFilter f = [&]() -> AnyFilter {
    switch (tag) {
      case FilterKind::tbf: return detail::load_tbf(r, seed);
      case FilterKind::tcf: return detail::load_tcf(r, seed);
      case FilterKind::mtcf: return detail::load_mtcf(r, seed);
      case FilterKind::frozen_tcf: return detail::load_frozen_tcf(r, seed);
      case FilterKind::frozen_mtcf: return detail::load_frozen_mtcf(r, seed);
    }
    throw SerializeError(LoadError::bad_type, "load: unknown type tag");
  }();
  r.done();
  return f;
}

inline FilterKind kind_of(const AnyFilter& f) {
  return static_cast<FilterKind>(f.index() + 1);
}

inline void save(const AnyFilter& f, std::ostream& out) {
  std::visit([&out](const auto& filter) { save(filter, out); }, f);
}

inline bool any_find_hash(const AnyFilter& f, uint64_t digest) {
  return std::visit(
      [digest](const auto& filter) { return filter.find_hash(digest); }, f);
}

inline bool any_contains(const AnyFilter& f, uint64_t key) {
  return std::visit([key](const auto& filter) { return filter.contains(key); },
                    f);
}

}  // namespace taffy
