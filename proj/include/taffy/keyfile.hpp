#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace taffy {

// Key input formats:
//   hex   — one hexadecimal hash per line (an optional ":suffix", as in
//           breach-corpus dumps, is ignored); the key is the value of the
//           last 16 hex characters read big-endian, i.e. the hash's 64
//           low-order bits.
//   dec64 — one decimal 64-bit integer per line.
//   raw64 — consecutive little-endian 8-byte words, no framing.
enum class KeyFormat { hex, dec64, raw64 };

inline KeyFormat parse_key_format(std::string_view name) {
  if (name == "hex") return KeyFormat::hex;
  if (name == "dec64") return KeyFormat::dec64;
  if (name == "raw64") return KeyFormat::raw64;
  throw std::invalid_argument("unknown key format: " + std::string(name));
}

class KeyParseError : public std::runtime_error {
 public:
  KeyParseError(uint64_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  uint64_t line() const noexcept { return line_; }

 private:
  uint64_t line_;
};

namespace detail {

inline int hex_digit(char c) noexcept {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline uint64_t parse_hex_line(std::string_view text, uint64_t line) {
  if (const size_t colon = text.find(':'); colon != std::string_view::npos) {
    text = text.substr(0, colon);
  }
  if (text.empty()) throw KeyParseError(line, "empty hash");
  uint64_t value = 0;
  for (char c : text) {
    const int digit = hex_digit(c);
    if (digit < 0) {
      throw KeyParseError(line, "invalid hex digit '" + std::string(1, c) + "'");
    }
    value = value << 4 | static_cast<uint64_t>(digit);  // keeps the low 64 bits
  }
  return value;
}

inline uint64_t parse_dec_line(std::string_view text, uint64_t line) {
  uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value, 10);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw KeyParseError(line, "invalid decimal key");
  }
  return value;
}

}  // namespace detail

// Streams every key in the input to fn(uint64_t). Text formats skip blank
// lines; malformed input raises KeyParseError with a 1-based line number
// (for raw64, the index of the offending 8-byte word).
template <class Fn>
uint64_t for_each_key(std::istream& in, KeyFormat format, Fn fn) {
  uint64_t count = 0;
  if (format == KeyFormat::raw64) {
    char word[8];
    for (uint64_t index = 1;; ++index) {
      in.read(word, 8);
      const auto got = in.gcount();
      if (got == 0) break;
      if (got != 8) {
        throw KeyParseError(index, "truncated 8-byte word");
      }
      uint64_t value = 0;
      for (int i = 7; i >= 0; --i) {
        value = value << 8 | static_cast<unsigned char>(word[i]);
      }
      fn(value);
      ++count;
    }
    return count;
  }
  std::string raw;
  for (uint64_t line = 1; std::getline(in, raw); ++line) {
    std::string_view text = raw;
    while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) {
      text.remove_suffix(1);
    }
    while (!text.empty() && text.front() == ' ') {
      text.remove_prefix(1);
    }
    if (text.empty()) continue;
    fn(format == KeyFormat::hex ? detail::parse_hex_line(text, line)
                                : detail::parse_dec_line(text, line));
    ++count;
  }
  return count;
}

}  // namespace taffy
