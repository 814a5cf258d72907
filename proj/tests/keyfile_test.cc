#include "taffy/keyfile.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <sstream>
#include <vector>

namespace taffy {
namespace {

std::vector<uint64_t> parse_all(const std::string& text, KeyFormat format) {
  std::istringstream in(text, std::ios::binary);
  std::vector<uint64_t> keys;
  for_each_key(in, format, [&keys](uint64_t k) { keys.push_back(k); });
  return keys;
}

TEST(KeyFormatName, ParsesKnownNames) {
  EXPECT_EQ(parse_key_format("hex"), KeyFormat::hex);
  EXPECT_EQ(parse_key_format("dec64"), KeyFormat::dec64);
  EXPECT_EQ(parse_key_format("raw64"), KeyFormat::raw64);
  EXPECT_THROW(parse_key_format("base64"), std::invalid_argument);
}

TEST(HexKeys, LastSixteenHexCharsBigEndian) {
  // A 40-character hash: the key is the value of its last 16 characters.
  const auto keys = parse_all(
      "00112233445566778899AABBCCDDEEFF01234567\n", KeyFormat::hex);
  ASSERT_EQ(keys.size(), 1u);
  EXPECT_EQ(keys[0], 0xCCDDEEFF01234567ULL);
}

TEST(HexKeys, CountSuffixIsIgnored) {
  const auto keys = parse_all(
      "00112233445566778899AABBCCDDEEFF01234567:1052\n"
      "ffffffffffffffffffffffffffffffffdeadbeef:1\n",
      KeyFormat::hex);
  ASSERT_EQ(keys.size(), 2u);
  EXPECT_EQ(keys[0], 0xCCDDEEFF01234567ULL);
  EXPECT_EQ(keys[1], 0xFFFFFFFFDEADBEEFULL);
}

TEST(HexKeys, ShortValuesAndCase) {
  const auto keys = parse_all("ab\nAB\n", KeyFormat::hex);
  ASSERT_EQ(keys.size(), 2u);
  EXPECT_EQ(keys[0], 0xabu);
  EXPECT_EQ(keys[1], 0xabu);
  EXPECT_THROW(parse_all("0x12\n", KeyFormat::hex), KeyParseError);
  EXPECT_THROW(parse_all(":12\n", KeyFormat::hex), KeyParseError);
}

TEST(HexKeys, BlankLinesAndCarriageReturnsSkipped) {
  const auto keys = parse_all("ab\r\n\n  \n12:\r\n", KeyFormat::hex);
  ASSERT_EQ(keys.size(), 2u);
  EXPECT_EQ(keys[0], 0xabu);
  EXPECT_EQ(keys[1], 0x12u);
}

TEST(HexKeys, BadDigitReportsLineNumber) {
  std::istringstream in("ab\ncd\nxyz\n", std::ios::binary);
  try {
    for_each_key(in, KeyFormat::hex, [](uint64_t) {});
    FAIL() << "expected KeyParseError";
  } catch (const KeyParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(DecKeys, ParsesDecimals) {
  const auto keys =
      parse_all("0\n12345\n18446744073709551615\n", KeyFormat::dec64);
  ASSERT_EQ(keys.size(), 3u);
  EXPECT_EQ(keys[0], 0u);
  EXPECT_EQ(keys[1], 12345u);
  EXPECT_EQ(keys[2], 0xffffffffffffffffULL);
}

TEST(DecKeys, RejectsGarbage) {
  EXPECT_THROW(parse_all("12x\n", KeyFormat::dec64), KeyParseError);
  EXPECT_THROW(parse_all("abc\n", KeyFormat::dec64), KeyParseError);
  EXPECT_THROW(parse_all("18446744073709551616\n", KeyFormat::dec64),
               KeyParseError);
}

TEST(RawKeys, LittleEndianWords) {
  std::string bytes;
  bytes.append("\x01\x00\x00\x00\x00\x00\x00\x00", 8);
  bytes.append("\xff\xee\xdd\xcc\xbb\xaa\x99\x88", 8);
  const auto keys = parse_all(bytes, KeyFormat::raw64);
  ASSERT_EQ(keys.size(), 2u);
  EXPECT_EQ(keys[0], 1u);
  EXPECT_EQ(keys[1], 0x8899AABBCCDDEEFFULL);
}

TEST(RawKeys, TruncatedWordRejected) {
  std::string bytes("\x01\x00\x00\x00\x00\x00\x00\x00", 8);
  bytes.append("\x02\x03", 2);
  std::istringstream in(bytes, std::ios::binary);
  try {
    for_each_key(in, KeyFormat::raw64, [](uint64_t) {});
    FAIL() << "expected KeyParseError";
  } catch (const KeyParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(AllFormats, ReturnsCount) {
  std::istringstream in("1\n2\n3\n", std::ios::binary);
  uint64_t sum = 0;
  const uint64_t count =
      for_each_key(in, KeyFormat::dec64, [&sum](uint64_t k) { sum += k; });
  EXPECT_EQ(count, 3u);
  EXPECT_EQ(sum, 6u);
}

}  // namespace
}  // namespace taffy
