#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tap {

using Bytes = std::vector<uint8_t>;
using Digest256 = std::array<uint8_t, 32>;
using uint128 = unsigned __int128;

std::string to_hex(std::span<const uint8_t> data);
Bytes from_hex(const std::string& hex);

std::string base64_encode(std::span<const uint8_t> data);
Bytes base64_decode(const std::string& text);

std::string u128_to_string(uint128 v);
uint128 u128_from_string(const std::string& text);

// Big-endian fixed-width encoders; all hashed encodings go through these.
void put_u32_be(Bytes& out, uint32_t v);
void put_u64_be(Bytes& out, uint64_t v);
std::array<uint8_t, 4> u32_be(uint32_t v);
std::array<uint8_t, 8> u64_be(uint64_t v);
std::array<uint8_t, 16> u128_be(uint128 v);
uint32_t read_u32_be(std::span<const uint8_t> in);
uint64_t read_u64_be(std::span<const uint8_t> in);
uint128 read_u128_be(std::span<const uint8_t> in);

// A bit string of explicit length, most significant bit first. Used for
// prefix-tree keys and key fragments.
class BitString {
 public:
  BitString() = default;

  static BitString from_string(const std::string& bits);  // e.g. "0110"
  static BitString from_uint(uint64_t value, size_t width);

  void append_bit(bool bit);
  void append_uint(uint64_t value, size_t width);
  void append(const BitString& other);

  bool bit(size_t i) const { return bits_[i]; }
  size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }

  BitString prefix(size_t n) const;
  bool is_prefix_of(const BitString& other) const;
  // Value of bits [begin, end) as an integer, MSB first.
  uint64_t slice_uint(size_t begin, size_t end) const;

  std::string to_string() const;
  Bytes packed() const;  // ceil(size/8) bytes, MSB-first within each byte
  static BitString unpack(std::span<const uint8_t> data, size_t bit_len);

  auto operator<=>(const BitString&) const = default;

 private:
  std::vector<uint8_t> bits_;  // one byte per bit, 0 or 1
};

// Exact nonnegative rational with small terms; used for quantile fractions.
struct Fraction {
  uint64_t num = 0;
  uint64_t den = 1;

  static Fraction parse(const std::string& text);  // decimal like "0.05" or "1"
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Fraction&) const = default;
};

}  // namespace tap
