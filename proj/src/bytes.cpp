#include "tap/bytes.hpp"

#include <sodium.h>

#include <algorithm>
#include <stdexcept>

#include "tap/errors.hpp"

namespace tap {

std::string to_hex(std::span<const uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

static int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

Bytes from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw Error(ErrorCode::malformed, "odd hex length");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_nibble(hex[i]);
    int lo = hex_nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::malformed, "bad hex digit");
    out.push_back(static_cast<uint8_t>((hi << 4) | lo));
  }
  return out;
}

std::string base64_encode(std::span<const uint8_t> data) {
  std::string out(sodium_base64_ENCODED_LEN(data.size(), sodium_base64_VARIANT_ORIGINAL), '\0');
  sodium_bin2base64(out.data(), out.size(), data.data(), data.size(),
                    sodium_base64_VARIANT_ORIGINAL);
  out.resize(out.find('\0') == std::string::npos ? out.size() : out.find('\0'));
  return out;
}

Bytes base64_decode(const std::string& text) {
  Bytes out(text.size() == 0 ? 0 : text.size(), 0);
  size_t len = 0;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, nullptr,
                        sodium_base64_VARIANT_ORIGINAL) != 0) {
    throw Error(ErrorCode::malformed, "bad base64");
  }
  out.resize(len);
  return out;
}

std::string u128_to_string(uint128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v > 0) {
    out.push_back(static_cast<char>('0' + static_cast<unsigned>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

uint128 u128_from_string(const std::string& text) {
  if (text.empty()) throw Error(ErrorCode::malformed, "empty number");
  uint128 v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw Error(ErrorCode::malformed, "bad digit");
    uint128 next = v * 10 + static_cast<unsigned>(c - '0');
    if (next < v) throw Error(ErrorCode::malformed, "number too large");
    v = next;
  }
  return v;
}

void put_u32_be(Bytes& out, uint32_t v) {
  auto a = u32_be(v);
  out.insert(out.end(), a.begin(), a.end());
}

void put_u64_be(Bytes& out, uint64_t v) {
  auto a = u64_be(v);
  out.insert(out.end(), a.begin(), a.end());
}

std::array<uint8_t, 4> u32_be(uint32_t v) {
  return {static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
          static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
}

std::array<uint8_t, 8> u64_be(uint64_t v) {
  std::array<uint8_t, 8> a{};
  for (int i = 7; i >= 0; --i) {
    a[i] = static_cast<uint8_t>(v & 0xff);
    v >>= 8;
  }
  return a;
}

std::array<uint8_t, 16> u128_be(uint128 v) {
  std::array<uint8_t, 16> a{};
  for (int i = 15; i >= 0; --i) {
    a[i] = static_cast<uint8_t>(v & 0xff);
    v >>= 8;
  }
  return a;
}

uint32_t read_u32_be(std::span<const uint8_t> in) {
  if (in.size() < 4) throw Error(ErrorCode::malformed, "short u32");
  return (uint32_t(in[0]) << 24) | (uint32_t(in[1]) << 16) | (uint32_t(in[2]) << 8) |
         uint32_t(in[3]);
}

uint64_t read_u64_be(std::span<const uint8_t> in) {
  if (in.size() < 8) throw Error(ErrorCode::malformed, "short u64");
  uint64_t v = 0;
  for (size_t i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

uint128 read_u128_be(std::span<const uint8_t> in) {
  if (in.size() < 16) throw Error(ErrorCode::malformed, "short u128");
  uint128 v = 0;
  for (size_t i = 0; i < 16; ++i) v = (v << 8) | in[i];
  return v;
}

BitString BitString::from_string(const std::string& bits) {
  BitString out;
  for (char c : bits) {
    if (c != '0' && c != '1') throw Error(ErrorCode::malformed, "bad bit char");
    out.append_bit(c == '1');
  }
  return out;
}

BitString BitString::from_uint(uint64_t value, size_t width) {
  BitString out;
  out.append_uint(value, width);
  return out;
}

void BitString::append_bit(bool bit) { bits_.push_back(bit ? 1 : 0); }

void BitString::append_uint(uint64_t value, size_t width) {
  if (width > 64) throw Error(ErrorCode::width_exceeded, "bit width > 64");
  if (width < 64 && value >> width) {
    throw Error(ErrorCode::value_out_of_range, "value does not fit declared width");
  }
  for (size_t i = width; i-- > 0;) append_bit((value >> i) & 1);
}

void BitString::append(const BitString& other) {
  bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

BitString BitString::prefix(size_t n) const {
  BitString out;
  out.bits_.assign(bits_.begin(), bits_.begin() + std::min(n, bits_.size()));
  return out;
}

bool BitString::is_prefix_of(const BitString& other) const {
  if (size() > other.size()) return false;
  return std::equal(bits_.begin(), bits_.end(), other.bits_.begin());
}

uint64_t BitString::slice_uint(size_t begin, size_t end) const {
  uint64_t v = 0;
  for (size_t i = begin; i < end && i < bits_.size(); ++i) v = (v << 1) | bits_[i];
  return v;
}

std::string BitString::to_string() const {
  std::string out;
  out.reserve(bits_.size());
  for (uint8_t b : bits_) out.push_back(b ? '1' : '0');
  return out;
}

Bytes BitString::packed() const {
  Bytes out((bits_.size() + 7) / 8, 0);
  for (size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out[i / 8] |= static_cast<uint8_t>(0x80 >> (i % 8));
  }
  return out;
}

BitString BitString::unpack(std::span<const uint8_t> data, size_t bit_len) {
  if (data.size() < (bit_len + 7) / 8) throw Error(ErrorCode::malformed, "short bit string");
  BitString out;
  for (size_t i = 0; i < bit_len; ++i) {
    out.append_bit((data[i / 8] >> (7 - i % 8)) & 1);
  }
  return out;
}

Fraction Fraction::parse(const std::string& text) {
  if (text.empty()) throw Error(ErrorCode::malformed, "empty fraction");
  size_t dot = text.find('.');
  std::string whole = dot == std::string::npos ? text : text.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw Error(ErrorCode::malformed, "bad fraction");
  uint64_t num = 0;
  uint64_t den = 1;
  for (char c : whole) {
    if (c < '0' || c > '9') throw Error(ErrorCode::malformed, "bad fraction digit");
    num = num * 10 + static_cast<uint64_t>(c - '0');
  }
  for (char c : frac) {
    if (c < '0' || c > '9') throw Error(ErrorCode::malformed, "bad fraction digit");
    if (den > UINT64_MAX / 10) throw Error(ErrorCode::malformed, "fraction too precise");
    num = num * 10 + static_cast<uint64_t>(c - '0');
    den *= 10;
  }
  uint64_t a = num, b = den;
  while (b) {
    uint64_t t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  return Fraction{num, den};
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::value_out_of_range: return "value-out-of-range";
    case ErrorCode::width_exceeded: return "width-exceeded";
    case ErrorCode::duplicate_key: return "duplicate-key";
    case ErrorCode::time_regression: return "time-regression";
    case ErrorCode::key_absent: return "key-absent";
    case ErrorCode::index_out_of_bounds: return "index-out-of-bounds";
    case ErrorCode::empty_bucket: return "empty-bucket";
    case ErrorCode::unknown_epoch: return "unknown-epoch";
    case ErrorCode::epoch_out_of_order: return "epoch-out-of-order";
    case ErrorCode::duplicate_user_in_epoch: return "duplicate-user-in-epoch";
    case ErrorCode::gamma_exceeded: return "gamma-exceeded";
    case ErrorCode::equivocation_attempt: return "equivocation-attempt";
    case ErrorCode::epoch_regression: return "epoch-regression";
    case ErrorCode::schema_mismatch: return "schema-mismatch";
    case ErrorCode::empty_range: return "empty-range";
    case ErrorCode::invalid_quantile: return "invalid-q";
    case ErrorCode::normalization_violation: return "normalization-violation";
    case ErrorCode::bound_too_small: return "bound-too-small";
    case ErrorCode::unbounded_sensitivity: return "unbounded-sensitivity";
    case ErrorCode::noise_exceeds_bound: return "noise-exceeds-bound";
    case ErrorCode::policy_refused: return "policy-refused";
    case ErrorCode::invalid_point: return "invalid-point";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::malformed: return "malformed";
  }
  return "unknown";
}

}  // namespace tap
