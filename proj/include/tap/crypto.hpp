#pragma once

#include <cstdint>
#include <span>

#include "tap/bytes.hpp"

namespace tap {

// Scalar in Z_q where q is the ristretto255 group order. Stored in the
// canonical reduced little-endian form used by libsodium; the external
// serialization is 32-byte big-endian.
struct Scalar {
  std::array<uint8_t, 32> le{};

  static Scalar zero() { return Scalar{}; }
  static Scalar from_u64(uint64_t v);
  static Scalar from_wide(std::span<const uint8_t> wide64);  // uniform reduction
  static Scalar random();

  Scalar add(const Scalar& other) const;
  Scalar sub(const Scalar& other) const;
  Scalar mul(const Scalar& other) const;
  Scalar negated() const;
  bool is_zero() const;

  Bytes serialize() const;  // 32-byte big-endian
  static Scalar deserialize(std::span<const uint8_t> be32);

  bool operator==(const Scalar&) const = default;
};

// Group element in compressed ristretto255 encoding. The all-zero encoding is
// the group identity.
struct Commitment {
  std::array<uint8_t, 32> data{};

  static Commitment identity() { return Commitment{}; }
  bool is_identity() const;
  bool is_valid() const;

  bool operator==(const Commitment&) const = default;
};

Digest256 hash(std::span<const uint8_t> data);

// Incremental SHA-256, for the fixed hashed encodings of tree nodes.
class HashWriter {
 public:
  HashWriter();
  HashWriter& write(std::span<const uint8_t> data);
  HashWriter& write_byte(uint8_t b);
  HashWriter& write_u32(uint32_t v);
  HashWriter& write_u64(uint64_t v);
  Digest256 finish();

 private:
  std::array<uint8_t, 128> state_;  // crypto_hash_sha256_state storage
};

Commitment commit(const Scalar& v, const Scalar& r);
Commitment commit_u64(uint64_t v, const Scalar& r);
// One shared r*H term across all powers of the same value.
std::vector<Commitment> commit_powers(uint64_t v, const Scalar& r, uint32_t z);

Commitment add_commitments(const Commitment& a, const Commitment& b);
Commitment sub_commitments(const Commitment& a, const Commitment& b);

// PRF(key, msg) reduced to a scalar; used for per-user epoch secrets.
Scalar prf_scalar(std::span<const uint8_t> key32, std::span<const uint8_t> msg);

inline constexpr uint64_t kValueDomain = uint64_t(1) << 32;  // committed values live in [0, 2^32)

// Zero-knowledge proof that a commitment opens to a value in [lo, hi).
// "v >= a" is expressed as [a, a + 2^32); "v <= a" as [0, a + 1).
struct RangeStatement {
  Commitment commitment;
  uint64_t lo = 0;
  uint64_t hi = 0;

  bool operator==(const RangeStatement&) const = default;
};

struct RangeProof {
  RangeStatement statement;
  Bytes proof_bytes;

  bool operator==(const RangeProof&) const = default;
};

// Honest-prover interface; throws value-out-of-range / width-exceeded.
RangeProof prove_range(uint64_t v, const Scalar& r, uint64_t lo, uint64_t hi);
// Deterministic; false on any malformed or non-verifying proof, never throws.
bool verify_range(const Commitment& c, uint64_t lo, uint64_t hi, const RangeProof& proof);

}  // namespace tap
