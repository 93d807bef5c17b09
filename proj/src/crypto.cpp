#include "tap/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

#include "tap/errors.hpp"

namespace tap {

namespace {

struct Params {
  Commitment g;  // value generator (ristretto basepoint)
  Commitment h;  // seed generator, derived by hash-to-group
};

const Params& params() {
  static Params p = [] {
    if (sodium_init() < 0) throw Error(ErrorCode::io_error, "sodium_init failed");
    Params out;
    std::array<uint8_t, 32> one{};
    one[0] = 1;
    if (crypto_scalarmult_ristretto255_base(out.g.data.data(), one.data()) != 0) {
      throw Error(ErrorCode::invalid_point, "basepoint");
    }
    static const char* domain = "tap.v1.pedersen.generator.h";
    std::array<uint8_t, 64> wide{};
    crypto_hash_sha512(wide.data(), reinterpret_cast<const unsigned char*>(domain),
                       std::strlen(domain));
    if (crypto_core_ristretto255_from_hash(out.h.data.data(), wide.data()) != 0) {
      throw Error(ErrorCode::invalid_point, "generator h");
    }
    return out;
  }();
  return p;
}

Commitment point_mul(const Scalar& s, const Commitment& p) {
  if (s.is_zero() || p.is_identity()) return Commitment::identity();
  Commitment out;
  if (crypto_scalarmult_ristretto255(out.data.data(), s.le.data(), p.data.data()) != 0) {
    throw Error(ErrorCode::invalid_point, "scalar mult");
  }
  return out;
}

Commitment base_mul(const Scalar& s) {
  if (s.is_zero()) return Commitment::identity();
  Commitment out;
  if (crypto_scalarmult_ristretto255_base(out.data.data(), s.le.data()) != 0) {
    throw Error(ErrorCode::invalid_point, "base mult");
  }
  return out;
}

}  // namespace

Scalar Scalar::from_u64(uint64_t v) {
  Scalar s;
  for (size_t i = 0; i < 8; ++i) s.le[i] = static_cast<uint8_t>(v >> (8 * i));
  return s;
}

Scalar Scalar::from_wide(std::span<const uint8_t> wide64) {
  if (wide64.size() != 64) throw Error(ErrorCode::malformed, "wide scalar must be 64 bytes");
  Scalar s;
  crypto_core_ristretto255_scalar_reduce(s.le.data(), wide64.data());
  return s;
}

Scalar Scalar::random() {
  params();
  Scalar s;
  crypto_core_ristretto255_scalar_random(s.le.data());
  return s;
}

Scalar Scalar::add(const Scalar& other) const {
  Scalar out;
  crypto_core_ristretto255_scalar_add(out.le.data(), le.data(), other.le.data());
  return out;
}

Scalar Scalar::sub(const Scalar& other) const {
  Scalar out;
  crypto_core_ristretto255_scalar_sub(out.le.data(), le.data(), other.le.data());
  return out;
}

Scalar Scalar::mul(const Scalar& other) const {
  Scalar out;
  crypto_core_ristretto255_scalar_mul(out.le.data(), le.data(), other.le.data());
  return out;
}

Scalar Scalar::negated() const {
  Scalar out;
  crypto_core_ristretto255_scalar_negate(out.le.data(), le.data());
  return out;
}

bool Scalar::is_zero() const {
  uint8_t acc = 0;
  for (uint8_t b : le) acc |= b;
  return acc == 0;
}

Bytes Scalar::serialize() const {
  Bytes out(le.rbegin(), le.rend());
  return out;
}

Scalar Scalar::deserialize(std::span<const uint8_t> be32) {
  if (be32.size() != 32) throw Error(ErrorCode::malformed, "scalar must be 32 bytes");
  Scalar s;
  for (size_t i = 0; i < 32; ++i) s.le[i] = be32[31 - i];
  // Reject non-canonical encodings: reducing a canonical scalar is a no-op.
  std::array<uint8_t, 64> wide{};
  std::memcpy(wide.data(), s.le.data(), 32);
  Scalar reduced;
  crypto_core_ristretto255_scalar_reduce(reduced.le.data(), wide.data());
  if (reduced.le != s.le) throw Error(ErrorCode::malformed, "non-canonical scalar");
  return s;
}

bool Commitment::is_identity() const {
  uint8_t acc = 0;
  for (uint8_t b : data) acc |= b;
  return acc == 0;
}

bool Commitment::is_valid() const {
  params();
  if (is_identity()) return true;
  return crypto_core_ristretto255_is_valid_point(data.data()) == 1;
}

Digest256 hash(std::span<const uint8_t> data) {
  Digest256 out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

HashWriter::HashWriter() {
  static_assert(sizeof(crypto_hash_sha256_state) <= sizeof(state_));
  crypto_hash_sha256_init(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()));
}

HashWriter& HashWriter::write(std::span<const uint8_t> data) {
  crypto_hash_sha256_update(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
                            data.data(), data.size());
  return *this;
}

HashWriter& HashWriter::write_byte(uint8_t b) { return write(std::span<const uint8_t>(&b, 1)); }

HashWriter& HashWriter::write_u32(uint32_t v) {
  auto a = u32_be(v);
  return write(a);
}

HashWriter& HashWriter::write_u64(uint64_t v) {
  auto a = u64_be(v);
  return write(a);
}

Digest256 HashWriter::finish() {
  Digest256 out;
  crypto_hash_sha256_final(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
                           out.data());
  return out;
}

Commitment commit(const Scalar& v, const Scalar& r) {
  const Params& p = params();
  Commitment vg = base_mul(v);
  Commitment rh = point_mul(r, p.h);
  return add_commitments(vg, rh);
}

Commitment commit_u64(uint64_t v, const Scalar& r) { return commit(Scalar::from_u64(v), r); }

std::vector<Commitment> commit_powers(uint64_t v, const Scalar& r, uint32_t z) {
  const Params& p = params();
  Commitment rh = point_mul(r, p.h);
  std::vector<Commitment> out;
  out.reserve(z);
  Scalar power = Scalar::from_u64(v);
  Scalar base = power;
  for (uint32_t j = 0; j < z; ++j) {
    out.push_back(add_commitments(base_mul(power), rh));
    power = power.mul(base);
  }
  return out;
}

Commitment add_commitments(const Commitment& a, const Commitment& b) {
  if (a.is_identity()) return b;
  if (b.is_identity()) return a;
  Commitment out;
  if (crypto_core_ristretto255_add(out.data.data(), a.data.data(), b.data.data()) != 0) {
    throw Error(ErrorCode::invalid_point, "point add");
  }
  return out;
}

Commitment sub_commitments(const Commitment& a, const Commitment& b) {
  if (b.is_identity()) return a;
  Commitment out;
  if (a.is_identity()) {
    std::array<uint8_t, 32> zero{};
    if (crypto_core_ristretto255_sub(out.data.data(), zero.data(), b.data.data()) != 0) {
      throw Error(ErrorCode::invalid_point, "point negate");
    }
    return out;
  }
  if (crypto_core_ristretto255_sub(out.data.data(), a.data.data(), b.data.data()) != 0) {
    throw Error(ErrorCode::invalid_point, "point sub");
  }
  return out;
}

Scalar prf_scalar(std::span<const uint8_t> key32, std::span<const uint8_t> msg) {
  if (key32.size() != 32) throw Error(ErrorCode::malformed, "prf key must be 32 bytes");
  std::array<uint8_t, 64> mac{};
  crypto_auth_hmacsha512(mac.data(), msg.data(), msg.size(), key32.data());
  return Scalar::from_wide(mac);
}

// ---------------------------------------------------------------------------
// Range proofs.
//
// A statement [lo, hi) over c = C(v, r) is proved with one or two 32-bit
// sub-proofs on shifted commitments:
//   lower:  c - C(lo, 0)      opens in [0, 2^32)   (v >= lo)
//   upper:  C(hi-1, 0) - c    opens in [0, 2^32)   (v < hi; omitted when
//                                                   hi - lo == 2^32)
// Each 32-bit sub-proof commits to the bits of the shifted value with seeds
// that recombine to the shifted commitment, and proves every bit is 0 or 1
// with a Fiat-Shamir OR-proof over the seed generator.
// ---------------------------------------------------------------------------

namespace {

constexpr size_t kRangeBits = 32;
constexpr size_t kPerBitBytes = 5 * 32;  // B, e0, e1, s0, s1
constexpr size_t kSubProofBytes = kRangeBits * kPerBitBytes;
constexpr const char* kRangeDst = "tap.v1.rangeproof";

Commitment point_double(const Commitment& p) { return add_commitments(p, p); }

Digest256 transcript_core(const Digest256& ctx, std::span<const Commitment> bit_commitments,
                          std::span<const Commitment> a0, std::span<const Commitment> a1) {
  HashWriter w;
  w.write(ctx);
  for (const auto& b : bit_commitments) w.write(b.data);
  for (size_t i = 0; i < a0.size(); ++i) {
    w.write(a0[i].data);
    w.write(a1[i].data);
  }
  return w.finish();
}

Scalar challenge_for_bit(const Digest256& core, uint32_t i) {
  HashWriter w;
  w.write(core);
  w.write_u32(i);
  Digest256 d1 = w.finish();
  HashWriter w2;
  w2.write(d1);
  w2.write_byte(0x01);
  Digest256 d2 = w2.finish();
  std::array<uint8_t, 64> wide{};
  std::memcpy(wide.data(), d1.data(), 32);
  std::memcpy(wide.data() + 32, d2.data(), 32);
  return Scalar::from_wide(wide);
}

Digest256 statement_context(const RangeStatement& st, uint8_t side, const Commitment& shifted) {
  HashWriter w;
  w.write(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(kRangeDst),
                                   std::strlen(kRangeDst)));
  w.write(st.commitment.data);
  w.write_u64(st.lo);
  w.write_u64(st.hi);
  w.write_byte(side);
  w.write(shifted.data);
  return w.finish();
}

// Proof that `shifted` opens to x in [0, 2^32) with seed `r`.
Bytes prove32(uint64_t x, const Scalar& r, const Digest256& ctx) {
  const Params& p = params();
  std::array<bool, kRangeBits> bits{};
  for (size_t i = 0; i < kRangeBits; ++i) bits[i] = (x >> i) & 1;

  // Bit seeds sum (weighted by 2^i) to r so the bit commitments recombine to
  // the shifted commitment.
  std::array<Scalar, kRangeBits> rho{};
  Scalar acc = Scalar::zero();
  for (size_t i = 1; i < kRangeBits; ++i) {
    rho[i] = Scalar::random();
    Scalar weight = Scalar::from_u64(uint64_t(1) << i);
    acc = acc.add(rho[i].mul(weight));
  }
  rho[0] = r.sub(acc);

  std::array<Commitment, kRangeBits> bcom{};
  std::array<Commitment, kRangeBits> a0{}, a1{};
  std::array<Scalar, kRangeBits> w{}, e_fake{}, s_fake{};
  for (size_t i = 0; i < kRangeBits; ++i) {
    bcom[i] = commit_u64(bits[i] ? 1 : 0, rho[i]);
    Commitment y0 = bcom[i];
    Commitment y1 = sub_commitments(bcom[i], p.g);
    w[i] = Scalar::random();
    Commitment a_real = point_mul(w[i], p.h);
    e_fake[i] = Scalar::random();
    s_fake[i] = Scalar::random();
    const Commitment& y_fake = bits[i] ? y0 : y1;
    Commitment a_fake = sub_commitments(point_mul(s_fake[i], p.h), point_mul(e_fake[i], y_fake));
    a0[i] = bits[i] ? a_fake : a_real;
    a1[i] = bits[i] ? a_real : a_fake;
  }

  Digest256 core = transcript_core(ctx, bcom, a0, a1);
  Bytes out;
  out.reserve(kSubProofBytes);
  for (size_t i = 0; i < kRangeBits; ++i) {
    Scalar e = challenge_for_bit(core, static_cast<uint32_t>(i));
    Scalar e_real = e.sub(e_fake[i]);
    Scalar s_real = w[i].add(e_real.mul(rho[i]));
    Scalar e0 = bits[i] ? e_fake[i] : e_real;
    Scalar e1 = bits[i] ? e_real : e_fake[i];
    Scalar s0 = bits[i] ? s_fake[i] : s_real;
    Scalar s1 = bits[i] ? s_real : s_fake[i];
    out.insert(out.end(), bcom[i].data.begin(), bcom[i].data.end());
    out.insert(out.end(), e0.le.begin(), e0.le.end());
    out.insert(out.end(), e1.le.begin(), e1.le.end());
    out.insert(out.end(), s0.le.begin(), s0.le.end());
    out.insert(out.end(), s1.le.begin(), s1.le.end());
  }
  return out;
}

bool verify32(const Commitment& shifted, const Digest256& ctx, std::span<const uint8_t> bytes) {
  const Params& p = params();
  if (bytes.size() != kSubProofBytes) return false;

  std::array<Commitment, kRangeBits> bcom{};
  std::array<Scalar, kRangeBits> e0{}, e1{}, s0{}, s1{};
  for (size_t i = 0; i < kRangeBits; ++i) {
    const uint8_t* rec = bytes.data() + i * kPerBitBytes;
    std::memcpy(bcom[i].data.data(), rec, 32);
    if (!bcom[i].is_valid()) return false;
    std::memcpy(e0[i].le.data(), rec + 32, 32);
    std::memcpy(e1[i].le.data(), rec + 64, 32);
    std::memcpy(s0[i].le.data(), rec + 96, 32);
    std::memcpy(s1[i].le.data(), rec + 128, 32);
  }

  // Horner recombination: sum 2^i * B_i must equal the shifted commitment.
  Commitment acc = bcom[kRangeBits - 1];
  for (size_t i = kRangeBits - 1; i-- > 0;) {
    acc = add_commitments(point_double(acc), bcom[i]);
  }
  if (!(acc == shifted)) return false;

  std::array<Commitment, kRangeBits> a0{}, a1{};
  for (size_t i = 0; i < kRangeBits; ++i) {
    Commitment y0 = bcom[i];
    Commitment y1 = sub_commitments(bcom[i], p.g);
    a0[i] = sub_commitments(point_mul(s0[i], p.h), point_mul(e0[i], y0));
    a1[i] = sub_commitments(point_mul(s1[i], p.h), point_mul(e1[i], y1));
  }
  Digest256 core = transcript_core(ctx, bcom, a0, a1);
  for (size_t i = 0; i < kRangeBits; ++i) {
    Scalar e = challenge_for_bit(core, static_cast<uint32_t>(i));
    if (!(e0[i].add(e1[i]) == e)) return false;
  }
  return true;
}

}  // namespace

RangeProof prove_range(uint64_t v, const Scalar& r, uint64_t lo, uint64_t hi) {
  if (hi <= lo) throw Error(ErrorCode::malformed, "empty interval");
  if (hi - lo > kValueDomain) throw Error(ErrorCode::width_exceeded, "interval wider than 2^32");
  if (v < lo || v >= hi) throw Error(ErrorCode::value_out_of_range, "witness outside interval");

  RangeProof proof;
  proof.statement = RangeStatement{commit_u64(v, r), lo, hi};

  Commitment lower_shift =
      sub_commitments(proof.statement.commitment, commit_u64(lo, Scalar::zero()));
  Digest256 ctx_lower = statement_context(proof.statement, 0, lower_shift);
  Bytes lower = prove32(v - lo, r, ctx_lower);
  proof.proof_bytes.push_back(hi - lo < kValueDomain ? 2 : 1);
  proof.proof_bytes.insert(proof.proof_bytes.end(), lower.begin(), lower.end());

  if (hi - lo < kValueDomain) {
    Commitment upper_shift =
        sub_commitments(commit_u64(hi - 1, Scalar::zero()), proof.statement.commitment);
    Digest256 ctx_upper = statement_context(proof.statement, 1, upper_shift);
    Bytes upper = prove32(hi - 1 - v, r.negated(), ctx_upper);
    proof.proof_bytes.insert(proof.proof_bytes.end(), upper.begin(), upper.end());
  }
  return proof;
}

bool verify_range(const Commitment& c, uint64_t lo, uint64_t hi, const RangeProof& proof) {
  try {
    if (hi <= lo || hi - lo > kValueDomain) return false;
    if (!(proof.statement == RangeStatement{c, lo, hi})) return false;
    if (!c.is_valid()) return false;
    size_t expected = hi - lo < kValueDomain ? 2 : 1;
    if (proof.proof_bytes.size() != 1 + expected * kSubProofBytes) return false;
    if (proof.proof_bytes[0] != expected) return false;

    std::span<const uint8_t> body(proof.proof_bytes.data() + 1, proof.proof_bytes.size() - 1);
    Commitment lower_shift = sub_commitments(c, commit_u64(lo, Scalar::zero()));
    Digest256 ctx_lower = statement_context(proof.statement, 0, lower_shift);
    if (!verify32(lower_shift, ctx_lower, body.subspan(0, kSubProofBytes))) return false;

    if (expected == 2) {
      Commitment upper_shift = sub_commitments(commit_u64(hi - 1, Scalar::zero()), c);
      Digest256 ctx_upper = statement_context(proof.statement, 1, upper_shift);
      if (!verify32(upper_shift, ctx_upper, body.subspan(kSubProofBytes, kSubProofBytes))) {
        return false;
      }
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace tap
