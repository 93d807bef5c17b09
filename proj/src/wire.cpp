#include "tap/wire.hpp"

#include <json.hpp>

#include "tap/errors.hpp"

namespace tap::wire {

using ordered_json = nlohmann::ordered_json;

namespace {

// ----- binary primitives ---------------------------------------------------

struct BinWriter {
  Bytes out;

  void u8(uint8_t v) { out.push_back(v); }
  void u32(uint32_t v) { put_u32_be(out, v); }
  void u64(uint64_t v) { put_u64_be(out, v); }
  void u128v(uint128 v) {
    auto a = u128_be(v);
    out.insert(out.end(), a.begin(), a.end());
  }
  void f64(double v) {
    static_assert(sizeof(double) == 8);
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void fixed(std::span<const uint8_t> data) { out.insert(out.end(), data.begin(), data.end()); }
  void blob(std::span<const uint8_t> data) {
    u32(static_cast<uint32_t>(data.size()));
    fixed(data);
  }
  void str(const std::string& s) {
    blob({reinterpret_cast<const uint8_t*>(s.data()), s.size()});
  }
};

struct BinReader {
  std::span<const uint8_t> in;
  size_t pos = 0;

  std::span<const uint8_t> take(size_t n) {
    if (pos + n > in.size()) throw Error(ErrorCode::malformed, "truncated message");
    auto s = in.subspan(pos, n);
    pos += n;
    return s;
  }
  uint8_t u8() { return take(1)[0]; }
  uint32_t u32() { return read_u32_be(take(4)); }
  uint64_t u64() { return read_u64_be(take(8)); }
  uint128 u128v() { return read_u128_be(take(16)); }
  double f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  Bytes blob() {
    uint32_t n = u32();
    auto s = take(n);
    return Bytes(s.begin(), s.end());
  }
  std::string str() {
    Bytes b = blob();
    return std::string(b.begin(), b.end());
  }
  void done() {
    if (pos != in.size()) throw Error(ErrorCode::malformed, "trailing bytes");
  }
};

constexpr size_t kMaxListLen = 1 << 22;

uint32_t checked_len(uint64_t n) {
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "list too long");
  return static_cast<uint32_t>(n);
}

// ----- field codecs: binary + json, one pair per type ----------------------

void wbin(BinWriter& w, const Digest256& v) { w.fixed(v); }
void rbin(BinReader& r, Digest256& v) {
  auto s = r.take(32);
  std::copy(s.begin(), s.end(), v.begin());
}
ordered_json jput(const Digest256& v) { return base64_encode(v); }
void jget(const ordered_json& j, Digest256& v) {
  Bytes b = base64_decode(j.get<std::string>());
  if (b.size() != 32) throw Error(ErrorCode::malformed, "digest must be 32 bytes");
  std::copy(b.begin(), b.end(), v.begin());
}

void wbin(BinWriter& w, const Scalar& v) { w.fixed(v.serialize()); }
void rbin(BinReader& r, Scalar& v) { v = Scalar::deserialize(r.take(32)); }
ordered_json jput(const Scalar& v) { return base64_encode(v.serialize()); }
void jget(const ordered_json& j, Scalar& v) {
  v = Scalar::deserialize(base64_decode(j.get<std::string>()));
}

void wbin(BinWriter& w, const Commitment& v) { w.fixed(v.data); }
void rbin(BinReader& r, Commitment& v) {
  auto s = r.take(32);
  std::copy(s.begin(), s.end(), v.data.begin());
  if (!v.is_valid()) throw Error(ErrorCode::malformed, "invalid group element");
}
ordered_json jput(const Commitment& v) { return base64_encode(v.data); }
void jget(const ordered_json& j, Commitment& v) {
  Bytes b = base64_decode(j.get<std::string>());
  if (b.size() != 32) throw Error(ErrorCode::malformed, "commitment must be 32 bytes");
  std::copy(b.begin(), b.end(), v.data.begin());
  if (!v.is_valid()) throw Error(ErrorCode::malformed, "invalid group element");
}

void wbin(BinWriter& w, const BitString& v) {
  w.u32(static_cast<uint32_t>(v.size()));
  w.fixed(v.packed());
}
void rbin(BinReader& r, BitString& v) {
  uint32_t bits = r.u32();
  if (bits > 4096) throw Error(ErrorCode::malformed, "bit string too long");
  v = BitString::unpack(r.take((bits + 7) / 8), bits);
}
ordered_json jput(const BitString& v) {
  return ordered_json{{"len", v.size()}, {"bits", base64_encode(v.packed())}};
}
void jget(const ordered_json& j, BitString& v) {
  size_t bits = j.at("len").get<size_t>();
  if (bits > 4096) throw Error(ErrorCode::malformed, "bit string too long");
  v = BitString::unpack(base64_decode(j.at("bits").get<std::string>()), bits);
}

template <typename T, typename = void>
struct is_codec_struct : std::false_type {};

// Generic vector plumbing.
template <typename T>
void wbin_vec(BinWriter& w, const std::vector<T>& v, void (*f)(BinWriter&, const T&)) {
  w.u32(checked_len(v.size()));
  for (const auto& x : v) f(w, x);
}

// ----- struct codecs --------------------------------------------------------

void wbin(BinWriter& w, const RangeProof& p) {
  wbin(w, p.statement.commitment);
  w.u64(p.statement.lo);
  w.u64(p.statement.hi);
  w.blob(p.proof_bytes);
}
void rbin(BinReader& r, RangeProof& p) {
  rbin(r, p.statement.commitment);
  p.statement.lo = r.u64();
  p.statement.hi = r.u64();
  p.proof_bytes = r.blob();
}
ordered_json jput(const RangeProof& p) {
  return ordered_json{{"commitment", jput(p.statement.commitment)},
                      {"lo", p.statement.lo},
                      {"hi", p.statement.hi},
                      {"proof", base64_encode(p.proof_bytes)}};
}
void jget(const ordered_json& j, RangeProof& p) {
  jget(j.at("commitment"), p.statement.commitment);
  p.statement.lo = j.at("lo").get<uint64_t>();
  p.statement.hi = j.at("hi").get<uint64_t>();
  p.proof_bytes = base64_decode(j.at("proof").get<std::string>());
}

void wbin(BinWriter& w, const PrefixInclusionProof& p) {
  wbin(w, p.key);
  wbin(w, p.leaf_value);
  w.u32(checked_len(p.siblings.size()));
  for (const auto& [depth, hash] : p.siblings) {
    w.u32(depth);
    wbin(w, hash);
  }
}
void rbin(BinReader& r, PrefixInclusionProof& p) {
  rbin(r, p.key);
  rbin(r, p.leaf_value);
  uint32_t n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "sibling list");
  p.siblings.resize(n);
  for (auto& [depth, hash] : p.siblings) {
    depth = r.u32();
    rbin(r, hash);
  }
}
ordered_json jput(const PrefixInclusionProof& p) {
  ordered_json sibs = ordered_json::array();
  for (const auto& [depth, hash] : p.siblings) {
    sibs.push_back(ordered_json{{"depth", depth}, {"hash", jput(hash)}});
  }
  return ordered_json{{"key", jput(p.key)}, {"leaf_value", jput(p.leaf_value)},
                      {"siblings", sibs}};
}
void jget(const ordered_json& j, PrefixInclusionProof& p) {
  jget(j.at("key"), p.key);
  jget(j.at("leaf_value"), p.leaf_value);
  for (const auto& s : j.at("siblings")) {
    std::pair<uint32_t, Digest256> entry;
    entry.first = s.at("depth").get<uint32_t>();
    jget(s.at("hash"), entry.second);
    p.siblings.push_back(entry);
  }
}

void wbin(BinWriter& w, const CoverEntry& e) {
  w.u8(e.is_leaf);
  w.u8(e.left_kind);
  w.u8(e.right_kind);
  if (e.left_kind == 1) wbin(w, e.left_hash);
  if (e.right_kind == 1) wbin(w, e.right_hash);
  if (e.is_leaf) wbin(w, e.leaf_value);
}
void rbin(BinReader& r, CoverEntry& e) {
  e.is_leaf = r.u8();
  e.left_kind = r.u8();
  e.right_kind = r.u8();
  if (e.is_leaf > 1 || e.left_kind > 2 || e.right_kind > 2) {
    throw Error(ErrorCode::malformed, "cover entry kind");
  }
  if (e.left_kind == 1) rbin(r, e.left_hash);
  if (e.right_kind == 1) rbin(r, e.right_hash);
  if (e.is_leaf) rbin(r, e.leaf_value);
}
ordered_json jput(const CoverEntry& e) {
  ordered_json j{{"leaf", e.is_leaf != 0}, {"lk", e.left_kind}, {"rk", e.right_kind}};
  if (e.left_kind == 1) j["lh"] = jput(e.left_hash);
  if (e.right_kind == 1) j["rh"] = jput(e.right_hash);
  if (e.is_leaf) j["value"] = jput(e.leaf_value);
  return j;
}
void jget(const ordered_json& j, CoverEntry& e) {
  e.is_leaf = j.at("leaf").get<bool>() ? 1 : 0;
  e.left_kind = j.at("lk").get<uint8_t>();
  e.right_kind = j.at("rk").get<uint8_t>();
  if (e.left_kind > 2 || e.right_kind > 2) throw Error(ErrorCode::malformed, "cover entry kind");
  if (e.left_kind == 1) jget(j.at("lh"), e.left_hash);
  if (e.right_kind == 1) jget(j.at("rh"), e.right_hash);
  if (e.is_leaf) jget(j.at("value"), e.leaf_value);
}

void wbin(BinWriter& w, const RangeCoverProof& p) {
  w.u32(checked_len(p.nodes.size()));
  for (const auto& n : p.nodes) wbin(w, n);
}
void rbin(BinReader& r, RangeCoverProof& p) {
  uint32_t n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "cover too large");
  p.nodes.resize(n);
  for (auto& e : p.nodes) rbin(r, e);
}
ordered_json jput(const RangeCoverProof& p) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : p.nodes) nodes.push_back(jput(n));
  return ordered_json{{"nodes", nodes}};
}
void jget(const ordered_json& j, RangeCoverProof& p) {
  for (const auto& n : j.at("nodes")) {
    CoverEntry e;
    jget(n, e);
    p.nodes.push_back(e);
  }
}

void wbin(BinWriter& w, const SumLeafData& leaf) {
  w.u32(checked_len(leaf.commitments.size()));
  for (const auto& c : leaf.commitments) wbin(w, c);
  wbin(w, leaf.id_hash);
}
void rbin(BinReader& r, SumLeafData& leaf) {
  uint32_t z = r.u32();
  if (z > 8) throw Error(ErrorCode::malformed, "too many commitments");
  leaf.commitments.resize(z);
  for (auto& c : leaf.commitments) rbin(r, c);
  rbin(r, leaf.id_hash);
}
ordered_json jput(const SumLeafData& leaf) {
  ordered_json cs = ordered_json::array();
  for (const auto& c : leaf.commitments) cs.push_back(jput(c));
  return ordered_json{{"commitments", cs}, {"id_hash", jput(leaf.id_hash)}};
}
void jget(const ordered_json& j, SumLeafData& leaf) {
  for (const auto& c : j.at("commitments")) {
    Commitment x;
    jget(c, x);
    leaf.commitments.push_back(x);
  }
  if (leaf.commitments.size() > 8) throw Error(ErrorCode::malformed, "too many commitments");
  jget(j.at("id_hash"), leaf.id_hash);
}

void wbin(BinWriter& w, const SumCoPathEntry& e) {
  wbin(w, e.hash);
  w.u32(checked_len(e.commitments.size()));
  for (const auto& c : e.commitments) wbin(w, c);
  w.u64(e.count);
  w.u8(e.sibling_on_left);
}
void rbin(BinReader& r, SumCoPathEntry& e) {
  rbin(r, e.hash);
  uint32_t z = r.u32();
  if (z > 8) throw Error(ErrorCode::malformed, "too many commitments");
  e.commitments.resize(z);
  for (auto& c : e.commitments) rbin(r, c);
  e.count = r.u64();
  e.sibling_on_left = r.u8();
  if (e.sibling_on_left > 1) throw Error(ErrorCode::malformed, "side flag");
}
ordered_json jput(const SumCoPathEntry& e) {
  ordered_json cs = ordered_json::array();
  for (const auto& c : e.commitments) cs.push_back(jput(c));
  return ordered_json{{"hash", jput(e.hash)},
                      {"commitments", cs},
                      {"count", e.count},
                      {"left", e.sibling_on_left != 0}};
}
void jget(const ordered_json& j, SumCoPathEntry& e) {
  jget(j.at("hash"), e.hash);
  for (const auto& c : j.at("commitments")) {
    Commitment x;
    jget(c, x);
    e.commitments.push_back(x);
  }
  if (e.commitments.size() > 8) throw Error(ErrorCode::malformed, "too many commitments");
  e.count = j.at("count").get<uint64_t>();
  e.sibling_on_left = j.at("left").get<bool>() ? 1 : 0;
}

void wbin_copath(BinWriter& w, const std::vector<SumCoPathEntry>& v) {
  w.u32(checked_len(v.size()));
  for (const auto& e : v) wbin(w, e);
}
void rbin_copath(BinReader& r, std::vector<SumCoPathEntry>& v) {
  uint32_t n = r.u32();
  if (n > 80) throw Error(ErrorCode::malformed, "co-path too long");
  v.resize(n);
  for (auto& e : v) rbin(r, e);
}
ordered_json jput_copath(const std::vector<SumCoPathEntry>& v) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : v) arr.push_back(jput(e));
  return arr;
}
void jget_copath(const ordered_json& j, std::vector<SumCoPathEntry>& v) {
  for (const auto& e : j) {
    SumCoPathEntry entry;
    jget(e, entry);
    v.push_back(entry);
  }
  if (v.size() > 80) throw Error(ErrorCode::malformed, "co-path too long");
}

void wbin(BinWriter& w, const RangeSpec& spec) {
  w.u32(spec.t_min);
  w.u32(spec.t_max);
  w.u32(checked_len(spec.type_ranges.size()));
  for (const auto& [lo, hi] : spec.type_ranges) {
    w.u64(lo);
    w.u64(hi);
  }
}
void rbin(BinReader& r, RangeSpec& spec) {
  spec.t_min = r.u32();
  spec.t_max = r.u32();
  uint32_t n = r.u32();
  if (n > 16) throw Error(ErrorCode::malformed, "too many type ranges");
  spec.type_ranges.resize(n);
  for (auto& [lo, hi] : spec.type_ranges) {
    lo = r.u64();
    hi = r.u64();
  }
}
ordered_json jput(const RangeSpec& spec) {
  ordered_json types = ordered_json::array();
  for (const auto& [lo, hi] : spec.type_ranges) types.push_back(ordered_json::array({lo, hi}));
  return ordered_json{{"t_min", spec.t_min}, {"t_max", spec.t_max}, {"types", types}};
}
void jget(const ordered_json& j, RangeSpec& spec) {
  spec.t_min = j.at("t_min").get<uint32_t>();
  spec.t_max = j.at("t_max").get<uint32_t>();
  for (const auto& t : j.at("types")) {
    spec.type_ranges.emplace_back(t.at(0).get<uint64_t>(), t.at(1).get<uint64_t>());
  }
  if (spec.type_ranges.size() > 16) throw Error(ErrorCode::malformed, "too many type ranges");
}

// --- message bodies ---------------------------------------------------------

void wbin(BinWriter& w, const ErrorBody& b) {
  w.str(b.code);
  w.str(b.message);
}
void rbin(BinReader& r, ErrorBody& b) {
  b.code = r.str();
  b.message = r.str();
}
ordered_json jput(const ErrorBody& b) {
  return ordered_json{{"code", b.code}, {"message", b.message}};
}
void jget(const ordered_json& j, ErrorBody& b) {
  b.code = j.at("code").get<std::string>();
  b.message = j.at("message").get<std::string>();
}

void wbin(BinWriter& w, const RowInput& row) {
  w.str(row.user_id);
  w.u32(checked_len(row.types.size()));
  for (uint32_t t : row.types) w.u32(t);
  w.u64(row.value);
}
void rbin(BinReader& r, RowInput& row) {
  row.user_id = r.str();
  uint32_t n = r.u32();
  if (n > 16) throw Error(ErrorCode::malformed, "too many types");
  row.types.resize(n);
  for (auto& t : row.types) t = r.u32();
  row.value = r.u64();
}
ordered_json jput(const RowInput& row) {
  return ordered_json{{"user", row.user_id}, {"types", row.types}, {"value", row.value}};
}
void jget(const ordered_json& j, RowInput& row) {
  row.user_id = j.at("user").get<std::string>();
  row.types = j.at("types").get<std::vector<uint32_t>>();
  if (row.types.size() > 16) throw Error(ErrorCode::malformed, "too many types");
  row.value = j.at("value").get<uint64_t>();
}

void wbin(BinWriter& w, const EpochRequest& b) {
  w.u32(b.epoch);
  w.u32(checked_len(b.rows.size()));
  for (const auto& row : b.rows) wbin(w, row);
}
void rbin(BinReader& r, EpochRequest& b) {
  b.epoch = r.u32();
  uint32_t n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "too many rows");
  b.rows.resize(n);
  for (auto& row : b.rows) rbin(r, row);
}
ordered_json jput(const EpochRequest& b) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : b.rows) rows.push_back(jput(row));
  return ordered_json{{"epoch", b.epoch}, {"rows", rows}};
}
void jget(const ordered_json& j, EpochRequest& b) {
  b.epoch = j.at("epoch").get<uint32_t>();
  for (const auto& row : j.at("rows")) {
    RowInput r;
    jget(row, r);
    b.rows.push_back(r);
  }
}

void wbin(BinWriter& w, const EpochResponse& b) {
  w.u32(b.epoch);
  wbin(w, b.digest);
}
void rbin(BinReader& r, EpochResponse& b) {
  b.epoch = r.u32();
  rbin(r, b.digest);
}
ordered_json jput(const EpochResponse& b) {
  return ordered_json{{"epoch", b.epoch}, {"digest", jput(b.digest)}};
}
void jget(const ordered_json& j, EpochResponse& b) {
  b.epoch = j.at("epoch").get<uint32_t>();
  jget(j.at("digest"), b.digest);
}

void wbin(BinWriter& w, const LookupRequest& b) {
  w.str(b.user_id);
  w.u32(checked_len(b.types.size()));
  for (uint32_t t : b.types) w.u32(t);
  w.u32(b.epoch);
}
void rbin(BinReader& r, LookupRequest& b) {
  b.user_id = r.str();
  uint32_t n = r.u32();
  if (n > 16) throw Error(ErrorCode::malformed, "too many types");
  b.types.resize(n);
  for (auto& t : b.types) t = r.u32();
  b.epoch = r.u32();
}
ordered_json jput(const LookupRequest& b) {
  return ordered_json{{"user", b.user_id}, {"types", b.types}, {"epoch", b.epoch}};
}
void jget(const ordered_json& j, LookupRequest& b) {
  b.user_id = j.at("user").get<std::string>();
  b.types = j.at("types").get<std::vector<uint32_t>>();
  b.epoch = j.at("epoch").get<uint32_t>();
}

void wbin(BinWriter& w, const LookupProof& b) {
  w.u64(b.value);
  wbin(w, b.prefix_proof);
  wbin_copath(w, b.sum_copath);
}
void rbin(BinReader& r, LookupProof& b) {
  b.value = r.u64();
  rbin(r, b.prefix_proof);
  rbin_copath(r, b.sum_copath);
}
ordered_json jput(const LookupProof& b) {
  return ordered_json{{"value", b.value},
                      {"prefix_proof", jput(b.prefix_proof)},
                      {"sum_copath", jput_copath(b.sum_copath)}};
}
void jget(const ordered_json& j, LookupProof& b) {
  b.value = j.at("value").get<uint64_t>();
  jget(j.at("prefix_proof"), b.prefix_proof);
  jget_copath(j.at("sum_copath"), b.sum_copath);
}

void wbin(BinWriter& w, const NonExistenceProof& b) {
  w.u8(b.bucket_exists);
  if (b.bucket_exists) {
    wbin(w, b.prefix_proof);
    w.u32(checked_len(b.leaves.size()));
    for (const auto& leaf : b.leaves) wbin(w, leaf);
  } else {
    wbin(w, b.cover);
  }
}
void rbin(BinReader& r, NonExistenceProof& b) {
  b.bucket_exists = r.u8();
  if (b.bucket_exists > 1) throw Error(ErrorCode::malformed, "flag");
  if (b.bucket_exists) {
    rbin(r, b.prefix_proof);
    uint32_t n = r.u32();
    if (n > kMaxListLen) throw Error(ErrorCode::malformed, "too many leaves");
    b.leaves.resize(n);
    for (auto& leaf : b.leaves) rbin(r, leaf);
  } else {
    rbin(r, b.cover);
  }
}
ordered_json jput(const NonExistenceProof& b) {
  ordered_json j{{"bucket_exists", b.bucket_exists != 0}};
  if (b.bucket_exists) {
    j["prefix_proof"] = jput(b.prefix_proof);
    ordered_json leaves = ordered_json::array();
    for (const auto& leaf : b.leaves) leaves.push_back(jput(leaf));
    j["leaves"] = leaves;
  } else {
    j["cover"] = jput(b.cover);
  }
  return j;
}
void jget(const ordered_json& j, NonExistenceProof& b) {
  b.bucket_exists = j.at("bucket_exists").get<bool>() ? 1 : 0;
  if (b.bucket_exists) {
    jget(j.at("prefix_proof"), b.prefix_proof);
    for (const auto& leaf : j.at("leaves")) {
      SumLeafData l;
      jget(leaf, l);
      b.leaves.push_back(l);
    }
  } else {
    jget(j.at("cover"), b.cover);
  }
}

void wbin(BinWriter& w, const AggregateRequest& b) { wbin(w, b.spec); }
void rbin(BinReader& r, AggregateRequest& b) { rbin(r, b.spec); }
ordered_json jput(const AggregateRequest& b) { return ordered_json{{"spec", jput(b.spec)}}; }
void jget(const ordered_json& j, AggregateRequest& b) { jget(j.at("spec"), b.spec); }

void wbin(BinWriter& w, const AggregateLeafInfo& info) {
  wbin(w, info.left_hash);
  wbin(w, info.right_hash);
  w.u32(checked_len(info.commitments.size()));
  for (const auto& c : info.commitments) wbin(w, c);
  w.u64(info.count);
}
void rbin(BinReader& r, AggregateLeafInfo& info) {
  rbin(r, info.left_hash);
  rbin(r, info.right_hash);
  uint32_t z = r.u32();
  if (z > 8) throw Error(ErrorCode::malformed, "too many commitments");
  info.commitments.resize(z);
  for (auto& c : info.commitments) rbin(r, c);
  info.count = r.u64();
}
ordered_json jput(const AggregateLeafInfo& info) {
  ordered_json cs = ordered_json::array();
  for (const auto& c : info.commitments) cs.push_back(jput(c));
  return ordered_json{{"left_hash", jput(info.left_hash)},
                      {"right_hash", jput(info.right_hash)},
                      {"commitments", cs},
                      {"count", info.count}};
}
void jget(const ordered_json& j, AggregateLeafInfo& info) {
  jget(j.at("left_hash"), info.left_hash);
  jget(j.at("right_hash"), info.right_hash);
  for (const auto& c : j.at("commitments")) {
    Commitment x;
    jget(c, x);
    info.commitments.push_back(x);
  }
  if (info.commitments.size() > 8) throw Error(ErrorCode::malformed, "too many commitments");
  info.count = j.at("count").get<uint64_t>();
}

void wbin(BinWriter& w, const AggregateProof& b) {
  wbin(w, b.cover);
  wbin(w, b.total_seed);
  w.u32(checked_len(b.sums.size()));
  for (uint128 s : b.sums) w.u128v(s);
  w.u32(checked_len(b.leaves.size()));
  for (const auto& leaf : b.leaves) wbin(w, leaf);
}
void rbin(BinReader& r, AggregateProof& b) {
  rbin(r, b.cover);
  rbin(r, b.total_seed);
  uint32_t nz = r.u32();
  if (nz > 8) throw Error(ErrorCode::malformed, "too many sums");
  b.sums.resize(nz);
  for (auto& s : b.sums) s = r.u128v();
  uint32_t n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "too many leaves");
  b.leaves.resize(n);
  for (auto& leaf : b.leaves) rbin(r, leaf);
}
ordered_json jput(const AggregateProof& b) {
  ordered_json sums = ordered_json::array();
  for (uint128 s : b.sums) sums.push_back(u128_to_string(s));
  ordered_json leaves = ordered_json::array();
  for (const auto& leaf : b.leaves) leaves.push_back(jput(leaf));
  return ordered_json{{"cover", jput(b.cover)},
                      {"total_seed", jput(b.total_seed)},
                      {"sums", sums},
                      {"leaves", leaves}};
}
void jget(const ordered_json& j, AggregateProof& b) {
  jget(j.at("cover"), b.cover);
  jget(j.at("total_seed"), b.total_seed);
  for (const auto& s : j.at("sums")) b.sums.push_back(u128_from_string(s.get<std::string>()));
  if (b.sums.size() > 8) throw Error(ErrorCode::malformed, "too many sums");
  for (const auto& leaf : j.at("leaves")) {
    AggregateLeafInfo info;
    jget(leaf, info);
    b.leaves.push_back(info);
  }
}

void wbin(BinWriter& w, const MinMaxRequest& b) {
  wbin(w, b.spec);
  w.u8(static_cast<uint8_t>(b.mode));
}
void rbin(BinReader& r, MinMaxRequest& b) {
  rbin(r, b.spec);
  uint8_t m = r.u8();
  if (m > 1) throw Error(ErrorCode::malformed, "mode");
  b.mode = static_cast<MinMaxMode>(m);
}
ordered_json jput(const MinMaxRequest& b) {
  return ordered_json{{"spec", jput(b.spec)}, {"mode", b.mode == MinMaxMode::min ? "min" : "max"}};
}
void jget(const ordered_json& j, MinMaxRequest& b) {
  jget(j.at("spec"), b.spec);
  std::string m = j.at("mode").get<std::string>();
  if (m != "min" && m != "max") throw Error(ErrorCode::malformed, "mode");
  b.mode = m == "min" ? MinMaxMode::min : MinMaxMode::max;
}

void wbin(BinWriter& w, const MinMaxLeafProof& b) {
  wbin(w, b.leaf);
  wbin_copath(w, b.copath);
  wbin(w, b.range_proof);
}
void rbin(BinReader& r, MinMaxLeafProof& b) {
  rbin(r, b.leaf);
  rbin_copath(r, b.copath);
  rbin(r, b.range_proof);
}
ordered_json jput(const MinMaxLeafProof& b) {
  return ordered_json{{"leaf", jput(b.leaf)},
                      {"copath", jput_copath(b.copath)},
                      {"range_proof", jput(b.range_proof)}};
}
void jget(const ordered_json& j, MinMaxLeafProof& b) {
  jget(j.at("leaf"), b.leaf);
  jget_copath(j.at("copath"), b.copath);
  jget(j.at("range_proof"), b.range_proof);
}

void wbin(BinWriter& w, const MinMaxProof& b) {
  w.u8(static_cast<uint8_t>(b.mode));
  w.u64(b.extreme);
  w.u32(b.witness_index);
  wbin(w, b.cover);
  w.u32(checked_len(b.per_tree.size()));
  for (const auto& t : b.per_tree) wbin(w, t);
}
void rbin(BinReader& r, MinMaxProof& b) {
  uint8_t m = r.u8();
  if (m > 1) throw Error(ErrorCode::malformed, "mode");
  b.mode = static_cast<MinMaxMode>(m);
  b.extreme = r.u64();
  b.witness_index = r.u32();
  rbin(r, b.cover);
  uint32_t n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "too many trees");
  b.per_tree.resize(n);
  for (auto& t : b.per_tree) rbin(r, t);
}
ordered_json jput(const MinMaxProof& b) {
  ordered_json trees = ordered_json::array();
  for (const auto& t : b.per_tree) trees.push_back(jput(t));
  return ordered_json{{"mode", b.mode == MinMaxMode::min ? "min" : "max"},
                      {"extreme", b.extreme},
                      {"witness_index", b.witness_index},
                      {"cover", jput(b.cover)},
                      {"per_tree", trees}};
}
void jget(const ordered_json& j, MinMaxProof& b) {
  std::string m = j.at("mode").get<std::string>();
  if (m != "min" && m != "max") throw Error(ErrorCode::malformed, "mode");
  b.mode = m == "min" ? MinMaxMode::min : MinMaxMode::max;
  b.extreme = j.at("extreme").get<uint64_t>();
  b.witness_index = j.at("witness_index").get<uint32_t>();
  jget(j.at("cover"), b.cover);
  for (const auto& t : j.at("per_tree")) {
    MinMaxLeafProof leaf;
    jget(t, leaf);
    b.per_tree.push_back(leaf);
  }
}

void wbin(BinWriter& w, const Fraction& q) {
  w.u64(q.num);
  w.u64(q.den);
}
void rbin(BinReader& r, Fraction& q) {
  q.num = r.u64();
  q.den = r.u64();
  if (q.den == 0) throw Error(ErrorCode::malformed, "zero denominator");
}
ordered_json jput(const Fraction& q) { return ordered_json{{"num", q.num}, {"den", q.den}}; }
void jget(const ordered_json& j, Fraction& q) {
  q.num = j.at("num").get<uint64_t>();
  q.den = j.at("den").get<uint64_t>();
  if (q.den == 0) throw Error(ErrorCode::malformed, "zero denominator");
}

void wbin(BinWriter& w, const QuantileRequest& b) {
  wbin(w, b.spec);
  wbin(w, b.q);
  w.u8(b.candidate ? 1 : 0);
  if (b.candidate) w.u64(*b.candidate);
}
void rbin(BinReader& r, QuantileRequest& b) {
  rbin(r, b.spec);
  rbin(r, b.q);
  if (r.u8()) b.candidate = r.u64();
}
ordered_json jput(const QuantileRequest& b) {
  ordered_json j{{"spec", jput(b.spec)}, {"q", jput(b.q)}};
  if (b.candidate) j["candidate"] = *b.candidate;
  return j;
}
void jget(const ordered_json& j, QuantileRequest& b) {
  jget(j.at("spec"), b.spec);
  jget(j.at("q"), b.q);
  if (j.contains("candidate")) b.candidate = j.at("candidate").get<uint64_t>();
}

void wbin(BinWriter& w, const QuantileSideProof& b) {
  wbin(w, b.leaf);
  wbin_copath(w, b.copath);
  wbin(w, b.range_proof);
}
void rbin(BinReader& r, QuantileSideProof& b) {
  rbin(r, b.leaf);
  rbin_copath(r, b.copath);
  rbin(r, b.range_proof);
}
ordered_json jput(const QuantileSideProof& b) {
  return ordered_json{{"leaf", jput(b.leaf)},
                      {"copath", jput_copath(b.copath)},
                      {"range_proof", jput(b.range_proof)}};
}
void jget(const ordered_json& j, QuantileSideProof& b) {
  jget(j.at("leaf"), b.leaf);
  jget_copath(j.at("copath"), b.copath);
  jget(j.at("range_proof"), b.range_proof);
}

void wbin(BinWriter& w, const QuantileTreeProof& b) {
  w.u8((b.geq ? 1 : 0) | (b.leq ? 2 : 0));
  if (b.geq) wbin(w, *b.geq);
  if (b.leq) wbin(w, *b.leq);
}
void rbin(BinReader& r, QuantileTreeProof& b) {
  uint8_t flags = r.u8();
  if (flags > 3) throw Error(ErrorCode::malformed, "flags");
  if (flags & 1) {
    QuantileSideProof side;
    rbin(r, side);
    b.geq = std::move(side);
  }
  if (flags & 2) {
    QuantileSideProof side;
    rbin(r, side);
    b.leq = std::move(side);
  }
}
ordered_json jput(const QuantileTreeProof& b) {
  ordered_json j = ordered_json::object();
  if (b.geq) j["geq"] = jput(*b.geq);
  if (b.leq) j["leq"] = jput(*b.leq);
  return j;
}
void jget(const ordered_json& j, QuantileTreeProof& b) {
  if (j.contains("geq")) {
    QuantileSideProof side;
    jget(j.at("geq"), side);
    b.geq = std::move(side);
  }
  if (j.contains("leq")) {
    QuantileSideProof side;
    jget(j.at("leq"), side);
    b.leq = std::move(side);
  }
}

void wbin(BinWriter& w, const QuantileProof& b) {
  w.u64(b.value);
  wbin(w, b.cover);
  w.u32(checked_len(b.per_tree.size()));
  for (const auto& t : b.per_tree) wbin(w, t);
}
void rbin(BinReader& r, QuantileProof& b) {
  b.value = r.u64();
  rbin(r, b.cover);
  uint32_t n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "too many trees");
  b.per_tree.resize(n);
  for (auto& t : b.per_tree) rbin(r, t);
}
ordered_json jput(const QuantileProof& b) {
  ordered_json trees = ordered_json::array();
  for (const auto& t : b.per_tree) trees.push_back(jput(t));
  return ordered_json{{"value", b.value}, {"cover", jput(b.cover)}, {"per_tree", trees}};
}
void jget(const ordered_json& j, QuantileProof& b) {
  b.value = j.at("value").get<uint64_t>();
  jget(j.at("cover"), b.cover);
  for (const auto& t : j.at("per_tree")) {
    QuantileTreeProof tree;
    jget(t, tree);
    b.per_tree.push_back(tree);
  }
}

void wbin(BinWriter& w, const AuditRequest& b) {
  w.u32(b.t_old);
  w.u32(b.t_new);
  w.f64(b.sample_fraction);
  w.u64(b.sample_seed);
}
void rbin(BinReader& r, AuditRequest& b) {
  b.t_old = r.u32();
  b.t_new = r.u32();
  b.sample_fraction = r.f64();
  b.sample_seed = r.u64();
}
ordered_json jput(const AuditRequest& b) {
  return ordered_json{{"t_old", b.t_old},
                      {"t_new", b.t_new},
                      {"fraction", b.sample_fraction},
                      {"seed", b.sample_seed}};
}
void jget(const ordered_json& j, AuditRequest& b) {
  b.t_old = j.at("t_old").get<uint32_t>();
  b.t_new = j.at("t_new").get<uint32_t>();
  b.sample_fraction = j.at("fraction").get<double>();
  b.sample_seed = j.at("seed").get<uint64_t>();
}

void wbin(BinWriter& w, const ExtensionProof& b) {
  w.u32(b.t_old);
  w.u32(b.t_new);
  w.u32(checked_len(b.new_leaves.size()));
  for (const auto& leaf : b.new_leaves) {
    wbin(w, leaf.key);
    wbin(w, leaf.value);
  }
  w.u32(checked_len(b.frontier.size()));
  for (const auto& entry : b.frontier) {
    wbin(w, entry.prefix);
    wbin(w, entry.hash);
  }
}
void rbin(BinReader& r, ExtensionProof& b) {
  b.t_old = r.u32();
  b.t_new = r.u32();
  uint32_t n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "too many leaves");
  b.new_leaves.resize(n);
  for (auto& leaf : b.new_leaves) {
    rbin(r, leaf.key);
    rbin(r, leaf.value);
  }
  n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "too many frontier entries");
  b.frontier.resize(n);
  for (auto& entry : b.frontier) {
    rbin(r, entry.prefix);
    rbin(r, entry.hash);
  }
}
ordered_json jput(const ExtensionProof& b) {
  ordered_json leaves = ordered_json::array();
  for (const auto& leaf : b.new_leaves) {
    leaves.push_back(ordered_json{{"key", jput(leaf.key)}, {"value", jput(leaf.value)}});
  }
  ordered_json frontier = ordered_json::array();
  for (const auto& entry : b.frontier) {
    frontier.push_back(ordered_json{{"prefix", jput(entry.prefix)}, {"hash", jput(entry.hash)}});
  }
  return ordered_json{{"t_old", b.t_old},
                      {"t_new", b.t_new},
                      {"new_leaves", leaves},
                      {"frontier", frontier}};
}
void jget(const ordered_json& j, ExtensionProof& b) {
  b.t_old = j.at("t_old").get<uint32_t>();
  b.t_new = j.at("t_new").get<uint32_t>();
  for (const auto& leaf : j.at("new_leaves")) {
    ExtensionLeaf l;
    jget(leaf.at("key"), l.key);
    jget(leaf.at("value"), l.value);
    b.new_leaves.push_back(l);
  }
  for (const auto& entry : j.at("frontier")) {
    FrontierEntry e;
    jget(entry.at("prefix"), e.prefix);
    jget(entry.at("hash"), e.hash);
    b.frontier.push_back(e);
  }
}

void wbin(BinWriter& w, const BucketAudit& b) {
  wbin(w, b.prefix_key);
  w.u32(checked_len(b.leaves.size()));
  for (const auto& leaf : b.leaves) wbin(w, leaf);
  w.u32(checked_len(b.sortedness.size()));
  for (const auto& p : b.sortedness) wbin(w, p);
  w.u32(checked_len(b.gamma_bounds.size()));
  for (const auto& p : b.gamma_bounds) wbin(w, p);
}
void rbin(BinReader& r, BucketAudit& b) {
  rbin(r, b.prefix_key);
  uint32_t n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "too many leaves");
  b.leaves.resize(n);
  for (auto& leaf : b.leaves) rbin(r, leaf);
  n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "too many proofs");
  b.sortedness.resize(n);
  for (auto& p : b.sortedness) rbin(r, p);
  n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "too many proofs");
  b.gamma_bounds.resize(n);
  for (auto& p : b.gamma_bounds) rbin(r, p);
}
ordered_json jput(const BucketAudit& b) {
  ordered_json leaves = ordered_json::array();
  for (const auto& leaf : b.leaves) leaves.push_back(jput(leaf));
  ordered_json sorted = ordered_json::array();
  for (const auto& p : b.sortedness) sorted.push_back(jput(p));
  ordered_json gamma = ordered_json::array();
  for (const auto& p : b.gamma_bounds) gamma.push_back(jput(p));
  return ordered_json{{"prefix_key", jput(b.prefix_key)},
                      {"leaves", leaves},
                      {"sortedness", sorted},
                      {"gamma_bounds", gamma}};
}
void jget(const ordered_json& j, BucketAudit& b) {
  jget(j.at("prefix_key"), b.prefix_key);
  for (const auto& leaf : j.at("leaves")) {
    SumLeafData l;
    jget(leaf, l);
    b.leaves.push_back(l);
  }
  for (const auto& p : j.at("sortedness")) {
    RangeProof rp;
    jget(p, rp);
    b.sortedness.push_back(rp);
  }
  for (const auto& p : j.at("gamma_bounds")) {
    RangeProof rp;
    jget(p, rp);
    b.gamma_bounds.push_back(rp);
  }
}

void wbin(BinWriter& w, const AuditProof& b) {
  w.u32(b.t_old);
  w.u32(b.t_new);
  wbin(w, b.extension);
  w.u8(b.genesis_cover ? 1 : 0);
  if (b.genesis_cover) wbin(w, *b.genesis_cover);
  w.u32(checked_len(b.buckets.size()));
  for (const auto& bucket : b.buckets) wbin(w, bucket);
  w.f64(b.sample_fraction);
  w.u64(b.sample_seed);
}
void rbin(BinReader& r, AuditProof& b) {
  b.t_old = r.u32();
  b.t_new = r.u32();
  rbin(r, b.extension);
  if (r.u8()) {
    RangeCoverProof cover;
    rbin(r, cover);
    b.genesis_cover = std::move(cover);
  }
  uint32_t n = r.u32();
  if (n > kMaxListLen) throw Error(ErrorCode::malformed, "too many buckets");
  b.buckets.resize(n);
  for (auto& bucket : b.buckets) rbin(r, bucket);
  b.sample_fraction = r.f64();
  b.sample_seed = r.u64();
}
ordered_json jput(const AuditProof& b) {
  ordered_json buckets = ordered_json::array();
  for (const auto& bucket : b.buckets) buckets.push_back(jput(bucket));
  ordered_json j{{"t_old", b.t_old}, {"t_new", b.t_new}, {"extension", jput(b.extension)}};
  if (b.genesis_cover) j["genesis_cover"] = jput(*b.genesis_cover);
  j["buckets"] = buckets;
  j["sample_fraction"] = b.sample_fraction;
  j["sample_seed"] = b.sample_seed;
  return j;
}
void jget(const ordered_json& j, AuditProof& b) {
  b.t_old = j.at("t_old").get<uint32_t>();
  b.t_new = j.at("t_new").get<uint32_t>();
  jget(j.at("extension"), b.extension);
  if (j.contains("genesis_cover")) {
    RangeCoverProof cover;
    jget(j.at("genesis_cover"), cover);
    b.genesis_cover = std::move(cover);
  }
  for (const auto& bucket : j.at("buckets")) {
    BucketAudit audit;
    jget(bucket, audit);
    b.buckets.push_back(audit);
  }
  b.sample_fraction = j.at("sample_fraction").get<double>();
  b.sample_seed = j.at("sample_seed").get<uint64_t>();
}

void wbin(BinWriter& w, const DigestRequest& b) {
  w.u8(b.epoch ? 1 : 0);
  if (b.epoch) w.u32(*b.epoch);
}
void rbin(BinReader& r, DigestRequest& b) {
  if (r.u8()) b.epoch = r.u32();
}
ordered_json jput(const DigestRequest& b) {
  ordered_json j = ordered_json::object();
  if (b.epoch) j["epoch"] = *b.epoch;
  return j;
}
void jget(const ordered_json& j, DigestRequest& b) {
  if (j.contains("epoch")) b.epoch = j.at("epoch").get<uint32_t>();
}

void wbin(BinWriter& w, const DigestResponse& b) {
  w.u32(b.epoch);
  wbin(w, b.digest);
}
void rbin(BinReader& r, DigestResponse& b) {
  b.epoch = r.u32();
  rbin(r, b.digest);
}
ordered_json jput(const DigestResponse& b) {
  return ordered_json{{"epoch", b.epoch}, {"digest", jput(b.digest)}};
}
void jget(const ordered_json& j, DigestResponse& b) {
  b.epoch = j.at("epoch").get<uint32_t>();
  jget(j.at("digest"), b.digest);
}

void wbin(BinWriter& w, const SeedRequest& b) {
  w.str(b.user_id);
  w.u32(b.epoch);
}
void rbin(BinReader& r, SeedRequest& b) {
  b.user_id = r.str();
  b.epoch = r.u32();
}
ordered_json jput(const SeedRequest& b) {
  return ordered_json{{"user", b.user_id}, {"epoch", b.epoch}};
}
void jget(const ordered_json& j, SeedRequest& b) {
  b.user_id = j.at("user").get<std::string>();
  b.epoch = j.at("epoch").get<uint32_t>();
}

void wbin(BinWriter& w, const SeedResponse& b) { wbin(w, b.seed); }
void rbin(BinReader& r, SeedResponse& b) { rbin(r, b.seed); }
ordered_json jput(const SeedResponse& b) { return ordered_json{{"seed", jput(b.seed)}}; }
void jget(const ordered_json& j, SeedResponse& b) { jget(j.at("seed"), b.seed); }

}  // namespace

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::error: return "error";
    case Kind::epoch_request: return "epoch_request";
    case Kind::epoch_response: return "epoch_response";
    case Kind::lookup_request: return "lookup_request";
    case Kind::lookup_inclusion: return "lookup_inclusion";
    case Kind::lookup_nonexistence: return "lookup_nonexistence";
    case Kind::aggregate_request: return "aggregate_request";
    case Kind::aggregate_proof: return "aggregate_proof";
    case Kind::minmax_request: return "minmax_request";
    case Kind::minmax_proof: return "minmax_proof";
    case Kind::quantile_request: return "quantile_request";
    case Kind::quantile_proof: return "quantile_proof";
    case Kind::audit_request: return "audit_request";
    case Kind::audit_proof: return "audit_proof";
    case Kind::digest_request: return "digest_request";
    case Kind::digest_response: return "digest_response";
    case Kind::seed_request: return "seed_request";
    case Kind::seed_response: return "seed_response";
  }
  return "unknown";
}

Message make_message(Body body) {
  Message m;
  m.kind = static_cast<Kind>(body.index() <= 17 ? body.index() : 0);
  // Body variant order matches the Kind enum.
  m.body = std::move(body);
  return m;
}

Bytes encode(const Message& message, Mode mode) {
  if (mode == Mode::binary) {
    BinWriter w;
    w.u8(message.version);
    w.u8(static_cast<uint8_t>(message.kind));
    std::visit([&](const auto& body) { wbin(w, body); }, message.body);
    return w.out;
  }
  ordered_json j;
  j["version"] = message.version;
  j["kind"] = kind_name(message.kind);
  j["body"] = std::visit([&](const auto& body) { return jput(body); }, message.body);
  std::string text = j.dump();
  return Bytes(text.begin(), text.end());
}

namespace {

template <typename T>
Message decode_body_bin(BinReader& r, Kind kind) {
  T body{};
  rbin(r, body);
  r.done();
  Message m;
  m.kind = kind;
  m.body = std::move(body);
  return m;
}

template <typename T>
Message decode_body_json(const ordered_json& j, Kind kind) {
  T body{};
  jget(j, body);
  Message m;
  m.kind = kind;
  m.body = std::move(body);
  return m;
}

#define TAP_WIRE_KINDS(X)                    \
  X(error, ErrorBody)                        \
  X(epoch_request, EpochRequest)             \
  X(epoch_response, EpochResponse)           \
  X(lookup_request, LookupRequest)           \
  X(lookup_inclusion, LookupProof)           \
  X(lookup_nonexistence, NonExistenceProof)  \
  X(aggregate_request, AggregateRequest)     \
  X(aggregate_proof, AggregateProof)         \
  X(minmax_request, MinMaxRequest)           \
  X(minmax_proof, MinMaxProof)               \
  X(quantile_request, QuantileRequest)       \
  X(quantile_proof, QuantileProof)           \
  X(audit_request, AuditRequest)             \
  X(audit_proof, AuditProof)                 \
  X(digest_request, DigestRequest)           \
  X(digest_response, DigestResponse)         \
  X(seed_request, SeedRequest)               \
  X(seed_response, SeedResponse)

Message dispatch_bin(uint8_t kind_byte, BinReader& r) {
  switch (static_cast<Kind>(kind_byte)) {
#define X(name, type) \
  case Kind::name:    \
    return decode_body_bin<type>(r, Kind::name);
    TAP_WIRE_KINDS(X)
#undef X
  }
  throw Error(ErrorCode::malformed, "unknown message kind " + std::to_string(kind_byte));
}

Message dispatch_json(uint8_t kind_byte, const ordered_json& body) {
  switch (static_cast<Kind>(kind_byte)) {
#define X(name, type) \
  case Kind::name:    \
    return decode_body_json<type>(body, Kind::name);
    TAP_WIRE_KINDS(X)
#undef X
  }
  throw Error(ErrorCode::malformed, "unknown message kind " + std::to_string(kind_byte));
}

uint8_t kind_from_name(const std::string& name) {
  for (uint8_t k = 0; k <= 17; ++k) {
    if (name == kind_name(static_cast<Kind>(k))) return k;
  }
  throw Error(ErrorCode::malformed, "unknown message kind '" + name + "'");
}

}  // namespace

Message decode(std::span<const uint8_t> data, Mode mode) {
  if (mode == Mode::binary) {
    BinReader r{data};
    uint8_t version = r.u8();
    if (version != kWireVersion) throw Error(ErrorCode::malformed, "unsupported wire version");
    uint8_t kind = r.u8();
    return dispatch_bin(kind, r);
  }

  ordered_json j;
  try {
    j = ordered_json::parse(std::string(data.begin(), data.end()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed, std::string("bad json: ") + e.what());
  }
  try {
    if (j.at("version").get<uint8_t>() != kWireVersion) {
      throw Error(ErrorCode::malformed, "unsupported wire version");
    }
    uint8_t kind = kind_from_name(j.at("kind").get<std::string>());
    return dispatch_json(kind, j.at("body"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed, std::string("bad field: ") + e.what());
  }
}

}  // namespace tap::wire
