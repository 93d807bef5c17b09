#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "tap/errors.hpp"
#include "tap/wire.hpp"

using namespace tap;
using namespace tap::wire;

namespace {

struct Gen {
  std::mt19937_64 rng{101};

  uint64_t u(uint64_t bound) { return rng() % bound; }
  Digest256 digest() {
    Digest256 d;
    for (auto& b : d) b = static_cast<uint8_t>(rng());
    return d;
  }
  Commitment commitment() { return commit_u64(u(1000), Scalar::random()); }
  BitString bits(size_t len) {
    BitString out;
    for (size_t i = 0; i < len; ++i) out.append_bit(rng() % 2);
    return out;
  }
  Bytes blob(size_t len) {
    Bytes out(len);
    for (auto& b : out) b = static_cast<uint8_t>(rng());
    return out;
  }
  std::string name() { return "user" + std::to_string(u(100)); }

  RangeSpec spec() {
    RangeSpec out;
    out.t_min = static_cast<uint32_t>(u(10));
    out.t_max = out.t_min + static_cast<uint32_t>(u(5));
    out.type_ranges = {{u(4), u(4) + 4}, {u(2), u(2) + 1}};
    return out;
  }
  RangeProof range_proof() {
    RangeProof p;
    p.statement = {commitment(), u(100), 200 + u(100)};
    p.proof_bytes = blob(64 + u(64));
    return p;
  }
  SumLeafData leaf(uint32_t z) {
    SumLeafData out;
    for (uint32_t j = 0; j < z; ++j) out.commitments.push_back(commitment());
    out.id_hash = digest();
    return out;
  }
  std::vector<SumCoPathEntry> copath(uint32_t z) {
    std::vector<SumCoPathEntry> out;
    size_t n = u(4);
    for (size_t i = 0; i < n; ++i) {
      SumCoPathEntry entry;
      entry.hash = digest();
      for (uint32_t j = 0; j < z; ++j) entry.commitments.push_back(commitment());
      entry.count = u(50);
      entry.sibling_on_left = static_cast<uint8_t>(u(2));
      out.push_back(entry);
    }
    return out;
  }
  PrefixInclusionProof prefix_proof() {
    PrefixInclusionProof out;
    out.key = bits(33);
    out.leaf_value = digest();
    size_t n = u(5);
    for (size_t i = 0; i < n; ++i) {
      out.siblings.emplace_back(static_cast<uint32_t>(1 + u(33)), digest());
    }
    return out;
  }
  RangeCoverProof cover() {
    RangeCoverProof out;
    CoverEntry root;
    root.left_kind = 2;
    root.right_kind = 1;
    root.right_hash = digest();
    out.nodes.push_back(root);
    CoverEntry leaf_entry;
    leaf_entry.is_leaf = 1;
    leaf_entry.leaf_value = digest();
    out.nodes.push_back(leaf_entry);
    return out;
  }
  ExtensionProof extension() {
    ExtensionProof out;
    out.t_old = static_cast<uint32_t>(u(4));
    out.t_new = out.t_old + static_cast<uint32_t>(u(4));
    size_t n = u(3);
    for (size_t i = 0; i < n; ++i) out.new_leaves.push_back({bits(33), digest()});
    size_t m = u(3);
    for (size_t i = 0; i < m; ++i) out.frontier.push_back({bits(1 + u(8)), digest()});
    return out;
  }
};

template <typename T>
void roundtrip(const T& body) {
  for (Mode mode : {Mode::text, Mode::binary}) {
    Message msg = make_message(body);
    Bytes data = encode(msg, mode);
    Message back = decode(data, mode);
    CHECK(back.kind == msg.kind);
    REQUIRE(std::holds_alternative<T>(back.body));
    CHECK(std::get<T>(back.body) == body);
  }
}

}  // namespace

TEST_CASE("round-trip every message kind") {
  Gen gen;
  for (int rep = 0; rep < 8; ++rep) {
    roundtrip(ErrorBody{"code", "message " + std::to_string(rep)});
    roundtrip(EpochRequest{
        static_cast<uint32_t>(gen.u(9)),
        {{gen.name(), {static_cast<uint32_t>(gen.u(4)), 1}, gen.u(1000)},
         {gen.name(), {0, 0}, gen.u(1000)}}});
    roundtrip(EpochResponse{static_cast<uint32_t>(gen.u(9)), gen.digest()});
    roundtrip(LookupRequest{gen.name(), {1, 2}, static_cast<uint32_t>(gen.u(9))});

    LookupProof lookup;
    lookup.value = gen.u(1000);
    lookup.prefix_proof = gen.prefix_proof();
    lookup.sum_copath = gen.copath(2);
    roundtrip(lookup);

    NonExistenceProof ne;
    ne.bucket_exists = 1;
    ne.prefix_proof = gen.prefix_proof();
    ne.leaves = {gen.leaf(2), gen.leaf(2)};
    roundtrip(ne);
    NonExistenceProof ne2;
    ne2.bucket_exists = 0;
    ne2.cover = gen.cover();
    roundtrip(ne2);

    roundtrip(AggregateRequest{gen.spec()});

    AggregateProof agg;
    agg.cover = gen.cover();
    agg.total_seed = Scalar::random();
    agg.sums = {gen.u(10000), (uint128(1) << 70) + gen.u(999)};
    agg.leaves = {{gen.digest(), gen.digest(), {gen.commitment(), gen.commitment()}, gen.u(9)}};
    roundtrip(agg);

    roundtrip(MinMaxRequest{gen.spec(), MinMaxMode::max});

    MinMaxProof mm;
    mm.mode = MinMaxMode::min;
    mm.extreme = gen.u(500);
    mm.witness_index = static_cast<uint32_t>(gen.u(2));
    mm.cover = gen.cover();
    mm.per_tree = {{gen.leaf(2), gen.copath(2), gen.range_proof()},
                   {gen.leaf(2), gen.copath(2), gen.range_proof()}};
    roundtrip(mm);

    roundtrip(QuantileRequest{gen.spec(), Fraction{1, 2}, std::nullopt});
    roundtrip(QuantileRequest{gen.spec(), Fraction{1, 20}, gen.u(100)});

    QuantileProof qp;
    qp.value = gen.u(500);
    qp.cover = gen.cover();
    QuantileTreeProof tree;
    tree.geq = QuantileSideProof{gen.leaf(2), gen.copath(2), gen.range_proof()};
    qp.per_tree.push_back(tree);
    QuantileTreeProof tree2;
    tree2.leq = QuantileSideProof{gen.leaf(2), gen.copath(2), gen.range_proof()};
    qp.per_tree.push_back(tree2);
    roundtrip(qp);

    roundtrip(AuditRequest{1, 3, 0.5, gen.u(1000)});

    AuditProof audit;
    audit.t_old = 0;
    audit.t_new = 2;
    audit.extension = gen.extension();
    audit.genesis_cover = gen.cover();
    BucketAudit bucket;
    bucket.prefix_key = gen.bits(33);
    bucket.leaves = {gen.leaf(2), gen.leaf(2)};
    bucket.sortedness = {gen.range_proof()};
    bucket.gamma_bounds = {gen.range_proof(), gen.range_proof()};
    audit.buckets.push_back(bucket);
    audit.sample_fraction = 0.75;
    audit.sample_seed = gen.u(1 << 20);
    roundtrip(audit);

    roundtrip(DigestRequest{std::nullopt});
    roundtrip(DigestRequest{static_cast<uint32_t>(gen.u(9))});
    roundtrip(DigestResponse{static_cast<uint32_t>(gen.u(9)), gen.digest()});
    roundtrip(SeedRequest{gen.name(), static_cast<uint32_t>(gen.u(9))});
    roundtrip(SeedResponse{Scalar::random()});
  }
}

TEST_CASE("unknown kinds and malformed frames are rejected") {
  Message msg = make_message(DigestRequest{});
  Bytes bin = encode(msg, Mode::binary);
  bin[1] = 200;  // out-of-range kind
  CHECK_THROWS_AS(decode(bin, Mode::binary), Error);

  Bytes bad_version = encode(msg, Mode::binary);
  bad_version[0] = 9;
  CHECK_THROWS_AS(decode(bad_version, Mode::binary), Error);

  std::string text = R"({"version":1,"kind":"no_such_kind","body":{}})";
  CHECK_THROWS_AS(decode(Bytes(text.begin(), text.end()), Mode::text), Error);
  std::string garbage = "not json";
  CHECK_THROWS_AS(decode(Bytes(garbage.begin(), garbage.end()), Mode::text), Error);

  Bytes truncated = encode(msg, Mode::binary);
  truncated.pop_back();
  // DigestRequest{} has a one-byte body; dropping it truncates the frame.
  CHECK_THROWS_AS(decode(truncated, Mode::binary), Error);
}

TEST_CASE("binary decode validates group elements") {
  LookupProof lookup;
  lookup.value = 5;
  lookup.prefix_proof.key = BitString::from_string("0");
  lookup.prefix_proof.leaf_value = Digest256{};
  SumCoPathEntry entry;
  entry.hash = Digest256{};
  entry.commitments = {commit_u64(3, Scalar::random())};
  entry.count = 1;
  lookup.sum_copath = {entry};
  Bytes data = encode(make_message(lookup), Mode::binary);
  // Stomp the commitment bytes with a non-canonical encoding.
  bool rejected = false;
  for (size_t i = 0; i + 32 <= data.size(); ++i) {
    Bytes mutated = data;
    for (size_t j = 0; j < 32; ++j) mutated[i + j] = 0xff;
    try {
      Message m = decode(mutated, Mode::binary);
      (void)m;
    } catch (const Error&) {
      rejected = true;
    }
  }
  CHECK(rejected);
}
