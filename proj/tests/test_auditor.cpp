#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support/fixtures.hpp"
#include "support/mutate.hpp"
#include "tap/auditor.hpp"
#include "tap/errors.hpp"

using namespace tap;
using test::ExampleFixture;

TEST_CASE("honest two-epoch audit passes with five sortedness proofs") {
  ExampleFixture fx;
  AuditProof proof = fx.server->audit_proof(0, 1);
  AuditReport report = epoch_check(fx.schema, proof, fx.bulletin.get(0), fx.bulletin.get(1));
  CHECK(report.pass());
  CHECK(report.extension_ok);
  // Buckets (0,res): 2 proofs, (1,res): 3, (1,ind): 0.
  CHECK(report.sortedness_total() == 5);
  CHECK(report.buckets.size() == 3);
  CHECK(report.gamma_total() == 0);
}

TEST_CASE("gamma bound adds one proof per leaf") {
  ExampleFixture fx(2, 40);
  AuditProof proof = fx.server->audit_proof(0, 1);
  AuditReport report = epoch_check(fx.schema, proof, fx.bulletin.get(0), fx.bulletin.get(1));
  CHECK(report.pass());
  CHECK(report.sortedness_total() == 5);
  CHECK(report.gamma_total() == 8);
}

TEST_CASE("single-leaf buckets contribute zero sortedness proofs") {
  ExampleFixture fx;
  // Audit only epoch 1: buckets (1,res) n=4 and (1,ind) n=1 -> 3 proofs.
  AuditProof proof = fx.server->audit_proof(1, 1);
  AuditReport report = epoch_check(fx.schema, proof, fx.bulletin.get(1), fx.bulletin.get(1));
  // (1, res) and (1, ind) are audited only when reached from t_old < 1;
  // the identity audit has no new buckets.
  CHECK(report.pass());
  CHECK(report.sortedness_total() == 0);
}

namespace {

// A server that committed an unsorted (or otherwise tampered) bucket, built
// from the public primitives. Returns the bulletin it published to.
struct RiggedState {
  Schema schema = test::example_schema();
  Bulletin bulletin;
  PrefixTree tree0{schema.key_length()};
  PrefixTree tree1{schema.key_length()};
  std::vector<SumEntry> epoch0;
  std::vector<SumEntry> epoch1_res;
  std::vector<SumEntry> epoch1_ind;

  RiggedState() {
    std::mt19937_64 rng(5);
    auto seed = [&] { return Scalar::random(); };
    epoch0 = {{11, seed(), "Alice", 0}, {24, seed(), "Bob", 0}, {13, seed(), "Carol", 0}};
    epoch1_res = {{19, seed(), "Alice", 1},
                  {26, seed(), "Bob", 1},
                  {27, seed(), "Carol", 1},
                  {26, seed(), "Dave", 1}};
    epoch1_ind = {{36, seed(), "Erin", 1}};
  }

  // Builds both epochs honestly except for the supplied epoch-0 leaf order.
  void publish_with_epoch0_leaves(const std::vector<SumLeafData>& leaves0) {
    tree0.insert(schema.key_for(0, {0}), rebuild_sum_root(leaves0, schema.z));
    bulletin.publish(0, tree0.digest());
    tree1 = tree0;
    tree1.insert(schema.key_for(1, {0}), SumTree::build(epoch1_res, schema.z).root_hash());
    tree1.insert(schema.key_for(1, {1}), SumTree::build(epoch1_ind, schema.z).root_hash());
    bulletin.publish(1, tree1.digest());
  }

  AuditProof make_audit(const std::vector<SumLeafData>& leaves0,
                        const std::vector<RangeProof>& sortedness0) {
    AuditProof proof;
    proof.t_old = 0;
    proof.t_new = 1;
    proof.extension = make_extension_proof(tree0, tree1, 0, 1);
    RangeSpec genesis = RangeSpec::all(schema);
    genesis.t_min = genesis.t_max = 0;
    proof.genesis_cover = tree1.range_cover(schema, genesis);

    BucketAudit b0;
    b0.prefix_key = schema.key_for(0, {0});
    b0.leaves = leaves0;
    b0.sortedness = sortedness0;
    proof.buckets.push_back(b0);

    SumTree t_res = SumTree::build(epoch1_res, schema.z);
    BucketAudit b1;
    b1.prefix_key = schema.key_for(1, {0});
    b1.leaves = t_res.all_leaf_data();
    for (size_t i = 0; i + 1 < t_res.size(); ++i) {
      b1.sortedness.push_back(prove_range(t_res.value_at(i + 1) - t_res.value_at(i),
                                          t_res.seed_at(i + 1).sub(t_res.seed_at(i)), 0,
                                          kValueDomain));
    }
    proof.buckets.push_back(b1);

    SumTree t_ind = SumTree::build(epoch1_ind, schema.z);
    BucketAudit b2;
    b2.prefix_key = schema.key_for(1, {1});
    b2.leaves = t_ind.all_leaf_data();
    proof.buckets.push_back(b2);
    return proof;
  }
};

}  // namespace

TEST_CASE("unsorted committed bucket cannot pass the audit") {
  // The server swaps 13 and 24 before committing: leaves ordered 11, 24, 13.
  RiggedState rig;
  auto entry_leaf = [&](const SumEntry& e) {
    return SumLeafData{commit_powers(e.value, e.seed, rig.schema.z),
                       id_hash(e.user_id, e.time)};
  };
  std::vector<SumLeafData> unsorted = {entry_leaf(rig.epoch0[0]), entry_leaf(rig.epoch0[1]),
                                       entry_leaf(rig.epoch0[2])};
  rig.publish_with_epoch0_leaves(unsorted);

  // Pair (24, 13) has a negative difference: the honest prover refuses.
  CHECK_THROWS_AS(prove_range(static_cast<uint64_t>(-11), Scalar::zero(), 0, kValueDomain),
                  Error);

  // The best the server can do is attach range proofs for other statements
  // (here: proofs for the sorted pair values on the correct buckets).
  std::vector<RangeProof> bogus;
  bogus.push_back(prove_range(13, rig.epoch0[1].seed.sub(rig.epoch0[0].seed), 0, kValueDomain));
  bogus.push_back(prove_range(0, Scalar::zero(), 0, kValueDomain));
  AuditProof proof = rig.make_audit(unsorted, bogus);
  AuditReport report = epoch_check(rig.schema, proof, rig.bulletin.get(0), rig.bulletin.get(1));
  CHECK(report.extension_ok);  // the tree itself is append-only
  CHECK_FALSE(report.pass());  // but sortedness fails
}

TEST_CASE("historical leaf mutation breaks the extension check") {
  ExampleFixture fx;
  // The honest epochs are published; the server then silently rebuilds
  // epoch 0 with Alice's value changed and presents proofs from that state.
  Schema schema = fx.schema;
  PrefixTree mutated0(schema.key_length());
  SumTree tampered = SumTree::build(
      {
          {12, fx.server->epoch_secret("Alice", 0), "Alice", 0},  // was 11
          {24, fx.server->epoch_secret("Bob", 0), "Bob", 0},
          {13, fx.server->epoch_secret("Carol", 0), "Carol", 0},
      },
      schema.z);
  mutated0.insert(schema.key_for(0, {0}), tampered.root_hash());
  PrefixTree mutated1 = mutated0;
  {
    auto rows1 = fx.server->bucket_rows(BucketKey{1, {0}});
    std::vector<SumEntry> entries;
    for (const auto& row : rows1) entries.push_back({row.value, row.seed, row.user_id, row.time});
    mutated1.insert(schema.key_for(1, {0}), SumTree::build(entries, schema.z).root_hash());
    auto rows2 = fx.server->bucket_rows(BucketKey{1, {1}});
    entries.clear();
    for (const auto& row : rows2) entries.push_back({row.value, row.seed, row.user_id, row.time});
    mutated1.insert(schema.key_for(1, {1}), SumTree::build(entries, schema.z).root_hash());
  }
  ExtensionProof proof = make_extension_proof(mutated0, mutated1, 0, 1);
  // Against the published digests the rebuilt roots cannot match.
  CHECK_FALSE(verify_extension(schema.key_length(), proof, fx.bulletin.get(0),
                               fx.bulletin.get(1)));
}

TEST_CASE("leaf-order swap inside a historical bucket fails the audit") {
  ExampleFixture fx;
  AuditProof proof = fx.server->audit_proof(0, 1);
  // Swap two adjacent revealed leaves of the (1, res) bucket.
  for (auto& bucket : proof.buckets) {
    if (bucket.leaves.size() >= 2) {
      std::swap(bucket.leaves[0], bucket.leaves[1]);
      break;
    }
  }
  AuditReport report = epoch_check(fx.schema, proof, fx.bulletin.get(0), fx.bulletin.get(1));
  CHECK_FALSE(report.pass());
}

TEST_CASE("audit detects any single bucket mutation") {
  ExampleFixture fx(2, 40);
  AuditProof honest = fx.server->audit_proof(0, 1);
  Digest256 d0 = fx.bulletin.get(0);
  Digest256 d1 = fx.bulletin.get(1);
  REQUIRE(epoch_check(fx.schema, honest, d0, d1).pass());

  std::mt19937_64 rng(83);
  for (int i = 0; i < 150; ++i) {
    AuditProof mutated = test::mutate_bucket(honest, rng);
    CHECK_FALSE(epoch_check(fx.schema, mutated, d0, d1).pass());
  }
  for (int i = 0; i < 150; ++i) {
    AuditProof mutated = honest;
    mutated.extension = test::mutate(honest.extension, rng);
    CHECK_FALSE(epoch_check(fx.schema, mutated, d0, d1).pass());
  }
}

TEST_CASE("randomized audit is deterministic and detects sampled tampering") {
  ExampleFixture fx;
  AuditProof full = fx.server->audit_proof(0, 1, 1.0, 99);
  AuditReport full_report =
      epoch_check(fx.schema, full, fx.bulletin.get(0), fx.bulletin.get(1));
  CHECK(full_report.pass());
  CHECK(full_report.sampled_buckets == full_report.total_buckets);

  AuditProof half_a = fx.server->audit_proof(0, 1, 0.6, 42);
  AuditProof half_b = fx.server->audit_proof(0, 1, 0.6, 42);
  CHECK(half_a.buckets.size() == half_b.buckets.size());
  AuditReport report_a = randomized_audit(fx.schema, half_a, fx.bulletin.get(0),
                                          fx.bulletin.get(1));
  AuditReport report_b = randomized_audit(fx.schema, half_b, fx.bulletin.get(0),
                                          fx.bulletin.get(1));
  CHECK(report_a.pass());
  CHECK(report_a.sampled_buckets == report_b.sampled_buckets);

  // Tampering inside the sampled subset is caught.
  std::mt19937_64 rng(7);
  for (uint64_t seed = 0; seed < 40; ++seed) {
    AuditProof sampled = fx.server->audit_proof(0, 1, 0.5, seed);
    if (sampled.buckets.empty()) continue;
    AuditProof mutated = sampled;
    auto& bucket = mutated.buckets[rng() % mutated.buckets.size()];
    if (bucket.leaves.empty()) continue;
    test::flip_bit(bucket.leaves[0].id_hash, rng);
    AuditReport report =
        randomized_audit(fx.schema, mutated, fx.bulletin.get(0), fx.bulletin.get(1));
    CHECK_FALSE(report.pass());
  }
}
