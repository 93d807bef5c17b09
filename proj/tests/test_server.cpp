#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "support/fixtures.hpp"
#include "tap/errors.hpp"
#include "tap/verifier.hpp"
#include "tap/wire.hpp"

using namespace tap;
using test::ExampleFixture;

TEST_CASE("initialize publishes the epoch-0 digest") {
  Schema schema = test::example_schema();
  Bulletin bulletin;
  TapServer server(schema, bulletin);
  CHECK(bulletin.entries().size() == 1);
  CHECK(bulletin.get(0) == server.digest());
  CHECK(server.current_epoch() == 0);

  // Distinct keys give distinct epoch secrets downstream.
  Bulletin bulletin2;
  TapServer server2(schema, bulletin2);
  CHECK(server.epoch_secret("Alice", 0) != server2.epoch_secret("Alice", 0));

  Schema bad = schema;
  bad.attributes[0].codes["oversize"] = 2;  // does not fit width 1
  Bulletin bulletin3;
  CHECK_THROWS_AS(TapServer(bad, bulletin3), Error);
}

TEST_CASE("epoch secrets are deterministic per (user, epoch)") {
  ExampleFixture fx;
  CHECK(fx.server->epoch_secret("Alice", 0) == fx.server->epoch_secret("Alice", 0));
  CHECK(fx.server->epoch_secret("Alice", 0) != fx.server->epoch_secret("Alice", 1));
  CHECK(fx.server->epoch_secret("Alice", 0) != fx.server->epoch_secret("Bob", 0));
}

TEST_CASE("worked-example tree has exactly the three buckets") {
  ExampleFixture fx;
  PrefixTree tree = fx.server->tree_at(1);
  CHECK(tree.leaf_count() == 3);
  CHECK(tree.contains(fx.schema.key_for(0, {0})));
  CHECK(tree.contains(fx.schema.key_for(1, {0})));
  CHECK(tree.contains(fx.schema.key_for(1, {1})));
  CHECK_FALSE(tree.contains(fx.schema.key_for(0, {1})));  // (0, industrial) never stored
  CHECK(fx.bulletin.entries().size() == 2);
  CHECK(fx.bulletin.get(1) == fx.server->digest());
}

TEST_CASE("published digests rebuild from the row store at every epoch") {
  ExampleFixture fx;
  for (uint32_t t = 0; t <= 1; ++t) {
    CHECK(fx.server->tree_at(t).digest() == fx.bulletin.get(t));
  }
}

TEST_CASE("insert_epoch guards") {
  ExampleFixture fx;
  CHECK_THROWS_AS(fx.server->insert_epoch(3, {}), Error);  // must be current + 1
  CHECK_THROWS_AS(fx.server->insert_epoch(2, {{"Alice", {0}, 5}, {"Alice", {0}, 6}}), Error);
  CHECK_THROWS_AS(fx.server->insert_epoch(2, {{"X", {0}, kValueDomain}}), Error);

  // An empty epoch republishes the unchanged digest under the new number.
  Digest256 before = fx.server->digest();
  Digest256 after = fx.server->insert_epoch(2, {});
  CHECK(before == after);
  CHECK(fx.bulletin.get(2) == after);
}

TEST_CASE("gamma bound enforced on insert") {
  Schema schema = test::example_schema(2, 20);
  Bulletin bulletin;
  CHECK_THROWS_AS(TapServer(schema, bulletin, {{"Bob", {0}, 24}}), Error);
  Bulletin bulletin2;
  TapServer ok(schema, bulletin2, {{"Alice", {0}, 11}});
  CHECK(ok.current_epoch() == 0);
}

TEST_CASE("lookup inclusion verifies for Bob at epoch 0") {
  ExampleFixture fx;
  auto response = fx.server->lookup("Bob", {0}, 0);
  auto* proof = std::get_if<LookupProof>(&response);
  REQUIRE(proof != nullptr);
  CHECK(proof->value == 24);

  Scalar seed = fx.server->epoch_secret("Bob", 0);
  Digest256 delta0 = fx.bulletin.get(0);
  CHECK(verify_lookup(fx.schema, "Bob", {0}, 0, *proof, 24, seed, delta0));

  // Claiming a different value fails.
  LookupProof wrong = *proof;
  wrong.value = 25;
  CHECK_FALSE(verify_lookup(fx.schema, "Bob", {0}, 0, wrong, 25, seed, delta0));
  // Wrong epoch digest fails.
  CHECK_FALSE(verify_lookup(fx.schema, "Bob", {0}, 0, *proof, 24, seed, fx.bulletin.get(1)));
}

TEST_CASE("non-existence for Dave at epoch 0 reveals three foreign id hashes") {
  ExampleFixture fx;
  auto response = fx.server->lookup("Dave", {0}, 0);
  auto* proof = std::get_if<NonExistenceProof>(&response);
  REQUIRE(proof != nullptr);
  CHECK(proof->bucket_exists == 1);
  REQUIRE(proof->leaves.size() == 3);
  Digest256 own = id_hash("Dave", 0);
  for (const auto& leaf : proof->leaves) CHECK(leaf.id_hash != own);
  CHECK(verify_nonexistence(fx.schema, "Dave", {0}, 0, *proof, fx.bulletin.get(0)));

  // Omitting a leaf breaks the root rebuild.
  NonExistenceProof omitted = *proof;
  omitted.leaves.pop_back();
  CHECK_FALSE(verify_nonexistence(fx.schema, "Dave", {0}, 0, omitted, fx.bulletin.get(0)));

  // Adversarial: the same proof cannot convince Alice (whose entry exists).
  CHECK_FALSE(verify_nonexistence(fx.schema, "Alice", {0}, 0, *proof, fx.bulletin.get(0)));
}

TEST_CASE("prefix-level non-existence when the bucket is absent") {
  ExampleFixture fx;
  auto response = fx.server->lookup("Erin", {1}, 0);  // (0, industrial) absent
  auto* proof = std::get_if<NonExistenceProof>(&response);
  REQUIRE(proof != nullptr);
  CHECK(proof->bucket_exists == 0);
  CHECK(verify_nonexistence(fx.schema, "Erin", {1}, 0, *proof, fx.bulletin.get(0)));
  // The same cover does not verify against the other epoch's digest.
  CHECK_FALSE(verify_nonexistence(fx.schema, "Erin", {1}, 0, *proof, fx.bulletin.get(1)));
}

TEST_CASE("full-range aggregate verifies to the worked totals") {
  ExampleFixture fx;
  AggregateProof proof = fx.server->query_aggregate(fx.full_range());
  auto verified = verify_aggregate(fx.schema, fx.full_range(), proof, fx.digest());
  REQUIRE(verified.ok());
  CHECK(verified.value->count == 8);
  CHECK(verified.value->sums[0] == 182);
  CHECK(verified.value->sums[1] == 4604);
  CHECK(verified.value->mean() == doctest::Approx(22.75));
  CHECK(verified.value->sample_stddev() == doctest::Approx(8.137).epsilon(1e-3));
}

TEST_CASE("epoch-0 residential aggregate is 48") {
  ExampleFixture fx;
  AggregateProof proof = fx.server->query_aggregate(fx.epoch0_residential());
  auto verified = verify_aggregate(fx.schema, fx.epoch0_residential(), proof, fx.digest());
  REQUIRE(verified.ok());
  CHECK(verified.value->count == 3);
  CHECK(verified.value->sums[0] == 48);
}

TEST_CASE("empty-range aggregate verifies to zero") {
  ExampleFixture fx;
  RangeSpec spec = fx.full_range();
  spec.t_min = spec.t_max = 9;  // published? no - use a range inside [0,1] with no bucket
  spec.t_min = spec.t_max = 0;
  spec.type_ranges[0] = {1, 1};  // (0, industrial) is empty
  AggregateProof proof = fx.server->query_aggregate(spec);
  auto verified = verify_aggregate(fx.schema, spec, proof, fx.digest());
  REQUIRE(verified.ok());
  CHECK(verified.value->count == 0);
  CHECK(verified.value->sums[0] == 0);
  CHECK(proof.total_seed == Scalar::zero());
}

TEST_CASE("aggregate rejects tampered sums with a reason") {
  ExampleFixture fx;
  AggregateProof proof = fx.server->query_aggregate(fx.full_range());
  proof.sums[0] = 183;
  auto verified = verify_aggregate(fx.schema, fx.full_range(), proof, fx.digest());
  CHECK_FALSE(verified.ok());
  CHECK(verified.reject_reason == "sum-mismatch");

  AggregateProof proof2 = fx.server->query_aggregate(fx.full_range());
  proof2.leaves[0].count += 1;
  auto verified2 = verify_aggregate(fx.schema, fx.full_range(), proof2, fx.digest());
  CHECK_FALSE(verified2.ok());
  CHECK(verified2.reject_reason == "leaf-hash-mismatch");
}

TEST_CASE("minimum bucket size policy refuses small buckets") {
  Schema schema = test::example_schema();
  schema.min_bucket_size = 2;
  Bulletin bulletin;
  TapServer server(schema, bulletin, {{"Alice", {0}, 11}, {"Bob", {0}, 24}});
  server.insert_epoch(1, {{"Erin", {1}, 36}});
  RangeSpec wide = RangeSpec::all(schema);
  wide.t_min = 0;
  wide.t_max = 1;
  CHECK_THROWS_AS(server.query_aggregate(wide), Error);  // the (1, ind) bucket has 1 row
  RangeSpec narrow = wide;
  narrow.t_max = 0;
  CHECK(server.query_aggregate(narrow).leaves.size() == 1);
}

TEST_CASE("min over epoch 0 is 11 and max over all is 36") {
  ExampleFixture fx;
  RangeSpec epoch0 = fx.full_range();
  epoch0.t_max = 0;
  MinMaxProof min_proof = fx.server->query_minmax(epoch0, MinMaxMode::min);
  auto min_verified = verify_minmax(fx.schema, epoch0, min_proof, MinMaxMode::min, fx.digest());
  REQUIRE(min_verified.ok());
  CHECK(*min_verified.value == 11);

  MinMaxProof max_proof = fx.server->query_minmax(fx.full_range(), MinMaxMode::max);
  auto max_verified =
      verify_minmax(fx.schema, fx.full_range(), max_proof, MinMaxMode::max, fx.digest());
  REQUIRE(max_verified.ok());
  CHECK(*max_verified.value == 36);

  // Single-bucket range: the witness is that bucket, one equality proof.
  RangeSpec single = RangeSpec::single_bucket(fx.schema, 1, {1});
  MinMaxProof single_proof = fx.server->query_minmax(single, MinMaxMode::min);
  CHECK(single_proof.per_tree.size() == 1);
  CHECK(single_proof.witness_index == 0);
  auto single_verified =
      verify_minmax(fx.schema, single, single_proof, MinMaxMode::min, fx.digest());
  REQUIRE(single_verified.ok());
  CHECK(*single_verified.value == 36);

  CHECK_THROWS_AS(
      fx.server->query_minmax(RangeSpec::single_bucket(fx.schema, 0, {1}), MinMaxMode::min),
      Error);  // empty range
}

TEST_CASE("minmax rejects wrong claimed extremes") {
  ExampleFixture fx;
  RangeSpec epoch0 = fx.full_range();
  epoch0.t_max = 0;
  MinMaxProof proof = fx.server->query_minmax(epoch0, MinMaxMode::min);

  // Claiming below the true minimum: no equality witness can exist.
  MinMaxProof below = proof;
  below.extreme = 10;
  CHECK_FALSE(verify_minmax(fx.schema, epoch0, below, MinMaxMode::min, fx.digest()).ok());

  // Claiming above the true minimum: the witness tree's leftmost leaf fails.
  MinMaxProof above = proof;
  above.extreme = 12;
  CHECK_FALSE(verify_minmax(fx.schema, epoch0, above, MinMaxMode::min, fx.digest()).ok());

  // Proving a non-extreme leaf: claim 13 and prove leaf index 1 honestly.
  // Position checking (all co-path siblings on the right) must reject it.
  SumTree bucket = SumTree::build(
      {
          {11, fx.server->epoch_secret("Alice", 0), "Alice", 0},
          {24, fx.server->epoch_secret("Bob", 0), "Bob", 0},
          {13, fx.server->epoch_secret("Carol", 0), "Carol", 0},
      },
      fx.schema.z);
  MinMaxProof not_leftmost = proof;
  not_leftmost.extreme = 13;
  not_leftmost.per_tree[0].leaf = bucket.leaf_data(1);
  not_leftmost.per_tree[0].copath = bucket.inclusion_proof(1).copath;
  not_leftmost.per_tree[0].range_proof = prove_range(13, bucket.seed_at(1), 13, 14);
  CHECK_FALSE(verify_minmax(fx.schema, epoch0, not_leftmost, MinMaxMode::min, fx.digest()).ok());
}

TEST_CASE("median admits exactly the worked interval") {
  ExampleFixture fx;
  Fraction half{1, 2};
  QuantileProof chosen = fx.server->query_quantile(fx.full_range(), half);
  CHECK(chosen.value == 26);  // the server picks the largest valid stored value
  auto verified = verify_quantile(fx.schema, fx.full_range(), half, chosen, fx.digest());
  REQUIRE(verified.ok());

  for (uint64_t candidate : {24, 25, 26}) {
    QuantileProof proof = fx.server->prove_quantile_candidate(fx.full_range(), candidate);
    CHECK(verify_quantile(fx.schema, fx.full_range(), half, proof, fx.digest()).ok());
  }
  for (uint64_t candidate : {0, 11, 23, 27, 36, 40}) {
    QuantileProof proof = fx.server->prove_quantile_candidate(fx.full_range(), candidate);
    CHECK_FALSE(verify_quantile(fx.schema, fx.full_range(), half, proof, fx.digest()).ok());
  }
}

TEST_CASE("quantile edges: q=0, q=1, q=0.05") {
  ExampleFixture fx;
  QuantileProof qmin = fx.server->query_quantile(fx.full_range(), Fraction{0, 1});
  CHECK(qmin.value == 11);
  CHECK(verify_quantile(fx.schema, fx.full_range(), Fraction{0, 1}, qmin, fx.digest()).ok());

  QuantileProof qmax = fx.server->query_quantile(fx.full_range(), Fraction{1, 1});
  CHECK(qmax.value == 36);
  CHECK(verify_quantile(fx.schema, fx.full_range(), Fraction{1, 1}, qmax, fx.digest()).ok());

  Fraction f05{1, 20};
  QuantileProof q05 = fx.server->query_quantile(fx.full_range(), f05);
  CHECK(q05.value == 11);  // nq = 0.4, one value <= 11 suffices
  CHECK(verify_quantile(fx.schema, fx.full_range(), f05, q05, fx.digest()).ok());

  CHECK_THROWS_AS(fx.server->query_quantile(fx.full_range(), Fraction{3, 2}), Error);
}

TEST_CASE("quantile correctness vs brute-force oracle on random data") {
  std::mt19937_64 rng(67);
  Schema schema;
  schema.attributes = {TypeAttribute{"g", 2, {}}};
  for (int trial = 0; trial < 6; ++trial) {
    Bulletin bulletin;
    std::vector<RowInput> epoch0;
    std::vector<uint64_t> values;
    int n0 = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n0; ++i) {
      uint64_t v = rng() % 30;
      epoch0.push_back({"u" + std::to_string(i), {static_cast<uint32_t>(rng() % 4)}, v});
      values.push_back(v);
    }
    TapServer server(schema, bulletin, epoch0);
    std::vector<RowInput> epoch1;
    int n1 = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n1; ++i) {
      uint64_t v = rng() % 30;
      epoch1.push_back({"u" + std::to_string(i), {static_cast<uint32_t>(rng() % 4)}, v});
      values.push_back(v);
    }
    server.insert_epoch(1, epoch1);

    RangeSpec all = RangeSpec::all(schema);
    all.t_min = 0;
    all.t_max = 1;
    for (uint64_t den : {2, 4, 5}) {
      for (uint64_t num = 0; num <= den; ++num) {
        Fraction q{num, den};
        QuantileProof proof = server.query_quantile(all, q);
        auto verified = verify_quantile(schema, all, q, proof, server.digest());
        REQUIRE(verified.ok());
        CHECK(test::quantile_valid(values, q, *verified.value));
      }
    }
  }
}

TEST_CASE("verified statistics match a plaintext oracle to 1e-9 relative") {
  std::mt19937_64 rng(97);
  Schema schema;
  schema.attributes = {TypeAttribute{"g", 2, {}}};
  for (int trial = 0; trial < 5; ++trial) {
    Bulletin bulletin;
    std::vector<RowInput> rows;
    std::vector<uint64_t> values;
    int n = 3 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      uint64_t v = rng() % (1 << 20);
      rows.push_back({"u" + std::to_string(i), {static_cast<uint32_t>(rng() % 4)}, v});
      values.push_back(v);
    }
    TapServer server(schema, bulletin, rows);
    RangeSpec all = RangeSpec::all(schema);
    all.t_min = all.t_max = 0;
    auto verified =
        verify_aggregate(schema, all, server.query_aggregate(all), server.digest());
    REQUIRE(verified.ok());

    double mean = 0;
    for (uint64_t v : values) mean += static_cast<double>(v);
    mean /= n;
    double var = 0;
    for (uint64_t v : values) var += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
    double stddev = std::sqrt(var / (n - 1));

    CHECK(std::abs(verified.value->mean() - mean) <= 1e-9 * std::max(1.0, mean));
    CHECK(std::abs(verified.value->sample_stddev() - stddev) <= 1e-9 * std::max(1.0, stddev));
  }
}

TEST_CASE("quantile distortion requires max(q,1-q)n colluding values") {
  // Honest values 10,12,14,16; an adversary contributes f rows pinned at 31.
  // A median of 31 becomes provable only once f >= n(1-q), i.e. f >= 4 here.
  Schema schema;
  schema.attributes = {TypeAttribute{"g", 2, {}}};
  Fraction half{1, 2};
  for (int f = 1; f <= 4; ++f) {
    Bulletin bulletin;
    std::vector<RowInput> rows;
    uint64_t honest[] = {10, 12, 14, 16};
    for (int i = 0; i < 4; ++i) rows.push_back({"honest" + std::to_string(i), {0}, honest[i]});
    for (int i = 0; i < f; ++i) rows.push_back({"evil" + std::to_string(i), {1}, 31});
    TapServer server(schema, bulletin, rows);
    RangeSpec all = RangeSpec::all(schema);
    all.t_min = all.t_max = 0;
    QuantileProof proof = server.prove_quantile_candidate(all, 31);
    bool accepted = verify_quantile(schema, all, half, proof, server.digest()).ok();
    CHECK(accepted == (f >= 4));
  }
}

TEST_CASE("lookup outside published epochs errors") {
  ExampleFixture fx;
  CHECK_THROWS_AS(fx.server->lookup("Bob", {0}, 9), Error);
}

TEST_CASE("monitoring flags mismatches and absences") {
  ExampleFixture fx;
  std::map<uint32_t, MonitorExpectation> expectations;
  std::map<uint32_t, LookupResponse> responses;
  std::map<uint32_t, Digest256> digests;
  fx.server->insert_epoch(2, {{"Bob", {0}, 30}});  // Alice absent at epoch 2

  for (uint32_t t : {0u, 1u, 2u}) {
    responses.emplace(t, fx.server->lookup("Alice", {0}, t));
    digests[t] = fx.bulletin.get(t);
  }
  expectations[0] = {{0}, 11, fx.server->epoch_secret("Alice", 0)};
  expectations[1] = {{0}, 19, fx.server->epoch_secret("Alice", 1)};
  expectations[2] = {{0}, 21, fx.server->epoch_secret("Alice", 2)};  // expected but missing

  MonitorReport report = monitor(fx.schema, "Alice", expectations, responses, digests);
  REQUIRE(report.findings.size() == 3);
  CHECK(report.findings[0].status == MonitorStatus::ok);
  CHECK(report.findings[1].status == MonitorStatus::ok);
  CHECK(report.findings[2].status == MonitorStatus::missing);
  CHECK_FALSE(report.clean());

  // A silently altered value surfaces as a mismatch.
  auto altered = responses;
  auto* incl = std::get_if<LookupProof>(&altered.at(1));
  REQUIRE(incl != nullptr);
  incl->value = 20;
  MonitorReport report2 = monitor(fx.schema, "Alice", expectations, altered, digests);
  CHECK(report2.findings[1].status == MonitorStatus::mismatch);

  // Clean two-epoch report.
  std::map<uint32_t, MonitorExpectation> clean_expect{{0, expectations[0]},
                                                      {1, expectations[1]}};
  MonitorReport report3 = monitor(fx.schema, "Alice", clean_expect, responses, digests);
  CHECK(report3.clean());
}

TEST_CASE("sum proof size grows with the queried window") {
  std::mt19937_64 rng(131);
  Schema schema;
  schema.attributes = {TypeAttribute{"g", 3, {}}};
  Bulletin bulletin;
  auto rows_for = [&] {
    std::vector<RowInput> rows;
    for (int u = 0; u < 12; ++u) {
      rows.push_back({"u" + std::to_string(u), {static_cast<uint32_t>(u % 6)}, rng() % 100});
    }
    return rows;
  };
  TapServer server(schema, bulletin, rows_for());
  for (uint32_t t = 1; t <= 3; ++t) server.insert_epoch(t, rows_for());

  auto proof_size = [&](uint32_t w) {
    RangeSpec spec = RangeSpec::all(schema);
    spec.t_min = 4 - w;
    spec.t_max = 3;
    AggregateProof proof = server.query_aggregate(spec);
    return wire::encode(wire::make_message(proof), wire::Mode::binary).size();
  };
  size_t w1 = proof_size(1);
  size_t w2 = proof_size(2);
  size_t w4 = proof_size(4);
  CHECK(w1 < w2);
  CHECK(w2 < w4);
}

TEST_CASE("honest proofs accepted over randomized fixtures") {
  std::mt19937_64 rng(71);
  Schema schema;
  schema.attributes = {TypeAttribute{"g", 2, {}}};
  for (int trial = 0; trial < 4; ++trial) {
    Bulletin bulletin;
    std::vector<RowInput> rows;
    int n = 2 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      rows.push_back({"u" + std::to_string(i), {static_cast<uint32_t>(rng() % 4)},
                      rng() % 100});
    }
    TapServer server(schema, bulletin, rows);
    RangeSpec all = RangeSpec::all(schema);
    all.t_min = all.t_max = 0;
    Digest256 digest = server.digest();

    CHECK(verify_aggregate(schema, all, server.query_aggregate(all), digest).ok());
    CHECK(verify_minmax(schema, all, server.query_minmax(all, MinMaxMode::min), MinMaxMode::min,
                        digest)
              .ok());
    CHECK(verify_minmax(schema, all, server.query_minmax(all, MinMaxMode::max), MinMaxMode::max,
                        digest)
              .ok());
    for (const auto& row : rows) {
      auto response = server.lookup(row.user_id, row.types, 0);
      auto* proof = std::get_if<LookupProof>(&response);
      REQUIRE(proof != nullptr);
      CHECK(verify_lookup(schema, row.user_id, row.types, 0, *proof, row.value,
                          server.epoch_secret(row.user_id, 0), digest));
    }
  }
}
