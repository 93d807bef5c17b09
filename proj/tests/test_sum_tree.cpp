#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "tap/errors.hpp"
#include "tap/schema.hpp"
#include "tap/sum_tree.hpp"

using namespace tap;

namespace {

std::vector<SumEntry> epoch0_residential() {
  // Alice 11, Bob 24, Carol 13 at epoch 0.
  return {
      {11, Scalar::from_u64(101), "Alice", 0},
      {24, Scalar::from_u64(102), "Bob", 0},
      {13, Scalar::from_u64(103), "Carol", 0},
  };
}

std::vector<SumEntry> epoch1_residential() {
  return {
      {19, Scalar::from_u64(201), "Alice", 1},
      {26, Scalar::from_u64(202), "Bob", 1},
      {27, Scalar::from_u64(203), "Carol", 1},
      {26, Scalar::from_u64(204), "Dave", 1},
  };
}

}  // namespace

TEST_CASE("epoch-0 bucket sorts ascending with count 3") {
  SumTree tree = SumTree::build(epoch0_residential(), 2);
  REQUIRE(tree.size() == 3);
  CHECK(tree.value_at(0) == 11);
  CHECK(tree.value_at(1) == 13);
  CHECK(tree.value_at(2) == 24);
  CHECK(tree.root_count() == 3);

  // Root commitments are the homomorphic sums C(sum v^j, sum r).
  Scalar total_seed = Scalar::from_u64(101 + 102 + 103);
  CHECK(tree.total_seed() == total_seed);
  CHECK(tree.root_commitments()[0] == commit_u64(11 + 13 + 24, total_seed));
  CHECK(tree.root_commitments()[1] == commit_u64(11 * 11 + 13 * 13 + 24 * 24, total_seed));
}

TEST_CASE("single-value bucket has an internal root over the leaf") {
  SumTree tree = SumTree::build({{36, Scalar::from_u64(205), "Erin", 1}}, 2);
  REQUIRE(tree.size() == 1);
  CHECK(tree.root_count() == 1);
  CHECK(tree.root_commitments()[0] == commit_u64(36, Scalar::from_u64(205)));

  // Direct reconstruction: internal(leaf, empty).
  SumLeafData leaf = tree.leaf_data(0);
  Digest256 expected = sum_internal_hash(sum_leaf_hash(leaf), sum_empty_hash(),
                                         tree.root_commitments(), 1);
  CHECK(tree.root_hash() == expected);
  auto [left, right] = tree.root_child_hashes();
  CHECK(left == sum_leaf_hash(leaf));
  CHECK(right == sum_empty_hash());
}

TEST_CASE("epoch-1 residential root sums") {
  SumTree tree = SumTree::build(epoch1_residential(), 2);
  Scalar total_seed = Scalar::from_u64(201 + 202 + 203 + 204);
  CHECK(tree.root_commitments()[0] == commit_u64(19 + 26 + 26 + 27, total_seed));
}

TEST_CASE("three-leaf root hash matches direct reconstruction") {
  SumTree tree = SumTree::build(epoch0_residential(), 2);
  // Shape for n=3: root(internal(L0,L1), L2).
  SumLeafData l0 = tree.leaf_data(0), l1 = tree.leaf_data(1), l2 = tree.leaf_data(2);
  std::vector<Commitment> c01(2), c012(2);
  for (int j = 0; j < 2; ++j) c01[j] = add_commitments(l0.commitments[j], l1.commitments[j]);
  for (int j = 0; j < 2; ++j) c012[j] = add_commitments(c01[j], l2.commitments[j]);
  Digest256 n01 = sum_internal_hash(sum_leaf_hash(l0), sum_leaf_hash(l1), c01, 2);
  Digest256 root = sum_internal_hash(n01, sum_leaf_hash(l2), c012, 3);
  CHECK(tree.root_hash() == root);
  CHECK(rebuild_sum_root(tree.all_leaf_data(), 2) == root);
}

TEST_CASE("build validation") {
  CHECK_THROWS_AS(SumTree::build({}, 2), Error);
  CHECK_THROWS_AS(SumTree::build({{kValueDomain, Scalar::zero(), "X", 0}}, 2), Error);
}

TEST_CASE("inclusion proofs fold to the root with position info") {
  SumTree tree = SumTree::build(epoch0_residential(), 2);
  for (size_t i = 0; i < tree.size(); ++i) {
    SumInclusionProof proof = tree.inclusion_proof(i);
    auto folded = fold_sum_path(proof.leaf, proof.copath, 2);
    REQUIRE(folded.has_value());
    CHECK(folded->root_hash == tree.root_hash());
    CHECK(folded->root_count == 3);
    CHECK(folded->leaves_left == i);
    CHECK(folded->leaves_right == 2 - i);
  }
  CHECK_THROWS_AS(tree.inclusion_proof(3), Error);
}

TEST_CASE("single-leaf inclusion proof carries the empty sibling") {
  SumTree tree = SumTree::build({{36, Scalar::from_u64(205), "Erin", 1}}, 2);
  SumInclusionProof proof = tree.inclusion_proof(0);
  REQUIRE(proof.copath.size() == 1);
  CHECK(proof.copath[0].count == 0);
  CHECK(proof.copath[0].hash == sum_empty_hash());
  auto folded = fold_sum_path(proof.leaf, proof.copath, 2);
  REQUIRE(folded.has_value());
  CHECK(folded->root_hash == tree.root_hash());
}

TEST_CASE("tampered co-path count breaks the fold") {
  SumTree tree = SumTree::build(epoch1_residential(), 2);
  SumInclusionProof proof = tree.inclusion_proof(1);
  proof.copath[0].count += 1;
  auto folded = fold_sum_path(proof.leaf, proof.copath, 2);
  // The count is hashed into every internal node.
  CHECK((!folded || folded->root_hash != tree.root_hash()));
}

TEST_CASE("leftmost_geq and rightmost_leq scans") {
  SumTree tree = SumTree::build(epoch0_residential(), 2);  // sorted 11, 13, 24
  CHECK(tree.leftmost_geq(12) == size_t{1});
  CHECK(tree.leftmost_geq(0) == size_t{0});
  CHECK(tree.leftmost_geq(25) == std::nullopt);
  CHECK(tree.rightmost_leq(12) == size_t{0});
  CHECK(tree.rightmost_leq(100) == size_t{2});
  CHECK(tree.rightmost_leq(10) == std::nullopt);
}

TEST_CASE("sorting by any committed power gives the same order") {
  std::mt19937_64 rng(41);
  std::vector<SumEntry> entries;
  for (int i = 0; i < 12; ++i) {
    entries.push_back(
        {rng() % 500, Scalar::random(), "user" + std::to_string(i), 0});
  }
  SumTree tree = SumTree::build(entries, 3);
  for (uint32_t power = 2; power <= 3; ++power) {
    for (size_t i = 0; i + 1 < tree.size(); ++i) {
      uint128 a = 1, b = 1;
      for (uint32_t j = 0; j < power; ++j) {
        a *= tree.value_at(i);
        b *= tree.value_at(i + 1);
      }
      CHECK(a <= b);
    }
  }
}

TEST_CASE("root homomorphism and counts on random sets") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    size_t n = 1 + rng() % 9;
    std::vector<SumEntry> entries;
    Scalar total_seed = Scalar::zero();
    uint128 sums[3] = {0, 0, 0};
    for (size_t i = 0; i < n; ++i) {
      uint64_t v = rng() % 1000;
      Scalar seed = Scalar::random();
      entries.push_back({v, seed, "u" + std::to_string(i), 2});
      total_seed = total_seed.add(seed);
      uint128 p = 1;
      for (int j = 0; j < 3; ++j) {
        p *= v;
        sums[j] += p;
      }
    }
    SumTree tree = SumTree::build(entries, 3);
    CHECK(tree.root_count() == n);
    for (int j = 0; j < 3; ++j) {
      Scalar claimed = Scalar::from_u64(static_cast<uint64_t>(sums[j]));
      CHECK(tree.root_commitments()[j] == commit(claimed, total_seed));
    }

    // Count correctness, brute force via every inclusion proof.
    for (size_t i = 0; i < n; ++i) {
      auto folded = fold_sum_path(tree.inclusion_proof(i).leaf, tree.inclusion_proof(i).copath, 3);
      REQUIRE(folded.has_value());
      CHECK(folded->root_count == n);
      CHECK(folded->leaves_left == i);
    }
  }
}

TEST_CASE("build is deterministic over the input multiset") {
  std::mt19937_64 rng(47);
  std::vector<SumEntry> entries;
  for (int i = 0; i < 9; ++i) {
    entries.push_back({rng() % 50, Scalar::random(), "u" + std::to_string(i), 5});
  }
  SumTree reference = SumTree::build(entries, 2);
  for (int round = 0; round < 5; ++round) {
    std::shuffle(entries.begin(), entries.end(), rng);
    SumTree tree = SumTree::build(entries, 2);
    CHECK(tree.root_hash() == reference.root_hash());
  }
}

TEST_CASE("ties broken by id hash") {
  std::vector<SumEntry> entries = {
      {26, Scalar::from_u64(1), "Bob", 1},
      {26, Scalar::from_u64(2), "Dave", 1},
  };
  SumTree a = SumTree::build(entries, 2);
  std::swap(entries[0], entries[1]);
  SumTree b = SumTree::build(entries, 2);
  CHECK(a.root_hash() == b.root_hash());
  CHECK((id_hash("Bob", 1) < id_hash("Dave", 1)
             ? a.leaf_data(0).id_hash == id_hash("Bob", 1)
             : a.leaf_data(0).id_hash == id_hash("Dave", 1)));
}
