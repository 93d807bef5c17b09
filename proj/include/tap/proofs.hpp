#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "tap/bytes.hpp"
#include "tap/crypto.hpp"
#include "tap/prefix_tree.hpp"
#include "tap/sum_tree.hpp"

namespace tap {

// Five-way latency split used by the benchmark harness.
struct BenchTimes {
  double prefix_gen_ms = 0;
  double prefix_verify_ms = 0;
  double sum_gen_ms = 0;
  double sum_verify_ms = 0;
  double other_ms = 0;
};

// Look-up inclusion: pi_1 over the prefix tree, pi_2 over the bucket's sum
// tree. The client rebuilds the sum-tree leaf from its own (value, seed), so
// only the co-path travels.
struct LookupProof {
  uint64_t value = 0;
  PrefixInclusionProof prefix_proof;
  std::vector<SumCoPathEntry> sum_copath;

  bool operator==(const LookupProof&) const = default;
};

// Non-existence. Either the bucket leaf exists and all sum-tree leaves are
// opened as (commitments, id-hash) pairs, or the bucket itself is absent and
// a singleton range cover shows no overlapping leaf.
struct NonExistenceProof {
  uint8_t bucket_exists = 0;
  PrefixInclusionProof prefix_proof;  // when bucket_exists
  std::vector<SumLeafData> leaves;    // N*
  RangeCoverProof cover;              // when !bucket_exists

  bool operator==(const NonExistenceProof&) const = default;
};

using LookupResponse = std::variant<LookupProof, NonExistenceProof>;

// Per covered prefix leaf: the sum-tree root preimage.
struct AggregateLeafInfo {
  Digest256 left_hash{};
  Digest256 right_hash{};
  std::vector<Commitment> commitments;
  uint64_t count = 0;

  bool operator==(const AggregateLeafInfo&) const = default;
};

struct AggregateProof {
  RangeCoverProof cover;
  Scalar total_seed;
  std::vector<uint128> sums;  // v*_1 .. v*_z
  std::vector<AggregateLeafInfo> leaves;  // aligned with L' in DFS order

  bool operator==(const AggregateProof&) const = default;
};

enum class MinMaxMode : uint8_t { min = 0, max = 1 };

struct MinMaxLeafProof {
  SumLeafData leaf;
  std::vector<SumCoPathEntry> copath;
  RangeProof range_proof;

  bool operator==(const MinMaxLeafProof&) const = default;
};

struct MinMaxProof {
  MinMaxMode mode = MinMaxMode::min;
  uint64_t extreme = 0;       // v*
  uint32_t witness_index = 0; // i*: position in per_tree with the equality proof
  RangeCoverProof cover;
  std::vector<MinMaxLeafProof> per_tree;  // aligned with L'

  bool operator==(const MinMaxProof&) const = default;
};

struct QuantileSideProof {
  SumLeafData leaf;
  std::vector<SumCoPathEntry> copath;
  RangeProof range_proof;

  bool operator==(const QuantileSideProof&) const = default;
};

struct QuantileTreeProof {
  std::optional<QuantileSideProof> geq;  // leftmost leaf with value >= v*
  std::optional<QuantileSideProof> leq;  // rightmost leaf with value <= v*

  bool operator==(const QuantileTreeProof&) const = default;
};

struct QuantileProof {
  uint64_t value = 0;  // v*
  RangeCoverProof cover;
  std::vector<QuantileTreeProof> per_tree;  // aligned with L'

  bool operator==(const QuantileProof&) const = default;
};

// Audit of one bucket: the opened leaves rebuild phi, consecutive-pair
// sortedness proofs run on commitment differences, and optional per-leaf
// gamma-bound proofs.
struct BucketAudit {
  BitString prefix_key;
  std::vector<SumLeafData> leaves;
  std::vector<RangeProof> sortedness;     // size n-1
  std::vector<RangeProof> gamma_bounds;   // size n when gamma is configured

  bool operator==(const BucketAudit&) const = default;
};

struct AuditProof {
  uint32_t t_old = 0;
  uint32_t t_new = 0;
  ExtensionProof extension;
  // Enumerates the epoch-0 buckets when auditing from genesis (t_old == 0);
  // later buckets are enumerated by the extension proof itself.
  std::optional<RangeCoverProof> genesis_cover;
  std::vector<BucketAudit> buckets;
  double sample_fraction = 1.0;
  uint64_t sample_seed = 0;

  bool operator==(const AuditProof&) const = default;
};

// Deterministic bucket sampling for randomized audits.
bool audit_sample_includes(uint64_t seed, double fraction, const BitString& bucket_key);

}  // namespace tap
