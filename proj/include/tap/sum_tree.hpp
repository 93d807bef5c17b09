#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tap/bytes.hpp"
#include "tap/crypto.hpp"

namespace tap {

// Revealed per-leaf data: power commitments C(v^1,r)..C(v^z,r) and the
// identity hash H(user-id || time). Never includes the value itself.
struct SumLeafData {
  std::vector<Commitment> commitments;
  Digest256 id_hash{};

  bool operator==(const SumLeafData&) const = default;
};

struct SumCoPathEntry {
  Digest256 hash{};
  std::vector<Commitment> commitments;
  uint64_t count = 0;
  uint8_t sibling_on_left = 0;

  bool operator==(const SumCoPathEntry&) const = default;
};

struct SumInclusionProof {
  SumLeafData leaf;
  std::vector<SumCoPathEntry> copath;  // leaf-to-root order

  bool operator==(const SumInclusionProof&) const = default;
};

Digest256 sum_leaf_hash(const SumLeafData& leaf);
Digest256 sum_internal_hash(const Digest256& left, const Digest256& right,
                            const std::vector<Commitment>& commitments, uint64_t count);
// Empty-node constants: c = C(0,0), l = 0, h = H(0x00).
Digest256 sum_empty_hash();
SumCoPathEntry sum_empty_entry(uint32_t z);

struct SumPathResult {
  Digest256 root_hash{};
  std::vector<Commitment> root_commitments;
  uint64_t root_count = 0;
  uint64_t leaves_left = 0;   // leaves strictly left of the proven leaf
  uint64_t leaves_right = 0;  // leaves strictly right of the proven leaf
};

// Folds a leaf and its co-path to the root; nullopt on malformed input.
std::optional<SumPathResult> fold_sum_path(const SumLeafData& leaf,
                                           const std::vector<SumCoPathEntry>& copath, uint32_t z);

// Rebuilds the root hash of the canonical tree over the given leaves (the
// non-existence proof check).
Digest256 rebuild_sum_root(const std::vector<SumLeafData>& leaves, uint32_t z);

struct SumEntry {
  uint64_t value = 0;
  Scalar seed;
  std::string user_id;
  uint32_t time = 0;
};

// Value-sorted Merkle sum tree over one (time, type-combination) bucket.
// Immutable once built; building the same multiset always reproduces the
// same root (ties broken by id hash).
class SumTree {
 public:
  static SumTree build(std::vector<SumEntry> entries, uint32_t z);

  size_t size() const { return entries_.size(); }
  uint32_t z() const { return z_; }
  const Digest256& root_hash() const;
  const std::vector<Commitment>& root_commitments() const;
  uint64_t root_count() const;
  Scalar total_seed() const;
  // Concatenated child hashes of the root, h_left || h_right.
  std::pair<Digest256, Digest256> root_child_hashes() const;

  SumInclusionProof inclusion_proof(size_t index) const;
  std::optional<size_t> leftmost_geq(uint64_t v) const;
  std::optional<size_t> rightmost_leq(uint64_t v) const;
  std::optional<size_t> find_user(const Digest256& id_hash) const;

  uint64_t value_at(size_t index) const;
  const Scalar& seed_at(size_t index) const;
  SumLeafData leaf_data(size_t index) const;
  std::vector<SumLeafData> all_leaf_data() const;

 private:
  struct Node {
    Digest256 hash{};
    std::vector<Commitment> commitments;
    uint64_t count = 0;
  };

  SumTree() = default;

  uint32_t z_ = 0;
  std::vector<SumEntry> entries_;        // sorted by (value, id_hash)
  std::vector<Digest256> id_hashes_;     // aligned with entries_
  std::vector<std::vector<Node>> levels_;  // levels_[0] = leaves, back() = root
};

}  // namespace tap
