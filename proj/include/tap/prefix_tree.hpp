#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tap/bytes.hpp"
#include "tap/crypto.hpp"
#include "tap/schema.hpp"

namespace tap {

// Hashed encodings shared by builder and verifiers. The last key bit of the
// node is bound into every hash; absent children hash as 32 zero bytes.
Digest256 prefix_leaf_hash(const BitString& key, const Digest256& value);
Digest256 prefix_internal_hash(const BitString& key_fragment, const Digest256& left,
                               const Digest256& right);
inline constexpr Digest256 kAbsentChild{};

struct PrefixInclusionProof {
  BitString key;
  Digest256 leaf_value{};  // phi, the sum-tree root stored at the leaf
  // Non-zero sibling hashes along the root-to-leaf path, keyed by the depth
  // of the sibling (1..key length). Absent siblings are implied zero.
  std::vector<std::pair<uint32_t, Digest256>> siblings;

  bool operator==(const PrefixInclusionProof&) const = default;
};

Digest256 rebuild_prefix_root(const PrefixInclusionProof& proof);

// Range-cover proof (node set N'), serialized depth-first left-to-right.
// Child kinds: absent (no subtree), pruned (subtree exists but does not
// overlap the range; only its hash is revealed), included (child entry
// follows in DFS order).
struct CoverEntry {
  uint8_t is_leaf = 0;
  uint8_t left_kind = 0;   // 0 absent, 1 pruned, 2 included
  uint8_t right_kind = 0;
  Digest256 left_hash{};   // set when pruned
  Digest256 right_hash{};
  Digest256 leaf_value{};  // phi, set when is_leaf

  bool operator==(const CoverEntry&) const = default;
};

struct RangeCoverProof {
  std::vector<CoverEntry> nodes;

  bool operator==(const RangeCoverProof&) const = default;
};

struct CoverLeaf {
  BitString key;
  Digest256 value{};  // phi
};

// Full verification of a range cover: hash consistency up to the digest,
// every included node overlaps the range, every pruned sibling does not.
// Returns the covered leaves (L') in depth-first order, or nullopt.
std::optional<std::vector<CoverLeaf>> check_range_cover(const Schema& schema,
                                                        const RangeSpec& spec,
                                                        const RangeCoverProof& proof,
                                                        const Digest256& digest);
bool verify_range_cover(const Schema& schema, const RangeSpec& spec, const RangeCoverProof& proof,
                        const Digest256& digest);

struct ExtensionLeaf {
  BitString key;
  Digest256 value{};

  bool operator==(const ExtensionLeaf&) const = default;
};

struct FrontierEntry {
  BitString prefix;
  Digest256 hash{};

  bool operator==(const FrontierEntry&) const = default;
};

struct ExtensionProof {
  uint32_t t_old = 0;
  uint32_t t_new = 0;
  std::vector<ExtensionLeaf> new_leaves;   // prefix leaves with time in (t_old, t_new]
  std::vector<FrontierEntry> frontier;     // unchanged subtree roots of the old tree

  bool operator==(const ExtensionProof&) const = default;
};

bool verify_extension(size_t key_length, const ExtensionProof& proof, const Digest256& digest_old,
                      const Digest256& digest_new);

// Sparse Merkle prefix tree over fixed-length bit keys. Keys are inserted in
// chronological order of their leading time bits; leaves are never mutated.
class PrefixTree {
 public:
  explicit PrefixTree(size_t key_length);

  void insert(const BitString& key, const Digest256& value);
  Digest256 digest() const;
  bool contains(const BitString& key) const;
  std::optional<Digest256> value_of(const BitString& key) const;

  PrefixInclusionProof inclusion_proof(const BitString& key) const;
  RangeCoverProof range_cover(const Schema& schema, const RangeSpec& spec) const;

  size_t key_length() const { return key_length_; }
  size_t leaf_count() const { return leaves_.size(); }
  size_t node_count() const { return pool_.size(); }
  std::vector<std::pair<BitString, Digest256>> leaves() const;

 private:
  static constexpr uint32_t kNil = UINT32_MAX;

  struct Node {
    Digest256 hash{};
    uint32_t left = kNil;
    uint32_t right = kNil;
    int32_t leaf = -1;  // index into leaves_ when this node is a leaf
  };

  uint32_t time_of(const BitString& key) const;
  void recompute_hash(uint32_t node_index, const BitString& prefix);
  CoverEntry* build_cover(uint32_t node_index, const BitString& prefix, const Schema& schema,
                          const RangeSpec& spec, RangeCoverProof& out) const;

  size_t key_length_;
  size_t time_bits_;
  std::vector<Node> pool_;  // pool_[0] is the root
  std::vector<std::pair<BitString, Digest256>> leaves_;
  std::optional<uint32_t> max_time_;

  friend ExtensionProof make_extension_proof(const PrefixTree& old_tree,
                                             const PrefixTree& new_tree, uint32_t t_old,
                                             uint32_t t_new);
};

// Builds the append-only extension proof from snapshots of the tree at the
// two epochs. Every leaf of new_tree missing from old_tree must carry a time
// in (t_old, t_new].
ExtensionProof make_extension_proof(const PrefixTree& old_tree, const PrefixTree& new_tree,
                                    uint32_t t_old, uint32_t t_new);

}  // namespace tap
