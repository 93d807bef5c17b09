#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tap/bulletin.hpp"
#include "tap/prefix_tree.hpp"
#include "tap/proofs.hpp"
#include "tap/row_store.hpp"
#include "tap/schema.hpp"

namespace tap {

// The TAP server. Construction is Initialize: it loads the (possibly empty)
// epoch-0 table, builds the tree and publishes delta_0. insert_epoch then
// advances one epoch at a time. All query methods are read-only.
class TapServer {
 public:
  TapServer(Schema schema, Bulletin& bulletin, std::vector<RowInput> initial_rows = {},
            const std::string& rows_path = "",
            std::optional<std::array<uint8_t, 32>> secret_key = std::nullopt);

  const Schema& schema() const { return schema_; }
  uint32_t current_epoch() const { return current_epoch_; }
  Digest256 digest() const { return tree_.digest(); }

  Scalar epoch_secret(const std::string& user_id, uint32_t t) const;

  Digest256 insert_epoch(uint32_t t, const std::vector<RowInput>& rows);

  LookupResponse lookup(const std::string& user_id, const std::vector<uint32_t>& types,
                        uint32_t t, BenchTimes* times = nullptr) const;
  AggregateProof query_aggregate(const RangeSpec& spec, BenchTimes* times = nullptr) const;
  MinMaxProof query_minmax(const RangeSpec& spec, MinMaxMode mode,
                           BenchTimes* times = nullptr) const;
  QuantileProof query_quantile(const RangeSpec& spec, const Fraction& q,
                               BenchTimes* times = nullptr) const;
  // Builds the proof for a caller-chosen candidate v*; verification decides
  // whether the candidate is a valid quantile.
  QuantileProof prove_quantile_candidate(const RangeSpec& spec, uint64_t candidate,
                                         BenchTimes* times = nullptr) const;

  AuditProof audit_proof(uint32_t t_old, uint32_t t_new, double sample_fraction = 1.0,
                         uint64_t sample_seed = 0) const;

  // Rebuilds the prefix tree as of epoch t from the row store (sum trees are
  // not kept in memory, so this also recommits every bucket).
  PrefixTree tree_at(uint32_t t) const;
  std::vector<Row> bucket_rows(const BucketKey& key) const { return store_.bucket(key); }

 private:
  SumTree bucket_tree(const BucketKey& key) const;
  Row make_row(uint32_t t, const RowInput& input) const;
  void insert_bucket_leaves(PrefixTree& tree, uint32_t t) const;
  std::vector<std::pair<BucketKey, SumTree>> covered_trees(
      const std::vector<CoverLeaf>& leaves) const;

  Schema schema_;
  std::array<uint8_t, 32> secret_key_{};
  RowStore store_;
  PrefixTree tree_;
  Bulletin& bulletin_;
  uint32_t current_epoch_ = 0;
};

}  // namespace tap
