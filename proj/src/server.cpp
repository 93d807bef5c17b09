#include "tap/server.hpp"

#include <sodium.h>

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include "tap/errors.hpp"

namespace tap {

namespace {

class StopWatch {
 public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double, std::milli>(d).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

TapServer::TapServer(Schema schema, Bulletin& bulletin, std::vector<RowInput> initial_rows,
                     const std::string& rows_path,
                     std::optional<std::array<uint8_t, 32>> secret_key)
    : schema_(std::move(schema)),
      store_(schema_.attributes.size(), rows_path.empty() ? "" : rows_path),
      tree_(schema_.key_length()),
      bulletin_(bulletin) {
  schema_.validate();
  if (secret_key) {
    secret_key_ = *secret_key;
  } else {
    if (sodium_init() < 0) throw Error(ErrorCode::io_error, "sodium_init failed");
    randombytes_buf(secret_key_.data(), secret_key_.size());
  }

  if (!store_.rows().empty()) {
    // Reloaded from disk: rebuild the tree and check it against the bulletin.
    uint32_t max_t = 0;
    for (const auto& row : store_.rows()) max_t = std::max(max_t, row.time);
    current_epoch_ = max_t;
    auto latest = bulletin_.latest_epoch();
    if (!latest || *latest < max_t) {
      throw Error(ErrorCode::unknown_epoch, "row store is ahead of the bulletin");
    }
    current_epoch_ = static_cast<uint32_t>(*latest);
    for (uint32_t t = 0; t <= current_epoch_; ++t) insert_bucket_leaves(tree_, t);
    if (tree_.digest() != bulletin_.get(current_epoch_)) {
      throw Error(ErrorCode::io_error, "rebuilt digest does not match bulletin");
    }
    if (!initial_rows.empty()) {
      throw Error(ErrorCode::epoch_out_of_order, "initial rows given but store is non-empty");
    }
    return;
  }

  // Initialize: epoch 0 holds the initial table (possibly empty).
  for (const auto& input : initial_rows) store_.append(make_row(0, input));
  insert_bucket_leaves(tree_, 0);
  current_epoch_ = 0;
  bulletin_.publish(0, tree_.digest());
}

Scalar TapServer::epoch_secret(const std::string& user_id, uint32_t t) const {
  Bytes msg;
  msg.reserve(user_id.size() + 9);
  msg.push_back(0x72);  // 'r'
  put_u32_be(msg, static_cast<uint32_t>(user_id.size()));
  msg.insert(msg.end(), user_id.begin(), user_id.end());
  put_u32_be(msg, t);
  return prf_scalar(secret_key_, msg);
}

Row TapServer::make_row(uint32_t t, const RowInput& input) const {
  if (input.types.size() != schema_.attributes.size()) {
    throw Error(ErrorCode::schema_mismatch, "wrong type-code count for " + input.user_id);
  }
  for (size_t i = 0; i < input.types.size(); ++i) {
    uint32_t width = schema_.attributes[i].width;
    if (width < 32 && (uint64_t(input.types[i]) >> width) != 0) {
      throw Error(ErrorCode::schema_mismatch, "type code does not fit width");
    }
  }
  if (input.value >= kValueDomain) {
    throw Error(ErrorCode::value_out_of_range, "value for " + input.user_id);
  }
  if (schema_.gamma && input.value > *schema_.gamma) {
    throw Error(ErrorCode::gamma_exceeded, "value for " + input.user_id + " exceeds gamma");
  }
  Row row;
  row.time = t;
  row.user_id = input.user_id;
  row.types = input.types;
  row.value = input.value;
  row.seed = epoch_secret(input.user_id, t);
  return row;
}

SumTree TapServer::bucket_tree(const BucketKey& key) const {
  std::vector<SumEntry> entries;
  for (const auto& row : store_.bucket(key)) {
    entries.push_back(SumEntry{row.value, row.seed, row.user_id, row.time});
  }
  return SumTree::build(std::move(entries), schema_.z);
}

void TapServer::insert_bucket_leaves(PrefixTree& tree, uint32_t t) const {
  auto buckets = store_.buckets_in_time_range(t, t);
  std::sort(buckets.begin(), buckets.end());
  for (const auto& bucket : buckets) {
    tree.insert(bucket.to_prefix_key(schema_), bucket_tree(bucket).root_hash());
  }
}

Digest256 TapServer::insert_epoch(uint32_t t, const std::vector<RowInput>& rows) {
  if (t != current_epoch_ + 1) {
    throw Error(ErrorCode::epoch_out_of_order,
                "expected epoch " + std::to_string(current_epoch_ + 1));
  }
  std::set<std::string> seen;
  for (const auto& input : rows) {
    if (!seen.insert(input.user_id).second) {
      throw Error(ErrorCode::duplicate_user_in_epoch, input.user_id);
    }
  }
  std::vector<Row> staged;
  staged.reserve(rows.size());
  for (const auto& input : rows) staged.push_back(make_row(t, input));
  for (const auto& row : staged) store_.append(row);
  insert_bucket_leaves(tree_, t);
  current_epoch_ = t;
  Digest256 d = tree_.digest();
  bulletin_.publish(t, d);
  return d;
}

PrefixTree TapServer::tree_at(uint32_t t) const {
  if (t > current_epoch_) throw Error(ErrorCode::unknown_epoch, std::to_string(t));
  PrefixTree tree(schema_.key_length());
  for (uint32_t epoch = 0; epoch <= t; ++epoch) insert_bucket_leaves(tree, epoch);
  return tree;
}

LookupResponse TapServer::lookup(const std::string& user_id, const std::vector<uint32_t>& types,
                                 uint32_t t, BenchTimes* times) const {
  if (t > current_epoch_) throw Error(ErrorCode::unknown_epoch, std::to_string(t));
  BucketKey bucket{t, types};
  BitString key = bucket.to_prefix_key(schema_);

  // Proofs verify against delta_t, so historical look-ups run on the epoch-t
  // snapshot.
  std::optional<PrefixTree> snapshot;
  if (t != current_epoch_) snapshot = tree_at(t);
  const PrefixTree& tree = snapshot ? *snapshot : tree_;

  if (!tree.contains(key)) {
    // Unknown prefix: the cover over the singleton range shows no leaf.
    NonExistenceProof proof;
    proof.bucket_exists = 0;
    StopWatch sw;
    proof.cover = tree.range_cover(schema_, RangeSpec::single_bucket(schema_, t, types));
    if (times) times->prefix_gen_ms += sw.ms();
    return proof;
  }

  StopWatch sw_sum;
  SumTree sum_tree = bucket_tree(bucket);
  double build_ms = sw_sum.ms();

  StopWatch sw_prefix;
  PrefixInclusionProof prefix_proof = tree.inclusion_proof(key);
  if (times) times->prefix_gen_ms += sw_prefix.ms();

  auto index = sum_tree.find_user(id_hash(user_id, t));
  if (!index) {
    NonExistenceProof proof;
    proof.bucket_exists = 1;
    proof.prefix_proof = std::move(prefix_proof);
    StopWatch sw;
    proof.leaves = sum_tree.all_leaf_data();
    if (times) times->sum_gen_ms += build_ms + sw.ms();
    return proof;
  }

  LookupProof proof;
  const Row* row = store_.find(user_id, t);
  proof.value = row->value;
  proof.prefix_proof = std::move(prefix_proof);
  StopWatch sw;
  proof.sum_copath = sum_tree.inclusion_proof(*index).copath;
  if (times) times->sum_gen_ms += build_ms + sw.ms();
  return proof;
}

std::vector<std::pair<BucketKey, SumTree>> TapServer::covered_trees(
    const std::vector<CoverLeaf>& leaves) const {
  std::vector<std::pair<BucketKey, SumTree>> out;
  out.reserve(leaves.size());
  for (const auto& leaf : leaves) {
    BucketKey bucket{schema_.time_of_key(leaf.key), schema_.types_of_key(leaf.key)};
    out.emplace_back(bucket, bucket_tree(bucket));
  }
  return out;
}

AggregateProof TapServer::query_aggregate(const RangeSpec& spec, BenchTimes* times) const {
  spec.validate(schema_);
  if (schema_.min_bucket_size > 0) {
    for (const auto& bucket : store_.buckets_in_time_range(spec.t_min, spec.t_max)) {
      if (spec.contains(schema_, bucket) &&
          store_.bucket(bucket).size() < schema_.min_bucket_size) {
        throw Error(ErrorCode::policy_refused, "bucket below minimum size policy");
      }
    }
  }
  AggregateProof proof;
  StopWatch sw_prefix;
  proof.cover = tree_.range_cover(schema_, spec);
  if (times) times->prefix_gen_ms += sw_prefix.ms();

  auto leaves = check_range_cover(schema_, spec, proof.cover, tree_.digest());
  StopWatch sw_sum;
  proof.sums.assign(schema_.z, 0);
  Scalar total = Scalar::zero();
  for (const auto& leaf : *leaves) {
    BucketKey bucket{schema_.time_of_key(leaf.key), schema_.types_of_key(leaf.key)};
    SumTree sum_tree = bucket_tree(bucket);
    auto [left, right] = sum_tree.root_child_hashes();
    proof.leaves.push_back(AggregateLeafInfo{left, right, sum_tree.root_commitments(),
                                             sum_tree.root_count()});
    total = total.add(sum_tree.total_seed());
    for (const auto& row : store_.bucket(bucket)) {
      uint128 power = 1;
      for (uint32_t j = 0; j < schema_.z; ++j) {
        power *= row.value;
        proof.sums[j] += power;
      }
    }
  }
  proof.total_seed = total;
  if (times) times->sum_gen_ms += sw_sum.ms();
  return proof;
}

MinMaxProof TapServer::query_minmax(const RangeSpec& spec, MinMaxMode mode,
                                    BenchTimes* times) const {
  spec.validate(schema_);
  MinMaxProof proof;
  proof.mode = mode;
  StopWatch sw_prefix;
  proof.cover = tree_.range_cover(schema_, spec);
  if (times) times->prefix_gen_ms += sw_prefix.ms();

  auto leaves = check_range_cover(schema_, spec, proof.cover, tree_.digest());
  if (leaves->empty()) throw Error(ErrorCode::empty_range, "no buckets in range");

  StopWatch sw_sum;
  auto trees = covered_trees(*leaves);
  uint64_t extreme = 0;
  bool first = true;
  for (const auto& [bucket, sum_tree] : trees) {
    size_t pos = mode == MinMaxMode::min ? 0 : sum_tree.size() - 1;
    uint64_t v = sum_tree.value_at(pos);
    if (first || (mode == MinMaxMode::min ? v < extreme : v > extreme)) extreme = v;
    first = false;
  }
  proof.extreme = extreme;

  bool witness_done = false;
  for (size_t i = 0; i < trees.size(); ++i) {
    const SumTree& sum_tree = trees[i].second;
    size_t pos = mode == MinMaxMode::min ? 0 : sum_tree.size() - 1;
    uint64_t v = sum_tree.value_at(pos);
    MinMaxLeafProof leaf_proof;
    leaf_proof.leaf = sum_tree.leaf_data(pos);
    leaf_proof.copath = sum_tree.inclusion_proof(pos).copath;
    const Scalar& seed = sum_tree.seed_at(pos);
    if (!witness_done && v == extreme) {
      proof.witness_index = static_cast<uint32_t>(i);
      leaf_proof.range_proof = prove_range(v, seed, extreme, extreme + 1);
      witness_done = true;
    } else if (mode == MinMaxMode::min) {
      leaf_proof.range_proof = prove_range(v, seed, extreme, extreme + kValueDomain);
    } else {
      leaf_proof.range_proof = prove_range(v, seed, 0, extreme + 1);
    }
    proof.per_tree.push_back(std::move(leaf_proof));
  }
  if (times) times->sum_gen_ms += sw_sum.ms();
  return proof;
}

QuantileProof TapServer::prove_quantile_candidate(const RangeSpec& spec, uint64_t candidate,
                                                  BenchTimes* times) const {
  spec.validate(schema_);
  QuantileProof proof;
  proof.value = candidate;
  StopWatch sw_prefix;
  proof.cover = tree_.range_cover(schema_, spec);
  if (times) times->prefix_gen_ms += sw_prefix.ms();

  auto leaves = check_range_cover(schema_, spec, proof.cover, tree_.digest());
  if (leaves->empty()) throw Error(ErrorCode::empty_range, "no buckets in range");

  StopWatch sw_sum;
  auto trees = covered_trees(*leaves);
  for (const auto& [bucket, sum_tree] : trees) {
    QuantileTreeProof tree_proof;
    if (auto idx = sum_tree.leftmost_geq(candidate)) {
      QuantileSideProof side;
      side.leaf = sum_tree.leaf_data(*idx);
      side.copath = sum_tree.inclusion_proof(*idx).copath;
      side.range_proof = prove_range(sum_tree.value_at(*idx), sum_tree.seed_at(*idx), candidate,
                                     candidate + kValueDomain);
      tree_proof.geq = std::move(side);
    }
    if (auto idx = sum_tree.rightmost_leq(candidate)) {
      QuantileSideProof side;
      side.leaf = sum_tree.leaf_data(*idx);
      side.copath = sum_tree.inclusion_proof(*idx).copath;
      side.range_proof =
          prove_range(sum_tree.value_at(*idx), sum_tree.seed_at(*idx), 0, candidate + 1);
      tree_proof.leq = std::move(side);
    }
    proof.per_tree.push_back(std::move(tree_proof));
  }
  if (times) times->sum_gen_ms += sw_sum.ms();
  return proof;
}

QuantileProof TapServer::query_quantile(const RangeSpec& spec, const Fraction& q,
                                        BenchTimes* times) const {
  if (q.num > q.den) throw Error(ErrorCode::invalid_quantile, "q must be in [0,1]");
  spec.validate(schema_);

  std::vector<uint64_t> values;
  for (const auto& bucket : store_.buckets_in_time_range(spec.t_min, spec.t_max)) {
    if (!spec.contains(schema_, bucket)) continue;
    for (const auto& row : store_.bucket(bucket)) values.push_back(row.value);
  }
  if (values.empty()) throw Error(ErrorCode::empty_range, "no values in range");
  std::sort(values.begin(), values.end());

  // Server choice rule: the largest stored value that is a valid q-quantile.
  uint128 n = values.size();
  std::optional<uint64_t> chosen;
  for (size_t i = 0; i < values.size(); ++i) {
    uint64_t x = values[i];
    uint128 leq = std::upper_bound(values.begin(), values.end(), x) - values.begin();
    uint128 geq = values.end() -
                  std::lower_bound(values.begin(), values.end(), x);
    if (leq * q.den >= n * q.num && geq * q.den >= n * (q.den - q.num)) chosen = x;
  }
  if (!chosen) throw Error(ErrorCode::invalid_quantile, "no stored value satisfies q");
  return prove_quantile_candidate(spec, *chosen, times);
}

AuditProof TapServer::audit_proof(uint32_t t_old, uint32_t t_new, double sample_fraction,
                                  uint64_t sample_seed) const {
  if (t_new > current_epoch_ || t_old > t_new) {
    throw Error(ErrorCode::unknown_epoch, "audit range outside published epochs");
  }
  if (sample_fraction <= 0.0 || sample_fraction > 1.0) {
    throw Error(ErrorCode::malformed, "sample fraction must be in (0,1]");
  }
  AuditProof proof;
  proof.t_old = t_old;
  proof.t_new = t_new;
  proof.sample_fraction = sample_fraction;
  proof.sample_seed = sample_seed;

  PrefixTree old_tree = tree_at(t_old);
  PrefixTree new_tree = tree_at(t_new);
  proof.extension = make_extension_proof(old_tree, new_tree, t_old, t_new);

  uint32_t audit_from = t_old == 0 ? 0 : t_old + 1;
  if (t_old == 0) {
    RangeSpec genesis = RangeSpec::all(schema_);
    genesis.t_min = 0;
    genesis.t_max = 0;
    proof.genesis_cover = new_tree.range_cover(schema_, genesis);
  }

  auto buckets = store_.buckets_in_time_range(audit_from, t_new);
  std::sort(buckets.begin(), buckets.end());
  for (const auto& bucket : buckets) {
    BitString key = bucket.to_prefix_key(schema_);
    if (sample_fraction < 1.0 && !audit_sample_includes(sample_seed, sample_fraction, key)) {
      continue;
    }
    SumTree sum_tree = bucket_tree(bucket);
    BucketAudit audit;
    audit.prefix_key = key;
    audit.leaves = sum_tree.all_leaf_data();
    for (size_t i = 0; i + 1 < sum_tree.size(); ++i) {
      uint64_t diff = sum_tree.value_at(i + 1) - sum_tree.value_at(i);
      Scalar seed_diff = sum_tree.seed_at(i + 1).sub(sum_tree.seed_at(i));
      audit.sortedness.push_back(prove_range(diff, seed_diff, 0, kValueDomain));
    }
    if (schema_.gamma) {
      for (size_t i = 0; i < sum_tree.size(); ++i) {
        audit.gamma_bounds.push_back(
            prove_range(sum_tree.value_at(i), sum_tree.seed_at(i), 0, *schema_.gamma + 1));
      }
    }
    proof.buckets.push_back(std::move(audit));
  }
  return proof;
}

bool audit_sample_includes(uint64_t seed, double fraction, const BitString& bucket_key) {
  if (fraction >= 1.0) return true;
  HashWriter w;
  w.write_byte(0x41);  // 'A'
  w.write_u64(seed);
  Bytes packed = bucket_key.packed();
  w.write_u64(bucket_key.size());
  w.write(packed);
  Digest256 d = w.finish();
  uint64_t x = read_u64_be(std::span<const uint8_t>(d.data(), 8));
  return (static_cast<double>(x) / static_cast<double>(UINT64_MAX)) < fraction;
}

}  // namespace tap
