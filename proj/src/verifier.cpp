#include "tap/verifier.hpp"

#include <chrono>
#include <cmath>

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

template <typename T>
Verified<T> reject(const std::string& reason) {
  return Verified<T>{std::nullopt, reason};
}

}  // namespace

double AggregateResult::sample_stddev() const {
  if (count < 2 || sums.size() < 2) return 0.0;
  double v1 = static_cast<double>(sums[0]);
  double v2 = static_cast<double>(sums[1]);
  double n = static_cast<double>(count);
  return std::sqrt((v2 - v1 * v1 / n) / (n - 1.0));
}

bool verify_lookup(const Schema& schema, const std::string& user_id,
                   const std::vector<uint32_t>& types, uint32_t t, const LookupProof& proof,
                   uint64_t own_value, const Scalar& own_seed, const Digest256& digest,
                   BenchTimes* times) {
  try {
    if (proof.value != own_value) return false;
    if (own_value >= kValueDomain) return false;
    BitString key = schema.key_for(t, types);
    if (!(proof.prefix_proof.key == key)) return false;

    StopWatch sw_sum;
    SumLeafData leaf;
    leaf.commitments = commit_powers(own_value, own_seed, schema.z);
    leaf.id_hash = id_hash(user_id, t);
    auto folded = fold_sum_path(leaf, proof.sum_copath, schema.z);
    if (!folded) return false;
    if (!(folded->root_hash == proof.prefix_proof.leaf_value)) return false;
    if (times) times->sum_verify_ms += sw_sum.ms();

    StopWatch sw_prefix;
    bool ok = rebuild_prefix_root(proof.prefix_proof) == digest;
    if (times) times->prefix_verify_ms += sw_prefix.ms();
    return ok;
  } catch (const Error&) {
    return false;
  }
}

bool verify_nonexistence(const Schema& schema, const std::string& user_id,
                         const std::vector<uint32_t>& types, uint32_t t,
                         const NonExistenceProof& proof, const Digest256& digest,
                         BenchTimes* times) {
  try {
    BitString key = schema.key_for(t, types);
    if (!proof.bucket_exists) {
      // Prefix-level non-existence: the singleton cover must verify and show
      // no leaf at all.
      StopWatch sw;
      auto leaves = check_range_cover(schema, RangeSpec::single_bucket(schema, t, types),
                                      proof.cover, digest);
      if (times) times->prefix_verify_ms += sw.ms();
      return leaves && leaves->empty();
    }

    if (!(proof.prefix_proof.key == key)) return false;
    if (proof.leaves.empty()) return false;
    StopWatch sw_sum;
    Digest256 own = id_hash(user_id, t);
    for (const auto& leaf : proof.leaves) {
      if (leaf.commitments.size() != schema.z) return false;
      if (leaf.id_hash == own) return false;
    }
    if (!(rebuild_sum_root(proof.leaves, schema.z) == proof.prefix_proof.leaf_value)) {
      return false;
    }
    if (times) times->sum_verify_ms += sw_sum.ms();
    StopWatch sw_prefix;
    bool ok = rebuild_prefix_root(proof.prefix_proof) == digest;
    if (times) times->prefix_verify_ms += sw_prefix.ms();
    return ok;
  } catch (const Error&) {
    return false;
  }
}

Verified<AggregateResult> verify_aggregate(const Schema& schema, const RangeSpec& spec,
                                           const AggregateProof& proof, const Digest256& digest,
                                           BenchTimes* times) {
  try {
    StopWatch sw_prefix;
    auto leaves = check_range_cover(schema, spec, proof.cover, digest);
    if (times) times->prefix_verify_ms += sw_prefix.ms();
    if (!leaves) return reject<AggregateResult>("cover-invalid");
    if (proof.leaves.size() != leaves->size()) return reject<AggregateResult>("cover-invalid");
    if (proof.sums.size() != schema.z) return reject<AggregateResult>("sum-mismatch");

    StopWatch sw_sum;
    std::vector<Commitment> totals(schema.z, Commitment::identity());
    uint64_t count = 0;
    for (size_t i = 0; i < leaves->size(); ++i) {
      const AggregateLeafInfo& info = proof.leaves[i];
      if (info.commitments.size() != schema.z) return reject<AggregateResult>("leaf-hash-mismatch");
      Digest256 expected =
          sum_internal_hash(info.left_hash, info.right_hash, info.commitments, info.count);
      if (!(expected == (*leaves)[i].value)) return reject<AggregateResult>("leaf-hash-mismatch");
      for (uint32_t j = 0; j < schema.z; ++j) {
        totals[j] = add_commitments(totals[j], info.commitments[j]);
      }
      count += info.count;
    }
    for (uint32_t j = 0; j < schema.z; ++j) {
      Scalar claimed = Scalar::zero();
      uint128 s = proof.sums[j];
      // Sums can exceed 64 bits for higher powers; fold in two limbs.
      Scalar hi = Scalar::from_u64(static_cast<uint64_t>(s >> 64));
      Scalar shift = Scalar::from_u64(uint64_t(1) << 32);
      claimed = hi.mul(shift).mul(shift).add(Scalar::from_u64(static_cast<uint64_t>(s)));
      if (!(commit(claimed, proof.total_seed) == totals[j])) {
        return reject<AggregateResult>("sum-mismatch");
      }
    }
    if (times) times->sum_verify_ms += sw_sum.ms();

    AggregateResult result;
    result.count = count;
    result.sums = proof.sums;
    return Verified<AggregateResult>{result, ""};
  } catch (const Error&) {
    return reject<AggregateResult>("malformed");
  }
}

Verified<uint64_t> verify_minmax(const Schema& schema, const RangeSpec& spec,
                                 const MinMaxProof& proof, MinMaxMode mode,
                                 const Digest256& digest, BenchTimes* times) {
  try {
    if (proof.mode != mode) return reject<uint64_t>("mode-mismatch");
    StopWatch sw_prefix;
    auto leaves = check_range_cover(schema, spec, proof.cover, digest);
    if (times) times->prefix_verify_ms += sw_prefix.ms();
    if (!leaves) return reject<uint64_t>("cover-invalid");
    if (leaves->empty() || proof.per_tree.size() != leaves->size()) {
      return reject<uint64_t>("cover-invalid");
    }
    if (proof.witness_index >= proof.per_tree.size()) return reject<uint64_t>("witness-invalid");
    if (proof.extreme >= kValueDomain) return reject<uint64_t>("value-out-of-range");

    StopWatch sw_sum;
    for (size_t i = 0; i < proof.per_tree.size(); ++i) {
      const MinMaxLeafProof& leaf_proof = proof.per_tree[i];
      auto folded = fold_sum_path(leaf_proof.leaf, leaf_proof.copath, schema.z);
      if (!folded) return reject<uint64_t>("inclusion-invalid");
      if (!(folded->root_hash == (*leaves)[i].value)) return reject<uint64_t>("inclusion-invalid");
      // The proven leaf must sit at the extreme position of its tree.
      bool at_extreme = mode == MinMaxMode::min ? folded->leaves_left == 0
                                                : folded->leaves_right == 0;
      if (!at_extreme) return reject<uint64_t>("position-invalid");

      uint64_t lo, hi;
      if (i == proof.witness_index) {
        lo = proof.extreme;
        hi = proof.extreme + 1;
      } else if (mode == MinMaxMode::min) {
        lo = proof.extreme;
        hi = proof.extreme + kValueDomain;
      } else {
        lo = 0;
        hi = proof.extreme + 1;
      }
      if (!verify_range(leaf_proof.leaf.commitments[0], lo, hi, leaf_proof.range_proof)) {
        return reject<uint64_t>("range-invalid");
      }
    }
    if (times) times->sum_verify_ms += sw_sum.ms();
    return Verified<uint64_t>{proof.extreme, ""};
  } catch (const Error&) {
    return reject<uint64_t>("malformed");
  }
}

Verified<uint64_t> verify_quantile(const Schema& schema, const RangeSpec& spec, const Fraction& q,
                                   const QuantileProof& proof, const Digest256& digest,
                                   BenchTimes* times) {
  try {
    if (q.den == 0 || q.num > q.den) return reject<uint64_t>("invalid-q");
    StopWatch sw_prefix;
    auto leaves = check_range_cover(schema, spec, proof.cover, digest);
    if (times) times->prefix_verify_ms += sw_prefix.ms();
    if (!leaves) return reject<uint64_t>("cover-invalid");
    if (leaves->empty() || proof.per_tree.size() != leaves->size()) {
      return reject<uint64_t>("cover-invalid");
    }
    if (proof.value >= kValueDomain) return reject<uint64_t>("value-out-of-range");

    StopWatch sw_sum;
    uint128 n = 0;
    uint128 leq_total = 0;  // leaves proven <= v*, plus those left of them
    uint128 geq_total = 0;  // leaves proven >= v*, plus those right of them
    for (size_t i = 0; i < proof.per_tree.size(); ++i) {
      const QuantileTreeProof& tree_proof = proof.per_tree[i];
      if (!tree_proof.geq && !tree_proof.leq) return reject<uint64_t>("tree-unproven");
      std::optional<uint64_t> root_count;
      if (tree_proof.geq) {
        auto folded = fold_sum_path(tree_proof.geq->leaf, tree_proof.geq->copath, schema.z);
        if (!folded) return reject<uint64_t>("inclusion-invalid");
        if (!(folded->root_hash == (*leaves)[i].value)) {
          return reject<uint64_t>("inclusion-invalid");
        }
        if (!verify_range(tree_proof.geq->leaf.commitments[0], proof.value,
                          proof.value + kValueDomain, tree_proof.geq->range_proof)) {
          return reject<uint64_t>("range-invalid");
        }
        geq_total += folded->leaves_right + 1;
        root_count = folded->root_count;
      }
      if (tree_proof.leq) {
        auto folded = fold_sum_path(tree_proof.leq->leaf, tree_proof.leq->copath, schema.z);
        if (!folded) return reject<uint64_t>("inclusion-invalid");
        if (!(folded->root_hash == (*leaves)[i].value)) {
          return reject<uint64_t>("inclusion-invalid");
        }
        if (!verify_range(tree_proof.leq->leaf.commitments[0], 0, proof.value + 1,
                          tree_proof.leq->range_proof)) {
          return reject<uint64_t>("range-invalid");
        }
        leq_total += folded->leaves_left + 1;
        if (root_count && *root_count != folded->root_count) {
          return reject<uint64_t>("count-mismatch");
        }
        root_count = folded->root_count;
      }
      n += *root_count;
    }
    if (times) times->sum_verify_ms += sw_sum.ms();

    if (leq_total * q.den < n * q.num) return reject<uint64_t>("leq-count-short");
    if (geq_total * q.den < n * (q.den - q.num)) return reject<uint64_t>("geq-count-short");
    return Verified<uint64_t>{proof.value, ""};
  } catch (const Error&) {
    return reject<uint64_t>("malformed");
  }
}

bool MonitorReport::clean() const {
  for (const auto& f : findings) {
    if (f.status != MonitorStatus::ok && f.status != MonitorStatus::absent_ok) return false;
  }
  return true;
}

std::string MonitorReport::to_text() const {
  auto status_name = [](MonitorStatus s) {
    switch (s) {
      case MonitorStatus::ok: return "ok";
      case MonitorStatus::absent_ok: return "absent-ok";
      case MonitorStatus::mismatch: return "mismatch";
      case MonitorStatus::missing: return "missing";
      case MonitorStatus::unexpected: return "unexpected-entry";
      case MonitorStatus::invalid_proof: return "invalid-proof";
    }
    return "unknown";
  };
  std::string out = "monitor user=" + user_id + "\n";
  for (const auto& f : findings) {
    out += "epoch=" + std::to_string(f.epoch) + " status=" + status_name(f.status);
    if (!f.detail.empty()) out += " detail=" + f.detail;
    out += "\n";
  }
  return out;
}

MonitorReport monitor(const Schema& schema, const std::string& user_id,
                      const std::map<uint32_t, MonitorExpectation>& expectations,
                      const std::map<uint32_t, LookupResponse>& responses,
                      const std::map<uint32_t, Digest256>& digests) {
  MonitorReport report;
  report.user_id = user_id;
  for (const auto& [epoch, expect] : expectations) {
    MonitorFinding finding;
    finding.epoch = epoch;
    auto rit = responses.find(epoch);
    auto dit = digests.find(epoch);
    if (rit == responses.end() || dit == digests.end()) {
      finding.status = MonitorStatus::invalid_proof;
      finding.detail = "no response or digest";
      report.findings.push_back(finding);
      continue;
    }
    const Digest256& digest = dit->second;
    if (const auto* incl = std::get_if<LookupProof>(&rit->second)) {
      if (!expect.value) {
        finding.status = MonitorStatus::unexpected;
        finding.detail = "entry present but none expected";
      } else if (verify_lookup(schema, user_id, expect.types, epoch, *incl, *expect.value,
                               expect.seed, digest)) {
        finding.status = MonitorStatus::ok;
      } else if (incl->value != *expect.value) {
        finding.status = MonitorStatus::mismatch;
        finding.detail = "server value " + std::to_string(incl->value) + " != expected " +
                         std::to_string(*expect.value);
      } else {
        finding.status = MonitorStatus::invalid_proof;
      }
    } else {
      const auto& nonexist = std::get<NonExistenceProof>(rit->second);
      bool valid = verify_nonexistence(schema, user_id, expect.types, epoch, nonexist, digest);
      if (!valid) {
        finding.status = MonitorStatus::invalid_proof;
        finding.detail = "non-existence proof rejected";
      } else if (expect.value) {
        finding.status = MonitorStatus::missing;
        finding.detail = "expected value " + std::to_string(*expect.value);
      } else {
        finding.status = MonitorStatus::absent_ok;
      }
    }
    report.findings.push_back(finding);
  }
  return report;
}

}  // namespace tap
