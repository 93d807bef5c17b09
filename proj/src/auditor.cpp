#include "tap/auditor.hpp"

#include <algorithm>
#include <map>

#include "tap/errors.hpp"

namespace tap {

bool AuditReport::pass() const {
  if (!extension_ok || !buckets_complete) return false;
  return std::all_of(buckets.begin(), buckets.end(),
                     [](const BucketAuditResult& b) { return b.pass(); });
}

size_t AuditReport::sortedness_total() const {
  size_t n = 0;
  for (const auto& b : buckets) n += b.sortedness_checked;
  return n;
}

size_t AuditReport::gamma_total() const {
  size_t n = 0;
  for (const auto& b : buckets) n += b.gamma_checked;
  return n;
}

std::string AuditReport::to_text() const {
  std::string out = "audit epochs " + std::to_string(t_old) + ".." + std::to_string(t_new) +
                    " extension=" + (extension_ok ? "ok" : "FAIL") +
                    " coverage=" + std::to_string(sampled_buckets) + "/" +
                    std::to_string(total_buckets) + "\n";
  for (const auto& b : buckets) {
    out += "bucket " + b.key.to_string() + " leaves=" + (b.leaves_ok ? "ok" : "FAIL") +
           " sorted=" + (b.sorted_ok ? "ok" : "FAIL") + " (" +
           std::to_string(b.sortedness_checked) + " proofs)";
    if (b.gamma_checked > 0) {
      out += " gamma=" + std::string(b.gamma_ok ? "ok" : "FAIL") + " (" +
             std::to_string(b.gamma_checked) + " proofs)";
    }
    if (!b.detail.empty()) out += " detail=" + b.detail;
    out += "\n";
  }
  out += pass() ? "result: PASS\n" : "result: FAIL\n";
  return out;
}

namespace {

AuditReport run_audit(const Schema& schema, const AuditProof& proof, const Digest256& digest_old,
                      const Digest256& digest_new, bool sampled) {
  AuditReport report;
  report.t_old = proof.t_old;
  report.t_new = proof.t_new;
  report.extension_ok =
      verify_extension(schema.key_length(), proof.extension, digest_old, digest_new);

  // Authenticated bucket list: new prefix leaves from the extension, plus the
  // epoch-0 leaves from the genesis cover when auditing from genesis.
  std::map<BitString, Digest256> expected;
  for (const auto& leaf : proof.extension.new_leaves) expected[leaf.key] = leaf.value;
  if (proof.t_old == 0) {
    if (!proof.genesis_cover) {
      report.detail = "missing genesis cover";
      report.buckets_complete = false;
      return report;
    }
    RangeSpec genesis = RangeSpec::all(schema);
    genesis.t_min = 0;
    genesis.t_max = 0;
    auto leaves = check_range_cover(schema, genesis, *proof.genesis_cover, digest_new);
    if (!leaves) {
      report.detail = "genesis cover invalid";
      report.buckets_complete = false;
      return report;
    }
    for (const auto& leaf : *leaves) expected[leaf.key] = leaf.value;
  }

  report.total_buckets = expected.size();
  std::map<BitString, const BucketAudit*> audited;
  for (const auto& bucket : proof.buckets) audited[bucket.prefix_key] = &bucket;

  report.buckets_complete = true;
  size_t expected_sampled = 0;
  for (const auto& [key, phi] : expected) {
    bool in_sample = !sampled || audit_sample_includes(proof.sample_seed, proof.sample_fraction, key);
    if (!in_sample) continue;
    ++expected_sampled;
    if (!audited.count(key)) {
      report.buckets_complete = false;
      report.detail = "bucket " + key.to_string() + " not audited";
    }
  }
  report.sampled_buckets = expected_sampled;

  for (const auto& bucket : proof.buckets) {
    BucketAuditResult result;
    result.key = bucket.prefix_key;
    auto it = expected.find(bucket.prefix_key);
    if (it == expected.end()) {
      result.detail = "bucket not in authenticated set";
      report.buckets.push_back(result);
      report.buckets_complete = false;
      continue;
    }
    const Digest256& phi = it->second;

    try {
      result.leaves_ok =
          !bucket.leaves.empty() && rebuild_sum_root(bucket.leaves, schema.z) == phi;
    } catch (const Error&) {
      result.leaves_ok = false;
    }
    for (const auto& leaf : bucket.leaves) {
      if (leaf.commitments.size() != schema.z) result.leaves_ok = false;
    }

    result.sorted_ok = result.leaves_ok && bucket.sortedness.size() + 1 == bucket.leaves.size();
    if (result.sorted_ok) {
      for (size_t i = 0; i + 1 < bucket.leaves.size(); ++i) {
        Commitment diff;
        try {
          diff = sub_commitments(bucket.leaves[i + 1].commitments[0],
                                 bucket.leaves[i].commitments[0]);
        } catch (const Error&) {
          result.sorted_ok = false;
          break;
        }
        if (!verify_range(diff, 0, kValueDomain, bucket.sortedness[i])) {
          result.sorted_ok = false;
          result.detail = "sortedness proof " + std::to_string(i) + " rejected";
          break;
        }
        ++result.sortedness_checked;
      }
    }

    if (schema.gamma) {
      result.gamma_ok = result.leaves_ok && bucket.gamma_bounds.size() == bucket.leaves.size();
      if (result.gamma_ok) {
        for (size_t i = 0; i < bucket.leaves.size(); ++i) {
          if (!verify_range(bucket.leaves[i].commitments[0], 0, *schema.gamma + 1,
                            bucket.gamma_bounds[i])) {
            result.gamma_ok = false;
            result.detail = "gamma proof " + std::to_string(i) + " rejected";
            break;
          }
          ++result.gamma_checked;
        }
      }
    }
    report.buckets.push_back(std::move(result));
  }
  return report;
}

}  // namespace

AuditReport epoch_check(const Schema& schema, const AuditProof& proof, const Digest256& digest_old,
                        const Digest256& digest_new) {
  return run_audit(schema, proof, digest_old, digest_new, /*sampled=*/proof.sample_fraction < 1.0);
}

AuditReport randomized_audit(const Schema& schema, const AuditProof& proof,
                             const Digest256& digest_old, const Digest256& digest_new) {
  return run_audit(schema, proof, digest_old, digest_new, /*sampled=*/true);
}

}  // namespace tap
