#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tap/proofs.hpp"
#include "tap/schema.hpp"

namespace tap {

struct BucketAuditResult {
  BitString key;
  bool leaves_ok = false;      // opened leaves rebuild the committed root
  bool sorted_ok = false;
  bool gamma_ok = true;
  size_t sortedness_checked = 0;
  size_t gamma_checked = 0;
  std::string detail;

  bool pass() const { return leaves_ok && sorted_ok && gamma_ok; }
};

struct AuditReport {
  uint32_t t_old = 0;
  uint32_t t_new = 0;
  bool extension_ok = false;
  bool buckets_complete = false;  // audited set matches the authenticated bucket list
  std::vector<BucketAuditResult> buckets;
  size_t sampled_buckets = 0;
  size_t total_buckets = 0;
  std::string detail;

  bool pass() const;
  size_t sortedness_total() const;
  size_t gamma_total() const;
  std::string to_text() const;
};

// Full audit of the epoch range against the two bulletin digests. The
// auditor trusts only the digests; bucket roots are taken from the
// extension's new leaves (and the genesis cover when t_old == 0).
AuditReport epoch_check(const Schema& schema, const AuditProof& proof,
                        const Digest256& digest_old, const Digest256& digest_new);

// Same checks restricted to the deterministic pseudo-random bucket subset
// selected by (sample_seed, sample_fraction) inside the proof.
AuditReport randomized_audit(const Schema& schema, const AuditProof& proof,
                             const Digest256& digest_old, const Digest256& digest_new);

}  // namespace tap
