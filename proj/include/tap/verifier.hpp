#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tap/proofs.hpp"
#include "tap/schema.hpp"

namespace tap {

// Client-side verification. Inputs are exactly the query, the proof, the
// bulletin digest, and the client's own secrets; never the row store.

bool verify_lookup(const Schema& schema, const std::string& user_id,
                   const std::vector<uint32_t>& types, uint32_t t, const LookupProof& proof,
                   uint64_t own_value, const Scalar& own_seed, const Digest256& digest,
                   BenchTimes* times = nullptr);

bool verify_nonexistence(const Schema& schema, const std::string& user_id,
                         const std::vector<uint32_t>& types, uint32_t t,
                         const NonExistenceProof& proof, const Digest256& digest,
                         BenchTimes* times = nullptr);

struct AggregateResult {
  uint64_t count = 0;
  std::vector<uint128> sums;

  // Derived statistics; exact rational mean, double stddev.
  double mean() const { return static_cast<double>(sums[0]) / static_cast<double>(count); }
  double sample_stddev() const;
};

template <typename T>
struct Verified {
  std::optional<T> value;
  std::string reject_reason;

  bool ok() const { return value.has_value(); }
};

Verified<AggregateResult> verify_aggregate(const Schema& schema, const RangeSpec& spec,
                                           const AggregateProof& proof, const Digest256& digest,
                                           BenchTimes* times = nullptr);

Verified<uint64_t> verify_minmax(const Schema& schema, const RangeSpec& spec,
                                 const MinMaxProof& proof, MinMaxMode mode,
                                 const Digest256& digest, BenchTimes* times = nullptr);

Verified<uint64_t> verify_quantile(const Schema& schema, const RangeSpec& spec, const Fraction& q,
                                   const QuantileProof& proof, const Digest256& digest,
                                   BenchTimes* times = nullptr);

// Per-user monitoring: one lookup verification per epoch.
struct MonitorExpectation {
  std::vector<uint32_t> types;
  std::optional<uint64_t> value;  // nullopt = expect absence
  Scalar seed;
};

enum class MonitorStatus : uint8_t { ok, absent_ok, mismatch, missing, unexpected, invalid_proof };

struct MonitorFinding {
  uint32_t epoch = 0;
  MonitorStatus status = MonitorStatus::ok;
  std::string detail;
};

struct MonitorReport {
  std::string user_id;
  std::vector<MonitorFinding> findings;

  bool clean() const;
  std::string to_text() const;
};

MonitorReport monitor(const Schema& schema, const std::string& user_id,
                      const std::map<uint32_t, MonitorExpectation>& expectations,
                      const std::map<uint32_t, LookupResponse>& responses,
                      const std::map<uint32_t, Digest256>& digests);

}  // namespace tap
