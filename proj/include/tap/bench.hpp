#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tap/server.hpp"

namespace tap {

struct BenchConfig {
  uint32_t users = 100;        // d
  uint32_t epochs = 4;         // total inserted epochs (plus the epoch-0 table)
  uint32_t regions = 10;
  double industrial_fraction = 0.2;
  uint64_t value_max = 100;
  uint32_t window = 1;         // w, epochs per aggregate query range
  uint32_t repetitions = 5;
  uint64_t rng_seed = 7;
};

struct BenchRecord {
  std::string query;       // lookup | sum | min | max | quantile_median | quantile_p05 | audit
  size_t proof_bytes = 0;  // binary wire size
  BenchTimes times;        // five-way split; total implied by sum + other
  double total_ms = 0;
};

struct BenchSummary {
  std::vector<BenchRecord> records;  // averaged over repetitions
  bool ordering_ok = false;          // lookup < sum < min/max <= quantile < audit
  bool ordering_stable = false;      // same ordering in every repetition
  bool median_geq_p05 = false;
  size_t audit_bytes_per_epoch = 0;
  std::string detail;

  std::string to_text() const;
};

// Runs the microbenchmark workload: d users, one value per user per epoch,
// one region attribute and one industrial flag, fixed query mix. Sizes use
// the binary wire encoding.
BenchSummary run_bench(const BenchConfig& config);

}  // namespace tap
