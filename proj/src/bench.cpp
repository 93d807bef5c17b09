#include "tap/bench.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <random>
#include <sstream>

#include "tap/auditor.hpp"
#include "tap/errors.hpp"
#include "tap/verifier.hpp"
#include "tap/wire.hpp"

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

Schema bench_schema(const BenchConfig& config) {
  Schema schema;
  schema.z = 2;
  TypeAttribute region{"region", 8, {}};
  for (uint32_t r = 0; r < config.regions; ++r) {
    region.codes["region" + std::to_string(r)] = r;
  }
  TypeAttribute industrial{"is_industrial", 8, {{"no", 0}, {"yes", 1}}};
  schema.attributes = {region, industrial};
  return schema;
}

template <typename Body>
size_t wire_size(const Body& body) {
  return wire::encode(wire::make_message(body), wire::Mode::binary).size();
}

}  // namespace

std::string BenchSummary::to_text() const {
  std::ostringstream out;
  out << "query                bytes   prefix_gen  prefix_ver  sum_gen  sum_ver  other  total(ms)\n";
  for (const auto& r : records) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %-7zu %-11.2f %-11.2f %-8.2f %-8.2f %-6.2f %.2f\n",
                  r.query.c_str(), r.proof_bytes, r.times.prefix_gen_ms, r.times.prefix_verify_ms,
                  r.times.sum_gen_ms, r.times.sum_verify_ms, r.times.other_ms, r.total_ms);
    out << line;
  }
  out << "size ordering lookup < sum < min/max <= median < audit: "
      << (ordering_ok ? "ok" : "VIOLATED") << "\n";
  out << "ordering stable across repetitions: " << (ordering_stable ? "ok" : "VIOLATED") << "\n";
  out << "median proof >= 5th-percentile proof: " << (median_geq_p05 ? "ok" : "VIOLATED") << "\n";
  out << "audit bytes per " << detail << ": " << audit_bytes_per_epoch << "\n";
  return out.str();
}

BenchSummary run_bench(const BenchConfig& config) {
  Schema schema = bench_schema(config);
  Bulletin bulletin;
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_int_distribution<uint64_t> value_dist(0, config.value_max);
  std::uniform_int_distribution<uint32_t> region_dist(0, config.regions - 1);
  std::bernoulli_distribution industrial_dist(config.industrial_fraction);

  std::vector<std::vector<uint32_t>> user_types;
  std::vector<std::string> user_names;
  for (uint32_t u = 0; u < config.users; ++u) {
    user_types.push_back({region_dist(rng), industrial_dist(rng) ? 1u : 0u});
    user_names.push_back("user" + std::to_string(u));
  }
  auto epoch_rows = [&](uint32_t) {
    std::vector<RowInput> rows;
    for (uint32_t u = 0; u < config.users; ++u) {
      rows.push_back(RowInput{user_names[u], user_types[u], value_dist(rng)});
    }
    return rows;
  };

  TapServer server(schema, bulletin, epoch_rows(0));
  for (uint32_t t = 1; t <= config.epochs; ++t) server.insert_epoch(t, epoch_rows(t));

  uint32_t last = config.epochs;
  RangeSpec window_spec = RangeSpec::all(schema);
  window_spec.t_min = last - (config.window - 1);
  window_spec.t_max = last;
  Digest256 digest = server.digest();

  struct RepSizes {
    std::map<std::string, size_t> bytes;
  };
  std::vector<RepSizes> reps;
  std::map<std::string, BenchRecord> accum;

  auto record = [&](RepSizes& sizes, const std::string& name, size_t bytes,
                    const BenchTimes& times, double total) {
    sizes.bytes[name] = bytes;
    BenchRecord& r = accum[name];
    r.query = name;
    r.proof_bytes = bytes;  // deterministic per workload; keep the last
    r.times.prefix_gen_ms += times.prefix_gen_ms;
    r.times.prefix_verify_ms += times.prefix_verify_ms;
    r.times.sum_gen_ms += times.sum_gen_ms;
    r.times.sum_verify_ms += times.sum_verify_ms;
    double split = times.prefix_gen_ms + times.prefix_verify_ms + times.sum_gen_ms +
                   times.sum_verify_ms;
    r.times.other_ms += std::max(0.0, total - split);
    r.total_ms += total;
  };

  for (uint32_t rep = 0; rep < config.repetitions; ++rep) {
    RepSizes sizes;

    {  // lookup
      BenchTimes t{};
      StopWatch sw;
      auto response = server.lookup(user_names[rep % config.users],
                                    user_types[rep % config.users], last, &t);
      auto* proof = std::get_if<LookupProof>(&response);
      if (!proof) throw Error(ErrorCode::malformed, "bench lookup missing");
      size_t bytes = wire_size(*proof);
      verify_lookup(schema, user_names[rep % config.users], user_types[rep % config.users], last,
                    *proof, proof->value, server.epoch_secret(user_names[rep % config.users], last),
                    digest, &t);
      record(sizes, "lookup", bytes, t, sw.ms());
    }

    {  // sum / count / average
      BenchTimes t{};
      StopWatch sw;
      AggregateProof proof = server.query_aggregate(window_spec, &t);
      size_t bytes = wire_size(proof);
      auto verified = verify_aggregate(schema, window_spec, proof, digest, &t);
      if (!verified.ok()) throw Error(ErrorCode::malformed, "bench sum rejected");
      record(sizes, "sum", bytes, t, sw.ms());
    }

    for (MinMaxMode mode : {MinMaxMode::min, MinMaxMode::max}) {
      BenchTimes t{};
      StopWatch sw;
      MinMaxProof proof = server.query_minmax(window_spec, mode, &t);
      size_t bytes = wire_size(proof);
      auto verified = verify_minmax(schema, window_spec, proof, mode, digest, &t);
      if (!verified.ok()) throw Error(ErrorCode::malformed, "bench minmax rejected");
      record(sizes, mode == MinMaxMode::min ? "min" : "max", bytes, t, sw.ms());
    }

    for (auto [name, q] : {std::pair<const char*, Fraction>{"quantile_median", {1, 2}},
                           std::pair<const char*, Fraction>{"quantile_p05", {1, 20}}}) {
      BenchTimes t{};
      StopWatch sw;
      QuantileProof proof = server.query_quantile(window_spec, q, &t);
      size_t bytes = wire_size(proof);
      auto verified = verify_quantile(schema, window_spec, q, proof, digest, &t);
      if (!verified.ok()) throw Error(ErrorCode::malformed, "bench quantile rejected");
      record(sizes, name, bytes, t, sw.ms());
    }

    {  // audit of the newest epoch
      BenchTimes t{};
      StopWatch sw;
      StopWatch sw_gen;
      AuditProof proof = server.audit_proof(last - 1, last);
      t.sum_gen_ms += sw_gen.ms();
      size_t bytes = wire_size(proof);
      StopWatch sw_ver;
      AuditReport report = epoch_check(schema, proof, bulletin.get(last - 1), bulletin.get(last));
      t.sum_verify_ms += sw_ver.ms();
      if (!report.pass()) throw Error(ErrorCode::malformed, "bench audit failed");
      record(sizes, "audit", bytes, t, sw.ms());
    }

    reps.push_back(std::move(sizes));
  }

  BenchSummary summary;
  for (auto& [name, rec] : accum) {
    BenchRecord avg = rec;
    double n = config.repetitions;
    avg.times.prefix_gen_ms /= n;
    avg.times.prefix_verify_ms /= n;
    avg.times.sum_gen_ms /= n;
    avg.times.sum_verify_ms /= n;
    avg.times.other_ms /= n;
    avg.total_ms /= n;
    summary.records.push_back(avg);
  }

  auto ordered = [](const RepSizes& s) {
    size_t minmax = std::max(s.bytes.at("min"), s.bytes.at("max"));
    return s.bytes.at("lookup") < s.bytes.at("sum") && s.bytes.at("sum") < minmax &&
           minmax <= s.bytes.at("quantile_median") &&
           s.bytes.at("quantile_median") < s.bytes.at("audit");
  };
  summary.ordering_ok = !reps.empty() && ordered(reps.front());
  summary.ordering_stable =
      std::all_of(reps.begin(), reps.end(), [&](const RepSizes& s) { return ordered(s); });
  summary.median_geq_p05 =
      !reps.empty() &&
      reps.front().bytes.at("quantile_median") >= reps.front().bytes.at("quantile_p05");
  summary.audit_bytes_per_epoch = reps.empty() ? 0 : reps.front().bytes.at("audit");
  summary.detail = std::to_string(config.users) + "-entry epoch";
  return summary;
}

}  // namespace tap
