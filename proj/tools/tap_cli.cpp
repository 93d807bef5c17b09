// Command-line front end: server, client-verifier, auditor, and benchmark
// roles over one binary. Exit codes: 0 ok, 1 verification failed, 2 usage
// error, 3 server error.

#include <CLI11.hpp>
#include <httplib.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "tap/auditor.hpp"
#include "tap/bench.hpp"
#include "tap/dp.hpp"
#include "tap/errors.hpp"
#include "tap/service.hpp"
#include "tap/verifier.hpp"
#include "tap/wire.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitServerError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw tap::Error(tap::ErrorCode::io_error, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

tap::ServiceConfig load_config(const std::string& path) {
  return tap::config_from_json(read_file(path));
}

struct Client {
  httplib::Client http;
  tap::wire::Mode mode;

  Client(const std::string& url, tap::wire::Mode m) : http(url), mode(m) {
    http.set_read_timeout(120, 0);
  }

  tap::wire::Message get(const std::string& path) {
    auto res = http.Get(path + (path.find('?') == std::string::npos ? "?" : "&") +
                        "wire=" + (mode == tap::wire::Mode::binary ? "binary" : "text"));
    if (!res) throw tap::Error(tap::ErrorCode::io_error, "request failed: " + path);
    tap::Bytes body(res->body.begin(), res->body.end());
    return tap::wire::decode(body, mode);
  }

  tap::wire::Message post(const std::string& path, const tap::wire::Message& msg) {
    tap::Bytes body = tap::wire::encode(msg, mode);
    auto res = http.Post(path + "?wire=" + (mode == tap::wire::Mode::binary ? "binary" : "text"),
                         std::string(body.begin(), body.end()),
                         mode == tap::wire::Mode::binary ? "application/octet-stream"
                                                         : "application/json");
    if (!res) throw tap::Error(tap::ErrorCode::io_error, "request failed: " + path);
    tap::Bytes out(res->body.begin(), res->body.end());
    return tap::wire::decode(out, mode);
  }
};

[[noreturn]] void fail_on_error_body(const tap::wire::Message& msg) {
  const auto& err = std::get<tap::wire::ErrorBody>(msg.body);
  std::cerr << "server error: " << err.code << ": " << err.message << "\n";
  std::exit(kExitServerError);
}

template <typename T>
T expect_body(tap::wire::Message msg) {
  if (auto* body = std::get_if<T>(&msg.body)) return std::move(*body);
  if (std::holds_alternative<tap::wire::ErrorBody>(msg.body)) fail_on_error_body(msg);
  throw tap::Error(tap::ErrorCode::malformed, "unexpected response kind");
}

tap::Digest256 fetch_digest(Client& client, uint32_t epoch) {
  auto body = expect_body<tap::wire::DigestResponse>(
      client.get("/digest?epoch=" + std::to_string(epoch)));
  return body.digest;
}

std::vector<uint32_t> parse_type_labels(const tap::Schema& schema, const std::string& csv) {
  std::vector<std::string> tokens;
  size_t pos = 0;
  while (true) {
    size_t comma = csv.find(',', pos);
    tokens.push_back(csv.substr(pos, comma == std::string::npos ? comma : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (tokens.size() != schema.attributes.size()) {
    throw tap::Error(tap::ErrorCode::schema_mismatch, "expected " +
                                                          std::to_string(schema.attributes.size()) +
                                                          " type values");
  }
  std::vector<uint32_t> codes;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const auto& token = tokens[i];
    if (!token.empty() && std::isdigit(static_cast<unsigned char>(token[0])) != 0) {
      codes.push_back(static_cast<uint32_t>(std::stoul(token)));
    } else {
      codes.push_back(schema.attributes[i].code_of(token));
    }
  }
  return codes;
}

std::string spec_query(const tap::Schema& schema, uint32_t t_min, uint32_t t_max,
                       const std::vector<std::string>& ranges) {
  std::string query = "t_min=" + std::to_string(t_min) + "&t_max=" + std::to_string(t_max);
  for (const auto& r : ranges) {
    size_t eq = r.find('=');
    if (eq == std::string::npos) {
      throw tap::Error(tap::ErrorCode::malformed, "range must be name=lo..hi");
    }
    query += "&" + r;
  }
  (void)schema;
  return query;
}

tap::RangeSpec spec_from_flags(const tap::Schema& schema, uint32_t t_min, uint32_t t_max,
                               const std::vector<std::string>& ranges) {
  tap::RangeSpec spec = tap::RangeSpec::all(schema);
  spec.t_min = t_min;
  spec.t_max = t_max;
  for (const auto& r : ranges) {
    size_t eq = r.find('=');
    std::string name = r.substr(0, eq);
    std::string value = r.substr(eq + 1);
    size_t sep = value.find("..");
    std::string lo = sep == std::string::npos ? value : value.substr(0, sep);
    std::string hi = sep == std::string::npos ? value : value.substr(sep + 2);
    bool found = false;
    for (size_t i = 0; i < schema.attributes.size(); ++i) {
      if (schema.attributes[i].name != name) continue;
      auto code = [&](const std::string& token) -> uint64_t {
        if (!token.empty() && std::isdigit(static_cast<unsigned char>(token[0])) != 0) {
          return std::stoull(token);
        }
        return schema.attributes[i].code_of(token);
      };
      spec.type_ranges[i] = {code(lo), code(hi)};
      found = true;
    }
    if (!found) throw tap::Error(tap::ErrorCode::schema_mismatch, "unknown attribute " + name);
  }
  spec.validate(schema);
  return spec;
}

int cmd_ingest(const tap::ServiceConfig& config, const std::string& csv_path) {
  tap::IngestResult result = tap::ingest_csv(config, csv_path);
  std::cout << result.epochs << " epochs, " << result.rows << " rows ingested; latest digest "
            << tap::to_hex(result.digest) << "\n";
  return kExitOk;
}

int cmd_dp_eval(const std::string& shape, int64_t b, double rho, uint64_t sensitivity) {
  std::vector<double> g =
      shape == "uniform" ? tap::dp::uniform_density(b) : tap::dp::geometric_density(b, rho);
  tap::dp::NoiseDistribution dist = tap::dp::make_bounded_noise(b, g);
  tap::dp::DpParameters params = tap::dp::epsilon_delta(
      dist, sensitivity, static_cast<int64_t>(sensitivity), 0);
  bool ok = tap::dp::dp_oracle_check(dist, sensitivity, params.epsilon, params.delta);
  std::cout << "distribution " << tap::dp::serialize_distribution(dist) << "\n";
  std::cout << "epsilon " << params.epsilon << " delta " << params.delta
            << " oracle " << (ok ? "pass" : "FAIL") << "\n";
  tap::dp::LaplaceBaseline lap = tap::dp::laplace_baseline(sensitivity, b > 0 ? double(b) : 1.0);
  std::cout << "laplace baseline (unbounded, transparency-breaking): scale " << lap.scale
            << " epsilon' " << lap.epsilon_prime << "\n";
  return ok ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tap: transparent and privacy-preserving data service"};
  app.require_subcommand(1);

  std::string config_path;
  std::string url = "http://127.0.0.1:8437";
  std::string wire_flag;
  app.add_option("--config", config_path, "service config json")->required();
  app.add_option("--url", url, "server url for client verbs");
  app.add_option("--wire", wire_flag, "wire mode override: text|binary");

  auto* serve = app.add_subcommand("serve", "run the query server");
  std::string host_flag;
  int port_flag = -1;
  serve->add_option("--host", host_flag, "bind host override");
  serve->add_option("--port", port_flag, "bind port override");

  auto* ingest = app.add_subcommand("ingest", "load a csv table into the data dir");
  std::string csv_path;
  ingest->add_option("csv", csv_path, "csv with header Time,ID,<types...>,Value")->required();

  std::string user;
  uint32_t epoch = 0;
  std::string types_csv;
  auto* lookup = app.add_subcommand("lookup", "verified look-up of one value");
  lookup->add_option("--user", user)->required();
  lookup->add_option("--epoch", epoch)->required();
  lookup->add_option("--types", types_csv, "comma-separated type labels or codes")->required();

  uint32_t t_min = 0, t_max = 0;
  std::vector<std::string> ranges;
  auto add_range_flags = [&](CLI::App* cmd) {
    cmd->add_option("--t-min", t_min)->required();
    cmd->add_option("--t-max", t_max)->required();
    cmd->add_option("--range", ranges, "attribute range name=lo..hi (repeatable)");
  };
  auto* sum = app.add_subcommand("sum", "verified sum/count/average/stddev over a range");
  add_range_flags(sum);
  auto* minmax = app.add_subcommand("minmax", "verified min or max over a range");
  add_range_flags(minmax);
  std::string mode_flag = "min";
  minmax->add_option("--mode", mode_flag, "min|max");
  auto* quantile = app.add_subcommand("quantile", "verified quantile over a range");
  add_range_flags(quantile);
  std::string q_text = "0.5";
  quantile->add_option("--q", q_text, "quantile in [0,1], e.g. 0.5");

  auto* audit = app.add_subcommand("audit", "fetch and verify an epoch audit");
  uint32_t audit_old = 0, audit_new = 0;
  double audit_fraction = 1.0;
  uint64_t audit_seed = 0;
  audit->add_option("--t-old", audit_old)->required();
  audit->add_option("--t-new", audit_new)->required();
  audit->add_option("--fraction", audit_fraction, "randomized audit sample fraction");
  audit->add_option("--seed", audit_seed, "randomized audit rng seed");

  auto* monitor_cmd = app.add_subcommand("monitor", "verify own rows across epochs");
  std::string expect_csv;
  monitor_cmd->add_option("--user", user)->required();
  monitor_cmd->add_option("--types", types_csv)->required();
  monitor_cmd->add_option("--expect", expect_csv, "csv epoch=value pairs, e.g. 0=11,1=19")
      ->required();

  auto* bench = app.add_subcommand("bench", "run the microbenchmark workload");
  tap::BenchConfig bench_config;
  bench->add_option("--users", bench_config.users);
  bench->add_option("--epochs", bench_config.epochs);
  bench->add_option("--regions", bench_config.regions);
  bench->add_option("--industrial", bench_config.industrial_fraction);
  bench->add_option("--window", bench_config.window);
  bench->add_option("--repetitions", bench_config.repetitions);
  bench->add_option("--seed", bench_config.rng_seed);

  auto* dp_eval = app.add_subcommand("dp-eval", "bounded-noise differential privacy parameters");
  std::string dp_shape = "geometric";
  int64_t dp_b = 4;
  double dp_rho = 0.5;
  uint64_t dp_sensitivity = 1;
  dp_eval->add_option("--shape", dp_shape, "uniform|geometric");
  dp_eval->add_option("--b", dp_b, "noise bound");
  dp_eval->add_option("--rho", dp_rho, "geometric decay");
  dp_eval->add_option("--sensitivity", dp_sensitivity);

  CLI11_PARSE(app, argc, argv);

  try {
    tap::ServiceConfig config = load_config(config_path);
    if (!wire_flag.empty()) {
      config.wire_mode = wire_flag == "binary" ? tap::wire::Mode::binary : tap::wire::Mode::text;
    }
    const tap::Schema& schema = config.schema;

    if (serve->parsed()) {
      if (!host_flag.empty()) config.host = host_flag;
      if (port_flag >= 0) config.port = port_flag;
      tap::Service service(config);
      std::cout << "listening on " << config.host << ":" << config.port << "\n";
      service.serve();
      return kExitOk;
    }
    if (ingest->parsed()) return cmd_ingest(config, csv_path);
    if (bench->parsed()) {
      tap::BenchSummary summary = tap::run_bench(bench_config);
      std::cout << summary.to_text();
      return summary.ordering_ok && summary.ordering_stable ? kExitOk : kExitVerifyFailed;
    }
    if (dp_eval->parsed()) return cmd_dp_eval(dp_shape, dp_b, dp_rho, dp_sensitivity);

    Client client(url, config.wire_mode);

    if (lookup->parsed()) {
      auto types = parse_type_labels(schema, types_csv);
      std::string path = "/lookup?user=" + user + "&epoch=" + std::to_string(epoch) + "&types=";
      for (size_t i = 0; i < types.size(); ++i) {
        path += (i ? "," : "") + std::to_string(types[i]);
      }
      tap::wire::Message msg = client.get(path);
      tap::Digest256 digest = fetch_digest(client, epoch);
      if (auto* proof = std::get_if<tap::LookupProof>(&msg.body)) {
        auto seed_body = expect_body<tap::wire::SeedResponse>(
            client.get("/seed?user=" + user + "&epoch=" + std::to_string(epoch)));
        bool ok = tap::verify_lookup(schema, user, types, epoch, *proof, proof->value,
                                     seed_body.seed, digest);
        std::cout << (ok ? "verified" : "REJECTED") << " value=" << proof->value << "\n";
        return ok ? kExitOk : kExitVerifyFailed;
      }
      if (auto* proof = std::get_if<tap::NonExistenceProof>(&msg.body)) {
        bool ok = tap::verify_nonexistence(schema, user, types, epoch, *proof, digest);
        std::cout << (ok ? "verified" : "REJECTED") << " non-existence\n";
        return ok ? kExitOk : kExitVerifyFailed;
      }
      fail_on_error_body(msg);
    }

    if (sum->parsed()) {
      tap::RangeSpec spec = spec_from_flags(schema, t_min, t_max, ranges);
      auto proof = expect_body<tap::AggregateProof>(
          client.get("/sum?" + spec_query(schema, t_min, t_max, ranges)));
      auto latest = expect_body<tap::wire::DigestResponse>(client.get("/digest"));
      auto verified = tap::verify_aggregate(schema, spec, proof, latest.digest);
      if (!verified.ok()) {
        std::cout << "REJECTED: " << verified.reject_reason << "\n";
        return kExitVerifyFailed;
      }
      const auto& r = *verified.value;
      std::cout << "verified count=" << r.count;
      if (!r.sums.empty()) std::cout << " sum=" << tap::u128_to_string(r.sums[0]);
      if (r.count > 0) std::cout << " mean=" << r.mean();
      if (r.count > 1 && r.sums.size() >= 2) std::cout << " stddev=" << r.sample_stddev();
      std::cout << "\n";
      return kExitOk;
    }

    if (minmax->parsed()) {
      tap::RangeSpec spec = spec_from_flags(schema, t_min, t_max, ranges);
      tap::MinMaxMode mode =
          mode_flag == "max" ? tap::MinMaxMode::max : tap::MinMaxMode::min;
      auto proof = expect_body<tap::MinMaxProof>(client.get(
          "/minmax?mode=" + mode_flag + "&" + spec_query(schema, t_min, t_max, ranges)));
      auto latest = expect_body<tap::wire::DigestResponse>(client.get("/digest"));
      auto verified = tap::verify_minmax(schema, spec, proof, mode, latest.digest);
      if (!verified.ok()) {
        std::cout << "REJECTED: " << verified.reject_reason << "\n";
        return kExitVerifyFailed;
      }
      std::cout << "verified " << mode_flag << "=" << *verified.value << "\n";
      return kExitOk;
    }

    if (quantile->parsed()) {
      tap::RangeSpec spec = spec_from_flags(schema, t_min, t_max, ranges);
      tap::Fraction q = tap::Fraction::parse(q_text);
      auto proof = expect_body<tap::QuantileProof>(client.get(
          "/quantile?q=" + q_text + "&" + spec_query(schema, t_min, t_max, ranges)));
      auto latest = expect_body<tap::wire::DigestResponse>(client.get("/digest"));
      auto verified = tap::verify_quantile(schema, spec, q, proof, latest.digest);
      if (!verified.ok()) {
        std::cout << "REJECTED: " << verified.reject_reason << "\n";
        return kExitVerifyFailed;
      }
      std::cout << "verified q=" << q_text << " value=" << *verified.value << "\n";
      return kExitOk;
    }

    if (audit->parsed()) {
      auto proof = expect_body<tap::AuditProof>(client.get(
          "/audit?t_old=" + std::to_string(audit_old) + "&t_new=" + std::to_string(audit_new) +
          "&fraction=" + std::to_string(audit_fraction) + "&seed=" + std::to_string(audit_seed)));
      tap::Digest256 d_old = fetch_digest(client, audit_old);
      tap::Digest256 d_new = fetch_digest(client, audit_new);
      tap::AuditReport report = audit_fraction < 1.0
                                    ? tap::randomized_audit(schema, proof, d_old, d_new)
                                    : tap::epoch_check(schema, proof, d_old, d_new);
      std::cout << report.to_text();
      return report.pass() ? kExitOk : kExitVerifyFailed;
    }

    if (monitor_cmd->parsed()) {
      auto types = parse_type_labels(schema, types_csv);
      std::map<uint32_t, tap::MonitorExpectation> expectations;
      std::map<uint32_t, tap::LookupResponse> responses;
      std::map<uint32_t, tap::Digest256> digests;
      size_t pos = 0;
      while (pos <= expect_csv.size()) {
        size_t comma = expect_csv.find(',', pos);
        std::string token =
            expect_csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
        size_t eq = token.find('=');
        if (eq == std::string::npos) {
          throw tap::Error(tap::ErrorCode::malformed, "expect must be epoch=value[,..]");
        }
        uint32_t t = static_cast<uint32_t>(std::stoul(token.substr(0, eq)));
        tap::MonitorExpectation expect;
        expect.types = types;
        std::string value = token.substr(eq + 1);
        if (value != "absent") expect.value = std::stoull(value);
        auto seed_body = expect_body<tap::wire::SeedResponse>(
            client.get("/seed?user=" + user + "&epoch=" + std::to_string(t)));
        expect.seed = seed_body.seed;
        expectations[t] = expect;
        std::string path = "/lookup?user=" + user + "&epoch=" + std::to_string(t) + "&types=";
        for (size_t i = 0; i < types.size(); ++i) path += (i ? "," : "") + std::to_string(types[i]);
        tap::wire::Message msg = client.get(path);
        if (auto* proof = std::get_if<tap::LookupProof>(&msg.body)) {
          responses.emplace(t, *proof);
        } else if (auto* proof = std::get_if<tap::NonExistenceProof>(&msg.body)) {
          responses.emplace(t, *proof);
        } else {
          fail_on_error_body(msg);
        }
        digests[t] = fetch_digest(client, t);
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      tap::MonitorReport report = tap::monitor(schema, user, expectations, responses, digests);
      std::cout << report.to_text();
      return report.clean() ? kExitOk : kExitVerifyFailed;
    }
  } catch (const tap::Error& e) {
    bool usage = e.code() == tap::ErrorCode::malformed ||
                 e.code() == tap::ErrorCode::schema_mismatch ||
                 e.code() == tap::ErrorCode::invalid_quantile;
    std::cerr << "error: " << e.what() << "\n";
    return usage ? kExitUsage : kExitServerError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitServerError;
  }
  return kExitUsage;
}
