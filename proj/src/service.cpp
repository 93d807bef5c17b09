#include "tap/service.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <sodium.h>

#include "tap/errors.hpp"

namespace tap {

using ordered_json = nlohmann::ordered_json;

Schema schema_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema_mismatch, std::string("bad schema json: ") + e.what());
  }
  Schema schema;
  if (j.contains("z")) schema.z = j.at("z").get<uint32_t>();
  if (j.contains("gamma") && !j.at("gamma").is_null()) {
    schema.gamma = j.at("gamma").get<uint64_t>();
  }
  if (j.contains("min_bucket_size")) {
    schema.min_bucket_size = j.at("min_bucket_size").get<uint32_t>();
  }
  for (const auto& a : j.at("attributes")) {
    TypeAttribute attr;
    attr.name = a.at("name").get<std::string>();
    if (a.contains("width")) attr.width = a.at("width").get<uint32_t>();
    for (const auto& [label, code] : a.at("codes").items()) {
      attr.codes[label] = code.get<uint32_t>();
    }
    schema.attributes.push_back(std::move(attr));
  }
  schema.validate();
  return schema;
}

std::string schema_to_json(const Schema& schema) {
  ordered_json attrs = ordered_json::array();
  for (const auto& attr : schema.attributes) {
    ordered_json codes = ordered_json::object();
    for (const auto& [label, code] : attr.codes) codes[label] = code;
    attrs.push_back(ordered_json{{"name", attr.name}, {"width", attr.width}, {"codes", codes}});
  }
  ordered_json j{{"z", schema.z},
                 {"gamma", schema.gamma ? ordered_json(*schema.gamma) : ordered_json(nullptr)},
                 {"min_bucket_size", schema.min_bucket_size},
                 {"attributes", attrs}};
  return j.dump(2);
}

ServiceConfig config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema_mismatch, std::string("bad config json: ") + e.what());
  }
  ServiceConfig config;
  config.schema = schema_from_json(j.at("schema").dump());
  if (j.contains("host")) config.host = j.at("host").get<std::string>();
  if (j.contains("port")) config.port = j.at("port").get<int>();
  if (j.contains("data_dir")) config.data_dir = j.at("data_dir").get<std::string>();
  if (j.contains("wire")) {
    std::string mode = j.at("wire").get<std::string>();
    if (mode != "text" && mode != "binary") {
      throw Error(ErrorCode::schema_mismatch, "wire must be text or binary");
    }
    config.wire_mode = mode == "text" ? wire::Mode::text : wire::Mode::binary;
  }
  return config;
}

std::array<uint8_t, 32> load_or_create_secret(const std::string& data_dir) {
  std::filesystem::create_directories(data_dir);
  std::string path = data_dir + "/secret.key";
  std::array<uint8_t, 32> key{};
  std::ifstream in(path, std::ios::binary);
  if (in.good() && in.read(reinterpret_cast<char*>(key.data()), key.size())) return key;
  if (sodium_init() < 0) throw Error(ErrorCode::io_error, "sodium_init failed");
  randombytes_buf(key.data(), key.size());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.write(reinterpret_cast<const char*>(key.data()), key.size())) {
    throw Error(ErrorCode::io_error, "cannot write " + path);
  }
  return key;
}

namespace {

// Plain comma-separated values, no quoting; all the ingest format needs.
std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw Error(ErrorCode::io_error, "cannot read " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t pos = 0;
    while (true) {
      size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

IngestResult ingest_csv(const ServiceConfig& config, const std::string& csv_path) {
  if (config.data_dir.empty()) {
    throw Error(ErrorCode::io_error, "ingest requires data_dir in the config");
  }
  const Schema& schema = config.schema;
  auto rows = read_csv_rows(csv_path);

  std::map<uint32_t, std::vector<RowInput>> by_epoch;
  size_t total = 0;
  if (!rows.empty()) {
    const auto& header = rows.front();
    if (header.size() != schema.attributes.size() + 3 || header[0] != "Time" ||
        header[1] != "ID" || header.back() != "Value") {
      throw Error(ErrorCode::schema_mismatch, "header must be Time,ID,<type columns>,Value");
    }
    for (size_t i = 0; i < schema.attributes.size(); ++i) {
      if (header[2 + i] != schema.attributes[i].name) {
        throw Error(ErrorCode::schema_mismatch,
                    "type column '" + header[2 + i] + "' does not match the schema");
      }
    }
    for (size_t r = 1; r < rows.size(); ++r) {
      const auto& fields = rows[r];
      if (fields.size() != header.size()) {
        throw Error(ErrorCode::schema_mismatch, "bad column count on row " + std::to_string(r));
      }
      uint32_t time = static_cast<uint32_t>(std::stoul(fields[0]));
      RowInput input;
      input.user_id = fields[1];
      for (size_t i = 0; i < schema.attributes.size(); ++i) {
        input.types.push_back(schema.attributes[i].code_of(fields[2 + i]));
      }
      input.value = std::stoull(fields.back());
      by_epoch[time].push_back(std::move(input));
      ++total;
    }
  }

  Bulletin bulletin(config.data_dir + "/bulletin.log");
  auto key = load_or_create_secret(config.data_dir);
  std::vector<RowInput> initial;
  if (!by_epoch.empty() && by_epoch.begin()->first == 0) initial = by_epoch.begin()->second;
  TapServer server(schema, bulletin, initial, config.data_dir + "/rows.dat", key);
  for (const auto& [epoch, inputs] : by_epoch) {
    if (epoch == 0) continue;
    for (uint32_t t = server.current_epoch() + 1; t < epoch; ++t) server.insert_epoch(t, {});
    server.insert_epoch(epoch, inputs);
  }
  return IngestResult{by_epoch.size(), total, server.digest()};
}

namespace {

wire::Mode pick_mode(const httplib::Request& req, wire::Mode fallback) {
  if (req.has_param("wire")) {
    return req.get_param_value("wire") == "binary" ? wire::Mode::binary : wire::Mode::text;
  }
  return fallback;
}

void send_message(httplib::Response& res, const wire::Message& message, wire::Mode mode,
                  int status = 200) {
  Bytes data = wire::encode(message, mode);
  res.status = status;
  res.set_content(std::string(data.begin(), data.end()),
                  mode == wire::Mode::binary ? "application/octet-stream" : "application/json");
}

void send_error(httplib::Response& res, wire::Mode mode, int status, const std::string& code,
                const std::string& message) {
  wire::Message m;
  m.kind = wire::Kind::error;
  m.body = wire::ErrorBody{code, message};
  send_message(res, m, mode, status);
}

uint32_t parse_u32(const httplib::Request& req, const std::string& name) {
  if (!req.has_param(name)) throw Error(ErrorCode::malformed, "missing parameter " + name);
  return static_cast<uint32_t>(std::stoul(req.get_param_value(name)));
}

std::vector<uint32_t> parse_types(const httplib::Request& req, const Schema& schema) {
  if (!req.has_param("types")) throw Error(ErrorCode::malformed, "missing parameter types");
  std::vector<uint32_t> out;
  std::string text = req.get_param_value("types");
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    std::string token = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    size_t attr_index = out.size();
    if (attr_index >= schema.attributes.size()) {
      throw Error(ErrorCode::schema_mismatch, "too many type codes");
    }
    const TypeAttribute& attr = schema.attributes[attr_index];
    if (!token.empty() && (std::isdigit(token[0]) != 0)) {
      out.push_back(static_cast<uint32_t>(std::stoul(token)));
    } else {
      out.push_back(attr.code_of(token));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.size() != schema.attributes.size()) {
    throw Error(ErrorCode::schema_mismatch, "wrong number of type codes");
  }
  return out;
}

// Range parameters: t_min, t_max, plus one "<attr-name>=lo..hi" per type
// attribute (codes or labels); omitted attributes cover their full range.
RangeSpec parse_spec(const httplib::Request& req, const Schema& schema) {
  RangeSpec spec = RangeSpec::all(schema);
  spec.t_min = parse_u32(req, "t_min");
  spec.t_max = parse_u32(req, "t_max");
  for (size_t i = 0; i < schema.attributes.size(); ++i) {
    const TypeAttribute& attr = schema.attributes[i];
    if (!req.has_param(attr.name)) continue;
    std::string text = req.get_param_value(attr.name);
    size_t sep = text.find("..");
    std::string lo = sep == std::string::npos ? text : text.substr(0, sep);
    std::string hi = sep == std::string::npos ? text : text.substr(sep + 2);
    auto code = [&](const std::string& token) -> uint64_t {
      if (!token.empty() && std::isdigit(token[0]) != 0) return std::stoull(token);
      return attr.code_of(token);
    };
    spec.type_ranges[i] = {code(lo), code(hi)};
  }
  spec.validate(schema);
  return spec;
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed:
    case ErrorCode::schema_mismatch:
    case ErrorCode::invalid_quantile:
    case ErrorCode::empty_range:
    case ErrorCode::unknown_epoch:
    case ErrorCode::epoch_out_of_order:
    case ErrorCode::duplicate_user_in_epoch:
    case ErrorCode::value_out_of_range:
    case ErrorCode::gamma_exceeded:
      return 400;
    default:
      return 500;
  }
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  httplib::Server http;
  std::unique_ptr<Bulletin> bulletin;
  std::unique_ptr<TapServer> server;
  mutable std::shared_mutex mu;
  std::thread worker;

  explicit Impl(ServiceConfig cfg) : config(std::move(cfg)) {
    if (!config.data_dir.empty()) {
      std::filesystem::create_directories(config.data_dir);
      bulletin = std::make_unique<Bulletin>(config.data_dir + "/bulletin.log");
    } else {
      bulletin = std::make_unique<Bulletin>();
    }
    // A non-empty persisted store restores immediately; otherwise the first
    // request decides whether epoch 0 carries an initial table.
    if (!config.data_dir.empty() &&
        std::filesystem::exists(config.data_dir + "/rows.dat") && bulletin->latest_epoch()) {
      server = std::make_unique<TapServer>(config.schema, *bulletin, std::vector<RowInput>{},
                                           config.data_dir + "/rows.dat",
                                           load_or_create_secret(config.data_dir));
    }
    routes();
  }

  TapServer& ensure_server(std::vector<RowInput> initial_rows = {}) {
    if (!server) {
      std::string rows_path =
          config.data_dir.empty() ? std::string{} : config.data_dir + "/rows.dat";
      std::optional<std::array<uint8_t, 32>> key;
      if (!config.data_dir.empty()) key = load_or_create_secret(config.data_dir);
      server = std::make_unique<TapServer>(config.schema, *bulletin, std::move(initial_rows),
                                           rows_path, key);
    }
    return *server;
  }

  void handle(const httplib::Request& req, httplib::Response& res,
              const std::function<wire::Message(wire::Mode)>& fn) {
    wire::Mode mode = pick_mode(req, config.wire_mode);
    try {
      send_message(res, fn(mode), mode);
    } catch (const Error& e) {
      send_error(res, mode, status_for(e.code()), error_code_name(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, mode, 500, "server-error", e.what());
    }
  }

  void routes() {
    http.Get("/digest", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [&](wire::Mode) {
        std::unique_lock lock(mu);
        TapServer& s = ensure_server();
        uint32_t epoch =
            req.has_param("epoch") ? parse_u32(req, "epoch") : s.current_epoch();
        wire::DigestResponse body{epoch, bulletin->get(epoch)};
        return wire::make_message(body);
      });
    });

    http.Get("/schema", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(schema_to_json(config.schema), "application/json");
    });

    http.Post("/epoch", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [&](wire::Mode mode) {
        Bytes body(req.body.begin(), req.body.end());
        wire::Message msg = wire::decode(body, mode);
        auto* epoch_req = std::get_if<wire::EpochRequest>(&msg.body);
        if (!epoch_req) throw Error(ErrorCode::malformed, "expected epoch_request");
        std::unique_lock lock(mu);
        if (!server && epoch_req->epoch == 0) {
          TapServer& s = ensure_server(epoch_req->rows);
          return wire::make_message(wire::EpochResponse{0, s.digest()});
        }
        TapServer& s = ensure_server();
        Digest256 digest = s.insert_epoch(epoch_req->epoch, epoch_req->rows);
        return wire::make_message(wire::EpochResponse{epoch_req->epoch, digest});
      });
    });

    http.Get("/lookup", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [&](wire::Mode) {
        std::shared_lock lock(mu);
        if (!server) throw Error(ErrorCode::unknown_epoch, "no epochs published");
        std::string user = req.get_param_value("user");
        auto types = parse_types(req, config.schema);
        uint32_t epoch = parse_u32(req, "epoch");
        LookupResponse response = server->lookup(user, types, epoch);
        if (auto* proof = std::get_if<LookupProof>(&response)) {
          return wire::make_message(*proof);
        }
        return wire::make_message(std::get<NonExistenceProof>(response));
      });
    });

    http.Get("/sum", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [&](wire::Mode) {
        std::shared_lock lock(mu);
        if (!server) throw Error(ErrorCode::unknown_epoch, "no epochs published");
        return wire::make_message(server->query_aggregate(parse_spec(req, config.schema)));
      });
    });

    http.Get("/minmax", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [&](wire::Mode) {
        std::shared_lock lock(mu);
        if (!server) throw Error(ErrorCode::unknown_epoch, "no epochs published");
        std::string mode_param = req.get_param_value("mode");
        if (mode_param != "min" && mode_param != "max") {
          throw Error(ErrorCode::malformed, "mode must be min or max");
        }
        MinMaxMode mode = mode_param == "min" ? MinMaxMode::min : MinMaxMode::max;
        return wire::make_message(server->query_minmax(parse_spec(req, config.schema), mode));
      });
    });

    http.Get("/quantile", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [&](wire::Mode) {
        std::shared_lock lock(mu);
        if (!server) throw Error(ErrorCode::unknown_epoch, "no epochs published");
        RangeSpec spec = parse_spec(req, config.schema);
        if (req.has_param("candidate")) {
          uint64_t candidate = std::stoull(req.get_param_value("candidate"));
          return wire::make_message(server->prove_quantile_candidate(spec, candidate));
        }
        Fraction q = Fraction::parse(req.get_param_value("q"));
        return wire::make_message(server->query_quantile(spec, q));
      });
    });

    http.Get("/audit", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [&](wire::Mode) {
        std::shared_lock lock(mu);
        if (!server) throw Error(ErrorCode::unknown_epoch, "no epochs published");
        uint32_t t_old = parse_u32(req, "t_old");
        uint32_t t_new = parse_u32(req, "t_new");
        double fraction =
            req.has_param("fraction") ? std::stod(req.get_param_value("fraction")) : 1.0;
        uint64_t seed = req.has_param("seed") ? std::stoull(req.get_param_value("seed")) : 0;
        return wire::make_message(server->audit_proof(t_old, t_new, fraction, seed));
      });
    });

    // Stand-in for the secure per-user seed channel.
    http.Get("/seed", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, [&](wire::Mode) {
        std::shared_lock lock(mu);
        if (!server) throw Error(ErrorCode::unknown_epoch, "no epochs published");
        std::string user = req.get_param_value("user");
        uint32_t epoch = parse_u32(req, "epoch");
        return wire::make_message(wire::SeedResponse{server->epoch_secret(user, epoch)});
      });
    });
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::start() {
  if (impl_->config.port == 0) {
    bound_port_ = impl_->http.bind_to_any_port(impl_->config.host);
  } else {
    if (!impl_->http.bind_to_port(impl_->config.host, impl_->config.port)) {
      throw Error(ErrorCode::io_error, "cannot bind " + impl_->config.host + ":" +
                                           std::to_string(impl_->config.port));
    }
    bound_port_ = impl_->config.port;
  }
  impl_->worker = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return bound_port_;
}

void Service::serve() {
  start();
  impl_->worker.join();
}

void Service::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
  if (impl_ && impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace tap
