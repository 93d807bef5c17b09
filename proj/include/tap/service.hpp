#pragma once

#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "tap/bulletin.hpp"
#include "tap/schema.hpp"
#include "tap/server.hpp"
#include "tap/wire.hpp"

namespace tap {

// Schema/config (de)serialization shared by the service and the CLI.
Schema schema_from_json(const std::string& text);
std::string schema_to_json(const Schema& schema);

struct ServiceConfig {
  Schema schema;
  std::string host = "127.0.0.1";
  int port = 8437;
  std::string data_dir;                      // empty = in-memory
  wire::Mode wire_mode = wire::Mode::text;   // default response encoding
};

ServiceConfig config_from_json(const std::string& text);

// Loads data_dir/secret.key, creating it on first use. Epoch secrets are
// PRF outputs of this key, so it must survive restarts.
std::array<uint8_t, 32> load_or_create_secret(const std::string& data_dir);

// CSV ingestion: header Time,ID,<one column per type attribute>,Value; one
// insert per distinct Time in ascending order (gaps become empty epochs).
// Requires a data_dir so the ingested state survives for `serve`.
struct IngestResult {
  size_t epochs = 0;  // distinct Time values in the file
  size_t rows = 0;
  Digest256 digest{};
};

IngestResult ingest_csv(const ServiceConfig& config, const std::string& csv_path);

// HTTP facade over TapServer. The underlying server is created lazily: the
// first POST /epoch with epoch 0 becomes the initial table; any other first
// request initializes an empty epoch 0.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  // Binds and serves on config host/port (or an ephemeral port when
  // port == 0). Returns the bound port. serve() blocks; start() runs in a
  // background thread for tests.
  int start();
  void serve();
  void stop();
  int port() const { return bound_port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int bound_port_ = 0;
};

}  // namespace tap
