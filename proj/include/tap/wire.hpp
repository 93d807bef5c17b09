#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "tap/proofs.hpp"
#include "tap/schema.hpp"
#include "tap/verifier.hpp"

namespace tap::wire {

inline constexpr uint8_t kWireVersion = 1;

enum class Kind : uint8_t {
  error = 0,
  epoch_request = 1,
  epoch_response = 2,
  lookup_request = 3,
  lookup_inclusion = 4,
  lookup_nonexistence = 5,
  aggregate_request = 6,
  aggregate_proof = 7,
  minmax_request = 8,
  minmax_proof = 9,
  quantile_request = 10,
  quantile_proof = 11,
  audit_request = 12,
  audit_proof = 13,
  digest_request = 14,
  digest_response = 15,
  seed_request = 16,
  seed_response = 17,
};

const char* kind_name(Kind kind);

enum class Mode : uint8_t { text = 0, binary = 1 };

struct ErrorBody {
  std::string code;
  std::string message;

  bool operator==(const ErrorBody&) const = default;
};

struct EpochRequest {
  uint32_t epoch = 0;
  std::vector<RowInput> rows;

  bool operator==(const EpochRequest&) const = default;
};

struct EpochResponse {
  uint32_t epoch = 0;
  Digest256 digest{};

  bool operator==(const EpochResponse&) const = default;
};

struct LookupRequest {
  std::string user_id;
  std::vector<uint32_t> types;
  uint32_t epoch = 0;

  bool operator==(const LookupRequest&) const = default;
};

struct AggregateRequest {
  RangeSpec spec;

  bool operator==(const AggregateRequest&) const = default;
};

struct MinMaxRequest {
  RangeSpec spec;
  MinMaxMode mode = MinMaxMode::min;

  bool operator==(const MinMaxRequest&) const = default;
};

struct QuantileRequest {
  RangeSpec spec;
  Fraction q;
  std::optional<uint64_t> candidate;  // prove a caller-chosen v* instead

  bool operator==(const QuantileRequest&) const = default;
};

struct AuditRequest {
  uint32_t t_old = 0;
  uint32_t t_new = 0;
  double sample_fraction = 1.0;
  uint64_t sample_seed = 0;

  bool operator==(const AuditRequest&) const = default;
};

struct DigestRequest {
  std::optional<uint32_t> epoch;  // latest when absent

  bool operator==(const DigestRequest&) const = default;
};

struct DigestResponse {
  uint32_t epoch = 0;
  Digest256 digest{};

  bool operator==(const DigestResponse&) const = default;
};

struct SeedRequest {
  std::string user_id;
  uint32_t epoch = 0;

  bool operator==(const SeedRequest&) const = default;
};

struct SeedResponse {
  Scalar seed;

  bool operator==(const SeedResponse&) const = default;
};

using Body = std::variant<ErrorBody, EpochRequest, EpochResponse, LookupRequest, LookupProof,
                          NonExistenceProof, AggregateRequest, AggregateProof, MinMaxRequest,
                          MinMaxProof, QuantileRequest, QuantileProof, AuditRequest, AuditProof,
                          DigestRequest, DigestResponse, SeedRequest, SeedResponse>;

struct Message {
  uint8_t version = kWireVersion;
  Kind kind = Kind::error;
  Body body;

  bool operator==(const Message&) const = default;
};

Message make_message(Body body);

Bytes encode(const Message& message, Mode mode);
// Throws tap::Error(malformed) on any framing, kind, or field error.
Message decode(std::span<const uint8_t> data, Mode mode);

}  // namespace tap::wire
