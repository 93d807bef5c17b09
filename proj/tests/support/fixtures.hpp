#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tap/bulletin.hpp"
#include "tap/schema.hpp"
#include "tap/server.hpp"

namespace tap::test {

// The 8-row worked example: residential/industrial consumption over two
// epochs. residential = 0, industrial = 1.
inline Schema example_schema(uint32_t z = 2, std::optional<uint64_t> gamma = std::nullopt) {
  Schema schema;
  schema.z = z;
  schema.gamma = gamma;
  schema.attributes = {TypeAttribute{"kind", 1, {{"residential", 0}, {"industrial", 1}}}};
  return schema;
}

struct ExampleFixture {
  Schema schema;
  Bulletin bulletin;
  std::unique_ptr<TapServer> server;

  explicit ExampleFixture(uint32_t z = 2, std::optional<uint64_t> gamma = std::nullopt) {
    schema = example_schema(z, gamma);
    std::vector<RowInput> epoch0 = {
        {"Alice", {0}, 11},
        {"Bob", {0}, 24},
        {"Carol", {0}, 13},
    };
    server = std::make_unique<TapServer>(schema, bulletin, epoch0);
    server->insert_epoch(1, {
                                {"Alice", {0}, 19},
                                {"Bob", {0}, 26},
                                {"Carol", {0}, 27},
                                {"Dave", {0}, 26},
                                {"Erin", {1}, 36},
                            });
  }

  Digest256 digest() const { return server->digest(); }
  RangeSpec full_range() const {
    RangeSpec spec = RangeSpec::all(schema);
    spec.t_min = 0;
    spec.t_max = 1;
    return spec;
  }
  RangeSpec epoch0_residential() const {
    RangeSpec spec = RangeSpec::all(schema);
    spec.t_min = spec.t_max = 0;
    spec.type_ranges[0] = {0, 0};
    return spec;
  }
};

inline std::vector<uint64_t> example_values() { return {11, 24, 13, 19, 26, 27, 26, 36}; }

// Brute-force q-quantile check on plaintext values.
inline bool quantile_valid(std::vector<uint64_t> values, const Fraction& q, uint64_t x) {
  std::sort(values.begin(), values.end());
  uint128 n = values.size();
  uint128 leq = 0, geq = 0;
  for (uint64_t v : values) {
    if (v <= x) ++leq;
    if (v >= x) ++geq;
  }
  return leq * q.den >= n * q.num && geq * q.den >= n * (q.den - q.num);
}

}  // namespace tap::test
