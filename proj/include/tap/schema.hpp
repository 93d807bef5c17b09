#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tap/bytes.hpp"
#include "tap/crypto.hpp"

namespace tap {

inline constexpr uint32_t kTimeBits = 32;

struct TypeAttribute {
  std::string name;
  uint32_t width = 8;                      // bits in the prefix key
  std::map<std::string, uint32_t> codes;   // dictionary: label -> code

  uint32_t code_of(const std::string& label) const;
  std::string label_of(uint32_t code) const;  // reverse lookup, empty if unknown
};

struct Schema {
  std::vector<TypeAttribute> attributes;
  uint32_t z = 2;                       // committed powers v^1..v^z
  std::optional<uint64_t> gamma;        // optional per-value bound
  uint32_t min_bucket_size = 0;         // aggregate-refusal policy knob, 0 = off

  void validate() const;  // throws schema-mismatch
  size_t key_length() const;
  size_t attribute_offset(size_t index) const;  // bit offset within the key

  BitString key_for(uint32_t time, const std::vector<uint32_t>& type_codes) const;
  uint32_t time_of_key(const BitString& key) const;
  std::vector<uint32_t> types_of_key(const BitString& key) const;
};

struct RowInput {
  std::string user_id;
  std::vector<uint32_t> types;
  uint64_t value = 0;

  bool operator==(const RowInput&) const = default;
};

struct Row {
  uint32_t time = 0;
  std::string user_id;
  std::vector<uint32_t> types;
  uint64_t value = 0;
  Scalar seed;

  bool operator==(const Row&) const = default;
};

struct BucketKey {
  uint32_t time = 0;
  std::vector<uint32_t> types;

  BitString to_prefix_key(const Schema& schema) const { return schema.key_for(time, types); }
  auto operator<=>(const BucketKey&) const = default;
};

// Query range over the time attribute and each type attribute, all bounds
// inclusive.
struct RangeSpec {
  uint32_t t_min = 0;
  uint32_t t_max = 0;
  std::vector<std::pair<uint64_t, uint64_t>> type_ranges;

  static RangeSpec all(const Schema& schema);
  static RangeSpec single_bucket(const Schema& schema, uint32_t time,
                                 const std::vector<uint32_t>& types);
  void validate(const Schema& schema) const;
  bool contains(const Schema& schema, const BucketKey& bucket) const;

  bool operator==(const RangeSpec&) const = default;
};

// True when the partially-fixed key bits of `prefix` can still reach a key
// inside `spec` on every attribute.
bool range_overlap(const Schema& schema, const RangeSpec& spec, const BitString& prefix);

Digest256 id_hash(const std::string& user_id, uint32_t time);

}  // namespace tap
