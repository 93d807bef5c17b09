#include "tap/schema.hpp"

#include <algorithm>

#include "tap/errors.hpp"

namespace tap {

uint32_t TypeAttribute::code_of(const std::string& label) const {
  auto it = codes.find(label);
  if (it == codes.end()) {
    throw Error(ErrorCode::schema_mismatch, "unknown code '" + label + "' for attribute " + name);
  }
  return it->second;
}

std::string TypeAttribute::label_of(uint32_t code) const {
  for (const auto& [label, c] : codes) {
    if (c == code) return label;
  }
  return "";
}

void Schema::validate() const {
  if (z < 1 || z > 4) throw Error(ErrorCode::schema_mismatch, "z must be in [1,4]");
  for (const auto& attr : attributes) {
    if (attr.width == 0 || attr.width > 32) {
      throw Error(ErrorCode::schema_mismatch, "attribute width must be in [1,32]: " + attr.name);
    }
    for (const auto& [label, code] : attr.codes) {
      if (attr.width < 32 && (uint64_t(code) >> attr.width) != 0) {
        throw Error(ErrorCode::schema_mismatch,
                    "code for '" + label + "' does not fit width of " + attr.name);
      }
    }
  }
}

size_t Schema::key_length() const {
  size_t len = kTimeBits;
  for (const auto& attr : attributes) len += attr.width;
  return len;
}

size_t Schema::attribute_offset(size_t index) const {
  size_t off = kTimeBits;
  for (size_t i = 0; i < index; ++i) off += attributes[i].width;
  return off;
}

BitString Schema::key_for(uint32_t time, const std::vector<uint32_t>& type_codes) const {
  if (type_codes.size() != attributes.size()) {
    throw Error(ErrorCode::schema_mismatch, "wrong number of type codes");
  }
  BitString key;
  key.append_uint(time, kTimeBits);
  for (size_t i = 0; i < attributes.size(); ++i) {
    key.append_uint(type_codes[i], attributes[i].width);
  }
  return key;
}

uint32_t Schema::time_of_key(const BitString& key) const {
  return static_cast<uint32_t>(key.slice_uint(0, kTimeBits));
}

std::vector<uint32_t> Schema::types_of_key(const BitString& key) const {
  std::vector<uint32_t> out;
  size_t off = kTimeBits;
  for (const auto& attr : attributes) {
    out.push_back(static_cast<uint32_t>(key.slice_uint(off, off + attr.width)));
    off += attr.width;
  }
  return out;
}

RangeSpec RangeSpec::all(const Schema& schema) {
  RangeSpec spec;
  spec.t_min = 0;
  spec.t_max = UINT32_MAX;
  for (const auto& attr : schema.attributes) {
    uint64_t max_code = attr.width >= 64 ? UINT64_MAX : (uint64_t(1) << attr.width) - 1;
    spec.type_ranges.emplace_back(0, max_code);
  }
  return spec;
}

RangeSpec RangeSpec::single_bucket(const Schema& schema, uint32_t time,
                                   const std::vector<uint32_t>& types) {
  if (types.size() != schema.attributes.size()) {
    throw Error(ErrorCode::schema_mismatch, "wrong number of type codes");
  }
  RangeSpec spec;
  spec.t_min = spec.t_max = time;
  for (uint32_t code : types) spec.type_ranges.emplace_back(code, code);
  return spec;
}

void RangeSpec::validate(const Schema& schema) const {
  if (t_min > t_max) throw Error(ErrorCode::malformed, "t_min > t_max");
  if (type_ranges.size() != schema.attributes.size()) {
    throw Error(ErrorCode::schema_mismatch, "wrong number of type ranges");
  }
  for (size_t i = 0; i < type_ranges.size(); ++i) {
    if (type_ranges[i].first > type_ranges[i].second) {
      throw Error(ErrorCode::malformed, "empty type range for " + schema.attributes[i].name);
    }
  }
}

bool RangeSpec::contains(const Schema& schema, const BucketKey& bucket) const {
  if (bucket.time < t_min || bucket.time > t_max) return false;
  for (size_t i = 0; i < type_ranges.size(); ++i) {
    uint64_t code = bucket.types[i];
    if (code < type_ranges[i].first || code > type_ranges[i].second) return false;
  }
  (void)schema;
  return true;
}

bool range_overlap(const Schema& schema, const RangeSpec& spec, const BitString& prefix) {
  size_t len = prefix.size();
  // Attribute layout: time at [0,32), then each type attribute in order.
  auto attr_overlaps = [&](size_t start, size_t width, uint64_t lo, uint64_t hi) {
    size_t fixed = len > start ? std::min<size_t>(len - start, width) : 0;
    if (fixed == 0) return true;  // attribute entirely free
    uint64_t p = prefix.slice_uint(start, start + fixed);
    size_t free_bits = width - fixed;
    uint64_t reach_lo = p << free_bits;
    uint64_t reach_hi = reach_lo + ((free_bits >= 64 ? ~uint64_t(0) : ((uint64_t(1) << free_bits) - 1)));
    return reach_lo <= hi && reach_hi >= lo;
  };

  if (!attr_overlaps(0, kTimeBits, spec.t_min, spec.t_max)) return false;
  size_t off = kTimeBits;
  for (size_t i = 0; i < schema.attributes.size(); ++i) {
    uint32_t width = schema.attributes[i].width;
    if (!attr_overlaps(off, width, spec.type_ranges[i].first, spec.type_ranges[i].second)) {
      return false;
    }
    off += width;
  }
  return true;
}

Digest256 id_hash(const std::string& user_id, uint32_t time) {
  HashWriter w;
  w.write(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(user_id.data()),
                                   user_id.size()));
  w.write_u32(time);
  return w.finish();
}

}  // namespace tap
