#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tap/schema.hpp"

namespace tap {

// Embedded row store: append-only record file with in-memory indexes.
// Record layout: time u32-BE || id-len u32-BE || id UTF-8 || type codes
// (u32-BE each, count fixed by schema) || value u32-BE || seed 32 bytes.
class RowStore {
 public:
  explicit RowStore(size_t type_count);                          // in-memory
  RowStore(size_t type_count, const std::string& path);          // file-backed

  void append(const Row& row);  // throws duplicate-user-in-epoch
  const std::vector<Row>& rows() const { return rows_; }

  std::vector<Row> bucket(const BucketKey& key) const;
  const Row* find(const std::string& user_id, uint32_t time) const;
  std::vector<BucketKey> buckets_in_time_range(uint32_t t_min, uint32_t t_max) const;
  std::vector<BucketKey> all_buckets() const;

 private:
  void load(const std::string& path);
  void persist(const Row& row);

  size_t type_count_;
  std::string path_;
  std::vector<Row> rows_;
  std::map<BucketKey, std::vector<size_t>> by_bucket_;
  std::map<std::pair<std::string, uint32_t>, size_t> by_user_epoch_;
};

}  // namespace tap
