#include "tap/row_store.hpp"

#include <fstream>

#include "tap/errors.hpp"

namespace tap {

RowStore::RowStore(size_t type_count) : type_count_(type_count) {}

RowStore::RowStore(size_t type_count, const std::string& path)
    : type_count_(type_count), path_(path) {
  load(path);
}

void RowStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) return;
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  size_t pos = 0;
  auto need = [&](size_t n) {
    if (pos + n > buf.size()) throw Error(ErrorCode::io_error, "truncated row store " + path);
  };
  while (pos < buf.size()) {
    Row row;
    need(4);
    row.time = read_u32_be({buf.data() + pos, 4});
    pos += 4;
    need(4);
    uint32_t id_len = read_u32_be({buf.data() + pos, 4});
    pos += 4;
    need(id_len);
    row.user_id.assign(reinterpret_cast<const char*>(buf.data() + pos), id_len);
    pos += id_len;
    for (size_t i = 0; i < type_count_; ++i) {
      need(4);
      row.types.push_back(read_u32_be({buf.data() + pos, 4}));
      pos += 4;
    }
    need(4);
    row.value = read_u32_be({buf.data() + pos, 4});
    pos += 4;
    need(32);
    row.seed = Scalar::deserialize({buf.data() + pos, 32});
    pos += 32;
    size_t index = rows_.size();
    by_bucket_[BucketKey{row.time, row.types}].push_back(index);
    by_user_epoch_[{row.user_id, row.time}] = index;
    rows_.push_back(std::move(row));
  }
}

void RowStore::append(const Row& row) {
  if (row.types.size() != type_count_) {
    throw Error(ErrorCode::schema_mismatch, "wrong type-code count");
  }
  auto key = std::make_pair(row.user_id, row.time);
  if (by_user_epoch_.count(key)) {
    throw Error(ErrorCode::duplicate_user_in_epoch,
                row.user_id + " already has a row at epoch " + std::to_string(row.time));
  }
  persist(row);
  size_t index = rows_.size();
  by_bucket_[BucketKey{row.time, row.types}].push_back(index);
  by_user_epoch_[key] = index;
  rows_.push_back(row);
}

void RowStore::persist(const Row& row) {
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out.good()) throw Error(ErrorCode::io_error, "cannot open row store " + path_);
  Bytes record;
  put_u32_be(record, row.time);
  put_u32_be(record, static_cast<uint32_t>(row.user_id.size()));
  record.insert(record.end(), row.user_id.begin(), row.user_id.end());
  for (uint32_t code : row.types) put_u32_be(record, code);
  put_u32_be(record, static_cast<uint32_t>(row.value));
  Bytes seed = row.seed.serialize();
  record.insert(record.end(), seed.begin(), seed.end());
  out.write(reinterpret_cast<const char*>(record.data()), record.size());
  if (!out.good()) throw Error(ErrorCode::io_error, "row store write failed");
}

std::vector<Row> RowStore::bucket(const BucketKey& key) const {
  std::vector<Row> out;
  auto it = by_bucket_.find(key);
  if (it == by_bucket_.end()) return out;
  out.reserve(it->second.size());
  for (size_t index : it->second) out.push_back(rows_[index]);
  return out;
}

const Row* RowStore::find(const std::string& user_id, uint32_t time) const {
  auto it = by_user_epoch_.find({user_id, time});
  if (it == by_user_epoch_.end()) return nullptr;
  return &rows_[it->second];
}

std::vector<BucketKey> RowStore::buckets_in_time_range(uint32_t t_min, uint32_t t_max) const {
  std::vector<BucketKey> out;
  for (const auto& [key, rows] : by_bucket_) {
    if (key.time >= t_min && key.time <= t_max && !rows.empty()) out.push_back(key);
  }
  return out;
}

std::vector<BucketKey> RowStore::all_buckets() const {
  std::vector<BucketKey> out;
  for (const auto& [key, rows] : by_bucket_) {
    if (!rows.empty()) out.push_back(key);
  }
  return out;
}

}  // namespace tap
