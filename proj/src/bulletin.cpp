#include "tap/bulletin.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include "tap/crypto.hpp"
#include "tap/errors.hpp"

namespace tap {

Bulletin::Bulletin(const std::string& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) return;  // fresh log
  std::vector<uint8_t> record(8 + 32 + 32);
  while (in.read(reinterpret_cast<char*>(record.data()), record.size())) {
    BulletinEntry entry;
    entry.epoch = read_u64_be(record);
    std::copy(record.begin() + 8, record.begin() + 40, entry.digest.begin());
    std::copy(record.begin() + 40, record.end(), entry.prev_hash.begin());
    Digest256 expected_prev = entries_.empty() ? Digest256{} : record_hash(entries_.back());
    if (entry.prev_hash != expected_prev) {
      throw Error(ErrorCode::io_error, "bulletin hash chain broken at epoch " +
                                           std::to_string(entry.epoch));
    }
    entries_.push_back(entry);
  }
}

Digest256 Bulletin::record_hash(const BulletinEntry& entry) const {
  HashWriter w;
  w.write_u64(entry.epoch);
  w.write(entry.digest);
  w.write(entry.prev_hash);
  return w.finish();
}

void Bulletin::publish(uint64_t epoch, const Digest256& digest) {
  for (const auto& entry : entries_) {
    if (entry.epoch == epoch) {
      if (entry.digest == digest) return;  // idempotent re-publish
      throw Error(ErrorCode::equivocation_attempt,
                  "epoch " + std::to_string(epoch) + " already has a different digest");
    }
  }
  if (!entries_.empty() && epoch <= entries_.back().epoch) {
    throw Error(ErrorCode::epoch_regression, "epoch " + std::to_string(epoch) + " not increasing");
  }
  BulletinEntry entry;
  entry.epoch = epoch;
  entry.digest = digest;
  entry.published_at = static_cast<uint64_t>(std::time(nullptr));
  entry.prev_hash = entries_.empty() ? Digest256{} : record_hash(entries_.back());
  persist(entry);
  entries_.push_back(entry);
}

void Bulletin::persist(const BulletinEntry& entry) {
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out.good()) throw Error(ErrorCode::io_error, "cannot open bulletin log " + path_);
  Bytes record;
  put_u64_be(record, entry.epoch);
  record.insert(record.end(), entry.digest.begin(), entry.digest.end());
  record.insert(record.end(), entry.prev_hash.begin(), entry.prev_hash.end());
  out.write(reinterpret_cast<const char*>(record.data()), record.size());
  if (!out.good()) throw Error(ErrorCode::io_error, "bulletin write failed");
}

Digest256 Bulletin::get(uint64_t epoch) const {
  for (const auto& entry : entries_) {
    if (entry.epoch == epoch) return entry.digest;
  }
  throw Error(ErrorCode::unknown_epoch, "no digest for epoch " + std::to_string(epoch));
}

std::optional<uint64_t> Bulletin::latest_epoch() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.back().epoch;
}

bool Bulletin::verify_chain() const {
  Digest256 prev{};
  for (const auto& entry : entries_) {
    if (entry.prev_hash != prev) return false;
    prev = record_hash(entry);
  }
  return true;
}

}  // namespace tap
