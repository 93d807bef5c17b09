#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tap/bytes.hpp"

namespace tap {

struct BulletinEntry {
  uint64_t epoch = 0;
  Digest256 digest{};
  uint64_t published_at = 0;  // unix seconds
  Digest256 prev_hash{};      // hash chain over on-disk records

  bool operator==(const BulletinEntry&) const = default;
};

// Append-only digest log with equivocation detection. Optionally backed by a
// file of fixed records: epoch u64-BE || digest 32B || prev-record-hash 32B.
class Bulletin {
 public:
  Bulletin() = default;                       // in-memory
  explicit Bulletin(const std::string& path);  // file-backed, loads existing log

  void publish(uint64_t epoch, const Digest256& digest);
  Digest256 get(uint64_t epoch) const;  // throws unknown-epoch
  std::optional<uint64_t> latest_epoch() const;
  const std::vector<BulletinEntry>& entries() const { return entries_; }
  bool verify_chain() const;

 private:
  Digest256 record_hash(const BulletinEntry& entry) const;
  void persist(const BulletinEntry& entry);

  std::vector<BulletinEntry> entries_;
  std::string path_;
};

}  // namespace tap
