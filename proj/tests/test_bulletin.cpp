#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "tap/bulletin.hpp"
#include "tap/errors.hpp"

using namespace tap;

namespace {

Digest256 digest_of(uint8_t tag) {
  Digest256 d{};
  d.fill(tag);
  return d;
}

struct TempFile {
  std::string path;
  TempFile() {
    path = (std::filesystem::temp_directory_path() /
            ("tap_bulletin_" + std::to_string(std::random_device{}()) + ".log"))
               .string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("publish, get, idempotence, equivocation, regression") {
  Bulletin log;
  log.publish(0, digest_of(0xa0));
  CHECK(log.get(0) == digest_of(0xa0));

  // Idempotent re-publish of the identical digest.
  log.publish(0, digest_of(0xa0));
  CHECK(log.entries().size() == 1);

  CHECK_THROWS_AS(log.publish(0, digest_of(0xa1)), Error);

  log.publish(1, digest_of(0xa1));
  CHECK_THROWS_AS(log.publish(1, digest_of(0xff)), Error);
  CHECK_THROWS_AS(log.get(5), Error);
  CHECK(log.latest_epoch() == uint64_t{1});

  // Regression: an epoch below the latest, even if unused, is rejected.
  Bulletin log2;
  log2.publish(3, digest_of(1));
  CHECK_THROWS_AS(log2.publish(2, digest_of(2)), Error);
}

TEST_CASE("append-only snapshot property over random sequences") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 20; ++trial) {
    Bulletin log;
    std::vector<BulletinEntry> snapshot;
    uint64_t epoch = 0;
    for (int i = 0; i < 12; ++i) {
      epoch += 1 + rng() % 3;
      log.publish(epoch, digest_of(static_cast<uint8_t>(rng())));
      // Older snapshots remain a strict prefix of the current log.
      const auto& now = log.entries();
      REQUIRE(snapshot.size() <= now.size());
      for (size_t k = 0; k < snapshot.size(); ++k) CHECK(snapshot[k] == now[k]);
      if (rng() % 2 == 0) snapshot = now;
    }
    CHECK(log.verify_chain());
  }
}

TEST_CASE("file persistence and hash chain") {
  TempFile tmp;
  {
    Bulletin log(tmp.path);
    log.publish(0, digest_of(7));
    log.publish(1, digest_of(8));
    log.publish(4, digest_of(9));
  }
  Bulletin reloaded(tmp.path);
  CHECK(reloaded.entries().size() == 3);
  CHECK(reloaded.get(4) == digest_of(9));
  CHECK(reloaded.verify_chain());
  CHECK_THROWS_AS(reloaded.publish(4, digest_of(1)), Error);
  reloaded.publish(5, digest_of(10));

  // Corrupting a record breaks the chain on load.
  {
    std::fstream f(tmp.path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(9);
    char b = 0x5a;
    f.write(&b, 1);
  }
  CHECK_THROWS_AS(Bulletin(tmp.path), Error);
}
