#include <thread>

#include "bamboo/storage.hpp"
#include "doctest.h"

using namespace bamboo;

TEST_CASE("load: minimal table has key 0 with version (nil,0)") {
  auto t = load_table(TableSpec{"t", 1, 100}, 7);
  CHECK(t->rows() == 1);
  CHECK(t->version(0).writer == 0);
  CHECK(t->version(0).seq == 0);
  CHECK(t->payload(0).size() == 100);
}

TEST_CASE("load: zero rows is a configuration error") {
  CHECK_THROWS_AS(load_table(TableSpec{"t", 0, 100}, 7), std::invalid_argument);
}

TEST_CASE("load: deterministic given a seed") {
  auto a = load_table(TableSpec{"t", 1000, 64}, 42);
  auto b = load_table(TableSpec{"t", 1000, 64}, 42);
  for (Key k = 0; k < 1000; ++k) {
    auto pa = a->payload(k);
    auto pb = b->payload(k);
    REQUIRE(std::equal(pa.begin(), pa.end(), pb.begin()));
  }
  auto c = load_table(TableSpec{"t", 1000, 64}, 43);
  bool any_diff = false;
  for (Key k = 0; k < 1000 && !any_diff; ++k) {
    auto pa = a->payload(k);
    auto pc = c->payload(k);
    any_diff = !std::equal(pa.begin(), pa.end(), pc.begin());
  }
  CHECK(any_diff);
}

TEST_CASE("load: 100k rows x 10x100B round-trips against the fill pattern") {
  const uint64_t seed = 99;
  auto t = load_table(TableSpec{"ycsb", 100000, 1000}, seed);
  auto p = t->payload(99999);
  REQUIRE(p.size() == 1000);
  // independent recomputation of the documented pattern
  for (uint32_t i = 0; i < 1000; ++i) {
    uint64_t v = splitmix64(seed ^ (99999ULL * 0x9e3779b97f4a7c15ULL));
    uint8_t expect = static_cast<uint8_t>((v >> ((i % 8) * 8)) ^ (i / 8));
    REQUIRE(p[i] == expect);
  }
}

TEST_CASE("install: version tags are (writer, prev_seq+1)") {
  auto t = load_table(TableSpec{"t", 4, 8}, 1);
  Payload v(8, 0xab);
  auto tag1 = t->install(2, v, 101);
  CHECK(tag1.writer == 101);
  CHECK(tag1.seq == 1);
  auto tag2 = t->install(2, v, 102);
  CHECK(tag2.writer == 102);
  CHECK(tag2.seq == 2);
  CHECK(t->payload(2)[0] == 0xab);
}

TEST_CASE("install: unknown key is a not-found error") {
  auto t = load_table(TableSpec{"t", 4, 8}, 1);
  Payload v(8, 0);
  CHECK_THROWS_AS(t->install(4, v, 1), std::out_of_range);
}

TEST_CASE("install: 1000 installs reach sequence 1000") {
  auto t = load_table(TableSpec{"t", 1, 8}, 1);
  Payload v(8, 1);
  VersionTag tag;
  for (int i = 0; i < 1000; ++i) tag = t->install(0, v, i + 1);
  CHECK(tag.seq == 1000);
}

TEST_CASE("log: sequence numbers follow arrival order") {
  LogSink log;
  CHECK(log.append(3, 1) == 1);
  CHECK(log.append(7, 2) == 2);
  auto recs = log.snapshot();
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].txn == 3);
  CHECK(recs[1].txn == 7);
}

TEST_CASE("log: concurrent committers get a gap-free permutation") {
  LogSink log;
  const int kThreads = 8, kPer = 2000;
  std::vector<std::thread> ws;
  for (int w = 0; w < kThreads; ++w) {
    ws.emplace_back([&log, w] {
      for (int i = 0; i < kPer; ++i) log.append(w * kPer + i + 1, 1);
    });
  }
  for (auto& t : ws) t.join();
  auto recs = log.snapshot();
  REQUIRE(recs.size() == kThreads * kPer);
  std::vector<bool> seen(recs.size() + 1, false);
  for (const auto& r : recs) {
    REQUIRE(r.seq >= 1);
    REQUIRE(r.seq <= recs.size());
    REQUIRE(!seen[r.seq]);
    seen[r.seq] = true;
  }
}

TEST_CASE("log: mirror file format") {
  std::string path = "/tmp/bamboo_log_mirror_test.txt";
  {
    LogSink log;
    log.set_mirror(path);
    log.append(12, 3);
    log.append(5, 0);
  }
  std::ifstream f(path);
  std::string l1, l2;
  std::getline(f, l1);
  std::getline(f, l2);
  CHECK(l1 == "12,1,3");
  CHECK(l2 == "5,2,0");
}
