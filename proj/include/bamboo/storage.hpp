#pragma once

#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bamboo/common.hpp"
#include "bamboo/lock_entry.hpp"

namespace bamboo {

struct TableSpec {
  std::string name;
  uint64_t row_count = 0;
  uint32_t payload_width = 100;
};

struct VersionTag {
  TxnUid writer = 0;  // 0 = initial load
  uint64_t seq = 0;
};

// Fixed-schema in-memory table over a dense key range [0, row_count).
// Row set is immutable after load; payload bytes mutate only through
// install() which runs under the tuple's lock-entry latch.
class Table {
 public:
  Table(const TableSpec& spec, uint64_t seed);

  const std::string& name() const { return name_; }
  uint64_t rows() const { return rows_; }
  uint32_t width() const { return width_; }

  PayloadView payload(Key key) const {
    check_key(key);
    return PayloadView(data_.data() + key * width_, width_);
  }

  VersionTag version(Key key) const {
    check_key(key);
    return tags_[key];
  }

  // Commit-time install of a transaction's local copy. Caller must hold
  // the tuple's lock-entry latch and the commit path per the protocol.
  VersionTag install(Key key, PayloadView value, TxnUid writer);

  LockEntry& lock_entry(Key key) {
    check_key(key);
    return entries_[key];
  }

  // Deterministic fill pattern: byte i of row `key` under `seed` is the
  // low byte of splitmix64(seed ^ key) rotated through position i.
  static uint8_t fill_byte(uint64_t seed, Key key, uint32_t i) {
    uint64_t v = splitmix64(seed ^ (key * 0x9e3779b97f4a7c15ULL));
    return static_cast<uint8_t>((v >> ((i % 8) * 8)) ^ (i / 8));
  }

 private:
  void check_key(Key key) const;

  std::string name_;
  uint64_t rows_;
  uint32_t width_;
  std::vector<uint8_t> data_;
  std::vector<VersionTag> tags_;
  std::unique_ptr<LockEntry[]> entries_;
};

std::unique_ptr<Table> load_table(const TableSpec& spec, uint64_t seed);

struct LogRecord {
  TxnUid txn = 0;
  uint64_t seq = 0;
  uint32_t write_set_size = 0;
};

// Append-only commit log stub. One mutex serializes appends so commit
// sequence numbers are strictly increasing and gap-free; the assigned
// number is the transaction's commit point.
class LogSink {
 public:
  uint64_t append(TxnUid txn, uint32_t write_set_size);

  // Mirror records to a file, one `txn_id,commit_seq,write_set_size`
  // line per append.
  void set_mirror(const std::string& path);

  uint64_t size() const;
  std::vector<LogRecord> snapshot() const;

 private:
  mutable std::mutex mu_;
  std::vector<LogRecord> records_;
  std::optional<std::ofstream> mirror_;
};

}  // namespace bamboo
