#include "bamboo/storage.hpp"

#include <stdexcept>

namespace bamboo {

Table::Table(const TableSpec& spec, uint64_t seed)
    : name_(spec.name), rows_(spec.row_count), width_(spec.payload_width) {
  if (rows_ == 0) throw std::invalid_argument("table '" + name_ + "': row count must be >= 1");
  if (width_ == 0) throw std::invalid_argument("table '" + name_ + "': payload width must be >= 1");
  data_.resize(rows_ * width_);
  tags_.assign(rows_, VersionTag{});
  entries_ = std::make_unique<LockEntry[]>(rows_);
  for (Key k = 0; k < rows_; ++k) {
    uint8_t* row = data_.data() + k * width_;
    for (uint32_t i = 0; i < width_; ++i) row[i] = fill_byte(seed, k, i);
  }
}

void Table::check_key(Key key) const {
  if (key >= rows_) {
    throw std::out_of_range("table '" + name_ + "': key " + std::to_string(key) +
                            " out of range (rows=" + std::to_string(rows_) + ")");
  }
}

VersionTag Table::install(Key key, PayloadView value, TxnUid writer) {
  check_key(key);
  if (value.size() != width_) {
    throw std::invalid_argument("install: payload width mismatch on table '" + name_ + "'");
  }
  std::copy(value.begin(), value.end(), data_.begin() + key * width_);
  VersionTag& tag = tags_[key];
  tag = VersionTag{writer, tag.seq + 1};
  return tag;
}

std::unique_ptr<Table> load_table(const TableSpec& spec, uint64_t seed) {
  return std::make_unique<Table>(spec, seed);
}

uint64_t LogSink::append(TxnUid txn, uint32_t write_set_size) {
  std::lock_guard<std::mutex> g(mu_);
  uint64_t seq = records_.size() + 1;
  records_.push_back(LogRecord{txn, seq, write_set_size});
  if (mirror_) {
    *mirror_ << txn << ',' << seq << ',' << write_set_size << '\n';
  }
  return seq;
}

void LogSink::set_mirror(const std::string& path) {
  std::lock_guard<std::mutex> g(mu_);
  mirror_.emplace(path);
  if (!mirror_->is_open()) {
    mirror_.reset();
    throw std::runtime_error("cannot open log mirror file: " + path);
  }
}

uint64_t LogSink::size() const {
  std::lock_guard<std::mutex> g(mu_);
  return records_.size();
}

std::vector<LogRecord> LogSink::snapshot() const {
  std::lock_guard<std::mutex> g(mu_);
  return records_;
}

}  // namespace bamboo
