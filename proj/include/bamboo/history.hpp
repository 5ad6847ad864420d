#pragma once

#include <cstdint>
#include <vector>

#include "bamboo/common.hpp"
#include "bamboo/txn.hpp"

namespace bamboo {

// Flat footprint of one finished transaction attempt. Version identity is
// the writer's attempt uid (uids are unique, each attempt installs at most
// one version per tuple); observed == 0 means the initially loaded row.
struct HistAccess {
  Key key = 0;
  TxnUid observed = 0;
  uint64_t installed_seq = 0;  // per-tuple write sequence; 0 = not installed
  uint32_t table = 0;
  LockMode mode = LockMode::SH;
};

struct HistTxn {
  TxnUid uid = 0;
  Ts ts = 0;
  uint64_t commit_seq = 0;
  uint64_t chain = 0;
  TxnStatus status = TxnStatus::RUNNING;
  AbortCause cause = AbortCause::NONE;
  uint32_t acc_begin = 0;
  uint32_t acc_end = 0;
};

// Per-worker append-only recording; merged after the run.
class HistoryBuffer {
 public:
  void record(const TxnHandle& txn) {
    HistTxn h;
    h.uid = txn.uid;
    h.ts = txn.ts.load(std::memory_order_relaxed);
    h.commit_seq = txn.commit_seq;
    h.chain = txn.abort_chain.load(std::memory_order_relaxed);
    h.status = txn.status.load(std::memory_order_relaxed);
    h.cause = txn.current_cause();
    h.acc_begin = static_cast<uint32_t>(accesses.size());
    for (const auto& a : txn.accesses) {
      if (!a.observed_valid) continue;  // never granted
      accesses.push_back(HistAccess{a.key, a.observed_writer, a.installed_seq, a.table, a.mode});
    }
    h.acc_end = static_cast<uint32_t>(accesses.size());
    txns.push_back(h);
  }

  void merge_from(const HistoryBuffer& other) {
    uint32_t base = static_cast<uint32_t>(accesses.size());
    accesses.insert(accesses.end(), other.accesses.begin(), other.accesses.end());
    for (HistTxn t : other.txns) {
      t.acc_begin += base;
      t.acc_end += base;
      txns.push_back(t);
    }
  }

  void clear() {
    txns.clear();
    accesses.clear();
  }

  std::vector<HistTxn> txns;
  std::vector<HistAccess> accesses;
};

}  // namespace bamboo
