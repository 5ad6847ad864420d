#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "bamboo/common.hpp"
#include "bamboo/policy.hpp"

namespace bamboo {

enum class TxnStatus : uint8_t { RUNNING = 0, COMMIT_WAIT, COMMITTED, ABORTED };

enum class AbortCause : uint8_t { NONE = 0, WOUND, CASCADE, USER };

inline const char* status_name(TxnStatus s) {
  switch (s) {
    case TxnStatus::RUNNING: return "RUNNING";
    case TxnStatus::COMMIT_WAIT: return "COMMIT_WAIT";
    case TxnStatus::COMMITTED: return "COMMITTED";
    case TxnStatus::ABORTED: return "ABORTED";
  }
  return "?";
}

inline const char* cause_name(AbortCause c) {
  switch (c) {
    case AbortCause::NONE: return "NONE";
    case AbortCause::WOUND: return "WOUND";
    case AbortCause::CASCADE: return "CASCADE";
    case AbortCause::USER: return "USER";
  }
  return "?";
}

// One tuple access of a running transaction (engine-side bookkeeping).
struct AccessEntry {
  uint32_t table = 0;
  Key key = 0;
  LockMode mode = LockMode::SH;
  bool lock_held = false;      // request sits in the entry's owners/retired
  bool pending = false;        // parked in waiters, not yet granted
  bool retired = false;        // moved to the retired list
  bool retire_when_granted = false;
  bool observed_valid = false;  // capture completed (lock was granted)
  TxnUid observed_writer = 0;   // writer of the version this access saw
  uint64_t installed_seq = 0;  // version seq installed at commit (writes)
  Payload data;                // local copy (reads) / staged value (writes)
};

class HistoryBuffer;  // validator.hpp

// Per-transaction state. One worker drives the transaction; the abort
// flag and the commit semaphore may be touched by other workers (under
// the relevant lock-entry latch), so they are atomics.
struct TxnHandle {
  TxnUid uid = 0;
  std::atomic<Ts> ts{kTsUnassigned};
  std::atomic<TxnStatus> status{TxnStatus::RUNNING};
  std::atomic<int64_t> commit_semaphore{0};

  // Abort request protocol: the first marker wins abort_cause via CAS,
  // then writes abort_chain, then publishes abort_requested (release).
  // Readers load abort_requested (acquire) before trusting the rest.
  std::atomic<uint8_t> abort_cause{0};
  std::atomic<uint64_t> abort_chain{0};
  std::atomic<bool> abort_requested{false};

  // Set (under latch) when a parked waiter gets promoted.
  std::atomic<bool> wait_granted{false};

  std::vector<AccessEntry> accesses;
  int pending_access = -1;  // index of the single in-flight blocked access

  uint64_t commit_seq = 0;
  HistoryBuffer* history = nullptr;

  // attempt-level stats, owned by the driving worker
  int64_t attempt_start_ns = 0;
  int64_t lock_wait_ns = 0;
  int64_t sem_wait_ns = 0;
  int64_t commit_wait_start_ns = 0;
  bool delta_fallback_done = false;

  TxnHandle() { accesses.reserve(24); }
  TxnHandle(const TxnHandle&) = delete;
  TxnHandle& operator=(const TxnHandle&) = delete;

  // First marker wins; later attempts keep the original cause/chain.
  bool mark_abort(AbortCause cause, uint64_t chain) {
    uint8_t expected = 0;
    if (!abort_cause.compare_exchange_strong(expected, static_cast<uint8_t>(cause))) {
      return false;
    }
    abort_chain.store(chain, std::memory_order_relaxed);
    abort_requested.store(true, std::memory_order_release);
    return true;
  }

  bool aborting() const { return abort_requested.load(std::memory_order_acquire); }

  AbortCause current_cause() const {
    return static_cast<AbortCause>(abort_cause.load(std::memory_order_relaxed));
  }

  AccessEntry* find_access(uint32_t table_id, Key key) {
    for (auto it = accesses.rbegin(); it != accesses.rend(); ++it) {
      if (it->table == table_id && it->key == key) return &*it;
    }
    return nullptr;
  }

  void reset_for_attempt(TxnUid new_uid, Ts new_ts) {
    uid = new_uid;
    ts.store(new_ts, std::memory_order_relaxed);
    status.store(TxnStatus::RUNNING, std::memory_order_relaxed);
    commit_semaphore.store(0, std::memory_order_relaxed);
    abort_cause.store(0, std::memory_order_relaxed);
    abort_chain.store(0, std::memory_order_relaxed);
    abort_requested.store(false, std::memory_order_relaxed);
    wait_granted.store(false, std::memory_order_relaxed);
    accesses.clear();
    pending_access = -1;
    commit_seq = 0;
    attempt_start_ns = now_ns();
    lock_wait_ns = 0;
    sem_wait_ns = 0;
    commit_wait_start_ns = 0;
    delta_fallback_done = false;
  }
};

}  // namespace bamboo
