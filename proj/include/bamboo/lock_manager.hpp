#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>

#include "bamboo/lock_entry.hpp"
#include "bamboo/policy.hpp"
#include "bamboo/storage.hpp"
#include "bamboo/txn.hpp"

namespace bamboo {

// Tracks live attempt timestamps so wound/cascade markings can verify the
// victim was never the globally oldest live transaction.
class StarvationMonitor {
 public:
  explicit StarvationMonitor(unsigned slots = 0) { resize(slots); }

  void resize(unsigned slots) {
    slots_ = std::make_unique<std::atomic<Ts>[]>(slots);
    n_ = slots;
    for (unsigned i = 0; i < n_; ++i) slots_[i].store(kTsUnassigned, std::memory_order_relaxed);
  }

  void set_live(unsigned slot, Ts ts) {
    if (slot < n_) slots_[slot].store(ts, std::memory_order_release);
  }

  void clear_live(unsigned slot) { set_live(slot, kTsUnassigned); }

  // Called at marking time, under the entry latch. A CC-induced abort of
  // the globally oldest live transaction counts as a priority violation.
  void note_mark(Ts victim_ts) {
    if (n_ == 0 || victim_ts == kTsUnassigned) return;
    for (unsigned i = 0; i < n_; ++i) {
      Ts t = slots_[i].load(std::memory_order_acquire);
      if (t != kTsUnassigned && t < victim_ts) return;  // someone older is live
    }
    violations_.fetch_add(1, std::memory_order_relaxed);
  }

  uint64_t violations() const { return violations_.load(std::memory_order_relaxed); }

 private:
  std::unique_ptr<std::atomic<Ts>[]> slots_;
  unsigned n_ = 0;
  std::atomic<uint64_t> violations_{0};
};

enum class AcquireOutcome : uint8_t { GRANTED, WAITING, ABORT_SELF };

enum class WaitPoll : uint8_t { GRANTED, STILL_WAITING };

enum class CancelResult : uint8_t { REMOVED, ALREADY_GRANTED, NOT_PRESENT };

// Filled under the latch when a request is granted.
struct ReadCapture {
  Payload* dest = nullptr;  // local copy target; null skips the byte copy
  TxnUid observed = 0;      // writer of the version this request sees
};

struct LockCtx {
  ProtocolPolicy policy;  // normalized
  std::atomic<uint64_t>* ts_source = nullptr;
  StarvationMonitor* monitor = nullptr;
};

// The four protocol functions of the lock manager. Each runs entirely
// under the tuple's latch; cross-tuple effects are flag writes only.
class LockManager {
 public:
  explicit LockManager(LockCtx ctx) : ctx_(ctx) {}

  const LockCtx& ctx() const { return ctx_; }

  // Wound conflicting lower-priority holders per policy, park the request,
  // promote, and report whether the request was granted on the spot.
  AcquireOutcome acquire(TxnHandle& txn, LockMode mode, Table& table, Key key,
                         ReadCapture* capture);

  // After txn.wait_granted is observed, finish a parked request: locate it
  // and take the value capture. May report STILL_WAITING on a stale hint.
  WaitPoll try_complete(TxnHandle& txn, Table& table, Key key, ReadCapture* capture);

  // Abandon a parked request (the waiter was wounded elsewhere).
  CancelResult cancel_wait(TxnHandle& txn, Table& table, Key key);

  // Move txn's request from owners to retired, exposing `staged` when the
  // lock is EX. Throws std::logic_error on protocol misuse; retiring an
  // already-retired SH lock is a no-op.
  void retire(TxnHandle& txn, Table& table, Key key, PayloadView staged);

  // Second write to a key whose lock already retired: invalidate every
  // consumer of the first write and drop the exposed version. The caller
  // re-acquires EX afterwards. Returns the number of victims marked.
  size_t invalidate_exposed(TxnHandle& txn, Table& table, Key key);

  // Remove txn's request. On an EX abort, marks every transaction that
  // consumed the aborter's exposed version (transitively) for cascading
  // abort with `chain_id`. Returns the number of cascade victims marked.
  size_t release(TxnHandle& txn, Table& table, Key key, bool is_abort, uint64_t chain_id);

  // Remove an SH request mid-transaction as the first half of an upgrade.
  void remove_for_upgrade(TxnHandle& txn, Table& table, Key key);

  // --- introspection (tests, replay asserts, degeneration diffs) ---
  using NameFn = std::function<std::string(const TxnHandle*)>;
  static std::string entry_state(LockEntry& entry, const NameFn& name);
  // Consistency checks under latch: list sortedness, single-list
  // membership, counted flags vs. a positional recount. Returns an empty
  // string or a description of the first violation.
  static std::string audit(LockEntry& entry);

 private:
  LockCtx ctx_;
};

}  // namespace bamboo
