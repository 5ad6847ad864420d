#pragma once

#include <atomic>
#include <memory>
#include <vector>

#include "bamboo/history.hpp"
#include "bamboo/lock_manager.hpp"
#include "bamboo/policy.hpp"
#include "bamboo/storage.hpp"
#include "bamboo/txn.hpp"

namespace bamboo {

struct Database {
  std::vector<std::unique_ptr<Table>> tables;
  LogSink log;
  std::atomic<uint64_t> ts_counter{1};
  std::atomic<uint64_t> uid_counter{1};
  StarvationMonitor monitor;

  uint32_t add_table(const TableSpec& spec, uint64_t seed) {
    tables.push_back(load_table(spec, seed));
    return static_cast<uint32_t>(tables.size() - 1);
  }

  Table& table(uint32_t id) { return *tables.at(id); }

  TxnUid next_uid() { return uid_counter.fetch_add(1, std::memory_order_relaxed); }
  Ts next_ts() { return ts_counter.fetch_add(1, std::memory_order_relaxed); }
};

enum class StepStatus : uint8_t { OK, BLOCKED, ABORTED };
enum class CommitStatus : uint8_t { COMMITTED, PENDING, ABORTED };

// Drives Algorithm 1's lifecycle over the lock manager: execute accesses
// with local copies, retire per plan, wait out the commit semaphore, log,
// install, release. Non-blocking: BLOCKED/PENDING steps are re-polled by
// the caller (worker threads spin, the replayer settles), so identical
// protocol code serves both multi-threaded and deterministic runs.
class TxnEngine {
 public:
  TxnEngine(Database& db, ProtocolPolicy policy)
      : db_(db),
        policy_(policy.normalized()),
        lm_(LockCtx{policy_, &db.ts_counter, &db.monitor}) {}

  const ProtocolPolicy& policy() const { return policy_; }
  Database& db() { return db_; }
  LockManager& lock_manager() { return lm_; }

  // Fresh attempt. ts == kTsUnassigned picks the policy default
  // (counter under static assignment, unassigned under dynamic).
  void begin(TxnHandle& txn, HistoryBuffer* history, Ts explicit_ts = kTsUnassigned);

  StepStatus read(TxnHandle& txn, uint32_t table, Key key);
  StepStatus write(TxnHandle& txn, uint32_t table, Key key, PayloadView value,
                   bool retire_after);
  // Explicit LockRetire of an already-granted access (plans usually retire
  // inside write(); SH retires are allowed and idempotent).
  StepStatus retire(TxnHandle& txn, uint32_t table, Key key);

  // Progress a BLOCKED access. OK once granted (running any deferred
  // retire), BLOCKED while still parked, ABORTED if wounded meanwhile.
  StepStatus poll_blocked(TxnHandle& txn);

  // First call enters COMMIT_WAIT; PENDING until the commit semaphore
  // drains. On success performs log append (the commit point), installs
  // the write set, releases every lock, records history.
  CommitStatus commit_poll(TxnHandle& txn);

  // Release everything, mark victims, drop local copies, record history.
  void abort(TxnHandle& txn, AbortCause cause, uint64_t chain = 0);

  // Read payload bytes for a completed access (own writes included).
  const Payload* local_value(TxnHandle& txn, uint32_t table, Key key);

 private:
  StepStatus acquire_new(TxnHandle& txn, uint32_t table, Key key, LockMode mode,
                         PayloadView staged_value, bool retire_after);
  void finish_grant(TxnHandle& txn, AccessEntry& a);
  uint64_t abort_chain_for(TxnHandle& txn, AbortCause cause, uint64_t chain) const;

  Database& db_;
  ProtocolPolicy policy_;
  LockManager lm_;
};

}  // namespace bamboo
