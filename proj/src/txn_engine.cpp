#include "bamboo/txn_engine.hpp"

#include <cassert>
#include <stdexcept>

namespace bamboo {

void TxnEngine::begin(TxnHandle& txn, HistoryBuffer* history, Ts explicit_ts) {
  Ts ts = explicit_ts;
  if (ts == kTsUnassigned && !policy_.flags.dynamic_ts) ts = db_.next_ts();
  if (ts != kTsUnassigned) {
    // keep the counter ahead of script-chosen timestamps
    uint64_t cur = db_.ts_counter.load(std::memory_order_relaxed);
    while (cur <= ts &&
           !db_.ts_counter.compare_exchange_weak(cur, ts + 1, std::memory_order_relaxed)) {
    }
  }
  txn.reset_for_attempt(db_.next_uid(), ts);
  txn.history = history;
}

StepStatus TxnEngine::read(TxnHandle& txn, uint32_t table, Key key) {
  if (txn.aborting()) return StepStatus::ABORTED;
  if (txn.pending_access >= 0) throw std::logic_error("read: another access is still blocked");

  if (AccessEntry* prior = txn.find_access(table, key)) {
    // own write or repeated read: serve the local copy, no lock traffic
    if (prior->lock_held || prior->retired) return StepStatus::OK;
  }
  return acquire_new(txn, table, key, LockMode::SH, {}, false);
}

StepStatus TxnEngine::write(TxnHandle& txn, uint32_t table, Key key, PayloadView value,
                            bool retire_after) {
  if (txn.aborting()) return StepStatus::ABORTED;
  if (txn.pending_access >= 0) throw std::logic_error("write: another access is still blocked");

  if (AccessEntry* prior = txn.find_access(table, key)) {
    if (prior->mode == LockMode::EX && (prior->lock_held || prior->retired)) {
      if (!prior->retired) {
        prior->data.assign(value.begin(), value.end());
        return StepStatus::OK;
      }
      // Second write after retiring: every transaction that saw the first
      // write must abort, the exposed version is withdrawn, and the lock
      // is re-acquired as a fresh EX request.
      lm_.invalidate_exposed(txn, db_.table(table), key);
      prior->retired = false;
      prior->lock_held = false;
      prior->observed_valid = false;
    } else if (prior->mode == LockMode::SH && (prior->lock_held || prior->retired)) {
      // Upgrade: drop the SH entry, then issue a fresh EX request. The
      // read is re-observed at EX grant time.
      lm_.remove_for_upgrade(txn, db_.table(table), key);
      prior->lock_held = false;
      prior->retired = false;
      prior->observed_valid = false;
    }
    prior->mode = LockMode::EX;
    prior->data.assign(value.begin(), value.end());
    prior->retire_when_granted = retire_after;
    // re-acquire through the common path below using the existing slot
    Table& tbl = db_.table(table);
    ReadCapture cap;  // EX: observation only, no byte copy
    AcquireOutcome out = lm_.acquire(txn, LockMode::EX, tbl, key, &cap);
    switch (out) {
      case AcquireOutcome::GRANTED:
        prior->observed_writer = cap.observed;
        prior->observed_valid = true;
        prior->lock_held = true;
        finish_grant(txn, *prior);
        return StepStatus::OK;
      case AcquireOutcome::WAITING:
        prior->pending = true;
        txn.pending_access = static_cast<int>(prior - txn.accesses.data());
        return StepStatus::BLOCKED;
      case AcquireOutcome::ABORT_SELF:
        if (!txn.aborting()) txn.mark_abort(AbortCause::WOUND, txn.uid);
        return StepStatus::ABORTED;
    }
  }
  return acquire_new(txn, table, key, LockMode::EX, value, retire_after);
}

StepStatus TxnEngine::acquire_new(TxnHandle& txn, uint32_t table, Key key, LockMode mode,
                                  PayloadView staged_value, bool retire_after) {
  Table& tbl = db_.table(table);
  txn.accesses.push_back(AccessEntry{});
  AccessEntry& a = txn.accesses.back();
  a.table = table;
  a.key = key;
  a.mode = mode;
  a.retire_when_granted = retire_after;
  if (mode == LockMode::EX) {
    a.data.assign(staged_value.begin(), staged_value.end());
  }

  ReadCapture cap;
  if (mode == LockMode::SH) cap.dest = &a.data;
  AcquireOutcome out = lm_.acquire(txn, mode, tbl, key, &cap);
  switch (out) {
    case AcquireOutcome::GRANTED:
      a.observed_writer = cap.observed;
      a.observed_valid = true;
      a.lock_held = true;
      finish_grant(txn, a);
      return StepStatus::OK;
    case AcquireOutcome::WAITING:
      a.pending = true;
      txn.pending_access = static_cast<int>(txn.accesses.size() - 1);
      return StepStatus::BLOCKED;
    case AcquireOutcome::ABORT_SELF:
      txn.accesses.pop_back();
      if (!txn.aborting()) txn.mark_abort(AbortCause::WOUND, txn.uid);
      return StepStatus::ABORTED;
  }
  return StepStatus::ABORTED;  // unreachable
}

// Runs once a lock is granted: auto-retired reads are already in retired
// (the lock manager moved them inside the same latch section); writes with
// a retire-after plan retire here.
void TxnEngine::finish_grant(TxnHandle& txn, AccessEntry& a) {
  if (policy_.is_bamboo() && a.mode == LockMode::SH &&
      (policy_.flags.read_autoretire || policy_.flags.no_raw_abort)) {
    a.retired = true;
    a.lock_held = false;
  }
  if (a.mode == LockMode::EX && a.retire_when_granted && policy_.is_bamboo()) {
    lm_.retire(txn, db_.table(a.table), a.key, a.data);
    a.retired = true;
    a.lock_held = false;
  }
}

StepStatus TxnEngine::retire(TxnHandle& txn, uint32_t table, Key key) {
  if (txn.aborting()) return StepStatus::ABORTED;
  if (!policy_.is_bamboo()) return StepStatus::OK;  // LockRetire is optional
  AccessEntry* a = txn.find_access(table, key);
  if (!a || (!a->lock_held && !a->retired)) {
    throw std::logic_error("retire: no granted lock on this tuple");
  }
  if (a->retired) {
    if (a->mode == LockMode::SH) return StepStatus::OK;  // idempotent
    throw std::logic_error("retire: EX lock already retired");
  }
  lm_.retire(txn, db_.table(table), key, a->data);
  a->retired = true;
  a->lock_held = false;
  return StepStatus::OK;
}

StepStatus TxnEngine::poll_blocked(TxnHandle& txn) {
  if (txn.pending_access < 0) return StepStatus::OK;
  AccessEntry& a = txn.accesses[txn.pending_access];
  Table& tbl = db_.table(a.table);

  if (txn.aborting()) {
    CancelResult r = lm_.cancel_wait(txn, tbl, a.key);
    if (r == CancelResult::ALREADY_GRANTED) {
      a.lock_held = true;  // abort path will release it
    }
    a.pending = false;
    txn.pending_access = -1;
    return StepStatus::ABORTED;
  }

  if (!txn.wait_granted.load(std::memory_order_acquire)) return StepStatus::BLOCKED;

  ReadCapture cap;
  if (a.mode == LockMode::SH) cap.dest = &a.data;
  if (lm_.try_complete(txn, tbl, a.key, &cap) == WaitPoll::STILL_WAITING) {
    return StepStatus::BLOCKED;
  }
  a.observed_writer = cap.observed;
  a.observed_valid = true;
  a.lock_held = true;
  a.pending = false;
  txn.pending_access = -1;
  finish_grant(txn, a);
  return StepStatus::OK;
}

CommitStatus TxnEngine::commit_poll(TxnHandle& txn) {
  if (txn.aborting()) return CommitStatus::ABORTED;
  if (txn.pending_access >= 0) throw std::logic_error("commit: an access is still blocked");

  if (txn.status.load(std::memory_order_relaxed) == TxnStatus::RUNNING) {
    txn.status.store(TxnStatus::COMMIT_WAIT, std::memory_order_seq_cst);
    txn.commit_wait_start_ns = now_ns();
  }

  if (txn.commit_semaphore.load(std::memory_order_seq_cst) != 0) {
    // Opt 2 fallback: when the semaphore wait outgrows δ of the execution
    // time, retire the writes that were held back at plan time.
    if (policy_.flags.delta_retire && !txn.delta_fallback_done && policy_.is_bamboo()) {
      int64_t waited = now_ns() - txn.commit_wait_start_ns;
      int64_t exec = txn.commit_wait_start_ns - txn.attempt_start_ns;
      if (waited > static_cast<int64_t>(policy_.flags.delta * static_cast<double>(exec))) {
        txn.delta_fallback_done = true;
        for (auto& a : txn.accesses) {
          if (a.mode == LockMode::EX && a.lock_held && !a.retired) {
            lm_.retire(txn, db_.table(a.table), a.key, a.data);
            a.retired = true;
            a.lock_held = false;
          }
        }
      }
    }
    return CommitStatus::PENDING;
  }

  // commit point
  uint32_t writes = 0;
  for (const auto& a : txn.accesses) {
    if (a.mode == LockMode::EX && (a.lock_held || a.retired)) ++writes;
  }
  txn.commit_seq = db_.log.append(txn.uid, writes);

  for (auto& a : txn.accesses) {
    if (a.mode == LockMode::EX && (a.lock_held || a.retired)) {
      Table& tbl = db_.table(a.table);
      std::lock_guard<std::mutex> g(tbl.lock_entry(a.key).latch);
      a.installed_seq = tbl.install(a.key, a.data, txn.uid).seq;
    }
  }
  for (auto& a : txn.accesses) {
    if (a.lock_held || a.retired) {
      lm_.release(txn, db_.table(a.table), a.key, /*is_abort=*/false, 0);
      a.lock_held = false;
      a.retired = false;
    }
  }
  txn.status.store(TxnStatus::COMMITTED, std::memory_order_release);
  if (txn.history) txn.history->record(txn);
  return CommitStatus::COMMITTED;
}

uint64_t TxnEngine::abort_chain_for(TxnHandle& txn, AbortCause cause, uint64_t chain) const {
  if (chain != 0) return chain;
  uint64_t marked = txn.abort_chain.load(std::memory_order_relaxed);
  if (marked != 0) return marked;
  (void)cause;
  return txn.uid;  // this abort heads its own (possibly length-1) chain
}

void TxnEngine::abort(TxnHandle& txn, AbortCause cause, uint64_t chain) {
  // adopt the cause/chain set by a wounding marker, if any
  txn.mark_abort(cause, chain == 0 ? txn.uid : chain);
  AbortCause final_cause = txn.current_cause();
  uint64_t final_chain = abort_chain_for(txn, final_cause, 0);

  if (txn.pending_access >= 0) {
    AccessEntry& a = txn.accesses[txn.pending_access];
    CancelResult r = lm_.cancel_wait(txn, db_.table(a.table), a.key);
    if (r == CancelResult::ALREADY_GRANTED) a.lock_held = true;
    a.pending = false;
    txn.pending_access = -1;
  }
  for (auto& a : txn.accesses) {
    if (a.lock_held || a.retired) {
      lm_.release(txn, db_.table(a.table), a.key, /*is_abort=*/true, final_chain);
      a.lock_held = false;
      a.retired = false;
    }
  }
  txn.commit_semaphore.store(0, std::memory_order_relaxed);
  txn.status.store(TxnStatus::ABORTED, std::memory_order_release);
  if (txn.history) txn.history->record(txn);
}

const Payload* TxnEngine::local_value(TxnHandle& txn, uint32_t table, Key key) {
  AccessEntry* a = txn.find_access(table, key);
  if (!a || !a->observed_valid) return nullptr;
  return &a->data;
}

}  // namespace bamboo
