#include "bamboo/lock_manager.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

namespace bamboo {

namespace {

Ts ts_of(const LockReq& r) { return r.txn->ts.load(std::memory_order_relaxed); }

// Unassigned timestamps sort after every assigned one (arrival order among
// themselves, which insertion keeps stable).
bool ts_before(Ts a, Ts b) {
  if (a == kTsUnassigned) return false;
  if (b == kTsUnassigned) return true;
  return a < b;
}

bool conflicts_with_owners(const LockEntry& e, const TxnHandle* txn, LockMode mode) {
  for (const auto& o : e.owners) {
    if (o.txn != txn && conflicts(o.mode, mode)) return true;
  }
  return false;
}

size_t sorted_pos(const std::vector<LockReq>& list, Ts ts) {
  size_t i = 0;
  while (i < list.size() && !ts_before(ts, ts_of(list[i]))) ++i;
  return i;
}

std::vector<LockReq>::iterator find_req(std::vector<LockReq>& list, const TxnHandle* txn) {
  return std::find_if(list.begin(), list.end(),
                      [txn](const LockReq& r) { return r.txn == txn; });
}

void mark_victim(const LockCtx& ctx, TxnHandle& victim, AbortCause cause, uint64_t chain) {
  if (victim.mark_abort(cause, chain) && ctx.monitor) {
    ctx.monitor->note_mark(victim.ts.load(std::memory_order_relaxed));
  }
}

// The version a request at the given position reads: the latest exposed
// value ahead of it whose writer is not already marked for abort, else the
// committed tuple. Readers that land in owners scan the whole retired list
// (owners follow retired); readers placed inside retired scan their prefix.
void capture_at(LockEntry& e, size_t retired_prefix, bool whole_retired, Table& table, Key key,
                LockReq& req, ReadCapture* cap) {
  const LockReq* src = nullptr;
  size_t limit = whole_retired ? e.retired.size() : retired_prefix;
  for (size_t i = limit; i-- > 0;) {
    const LockReq& r = e.retired[i];
    if (r.has_dirty && !r.txn->aborting()) {
      src = &r;
      break;
    }
  }
  if (src) {
    req.dep_writer = src->txn->uid;
    if (cap) {
      cap->observed = src->txn->uid;
      if (cap->dest) cap->dest->assign(src->dirty.begin(), src->dirty.end());
    }
  } else {
    req.dep_writer = 0;
    if (cap) {
      cap->observed = table.version(key).writer;
      if (cap->dest) {
        auto v = table.payload(key);
        cap->dest->assign(v.begin(), v.end());
      }
    }
  }
}

// Make every conflicting request at or after the insert point depend on a
// reader about to be placed ahead of it. Increment-then-recheck closes the
// race against a follower concurrently passing its commit-semaphore test:
// a follower past RUNNING can no longer be made to wait, so the whole
// insertion rolls back and the reader stays a waiter (the follower's
// imminent release re-runs promotion). All-or-nothing.
bool add_follower_dependencies(LockEntry& e, size_t pos, LockMode reader_mode) {
  std::vector<LockReq*> added;
  bool ok = true;
  auto guard_one = [&](LockReq& f) {
    if (!conflicts(f.mode, reader_mode) || f.counted) return true;
    f.txn->commit_semaphore.fetch_add(1, std::memory_order_seq_cst);
    if (f.txn->status.load(std::memory_order_seq_cst) != TxnStatus::RUNNING) {
      f.txn->commit_semaphore.fetch_sub(1, std::memory_order_seq_cst);
      return false;
    }
    f.counted = true;
    added.push_back(&f);
    return true;
  };
  for (size_t i = pos; ok && i < e.retired.size(); ++i) ok = guard_one(e.retired[i]);
  for (size_t i = 0; ok && i < e.owners.size(); ++i) ok = guard_one(e.owners[i]);
  if (!ok) {
    for (auto* f : added) {
      f->txn->commit_semaphore.fetch_sub(1, std::memory_order_seq_cst);
      f->counted = false;
    }
  }
  return ok;
}

// Decrement the leading non-conflicting prefix ("heads") of
// concat(retired, owners); their dependency on this tuple is clear.
void notify_heads(LockEntry& e) {
  std::vector<LockReq*> heads;
  bool open = true;
  auto scan = [&](std::vector<LockReq>& list) {
    for (auto& r : list) {
      for (auto* h : heads) {
        if (conflicts(h->mode, r.mode)) {
          open = false;
          return;
        }
      }
      heads.push_back(&r);
    }
  };
  scan(e.retired);
  if (open) scan(e.owners);
  for (auto* h : heads) {
    if (h->counted) {
      h->txn->commit_semaphore.fetch_sub(1, std::memory_order_seq_cst);
      h->counted = false;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PromoteWaiters: scan waiters in ascending timestamp order, move each
// non-conflicting waiter to owners (semaphore++ when it conflicts with any
// retired entry), stop at the first conflict. Under read_autoretire /
// no_raw_abort an SH grant goes straight into retired at its timestamp
// position and reads the chain at that position.
// ---------------------------------------------------------------------------
static void promote_waiters(const LockCtx& ctx, LockEntry& e, Table& table, Key key) {
  bool reads_to_retired = ctx.policy.is_bamboo() && (ctx.policy.flags.read_autoretire ||
                                                     ctx.policy.flags.no_raw_abort);
  size_t i = 0;
  while (i < e.waiters.size()) {
    LockReq& w = e.waiters[i];
    if (conflicts_with_owners(e, w.txn, w.mode)) break;

    if (w.mode == LockMode::SH && reads_to_retired) {
      size_t pos = sorted_pos(e.retired, ts_of(w));
      if (!add_follower_dependencies(e, pos, w.mode)) break;
      LockReq req = std::move(w);
      e.waiters.erase(e.waiters.begin() + i);
      // self dependency: any conflicting entry ahead of the insert point
      bool dep_ahead = false;
      for (size_t j = 0; j < pos; ++j) {
        if (conflicts(e.retired[j].mode, req.mode)) {
          dep_ahead = true;
          break;
        }
      }
      if (dep_ahead && !req.counted) {
        req.txn->commit_semaphore.fetch_add(1, std::memory_order_seq_cst);
        req.counted = true;
      }
      capture_at(e, pos, /*whole_retired=*/false, table, key, req, nullptr);
      req.txn->wait_granted.store(true, std::memory_order_release);
      e.retired.insert(e.retired.begin() + pos, std::move(req));
      continue;  // i unchanged: element removed
    }

    LockReq req = std::move(w);
    e.waiters.erase(e.waiters.begin() + i);
    bool retired_conflict = false;
    for (const auto& r : e.retired) {
      if (conflicts(r.mode, req.mode)) {
        retired_conflict = true;
        break;
      }
    }
    if (retired_conflict && !req.counted) {
      req.txn->commit_semaphore.fetch_add(1, std::memory_order_seq_cst);
      req.counted = true;
    }
    req.txn->wait_granted.store(true, std::memory_order_release);
    e.owners.push_back(std::move(req));
  }
}

// Alg. 3: on the first conflict, assign timestamps to everything in the
// three lists in list order, then to the requester. Assignment is a CAS so
// it is exactly-once even when several entries race on the same txn; the
// lists are re-sorted afterwards because a raced assignment elsewhere can
// leave this entry's relative order stale.
static void assign_ts_on_conflict(const LockCtx& ctx, LockEntry& e, TxnHandle& txn,
                                  LockMode mode) {
  auto set_if_unassigned = [&](TxnHandle* t) {
    if (t->ts.load(std::memory_order_relaxed) != kTsUnassigned) return;
    Ts fresh = ctx.ts_source->fetch_add(1, std::memory_order_relaxed);
    Ts expected = kTsUnassigned;
    // losing the race leaves a gap in the counter, which is harmless
    t->ts.compare_exchange_strong(expected, fresh, std::memory_order_relaxed);
  };
  bool conflict = false;
  for (auto* list : {&e.retired, &e.owners, &e.waiters}) {
    for (const auto& r : *list) {
      if (conflicts(mode, r.mode)) {
        conflict = true;
        break;
      }
    }
    if (conflict) break;
  }
  if (!conflict) return;
  for (auto* list : {&e.retired, &e.owners, &e.waiters}) {
    for (auto& r : *list) set_if_unassigned(r.txn);
  }
  set_if_unassigned(&txn);
  auto by_ts = [](const LockReq& a, const LockReq& b) { return ts_before(ts_of(a), ts_of(b)); };
  std::stable_sort(e.retired.begin(), e.retired.end(), by_ts);
  std::stable_sort(e.waiters.begin(), e.waiters.end(), by_ts);
}

// ---------------------------------------------------------------------------
// LockAcquire
// ---------------------------------------------------------------------------
AcquireOutcome LockManager::acquire(TxnHandle& txn, LockMode mode, Table& table, Key key,
                                    ReadCapture* capture) {
  LockEntry& e = table.lock_entry(key);
  std::lock_guard<std::mutex> g(e.latch);

  if (txn.aborting()) return AcquireOutcome::ABORT_SELF;

  if (ctx_.policy.flags.dynamic_ts) assign_ts_on_conflict(ctx_, e, txn, mode);

  switch (ctx_.policy.kind) {
    case ProtocolKind::BAMBOO:
    case ProtocolKind::WOUND_WAIT: {
      // Wound conflicting lower-priority transactions. Bamboo scans
      // retired + owners, Wound-Wait owners only. Once a conflict is seen
      // every later higher-timestamp entry is wounded as well: it sits
      // behind the conflict point and depends on it.
      bool sh_no_wound =
          ctx_.policy.is_bamboo() && ctx_.policy.flags.no_raw_abort && mode == LockMode::SH;
      if (!sh_no_wound) {
        Ts my_ts = txn.ts.load(std::memory_order_relaxed);
        bool has_conflict = false;
        auto wound_scan = [&](std::vector<LockReq>& list) {
          for (auto& r : list) {
            if (conflicts(mode, r.mode)) has_conflict = true;
            if (has_conflict && ts_before(my_ts, ts_of(r))) {
              mark_victim(ctx_, *r.txn, AbortCause::WOUND, r.txn->uid);
            }
          }
        };
        if (ctx_.policy.is_bamboo()) wound_scan(e.retired);
        wound_scan(e.owners);
      }
      break;
    }
    case ProtocolKind::WAIT_DIE: {
      Ts my_ts = txn.ts.load(std::memory_order_relaxed);
      for (const auto& o : e.owners) {
        if (conflicts(mode, o.mode) && ts_before(ts_of(o), my_ts)) {
          return AcquireOutcome::ABORT_SELF;  // younger requesters die
        }
      }
      break;
    }
    case ProtocolKind::NO_WAIT: {
      if (conflicts_with_owners(e, &txn, mode)) return AcquireOutcome::ABORT_SELF;
      break;
    }
  }

  LockReq req;
  req.txn = &txn;
  req.mode = mode;
  e.waiters.insert(e.waiters.begin() + sorted_pos(e.waiters, ts_of(req)), std::move(req));
  promote_waiters(ctx_, e, table, key);

  // Granted iff the request reached owners (or retired, for auto-retired reads).
  auto it = find_req(e.owners, &txn);
  if (it != e.owners.end()) {
    capture_at(e, 0, /*whole_retired=*/true, table, key, *it, capture);
    return AcquireOutcome::GRANTED;
  }
  it = find_req(e.retired, &txn);
  if (it != e.retired.end()) {
    // value already selected at insertion; redo the byte copy into `capture`
    size_t pos = static_cast<size_t>(it - e.retired.begin());
    capture_at(e, pos, /*whole_retired=*/false, table, key, *it, capture);
    return AcquireOutcome::GRANTED;
  }
  txn.wait_granted.store(false, std::memory_order_relaxed);
  return AcquireOutcome::WAITING;
}

WaitPoll LockManager::try_complete(TxnHandle& txn, Table& table, Key key, ReadCapture* capture) {
  LockEntry& e = table.lock_entry(key);
  std::lock_guard<std::mutex> g(e.latch);
  auto it = find_req(e.owners, &txn);
  if (it != e.owners.end()) {
    capture_at(e, 0, true, table, key, *it, capture);
    return WaitPoll::GRANTED;
  }
  it = find_req(e.retired, &txn);
  if (it != e.retired.end()) {
    size_t pos = static_cast<size_t>(it - e.retired.begin());
    capture_at(e, pos, false, table, key, *it, capture);
    return WaitPoll::GRANTED;
  }
  return WaitPoll::STILL_WAITING;
}

CancelResult LockManager::cancel_wait(TxnHandle& txn, Table& table, Key key) {
  LockEntry& e = table.lock_entry(key);
  std::lock_guard<std::mutex> g(e.latch);
  auto it = find_req(e.waiters, &txn);
  if (it != e.waiters.end()) {
    e.waiters.erase(it);
    return CancelResult::REMOVED;
  }
  if (find_req(e.owners, &txn) != e.owners.end() ||
      find_req(e.retired, &txn) != e.retired.end()) {
    return CancelResult::ALREADY_GRANTED;
  }
  return CancelResult::NOT_PRESENT;
}

// ---------------------------------------------------------------------------
// LockRetire: move txn from owners to retired (timestamp-ordered insert;
// wounded stragglers with larger timestamps may follow the insert point).
// ---------------------------------------------------------------------------
void LockManager::retire(TxnHandle& txn, Table& table, Key key, PayloadView staged) {
  LockEntry& e = table.lock_entry(key);
  std::lock_guard<std::mutex> g(e.latch);
  auto it = find_req(e.owners, &txn);
  if (it == e.owners.end()) {
    auto rit = find_req(e.retired, &txn);
    if (rit != e.retired.end() && rit->mode == LockMode::SH) return;  // idempotent
    throw std::logic_error("lock_retire: transaction is not an owner");
  }
  LockReq req = std::move(*it);
  e.owners.erase(it);
  if (req.mode == LockMode::EX) {
    req.has_dirty = true;
    req.dirty.assign(staged.begin(), staged.end());
  }
  size_t pos = sorted_pos(e.retired, ts_of(req));
  e.retired.insert(e.retired.begin() + pos, std::move(req));
  promote_waiters(ctx_, e, table, key);
}

size_t LockManager::invalidate_exposed(TxnHandle& txn, Table& table, Key key) {
  LockEntry& e = table.lock_entry(key);
  std::lock_guard<std::mutex> g(e.latch);
  auto it = find_req(e.retired, &txn);
  if (it == e.retired.end() || it->mode != LockMode::EX) {
    throw std::logic_error("invalidate_exposed: no retired EX lock");
  }
  size_t idx = static_cast<size_t>(it - e.retired.begin());
  // everyone who consumed the first write (transitively) must go
  std::vector<TxnUid> doomed{txn.uid};
  auto is_doomed = [&](TxnUid w) {
    return std::find(doomed.begin(), doomed.end(), w) != doomed.end();
  };
  size_t victims = 0;
  auto sweep = [&](LockReq& r) {
    if (r.txn != &txn && r.dep_writer != 0 && is_doomed(r.dep_writer)) {
      mark_victim(ctx_, *r.txn, AbortCause::WOUND, r.txn->uid);
      doomed.push_back(r.txn->uid);
      ++victims;
    }
  };
  for (size_t i = idx + 1; i < e.retired.size(); ++i) sweep(e.retired[i]);
  for (auto& o : e.owners) sweep(o);

  bool was_head = idx == 0;
  LockMode head_mode = it->mode;
  e.retired.erase(it);
  if (was_head && (e.retired.empty() || conflicts(head_mode, e.retired.front().mode))) {
    notify_heads(e);
  }
  promote_waiters(ctx_, e, table, key);
  return victims;
}

// ---------------------------------------------------------------------------
// LockRelease
// ---------------------------------------------------------------------------
size_t LockManager::release(TxnHandle& txn, Table& table, Key key, bool is_abort,
                            uint64_t chain_id) {
  LockEntry& e = table.lock_entry(key);
  std::lock_guard<std::mutex> g(e.latch);

  bool in_retired = false;
  auto it = find_req(e.retired, &txn);
  if (it != e.retired.end()) {
    in_retired = true;
  } else {
    it = find_req(e.owners, &txn);
    if (it == e.owners.end()) {
      throw std::logic_error("lock_release: transaction holds no lock on this tuple");
    }
  }

  size_t victims = 0;
  if (is_abort && it->mode == LockMode::EX) {
    // Cascading abort: every later transaction whose read version chains
    // back to the aborter is marked; its worker performs the abort. A
    // transaction that skipped the aborter's (already-wounded) version
    // survives — position alone does not imply a dependency.
    std::vector<TxnUid> doomed{txn.uid};
    auto is_doomed = [&](TxnUid w) {
      return std::find(doomed.begin(), doomed.end(), w) != doomed.end();
    };
    auto sweep = [&](LockReq& r) {
      if (r.txn != &txn && r.dep_writer != 0 && is_doomed(r.dep_writer)) {
        mark_victim(ctx_, *r.txn, AbortCause::CASCADE, chain_id);
        doomed.push_back(r.txn->uid);
        ++victims;
      }
    };
    if (in_retired) {
      size_t idx = static_cast<size_t>(it - e.retired.begin());
      for (size_t i = idx + 1; i < e.retired.size(); ++i) sweep(e.retired[i]);
    }
    for (auto& o : e.owners) sweep(o);
  }

  bool was_head = in_retired && it == e.retired.begin();
  LockMode head_mode = it->mode;
  if (in_retired) {
    e.retired.erase(it);
  } else {
    e.owners.erase(it);
  }

  // The old head's departure may clear dependencies: when the new head
  // conflicts with the departed mode (an empty retired counts as
  // triggering), notify the leading non-conflicting transactions.
  if (was_head && (e.retired.empty() || conflicts(head_mode, e.retired.front().mode))) {
    notify_heads(e);
  }

  promote_waiters(ctx_, e, table, key);
  return victims;
}

void LockManager::remove_for_upgrade(TxnHandle& txn, Table& table, Key key) {
  // Same list surgery as a commit release of an SH lock.
  release(txn, table, key, /*is_abort=*/false, 0);
}

// ---------------------------------------------------------------------------
// Introspection
// ---------------------------------------------------------------------------
std::string LockManager::entry_state(LockEntry& e, const NameFn& name) {
  std::lock_guard<std::mutex> g(e.latch);
  std::ostringstream os;
  auto dump = [&](const char* label, const std::vector<LockReq>& list) {
    os << label << "=[";
    for (size_t i = 0; i < list.size(); ++i) {
      if (i) os << ", ";
      os << name(list[i].txn) << '/' << mode_name(list[i].mode);
      if (list[i].counted) os << '+';
      if (list[i].has_dirty) os << '*';
    }
    os << ']';
  };
  dump("retired", e.retired);
  os << ' ';
  dump("owners", e.owners);
  os << ' ';
  dump("waiters", e.waiters);
  return os.str();
}

std::string LockManager::audit(LockEntry& e) {
  std::lock_guard<std::mutex> g(e.latch);
  auto sorted = [&](const std::vector<LockReq>& list) {
    for (size_t i = 1; i < list.size(); ++i) {
      if (ts_before(ts_of(list[i]), ts_of(list[i - 1]))) return false;
    }
    return true;
  };
  if (!sorted(e.retired)) return "retired not timestamp-sorted";
  if (!sorted(e.waiters)) return "waiters not timestamp-sorted";
  std::vector<const TxnHandle*> seen;
  for (auto* list : {&e.retired, &e.owners, &e.waiters}) {
    for (const auto& r : *list) {
      if (std::find(seen.begin(), seen.end(), r.txn) != seen.end()) {
        return "transaction present in more than one list";
      }
      seen.push_back(r.txn);
    }
  }
  // counted flags must match a positional recount (owners count against
  // any retired entry, retired entries against their prefix)
  for (size_t i = 0; i < e.retired.size(); ++i) {
    bool need = false;
    for (size_t j = 0; j < i; ++j) {
      if (conflicts(e.retired[j].mode, e.retired[i].mode)) need = true;
    }
    if (need != e.retired[i].counted) return "retired counted flag mismatch";
  }
  for (const auto& o : e.owners) {
    bool need = false;
    for (const auto& r : e.retired) {
      if (conflicts(r.mode, o.mode)) need = true;
    }
    if (need != o.counted) return "owner counted flag mismatch";
  }
  return {};
}

}  // namespace bamboo
