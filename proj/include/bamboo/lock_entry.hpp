#pragma once

#include <mutex>
#include <vector>

#include "bamboo/common.hpp"
#include "bamboo/policy.hpp"
#include "bamboo/txn.hpp"

namespace bamboo {

// One parked or granted lock request.
struct LockReq {
  TxnHandle* txn = nullptr;
  LockMode mode = LockMode::SH;
  bool counted = false;    // holds a commit-semaphore contribution from this tuple
  TxnUid dep_writer = 0;   // uncommitted version this request consumed (0 = committed data)
  bool has_dirty = false;  // retired EX exposing a staged value
  Payload dirty;           // the exposed uncommitted value
};

// Per-tuple lock state: retired + owners + waiters behind one latch.
// retired and waiters are kept in ascending timestamp order; the dirty
// version chain is the sequence of has_dirty values in retired order.
struct LockEntry {
  std::mutex latch;
  std::vector<LockReq> retired;
  std::vector<LockReq> owners;
  std::vector<LockReq> waiters;

  LockEntry() = default;
  LockEntry(const LockEntry&) = delete;
  LockEntry& operator=(const LockEntry&) = delete;

  bool empty_lists() const { return retired.empty() && owners.empty() && waiters.empty(); }
};

}  // namespace bamboo
