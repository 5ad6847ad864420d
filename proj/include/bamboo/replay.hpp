#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bamboo/history.hpp"
#include "bamboo/policy.hpp"
#include "bamboo/txn_engine.hpp"

namespace bamboo {

// Line-oriented schedule script. One step per line; '#' starts a comment.
//
//   table <name> rows=<n> [width=<n>]
//   begin <T> [ts=<n>]
//   read <T> <key>
//   write <T> <key>
//   retire <T> <key>
//   commit <T>
//   abort <T>
//   expect_error <step...>
//   assert <expr> = <value>
//
// Keys are numeric or symbolic (A, B, ... mapped to 0, 1, ... in order of
// first appearance). Assert expressions:
//   owners(K) / retired(K) / waiters(K) = [T1/SH, T2/EX]
//   dirty(K) = [T1, T2]          exposed uncommitted writers, chain order
//   sem(T) = n                   commit semaphore
//   status(T) = RUNNING|COMMIT_WAIT|COMMITTED|ABORTED
//   cause(T) = NONE|WOUND|CASCADE|USER
//   ts(T) = n | unassigned
//   blocked(T) = yes|no
//   read_src(T, K) = T2 | committed
//   chain(T) = n                 aborted txns on the chain headed by T
//   commit_order = [T1, T2]      relative order in the commit log
struct ReplayStep {
  enum class Kind { TABLE, BEGIN, READ, WRITE, RETIRE, COMMIT, ABORT, ASSERT };
  Kind kind = Kind::ASSERT;
  bool expect_error = false;
  int line = 0;
  std::vector<std::string> args;  // raw tokens after the verb
};

struct ReplayScript {
  std::vector<ReplayStep> steps;
  static ReplayScript parse(const std::string& text);
  static ReplayScript parse_file(const std::string& path);
};

struct ReplayOptions {
  ProtocolPolicy policy;
  bool strict = true;           // error on steps against aborted/blocked txns
  bool capture_states = false;  // snapshot entry/txn state after every step
  bool audit_invariants = false;  // check lock-entry + semaphore invariants per step
  uint64_t table_rows = 256;
  uint32_t table_width = 16;
};

struct ReplayResult {
  bool ok = true;
  std::vector<std::string> failures;  // "line N: ..." assert failures / script errors
  std::vector<std::string> states;    // one snapshot per executed step
  HistoryBuffer history;              // finished attempts (replay never restarts)
  uint64_t commits = 0;
  uint64_t aborts = 0;
};

ReplayResult run_replay(const ReplayScript& script, const ReplayOptions& opts);
ReplayResult run_replay_text(const std::string& text, const ReplayOptions& opts);

}  // namespace bamboo
