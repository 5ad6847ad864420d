#pragma once

#include <string>
#include <vector>

#include "bamboo/policy.hpp"

namespace bamboo::testing {

struct GoldenScript {
  const char* name;
  ProtocolKind kind;
  PolicyFlags flags;
  const char* script;
};

inline PolicyFlags no_flags() { return PolicyFlags{}; }

inline PolicyFlags autoretire_flags() {
  PolicyFlags f;
  f.read_autoretire = true;
  return f;
}

inline PolicyFlags no_raw_flags() {
  PolicyFlags f;
  f.no_raw_abort = true;
  return f;
}

inline PolicyFlags dynamic_flags() {
  PolicyFlags f;
  f.dynamic_ts = true;
  return f;
}

// Hand-derived protocol schedules: list contents, semaphore values and
// cascade sets asserted exactly.
inline const std::vector<GoldenScript>& golden_scripts() {
  static const std::vector<GoldenScript> scripts = {
      {"acquire_empty_entry_sh", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
read T1 A
assert owners(A) = [T1/SH]
assert retired(A) = []
assert waiters(A) = []
assert sem(T1) = 0
assert blocked(T1) = no
)"},

      {"acquire_sh_behind_retired_ex", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
write T1 A
retire T1 A
assert retired(A) = [T1/EX]
read T2 A
assert owners(A) = [T2/SH]
assert sem(T2) = 1
assert read_src(T2,A) = T1
)"},

      {"acquire_wound_ex_owner", ProtocolKind::BAMBOO, no_flags(), R"(
begin T5 ts=5
begin T2 ts=2
write T5 A
write T2 A
assert status(T5) = ABORTED
assert cause(T5) = WOUND
assert owners(A) = [T2/EX]
assert waiters(A) = []
assert blocked(T2) = no
)"},

      {"acquire_wait_die_self_abort", ProtocolKind::WAIT_DIE, no_flags(), R"(
begin T2 ts=2
begin T5 ts=5
write T2 A
write T5 A
assert status(T5) = ABORTED
assert cause(T5) = WOUND
assert owners(A) = [T2/EX]
)"},

      {"retire_promotes_waiter", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
write T1 A
read T2 A
assert waiters(A) = [T2/SH]
assert blocked(T2) = yes
retire T1 A
assert retired(A) = [T1/EX]
assert owners(A) = [T2/SH]
assert sem(T2) = 1
assert blocked(T2) = no
assert read_src(T2,A) = T1
)"},

      {"retire_sh_no_waiters", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
read T1 A
retire T1 A
assert retired(A) = [T1/SH]
assert owners(A) = []
)"},

      {"retire_twice_errors", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
write T1 A
retire T1 A
expect_error retire T1 A
)"},

      {"release_decrements_heads", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
begin T3 ts=3
write T1 A
retire T1 A
read T2 A
retire T2 A
read T3 A
retire T3 A
assert retired(A) = [T1/EX, T2/SH, T3/SH]
assert sem(T2) = 1
assert sem(T3) = 1
commit T1
assert status(T1) = COMMITTED
assert sem(T2) = 0
assert sem(T3) = 0
assert retired(A) = [T2/SH, T3/SH]
)"},

      {"release_abort_cascades", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
begin T3 ts=3
write T1 A
retire T1 A
write T2 A
retire T2 A
read T3 A
assert retired(A) = [T1/EX, T2/EX]
assert owners(A) = [T3/SH]
abort T1
assert status(T2) = ABORTED
assert status(T3) = ABORTED
assert cause(T2) = CASCADE
assert cause(T3) = CASCADE
assert chain(T1) = 3
assert owners(A) = []
assert retired(A) = []
)"},

      {"release_single_sh", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
read T1 A
commit T1
assert status(T1) = COMMITTED
assert owners(A) = []
assert retired(A) = []
assert waiters(A) = []
)"},

      {"release_sh_abort_no_cascade", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
read T1 A
retire T1 A
write T2 A
assert retired(A) = [T1/SH]
assert owners(A) = [T2/EX]
assert sem(T2) = 1
retire T2 A
assert retired(A) = [T1/SH, T2/EX]
abort T1
assert status(T2) = RUNNING
assert sem(T2) = 0
assert retired(A) = [T2/EX]
)"},

      {"promote_stops_at_conflict", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
begin T3 ts=3
begin T4 ts=4
write T1 A
read T2 A
read T3 A
write T4 A
assert owners(A) = [T1/EX]
assert waiters(A) = [T2/SH, T3/SH, T4/EX]
abort T1
assert owners(A) = [T2/SH, T3/SH]
assert waiters(A) = [T4/EX]
assert sem(T2) = 0
assert sem(T3) = 0
)"},

      {"promote_counts_retired_conflict", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
write T1 A
retire T1 A
write T2 A
assert owners(A) = [T2/EX]
assert sem(T2) = 1
assert read_src(T2,A) = T1
)"},

      {"dynamic_ts_no_conflict_unassigned", ProtocolKind::BAMBOO, dynamic_flags(), R"(
begin T1
begin T2
write T1 A
read T2 B
assert ts(T1) = unassigned
assert ts(T2) = unassigned
)"},

      {"dynamic_ts_assign_on_conflict", ProtocolKind::BAMBOO, dynamic_flags(), R"(
begin Ta
begin Tb
write Ta A
write Tb A
assert ts(Ta) = 1
assert ts(Tb) = 2
)"},

      {"read_own_write_no_lock_change", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
write T1 A
read T1 A
assert owners(A) = [T1/EX]
assert retired(A) = []
)"},

      {"rewrite_after_retire_wounds_readers", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
write T1 A
retire T1 A
read T2 A
assert read_src(T2,A) = T1
write T1 A
assert status(T2) = ABORTED
assert cause(T2) = WOUND
assert owners(A) = [T1/EX]
assert retired(A) = []
)"},

      {"no_wait_conflict_aborts", ProtocolKind::NO_WAIT, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
write T1 A
write T2 A
assert status(T2) = ABORTED
assert cause(T2) = WOUND
assert owners(A) = [T1/EX]
)"},

      {"commit_point_ordering", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
write T1 A
retire T1 A
write T2 A
commit T2
assert status(T2) = COMMIT_WAIT
assert sem(T2) = 1
commit T1
assert status(T1) = COMMITTED
assert status(T2) = COMMITTED
assert commit_order = [T1, T2]
)"},

      {"abort_while_semaphore_wait_cascades", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
write T1 A
retire T1 A
write T2 A
commit T2
assert status(T2) = COMMIT_WAIT
abort T1
assert status(T2) = ABORTED
assert cause(T2) = CASCADE
)"},

      {"solo_user_abort", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
write T1 A
retire T1 A
abort T1
assert status(T1) = ABORTED
assert cause(T1) = USER
assert chain(T1) = 1
assert retired(A) = []
)"},

      {"cascade_chain_depth_4", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
begin T2 ts=2
begin T3 ts=3
begin T4 ts=4
write T1 A
retire T1 A
read T2 A
write T2 B
retire T2 B
read T3 B
write T3 C
retire T3 C
read T4 C
abort T1
assert status(T2) = ABORTED
assert status(T3) = ABORTED
assert status(T4) = ABORTED
assert cause(T2) = CASCADE
assert cause(T3) = CASCADE
assert cause(T4) = CASCADE
assert chain(T1) = 4
)"},

      {"autoretire_read_lands_in_retired", ProtocolKind::BAMBOO, autoretire_flags(), R"(
begin T1 ts=1
begin T2 ts=2
write T1 A
retire T1 A
read T2 A
assert retired(A) = [T1/EX, T2/SH]
assert owners(A) = []
assert sem(T2) = 1
assert read_src(T2,A) = T1
)"},

      {"no_raw_abort_reader_slots_by_ts", ProtocolKind::BAMBOO, no_raw_flags(), R"(
begin T1 ts=1
begin T3 ts=3
begin T5 ts=5
write T3 A
retire T3 A
read T5 A
assert retired(A) = [T3/EX, T5/SH]
assert read_src(T5,A) = T3
read T1 A
assert status(T3) = RUNNING
assert retired(A) = [T1/SH, T3/EX, T5/SH]
assert read_src(T1,A) = committed
assert sem(T3) = 1
assert sem(T5) = 1
assert sem(T1) = 0
)"},

      {"upgrade_sh_to_ex", ProtocolKind::BAMBOO, no_flags(), R"(
begin T1 ts=1
read T1 A
write T1 A
assert owners(A) = [T1/EX]
assert retired(A) = []
commit T1
assert status(T1) = COMMITTED
)"},
  };
  return scripts;
}

}  // namespace bamboo::testing
