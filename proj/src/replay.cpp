#include "bamboo/replay.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <cctype>
#include <stdexcept>

#include "bamboo/lock_manager.hpp"

namespace bamboo {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    if (tok[0] == '#') break;
    out.push_back(tok);
  }
  return out;
}

ReplayStep::Kind verb_kind(const std::string& v, int line) {
  if (v == "table") return ReplayStep::Kind::TABLE;
  if (v == "begin") return ReplayStep::Kind::BEGIN;
  if (v == "read") return ReplayStep::Kind::READ;
  if (v == "write") return ReplayStep::Kind::WRITE;
  if (v == "retire") return ReplayStep::Kind::RETIRE;
  if (v == "commit") return ReplayStep::Kind::COMMIT;
  if (v == "abort") return ReplayStep::Kind::ABORT;
  if (v == "assert") return ReplayStep::Kind::ASSERT;
  throw std::invalid_argument("script line " + std::to_string(line) + ": unknown step '" + v +
                              "'");
}

struct ScriptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace

ReplayScript ReplayScript::parse(const std::string& text) {
  ReplayScript s;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    ReplayStep step;
    step.line = lineno;
    size_t i = 0;
    if (toks[0] == "expect_error") {
      step.expect_error = true;
      i = 1;
      if (toks.size() < 2) {
        throw std::invalid_argument("script line " + std::to_string(lineno) +
                                    ": expect_error needs a step");
      }
    }
    step.kind = verb_kind(toks[i], lineno);
    step.args.assign(toks.begin() + i + 1, toks.end());
    s.steps.push_back(std::move(step));
  }
  return s;
}

ReplayScript ReplayScript::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open script: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse(os.str());
}

namespace {

// Deterministic staged value for replay writes.
void staged_value(TxnUid uid, Key key, uint32_t width, Payload& out) {
  out.resize(width);
  for (uint32_t i = 0; i < width; ++i) {
    out[i] = static_cast<uint8_t>(splitmix64(uid * 0x100000001b3ULL + key + i) & 0xff);
  }
}

class Replayer {
 public:
  Replayer(const ReplayScript& script, const ReplayOptions& opts)
      : script_(script), opts_(opts), engine_(db_, opts.policy) {
    db_.monitor.resize(0);
  }

  ReplayResult run();

 private:
  struct TxnState {
    std::string name;
    std::unique_ptr<TxnHandle> handle = std::make_unique<TxnHandle>();
    bool begun = false;
    bool commit_pending = false;
    bool finished = false;
  };

  uint32_t table_for_key(const std::string&) {
    ensure_default_table();
    return 0;
  }

  void ensure_default_table() {
    if (db_.tables.empty()) {
      db_.add_table(TableSpec{"t", opts_.table_rows, opts_.table_width}, /*seed=*/1);
    }
  }

  Key key_id(const std::string& tok) {
    if (!tok.empty() && std::all_of(tok.begin(), tok.end(), ::isdigit)) {
      return std::stoull(tok);
    }
    auto it = key_names_.find(tok);
    if (it != key_names_.end()) return it->second;
    Key k = next_key_++;
    key_names_[tok] = k;
    key_by_id_[k] = tok;
    return k;
  }

  std::string key_name(Key k) const {
    auto it = key_by_id_.find(k);
    return it != key_by_id_.end() ? it->second : std::to_string(k);
  }

  TxnState& txn(const std::string& name, int line) {
    auto it = txns_.find(name);
    if (it == txns_.end()) {
      throw ScriptError("line " + std::to_string(line) + ": unknown transaction " + name);
    }
    return it->second;
  }

  std::string txn_name_by_uid(TxnUid uid) const {
    for (const auto& [n, st] : txns_) {
      if (st.handle->uid == uid) return n;
    }
    return "uid" + std::to_string(uid);
  }

  std::string txn_name(const TxnHandle* h) const {
    for (const auto& [n, st] : txns_) {
      if (st.handle.get() == h) return n;
    }
    return "?";
  }

  void settle();
  void exec_step(const ReplayStep& step);
  void do_assert(const ReplayStep& step);
  void audit(int line);
  std::string snapshot();
  std::string list_string(const std::vector<LockReq>& list);

  const ReplayScript& script_;
  ReplayOptions opts_;
  Database db_;
  TxnEngine engine_;
  std::map<std::string, TxnState> txns_;  // ordered: settle is deterministic
  std::map<std::string, Key> key_names_;
  std::map<Key, std::string> key_by_id_;
  Key next_key_ = 0;
  HistoryBuffer history_;
  ReplayResult result_;
};

// Complete whatever became runnable: wounded transactions run their abort
// path (the "worker notices the flag" moment), granted waiters finish
// their access, pending commits retry. Repeats until a fixpoint so one
// step's consequences fully unfold before the next step or assert.
void Replayer::settle() {
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto& [name, st] : txns_) {
      TxnHandle& h = *st.handle;
      if (!st.begun || st.finished) continue;
      if (h.aborting() && h.status.load() != TxnStatus::ABORTED) {
        engine_.abort(h, h.current_cause(), 0);
        st.finished = true;
        st.commit_pending = false;
        ++result_.aborts;
        progress = true;
        continue;
      }
      if (h.pending_access >= 0) {
        StepStatus s = engine_.poll_blocked(h);
        if (s == StepStatus::OK) progress = true;
        if (s == StepStatus::ABORTED && h.status.load() != TxnStatus::ABORTED) {
          engine_.abort(h, h.current_cause(), 0);
          st.finished = true;
          ++result_.aborts;
          progress = true;
        }
        continue;
      }
      if (st.commit_pending) {
        CommitStatus c = engine_.commit_poll(h);
        if (c == CommitStatus::COMMITTED) {
          st.commit_pending = false;
          st.finished = true;
          ++result_.commits;
          progress = true;
        } else if (c == CommitStatus::ABORTED) {
          engine_.abort(h, h.current_cause(), 0);
          st.commit_pending = false;
          st.finished = true;
          ++result_.aborts;
          progress = true;
        }
      }
    }
  }
}

void Replayer::exec_step(const ReplayStep& step) {
  auto need_args = [&](size_t n) {
    if (step.args.size() < n) {
      throw ScriptError("line " + std::to_string(step.line) + ": missing arguments");
    }
  };
  switch (step.kind) {
    case ReplayStep::Kind::TABLE: {
      need_args(1);
      TableSpec spec;
      spec.name = step.args[0];
      spec.row_count = 256;
      spec.payload_width = 16;
      for (size_t i = 1; i < step.args.size(); ++i) {
        const std::string& a = step.args[i];
        if (a.rfind("rows=", 0) == 0) spec.row_count = std::stoull(a.substr(5));
        if (a.rfind("width=", 0) == 0) spec.payload_width = std::stoul(a.substr(6));
      }
      if (!db_.tables.empty()) {
        throw ScriptError("line " + std::to_string(step.line) + ": only one table supported");
      }
      db_.add_table(spec, 1);
      return;
    }
    case ReplayStep::Kind::BEGIN: {
      need_args(1);
      auto [it, fresh] = txns_.try_emplace(step.args[0]);
      TxnState& st = it->second;
      if (!fresh && st.begun) {
        throw ScriptError("line " + std::to_string(step.line) + ": " + step.args[0] +
                          " already begun");
      }
      st.name = step.args[0];
      Ts ts = kTsUnassigned;
      for (size_t i = 1; i < step.args.size(); ++i) {
        if (step.args[i].rfind("ts=", 0) == 0) ts = std::stoull(step.args[i].substr(3));
      }
      engine_.begin(*st.handle, &history_, ts);
      st.begun = true;
      return;
    }
    case ReplayStep::Kind::READ:
    case ReplayStep::Kind::WRITE: {
      need_args(2);
      TxnState& st = txn(step.args[0], step.line);
      TxnHandle& h = *st.handle;
      if (st.finished || h.status.load() == TxnStatus::ABORTED) {
        throw ScriptError("line " + std::to_string(step.line) + ": step on finished transaction " +
                          st.name);
      }
      if (h.pending_access >= 0 || st.commit_pending) {
        throw ScriptError("line " + std::to_string(step.line) + ": " + st.name +
                          " is blocked; step skipped");
      }
      uint32_t tid = table_for_key(step.args[1]);
      Key key = key_id(step.args[1]);
      StepStatus s;
      if (step.kind == ReplayStep::Kind::READ) {
        s = engine_.read(h, tid, key);
      } else {
        Payload v;
        staged_value(h.uid, key, db_.table(tid).width(), v);
        // plans are per-instance in the harness; scripts retire explicitly
        s = engine_.write(h, tid, key, v, /*retire_after=*/false);
      }
      if (s == StepStatus::ABORTED && h.status.load() != TxnStatus::ABORTED) {
        engine_.abort(h, h.current_cause(), 0);
        st.finished = true;
        ++result_.aborts;
      }
      return;
    }
    case ReplayStep::Kind::RETIRE: {
      need_args(2);
      TxnState& st = txn(step.args[0], step.line);
      if (st.finished) {
        throw ScriptError("line " + std::to_string(step.line) + ": retire on finished transaction");
      }
      engine_.retire(*st.handle, table_for_key(step.args[1]), key_id(step.args[1]));
      return;
    }
    case ReplayStep::Kind::COMMIT: {
      need_args(1);
      TxnState& st = txn(step.args[0], step.line);
      TxnHandle& h = *st.handle;
      if (st.finished) {
        throw ScriptError("line " + std::to_string(step.line) + ": commit on finished transaction");
      }
      if (h.pending_access >= 0) {
        throw ScriptError("line " + std::to_string(step.line) + ": " + st.name +
                          " is blocked; step skipped");
      }
      CommitStatus c = engine_.commit_poll(h);
      if (c == CommitStatus::COMMITTED) {
        st.finished = true;
        ++result_.commits;
      } else if (c == CommitStatus::PENDING) {
        st.commit_pending = true;
      } else {
        engine_.abort(h, h.current_cause(), 0);
        st.finished = true;
        ++result_.aborts;
      }
      return;
    }
    case ReplayStep::Kind::ABORT: {
      need_args(1);
      TxnState& st = txn(step.args[0], step.line);
      if (st.finished) return;  // idempotent
      engine_.abort(*st.handle, AbortCause::USER, 0);
      st.finished = true;
      st.commit_pending = false;
      ++result_.aborts;
      return;
    }
    case ReplayStep::Kind::ASSERT:
      do_assert(step);
      return;
  }
}

std::string Replayer::list_string(const std::vector<LockReq>& list) {
  std::string out = "[";
  for (size_t i = 0; i < list.size(); ++i) {
    if (i) out += ", ";
    out += txn_name(list[i].txn);
    out += '/';
    out += mode_name(list[i].mode);
  }
  out += ']';
  return out;
}

void Replayer::do_assert(const ReplayStep& step) {
  // joins args back, then splits on '='
  std::string text;
  for (const auto& a : step.args) {
    text += a;
  }
  auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw ScriptError("line " + std::to_string(step.line) + ": assert needs '='");
  }
  std::string lhs = text.substr(0, eq);
  std::string rhs = text.substr(eq + 1);

  auto fail = [&](const std::string& got) {
    result_.ok = false;
    result_.failures.push_back("line " + std::to_string(step.line) + ": assert " + lhs + " = " +
                               rhs + " — got " + got);
  };

  std::string fn = lhs, arg;
  auto paren = lhs.find('(');
  if (paren != std::string::npos) {
    fn = lhs.substr(0, paren);
    arg = lhs.substr(paren + 1, lhs.rfind(')') - paren - 1);
  }

  auto strip_list = [&](std::string s) {
    std::string out;
    for (char c : s) {
      if (c != '[' && c != ']') out += c;
    }
    return out;
  };

  if (fn == "owners" || fn == "retired" || fn == "waiters" || fn == "dirty") {
    ensure_default_table();
    LockEntry& e = db_.table(0).lock_entry(key_id(arg));
    std::string got;
    {
      std::lock_guard<std::mutex> g(e.latch);
      if (fn == "dirty") {
        got = "[";
        bool first = true;
        for (const auto& r : e.retired) {
          if (r.has_dirty && !r.txn->aborting()) {
            if (!first) got += ", ";
            got += txn_name(r.txn);
            first = false;
          }
        }
        got += ']';
      } else {
        const std::vector<LockReq>& list =
            fn == "owners" ? e.owners : (fn == "retired" ? e.retired : e.waiters);
        got = list_string(list);
      }
    }
    std::string got_norm, want_norm;
    for (char c : got) {
      if (c != ' ') got_norm += c;
    }
    for (char c : rhs) {
      if (c != ' ') want_norm += c;
    }
    if (got_norm != want_norm) fail(got);
    return;
  }
  if (fn == "sem") {
    TxnState& st = txn(arg, step.line);
    auto got = st.handle->commit_semaphore.load();
    if (std::to_string(got) != rhs) fail(std::to_string(got));
    return;
  }
  if (fn == "status") {
    TxnState& st = txn(arg, step.line);
    std::string got = status_name(st.handle->status.load());
    if (got != rhs) fail(got);
    return;
  }
  if (fn == "cause") {
    TxnState& st = txn(arg, step.line);
    std::string got = cause_name(st.handle->current_cause());
    if (got != rhs) fail(got);
    return;
  }
  if (fn == "ts") {
    TxnState& st = txn(arg, step.line);
    Ts t = st.handle->ts.load();
    std::string got = t == kTsUnassigned ? "unassigned" : std::to_string(t);
    if (got != rhs) fail(got);
    return;
  }
  if (fn == "blocked") {
    TxnState& st = txn(arg, step.line);
    std::string got = st.handle->pending_access >= 0 ? "yes" : "no";
    if (got != rhs) fail(got);
    return;
  }
  if (fn == "read_src") {
    auto comma = arg.find(',');
    if (comma == std::string::npos) {
      throw ScriptError("line " + std::to_string(step.line) + ": read_src needs (T,key)");
    }
    TxnState& st = txn(arg.substr(0, comma), step.line);
    Key k = key_id(arg.substr(comma + 1));
    AccessEntry* a = st.handle->find_access(0, k);
    std::string got = "none";
    if (a && a->observed_valid) {
      got = a->observed_writer == 0 ? "committed" : txn_name_by_uid(a->observed_writer);
    }
    if (got != rhs) fail(got);
    return;
  }
  if (fn == "chain") {
    TxnState& st = txn(arg, step.line);
    uint64_t head = st.handle->uid;
    uint64_t n = 0;
    for (const auto& [name, other] : txns_) {
      if (other.handle->status.load() == TxnStatus::ABORTED &&
          other.handle->abort_chain.load() == head) {
        ++n;
      }
    }
    if (std::to_string(n) != rhs) fail(std::to_string(n));
    return;
  }
  if (fn == "commit_order") {
    auto want = strip_list(rhs);
    std::vector<std::pair<uint64_t, std::string>> committed;
    for (const auto& [name, st] : txns_) {
      if (st.handle->status.load() == TxnStatus::COMMITTED) {
        committed.emplace_back(st.handle->commit_seq, name);
      }
    }
    std::sort(committed.begin(), committed.end());
    // check the listed txns appear in this relative order
    std::vector<std::string> want_names;
    std::string cur;
    for (char c : want + ",") {
      if (c == ',') {
        if (!cur.empty()) want_names.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    size_t pos = 0;
    for (const auto& [seq, name] : committed) {
      if (pos < want_names.size() && name == want_names[pos]) ++pos;
    }
    if (pos != want_names.size()) {
      std::string got = "[";
      for (size_t i = 0; i < committed.size(); ++i) {
        if (i) got += ", ";
        got += committed[i].second;
      }
      got += ']';
      fail(got);
    }
    return;
  }
  throw ScriptError("line " + std::to_string(step.line) + ": unknown assert '" + fn + "'");
}

// Sortedness, single-list membership and counted-flag consistency per
// entry, plus the global accounting identity: each live transaction's
// commit semaphore equals its number of counted requests.
void Replayer::audit(int line) {
  if (db_.tables.empty()) return;
  Table& t = db_.table(0);
  std::map<const TxnHandle*, int64_t> counted;
  for (const auto& [k, name] : key_by_id_) {
    LockEntry& e = t.lock_entry(k);
    std::string err = LockManager::audit(e);
    if (!err.empty()) {
      result_.ok = false;
      result_.failures.push_back("line " + std::to_string(line) + ": invariant on key " + name +
                                 ": " + err);
    }
    std::lock_guard<std::mutex> g(e.latch);
    for (auto* list : {&e.retired, &e.owners}) {
      for (const auto& r : *list) {
        if (r.counted) counted[r.txn] += 1;
      }
    }
  }
  for (const auto& [name, st] : txns_) {
    if (!st.begun) continue;
    int64_t sem = st.handle->commit_semaphore.load();
    int64_t expect = counted.count(st.handle.get()) ? counted[st.handle.get()] : 0;
    if (sem != expect) {
      result_.ok = false;
      result_.failures.push_back("line " + std::to_string(line) + ": semaphore accounting: " +
                                 name + " sem=" + std::to_string(sem) + " counted=" +
                                 std::to_string(expect));
    }
    if (sem < 0) {
      result_.ok = false;
      result_.failures.push_back("line " + std::to_string(line) + ": negative semaphore on " +
                                 name);
    }
  }
}

std::string Replayer::snapshot() {
  std::ostringstream os;
  if (!db_.tables.empty()) {
    Table& t = db_.table(0);
    for (const auto& [k, name] : key_by_id_) {
      LockEntry& e = t.lock_entry(k);
      std::lock_guard<std::mutex> g(e.latch);
      if (e.empty_lists()) continue;
      os << name << ": retired=";
      os << list_string(e.retired) << " owners=" << list_string(e.owners)
         << " waiters=" << list_string(e.waiters) << "; ";
    }
  }
  for (const auto& [name, st] : txns_) {
    if (!st.begun) continue;
    const TxnHandle& h = *st.handle;
    os << name << ":" << status_name(h.status.load()) << " sem=" << h.commit_semaphore.load()
       << " ts=" << h.ts.load() << "; ";
  }
  return os.str();
}

ReplayResult Replayer::run() {
  for (const auto& step : script_.steps) {
    bool errored = false;
    std::string error_text;
    try {
      exec_step(step);
    } catch (const ScriptError& e) {
      errored = true;
      error_text = e.what();
    } catch (const std::logic_error& e) {
      errored = true;
      error_text = e.what();
    }
    if (step.expect_error) {
      if (!errored) {
        result_.ok = false;
        result_.failures.push_back("line " + std::to_string(step.line) +
                                   ": expected an error, step succeeded");
      }
    } else if (errored) {
      if (opts_.strict) {
        result_.ok = false;
        result_.failures.push_back(error_text);
      }
      // lenient mode: generated schedules may race into blocked txns; skip
    }
    settle();
    if (opts_.audit_invariants) audit(step.line);
    if (opts_.capture_states) result_.states.push_back(snapshot());
  }
  result_.history = std::move(history_);
  return std::move(result_);
}

}  // namespace

ReplayResult run_replay(const ReplayScript& script, const ReplayOptions& opts) {
  Replayer r(script, opts);
  return r.run();
}

ReplayResult run_replay_text(const std::string& text, const ReplayOptions& opts) {
  return run_replay(ReplayScript::parse(text), opts);
}

}  // namespace bamboo
