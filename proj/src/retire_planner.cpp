#include "bamboo/retire_planner.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bamboo {

namespace {

KeyExpr shift_expr(const KeyExpr& e, uint32_t step, uint32_t iter) {
  if (e.kind == KeyExpr::Kind::CONST) return e;
  KeyExpr out = e;
  out.value += static_cast<uint64_t>(step) * iter;
  return out;
}

void check_access(const TemplateAccess& a, const TxnTemplate& t, size_t idx) {
  auto bad = [&](const std::string& why) {
    throw std::invalid_argument("template '" + t.name + "' access " + std::to_string(idx) +
                                ": " + why);
  };
  if (a.key.kind == KeyExpr::Kind::PARAM && a.key.value >= t.key_params) {
    bad("key parameter out of range");
  }
  if (a.key.kind == KeyExpr::Kind::DERIVED && a.key.value >= t.derived_slots) {
    bad("derived slot out of range");
  }
  if (a.guard && *a.guard >= t.flag_params) bad("guard parameter out of range");
}

}  // namespace

std::vector<TemplateAccess> unroll(const TxnTemplate& tmpl) {
  std::vector<TemplateAccess> flat;
  for (const auto& el : tmpl.elements) {
    if (const auto* a = std::get_if<TemplateAccess>(&el.node)) {
      flat.push_back(*a);
    } else {
      const auto& rep = std::get<RepeatGroup>(el.node);
      if (rep.count == 0) {
        throw std::invalid_argument("template '" + tmpl.name +
                                    "': repeat groups need a fixed count >= 1");
      }
      for (uint32_t i = 0; i < rep.count; ++i) {
        for (const auto& a : rep.body) {
          TemplateAccess out = a;
          out.key = shift_expr(a.key, rep.param_step, i);
          flat.push_back(out);
        }
      }
    }
  }
  for (size_t i = 0; i < flat.size(); ++i) check_access(flat[i], tmpl, i);
  return flat;
}

std::vector<RetireDecision> plan_retires(const TxnTemplate& tmpl) {
  auto flat = unroll(tmpl);
  std::vector<RetireDecision> out(flat.size());

  for (size_t i = 0; i < flat.size(); ++i) {
    RetireDecision& d = out[i];
    if (flat[i].mode == LockMode::SH) {
      d.kind = RetireDecision::Kind::ALWAYS;  // reads cannot cascade
      continue;
    }
    d.kind = RetireDecision::Kind::ALWAYS;
    for (size_t j = i + 1; j < flat.size() && d.kind != RetireDecision::Kind::NEVER; ++j) {
      const auto& later = flat[j];
      if (later.mode != LockMode::EX) continue;  // a later read of our own
                                                 // write never re-locks
      if (later.table != flat[i].table) continue;
      const KeyExpr& a = flat[i].key;
      const KeyExpr& b = later.key;
      bool both_const =
          a.kind == KeyExpr::Kind::CONST && b.kind == KeyExpr::Kind::CONST;
      bool both_param =
          a.kind == KeyExpr::Kind::PARAM && b.kind == KeyExpr::Kind::PARAM;
      if (!both_const && !both_param) {
        // derived or mixed shapes may alias anything on the table
        d.kind = RetireDecision::Kind::NEVER;
        d.clauses.clear();
        break;
      }
      if (both_const && a.value != b.value) continue;  // provably disjoint
      // keys may collide: (!guard || key_a != key_b)
      bool keys_always_equal = a == b;
      if (keys_always_equal && !later.guard) {
        d.kind = RetireDecision::Kind::NEVER;
        d.clauses.clear();
        break;
      }
      d.kind = RetireDecision::Kind::CONDITIONAL;
      d.clauses.push_back(RetireClause{later.guard, a, b});
    }
  }
  return out;
}

void apply_delta(std::vector<RetireDecision>& decisions, double delta) {
  if (delta < 0.0 || delta > 1.0) throw std::invalid_argument("delta must be in [0,1]");
  size_t n = decisions.size();
  size_t skipped = static_cast<size_t>(std::floor(delta * static_cast<double>(n) + 1e-9));
  size_t cutoff = n - skipped;  // keep 1-based positions <= cutoff
  for (size_t i = cutoff; i < n; ++i) {
    decisions[i].kind = RetireDecision::Kind::NEVER;
    decisions[i].clauses.clear();
  }
}

Key eval_key(const KeyExpr& e, const Binding& b) {
  switch (e.kind) {
    case KeyExpr::Kind::CONST: return e.value;
    case KeyExpr::Kind::PARAM: return b.keys.at(e.value);
    case KeyExpr::Kind::DERIVED: return b.deriveds.at(e.value);
  }
  return 0;
}

bool guard_holds(const std::optional<uint32_t>& guard, const Binding& b) {
  return !guard || b.flags.at(*guard);
}

bool decision_allows(const RetireDecision& d, const Binding& b) {
  switch (d.kind) {
    case RetireDecision::Kind::ALWAYS: return true;
    case RetireDecision::Kind::NEVER: return false;
    case RetireDecision::Kind::CONDITIONAL: break;
  }
  for (const auto& c : d.clauses) {
    bool later_runs = guard_holds(c.guard, b);
    if (later_runs && eval_key(c.a, b) == eval_key(c.b, b)) return false;
  }
  return true;
}

TxnInstance instantiate(const TxnTemplate& tmpl, const std::vector<RetireDecision>& decisions,
                        const Binding& binding, uint32_t table_id) {
  auto flat = unroll(tmpl);
  if (decisions.size() != flat.size()) {
    throw std::invalid_argument("instantiate: decision list does not match template");
  }
  TxnInstance inst;
  for (size_t i = 0; i < flat.size(); ++i) {
    if (!guard_holds(flat[i].guard, binding)) continue;
    InstanceAccess a;
    a.table = table_id;
    a.key = eval_key(flat[i].key, binding);
    a.mode = flat[i].mode;
    a.retire = flat[i].mode == LockMode::EX && decision_allows(decisions[i], binding);
    inst.accesses.push_back(a);
  }
  return inst;
}

namespace {

KeyExpr parse_key_expr(const nlohmann::json& j) {
  if (j.contains("const")) return KeyExpr::constant(j["const"].get<Key>());
  if (j.contains("param")) return KeyExpr::param(j["param"].get<uint32_t>());
  if (j.contains("derived")) return KeyExpr::derived(j["derived"].get<uint32_t>());
  throw std::invalid_argument("key expression needs const|param|derived");
}

TemplateAccess parse_access(const nlohmann::json& j) {
  TemplateAccess a;
  a.table = j.value("table", "t");
  a.key = parse_key_expr(j.at("key"));
  std::string m = j.value("mode", "SH");
  if (m == "SH") {
    a.mode = LockMode::SH;
  } else if (m == "EX") {
    a.mode = LockMode::EX;
  } else {
    throw std::invalid_argument("mode must be SH or EX");
  }
  if (j.contains("guard")) a.guard = j["guard"].get<uint32_t>();
  return a;
}

}  // namespace

TxnTemplate parse_template_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TxnTemplate t;
  t.name = j.value("name", "txn");
  t.key_params = j.value("key_params", 0u);
  t.flag_params = j.value("flag_params", 0u);
  t.derived_slots = j.value("derived_slots", 0u);
  t.user_abort_prob = j.value("user_abort_prob", 0.0);
  for (const auto& el : j.at("accesses")) {
    TemplateElement e;
    if (el.contains("repeat")) {
      RepeatGroup rep;
      rep.count = el["repeat"].get<uint32_t>();
      rep.param_step = el.value("param_step", 1u);
      for (const auto& b : el.at("body")) rep.body.push_back(parse_access(b));
      e.node = rep;
    } else {
      e.node = parse_access(el);
    }
    t.elements.push_back(std::move(e));
  }
  // validate references now, not at first use
  unroll(t);
  return t;
}

TxnTemplate load_template_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open template: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_template_json(os.str());
}

}  // namespace bamboo
