#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bamboo/common.hpp"
#include "bamboo/policy.hpp"

namespace bamboo {

// Key expression in a declarative transaction template: a constant, a
// reference to a key parameter slot, or a value derived from parameters by
// an opaque function (comparable to nothing at plan time).
struct KeyExpr {
  enum class Kind : uint8_t { CONST, PARAM, DERIVED };
  Kind kind = Kind::CONST;
  uint64_t value = 0;  // constant / param slot / derived slot

  static KeyExpr constant(Key k) { return {Kind::CONST, k}; }
  static KeyExpr param(uint32_t slot) { return {Kind::PARAM, slot}; }
  static KeyExpr derived(uint32_t slot) { return {Kind::DERIVED, slot}; }
  bool operator==(const KeyExpr&) const = default;
};

struct TemplateAccess {
  std::string table = "t";
  KeyExpr key;
  LockMode mode = LockMode::SH;
  std::optional<uint32_t> guard;  // boolean parameter controlling execution
};

// Bounded repeat group: the body is unrolled `count` times with PARAM and
// DERIVED slots advanced by `param_step` per iteration (distinct key
// parameters per iteration). Only fixed iteration counts are supported.
struct RepeatGroup {
  uint32_t count = 0;
  uint32_t param_step = 1;
  std::vector<TemplateAccess> body;
};

struct TemplateElement {
  std::variant<TemplateAccess, RepeatGroup> node;
};

struct TxnTemplate {
  std::string name;
  uint32_t key_params = 0;
  uint32_t flag_params = 0;
  uint32_t derived_slots = 0;
  double user_abort_prob = 0.0;
  std::vector<TemplateElement> elements;
};

// Retire decision per access. CONDITIONAL carries clauses of the form
// (!guard || key_a != key_b), one per later potentially-aliasing access;
// retire happens when every clause evaluates true under the binding.
struct RetireClause {
  std::optional<uint32_t> guard;
  KeyExpr a;
  KeyExpr b;
};

struct RetireDecision {
  enum class Kind : uint8_t { ALWAYS, NEVER, CONDITIONAL };
  Kind kind = Kind::ALWAYS;
  std::vector<RetireClause> clauses;
};

struct Binding {
  std::vector<Key> keys;      // key parameter values
  std::vector<bool> flags;    // guard values
  std::vector<Key> deriveds;  // concrete values of derived expressions
};

// Flatten repeat groups. Throws std::invalid_argument for zero-count
// groups or out-of-range parameter references.
std::vector<TemplateAccess> unroll(const TxnTemplate& tmpl);

// Safe retire points over the unrolled access list. An EX access retires
// ALWAYS when no later EX access can touch the same table, NEVER when a
// later same-table EX access has an incomparable (derived) key expression,
// and CONDITIONALly otherwise. Decisions for SH accesses are ALWAYS
// (reads cannot cause cascades).
std::vector<RetireDecision> plan_retires(const TxnTemplate& tmpl);

// Opt 2 at plan time: EX accesses in the trailing delta fraction become
// NEVER. Positions are 1-based over all accesses; the cutoff is
// n - floor(delta * n).
void apply_delta(std::vector<RetireDecision>& decisions, double delta);

Key eval_key(const KeyExpr& e, const Binding& b);
bool guard_holds(const std::optional<uint32_t>& guard, const Binding& b);
bool decision_allows(const RetireDecision& d, const Binding& b);

struct InstanceAccess {
  uint32_t table = 0;
  Key key = 0;
  LockMode mode = LockMode::SH;
  bool retire = false;
};

struct TxnInstance {
  std::vector<InstanceAccess> accesses;
  bool user_abort = false;
};

// Evaluate a template under a binding: guarded-out accesses drop, keys
// resolve, retire decisions evaluate. `table_id` resolves table names.
TxnInstance instantiate(const TxnTemplate& tmpl, const std::vector<RetireDecision>& decisions,
                        const Binding& binding, uint32_t table_id);

// JSON template format (see README): name, key_params, flag_params,
// derived_slots, user_abort_prob, accesses: [{table, key: {const|param|
// derived: n}, mode, guard?} | {repeat, param_step, body: [...]}]
TxnTemplate parse_template_json(const std::string& text);
TxnTemplate load_template_file(const std::string& path);

}  // namespace bamboo
