#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "separata/formula.hpp"
#include "separata/logic.hpp"
#include "separata/sequent.hpp"

namespace separata {

struct PrincipalFormula {
  Side side;
  LabelledFormula lf;
  friend bool operator==(const PrincipalFormula&, const PrincipalFormula&) = default;
};

// A backward rule application. Which fields are used depends on the rule:
//
//   id                 formulae = [Γ w:A, Δ w′:A]     w ⊢E w′
//   BotL TopR EmpR     formulae = [principal]          EmpR: w ⊢E ε
//   logical rules      formulae = [principal]
//   StarL WandR        formulae = [principal], fresh = [x, y]
//   StarR WandL        formulae = [principal], rels = [(x,y ▷ z)]
//   E U′               rels = [(x,y ▷ z)] / params = [w]
//   A                  rels = [(x,y ▷ z), (u,v ▷ x)], fresh = [w]
//   A_C                rels = [(x,y ▷ x)], fresh = [w]
//   Eq1 Eq2 P C IU D   rels = principal atoms, subst = [θ]
//   S                  ineqs = [(z ≠ ε)], fresh = [x, y]
//   NeqL               ineqs = [(w ≠ w′)]                w ⊢E w′
//   EM                 params = [w]
//   CS                 rels = [(x,y ▷ z), (u,v ▷ z′)], fresh = [p, q, s, t]
//   CS_C               rels = [(x,y ▷ z)], fresh = [p, q, s, t]
//   MapstoL1           formulae = [Γ h:e1↦e2]             h ⊢E ε
//   MapstoL2           formulae = [Γ h0:e1↦e2], rels = [(h1,h2 ▷ h0)]
//   MapstoL3           formulae = [Γ h:e1↦e2, Γ h′:e1↦e3], subst = [[h/h′]]
//   MapstoL4           formulae = [Γ h:e1↦e2, Γ h:e3↦e4]
//   EqExprL EqExprR    formulae = [principal]
//   ExistsL ExistsR    formulae = [principal], witness = e
//
// `subst` and `expr_subst` are derived data for readers of a proof; the
// checker recomputes them from the principals and rejects a mismatch.
struct RuleInstance {
  RuleId rule = RuleId::Id;
  std::vector<PrincipalFormula> formulae;
  std::vector<RelAtom> rels;
  std::vector<Ineq> ineqs;
  std::vector<Label> fresh;
  std::vector<Label> params;
  std::vector<Subst> subst;
  std::vector<std::pair<Expr, Expr>> expr_subst;  // (from, to), in order
  std::optional<Expr> witness;
};

class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A derivation tree. Only the root needs a conclusion: every other
// conclusion is determined by replaying the instances. Subproofs may be
// shared between siblings.
struct Derivation {
  std::optional<Sequent> conclusion;
  std::optional<RuleInstance> instance;  // nullopt: open leaf
  std::vector<std::shared_ptr<const Derivation>> premises;

  Derivation() = default;
  Derivation(const Derivation&) = delete;
  Derivation& operator=(const Derivation&) = delete;
  ~Derivation();
};

using DerivationPtr = std::shared_ptr<const Derivation>;

DerivationPtr make_node(RuleInstance inst, std::vector<DerivationPtr> premises);

// Zero-premise instance closing s, if any: id, BotL, TopR, EmpR, then NeqL and
// MapstoL1 / EqExprR when their rules are enabled.
std::optional<RuleInstance> applicable_closures(const Sequent& s, const LogicConfig& cfg);

// Same as applicable_closures for a sequent whose 𝒢 admits no Eq1 / Eq2 /
// P / C / IU / D step, where ⊢E is plain label equality.
std::optional<RuleInstance> closure_on_normal_form(const Sequent& s, const LogicConfig& cfg);

// Premises of inst applied backward to s. Throws RuleError on a violated side
// condition or absent principal; never checks whether the rule is enabled.
std::vector<Sequent> expand(const Sequent& s, const RuleInstance& inst, const LogicConfig& cfg);

// Turns s into premise `which` of inst in place; same checks as expand.
void apply_premise(Sequent& s, const RuleInstance& inst, int which, const LogicConfig& cfg);

struct CheckResult {
  bool ok = true;
  std::vector<int> path;  // premise indices from the root to the first bad node
  std::string message;
  explicit operator bool() const { return ok; }
};

CheckResult check(const Derivation& d, const LogicConfig& cfg);
CheckResult check(const Derivation& d, const Sequent& conclusion, const LogicConfig& cfg);

// Number of nodes counting shared subproofs once per use.
std::size_t derivation_size(const Derivation& d);

// Indented text: one line per node with the rule and its conclusion.
std::string to_text(const Derivation& d, const LogicConfig& cfg);
// JSON: {"logic", "conclusion", "root", "nodes"} where each node records
// "rule", its principals and substitutions, and "premises" as indices into
// "nodes". Shared subproofs appear once.
std::string to_json(const Derivation& d, const LogicConfig& cfg);
// Inverse of to_json. Returns the derivation (conclusion at the root) and the
// logic it was written for. Throws std::runtime_error on malformed input.
std::pair<DerivationPtr, LogicConfig> from_json(const std::string& text);

std::string to_string(const RuleInstance& inst);

}  // namespace separata
