#include "separata/calculus.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "separata/heap.hpp"
#include "separata/unify.hpp"

namespace separata {

Derivation::~Derivation() {
  // Long single-premise chains would otherwise recurse once per node.
  std::vector<std::shared_ptr<const Derivation>> stack;
  stack.swap(premises);
  while (!stack.empty()) {
    auto p = std::move(stack.back());
    stack.pop_back();
    if (p && p.use_count() == 1) {
      auto& kids = const_cast<Derivation&>(*p).premises;
      for (auto& k : kids) stack.push_back(std::move(k));
      kids.clear();
    }
  }
}

DerivationPtr make_node(RuleInstance inst, std::vector<DerivationPtr> premises) {
  auto d = std::make_shared<Derivation>();
  d->instance = std::move(inst);
  d->premises = std::move(premises);
  return d;
}

namespace {

void need(bool cond, const std::string& what) {
  if (!cond) throw RuleError(what);
}

const PrincipalFormula& principal(const Sequent& s, const RuleInstance& inst, std::size_t i,
                                  Side side, Connective kind) {
  need(inst.formulae.size() > i, std::string(rule_name(inst.rule)) + ": missing principal formula");
  const auto& pf = inst.formulae[i];
  need(pf.side == side, std::string(rule_name(inst.rule)) + ": principal on the wrong side");
  need(pf.lf.formula.kind() == kind,
       std::string(rule_name(inst.rule)) + ": principal has the wrong connective");
  need(s.contains(side, pf.lf),
       std::string(rule_name(inst.rule)) + ": principal " + to_string(pf.lf) + " not in conclusion");
  return pf;
}

const RelAtom& rel_at(const Sequent& s, const RuleInstance& inst, std::size_t i) {
  need(inst.rels.size() > i, std::string(rule_name(inst.rule)) + ": missing relational atom");
  need(s.contains(inst.rels[i]), std::string(rule_name(inst.rule)) + ": atom " +
                                     to_string(inst.rels[i]) + " not in conclusion");
  return inst.rels[i];
}

void need_fresh(const Sequent& s, const RuleInstance& inst, std::size_t n) {
  need(inst.fresh.size() == n, std::string(rule_name(inst.rule)) + ": expected " +
                                   std::to_string(n) + " fresh labels");
  for (std::size_t i = 0; i < n; ++i) {
    Label l = inst.fresh[i];
    need(!l.is_eps(), std::string(rule_name(inst.rule)) + ": eps cannot be fresh");
    need(!s.occurs(l), std::string(rule_name(inst.rule)) + ": label " + to_string(l) +
                           " is not fresh");
    for (std::size_t j = 0; j < i; ++j)
      need(inst.fresh[j] != l, std::string(rule_name(inst.rule)) + ": fresh labels must differ");
  }
}

void need_subst(const RuleInstance& inst, Subst computed) {
  need(!computed.from.is_eps(), std::string(rule_name(inst.rule)) + ": cannot substitute for eps");
  need(computed.from != computed.to, std::string(rule_name(inst.rule)) + ": vacuous substitution");
  need(inst.subst.empty() || (inst.subst.size() == 1 && inst.subst[0] == computed),
       std::string(rule_name(inst.rule)) + ": recorded substitution does not match");
}

// Identify a and b, mapping the larger label to the smaller; returns the
// substitution performed (from == to when nothing happened).
Subst unify_labels(Sequent& s, Label a, Label b) {
  if (a == b) return {a, a};
  Subst th = a < b ? Subst{b, a} : Subst{a, b};
  s.substitute(th);
  return th;
}

Label image(Subst th, Label l) { return l == th.from ? th.to : l; }

// ⊢E representative map for the 𝒢 of s.
class Reps {
 public:
  Reps() = default;
  Reps(const Sequent& s, const LogicConfig& cfg) {
    Sequent g;
    for (const auto& e : s.rel()) g.add_rel(e.atom);
    steps_ = normalize(g, cfg).applied;
  }
  Label operator()(Label l) const { return representative(steps_, l); }
  bool identity() const { return steps_.empty(); }

 private:
  std::vector<NormStep> steps_;
};

std::optional<RuleInstance> closure_with(const Sequent& s, const LogicConfig& cfg, const Reps& rep) {
  auto one = [](RuleId r, Side side, const LabelledFormula& lf) {
    RuleInstance inst;
    inst.rule = r;
    inst.formulae.push_back({side, lf});
    return inst;
  };
  for (const auto& e : s.gamma())
    if (e.lf.formula.kind() == Connective::Bot) return one(RuleId::BotL, Side::Left, e.lf);
  for (const auto& e : s.delta()) {
    Connective k = e.lf.formula.kind();
    if (k == Connective::Top) return one(RuleId::TopR, Side::Right, e.lf);
    if (k == Connective::Emp && rep(e.lf.label).is_eps()) return one(RuleId::EmpR, Side::Right, e.lf);
  }
  if (rep.identity()) {
    for (const auto& e : s.gamma())
      if (s.contains(Side::Right, e.lf)) {
        RuleInstance inst = one(RuleId::Id, Side::Left, e.lf);
        inst.formulae.push_back({Side::Right, e.lf});
        return inst;
      }
  } else {
    std::unordered_map<std::uint64_t, LabelledFormula> left;
    auto key = [&](const LabelledFormula& lf) {
      return (static_cast<std::uint64_t>(rep(lf.label).index) << 32) | lf.formula.id();
    };
    for (const auto& e : s.gamma()) left.emplace(key(e.lf), e.lf);
    for (const auto& e : s.delta()) {
      auto it = left.find(key(e.lf));
      if (it == left.end()) continue;
      RuleInstance inst = one(RuleId::Id, Side::Left, it->second);
      inst.formulae.push_back({Side::Right, e.lf});
      return inst;
    }
  }
  if (cfg.splittability)
    for (const auto& e : s.ineq())
      if (rep(e.ineq.left) == rep(e.ineq.right)) {
        RuleInstance inst;
        inst.rule = RuleId::NeqL;
        inst.ineqs.push_back(e.ineq);
        return inst;
      }
  if (cfg.heap) {
    for (const auto& e : s.gamma())
      if (e.lf.formula.kind() == Connective::PointsTo && rep(e.lf.label).is_eps())
        return one(RuleId::MapstoL1, Side::Left, e.lf);
    if (auto inst = close_eq_r(s)) return inst;
  }
  return std::nullopt;
}

void validate_closure(const Sequent& s, const RuleInstance& inst, const LogicConfig& cfg) {
  const char* name = rule_name(inst.rule);
  switch (inst.rule) {
    case RuleId::Id: {
      need(inst.formulae.size() == 2, std::string(name) + ": needs two principal formulae");
      const auto& l = inst.formulae[0];
      const auto& r = inst.formulae[1];
      need(l.side == Side::Left && r.side == Side::Right, "id: principals on the wrong sides");
      need(l.lf.formula == r.lf.formula, "id: principal formulae differ");
      need(s.contains(Side::Left, l.lf) && s.contains(Side::Right, r.lf),
           "id: principal not in conclusion");
      need(entails_eq(s, l.lf.label, r.lf.label, cfg), "id: labels are not equal modulo the atoms");
      return;
    }
    case RuleId::BotL:
      principal(s, inst, 0, Side::Left, Connective::Bot);
      return;
    case RuleId::TopR:
      principal(s, inst, 0, Side::Right, Connective::Top);
      return;
    case RuleId::EmpR: {
      const auto& pf = principal(s, inst, 0, Side::Right, Connective::Emp);
      need(entails_eq(s, pf.lf.label, Label::eps(), cfg), "EmpR: label is not eps modulo the atoms");
      return;
    }
    case RuleId::NeqL: {
      need(inst.ineqs.size() == 1 && s.contains(inst.ineqs[0]), "NeqL: inequality not in conclusion");
      need(entails_eq(s, inst.ineqs[0].left, inst.ineqs[0].right, cfg),
           "NeqL: sides are not equal modulo the atoms");
      return;
    }
    case RuleId::MapstoL1: {
      const auto& pf = principal(s, inst, 0, Side::Left, Connective::PointsTo);
      need(entails_eq(s, pf.lf.label, Label::eps(), cfg), "MapstoL1: label is not eps modulo the atoms");
      return;
    }
    case RuleId::EqExprR: {
      const auto& pf = principal(s, inst, 0, Side::Right, Connective::ExprEq);
      need(pf.lf.formula.left_expr() == pf.lf.formula.right_expr(), "EqExprR: sides differ");
      return;
    }
    default:
      throw RuleError(std::string(name) + " is not a closing rule");
  }
}

}  // namespace

std::optional<RuleInstance> applicable_closures(const Sequent& s, const LogicConfig& cfg) {
  return closure_with(s, cfg, Reps(s, cfg));
}

std::optional<RuleInstance> closure_on_normal_form(const Sequent& s, const LogicConfig& cfg) {
  return closure_with(s, cfg, Reps());
}

void apply_premise(Sequent& s, const RuleInstance& inst, int which, const LogicConfig& cfg) {
  const int arity = rule_arity(inst.rule);
  if (arity == 0) {
    validate_closure(s, inst, cfg);
    throw RuleError(std::string(rule_name(inst.rule)) + " has no premises");
  }
  need(which >= 0 && which < arity, "premise index out of range");
  const char* name = rule_name(inst.rule);
  auto front = [&](Side side, Label l, Formula f) { s.add_formula(side, {l, f}, Placement::Front); };

  switch (inst.rule) {
    case RuleId::EmpL: {
      auto lf = principal(s, inst, 0, Side::Left, Connective::Emp).lf;
      s.remove_formula(Side::Left, lf);
      s.add_rel({Label::eps(), lf.label, Label::eps()});
      return;
    }
    case RuleId::AndL: {
      auto lf = principal(s, inst, 0, Side::Left, Connective::And).lf;
      s.remove_formula(Side::Left, lf);
      front(Side::Left, lf.label, lf.formula.rhs());
      front(Side::Left, lf.label, lf.formula.lhs());
      return;
    }
    case RuleId::AndR: {
      auto lf = principal(s, inst, 0, Side::Right, Connective::And).lf;
      s.remove_formula(Side::Right, lf);
      front(Side::Right, lf.label, which == 0 ? lf.formula.lhs() : lf.formula.rhs());
      return;
    }
    case RuleId::OrL: {
      auto lf = principal(s, inst, 0, Side::Left, Connective::Or).lf;
      s.remove_formula(Side::Left, lf);
      front(Side::Left, lf.label, which == 0 ? lf.formula.lhs() : lf.formula.rhs());
      return;
    }
    case RuleId::OrR: {
      auto lf = principal(s, inst, 0, Side::Right, Connective::Or).lf;
      s.remove_formula(Side::Right, lf);
      front(Side::Right, lf.label, lf.formula.rhs());
      front(Side::Right, lf.label, lf.formula.lhs());
      return;
    }
    case RuleId::ImpL: {
      auto lf = principal(s, inst, 0, Side::Left, Connective::Imp).lf;
      s.remove_formula(Side::Left, lf);
      if (which == 0) front(Side::Right, lf.label, lf.formula.lhs());
      else front(Side::Left, lf.label, lf.formula.rhs());
      return;
    }
    case RuleId::ImpR: {
      auto lf = principal(s, inst, 0, Side::Right, Connective::Imp).lf;
      s.remove_formula(Side::Right, lf);
      front(Side::Left, lf.label, lf.formula.lhs());
      front(Side::Right, lf.label, lf.formula.rhs());
      return;
    }
    case RuleId::NotL: {
      auto lf = principal(s, inst, 0, Side::Left, Connective::Not).lf;
      s.remove_formula(Side::Left, lf);
      front(Side::Right, lf.label, lf.formula.operand());
      return;
    }
    case RuleId::NotR: {
      auto lf = principal(s, inst, 0, Side::Right, Connective::Not).lf;
      s.remove_formula(Side::Right, lf);
      front(Side::Left, lf.label, lf.formula.operand());
      return;
    }
    case RuleId::StarL: {
      auto lf = principal(s, inst, 0, Side::Left, Connective::Star).lf;
      need_fresh(s, inst, 2);
      Label x = inst.fresh[0], y = inst.fresh[1];
      s.remove_formula(Side::Left, lf);
      s.add_rel({x, y, lf.label});
      front(Side::Left, y, lf.formula.rhs());
      front(Side::Left, x, lf.formula.lhs());
      return;
    }
    case RuleId::WandR: {
      auto lf = principal(s, inst, 0, Side::Right, Connective::Wand).lf;
      need_fresh(s, inst, 2);
      Label x = inst.fresh[0], y = inst.fresh[1];
      s.remove_formula(Side::Right, lf);
      s.add_rel({x, lf.label, y});
      front(Side::Left, x, lf.formula.lhs());
      front(Side::Right, y, lf.formula.rhs());
      return;
    }
    case RuleId::StarR: {
      auto lf = principal(s, inst, 0, Side::Right, Connective::Star).lf;
      RelAtom r = rel_at(s, inst, 0);
      need(entails_eq(s, r.target, lf.label, cfg), "StarR: atom target differs from the principal label");
      s.move_to_back(Side::Right, lf);
      if (which == 0) front(Side::Right, r.left, lf.formula.lhs());
      else front(Side::Right, r.right, lf.formula.rhs());
      return;
    }
    case RuleId::WandL: {
      auto lf = principal(s, inst, 0, Side::Left, Connective::Wand).lf;
      RelAtom r = rel_at(s, inst, 0);
      need(entails_eq(s, r.right, lf.label, cfg), "WandL: atom differs from the principal label");
      s.move_to_back(Side::Left, lf);
      if (which == 0) front(Side::Right, r.left, lf.formula.lhs());
      else front(Side::Left, r.target, lf.formula.rhs());
      return;
    }
    case RuleId::E: {
      RelAtom r = rel_at(s, inst, 0);
      s.add_rel({r.right, r.left, r.target});
      return;
    }
    case RuleId::A: {
      RelAtom r1 = rel_at(s, inst, 0);
      RelAtom r2 = rel_at(s, inst, 1);
      need(r2.target == r1.left, "A: second atom must split the first atom's left label");
      need(!(r1 == r2), "A: principal atoms must differ (use A_C)");
      need_fresh(s, inst, 1);
      Label w = inst.fresh[0];
      s.add_rel({r2.left, w, r1.target});
      s.add_rel({r1.right, r2.right, w});
      return;
    }
    case RuleId::A_C: {
      RelAtom r = rel_at(s, inst, 0);
      need(r.left == r.target, "A_C: atom must have the form (x,y |> x)");
      need_fresh(s, inst, 1);
      Label w = inst.fresh[0];
      s.add_rel({r.left, w, r.left});
      s.add_rel({r.right, r.right, w});
      return;
    }
    case RuleId::U: {
      need(inst.params.size() == 1, "U': expected one label");
      Label w = inst.params[0];
      need(w.is_eps() || s.occurs(w), "U': label " + to_string(w) + " does not occur in the conclusion");
      s.add_rel({w, Label::eps(), w});
      return;
    }
    case RuleId::Eq1:
    case RuleId::Eq2: {
      RelAtom r = rel_at(s, inst, 0);
      need(r.left.is_eps(), std::string(name) + ": atom must have eps on the left");
      Subst th = inst.rule == RuleId::Eq1 ? Subst{r.right, r.target} : Subst{r.target, r.right};
      need_subst(inst, th);
      s.substitute(th);
      return;
    }
    case RuleId::P: {
      RelAtom r1 = rel_at(s, inst, 0);
      RelAtom r2 = rel_at(s, inst, 1);
      need(r1.left == r2.left && r1.right == r2.right, "P: atoms must share both arguments");
      Subst th{r2.target, r1.target};
      need_subst(inst, th);
      s.substitute(th);
      return;
    }
    case RuleId::C: {
      RelAtom r1 = rel_at(s, inst, 0);
      RelAtom r2 = rel_at(s, inst, 1);
      need(r1.left == r2.left && r1.target == r2.target, "C: atoms must share left label and target");
      Subst th{r2.right, r1.right};
      need_subst(inst, th);
      s.substitute(th);
      return;
    }
    case RuleId::IU: {
      RelAtom r = rel_at(s, inst, 0);
      need(r.target.is_eps(), "IU: atom target must be eps");
      Subst th{r.left, Label::eps()};
      need_subst(inst, th);
      s.substitute(th);
      return;
    }
    case RuleId::D: {
      RelAtom r = rel_at(s, inst, 0);
      need(r.left == r.right, "D: atom must have the form (x,x |> y)");
      Subst th{r.left, Label::eps()};
      need_subst(inst, th);
      s.substitute(th);
      return;
    }
    case RuleId::S: {
      need(inst.ineqs.size() == 1 && s.contains(inst.ineqs[0]), "S: inequality not in conclusion");
      Ineq q = inst.ineqs[0];
      need(q.right.is_eps(), "S: inequality must have the form (z != eps)");
      need_fresh(s, inst, 2);
      Label x = inst.fresh[0], y = inst.fresh[1];
      s.add_rel({x, y, q.left});
      s.add_ineq({x, Label::eps()});
      s.add_ineq({y, Label::eps()});
      return;
    }
    case RuleId::EM: {
      need(inst.params.size() == 1, "EM: expected one label");
      Label w = inst.params[0];
      if (which == 0) s.add_ineq({w, Label::eps()});
      else s.add_rel({Label::eps(), w, Label::eps()});
      return;
    }
    case RuleId::CS: {
      RelAtom r1 = rel_at(s, inst, 0);
      RelAtom r2 = rel_at(s, inst, 1);
      need(entails_eq(s, r1.target, r2.target, cfg), "CS: atoms must have equal targets");
      need_fresh(s, inst, 4);
      Label p = inst.fresh[0], q = inst.fresh[1], ss = inst.fresh[2], t = inst.fresh[3];
      s.add_rel({p, q, r1.left});
      s.add_rel({p, ss, r2.left});
      s.add_rel({ss, t, r1.right});
      s.add_rel({q, t, r2.right});
      return;
    }
    case RuleId::CS_C: {
      RelAtom r = rel_at(s, inst, 0);
      need_fresh(s, inst, 4);
      Label p = inst.fresh[0], q = inst.fresh[1], ss = inst.fresh[2], t = inst.fresh[3];
      s.add_rel({p, q, r.left});
      s.add_rel({p, ss, r.left});
      s.add_rel({ss, t, r.right});
      s.add_rel({q, t, r.right});
      return;
    }
    case RuleId::MapstoL2: {
      auto lf = principal(s, inst, 0, Side::Left, Connective::PointsTo).lf;
      RelAtom r = rel_at(s, inst, 0);
      need(r.target == lf.label, "MapstoL2: atom target differs from the principal label");
      Label h0 = r.target, h1 = r.left, h2 = r.right;
      // First premise: h1 = ε, h2 = h0; second: h2 = ε, h1 = h0.
      Label unit = which == 0 ? h1 : h2;
      Label whole = which == 0 ? h2 : h1;
      Subst t1 = unify_labels(s, unit, Label::eps());
      whole = image(t1, whole);
      h0 = image(t1, h0);
      Subst t2 = unify_labels(s, whole, h0);
      h0 = image(t2, h0);
      if (which == 0) s.add_rel({Label::eps(), h0, h0});
      else s.add_rel({h0, Label::eps(), h0});
      return;
    }
    case RuleId::MapstoL3: {
      auto a = principal(s, inst, 0, Side::Left, Connective::PointsTo).lf;
      auto b = principal(s, inst, 1, Side::Left, Connective::PointsTo).lf;
      need(a.formula.left_expr() == b.formula.left_expr(), "MapstoL3: addresses differ");
      Subst th{b.label, a.label};
      need_subst(inst, th);
      s.substitute(th);
      return;
    }
    case RuleId::MapstoL4: {
      auto a = principal(s, inst, 0, Side::Left, Connective::PointsTo).lf;
      auto b = principal(s, inst, 1, Side::Left, Connective::PointsTo).lf;
      need(a.label == b.label, "MapstoL4: principals must share a label");
      need(!(a == b), "MapstoL4: principals must differ");
      ExprSubst th{{{b.formula.left_expr(), a.formula.left_expr()},
                    {b.formula.right_expr(), a.formula.right_expr()}}};
      need(inst.expr_subst.empty() || inst.expr_subst == th.pairs,
           "MapstoL4: recorded substitution does not match");
      s.remove_formula(Side::Left, a);
      s.remove_formula(Side::Left, b);
      apply_expr_subst_in_place(s, th);
      s.add_formula(Side::Left, a, Placement::Front);
      return;
    }
    case RuleId::EqExprL: {
      auto lf = principal(s, inst, 0, Side::Left, Connective::ExprEq).lf;
      ExprSubst th{{{lf.formula.left_expr(), lf.formula.right_expr()}}};
      need(inst.expr_subst.empty() || inst.expr_subst == th.pairs,
           "EqExprL: recorded substitution does not match");
      s.remove_formula(Side::Left, lf);
      apply_expr_subst_in_place(s, th);
      return;
    }
    case RuleId::ExistsL: {
      auto lf = principal(s, inst, 0, Side::Left, Connective::Exists).lf;
      need(inst.witness.has_value(), "ExistsL: missing witness");
      Expr e = *inst.witness;
      for (Expr x : store_vars_of(s))
        need(x != e, "ExistsL: witness " + e.name() + " occurs free in the conclusion");
      s.remove_formula(Side::Left, lf);
      front(Side::Left, lf.label,
            substitute_expr(lf.formula.body(), Expr{lf.formula.symbol()}, e));
      return;
    }
    case RuleId::ExistsR: {
      auto lf = principal(s, inst, 0, Side::Right, Connective::Exists).lf;
      need(inst.witness.has_value(), "ExistsR: missing witness");
      s.move_to_back(Side::Right, lf);
      front(Side::Right, lf.label,
            substitute_expr(lf.formula.body(), Expr{lf.formula.symbol()}, *inst.witness));
      return;
    }
    default:
      throw RuleError(std::string(name) + ": unsupported rule");
  }
}

std::vector<Sequent> expand(const Sequent& s, const RuleInstance& inst, const LogicConfig& cfg) {
  const int arity = rule_arity(inst.rule);
  std::vector<Sequent> out;
  if (arity == 0) {
    validate_closure(s, inst, cfg);
    return out;
  }
  out.reserve(arity);
  for (int i = 0; i < arity; ++i) {
    out.push_back(s);
    apply_premise(out.back(), inst, i, cfg);
  }
  return out;
}

CheckResult check(const Derivation& d, const LogicConfig& cfg) {
  if (!d.conclusion) return {false, {}, "root has no conclusion"};
  return check(d, *d.conclusion, cfg);
}

CheckResult check(const Derivation& root, const Sequent& conclusion, const LogicConfig& cfg) {
  struct Item {
    const Derivation* node;
    Sequent seq;
    std::vector<int> path;
  };
  std::vector<Item> stack;
  stack.push_back({&root, conclusion, {}});
  // Shared subproofs are rechecked per use: their conclusions may differ.
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    const Derivation& n = *it.node;
    auto fail = [&](const std::string& msg) { return CheckResult{false, it.path, msg}; };
    if (!n.instance) return fail("open leaf: " + to_string(it.seq));
    const RuleInstance& inst = *n.instance;
    if (!rule_enabled(inst.rule, cfg))
      return fail(std::string("rule ") + rule_name(inst.rule) + " is not enabled in " + cfg.name());
    const int arity = rule_arity(inst.rule);
    if (static_cast<int>(n.premises.size()) != arity)
      return fail(std::string(rule_name(inst.rule)) + ": expected " + std::to_string(arity) +
                  " premises, found " + std::to_string(n.premises.size()));
    try {
      if (arity == 0) {
        validate_closure(it.seq, inst, cfg);
        continue;
      }
      for (int i = arity - 1; i >= 0; --i) {
        if (!n.premises[i]) return fail("missing premise");
        Sequent p = i == 0 ? std::move(it.seq) : it.seq;
        apply_premise(p, inst, i, cfg);
        auto path = it.path;
        path.push_back(i);
        stack.push_back({n.premises[i].get(), std::move(p), std::move(path)});
      }
    } catch (const RuleError& e) {
      return fail(e.what());
    } catch (const ContractViolation& e) {
      return fail(e.what());
    }
  }
  return {};
}

std::size_t derivation_size(const Derivation& d) {
  std::size_t n = 0;
  std::vector<const Derivation*> stack{&d};
  while (!stack.empty()) {
    const Derivation* x = stack.back();
    stack.pop_back();
    ++n;
    for (const auto& p : x->premises)
      if (p) stack.push_back(p.get());
  }
  return n;
}

std::string to_string(const RuleInstance& inst) {
  std::string out = rule_name(inst.rule);
  for (const auto& pf : inst.formulae) out += " " + to_string(pf.lf);
  for (const auto& r : inst.rels) out += " " + to_string(r);
  for (const auto& q : inst.ineqs) out += " " + to_string(q);
  for (Label l : inst.params) out += " " + to_string(l);
  if (!inst.fresh.empty()) {
    out += " fresh";
    for (Label l : inst.fresh) out += " " + to_string(l);
  }
  for (const auto& th : inst.subst) out += " [" + to_string(th.to) + "/" + to_string(th.from) + "]";
  for (const auto& [from, to] : inst.expr_subst) out += " [" + to.name() + "/" + from.name() + "]";
  if (inst.witness) out += " with " + inst.witness->name();
  return out;
}

}  // namespace separata
