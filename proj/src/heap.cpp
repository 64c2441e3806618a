#include "separata/heap.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

namespace separata {

Formula apply_expr_subst(Formula f, const ExprSubst& theta) {
  for (const auto& [from, to] : theta.pairs)
    if (from != to) f = substitute_expr(f, from, to);
  return f;
}

void apply_expr_subst_in_place(Sequent& s, const ExprSubst& theta) {
  bool any = std::any_of(theta.pairs.begin(), theta.pairs.end(),
                         [](const auto& p) { return p.first != p.second; });
  if (!any) return;
  s.map_formulas([&](Formula f) { return f.mentions_heap() ? apply_expr_subst(f, theta) : f; });
}

Sequent apply_expr_subst(const Sequent& s, const ExprSubst& theta) {
  Sequent out = s;
  apply_expr_subst_in_place(out, theta);
  return out;
}

Expr fresh_store_var(const Sequent& s) {
  std::vector<Symbol> names;
  for (Side side : {Side::Left, Side::Right})
    for (const auto& e : s.side(side))
      if (e.lf.formula.mentions_heap()) collect_expr_names(e.lf.formula, names);
  std::uint64_t top = 0;
  for (Symbol n : names) {
    const std::string& t = n.name();
    if (t.size() < 2 || t[0] != 'e') continue;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(t.data() + 1, t.data() + t.size(), v);
    if (ec == std::errc() && p == t.data() + t.size()) top = std::max(top, v);
  }
  return Expr::named("e" + std::to_string(top + 1));
}

std::vector<Expr> store_vars_of(const Sequent& s) {
  std::vector<Expr> out;
  std::unordered_set<Expr> seen;
  for (Side side : {Side::Left, Side::Right})
    for (const auto& e : s.side(side)) {
      if (!e.lf.formula.mentions_heap()) continue;
      for (Expr x : free_exprs(e.lf.formula))
        if (seen.insert(x).second) out.push_back(x);
    }
  return out;
}

std::optional<RuleInstance> close_eq_r(const Sequent& s) {
  for (const auto& e : s.delta()) {
    Formula f = e.lf.formula;
    if (f.kind() == Connective::ExprEq && f.left_expr() == f.right_expr()) {
      RuleInstance inst;
      inst.rule = RuleId::EqExprR;
      inst.formulae.push_back({Side::Right, e.lf});
      return inst;
    }
  }
  return std::nullopt;
}

}  // namespace separata
