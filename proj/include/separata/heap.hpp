#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "separata/calculus.hpp"
#include "separata/sequent.hpp"

namespace separata {

// Store-variable substitution, applied pair by pair in order.
struct ExprSubst {
  std::vector<std::pair<Expr, Expr>> pairs;  // (from, to)
};

Formula apply_expr_subst(Formula f, const ExprSubst& theta);
Sequent apply_expr_subst(const Sequent& s, const ExprSubst& theta);
void apply_expr_subst_in_place(Sequent& s, const ExprSubst& theta);

// "e<n>" with n one past the largest such suffix among all store-variable
// names of s, bound or free.
Expr fresh_store_var(const Sequent& s);

// Free store variables of the formulae of s, in first-occurrence order.
std::vector<Expr> store_vars_of(const Sequent& s);

// EqExprR instance when some h:e=e is in Δ.
std::optional<RuleInstance> close_eq_r(const Sequent& s);

}  // namespace separata
