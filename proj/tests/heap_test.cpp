#include "doctest.h"
#include "separata/calculus.hpp"
#include "separata/heap.hpp"

using namespace separata;

namespace {

Label L(std::uint32_t i) { return Label::var(i); }
Expr E(const char* n) { return Expr::named(n); }

RuleInstance on(RuleId r, std::vector<PrincipalFormula> fs) {
  RuleInstance i;
  i.rule = r;
  i.formulae = std::move(fs);
  return i;
}

}  // namespace

TEST_SUITE("heap") {
  TEST_CASE("MapstoL4 unifies the contents of one singleton heap") {
    Sequent s;
    LabelledFormula a{L(1), parse("e1 |-> e2")}, b{L(1), parse("e3 |-> e4")};
    s.add_formula(Side::Left, a);
    s.add_formula(Side::Left, b);
    s.add_formula(Side::Right, {L(2), parse("e3 = e4")});
    auto ps = expand(s, on(RuleId::MapstoL4, {{Side::Left, a}, {Side::Left, b}}), LogicConfig::separata_plus());
    REQUIRE(ps.size() == 1);
    Sequent want;
    want.add_formula(Side::Left, a);
    want.add_formula(Side::Right, {L(2), parse("e1 = e2")});
    CHECK(ps[0] == want);
  }

  TEST_CASE("EqExprL drops the equation and rewrites") {
    Sequent s;
    LabelledFormula eq{L(1), parse("e1 = e2")};
    s.add_formula(Side::Left, eq);
    s.add_formula(Side::Left, {L(2), parse("e1 |-> e3")});
    s.add_formula(Side::Right, {L(2), parse("exists x. e1 |-> x")});
    auto ps = expand(s, on(RuleId::EqExprL, {{Side::Left, eq}}), LogicConfig::separata_plus());
    REQUIRE(ps.size() == 1);
    Sequent want;
    want.add_formula(Side::Left, {L(2), parse("e2 |-> e3")});
    want.add_formula(Side::Right, {L(2), parse("exists x. e2 |-> x")});
    CHECK(ps[0] == want);
  }

  TEST_CASE("expression substitution") {
    Sequent s;
    s.add_formula(Side::Left, {L(1), parse("e1 |-> e2")});
    CHECK(apply_expr_subst(s, ExprSubst{}) == s);
    CHECK(apply_expr_subst(parse("e1 |-> e2"), ExprSubst{{{E("e1"), E("e2")}, {E("e2"), E("e3")}}}) ==
          parse("e3 |-> e3"));
    // A bound variable is renamed rather than captured.
    Formula f = apply_expr_subst(parse("exists x. x |-> e1"), ExprSubst{{{E("e1"), E("x")}}});
    CHECK(free_exprs(f) == std::vector<Expr>{E("x")});
  }

  TEST_CASE("fresh store variables") {
    Sequent s;
    CHECK(fresh_store_var(s) == E("e1"));
    s.add_formula(Side::Left, {L(1), parse("e1 |-> e2")});
    CHECK(fresh_store_var(s) == E("e3"));
    CHECK(fresh_store_var(s) == E("e3"));
    s.add_formula(Side::Left, {L(1), parse("exists e7. e7 = e1")});
    CHECK(fresh_store_var(s) == E("e8"));
    CHECK(store_vars_of(s) == std::vector<Expr>{E("e1"), E("e2")});
  }

  TEST_CASE("EqExprR") {
    Sequent s;
    s.add_formula(Side::Right, {L(1), parse("e1 = e1")});
    auto c = close_eq_r(s);
    REQUIRE(c);
    CHECK(c->rule == RuleId::EqExprR);
    Sequent t;
    t.add_formula(Side::Right, {L(1), parse("e1 = e2")});
    CHECK_FALSE(close_eq_r(t));
    LabelledFormula eq{L(2), parse("e1 = e2")};
    t.add_formula(Side::Left, eq);
    auto ps = expand(t, on(RuleId::EqExprL, {{Side::Left, eq}}), LogicConfig::separata_plus());
    REQUIRE(ps.size() == 1);
    CHECK(close_eq_r(ps[0]));
  }

  TEST_CASE("quantifier rules") {
    Sequent s;
    LabelledFormula ex{L(1), parse("exists x. x |-> e1")};
    s.add_formula(Side::Left, ex);
    RuleInstance l = on(RuleId::ExistsL, {{Side::Left, ex}});
    l.witness = E("e1");
    CHECK_THROWS_AS(expand(s, l, LogicConfig::separata_plus()), RuleError);
    l.witness = fresh_store_var(s);
    auto ps = expand(s, l, LogicConfig::separata_plus());
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].contains(Side::Left, {L(1), parse("e2 |-> e1")}));
    CHECK_FALSE(ps[0].contains(Side::Left, ex));

    Sequent t;
    LabelledFormula ex2{L(1), parse("exists x. x = e1")};
    t.add_formula(Side::Right, ex2);
    RuleInstance r = on(RuleId::ExistsR, {{Side::Right, ex2}});
    r.witness = E("e1");
    ps = expand(t, r, LogicConfig::separata_plus());
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].contains(Side::Right, ex2));
    CHECK(close_eq_r(ps[0]));
  }
}
