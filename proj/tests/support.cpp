#include "support.hpp"

#include <functional>

#include "separata/heap.hpp"

namespace testing_support {

Formula random_formula(Rng& rng, const std::vector<std::string>& atoms, int depth) {
  if (depth <= 0 || coin(rng, 0.25)) {
    switch (pick(rng, 8)) {
      case 0: return Formula::emp();
      case 1: return coin(rng) ? Formula::top() : Formula::bot();
      default: return Formula::prop(atoms[pick(rng, atoms.size())]);
    }
  }
  Formula a = random_formula(rng, atoms, depth - 1);
  switch (pick(rng, 6)) {
    case 0: return Formula::negation(a);
    case 1: return Formula::conj(a, random_formula(rng, atoms, depth - 1));
    case 2: return Formula::disj(a, random_formula(rng, atoms, depth - 1));
    case 3: return Formula::imp(a, random_formula(rng, atoms, depth - 1));
    case 4: return Formula::star(a, random_formula(rng, atoms, depth - 1));
    default: return Formula::wand(a, random_formula(rng, atoms, depth - 1));
  }
}

Model heap_model(Rng& rng, std::uint32_t addresses) {
  Model m;
  m.frame.size = 1u << addresses;
  m.frame.eps = 0;
  for (World a = 0; a < m.frame.size; ++a)
    for (World b = 0; b < m.frame.size; ++b)
      if ((a & b) == 0) m.frame.rel.push_back({a, b, a | b});
  m.values = addresses;
  for (std::uint32_t i = 0; i < addresses; ++i) m.memory.push_back(static_cast<std::uint32_t>(pick(rng, addresses)));
  return m;
}

bool forces(const Model& m, const Store& s, World h, Formula f) {
  auto val = [&](Expr e) { return s.at(e.var.id()); };
  switch (f.kind()) {
    case Connective::Prop: {
      auto it = m.frame.valuation.find(f.symbol().name());
      return it != m.frame.valuation.end() && ((it->second >> h) & 1);
    }
    case Connective::Top: return true;
    case Connective::Bot: return false;
    case Connective::Not: return !forces(m, s, h, f.operand());
    case Connective::And: return forces(m, s, h, f.lhs()) && forces(m, s, h, f.rhs());
    case Connective::Or: return forces(m, s, h, f.lhs()) || forces(m, s, h, f.rhs());
    case Connective::Imp: return !forces(m, s, h, f.lhs()) || forces(m, s, h, f.rhs());
    case Connective::Emp: return h == m.frame.eps;
    case Connective::Star:
      for (const Triple& t : m.frame.rel)
        if (t.c == h && forces(m, s, t.a, f.lhs()) && forces(m, s, t.b, f.rhs())) return true;
      return false;
    case Connective::Wand:
      // h is the second component, as in the premise (x,h |> y) of -*R.
      for (const Triple& t : m.frame.rel)
        if (t.b == h && forces(m, s, t.a, f.lhs()) && !forces(m, s, t.c, f.rhs())) return false;
      return true;
    case Connective::PointsTo: {
      std::uint32_t a = val(f.left_expr());
      return m.heap() && h == (World{1} << a) && m.memory[a] == val(f.right_expr());
    }
    case Connective::ExprEq: return val(f.left_expr()) == val(f.right_expr());
    case Connective::Exists: {
      Store inner = s;
      for (std::uint32_t v = 0; v < m.values; ++v) {
        inner[f.symbol().id()] = v;
        if (forces(m, inner, h, f.body())) return true;
      }
      return false;
    }
  }
  return false;
}

bool falsifies(const Model& m, const LabelMap& rho, const Store& s, const Sequent& q) {
  auto w = [&](Label l) { return l.is_eps() ? m.frame.eps : rho.at(l.index); };
  for (const auto& e : q.rel())
    if (!m.frame.holds(w(e.atom.left), w(e.atom.right), w(e.atom.target))) return false;
  for (const auto& e : q.ineq())
    if (w(e.ineq.left) == w(e.ineq.right)) return false;
  for (const auto& e : q.gamma())
    if (!forces(m, s, w(e.lf.label), e.lf.formula)) return false;
  for (const auto& e : q.delta())
    if (forces(m, s, w(e.lf.label), e.lf.formula)) return false;
  return true;
}

bool falsifiable_extending(const Model& m, const LabelMap& rho, const Store& s, const Sequent& q) {
  std::vector<std::uint32_t> labels;
  for (Label l : labels_of(q))
    if (!l.is_eps() && !rho.contains(l.index)) labels.push_back(l.index);
  std::vector<std::uint32_t> vars;
  for (Expr e : store_vars_of(q))
    if (!s.contains(e.var.id())) vars.push_back(e.var.id());

  LabelMap r = rho;
  Store st = s;
  std::function<bool(std::size_t)> go_vars = [&](std::size_t i) {
    if (i == vars.size()) return falsifies(m, r, st, q);
    for (std::uint32_t v = 0; v < m.values; ++v) {
      st[vars[i]] = v;
      if (go_vars(i + 1)) return true;
    }
    return false;
  };
  std::function<bool(std::size_t)> go_labels = [&](std::size_t i) {
    if (i == labels.size()) return go_vars(0);
    for (World x = 0; x < m.frame.size; ++x) {
      r[labels[i]] = x;
      if (go_labels(i + 1)) return true;
    }
    return false;
  };
  return go_labels(0);
}

}  // namespace testing_support
