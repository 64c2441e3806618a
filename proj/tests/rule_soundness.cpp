#include "rule_soundness.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>

#include "separata/calculus.hpp"
#include "separata/heap.hpp"
#include "support.hpp"

namespace testing_support {

namespace {

struct Source {
  LogicConfig cfg;
  World max_n = 0;  // 0: heap model
};

LogicConfig with(LogicConfig c, bool LogicConfig::*flag) {
  c.*flag = true;
  return c;
}

LogicConfig heap_cfg() {
  LogicConfig c = LogicConfig::separata_plus();
  c.indivisible_unit = c.cross_split = true;  // heap models have both
  return c;
}

std::vector<Source> sources(RuleId r) {
  const LogicConfig bbi = LogicConfig::bbi(), pasl = LogicConfig::pasl();
  switch (r) {
    case RuleId::P: return {{with(bbi, &LogicConfig::partial_determinism), 4}, {pasl, 4}, {heap_cfg(), 0}};
    case RuleId::C: return {{with(bbi, &LogicConfig::cancellativity), 3}, {pasl, 4}, {heap_cfg(), 0}};
    case RuleId::IU:
      return {{with(bbi, &LogicConfig::indivisible_unit), 3}, {with(pasl, &LogicConfig::indivisible_unit), 4},
              {heap_cfg(), 0}};
    case RuleId::D: return {{with(bbi, &LogicConfig::disjointness), 3}, {LogicConfig::pasl_d(), 4}, {heap_cfg(), 0}};
    case RuleId::S:
    case RuleId::NeqL:
    case RuleId::EM: {
      LogicConfig s = with(bbi, &LogicConfig::splittability);
      return {{s, 3}, {with(s, &LogicConfig::partial_determinism), 4}};
    }
    case RuleId::CS:
    case RuleId::CS_C: {
      LogicConfig cs = with(bbi, &LogicConfig::cross_split);
      return {{cs, 3}, {with(pasl, &LogicConfig::cross_split), 4}, {heap_cfg(), 0}};
    }
    case RuleId::MapstoL1:
    case RuleId::MapstoL2:
    case RuleId::MapstoL3:
    case RuleId::MapstoL4:
    case RuleId::EqExprL:
    case RuleId::EqExprR:
    case RuleId::ExistsL:
    case RuleId::ExistsR: return {{heap_cfg(), 0}};
    default: return {{bbi, 3}, {LogicConfig::pasl_d(), 4}, {heap_cfg(), 0}};
  }
}

const std::vector<FrameModel>& frames(World n, const LogicConfig& cfg) {
  static std::mutex mu;
  static std::map<std::pair<World, std::string>, std::vector<FrameModel>> cache;
  std::lock_guard lock(mu);
  auto key = std::make_pair(n, cfg.name());
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, enumerate_frames(n, cfg)).first;
  return it->second;
}

std::optional<Model> random_model(Rng& rng, const Source& src) {
  Model m;
  if (src.max_n == 0) {
    m = heap_model(rng, 2);
  } else {
    World n = static_cast<World>(1 + pick(rng, src.max_n));
    const auto& fs = frames(n, src.cfg);
    if (fs.empty()) return std::nullopt;
    m.frame = fs[pick(rng, fs.size())];
  }
  for (const char* p : {"p", "q"}) m.frame.valuation[p] = rng() & m.frame.all();
  return m;
}

// Builds a conclusion around an assignment rho, keeping each member true to
// rho with high probability so that many conclusions come out falsified.
class Builder {
 public:
  Builder(Rng& rng, const Model& m) : rng_(rng), m_(m) {
    if (m.heap())
      for (const char* e : {"e1", "e2", "e3"}) {
        Expr x = Expr::named(e);
        vars_.push_back(x);
        store_[x.var.id()] = static_cast<std::uint32_t>(pick(rng, m.values));
      }
  }

  Sequent s;
  LabelMap rho;
  Store& store() { return store_; }
  Rng& rng() { return rng_; }

  World world(Label l) const { return l.is_eps() ? m_.frame.eps : rho.at(l.index); }

  Label at(World w, bool fresh = false) {
    if (!fresh && w == m_.frame.eps && coin(rng_, 0.4)) return Label::eps();
    if (!fresh && coin(rng_, 0.6)) {
      std::vector<std::uint32_t> same;
      for (auto [l, x] : rho)
        if (x == w) same.push_back(l);
      if (!same.empty()) return Label::var(same[pick(rng_, same.size())]);
    }
    rho[next_] = w;
    return Label::var(next_++);
  }
  Label any() { return at(random_world()); }
  World random_world() { return static_cast<World>(pick(rng_, m_.frame.size)); }
  World random_non_eps() {
    if (m_.frame.size == 1) return m_.frame.eps;
    World w;
    do w = random_world();
    while (w == m_.frame.eps);
    return w;
  }
  std::vector<Label> fresh(int n) {
    std::vector<Label> out;
    std::uint32_t i = std::max(next_, fresh_label(s).index);
    for (int k = 0; k < n; ++k) out.push_back(Label::var(i + k));
    return out;
  }

  template <class Pred>
  std::optional<Triple> triple(Pred pred) {
    std::vector<Triple> ok;
    for (const Triple& t : m_.frame.rel)
      if (pred(t)) ok.push_back(t);
    if (ok.empty()) return std::nullopt;
    return ok[pick(rng_, ok.size())];
  }
  std::optional<Triple> triple() {
    return triple([](const Triple&) { return true; });
  }
  RelAtom atom(const Triple& t) {
    RelAtom r{at(t.a), at(t.b), at(t.c)};
    s.add_rel(r);
    return r;
  }

  Expr var() { return vars_[pick(rng_, vars_.size())]; }

  Formula leaf(std::vector<Expr>& scope) {
    std::size_t n = m_.heap() ? 8 : 5;
    switch (pick(rng_, n)) {
      case 0: return Formula::emp();
      case 1: return coin(rng_) ? Formula::top() : Formula::bot();
      case 2:
      case 3: return Formula::prop(coin(rng_) ? "p" : "q");
      case 4: return Formula::prop("p");
      case 5:
      case 6: return Formula::points_to(scope[pick(rng_, scope.size())], scope[pick(rng_, scope.size())]);
      default: return Formula::expr_eq(scope[pick(rng_, scope.size())], scope[pick(rng_, scope.size())]);
    }
  }

  Formula shaped(Connective k, int depth, std::vector<Expr>& scope) {
    auto sub = [&] { return random(depth - 1, scope); };
    switch (k) {
      case Connective::Not: return Formula::negation(sub());
      case Connective::And: return Formula::conj(sub(), sub());
      case Connective::Or: return Formula::disj(sub(), sub());
      case Connective::Imp: return Formula::imp(sub(), sub());
      case Connective::Star: return Formula::star(sub(), sub());
      case Connective::Wand: return Formula::wand(sub(), sub());
      case Connective::Exists: {
        Symbol x = Symbol::intern("x" + std::to_string(scope.size()));
        scope.push_back(Expr{x});
        Formula body = sub();
        scope.pop_back();
        return Formula::exists(x, body);
      }
      case Connective::PointsTo: return Formula::points_to(scope[pick(rng_, scope.size())], scope[pick(rng_, scope.size())]);
      case Connective::ExprEq: return Formula::expr_eq(scope[pick(rng_, scope.size())], scope[pick(rng_, scope.size())]);
      default: return leaf(scope);
    }
  }

  Formula random(int depth, std::vector<Expr>& scope) {
    if (depth <= 0 || coin(rng_, 0.3)) return leaf(scope);
    static constexpr Connective inner[] = {Connective::Not, Connective::And, Connective::Or,
                                           Connective::Imp, Connective::Star, Connective::Wand};
    if (m_.heap() && coin(rng_, 0.15)) return shaped(Connective::Exists, depth, scope);
    return shaped(inner[pick(rng_, 6)], depth, scope);
  }

  // A formula with top connective k, forced (or not) at l as `want` asks,
  // unless the bias coin says to leave it to chance.
  Formula sample(Connective k, Label l, bool want) {
    Formula f;
    bool bias = coin(rng_, 0.9);
    for (int tries = 0; tries < 40; ++tries) {
      std::vector<Expr> scope = vars_;
      f = shaped(k, 2, scope);
      if (!bias || forces(m_, store_, world(l), f) == want) break;
    }
    return f;
  }
  Formula sample_any(Label l, bool want) {
    Formula f;
    bool bias = coin(rng_, 0.9);
    for (int tries = 0; tries < 40; ++tries) {
      std::vector<Expr> scope = vars_;
      f = random(2, scope);
      if (!bias || forces(m_, store_, world(l), f) == want) break;
    }
    return f;
  }

  void decorate() {
    for (Label l : labels_of(s)) {
      if (coin(rng_)) continue;
      bool left = coin(rng_);
      s.add_formula(left ? Side::Left : Side::Right, {l, sample_any(l, left)});
    }
  }

  void base(const LogicConfig& cfg) {
    for (std::size_t i = pick(rng_, 3); i > 0; --i) {
      if (coin(rng_, 0.9)) atom(*triple());
      else s.add_rel({any(), any(), any()});
    }
    for (std::size_t i = pick(rng_, 3); i > 0; --i) {
      Label l = any();
      s.add_formula(Side::Left, {l, sample_any(l, true)});
    }
    for (std::size_t i = pick(rng_, 3); i > 0; --i) {
      Label l = any();
      s.add_formula(Side::Right, {l, sample_any(l, false)});
    }
    if (cfg.splittability)
      for (std::size_t i = pick(rng_, 2); i > 0; --i) s.add_ineq({at(coin(rng_, 0.9) ? random_non_eps() : random_world()), Label::eps()});
  }

 private:
  Rng& rng_;
  const Model& m_;
  Store store_;
  std::vector<Expr> vars_;
  std::uint32_t next_ = 1;
};

std::optional<RuleInstance> plant(Builder& b, RuleId r) {
  RuleInstance inst;
  inst.rule = r;
  auto add = [&](Side side, Label l, Formula f) {
    b.s.add_formula(side, {l, f});
    inst.formulae.push_back({side, {l, f}});
  };
  auto principal = [&](Side side, Connective k) {
    Label l = b.any();
    add(side, l, b.sample(k, l, side == Side::Left));
  };
  auto rel = [&](RelAtom a) {
    b.s.add_rel(a);
    inst.rels.push_back(a);
  };
  switch (r) {
    case RuleId::Id: {
      Label l = b.any();
      Formula f = b.sample_any(l, true);
      add(Side::Left, l, f);
      add(Side::Right, l, f);
      break;
    }
    case RuleId::BotL: add(Side::Left, b.any(), Formula::bot()); break;
    case RuleId::TopR: add(Side::Right, b.any(), Formula::top()); break;
    case RuleId::EmpR:
    case RuleId::MapstoL1: {
      Label l = Label::eps();
      if (coin(b.rng())) {
        l = b.at(b.random_world(), true);
        b.s.add_rel({Label::eps(), l, Label::eps()});
      }
      if (r == RuleId::EmpR) add(Side::Right, l, Formula::emp());
      else add(Side::Left, l, b.sample(Connective::PointsTo, l, true));
      break;
    }
    case RuleId::EmpL: {
      Label l = coin(b.rng(), 0.8) ? b.at(0) : b.any();
      add(Side::Left, l, Formula::emp());
      break;
    }
    case RuleId::AndL: principal(Side::Left, Connective::And); break;
    case RuleId::AndR: principal(Side::Right, Connective::And); break;
    case RuleId::OrL: principal(Side::Left, Connective::Or); break;
    case RuleId::OrR: principal(Side::Right, Connective::Or); break;
    case RuleId::ImpL: principal(Side::Left, Connective::Imp); break;
    case RuleId::ImpR: principal(Side::Right, Connective::Imp); break;
    case RuleId::NotL: principal(Side::Left, Connective::Not); break;
    case RuleId::NotR: principal(Side::Right, Connective::Not); break;
    case RuleId::StarL:
      principal(Side::Left, Connective::Star);
      inst.fresh = b.fresh(2);
      break;
    case RuleId::WandR:
      principal(Side::Right, Connective::Wand);
      inst.fresh = b.fresh(2);
      break;
    case RuleId::StarR: {
      RelAtom a = b.atom(*b.triple());
      inst.rels.push_back(a);
      add(Side::Right, a.target, b.sample(Connective::Star, a.target, false));
      break;
    }
    case RuleId::WandL: {
      RelAtom a = b.atom(*b.triple());
      inst.rels.push_back(a);
      add(Side::Left, a.right, b.sample(Connective::Wand, a.right, true));
      break;
    }
    case RuleId::E: inst.rels.push_back(b.atom(*b.triple())); break;
    case RuleId::A: {
      Triple t1 = *b.triple();
      Triple t2 = *b.triple([&](const Triple& t) { return t.c == t1.a; });
      Label x = b.at(t1.a);
      RelAtom r1{x, b.at(t1.b), b.at(t1.c)};
      RelAtom r2{b.at(t2.a), b.at(t2.b), x};
      if (r1 == r2) return std::nullopt;
      rel(r1);
      rel(r2);
      inst.fresh = b.fresh(1);
      break;
    }
    case RuleId::A_C: {
      Triple t = *b.triple([](const Triple& t) { return t.a == t.c; });
      Label x = b.at(t.a);
      rel({x, b.at(t.b), x});
      inst.fresh = b.fresh(1);
      break;
    }
    case RuleId::U:
    case RuleId::EM: {
      std::vector<Label> ls = labels_of(b.s);
      inst.params.push_back(ls[pick(b.rng(), ls.size())]);
      break;
    }
    case RuleId::Eq1:
    case RuleId::Eq2: {
      World w = b.random_world();
      Label x = b.at(w, true);
      Label y = b.at(coin(b.rng(), 0.9) ? w : b.random_world(), true);
      rel({Label::eps(), x, y});
      inst.subst.push_back(r == RuleId::Eq1 ? Subst{x, y} : Subst{y, x});
      break;
    }
    case RuleId::P: {
      Triple t = *b.triple();
      Triple u = *b.triple([&](const Triple& v) { return v.a == t.a && v.b == t.b; });
      Label x = b.at(t.a), y = b.at(t.b);
      Label z = b.at(t.c), w = b.at(u.c, true);
      rel({x, y, z});
      rel({x, y, w});
      break;
    }
    case RuleId::C: {
      Triple t = *b.triple();
      Triple u = *b.triple([&](const Triple& v) { return v.a == t.a && v.c == t.c; });
      Label x = b.at(t.a), z = b.at(t.c);
      Label y = b.at(t.b), w = b.at(u.b, true);
      rel({x, y, z});
      rel({x, w, z});
      break;
    }
    case RuleId::IU: {
      World e = 0;
      Triple t = *b.triple([&](const Triple& v) { return v.c == e; });
      rel({b.at(t.a, true), b.at(t.b), Label::eps()});
      break;
    }
    case RuleId::D: {
      Triple t = *b.triple([](const Triple& v) { return v.a == v.b; });
      Label x = b.at(t.a, true);
      rel({x, x, b.at(t.c)});
      break;
    }
    case RuleId::S: {
      Ineq q{b.at(coin(b.rng(), 0.9) ? b.random_non_eps() : b.random_world()), Label::eps()};
      if (q.left.is_eps()) return std::nullopt;
      b.s.add_ineq(q);
      inst.ineqs.push_back(q);
      inst.fresh = b.fresh(2);
      break;
    }
    case RuleId::NeqL: {
      Label w = b.at(b.random_world(), true);
      b.s.add_rel({Label::eps(), w, Label::eps()});
      b.s.add_ineq({w, Label::eps()});
      inst.ineqs.push_back({w, Label::eps()});
      break;
    }
    case RuleId::CS: {
      Triple t = *b.triple();
      Triple u = *b.triple([&](const Triple& v) { return v.c == t.c; });
      Label z = b.at(t.c);
      rel({b.at(t.a), b.at(t.b), z});
      rel({b.at(u.a), b.at(u.b), z});
      inst.fresh = b.fresh(4);
      break;
    }
    case RuleId::CS_C:
      inst.rels.push_back(b.atom(*b.triple()));
      inst.fresh = b.fresh(4);
      break;
    case RuleId::MapstoL2: {
      RelAtom a = b.atom(*b.triple());
      inst.rels.push_back(a);
      add(Side::Left, a.target, b.sample(Connective::PointsTo, a.target, true));
      break;
    }
    case RuleId::MapstoL3: {
      Label h = b.any();
      Formula f = b.sample(Connective::PointsTo, h, true);
      Label h2 = b.at(coin(b.rng(), 0.8) ? b.world(h) : b.random_world(), true);
      Formula g = f;
      for (int tries = 0; tries < 20 && (g == f || coin(b.rng(), 0.3)); ++tries)
        g = Formula::points_to(f.left_expr(), b.var());
      add(Side::Left, h, f);
      add(Side::Left, h2, g);
      break;
    }
    case RuleId::MapstoL4: {
      Label h = b.any();
      Formula f = b.sample(Connective::PointsTo, h, true);
      Formula g = f;
      for (int tries = 0; tries < 40 && g == f; ++tries) g = b.sample(Connective::PointsTo, h, true);
      if (g == f) return std::nullopt;
      add(Side::Left, h, f);
      add(Side::Left, h, g);
      break;
    }
    case RuleId::EqExprL: principal(Side::Left, Connective::ExprEq); break;
    case RuleId::EqExprR: {
      Expr e = b.var();
      add(Side::Right, b.any(), Formula::expr_eq(e, e));
      break;
    }
    case RuleId::ExistsL:
      principal(Side::Left, Connective::Exists);
      inst.witness = fresh_store_var(b.s);
      break;
    case RuleId::ExistsR:
      principal(Side::Right, Connective::Exists);
      inst.witness = coin(b.rng()) ? b.var() : fresh_store_var(b.s);
      break;
  }
  return inst;
}

}  // namespace

namespace {

RuleSoundness run(RuleId rule, const std::vector<Source>& srcs, int wanted, std::uint64_t seed) {
  RuleSoundness out;
  Rng rng(seed);
  const bool closing = rule_arity(rule) == 0;
  const int cap = wanted * 40;
  for (int attempt = 0; attempt < cap; ++attempt) {
    if (closing ? out.trials >= wanted : out.falsified >= wanted) break;
    const Source& src = srcs[attempt % srcs.size()];
    auto m = random_model(rng, src);
    if (!m) continue;
    Builder b(rng, *m);
    b.base(src.cfg);
    std::optional<RuleInstance> inst = plant(b, rule);
    if (!inst) continue;
    // Give the planted labels content too, so that substitutions matter;
    // fresh names are chosen afterwards.
    b.decorate();
    if (!inst->fresh.empty()) inst->fresh = b.fresh(static_cast<int>(inst->fresh.size()));
    if (rule == RuleId::ExistsL) inst->witness = fresh_store_var(b.s);

    std::vector<Sequent> premises;
    try {
      premises = expand(b.s, *inst, src.cfg);
    } catch (const std::exception& e) {
      if (out.problem.empty()) out.problem = std::string("instance rejected: ") + e.what() + " on " + to_string(b.s);
      continue;
    }
    ++out.trials;
    LabelMap rho;
    for (Label l : labels_of(b.s))
      if (!l.is_eps()) rho[l.index] = b.world(l);
    Store st;
    for (Expr e : store_vars_of(b.s)) st[e.var.id()] = b.store().at(e.var.id());
    if (!falsifies(*m, rho, st, b.s)) continue;
    ++out.falsified;
    bool ok = std::any_of(premises.begin(), premises.end(),
                          [&](const Sequent& p) { return falsifiable_extending(*m, rho, st, p); });
    if (!ok) {
      ++out.violations;
      if (out.problem.empty()) out.problem = "no falsifiable premise for " + to_string(*inst) + " on " + to_string(b.s);
    }
  }
  if (!closing && out.falsified < wanted && out.problem.empty())
    out.problem = "only " + std::to_string(out.falsified) + " falsified conclusions generated";
  if (closing && out.trials < wanted && out.problem.empty())
    out.problem = "only " + std::to_string(out.trials) + " instances generated";
  return out;
}

}  // namespace

RuleSoundness check_rule_soundness(RuleId rule, int wanted, std::uint64_t seed) {
  return run(rule, sources(rule), wanted, seed);
}

RuleSoundness check_rule_soundness_on(RuleId rule, const LogicConfig& frames, World max_n, int wanted,
                                      std::uint64_t seed) {
  return run(rule, {{frames, max_n}}, wanted, seed);
}

}  // namespace testing_support
