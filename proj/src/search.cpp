#include "separata/search.hpp"

#include <pthread.h>

#include <algorithm>
#include <chrono>
#include <exception>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "separata/heap.hpp"
#include "separata/unify.hpp"

namespace separata {

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Valid:
      return "Valid";
    case VerdictKind::NotProved:
      return "NotProved";
    case VerdictKind::ResourceExhausted:
      return "ResourceExhausted";
  }
  return "?";
}

const char* to_string(Limit l) {
  switch (l) {
    case Limit::None:
      return "none";
    case Limit::StructuralRounds:
      return "max-rounds";
    case Limit::BranchRuleApps:
      return "max-apps";
    case Limit::WallClock:
      return "timeout";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t atom_key(const RelAtom& r) {
  return static_cast<std::uint64_t>(r.left.index) | (static_cast<std::uint64_t>(r.right.index) << 21) |
         (static_cast<std::uint64_t>(r.target.index) << 42);
}

// Value-keyed memo that follows the branch through substitutions.
template <class T, class Hash>
class Memo {
 public:
  bool contains(const T& x) const { return set_.count(x) != 0; }
  bool empty() const { return items_.empty(); }
  template <class F>
  void for_each(F&& f) const {
    for (const T& x : items_) f(x);
  }
  bool insert(const T& x) {
    if (!set_.insert(x).second) return false;
    items_.push_back(x);
    return true;
  }
  template <class F>
  void remap(F&& f) {
    if (items_.empty()) return;
    std::vector<T> old;
    old.swap(items_);
    set_.clear();
    for (auto& x : old) insert(f(x));
  }

 private:
  std::vector<T> items_;
  std::unordered_set<T, Hash> set_;
};

// (principal, atom) for StarR / WandL; (principal, witness) for ExistsR.
struct PairKey {
  Side side;
  LabelledFormula lf;
  RelAtom atom;
  std::uint32_t witness;
  friend bool operator==(const PairKey&, const PairKey&) = default;
};
struct PairHash {
  std::size_t operator()(const PairKey& k) const {
    std::uint64_t h = mix(static_cast<std::uint64_t>(k.side), k.lf.label.index);
    h = mix(h, k.lf.formula.id());
    h = mix(h, atom_key(k.atom));
    return mix(h, k.witness);
  }
};
struct AtomHash {
  std::size_t operator()(const RelAtom& r) const { return std::hash<std::uint64_t>{}(atom_key(r)); }
};
struct AtomPair {
  RelAtom a, b;
  friend bool operator==(const AtomPair&, const AtomPair&) = default;
};
struct AtomPairHash {
  std::size_t operator()(const AtomPair& p) const { return mix(atom_key(p.a), atom_key(p.b)); }
};
struct LabelHash {
  std::size_t operator()(Label l) const { return l.index; }
};

constexpr std::uint32_t kFreshWitness = 0xffffffffu;

struct Memos {
  Memo<PairKey, PairHash> pairs;
  // Pairs neither of whose premises matches anything wait for the next
  // structural round.
  Memo<PairKey, PairHash> waiting, ripe;
  Memo<RelAtom, AtomHash> a_c, cs_c;
  Memo<AtomPair, AtomPairHash> cs;
  Memo<Label, LabelHash> split;

  void on_label_subst(Subst th) {
    auto m = [th](Label l) { return l == th.from ? th.to : l; };
    auto ma = [m](RelAtom r) { return RelAtom{m(r.left), m(r.right), m(r.target)}; };
    auto mk = [&](PairKey k) {
      k.lf.label = m(k.lf.label);
      k.atom = ma(k.atom);
      return k;
    };
    pairs.remap(mk);
    waiting.remap(mk);
    ripe.remap(mk);
    a_c.remap(ma);
    cs_c.remap(ma);
    cs.remap([&](AtomPair p) {
      RelAtom x = ma(p.a), y = ma(p.b);
      return x < y ? AtomPair{x, y} : AtomPair{y, x};
    });
    split.remap(m);
  }
  void on_expr_subst(const ExprSubst& th) {
    auto mk = [&](PairKey k) {
      k.lf.formula = apply_expr_subst(k.lf.formula, th);
      if (k.witness != kFreshWitness)
        for (const auto& [from, to] : th.pairs)
          if (k.witness == from.var.id()) k.witness = to.var.id();
      return k;
    };
    pairs.remap(mk);
    waiting.remap(mk);
    ripe.remap(mk);
  }
  // Makes every waiting pair usable; false when none was waiting.
  bool ripen() {
    if (waiting.empty()) return false;
    waiting.for_each([&](const PairKey& k) { ripe.insert(k); });
    waiting = {};
    return true;
  }
};

struct Branch {
  Sequent s;
  Memos memo;
  std::uint32_t next_label = 1;
  std::uint64_t apps = 0;
  std::uint64_t rounds = 0;
  std::optional<NormIndex> norm;  // mirrors 𝒢; rebuilt when absent
  bool heap_dirty = true;  // a heap substitutional rule may apply
};

using Core = std::vector<ItemId>;  // sorted, unique

struct Step {
  RuleInstance inst;
  Core principals;
  ItemId new_lo, new_hi;
  bool substitutional;
};

struct Outcome {
  VerdictKind kind = VerdictKind::NotProved;
  DerivationPtr proof;
  Core core;
  std::optional<Sequent> open;
  Limit limit = Limit::None;
};

struct Abort {
  Limit limit;
};

void normalize_core(Core& c) {
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
}

bool intersects(const Core& c, ItemId lo, ItemId hi) {
  auto it = std::lower_bound(c.begin(), c.end(), lo);
  return it != c.end() && *it < hi;
}

void erase_range(Core& c, ItemId lo, ItemId hi) {
  auto a = std::lower_bound(c.begin(), c.end(), lo);
  auto b = std::lower_bound(a, c.end(), hi);
  c.erase(a, b);
}

void merge_into(Core& c, const Core& extra) {
  if (extra.empty()) return;
  std::size_t mid = c.size();
  c.insert(c.end(), extra.begin(), extra.end());
  std::inplace_merge(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(mid), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
}

bool is_substitutional(RuleId r) {
  switch (r) {
    case RuleId::Eq1:
    case RuleId::Eq2:
    case RuleId::P:
    case RuleId::C:
    case RuleId::IU:
    case RuleId::D:
    case RuleId::MapstoL2:
    case RuleId::MapstoL3:
    case RuleId::MapstoL4:
    case RuleId::EqExprL:
      return true;
    default:
      return false;
  }
}

Core principal_ids(const Sequent& s, const RuleInstance& inst) {
  Core out;
  for (const auto& pf : inst.formulae)
    if (auto id = s.id_of(pf.side, pf.lf)) out.push_back(*id);
  for (const auto& r : inst.rels)
    if (auto id = s.id_of(r)) out.push_back(*id);
  for (const auto& q : inst.ineqs)
    if (auto id = s.id_of(q)) out.push_back(*id);
  normalize_core(out);
  return out;
}

// Store-variable substitution performed by a heap rule instance.
std::optional<ExprSubst> expr_subst_of(const RuleInstance& inst) {
  if (inst.rule != RuleId::MapstoL4 && inst.rule != RuleId::EqExprL) return std::nullopt;
  return ExprSubst{inst.expr_subst};
}

// Rules of step 2 beyond label normalization: MapstoL3, MapstoL4, EqExprL.
std::optional<RuleInstance> find_heap_step(const Sequent& s) {
  for (const auto& e : s.gamma()) {
    if (e.lf.formula.kind() != Connective::ExprEq) continue;
    RuleInstance inst;
    inst.rule = RuleId::EqExprL;
    inst.formulae.push_back({Side::Left, e.lf});
    inst.expr_subst.push_back({e.lf.formula.left_expr(), e.lf.formula.right_expr()});
    return inst;
  }
  std::unordered_map<std::uint32_t, LabelledFormula> by_address;
  std::unordered_map<std::uint32_t, LabelledFormula> by_label;
  for (const auto& e : s.gamma()) {
    const LabelledFormula& lf = e.lf;
    if (lf.formula.kind() != Connective::PointsTo) continue;
    auto [il, fresh_l] = by_label.emplace(lf.label.index, lf);
    if (!fresh_l) {
      RuleInstance inst;
      inst.rule = RuleId::MapstoL4;
      const LabelledFormula& a = il->second;
      inst.formulae = {{Side::Left, a}, {Side::Left, lf}};
      inst.expr_subst = {{lf.formula.left_expr(), a.formula.left_expr()},
                         {lf.formula.right_expr(), a.formula.right_expr()}};
      return inst;
    }
    auto [ia, fresh_a] = by_address.emplace(lf.formula.left_expr().var.id(), lf);
    if (!fresh_a && ia->second.label != lf.label) {
      const LabelledFormula& o = ia->second;
      bool keep_o = o.label < lf.label;
      const LabelledFormula& kept = keep_o ? o : lf;
      const LabelledFormula& gone = keep_o ? lf : o;
      RuleInstance inst;
      inst.rule = RuleId::MapstoL3;
      inst.formulae = {{Side::Left, kept}, {Side::Left, gone}};
      inst.subst = {{gone.label, kept.label}};
      return inst;
    }
  }
  return std::nullopt;
}

RuleInstance from_norm_step(const NormStep& st) {
  RuleInstance inst;
  inst.rule = st.rule;
  inst.rels = st.principals;
  inst.subst = {st.subst};
  return inst;
}

// Whether label l is the root of a tree of existing atoms whose leaves carry
// the ∗-leaves of f: in Γ, as G in Δ for ¬G, or as ε for ⊤*.
class TreeMatcher {
 public:
  explicit TreeMatcher(const Sequent& s) : s_(s) {
    for (const auto& e : s.rel()) by_target_[e.atom.target.index].push_back(e.atom);
  }
  bool match(Label l, Formula f) {
    if (s_.contains(Side::Left, {l, f})) return true;
    switch (f.kind()) {
      case Connective::Not:
        return s_.contains(Side::Right, {l, f.body()});
      case Connective::Emp:
        return l.is_eps();
      case Connective::And:
        return match(l, f.lhs()) && match(l, f.rhs());
      case Connective::Star:
        break;
      default:
        return false;
    }
    std::uint64_t key = (static_cast<std::uint64_t>(l.index) << 32) | f.id();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    memo_[key] = false;  // cycles through identity atoms
    bool ok = false;
    if (auto it = by_target_.find(l.index); it != by_target_.end())
      for (const RelAtom& r : it->second)
        if (r.left != l && r.right != l && match(r.left, f.lhs()) && match(r.right, f.rhs())) {
          ok = true;
          break;
        }
    memo_[key] = ok;
    return ok;
  }
  const std::vector<RelAtom>& atoms_at(Label l) {
    static const std::vector<RelAtom> none;
    auto it = by_target_.find(l.index);
    return it == by_target_.end() ? none : it->second;
  }

 private:
  const Sequent& s_;
  std::unordered_map<std::uint32_t, std::vector<RelAtom>> by_target_;
  std::unordered_map<std::uint64_t, bool> memo_;
};

class Prover {
 public:
  Prover(const LogicConfig& cfg, const SearchLimits& lim, const SearchOptions& opt)
      : cfg_(cfg), lim_(lim), opt_(opt), start_(Clock::now()) {}

  Outcome run(Branch b) {
    try {
      return explore(std::move(b));
    } catch (const Abort& a) {
      Outcome o;
      o.kind = VerdictKind::ResourceExhausted;
      o.limit = a.limit;
      return o;
    }
  }

  SearchStats stats;

 private:
  int step4_first_ = 0;  // premise order chosen by step4_rule
  void tick(Branch& b) {
    ++stats.rule_apps;
    if (++b.apps > lim_.max_branch_rule_apps) throw Abort{Limit::BranchRuleApps};
    if ((stats.rule_apps & 255) == 0 && elapsed_ms() > lim_.wall_clock_ms) throw Abort{Limit::WallClock};
  }

  std::uint64_t elapsed_ms() const {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start_).count());
  }

  Label fresh(Branch& b) { return Label::var(b.next_label++); }

  // Store variables are fresh for the whole search, so a witness chosen on
  // one premise never clashes with a name on a sibling.
  Expr fresh_expr() { return Expr::named("e" + std::to_string(next_expr_++)); }

 public:
  bool round(Branch& b, std::vector<Step>& trail) { return structural_round(b, trail); }

  void reserve_exprs(const Sequent& s) {
    std::string name = fresh_store_var(s).name();
    next_expr_ = std::stoull(name.substr(1));
  }

 private:

  // Label substitutions performed by premise `which` of inst, in order.
  static std::vector<Subst> label_substs(const RuleInstance& inst, int which) {
    if (inst.rule != RuleId::MapstoL2) return is_substitutional(inst.rule) ? inst.subst : std::vector<Subst>{};
    const RelAtom& r = inst.rels[0];
    Label unit = which == 0 ? r.left : r.right;
    Label whole = which == 0 ? r.right : r.left;
    Label h0 = r.target;
    std::vector<Subst> out;
    if (!unit.is_eps()) {
      out.push_back({unit, Label::eps()});
      if (whole == unit) whole = Label::eps();
      if (h0 == unit) h0 = Label::eps();
    }
    if (whole != h0) out.push_back(whole < h0 ? Subst{h0, whole} : Subst{whole, h0});
    return out;
  }

  // Brings the memos and the normalization index up to date after premise
  // `which` of inst turned b.s into its current state.
  void sync(Branch& b, const RuleInstance& inst, int which, ItemId lo) {
    for (const Subst& th : label_substs(inst, which)) {
      b.memo.on_label_subst(th);
      if (b.norm) b.norm->substitute(th);
    }
    if (auto es = expr_subst_of(inst)) b.memo.on_expr_subst(*es);
    const auto& rel = b.s.rel();
    if (b.norm)
      for (std::size_t i = rel.size(); i-- > 0 && rel[i].id >= lo;) b.norm->add(rel[i].atom);
    if (cfg_.heap) b.heap_dirty = true;
  }

  // Applies a single-premise rule in place and records it.
  void apply1(Branch& b, std::vector<Step>& trail, RuleInstance inst) {
    tick(b);
    Step st;
    st.principals = principal_ids(b.s, inst);
    st.new_lo = b.s.next_item_id();
    st.substitutional = is_substitutional(inst.rule);
    apply_premise(b.s, inst, 0, cfg_);
    st.new_hi = b.s.next_item_id();
    sync(b, inst, 0, st.new_lo);
    st.inst = std::move(inst);
    trail.push_back(std::move(st));
  }

  // Walks the trail backwards from a closed leaf, dropping steps whose
  // additions the proof above never uses.
  Outcome close(std::vector<Step>& trail, DerivationPtr leaf, Core core) {
    DerivationPtr node = std::move(leaf);
    for (std::size_t i = trail.size(); i-- > 0;) {
      Step& st = trail[i];
      bool used = intersects(core, st.new_lo, st.new_hi);
      if (!st.substitutional && !used && opt_.backjump) continue;
      erase_range(core, st.new_lo, st.new_hi);
      merge_into(core, st.principals);
      node = make_node(std::move(st.inst), {std::move(node)});
    }
    Outcome o;
    o.kind = VerdictKind::Valid;
    o.proof = std::move(node);
    o.core = std::move(core);
    return o;
  }

  Outcome explore(Branch b) {
    ++stats.branches;
    std::vector<Step> trail;
    for (;;) {
      // Substitutional rules first so that ⊢E is plain equality below.
      if (!b.norm) b.norm.emplace(b.s, cfg_);
      if (auto st = b.norm->next()) {
        apply1(b, trail, from_norm_step(*st));
        continue;
      }
      if (b.heap_dirty) {
        if (auto inst = find_heap_step(b.s)) {
          apply1(b, trail, std::move(*inst));
          continue;
        }
        b.heap_dirty = false;
      }
      if (auto inst = closure_on_normal_form(b.s, cfg_)) {
        tick(b);
        Core core = principal_ids(b.s, *inst);
        return close(trail, make_node(std::move(*inst), {}), std::move(core));
      }
      if (auto inst = single_premise_rule(b)) {
        apply1(b, trail, std::move(*inst));
        continue;
      }
      if (auto inst = branching_rule(b)) return branch(std::move(b), trail, std::move(*inst));
      if (auto inst = step4_rule(b)) {
        if (rule_arity(inst->rule) == 1) {
          apply1(b, trail, std::move(*inst));
          continue;
        }
        return branch(std::move(b), trail, std::move(*inst), step4_first_);
      }
      if (++b.rounds > lim_.max_structural_rounds) throw Abort{Limit::StructuralRounds};
      ++stats.structural_rounds;
      bool ripened = b.memo.ripen();
      if (!structural_round(b, trail) && !ripened) {
        Outcome o;
        o.kind = VerdictKind::NotProved;
        o.open = std::move(b.s);
        return o;
      }
    }
  }

  // Explores premise `first` of inst, then the other one unless the first
  // subproof makes it unnecessary.
  Outcome branch(Branch b, std::vector<Step>& trail, RuleInstance inst, int first = 0) {
    tick(b);
    Core principals = principal_ids(b.s, inst);
    const ItemId lo = b.s.next_item_id();
    const bool substitutional = is_substitutional(inst.rule);
    const int second = 1 - first;

    // The later premise rebuilds its index if it is ever explored.
    std::optional<NormIndex> norm = std::move(b.norm);
    b.norm.reset();
    Branch later = b;
    b.norm = std::move(norm);
    apply_premise(later.s, inst, second, cfg_);
    apply_premise(b.s, inst, first, cfg_);
    sync(b, inst, first, lo);
    sync(later, inst, second, lo);
    const ItemId hi1 = b.s.next_item_id();
    const ItemId hi2 = later.s.next_item_id();

    // Membership tests for the items the first premise adds, by id.
    std::unordered_map<ItemId, std::function<bool(const Sequent&)>> added1;
    for (const auto& e : b.s.rel())
      if (e.id >= lo) added1.emplace(e.id, [r = e.atom](const Sequent& t) { return t.contains(r); });
    for (const auto& e : b.s.ineq())
      if (e.id >= lo) added1.emplace(e.id, [q = e.ineq](const Sequent& t) { return t.contains(q); });
    for (Side side : {Side::Left, Side::Right})
      for (const auto& e : b.s.side(side))
        if (e.id >= lo)
          added1.emplace(e.id, [side, lf = e.lf](const Sequent& t) { return t.contains(side, lf); });

    Outcome o1 = explore(std::move(b));
    if (o1.kind != VerdictKind::Valid) return o1;

    if (opt_.backjump && !substitutional) {
      if (!intersects(o1.core, lo, hi1)) {
        ++stats.backjumps;
        return close(trail, std::move(o1.proof), std::move(o1.core));
      }
      // The first subproof also closes the other premise when every item
      // it uses from the first premise's additions is there too.
      bool reusable = true;
      for (ItemId id : o1.core) {
        if (id < lo || id >= hi1) continue;
        auto it = added1.find(id);
        if (it == added1.end() || !it->second(later.s)) {
          reusable = false;
          break;
        }
      }
      if (reusable) {
        ++stats.backjumps;
        Core core = std::move(o1.core);
        erase_range(core, lo, hi1);
        merge_into(core, principals);
        DerivationPtr shared = o1.proof;
        DerivationPtr node = make_node(std::move(inst), {std::move(o1.proof), std::move(shared)});
        return close(trail, std::move(node), std::move(core));
      }
    }

    Outcome o2 = explore(std::move(later));
    if (o2.kind != VerdictKind::Valid) return o2;
    if (opt_.backjump && !substitutional && !intersects(o2.core, lo, hi2)) {
      ++stats.backjumps;
      return close(trail, std::move(o2.proof), std::move(o2.core));
    }
    Core core = std::move(o1.core);
    erase_range(core, lo, hi1);
    erase_range(o2.core, lo, hi2);
    merge_into(core, o2.core);
    merge_into(core, principals);
    std::vector<DerivationPtr> proofs(2);
    proofs[first] = std::move(o1.proof);
    proofs[second] = std::move(o2.proof);
    DerivationPtr node = make_node(std::move(inst), std::move(proofs));
    return close(trail, std::move(node), std::move(core));
  }

  // Step 3, single-premise part: the earliest queue item with an
  // invertible one-premise rule.
  std::optional<RuleInstance> single_premise_rule(const Branch& b) {
    const Sequent& s = b.s;
    const Sequent::FormulaEntry* best = nullptr;
    Side best_side = Side::Left;
    RuleId best_rule = RuleId::Id;
    auto consider = [&](const Sequent::FormulaEntry& e, Side side, RuleId r) {
      if (!best || e.order < best->order) {
        best = &e;
        best_side = side;
        best_rule = r;
      }
    };
    for (const auto& e : s.gamma()) {
      switch (e.lf.formula.kind()) {
        case Connective::Emp:
          consider(e, Side::Left, RuleId::EmpL);
          break;
        case Connective::And:
          consider(e, Side::Left, RuleId::AndL);
          break;
        case Connective::Not:
          consider(e, Side::Left, RuleId::NotL);
          break;
        case Connective::Star:
          consider(e, Side::Left, RuleId::StarL);
          break;
        case Connective::Exists:
          consider(e, Side::Left, RuleId::ExistsL);
          break;
        default:
          continue;
      }
      break;  // Γ is in queue order; the first hit is the earliest
    }
    for (const auto& e : s.delta()) {
      switch (e.lf.formula.kind()) {
        case Connective::Or:
          consider(e, Side::Right, RuleId::OrR);
          break;
        case Connective::Imp:
          consider(e, Side::Right, RuleId::ImpR);
          break;
        case Connective::Not:
          consider(e, Side::Right, RuleId::NotR);
          break;
        case Connective::Wand:
          consider(e, Side::Right, RuleId::WandR);
          break;
        default:
          continue;
      }
      break;
    }
    if (!best) return std::nullopt;
    RuleInstance inst;
    inst.rule = best_rule;
    inst.formulae.push_back({best_side, best->lf});
    if (best_rule == RuleId::StarL || best_rule == RuleId::WandR) {
      Branch& mb = const_cast<Branch&>(b);
      inst.fresh = {fresh(mb), fresh(mb)};
    } else if (best_rule == RuleId::ExistsL) {
      inst.witness = fresh_expr();
    }
    return inst;
  }

  // Step 3, branching part: AndR, OrL, ImpL in queue order, then MapstoL2
  // and EM.
  std::optional<RuleInstance> branching_rule(const Branch& b) {
    const Sequent& s = b.s;
    const Sequent::FormulaEntry* best = nullptr;
    Side best_side = Side::Left;
    RuleId best_rule = RuleId::Id;
    for (const auto& e : s.gamma()) {
      Connective k = e.lf.formula.kind();
      if (k != Connective::Or && k != Connective::Imp) continue;
      best = &e;
      best_side = Side::Left;
      best_rule = k == Connective::Or ? RuleId::OrL : RuleId::ImpL;
      break;
    }
    for (const auto& e : s.delta()) {
      if (e.lf.formula.kind() != Connective::And) continue;
      if (!best || e.order < best->order) {
        best = &e;
        best_side = Side::Right;
        best_rule = RuleId::AndR;
      }
      break;
    }
    if (best) {
      RuleInstance inst;
      inst.rule = best_rule;
      inst.formulae.push_back({best_side, best->lf});
      return inst;
    }
    if (cfg_.heap) {
      std::unordered_map<std::uint32_t, const LabelledFormula*> pts;
      for (const auto& e : s.gamma())
        if (e.lf.formula.kind() == Connective::PointsTo) pts.emplace(e.lf.label.index, &e.lf);
      if (!pts.empty())
        for (const auto& e : s.rel()) {
          const RelAtom& r = e.atom;
          if (r.left.is_eps() || r.right.is_eps()) continue;
          auto it = pts.find(r.target.index);
          if (it == pts.end()) continue;
          RuleInstance inst;
          inst.rule = RuleId::MapstoL2;
          inst.formulae.push_back({Side::Left, *it->second});
          inst.rels.push_back(r);
          return inst;
        }
    }
    if (cfg_.splittability) {
      for (const auto& e : s.delta()) {
        if (e.lf.formula.kind() != Connective::Emp) continue;
        Label w = e.lf.label;
        if (w.is_eps() || s.contains(Ineq{w, Label::eps()})) continue;
        RuleInstance inst;
        inst.rule = RuleId::EM;
        inst.params.push_back(w);
        return inst;
      }
    }
    return std::nullopt;
  }

  // Step 4: StarR / WandL on existing atoms and ExistsR witnesses, fair
  // across principals through the queue order.
  std::optional<RuleInstance> step4_rule(Branch& b) {
    const Sequent& s = b.s;
    step4_first_ = 0;
    std::vector<const Sequent::FormulaEntry*> principals;
    std::vector<Side> sides;
    for (const auto& e : s.delta()) {
      Connective k = e.lf.formula.kind();
      if (k == Connective::Star || k == Connective::Exists) principals.push_back(&e), sides.push_back(Side::Right);
    }
    for (const auto& e : s.gamma())
      if (e.lf.formula.kind() == Connective::Wand) principals.push_back(&e), sides.push_back(Side::Left);
    if (principals.empty()) return std::nullopt;
    std::vector<std::size_t> order(principals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return principals[x]->order < principals[y]->order; });

    std::unordered_map<std::uint32_t, std::vector<RelAtom>> by_right;
    bool have_by_right = false;
    std::optional<TreeMatcher> matcher;
    std::optional<std::vector<Expr>> witnesses;

    // Atoms that complete a heuristic tree come first across all principals.
    if (opt_.heuristic)
      for (std::size_t idx : order) {
        const LabelledFormula& lf = principals[idx]->lf;
        if (lf.formula.kind() != Connective::Star) continue;
        if (!matcher) matcher.emplace(s);
        for (const RelAtom& r : heuristic_with(*matcher, lf, true)) {
          PairKey key{Side::Right, lf, r, 0};
          if (b.memo.pairs.contains(key)) continue;
          if (s.contains(Side::Right, {r.left, lf.formula.lhs()}) ||
              s.contains(Side::Right, {r.right, lf.formula.rhs()}))
            continue;
          b.memo.pairs.insert(key);
          RuleInstance inst;
          inst.rule = RuleId::StarR;
          inst.formulae.push_back({Side::Right, lf});
          inst.rels.push_back(r);
          return inst;
        }
      }

    for (std::size_t idx : order) {
      const LabelledFormula& lf = principals[idx]->lf;
      Side side = sides[idx];
      Formula f = lf.formula;
      if (f.kind() == Connective::Star) {
        if (!matcher) matcher.emplace(s);
        std::vector<RelAtom> cands;
        if (opt_.heuristic) cands = heuristic_with(*matcher, lf, false);
        const auto& at = matcher->atoms_at(lf.label);
        cands.insert(cands.end(), at.begin(), at.end());
        for (const RelAtom& r : cands) {
          PairKey key{side, lf, r, 0};
          if (b.memo.pairs.contains(key)) continue;
          if (s.contains(Side::Right, {r.left, f.lhs()}) || s.contains(Side::Right, {r.right, f.rhs()}))
            continue;
          int p1 = promise(*matcher, r.left, f.lhs()), p2 = promise(*matcher, r.right, f.rhs());
          if (p1 == 0 || p2 == 0 || should_wait(b, key, p1, p2)) continue;
          b.memo.pairs.insert(key);
          step4_first_ = later_first(p1, p2);
          RuleInstance inst;
          inst.rule = RuleId::StarR;
          inst.formulae.push_back({side, lf});
          inst.rels.push_back(r);
          return inst;
        }
      } else if (f.kind() == Connective::Wand) {
        if (!have_by_right) {
          for (const auto& e : s.rel()) by_right[e.atom.right.index].push_back(e.atom);
          have_by_right = true;
        }
        auto it = by_right.find(lf.label.index);
        if (it == by_right.end()) continue;
        for (const RelAtom& r : it->second) {
          PairKey key{side, lf, r, 0};
          if (b.memo.pairs.contains(key)) continue;
          if (s.contains(Side::Right, {r.left, f.lhs()}) || s.contains(Side::Left, {r.target, f.rhs()}))
            continue;
          if (!matcher) matcher.emplace(s);
          int p1 = promise(*matcher, r.left, f.lhs());
          int p2 = s.contains(Side::Right, {r.target, f.rhs()}) ? 2 : 1;
          if (p1 == 0 || should_wait(b, key, p1, p2)) continue;
          b.memo.pairs.insert(key);
          step4_first_ = later_first(p1, p2);
          RuleInstance inst;
          inst.rule = RuleId::WandL;
          inst.formulae.push_back({side, lf});
          inst.rels.push_back(r);
          return inst;
        }
      } else {
        if (!witnesses) witnesses = store_vars_of(s);
        Expr bound{f.symbol()};
        auto try_witness = [&](Expr e, std::uint32_t key_id) -> std::optional<RuleInstance> {
          PairKey key{side, lf, RelAtom{}, key_id};
          if (b.memo.pairs.contains(key)) return std::nullopt;
          b.memo.pairs.insert(key);
          if (s.contains(Side::Right, {lf.label, substitute_expr(f.body(), bound, e)})) return std::nullopt;
          RuleInstance inst;
          inst.rule = RuleId::ExistsR;
          inst.formulae.push_back({side, lf});
          inst.witness = e;
          return inst;
        };
        for (Expr e : *witnesses)
          if (auto inst = try_witness(e, e.var.id())) return inst;
        PairKey fresh_key{side, lf, RelAtom{}, kFreshWitness};
        if (!b.memo.pairs.contains(fresh_key))
          if (auto inst = try_witness(fresh_expr(), kFreshWitness)) return inst;
      }
    }
    return std::nullopt;
  }

  // How soon the formula a premise adds to Δ can close that premise: 2 when
  // the heuristic tree already matches it, 0 when it cannot close anything
  // until Γ or the label classes change (an atom not in Γ, ⊤* off ε, ⊥),
  // 1 otherwise. Pairs scoring 0 are skipped. Such an addition never enables
  // another rule, so the pair is just as useful when it is reconsidered
  // after the change.
  static int promise(TreeMatcher& m, Label l, Formula f) {
    if (m.match(l, f)) return 2;
    Connective k = f.kind();
    return k == Connective::Prop || k == Connective::Emp || k == Connective::Bot ? 0 : 1;
  }

  static bool should_wait(Branch& b, const PairKey& key, int p1, int p2) {
    if (p1 == 2 || p2 == 2 || b.memo.ripe.contains(key)) return false;
    b.memo.waiting.insert(key);
    return true;
  }

  // The premise to explore first: the less promising one, since a subproof
  // that ignores its premise's addition makes the other premise unnecessary.
  static int later_first(int p1, int p2) { return p2 < p1 ? 1 : 0; }

  std::vector<RelAtom> heuristic_with(TreeMatcher& m, const LabelledFormula& target, bool full_only) {
    std::vector<RelAtom> full, partial;
    Formula f = target.formula;
    for (const RelAtom& r : m.atoms_at(target.label)) {
      bool a = m.match(r.left, f.lhs());
      bool c = m.match(r.right, f.rhs());
      if (a && c) full.push_back(r);
      else if (a || c) partial.push_back(r);
    }
    if (!full_only) full.insert(full.end(), partial.begin(), partial.end());
    return full;
  }

  // Step 5. Returns false when the round adds nothing.
  bool structural_round(Branch& b, std::vector<Step>& trail) {
    bool changed = false;
    auto add = [&](RuleInstance inst) {
      apply1(b, trail, std::move(inst));
      changed = true;
    };

    // (a) E-closure.
    {
      std::vector<RelAtom> g0;
      for (const auto& e : b.s.rel()) g0.push_back(e.atom);
      for (const RelAtom& r : g0)
        if (!b.s.contains(RelAtom{r.right, r.left, r.target})) {
          RuleInstance inst;
          inst.rule = RuleId::E;
          inst.rels.push_back(r);
          add(std::move(inst));
        }
    }

    // (b) A on pairs of the E-closed set.
    {
      std::vector<RelAtom> g1;
      for (const auto& e : b.s.rel()) g1.push_back(e.atom);
      std::unordered_map<std::uint32_t, std::vector<RelAtom>> splits_of, added_by_target;
      for (const RelAtom& r : g1) splits_of[r.target.index].push_back(r);
      auto forbidden = [&](const RelAtom& r1, const RelAtom& r2) {
        Label u = r2.left, v = r2.right, y = r1.right;
        auto scan = [&](const std::unordered_map<std::uint32_t, std::vector<RelAtom>>& index) {
          auto it = index.find(r1.target.index);
          if (it == index.end()) return false;
          for (const RelAtom& a : it->second) {
            for (int side = 0; side < 2; ++side) {
              Label mine = side == 0 ? a.left : a.right;
              Label other = side == 0 ? a.right : a.left;
              if (mine != u) continue;
              if (b.s.contains(RelAtom{y, v, other}) || b.s.contains(RelAtom{v, y, other})) return true;
            }
          }
          return false;
        };
        return scan(splits_of) || scan(added_by_target);
      };
      // Pairs come from 𝒢₁ only; added_by_target holds this round's atoms
      // so the forbidden check sees them.
      for (const RelAtom& r1 : g1) {
        auto it = splits_of.find(r1.left.index);
        if (it == splits_of.end()) continue;
        for (const RelAtom& r2 : it->second) {
          // With ε in these positions the new atoms normalize back onto
          // existing ones.
          if (r1.right.is_eps() || r2.left.is_eps() || r2.right.is_eps()) continue;
          if (r1 == r2 || forbidden(r1, r2)) continue;
          Label w = fresh(b);
          RuleInstance inst;
          inst.rule = RuleId::A;
          inst.rels = {r1, r2};
          inst.fresh = {w};
          add(std::move(inst));
          added_by_target[r1.target.index].push_back({r2.left, w, r1.target});
          added_by_target[w.index].push_back({r1.right, r2.right, w});
        }
      }
    }

    // (c) U′ for every label, with an item mentioning it as dependency.
    {
      std::unordered_map<std::uint32_t, std::optional<RelAtom>> witness_rel;
      std::unordered_map<std::uint32_t, PrincipalFormula> witness_lf;
      std::unordered_map<std::uint32_t, Ineq> witness_ineq;
      for (const auto& e : b.s.rel())
        for (Label l : {e.atom.left, e.atom.right, e.atom.target}) witness_rel.emplace(l.index, e.atom);
      for (const auto& e : b.s.ineq())
        for (Label l : {e.ineq.left, e.ineq.right}) witness_ineq.emplace(l.index, e.ineq);
      for (Side side : {Side::Left, Side::Right})
        for (const auto& e : b.s.side(side)) witness_lf.emplace(e.lf.label.index, PrincipalFormula{side, e.lf});
      for (Label w : labels_of(b.s)) {
        if (b.s.contains(RelAtom{w, Label::eps(), w})) continue;
        RuleInstance inst;
        inst.rule = RuleId::U;
        inst.params.push_back(w);
        if (!w.is_eps()) {
          if (auto it = witness_rel.find(w.index); it != witness_rel.end()) {
            inst.rels.push_back(*it->second);
          } else if (auto jt = witness_lf.find(w.index); jt != witness_lf.end()) {
            inst.formulae.push_back(jt->second);
          } else if (auto kt = witness_ineq.find(w.index); kt != witness_ineq.end()) {
            inst.ineqs.push_back(kt->second);
          }
        }
        add(std::move(inst));
      }
    }

    if (!cfg_.cancellativity) {
      std::vector<RelAtom> g;
      for (const auto& e : b.s.rel())
        if (e.atom.left == e.atom.target && !e.atom.right.is_eps()) g.push_back(e.atom);
      for (const RelAtom& r : g) {
        if (!b.memo.a_c.insert(r)) continue;
        RuleInstance inst;
        inst.rule = RuleId::A_C;
        inst.rels.push_back(r);
        inst.fresh = {fresh(b)};
        add(std::move(inst));
      }
    }

    if (cfg_.splittability) {
      std::unordered_set<std::uint32_t> live;
      for (Side side : {Side::Left, Side::Right})
        for (const auto& e : b.s.side(side)) live.insert(e.lf.label.index);
      std::vector<Ineq> qs;
      for (const auto& e : b.s.ineq())
        if (e.ineq.right.is_eps() && !e.ineq.left.is_eps() && live.count(e.ineq.left.index)) qs.push_back(e.ineq);
      for (const Ineq& q : qs) {
        if (!b.memo.split.insert(q.left)) continue;
        RuleInstance inst;
        inst.rule = RuleId::S;
        inst.ineqs.push_back(q);
        inst.fresh = {fresh(b), fresh(b)};
        add(std::move(inst));
      }
    }

    if (cfg_.cross_split) {
      std::vector<RelAtom> g;
      for (const auto& e : b.s.rel())
        if (!e.atom.left.is_eps() && !e.atom.right.is_eps()) g.push_back(e.atom);
      std::unordered_map<std::uint32_t, std::vector<RelAtom>> by_target;
      for (const RelAtom& r : g) by_target[r.target.index].push_back(r);
      for (const RelAtom& r : g) {
        if (b.memo.cs_c.insert(r)) {
          RuleInstance inst;
          inst.rule = RuleId::CS_C;
          inst.rels.push_back(r);
          inst.fresh = {fresh(b), fresh(b), fresh(b), fresh(b)};
          add(std::move(inst));
        }
        for (const RelAtom& o : by_target[r.target.index]) {
          if (!(r < o)) continue;
          // Commuted copies of one split carry no new information.
          if (o.left == r.right && o.right == r.left) continue;
          if (!b.memo.cs.insert(AtomPair{r, o})) continue;
          RuleInstance inst;
          inst.rule = RuleId::CS;
          inst.rels = {r, o};
          inst.fresh = {fresh(b), fresh(b), fresh(b), fresh(b)};
          add(std::move(inst));
        }
      }
    }
    return changed;
  }

  const LogicConfig& cfg_;
  const SearchLimits& lim_;
  const SearchOptions& opt_;
  Clock::time_point start_;
  std::uint64_t next_expr_ = 1;
};

// Deep proofs recurse once per nested two-premise rule; give them room.
template <class F>
void run_on_large_stack(F&& f) {
  struct Ctx {
    F* fn;
    std::exception_ptr err;
  } ctx{&f, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, std::size_t{1} << 30);
  pthread_t th;
  auto entry = [](void* p) -> void* {
    auto* c = static_cast<Ctx*>(p);
    try {
      (*c->fn)();
    } catch (...) {
      c->err = std::current_exception();
    }
    return nullptr;
  };
  if (pthread_create(&th, &attr, entry, &ctx) != 0) {
    pthread_attr_destroy(&attr);
    f();
    return;
  }
  pthread_join(th, nullptr);
  pthread_attr_destroy(&attr);
  if (ctx.err) std::rethrow_exception(ctx.err);
}

bool uses_heap(const Sequent& s) {
  for (Side side : {Side::Left, Side::Right})
    for (const auto& e : s.side(side))
      if (e.lf.formula.mentions_heap()) return true;
  return false;
}

}  // namespace

Verdict prove_sequent(const Sequent& s, const LogicConfig& cfg, const SearchLimits& lim,
                      const SearchOptions& opt) {
  cfg.validate();
  if (!cfg.heap && uses_heap(s))
    throw InputError("formula uses points-to, equality or exists, which need the heap extension");
  if (lim.max_structural_rounds == 0 || lim.max_branch_rule_apps == 0 || lim.wall_clock_ms == 0)
    throw InputError("search limits must be positive");
  auto start = Clock::now();
  Verdict v;
  Prover prover(cfg, lim, opt);
  Branch root;
  root.s = s;
  root.next_label = s.max_label_index() + 1;
  prover.reserve_exprs(s);
  Outcome out;
  run_on_large_stack([&] { out = prover.run(std::move(root)); });
  v.stats = prover.stats;
  v.kind = out.kind;
  v.limit = out.limit;
  if (out.kind == VerdictKind::Valid) {
    auto top = std::make_shared<Derivation>();
    top->conclusion = s;
    top->instance = out.proof->instance;
    top->premises = out.proof->premises;
    out.proof.reset();
    CheckResult cr = check(*top, cfg);
    if (!cr) throw std::logic_error("emitted derivation failed the checker: " + cr.message);
    v.proof = std::move(top);
  } else if (out.kind == VerdictKind::NotProved) {
    v.open_branch = std::move(out.open);
  }
  v.stats.elapsed_ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count());
  return v;
}

Verdict prove(Formula f, const LogicConfig& cfg, const SearchLimits& lim, const SearchOptions& opt) {
  Sequent s;
  s.add_formula(Side::Right, {Label::var(1), f});
  return prove_sequent(s, cfg, lim, opt);
}

Saturation step2_saturate(const Sequent& s, const LogicConfig& cfg) {
  Saturation out{s, {}};
  for (;;) {
    RuleInstance inst;
    if (auto st = find_norm_step(out.sequent, cfg)) {
      inst = from_norm_step(*st);
    } else if (cfg.heap) {
      auto h = find_heap_step(out.sequent);
      if (!h) break;
      inst = std::move(*h);
    } else {
      break;
    }
    apply_premise(out.sequent, inst, 0, cfg);
    out.applied.push_back(std::move(inst));
  }
  return out;
}

StructuralRound step5_structural_round(const Sequent& s, const LogicConfig& cfg) {
  SearchLimits lim;
  lim.max_branch_rule_apps = UINT64_MAX;
  SearchOptions opt;
  Prover prover(cfg, lim, opt);
  Branch b;
  b.s = s;
  b.next_label = s.max_label_index() + 1;
  std::vector<Step> trail;
  bool changed = prover.round(b, trail);
  StructuralRound out{std::move(b.s), {}, changed};
  for (auto& st : trail) out.applied.push_back(std::move(st.inst));
  return out;
}

bool backjump_filter(const CoreItems& core, const Sequent& other) {
  for (const auto& r : core.rels)
    if (!other.contains(r)) return false;
  for (const auto& q : core.ineqs)
    if (!other.contains(q)) return false;
  for (const auto& lf : core.gamma)
    if (!other.contains(Side::Left, lf)) return false;
  for (const auto& lf : core.delta)
    if (!other.contains(Side::Right, lf)) return false;
  return true;
}

std::vector<RelAtom> heuristic_assoc(const Sequent& s, const LabelledFormula& target) {
  if (target.formula.kind() != Connective::Star) return {};
  TreeMatcher m(s);
  std::vector<RelAtom> out;
  // Root split first, then the splits below it that complete the tree.
  std::vector<std::pair<Label, Formula>> todo{{target.label, target.formula}};
  for (std::size_t i = 0; i < todo.size(); ++i) {
    auto [l, f] = todo[i];
    if (f.kind() != Connective::Star || s.contains(Side::Left, {l, f})) continue;
    for (const RelAtom& r : m.atoms_at(l)) {
      if (r.left == l || r.right == l) continue;
      if (m.match(r.left, f.lhs()) && m.match(r.right, f.rhs())) {
        out.push_back(r);
        todo.push_back({r.left, f.lhs()});
        todo.push_back({r.right, f.rhs()});
        break;
      }
    }
  }
  return out;
}

}  // namespace separata
