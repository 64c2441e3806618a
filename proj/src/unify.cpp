#include "separata/unify.hpp"

#include <algorithm>
#include <unordered_map>

namespace separata {

namespace {

std::uint64_t pair_key(Label a, Label b) {
  return (static_cast<std::uint64_t>(a.index) << 32) | b.index;
}

std::optional<NormStep> scan(const Sequent& s, RuleId rule) {
  const auto& rel = s.rel();
  switch (rule) {
    case RuleId::Eq1:
    case RuleId::Eq2:
      for (const auto& e : rel) {
        const RelAtom& r = e.atom;
        if (!r.left.is_eps() || r.right == r.target) continue;
        // (ε,w▷w′): Eq1 gives [w′/w], Eq2 (read with w′ on the left) gives
        // [w/w′]. Each direction belongs to exactly one of them.
        bool eq1 = r.right > r.target;
        if (eq1 != (rule == RuleId::Eq1)) continue;
        Subst th = eq1 ? Subst{r.right, r.target} : Subst{r.target, r.right};
        return NormStep{rule, {r}, th};
      }
      return std::nullopt;
    case RuleId::P: {
      std::unordered_map<std::uint64_t, RelAtom> seen;
      for (const auto& e : rel) {
        const RelAtom& r = e.atom;
        auto [it, fresh] = seen.emplace(pair_key(r.left, r.right), r);
        if (fresh || it->second.target == r.target) continue;
        const RelAtom& o = it->second;
        bool keep_o = o.target < r.target;
        const RelAtom& kept = keep_o ? o : r;
        const RelAtom& gone = keep_o ? r : o;
        return NormStep{rule, {kept, gone}, Subst{gone.target, kept.target}};
      }
      return std::nullopt;
    }
    case RuleId::C: {
      std::unordered_map<std::uint64_t, RelAtom> seen;
      for (const auto& e : rel) {
        const RelAtom& r = e.atom;
        auto [it, fresh] = seen.emplace(pair_key(r.left, r.target), r);
        if (fresh || it->second.right == r.right) continue;
        const RelAtom& o = it->second;
        bool keep_o = o.right < r.right;
        const RelAtom& kept = keep_o ? o : r;
        const RelAtom& gone = keep_o ? r : o;
        return NormStep{rule, {kept, gone}, Subst{gone.right, kept.right}};
      }
      return std::nullopt;
    }
    case RuleId::IU:
      for (const auto& e : rel) {
        const RelAtom& r = e.atom;
        if (r.target.is_eps() && !r.left.is_eps())
          return NormStep{rule, {r}, Subst{r.left, Label::eps()}};
      }
      return std::nullopt;
    case RuleId::D:
      for (const auto& e : rel) {
        const RelAtom& r = e.atom;
        if (r.left == r.right && !r.left.is_eps())
          return NormStep{rule, {r}, Subst{r.left, Label::eps()}};
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

}  // namespace

std::optional<NormStep> find_norm_step(const Sequent& s, const LogicConfig& cfg,
                                       const ScanOrder& order) {
  for (RuleId r : order) {
    if (!rule_enabled(r, cfg)) continue;
    if (auto st = scan(s, r)) return st;
  }
  return std::nullopt;
}

NormResult normalize(const Sequent& s, const LogicConfig& cfg, const ScanOrder& order) {
  NormResult out{s, {}};
  while (auto st = find_norm_step(out.sequent, cfg, order)) {
    out.sequent.substitute(st->subst);
    out.applied.push_back(std::move(*st));
  }
  return out;
}

Label representative(const std::vector<NormStep>& applied, Label l) {
  for (const auto& st : applied)
    if (l == st.subst.from) l = st.subst.to;
  return l;
}

std::uint64_t NormIndex::key(const RelAtom& r) {
  return static_cast<std::uint64_t>(r.left.index) | (static_cast<std::uint64_t>(r.right.index) << 21) |
         (static_cast<std::uint64_t>(r.target.index) << 42);
}

NormIndex::NormIndex(const Sequent& s, const LogicConfig& cfg)
    : p_(cfg.partial_determinism), c_(cfg.cancellativity), iu_(cfg.indivisible_unit), d_(cfg.disjointness) {
  for (const auto& e : s.rel()) add(e.atom);
}

void NormIndex::add(const RelAtom& r) {
  if (!atoms_.insert(key(r)).second) return;
  occ_[r.left.index].push_back(r);
  if (r.right != r.left) occ_[r.right.index].push_back(r);
  if (r.target != r.left && r.target != r.right) occ_[r.target.index].push_back(r);
  work_.push_back(r);
}

void NormIndex::substitute(Subst th) {
  if (th.from == th.to) return;
  auto it = occ_.find(th.from.index);
  if (it == occ_.end()) return;
  std::vector<RelAtom> moved = std::move(it->second);
  occ_.erase(it);
  auto m = [&](Label l) { return l == th.from ? th.to : l; };
  for (const RelAtom& r : moved) {
    if (!atoms_.erase(key(r))) continue;
    add({m(r.left), m(r.right), m(r.target)});
  }
}

// Steps involving r against the atoms indexed so far. Stale entries of the
// pair tables are dropped on the way.
std::optional<NormStep> NormIndex::check(const RelAtom& r) {
  if (r.left.is_eps() && r.right != r.target) {
    bool eq1 = r.right > r.target;
    Subst th = eq1 ? Subst{r.right, r.target} : Subst{r.target, r.right};
    return NormStep{eq1 ? RuleId::Eq1 : RuleId::Eq2, {r}, th};
  }
  auto pair_step = [&](std::unordered_map<std::uint64_t, std::vector<RelAtom>>& table, Label a, Label b,
                       bool by_target) -> std::optional<NormStep> {
    auto& bucket = table[pair_key(a, b)];
    bucket.erase(std::remove_if(bucket.begin(), bucket.end(), [&](const RelAtom& o) { return !present(o); }),
                 bucket.end());
    for (const RelAtom& o : bucket) {
      if (o == r) return std::nullopt;
      Label mine = by_target ? r.right : r.target;
      Label theirs = by_target ? o.right : o.target;
      if (mine == theirs) continue;
      bool keep_o = theirs < mine;
      const RelAtom& kept = keep_o ? o : r;
      const RelAtom& gone = keep_o ? r : o;
      Subst th = by_target ? Subst{gone.right, kept.right} : Subst{gone.target, kept.target};
      return NormStep{by_target ? RuleId::C : RuleId::P, {kept, gone}, th};
    }
    bucket.push_back(r);
    return std::nullopt;
  };
  if (p_)
    if (auto st = pair_step(by_lr_, r.left, r.right, false)) return st;
  if (c_)
    if (auto st = pair_step(by_lt_, r.left, r.target, true)) return st;
  if (iu_ && r.target.is_eps() && !r.left.is_eps()) return NormStep{RuleId::IU, {r}, Subst{r.left, Label::eps()}};
  if (d_ && r.left == r.right && !r.left.is_eps()) return NormStep{RuleId::D, {r}, Subst{r.left, Label::eps()}};
  return std::nullopt;
}

std::optional<NormStep> NormIndex::next() {
  while (!work_.empty()) {
    RelAtom r = work_.front();
    if (!present(r)) {
      work_.pop_front();
      continue;
    }
    if (auto st = check(r)) return st;  // r stays queued until the step removes it
    work_.pop_front();
  }
  return std::nullopt;
}

bool entails_eq(const Sequent& s, Label a, Label b, const LogicConfig& cfg) {
  if (a == b) return true;
  // Only 𝒢 matters; skip copying the formula sides.
  Sequent g;
  for (const auto& e : s.rel()) g.add_rel(e.atom);
  auto res = normalize(g, cfg);
  return representative(res.applied, a) == representative(res.applied, b);
}

}  // namespace separata
