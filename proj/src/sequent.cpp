#include "separata/sequent.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <unordered_set>

namespace separata {

namespace {
constexpr std::uint32_t kMaxLabel = (1u << 21) - 1;

void check_label(Label l) {
  if (l.index > kMaxLabel) throw ContractViolation("label index overflow");
}
}  // namespace

std::string to_string(Label l) {
  if (l.is_eps()) return "eps";
  return "a" + std::to_string(l.index);
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "eps" || text == "\xCE\xB5") return Label::eps();
  if (text.size() < 2 || text[0] != 'a') return std::nullopt;
  std::uint32_t n = 0;
  auto [p, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), n);
  if (ec != std::errc() || p != text.data() + text.size() || n == 0 || n > kMaxLabel)
    return std::nullopt;
  return Label::var(n);
}

std::string to_string(const RelAtom& r) {
  return "(" + to_string(r.left) + "," + to_string(r.right) + " |> " + to_string(r.target) + ")";
}

std::string to_string(const Ineq& i) {
  return "(" + to_string(i.left) + " != " + to_string(i.right) + ")";
}

std::string to_string(const LabelledFormula& lf) {
  std::string body = print(lf.formula);
  switch (lf.formula.kind()) {
    case Connective::Prop:
    case Connective::Top:
    case Connective::Bot:
    case Connective::Emp:
      return to_string(lf.label) + ":" + body;
    default:
      return to_string(lf.label) + ":(" + body + ")";
  }
}

Sequent::Key Sequent::key_of(const RelAtom& r) {
  return static_cast<Key>(r.left.index) | (static_cast<Key>(r.right.index) << 21) |
         (static_cast<Key>(r.target.index) << 42);
}

Sequent::Key Sequent::key_of(const Ineq& i) {
  return static_cast<Key>(i.left.index) | (static_cast<Key>(i.right.index) << 32);
}

Sequent::Key Sequent::key_of(const LabelledFormula& lf) {
  return static_cast<Key>(lf.formula.id()) | (static_cast<Key>(lf.label.index) << 32);
}

void Sequent::use(Label l, int delta) {
  if (l.index >= label_uses_.size()) label_uses_.resize(l.index + 1, 0);
  label_uses_[l.index] += delta;
}

bool Sequent::add_rel(RelAtom r) {
  check_label(r.left);
  check_label(r.right);
  check_label(r.target);
  auto [it, inserted] = rel_index_.emplace(key_of(r), next_id_);
  if (!inserted) return false;
  rel_.push_back({r, next_id_++});
  use(r.left, 1);
  use(r.right, 1);
  use(r.target, 1);
  return true;
}

bool Sequent::add_ineq(Ineq i) {
  check_label(i.left);
  check_label(i.right);
  auto [it, inserted] = ineq_index_.emplace(key_of(i), next_id_);
  if (!inserted) return false;
  ineq_.push_back({i, next_id_++});
  use(i.left, 1);
  use(i.right, 1);
  return true;
}

bool Sequent::add_formula(Side s, LabelledFormula lf, Placement p) {
  check_label(lf.label);
  auto [it, inserted] = index_of(s).emplace(key_of(lf), next_id_);
  if (!inserted) return false;
  std::int64_t order = p == Placement::Front ? --front_ : ++back_;
  auto& v = side_mut(s);
  FormulaEntry e{lf, next_id_++, order};
  // Keep each side sorted by order so the vector is the queue.
  if (p == Placement::Front) v.insert(v.begin(), e);
  else v.push_back(e);
  use(lf.label, 1);
  return true;
}

bool Sequent::remove_formula(Side s, const LabelledFormula& lf) {
  auto& idx = index_of(s);
  auto it = idx.find(key_of(lf));
  if (it == idx.end()) return false;
  idx.erase(it);
  auto& v = side_mut(s);
  auto pos = std::find_if(v.begin(), v.end(), [&](const FormulaEntry& e) { return e.lf == lf; });
  v.erase(pos);
  use(lf.label, -1);
  return true;
}

void Sequent::move_to_back(Side s, const LabelledFormula& lf) {
  auto& v = side_mut(s);
  auto pos = std::find_if(v.begin(), v.end(), [&](const FormulaEntry& e) { return e.lf == lf; });
  if (pos == v.end()) return;
  FormulaEntry e = *pos;
  v.erase(pos);
  e.order = ++back_;
  v.push_back(e);
}

bool Sequent::contains(const RelAtom& r) const { return rel_index_.count(key_of(r)) != 0; }
bool Sequent::contains(const Ineq& i) const { return ineq_index_.count(key_of(i)) != 0; }
bool Sequent::contains(Side s, const LabelledFormula& lf) const {
  return index_of(s).count(key_of(lf)) != 0;
}

std::optional<ItemId> Sequent::id_of(const RelAtom& r) const {
  auto it = rel_index_.find(key_of(r));
  if (it == rel_index_.end()) return std::nullopt;
  return it->second;
}
std::optional<ItemId> Sequent::id_of(const Ineq& i) const {
  auto it = ineq_index_.find(key_of(i));
  if (it == ineq_index_.end()) return std::nullopt;
  return it->second;
}
std::optional<ItemId> Sequent::id_of(Side s, const LabelledFormula& lf) const {
  const auto& idx = index_of(s);
  auto it = idx.find(key_of(lf));
  if (it == idx.end()) return std::nullopt;
  return it->second;
}

void Sequent::recount_labels() {
  std::fill(label_uses_.begin(), label_uses_.end(), 0);
  for (const auto& e : rel_) {
    use(e.atom.left, 1);
    use(e.atom.right, 1);
    use(e.atom.target, 1);
  }
  for (const auto& e : ineq_) {
    use(e.ineq.left, 1);
    use(e.ineq.right, 1);
  }
  for (const auto& e : gamma_) use(e.lf.label, 1);
  for (const auto& e : delta_) use(e.lf.label, 1);
}

namespace {

// In-place substitution over one member vector. Only members mentioning
// θ.from are rehashed; on a merge the member with the smaller id survives.
template <class Entry, class KeyFn, class MapFn, class LabelsFn, class UseFn>
void substitute_members(std::vector<Entry>& v, std::unordered_map<std::uint64_t, ItemId>& idx, Label from,
                        KeyFn key, MapFn map, LabelsFn labels, UseFn use) {
  auto mentions = [&](const Entry& e) {
    for (Label l : labels(e))
      if (l == from) return true;
    return false;
  };
  auto release = [&](const Entry& e) {
    for (Label l : labels(e)) use(l, -1);
  };
  bool any = false;
  for (const Entry& e : v)
    if (mentions(e)) {
      idx.erase(key(e));
      any = true;
    }
  if (!any) return;
  std::unordered_set<ItemId> dead;
  for (Entry& e : v) {
    if (!mentions(e)) continue;
    Entry moved = map(e);
    auto [it, inserted] = idx.emplace(key(moved), e.id);
    if (inserted) {
      release(e);
      for (Label l : labels(moved)) use(l, 1);
      e = moved;
    } else if (e.id < it->second) {
      dead.insert(it->second);
      it->second = e.id;
      // The survivor takes over the counts of the member it replaces.
      release(e);
      e = moved;
    } else {
      dead.insert(e.id);
      release(e);
    }
  }
  if (!dead.empty())
    v.erase(std::remove_if(v.begin(), v.end(), [&](const Entry& e) { return dead.count(e.id) != 0; }), v.end());
}

}  // namespace

void Sequent::substitute(Subst theta) {
  if (theta.from.is_eps()) throw ContractViolation("cannot substitute for eps");
  if (theta.from == theta.to || !occurs(theta.from)) return;
  check_label(theta.to);
  const Label from = theta.from, to = theta.to;
  auto m = [&](Label l) { return l == from ? to : l; };
  auto use_fn = [this](Label l, int d) { use(l, d); };

  substitute_members(
      rel_, rel_index_, from, [](const RelEntry& e) { return key_of(e.atom); },
      [&](RelEntry e) {
        e.atom = {m(e.atom.left), m(e.atom.right), m(e.atom.target)};
        return e;
      },
      [](const RelEntry& e) { return std::array<Label, 3>{e.atom.left, e.atom.right, e.atom.target}; }, use_fn);
  substitute_members(
      ineq_, ineq_index_, from, [](const IneqEntry& e) { return key_of(e.ineq); },
      [&](IneqEntry e) {
        e.ineq = {m(e.ineq.left), m(e.ineq.right)};
        return e;
      },
      [](const IneqEntry& e) { return std::array<Label, 2>{e.ineq.left, e.ineq.right}; }, use_fn);
  for (Side sd : {Side::Left, Side::Right})
    substitute_members(
        side_mut(sd), index_of(sd), from, [](const FormulaEntry& e) { return key_of(e.lf); },
        [&](FormulaEntry e) {
          e.lf.label = m(e.lf.label);
          return e;
        },
        [](const FormulaEntry& e) { return std::array<Label, 1>{e.lf.label}; }, use_fn);
}

void Sequent::map_formulas(const std::function<Formula(Formula)>& fn) {
  for (Side s : {Side::Left, Side::Right}) {
    auto& v = side_mut(s);
    auto& idx = index_of(s);
    std::vector<FormulaEntry> out;
    out.reserve(v.size());
    idx.clear();
    for (auto e : v) {
      e.lf.formula = fn(e.lf.formula);
      if (idx.emplace(key_of(e.lf), e.id).second) out.push_back(e);
    }
    v = std::move(out);
  }
  recount_labels();
}

bool Sequent::occurs(Label l) const {
  return l.index < label_uses_.size() && label_uses_[l.index] != 0;
}

std::uint32_t Sequent::max_label_index() const {
  for (std::size_t i = label_uses_.size(); i-- > 1;)
    if (label_uses_[i] != 0) return static_cast<std::uint32_t>(i);
  return 0;
}

bool operator==(const Sequent& a, const Sequent& b) {
  auto same_keys = [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return false;
    for (const auto& [k, v] : x)
      if (!y.count(k)) return false;
    return true;
  };
  return same_keys(a.rel_index_, b.rel_index_) && same_keys(a.ineq_index_, b.ineq_index_) &&
         same_keys(a.gamma_index_, b.gamma_index_) && same_keys(a.delta_index_, b.delta_index_);
}

Sequent apply_subst(const Sequent& s, Subst theta) {
  Sequent out = s;
  out.substitute(theta);
  return out;
}

Label fresh_label(const Sequent& s) { return Label::var(s.max_label_index() + 1); }

std::vector<Label> labels_of(const Sequent& s) {
  std::vector<Label> out{Label::eps()};
  for (std::uint32_t i = 1; i <= s.max_label_index(); ++i)
    if (s.occurs(Label::var(i))) out.push_back(Label::var(i));
  return out;
}

std::string to_string(const Sequent& s) {
  std::string out;
  auto sep = [&out](const char* glue) {
    if (!out.empty()) out += glue;
  };
  for (const auto& e : s.rel()) {
    sep("; ");
    out += to_string(e.atom);
  }
  for (const auto& e : s.ineq()) {
    sep("; ");
    out += to_string(e.ineq);
  }
  bool first = true;
  for (const auto& e : s.gamma()) {
    sep(first ? " ; " : "; ");
    first = false;
    out += to_string(e.lf);
  }
  out += out.empty() ? "|-" : " |-";
  first = true;
  for (const auto& e : s.delta()) {
    out += first ? " " : "; ";
    first = false;
    out += to_string(e.lf);
  }
  return out;
}

}  // namespace separata
