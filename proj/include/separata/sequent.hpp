#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "separata/formula.hpp"

namespace separata {

// ε is index 0; label variables are 1, 2, ... The derived ordering
// (ε first, then by index) is the canonical one used to orient substitutions.
struct Label {
  std::uint32_t index = 0;

  static constexpr Label eps() { return Label{0}; }
  static constexpr Label var(std::uint32_t i) { return Label{i}; }
  constexpr bool is_eps() const { return index == 0; }

  auto operator<=>(const Label&) const = default;
};

// "eps" or "a<n>".
std::string to_string(Label l);
std::optional<Label> parse_label(std::string_view text);

// (left, right |> target)
struct RelAtom {
  Label left, right, target;
  auto operator<=>(const RelAtom&) const = default;
};

// (left != right); only (w != eps) is ever generated.
struct Ineq {
  Label left, right;
  auto operator<=>(const Ineq&) const = default;
};

struct LabelledFormula {
  Label label;
  Formula formula;
  friend bool operator==(const LabelledFormula&, const LabelledFormula&) = default;
};

// Replace every occurrence of `from` (a label variable) by `to`.
struct Subst {
  Label from, to;
  auto operator<=>(const Subst&) const = default;
};

std::string to_string(const RelAtom& r);
std::string to_string(const Ineq& i);
std::string to_string(const LabelledFormula& lf);

enum class Side : std::uint8_t { Left, Right };  // Γ, Δ

// Search-facing identity of a sequent member. Preserved by substitution, so
// the prover can track which members a subproof depends on.
using ItemId = std::uint32_t;

// Where a new labelled formula joins its side's fairness queue.
enum class Placement : std::uint8_t { Front, Back };

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// 𝒢; Γ ⊢ Δ with set semantics. Γ and Δ additionally carry a queue order
// (`order`, smaller = earlier) used for fair rule selection; neither the
// order nor the item ids take part in equality.
class Sequent {
 public:
  struct RelEntry {
    RelAtom atom;
    ItemId id;
  };
  struct IneqEntry {
    Ineq ineq;
    ItemId id;
  };
  struct FormulaEntry {
    LabelledFormula lf;
    ItemId id;
    std::int64_t order;
  };

  Sequent() = default;

  const std::vector<RelEntry>& rel() const { return rel_; }
  const std::vector<IneqEntry>& ineq() const { return ineq_; }
  const std::vector<FormulaEntry>& gamma() const { return gamma_; }
  const std::vector<FormulaEntry>& delta() const { return delta_; }
  const std::vector<FormulaEntry>& side(Side s) const {
    return s == Side::Left ? gamma_ : delta_;
  }

  // Each add returns false when the member is already present.
  bool add_rel(RelAtom r);
  bool add_ineq(Ineq i);
  bool add_formula(Side s, LabelledFormula lf, Placement p = Placement::Front);
  bool remove_formula(Side s, const LabelledFormula& lf);
  void move_to_back(Side s, const LabelledFormula& lf);

  bool contains(const RelAtom& r) const;
  bool contains(const Ineq& i) const;
  bool contains(Side s, const LabelledFormula& lf) const;
  std::optional<ItemId> id_of(const RelAtom& r) const;
  std::optional<ItemId> id_of(const Ineq& i) const;
  std::optional<ItemId> id_of(Side s, const LabelledFormula& lf) const;

  // Global label substitution; members that become equal are merged, keeping
  // the earlier one. Throws ContractViolation when θ.from is ε.
  void substitute(Subst theta);

  // Rewrites every formula on both sides (expression substitution), merging
  // members that become equal.
  void map_formulas(const std::function<Formula(Formula)>& fn);

  bool occurs(Label l) const;
  // Largest label index occurring anywhere (0 when only ε occurs).
  std::uint32_t max_label_index() const;
  ItemId next_item_id() const { return next_id_; }
  std::size_t size() const {
    return rel_.size() + ineq_.size() + gamma_.size() + delta_.size();
  }

  // Set equality on 𝒢, inequalities, Γ and Δ.
  friend bool operator==(const Sequent& a, const Sequent& b);

 private:
  using Key = std::uint64_t;
  static Key key_of(const RelAtom& r);
  static Key key_of(const Ineq& i);
  static Key key_of(const LabelledFormula& lf);

  std::vector<FormulaEntry>& side_mut(Side s) { return s == Side::Left ? gamma_ : delta_; }
  std::unordered_map<Key, ItemId>& index_of(Side s) {
    return s == Side::Left ? gamma_index_ : delta_index_;
  }
  const std::unordered_map<Key, ItemId>& index_of(Side s) const {
    return s == Side::Left ? gamma_index_ : delta_index_;
  }
  void use(Label l, int delta);
  void recount_labels();

  std::vector<RelEntry> rel_;
  std::vector<IneqEntry> ineq_;
  std::vector<FormulaEntry> gamma_, delta_;
  std::unordered_map<Key, ItemId> rel_index_, ineq_index_, gamma_index_, delta_index_;
  std::vector<std::uint32_t> label_uses_;
  ItemId next_id_ = 0;
  std::int64_t front_ = 0;
  std::int64_t back_ = 0;
};

// Copy of s with θ applied.
Sequent apply_subst(const Sequent& s, Subst theta);
// Var(n) with n one past the largest label index in s.
Label fresh_label(const Sequent& s);
// Every label of s, always including ε, in canonical order.
std::vector<Label> labels_of(const Sequent& s);

// "(a1,a2 |> a3); (a1 != eps) ; a1:p ; ... |- a2:q ; ..."
std::string to_string(const Sequent& s);

}  // namespace separata

template <>
struct std::hash<separata::Label> {
  std::size_t operator()(separata::Label l) const noexcept { return l.index; }
};
