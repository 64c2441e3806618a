#pragma once

#include <array>
#include <deque>
#include <unordered_map>
#include <unordered_set>
#include <optional>
#include <vector>

#include "separata/logic.hpp"
#include "separata/sequent.hpp"

namespace separata {

// One substitutional step: the rule, its principal atoms and the
// substitution it applies.
struct NormStep {
  RuleId rule;
  std::vector<RelAtom> principals;
  Subst subst;
};

struct NormResult {
  Sequent sequent;
  std::vector<NormStep> applied;
};

// Order in which rule kinds are scanned. Only Eq1, Eq2, P, C, IU and D may
// appear; Eq1 and Eq2 share a scan since one atom is an instance of exactly
// one of them once the substitution direction is fixed.
using ScanOrder = std::array<RuleId, 6>;
inline constexpr ScanOrder kDefaultScanOrder = {RuleId::Eq1, RuleId::Eq2, RuleId::P,
                                                RuleId::C,   RuleId::IU,  RuleId::D};

// First applicable substitutional instance in the given scan order. The
// substitution always maps the larger label to the smaller one.
std::optional<NormStep> find_norm_step(const Sequent& s, const LogicConfig& cfg,
                                       const ScanOrder& order = kDefaultScanOrder);

NormResult normalize(const Sequent& s, const LogicConfig& cfg,
                     const ScanOrder& order = kDefaultScanOrder);

// Image of l under the composed substitutions of `applied`.
Label representative(const std::vector<NormStep>& applied, Label l);

// Incremental normalization for a 𝒢 that changes a little at a time. The
// index mirrors a set of atoms; next() reports an applicable step (same
// instances and orientation as find_norm_step, possibly a different one)
// and the caller reports every change with add / substitute.
class NormIndex {
 public:
  NormIndex() = default;
  NormIndex(const Sequent& s, const LogicConfig& cfg);

  void add(const RelAtom& r);
  void substitute(Subst th);
  std::optional<NormStep> next();

 private:
  static std::uint64_t key(const RelAtom& r);
  bool present(const RelAtom& r) const { return atoms_.count(key(r)) != 0; }
  std::optional<NormStep> check(const RelAtom& r);

  bool p_ = false, c_ = false, iu_ = false, d_ = false;
  std::unordered_set<std::uint64_t> atoms_;
  std::unordered_map<std::uint32_t, std::vector<RelAtom>> occ_;
  std::unordered_map<std::uint64_t, std::vector<RelAtom>> by_lr_, by_lt_;
  std::deque<RelAtom> work_;
};

bool entails_eq(const Sequent& s, Label a, Label b, const LogicConfig& cfg);

}  // namespace separata
