#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "separata/calculus.hpp"
#include "separata/formula.hpp"
#include "separata/logic.hpp"
#include "separata/sequent.hpp"

namespace separata {

struct SearchLimits {
  std::uint64_t max_structural_rounds = 6;     // step-5 rounds along one branch
  std::uint64_t max_branch_rule_apps = 200000;  // rule applications along one branch
  std::uint64_t wall_clock_ms = 60000;
};

struct SearchOptions {
  bool backjump = true;
  bool heuristic = true;
};

enum class VerdictKind { Valid, NotProved, ResourceExhausted };
enum class Limit { None, StructuralRounds, BranchRuleApps, WallClock };

const char* to_string(VerdictKind k);
const char* to_string(Limit l);

struct SearchStats {
  std::uint64_t rule_apps = 0;      // every backward rule application
  std::uint64_t branches = 0;       // premises explored
  std::uint64_t backjumps = 0;      // second premises skipped
  std::uint64_t structural_rounds = 0;
  std::uint64_t elapsed_ms = 0;
};

struct Verdict {
  VerdictKind kind = VerdictKind::NotProved;
  DerivationPtr proof;                  // Valid: checked derivation
  std::optional<Sequent> open_branch;   // NotProved: saturated open branch, unverified
  Limit limit = Limit::None;            // ResourceExhausted: which bound
  SearchStats stats;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backward search from ⊢ a1:f. Throws InputError when f uses heap
// constructors without the heap extension, and ConfigError on a bad config.
Verdict prove(Formula f, const LogicConfig& cfg, const SearchLimits& lim = {},
              const SearchOptions& opt = {});
Verdict prove_sequent(const Sequent& s, const LogicConfig& cfg, const SearchLimits& lim = {},
                      const SearchOptions& opt = {});

// Step-2 saturation: normalization plus the substitutional heap rules, with
// the applications performed.
struct Saturation {
  Sequent sequent;
  std::vector<RuleInstance> applied;
};
Saturation step2_saturate(const Sequent& s, const LogicConfig& cfg);

// One step-5 round: E-closure, then A on every applicable pair of the
// E-closed atoms (skipping pairs whose result is already present and pairs
// with an ε child, whose result unifies onto existing atoms), then U′
// for every label. Splittability and cross-split rules run after these when
// enabled; A_C runs when C is off. `changed` is false at the fixpoint.
struct StructuralRound {
  Sequent sequent;
  std::vector<RuleInstance> applied;
  bool changed = false;
};
StructuralRound step5_structural_round(const Sequent& s, const LogicConfig& cfg);

// True when every item of `core` is in `other_premise`, i.e. the closed
// sibling's subproof also closes the other premise.
struct CoreItems {
  std::vector<RelAtom> rels;
  std::vector<Ineq> ineqs;
  std::vector<LabelledFormula> gamma, delta;
};
bool backjump_filter(const CoreItems& closed_core, const Sequent& other_premise);

// Atoms (x,y ▷ z) to try first for z:A∗B in Δ: those whose children carry
// A and B in Γ, directly or through a tree of existing atoms. Empty when
// no such atom exists.
std::vector<RelAtom> heuristic_assoc(const Sequent& s, const LabelledFormula& target);

}  // namespace separata
