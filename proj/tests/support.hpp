#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "separata/formula.hpp"
#include "separata/oracle.hpp"
#include "separata/sequent.hpp"

namespace testing_support {

using namespace separata;

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

// Random heap-free formula over the given atoms, nesting depth at most `depth`.
Formula random_formula(Rng& rng, const std::vector<std::string>& atoms, int depth);

// A finite model for the whole language. Worlds and triples come from a
// frame; when `memory` is non-empty the worlds are heaps over the addresses
// 0..memory.size()-1 (world w is the set of bits of w) and e1 |-> e2 holds
// at exactly the singleton heap {s(e1)} when memory[s(e1)] = s(e2).
struct Model {
  FrameModel frame;
  std::vector<std::uint32_t> memory;
  std::uint32_t values = 1;  // store values range over 0..values-1

  bool heap() const { return !memory.empty(); }
};

// Heaps over `addresses` cells with disjoint union; memory is random.
Model heap_model(Rng& rng, std::uint32_t addresses);

using Store = std::map<std::uint32_t, std::uint32_t>;  // symbol id -> value

// Forcing relation written directly from the semantic clauses, independent of
// the library's oracle. Free store variables must be in `s`.
bool forces(const Model& m, const Store& s, World h, Formula f);

using LabelMap = std::map<std::uint32_t, World>;  // label index -> world

// Every atom and inequality holds, Γ is forced and Δ is not.
bool falsifies(const Model& m, const LabelMap& rho, const Store& s, const Sequent& q);

// Some extension of (rho, s) to the labels and store variables of q that
// are not yet mapped falsifies q.
bool falsifiable_extending(const Model& m, const LabelMap& rho, const Store& s, const Sequent& q);

}  // namespace testing_support
