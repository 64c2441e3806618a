#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "separata/formula.hpp"
#include "separata/logic.hpp"

namespace separata {

using World = std::uint32_t;

struct Triple {
  World a, b, c;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Finite relational frame plus valuation. Worlds are 0..size-1.
struct FrameModel {
  static constexpr World kMaxWorlds = 64;

  World size = 1;
  World eps = 0;
  std::vector<Triple> rel;
  std::map<std::string, std::uint64_t> valuation;  // world sets as bitmasks

  bool holds(World a, World b, World c) const;
  std::uint64_t all() const { return size >= 64 ? ~0ULL : (1ULL << size) - 1; }
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Worlds where f is forced. f must be heap-free (OracleError otherwise).
std::uint64_t extension(const FrameModel& m, Formula f);
bool eval(const FrameModel& m, World h, Formula f);

// The first frame condition that fails, as readable text, or nullopt.
std::optional<std::string> condition_violation(const FrameModel& m, const LogicConfig& cfg);
bool check_conditions(const FrameModel& m, const LogicConfig& cfg);

// Every frame of n worlds passing check_conditions, with ε = 0. n ≤ 3 is
// exhaustive; n = 4 needs P and enumerates partial function tables.
// Throws OracleError beyond that.
std::vector<FrameModel> enumerate_frames(World n, const LogicConfig& cfg);

struct Countermodel {
  FrameModel model;
  World world;
};

// Searches frames of size 1..max_n and all valuations of the propositions
// of f for a world where f fails.
std::optional<Countermodel> find_countermodel(Formula f, World max_n, const LogicConfig& cfg);

// Text form:
//   worlds N
//   eps E
//   R a b c        (one line per triple)
//   val p w1 w2    (worlds where p holds)
// with '#' comments. parse_model throws OracleError.
std::string to_text(const FrameModel& m);
FrameModel parse_model(const std::string& text);

}  // namespace separata
