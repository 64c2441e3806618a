#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace separata {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Which structural / extension rules are active. The logic is BBI plus the
// enabled frame conditions.
struct LogicConfig {
  bool partial_determinism = false;  // P
  bool cancellativity = false;       // C
  bool indivisible_unit = false;     // IU
  bool disjointness = false;         // D
  bool splittability = false;        // S, ≠L, EM
  bool cross_split = false;          // CS, CS_C
  bool heap = false;                 // ↦, =, ∃

  static LogicConfig bbi() { return {}; }
  static LogicConfig pasl() {
    LogicConfig c;
    c.partial_determinism = c.cancellativity = true;
    return c;
  }
  static LogicConfig pasl_d() {
    LogicConfig c = pasl();
    c.disjointness = true;
    return c;
  }
  static LogicConfig separata_plus() {
    LogicConfig c = pasl_d();
    c.heap = true;
    return c;
  }

  // "bbi", "pasl" or "separata+" followed by "+flag" items drawn from
  // p, c, iu, d, s, cs, heap. Throws ConfigError.
  static LogicConfig parse(std::string_view preset);
  // Canonical preset spelling, e.g. "pasl+d" or "bbi+p+iu".
  std::string name() const;
  // heap needs D and excludes S / CS. Throws ConfigError.
  void validate() const;

  friend bool operator==(const LogicConfig&, const LogicConfig&) = default;
};

enum class RuleId : std::uint8_t {
  Id,
  BotL,
  TopR,
  EmpL,
  EmpR,
  AndL,
  AndR,
  OrL,
  OrR,
  ImpL,
  ImpR,
  NotL,
  NotR,
  StarL,
  StarR,
  WandL,
  WandR,
  E,
  A,
  A_C,
  U,  // the restricted form U′: only for labels already occurring
  Eq1,
  Eq2,
  P,
  C,
  IU,
  D,
  S,
  NeqL,
  EM,
  CS,
  CS_C,
  MapstoL1,
  MapstoL2,
  MapstoL3,
  MapstoL4,
  EqExprL,
  EqExprR,
  ExistsL,
  ExistsR,
};

inline constexpr int kRuleCount = static_cast<int>(RuleId::ExistsR) + 1;

const char* rule_name(RuleId r);
std::optional<RuleId> rule_from_name(std::string_view name);

// Number of premises; fixed per rule.
int rule_arity(RuleId r);
bool rule_enabled(RuleId r, const LogicConfig& cfg);

}  // namespace separata
