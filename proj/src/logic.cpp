#include "separata/logic.hpp"

#include <array>
#include <vector>

namespace separata {

namespace {

std::vector<std::string_view> split_plus(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t p = s.find('+', start);
    if (p == std::string_view::npos) p = s.size();
    out.push_back(s.substr(start, p - start));
    start = p + 1;
  }
  return out;
}

constexpr std::array<const char*, kRuleCount> kNames = {
    "id",       "BotL",     "TopR",     "EmpL",     "EmpR",   "AndL",   "AndR",
    "OrL",      "OrR",      "ImpL",     "ImpR",     "NotL",   "NotR",   "StarL",
    "StarR",    "WandL",    "WandR",    "E",        "A",      "A_C",    "U'",
    "Eq1",      "Eq2",      "P",        "C",        "IU",     "D",      "S",
    "NeqL",     "EM",       "CS",       "CS_C",     "MapstoL1", "MapstoL2", "MapstoL3",
    "MapstoL4", "EqExprL",  "EqExprR",  "ExistsL",  "ExistsR",
};

}  // namespace

LogicConfig LogicConfig::parse(std::string_view preset) {
  LogicConfig c;
  std::string_view rest;
  constexpr std::string_view kPlus = "separata+";
  if (preset.substr(0, kPlus.size()) == kPlus) {
    c = separata_plus();
    rest = preset.substr(kPlus.size());
  } else {
    std::size_t p = preset.find('+');
    std::string_view base = preset.substr(0, p);
    if (base == "bbi") c = bbi();
    else if (base == "pasl") c = pasl();
    else throw ConfigError("unknown logic preset '" + std::string(preset) + "'");
    rest = p == std::string_view::npos ? std::string_view() : preset.substr(p + 1);
    if (p != std::string_view::npos && rest.empty())
      throw ConfigError("malformed logic preset '" + std::string(preset) + "'");
  }
  if (!rest.empty()) {
    for (auto f : split_plus(rest)) {
      if (f == "p") c.partial_determinism = true;
      else if (f == "c") c.cancellativity = true;
      else if (f == "iu") c.indivisible_unit = true;
      else if (f == "d") c.disjointness = true;
      else if (f == "s") c.splittability = true;
      else if (f == "cs") c.cross_split = true;
      else if (f == "heap") c.heap = true;
      else
        throw ConfigError("unknown logic flag '" + std::string(f) + "' in '" + std::string(preset) + "'");
    }
  }
  c.validate();
  return c;
}

std::string LogicConfig::name() const {
  std::string out;
  LogicConfig rest = *this;
  if (partial_determinism && cancellativity && disjointness && heap) {
    out = "separata+";
    rest.partial_determinism = rest.cancellativity = rest.disjointness = rest.heap = false;
  } else if (partial_determinism && cancellativity) {
    out = "pasl";
    rest.partial_determinism = rest.cancellativity = false;
  } else {
    out = "bbi";
  }
  bool need_plus = out.back() != '+';
  auto add = [&](bool on, const char* flag) {
    if (!on) return;
    if (need_plus) out += '+';
    out += flag;
    need_plus = true;
  };
  add(rest.partial_determinism, "p");
  add(rest.cancellativity, "c");
  add(rest.indivisible_unit, "iu");
  add(rest.disjointness, "d");
  add(rest.splittability, "s");
  add(rest.cross_split, "cs");
  add(rest.heap, "heap");
  return out;
}

void LogicConfig::validate() const {
  if (heap && !disjointness) throw ConfigError("the heap extension requires disjointness (d)");
  if (heap && (splittability || cross_split))
    throw ConfigError("the heap extension cannot be combined with splittability or cross-split");
}

const char* rule_name(RuleId r) { return kNames[static_cast<int>(r)]; }

std::optional<RuleId> rule_from_name(std::string_view name) {
  for (int i = 0; i < kRuleCount; ++i)
    if (name == kNames[i]) return static_cast<RuleId>(i);
  return std::nullopt;
}

int rule_arity(RuleId r) {
  switch (r) {
    case RuleId::Id:
    case RuleId::BotL:
    case RuleId::TopR:
    case RuleId::EmpR:
    case RuleId::NeqL:
    case RuleId::MapstoL1:
    case RuleId::EqExprR:
      return 0;
    case RuleId::AndR:
    case RuleId::OrL:
    case RuleId::ImpL:
    case RuleId::StarR:
    case RuleId::WandL:
    case RuleId::EM:
    case RuleId::MapstoL2:
      return 2;
    default:
      return 1;
  }
}

bool rule_enabled(RuleId r, const LogicConfig& cfg) {
  switch (r) {
    case RuleId::P:
      return cfg.partial_determinism;
    case RuleId::C:
      return cfg.cancellativity;
    case RuleId::IU:
      return cfg.indivisible_unit;
    case RuleId::D:
      return cfg.disjointness;
    case RuleId::S:
    case RuleId::NeqL:
    case RuleId::EM:
      return cfg.splittability;
    case RuleId::CS:
    case RuleId::CS_C:
      return cfg.cross_split;
    case RuleId::MapstoL1:
    case RuleId::MapstoL2:
    case RuleId::MapstoL3:
    case RuleId::MapstoL4:
    case RuleId::EqExprL:
    case RuleId::EqExprR:
    case RuleId::ExistsL:
    case RuleId::ExistsR:
      return cfg.heap;
    default:
      return true;
  }
}

}  // namespace separata
