#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "separata/logic.hpp"

namespace separata {

enum class Expected { Valid, NotValid, NotProvedKnown };

const char* to_string(Expected e);
std::optional<Expected> parse_expected(std::string_view s);

struct CorpusEntry {
  std::string id;
  std::string cfg;  // preset as written
  Expected expected = Expected::Valid;
  std::string formula;
  std::optional<double> reference_seconds;  // informational, never asserted
  int line = 0;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lines are id<TAB>cfg<TAB>expected<TAB>formula, optionally followed by
// <TAB>reference seconds; blank lines and lines
// starting with '#' are skipped. Formulas and presets are validated.
std::vector<CorpusEntry> parse_corpus(const std::string& text);
std::vector<CorpusEntry> load_corpus(const std::string& path);

}  // namespace separata
