#include "separata/corpus.hpp"

#include <fstream>
#include <sstream>

#include "separata/formula.hpp"

namespace separata {

const char* to_string(Expected e) {
  switch (e) {
    case Expected::Valid:
      return "Valid";
    case Expected::NotValid:
      return "NotValid";
    case Expected::NotProvedKnown:
      return "NotProvedKnown";
  }
  return "?";
}

std::optional<Expected> parse_expected(std::string_view s) {
  if (s == "Valid") return Expected::Valid;
  if (s == "NotValid") return Expected::NotValid;
  if (s == "NotProvedKnown") return Expected::NotProvedKnown;
  return std::nullopt;
}

std::vector<CorpusEntry> parse_corpus(const std::string& text) {
  std::vector<CorpusEntry> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
      auto tab = line.find('\t', pos);
      if (tab == std::string::npos) throw CorpusError("line " + std::to_string(lineno) + ": expected 4 tab-separated fields");
      cols.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    auto tab = line.find('\t', pos);
    cols.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
    CorpusEntry e;
    if (tab != std::string::npos) {
      std::string ref = line.substr(tab + 1);
      try {
        std::size_t used = 0;
        e.reference_seconds = std::stod(ref, &used);
        if (used != ref.size()) throw std::invalid_argument(ref);
      } catch (const std::exception&) {
        throw CorpusError("line " + std::to_string(lineno) + ": bad reference time '" + ref + "'");
      }
    }
    e.id = cols[0];
    e.cfg = cols[1];
    e.formula = cols[3];
    e.line = lineno;
    auto ex = parse_expected(cols[2]);
    if (!ex) throw CorpusError("line " + std::to_string(lineno) + ": unknown expectation '" + cols[2] + "'");
    e.expected = *ex;
    try {
      LogicConfig::parse(e.cfg);
      parse(e.formula);
    } catch (const std::exception& err) {
      throw CorpusError("line " + std::to_string(lineno) + ": " + err.what());
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<CorpusEntry> load_corpus(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CorpusError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_corpus(ss.str());
}

}  // namespace separata
