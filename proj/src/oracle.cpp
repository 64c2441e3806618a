#include "separata/oracle.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <unordered_map>

namespace separata {

namespace {

// R as a bitmask of targets per ordered pair.
struct Table {
  World n;
  std::vector<std::uint64_t> tgt;  // tgt[a*n+b]

  explicit Table(const FrameModel& m) : n(m.size), tgt(static_cast<std::size_t>(m.size) * m.size, 0) {
    for (const Triple& t : m.rel) tgt[t.a * n + t.b] |= 1ULL << t.c;
  }
  std::uint64_t at(World a, World b) const { return tgt[a * n + b]; }
  bool has(World a, World b, World c) const { return (at(a, b) >> c) & 1; }
};

// Formula flattened in post-order so a valuation sweep reuses one array.
struct Compiled {
  struct Node {
    Connective kind;
    int lhs = -1, rhs = -1;
    int prop = -1;
  };
  std::vector<Node> nodes;
  std::vector<std::string> props;

  explicit Compiled(Formula f) {
    std::unordered_map<std::uint32_t, int> seen;
    std::unordered_map<std::string, int> prop_index;
    build(f, seen, prop_index);
  }

  int build(Formula f, std::unordered_map<std::uint32_t, int>& seen,
            std::unordered_map<std::string, int>& prop_index) {
    if (auto it = seen.find(f.id()); it != seen.end()) return it->second;
    Node node{f.kind()};
    switch (f.kind()) {
      case Connective::Prop: {
        std::string name = f.symbol().name();
        auto [it, fresh] = prop_index.emplace(name, static_cast<int>(props.size()));
        if (fresh) props.push_back(name);
        node.prop = it->second;
        break;
      }
      case Connective::Top:
      case Connective::Bot:
      case Connective::Emp:
        break;
      case Connective::Not:
        node.lhs = build(f.operand(), seen, prop_index);
        break;
      case Connective::And:
      case Connective::Or:
      case Connective::Imp:
      case Connective::Star:
      case Connective::Wand:
        node.lhs = build(f.lhs(), seen, prop_index);
        node.rhs = build(f.rhs(), seen, prop_index);
        break;
      default:
        throw OracleError("the model checker covers heap-free formulas only: " + print(f));
    }
    nodes.push_back(node);
    int idx = static_cast<int>(nodes.size()) - 1;
    seen.emplace(f.id(), idx);
    return idx;
  }

  std::uint64_t run(const Table& t, World eps, std::uint64_t all, const std::vector<std::uint64_t>& val,
                    std::vector<std::uint64_t>& ext) const {
    ext.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Node& nd = nodes[i];
      std::uint64_t r = 0;
      switch (nd.kind) {
        case Connective::Prop:
          r = val[nd.prop];
          break;
        case Connective::Top:
          r = all;
          break;
        case Connective::Bot:
          r = 0;
          break;
        case Connective::Emp:
          r = 1ULL << eps;
          break;
        case Connective::Not:
          r = all & ~ext[nd.lhs];
          break;
        case Connective::And:
          r = ext[nd.lhs] & ext[nd.rhs];
          break;
        case Connective::Or:
          r = ext[nd.lhs] | ext[nd.rhs];
          break;
        case Connective::Imp:
          r = (all & ~ext[nd.lhs]) | ext[nd.rhs];
          break;
        case Connective::Star: {
          for (std::uint64_t as = ext[nd.lhs]; as; as &= as - 1) {
            World a = std::countr_zero(as);
            for (std::uint64_t bs = ext[nd.rhs]; bs; bs &= bs - 1) r |= t.at(a, std::countr_zero(bs));
          }
          break;
        }
        case Connective::Wand: {
          // h ⊩ A −∗ B iff every R(h, h1, h2) with h1 ⊩ A has h2 ⊩ B.
          std::uint64_t bad = all & ~ext[nd.rhs];
          for (World h = 0; h < t.n; ++h) {
            bool ok = true;
            for (std::uint64_t as = ext[nd.lhs]; as && ok; as &= as - 1)
              if (t.at(h, std::countr_zero(as)) & bad) ok = false;
            if (ok) r |= 1ULL << h;
          }
          break;
        }
        default:
          break;
      }
      ext[i] = r;
    }
    return ext.back();
  }
};

std::string triple_text(World a, World b, World c) {
  return "R(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
}

std::optional<std::string> violation(const FrameModel& m, const Table& t, const LogicConfig& cfg) {
  const World n = m.size, e = m.eps;
  for (World a = 0; a < n; ++a)
    for (World c = 0; c < n; ++c)
      if (t.has(a, e, c) != (a == c))
        return "identity fails at " + triple_text(a, e, c) + (a == c ? " (missing)" : " (present)");
  for (World a = 0; a < n; ++a)
    for (World b = 0; b < n; ++b)
      if (t.at(a, b) != t.at(b, a)) return "commutativity fails for worlds " + std::to_string(a) + "," + std::to_string(b);
  // R(x,y,k) ∧ R(k,z,w) ⇒ ∃k'. R(y,z,k') ∧ R(x,k',w)
  for (World x = 0; x < n; ++x)
    for (World y = 0; y < n; ++y)
      for (std::uint64_t ks = t.at(x, y); ks; ks &= ks - 1) {
        World k = std::countr_zero(ks);
        for (World z = 0; z < n; ++z)
          for (std::uint64_t ws = t.at(k, z); ws; ws &= ws - 1) {
            World w = std::countr_zero(ws);
            bool found = false;
            for (std::uint64_t k2 = t.at(y, z); k2 && !found; k2 &= k2 - 1)
              if (t.has(x, std::countr_zero(k2), w)) found = true;
            if (!found)
              return "associativity fails at " + triple_text(x, y, k) + ", " + triple_text(k, z, w);
          }
      }
  if (cfg.partial_determinism)
    for (World a = 0; a < n; ++a)
      for (World b = 0; b < n; ++b)
        if (std::popcount(t.at(a, b)) > 1)
          return "partial-determinism fails: several targets for " + std::to_string(a) + "," + std::to_string(b);
  if (cfg.cancellativity)
    for (World a = 0; a < n; ++a)
      for (World b = 0; b < n; ++b)
        for (World b2 = b + 1; b2 < n; ++b2)
          if (t.at(a, b) & t.at(a, b2))
            return "cancellativity fails: " + std::to_string(a) + " with " + std::to_string(b) + " and " +
                   std::to_string(b2) + " share a target";
  if (cfg.indivisible_unit)
    for (World a = 0; a < n; ++a)
      for (World b = 0; b < n; ++b)
        if (t.has(a, b, e) && a != e) return "indivisible unit fails at " + triple_text(a, b, e);
  if (cfg.disjointness)
    for (World a = 0; a < n; ++a)
      if (a != e && t.at(a, a)) {
        World c = std::countr_zero(t.at(a, a));
        return "disjointness fails at " + triple_text(a, a, c);
      }
  if (cfg.splittability)
    for (World c = 0; c < n; ++c) {
      if (c == e) continue;
      bool found = false;
      for (World a = 0; a < n && !found; ++a)
        for (World b = 0; b < n && !found; ++b)
          if (a != e && b != e && t.has(a, b, c)) found = true;
      if (!found) return "splittability fails at world " + std::to_string(c);
    }
  if (cfg.cross_split)
    for (World h0 = 0; h0 < n; ++h0)
      for (World h1 = 0; h1 < n; ++h1)
        for (World h2 = 0; h2 < n; ++h2) {
          if (!t.has(h1, h2, h0)) continue;
          for (World h3 = 0; h3 < n; ++h3)
            for (World h4 = 0; h4 < n; ++h4) {
              if (!t.has(h3, h4, h0)) continue;
              bool found = false;
              for (World p = 0; p < n && !found; ++p)
                for (World q = 0; q < n && !found; ++q) {
                  if (!t.has(p, q, h1)) continue;
                  for (World s = 0; s < n && !found; ++s) {
                    if (!t.has(p, s, h3)) continue;
                    for (World u = 0; u < n && !found; ++u)
                      if (t.has(s, u, h2) && t.has(q, u, h4)) found = true;
                  }
                }
              if (!found)
                return "cross-split fails at " + triple_text(h1, h2, h0) + ", " + triple_text(h3, h4, h0);
            }
        }
  return std::nullopt;
}

void check_world(const FrameModel& m, World h) {
  if (h >= m.size) throw OracleError("world " + std::to_string(h) + " out of range");
}

}  // namespace

bool FrameModel::holds(World a, World b, World c) const {
  return std::find(rel.begin(), rel.end(), Triple{a, b, c}) != rel.end();
}

std::uint64_t extension(const FrameModel& m, Formula f) {
  if (m.size == 0 || m.size > FrameModel::kMaxWorlds) throw OracleError("model size must be 1..64");
  Compiled c(f);
  std::vector<std::uint64_t> val;
  for (const auto& p : c.props) {
    auto it = m.valuation.find(p);
    val.push_back(it == m.valuation.end() ? 0 : it->second & m.all());
  }
  std::vector<std::uint64_t> ext;
  return c.run(Table(m), m.eps, m.all(), val, ext);
}

bool eval(const FrameModel& m, World h, Formula f) {
  check_world(m, h);
  return (extension(m, f) >> h) & 1;
}

std::optional<std::string> condition_violation(const FrameModel& m, const LogicConfig& cfg) {
  if (m.size == 0 || m.size > FrameModel::kMaxWorlds) return "model size must be 1..64";
  if (m.eps >= m.size) return "eps is not a world";
  for (const Triple& t : m.rel)
    if (t.a >= m.size || t.b >= m.size || t.c >= m.size) return "triple " + triple_text(t.a, t.b, t.c) + " out of range";
  return violation(m, Table(m), cfg);
}

bool check_conditions(const FrameModel& m, const LogicConfig& cfg) { return !condition_violation(m, cfg); }

std::vector<FrameModel> enumerate_frames(World n, const LogicConfig& cfg) {
  if (n == 0) return {};
  const bool functional = n == 4;
  if (n > 4) throw OracleError("frame enumeration is capped at 4 worlds");
  if (functional && !cfg.partial_determinism)
    throw OracleError("4-world frames are enumerated only for partial-deterministic logics");
  // Free choices: targets of unordered pairs of non-unit worlds.
  std::vector<std::pair<World, World>> pairs;
  for (World a = 1; a < n; ++a)
    for (World b = a; b < n; ++b) pairs.emplace_back(a, b);
  const std::uint64_t per = functional || cfg.partial_determinism ? n + 1 : (1ULL << n);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < pairs.size(); ++i) total *= per;

  std::vector<FrameModel> out;
  for (std::uint64_t code = 0; code < total; ++code) {
    FrameModel m;
    m.size = n;
    m.eps = 0;
    for (World a = 0; a < n; ++a) {
      m.rel.push_back({a, 0, a});
      if (a != 0) m.rel.push_back({0, a, a});
    }
    std::uint64_t rest = code;
    for (auto [a, b] : pairs) {
      std::uint64_t choice = rest % per;
      rest /= per;
      std::uint64_t mask = per == n + 1 ? (choice == 0 ? 0 : 1ULL << (choice - 1)) : choice;
      for (; mask; mask &= mask - 1) {
        World c = std::countr_zero(mask);
        m.rel.push_back({a, b, c});
        if (a != b) m.rel.push_back({b, a, c});
      }
    }
    std::sort(m.rel.begin(), m.rel.end());
    if (!violation(m, Table(m), cfg)) out.push_back(std::move(m));
  }
  return out;
}

std::optional<Countermodel> find_countermodel(Formula f, World max_n, const LogicConfig& cfg) {
  Compiled c(f);
  const std::size_t np = c.props.size();
  std::vector<std::uint64_t> val(np), ext;
  for (World n = 1; n <= max_n; ++n) {
    const std::uint64_t all = (1ULL << n) - 1;
    if (np * n >= 40) throw OracleError("too many valuations to enumerate");
    const std::uint64_t combos = 1ULL << (np * n);
    for (const FrameModel& frame : enumerate_frames(n, cfg)) {
      Table t(frame);
      for (std::uint64_t code = 0; code < combos; ++code) {
        for (std::size_t i = 0; i < np; ++i) val[i] = (code >> (i * n)) & all;
        std::uint64_t good = c.run(t, frame.eps, all, val, ext);
        if (good == all) continue;
        Countermodel cm{frame, static_cast<World>(std::countr_zero(all & ~good))};
        for (std::size_t i = 0; i < np; ++i) cm.model.valuation[c.props[i]] = val[i];
        return cm;
      }
    }
  }
  return std::nullopt;
}

std::string to_text(const FrameModel& m) {
  std::ostringstream o;
  o << "worlds " << m.size << "\neps " << m.eps << "\n";
  for (const Triple& t : m.rel) o << "R " << t.a << " " << t.b << " " << t.c << "\n";
  for (const auto& [p, mask] : m.valuation) {
    o << "val " << p;
    for (World w = 0; w < m.size; ++w)
      if ((mask >> w) & 1) o << " " << w;
    o << "\n";
  }
  return o.str();
}

FrameModel parse_model(const std::string& text) {
  FrameModel m;
  bool have_size = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) { throw OracleError("model line " + std::to_string(lineno) + ": " + msg); };
  auto world = [&](std::istringstream& ls) {
    long long w;
    if (!(ls >> w)) fail("expected a world number");
    if (!have_size) fail("'worlds' must come first");
    if (w < 0 || static_cast<unsigned long long>(w) >= m.size) fail("world " + std::to_string(w) + " out of range");
    return static_cast<World>(w);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "worlds") {
      long long n;
      if (!(ls >> n) || n < 1 || n > static_cast<long long>(FrameModel::kMaxWorlds)) fail("worlds must be 1..64");
      m.size = static_cast<World>(n);
      have_size = true;
    } else if (key == "eps") {
      m.eps = world(ls);
    } else if (key == "R") {
      Triple t{world(ls), world(ls), world(ls)};
      m.rel.push_back(t);
    } else if (key == "val") {
      std::string p;
      if (!(ls >> p)) fail("expected a proposition name");
      std::uint64_t mask = 0;
      std::string tok;
      while (ls >> tok) {
        std::istringstream ts(tok);
        mask |= 1ULL << world(ts);
      }
      m.valuation[p] |= mask;
      continue;
    } else {
      fail("unknown directive '" + key + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing text '" + extra + "'");
  }
  if (!have_size) throw OracleError("model has no 'worlds' line");
  std::sort(m.rel.begin(), m.rel.end());
  m.rel.erase(std::unique(m.rel.begin(), m.rel.end()), m.rel.end());
  return m;
}

}  // namespace separata
