#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "separata/calculus.hpp"

namespace separata {

using nlohmann::json;

namespace {

json label_json(Label l) { return to_string(l); }

Label label_from(const json& j) {
  auto l = parse_label(j.get<std::string>());
  if (!l) throw std::runtime_error("bad label '" + j.get<std::string>() + "'");
  return *l;
}

json rel_json(const RelAtom& r) { return json::array({label_json(r.left), label_json(r.right), label_json(r.target)}); }
RelAtom rel_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("relational atom needs three labels");
  return {label_from(j[0]), label_from(j[1]), label_from(j[2])};
}
json ineq_json(const Ineq& q) { return json::array({label_json(q.left), label_json(q.right)}); }
Ineq ineq_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::runtime_error("inequality needs two labels");
  return {label_from(j[0]), label_from(j[1])};
}
json lf_json(const LabelledFormula& lf) { return json::array({label_json(lf.label), print(lf.formula)}); }
LabelledFormula lf_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::runtime_error("labelled formula needs label and formula");
  return {label_from(j[0]), parse(j[1].get<std::string>())};
}

json sequent_json(const Sequent& s) {
  json out = {{"rel", json::array()}, {"ineq", json::array()}, {"gamma", json::array()}, {"delta", json::array()}};
  for (const auto& e : s.rel()) out["rel"].push_back(rel_json(e.atom));
  for (const auto& e : s.ineq()) out["ineq"].push_back(ineq_json(e.ineq));
  for (const auto& e : s.gamma()) out["gamma"].push_back(lf_json(e.lf));
  for (const auto& e : s.delta()) out["delta"].push_back(lf_json(e.lf));
  return out;
}

Sequent sequent_from(const json& j) {
  Sequent s;
  for (const auto& r : j.value("rel", json::array())) s.add_rel(rel_from(r));
  for (const auto& q : j.value("ineq", json::array())) s.add_ineq(ineq_from(q));
  for (const auto& f : j.value("gamma", json::array())) s.add_formula(Side::Left, lf_from(f), Placement::Back);
  for (const auto& f : j.value("delta", json::array())) s.add_formula(Side::Right, lf_from(f), Placement::Back);
  return s;
}

json instance_json(const RuleInstance& inst) {
  json j = {{"rule", rule_name(inst.rule)}};
  if (!inst.formulae.empty()) {
    json a = json::array();
    for (const auto& pf : inst.formulae)
      a.push_back({{"side", pf.side == Side::Left ? "L" : "R"},
                   {"label", label_json(pf.lf.label)},
                   {"formula", print(pf.lf.formula)}});
    j["formulae"] = a;
  }
  if (!inst.rels.empty()) {
    j["rels"] = json::array();
    for (const auto& r : inst.rels) j["rels"].push_back(rel_json(r));
  }
  if (!inst.ineqs.empty()) {
    j["ineqs"] = json::array();
    for (const auto& q : inst.ineqs) j["ineqs"].push_back(ineq_json(q));
  }
  auto labels = [](const std::vector<Label>& v) {
    json a = json::array();
    for (Label l : v) a.push_back(label_json(l));
    return a;
  };
  if (!inst.fresh.empty()) j["fresh"] = labels(inst.fresh);
  if (!inst.params.empty()) j["params"] = labels(inst.params);
  if (!inst.subst.empty()) {
    j["subst"] = json::array();
    for (const auto& th : inst.subst) j["subst"].push_back({label_json(th.from), label_json(th.to)});
  }
  if (!inst.expr_subst.empty()) {
    j["expr_subst"] = json::array();
    for (const auto& [from, to] : inst.expr_subst) j["expr_subst"].push_back({from.name(), to.name()});
  }
  if (inst.witness) j["witness"] = inst.witness->name();
  return j;
}

RuleInstance instance_from(const json& j) {
  RuleInstance inst;
  auto r = rule_from_name(j.at("rule").get<std::string>());
  if (!r) throw std::runtime_error("unknown rule '" + j.at("rule").get<std::string>() + "'");
  inst.rule = *r;
  for (const auto& f : j.value("formulae", json::array())) {
    std::string side = f.at("side").get<std::string>();
    if (side != "L" && side != "R") throw std::runtime_error("side must be L or R");
    inst.formulae.push_back({side == "L" ? Side::Left : Side::Right,
                             {label_from(f.at("label")), parse(f.at("formula").get<std::string>())}});
  }
  for (const auto& x : j.value("rels", json::array())) inst.rels.push_back(rel_from(x));
  for (const auto& x : j.value("ineqs", json::array())) inst.ineqs.push_back(ineq_from(x));
  for (const auto& x : j.value("fresh", json::array())) inst.fresh.push_back(label_from(x));
  for (const auto& x : j.value("params", json::array())) inst.params.push_back(label_from(x));
  for (const auto& x : j.value("subst", json::array()))
    inst.subst.push_back({label_from(x.at(0)), label_from(x.at(1))});
  for (const auto& x : j.value("expr_subst", json::array()))
    inst.expr_subst.emplace_back(Expr::named(x.at(0).get<std::string>()),
                                 Expr::named(x.at(1).get<std::string>()));
  if (j.contains("witness")) inst.witness = Expr::named(j["witness"].get<std::string>());
  return inst;
}

}  // namespace

// Nodes are stored as a flat table in depth-first order; "premises" holds
// indices into it. Long proofs are thousands of nodes deep, which a nested
// encoding would turn into equally deep recursion in any JSON library.
std::string to_json(const Derivation& d, const LogicConfig& cfg) {
  json nodes = json::array();
  std::unordered_map<const Derivation*, std::size_t> index;
  std::vector<const Derivation*> order;
  std::vector<const Derivation*> stack{&d};
  while (!stack.empty()) {
    const Derivation* n = stack.back();
    stack.pop_back();
    if (index.count(n)) continue;
    index.emplace(n, order.size());
    order.push_back(n);
    for (auto it = n->premises.rbegin(); it != n->premises.rend(); ++it)
      if (*it) stack.push_back(it->get());
  }
  for (const Derivation* n : order) {
    json j = n->instance ? instance_json(*n->instance) : json{{"open", true}};
    json prem = json::array();
    for (const auto& p : n->premises) prem.push_back(index.at(p.get()));
    j["premises"] = prem;
    nodes.push_back(std::move(j));
  }
  json root = {{"logic", cfg.name()}, {"root", 0}, {"nodes", std::move(nodes)}};
  if (d.conclusion) root["conclusion"] = sequent_json(*d.conclusion);
  return root.dump(1);
}

std::pair<DerivationPtr, LogicConfig> from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed proof JSON: ") + e.what());
  }
  try {
    LogicConfig cfg = LogicConfig::parse(j.at("logic").get<std::string>());
    const json& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.empty()) throw std::runtime_error("proof has no nodes");
    const std::size_t n = nodes.size();
    std::vector<std::shared_ptr<Derivation>> built(n);
    for (std::size_t i = 0; i < n; ++i) built[i] = std::make_shared<Derivation>();
    // Children must come after their parents, which rules out cycles.
    for (std::size_t i = 0; i < n; ++i) {
      const json& nj = nodes[i];
      if (!nj.value("open", false)) built[i]->instance = instance_from(nj);
      for (const auto& p : nj.value("premises", json::array())) {
        std::size_t k = p.get<std::size_t>();
        if (k <= i || k >= n) throw std::runtime_error("premise index out of order");
        built[i]->premises.push_back(built[k]);
      }
    }
    std::size_t root = j.value("root", std::size_t{0});
    if (root != 0) throw std::runtime_error("root must be node 0");
    if (j.contains("conclusion")) built[0]->conclusion = sequent_from(j["conclusion"]);
    return {built[0], cfg};
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed proof JSON: ") + e.what());
  } catch (const ParseError& e) {
    throw std::runtime_error(std::string("malformed formula in proof: ") + e.what());
  }
}

std::string to_text(const Derivation& d, const LogicConfig& cfg) {
  std::string out;
  struct Item {
    const Derivation* node;
    std::optional<Sequent> seq;
    std::size_t indent;
  };
  std::vector<Item> stack{{&d, d.conclusion, 0}};
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    std::string pad(it.indent, ' ');
    const Derivation& n = *it.node;
    out += pad + (n.instance ? to_string(*n.instance) : std::string("open")) + "\n";
    if (it.seq) out += pad + "  " + to_string(*it.seq) + "\n";
    // Single-premise chains stay at one depth; branches indent.
    std::size_t child_indent = n.premises.size() > 1 ? it.indent + 2 : it.indent;
    for (int i = static_cast<int>(n.premises.size()) - 1; i >= 0; --i) {
      std::optional<Sequent> ps;
      if (it.seq && n.instance) {
        try {
          Sequent p = *it.seq;
          apply_premise(p, *n.instance, i, cfg);
          ps = std::move(p);
        } catch (const std::exception&) {
        }
      }
      stack.push_back({n.premises[i].get(), std::move(ps), child_indent});
    }
  }
  return out;
}

}  // namespace separata
