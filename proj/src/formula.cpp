#include "separata/formula.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <unordered_map>

namespace separata {

namespace detail {

struct FormulaNode {
  Connective kind;
  std::uint32_t sym;  // Prop name / Exists variable
  std::uint32_t e1;   // PointsTo / ExprEq operands
  std::uint32_t e2;
  const FormulaNode* left;
  const FormulaNode* right;
  std::uint32_t id;
  std::uint32_t size;
  bool heap;
};

}  // namespace detail

namespace {

struct SymbolTable {
  std::mutex mu;
  std::deque<std::string> names;
  std::unordered_map<std::string, std::uint32_t> index;

  SymbolTable() {
    names.emplace_back("");
    index.emplace("", 0);
  }
};

SymbolTable& symbols() {
  static SymbolTable table;
  return table;
}

struct NodeKey {
  Connective kind;
  std::uint32_t sym, e1, e2;
  const detail::FormulaNode* left;
  const detail::FormulaNode* right;

  bool operator==(const NodeKey&) const = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const noexcept {
    std::size_t h = static_cast<std::size_t>(k.kind);
    auto mix = [&h](std::size_t v) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    mix(k.sym);
    mix(k.e1);
    mix(k.e2);
    mix(reinterpret_cast<std::uintptr_t>(k.left));
    mix(reinterpret_cast<std::uintptr_t>(k.right));
    return h;
  }
};

struct NodeTable {
  std::mutex mu;
  std::deque<detail::FormulaNode> nodes;
  std::unordered_map<NodeKey, const detail::FormulaNode*, NodeKeyHash> index;
};

NodeTable& node_table() {
  static NodeTable table;
  return table;
}

}  // namespace

Symbol Symbol::intern(std::string_view name) {
  auto& t = symbols();
  std::lock_guard lock(t.mu);
  auto it = t.index.find(std::string(name));
  if (it != t.index.end()) return Symbol(it->second);
  auto id = static_cast<std::uint32_t>(t.names.size());
  t.names.emplace_back(name);
  t.index.emplace(std::string(name), id);
  return Symbol(id);
}

const std::string& Symbol::name() const {
  auto& t = symbols();
  std::lock_guard lock(t.mu);
  return t.names[id_];
}

Formula Formula::make(Connective k, std::uint32_t sym, std::uint32_t e1,
                      std::uint32_t e2, const detail::FormulaNode* l,
                      const detail::FormulaNode* r) {
  auto& t = node_table();
  NodeKey key{k, sym, e1, e2, l, r};
  std::lock_guard lock(t.mu);
  auto it = t.index.find(key);
  if (it != t.index.end()) return Formula(it->second);
  std::uint32_t size = 1 + (l ? l->size : 0) + (r ? r->size : 0);
  bool heap = k == Connective::PointsTo || k == Connective::ExprEq ||
              k == Connective::Exists || (l && l->heap) || (r && r->heap);
  auto id = static_cast<std::uint32_t>(t.nodes.size());
  t.nodes.push_back(detail::FormulaNode{k, sym, e1, e2, l, r, id, size, heap});
  const detail::FormulaNode* node = &t.nodes.back();
  t.index.emplace(key, node);
  return Formula(node);
}

Formula::Formula() : Formula(top()) {}

Formula Formula::prop(std::string_view name) { return prop(Symbol::intern(name)); }
Formula Formula::prop(Symbol name) {
  return make(Connective::Prop, name.id(), 0, 0, nullptr, nullptr);
}
Formula Formula::top() { return make(Connective::Top, 0, 0, 0, nullptr, nullptr); }
Formula Formula::bot() { return make(Connective::Bot, 0, 0, 0, nullptr, nullptr); }
Formula Formula::emp() { return make(Connective::Emp, 0, 0, 0, nullptr, nullptr); }
Formula Formula::negation(Formula f) {
  return make(Connective::Not, 0, 0, 0, f.node_, nullptr);
}
Formula Formula::conj(Formula a, Formula b) {
  return make(Connective::And, 0, 0, 0, a.node_, b.node_);
}
Formula Formula::disj(Formula a, Formula b) {
  return make(Connective::Or, 0, 0, 0, a.node_, b.node_);
}
Formula Formula::imp(Formula a, Formula b) {
  return make(Connective::Imp, 0, 0, 0, a.node_, b.node_);
}
Formula Formula::star(Formula a, Formula b) {
  return make(Connective::Star, 0, 0, 0, a.node_, b.node_);
}
Formula Formula::wand(Formula a, Formula b) {
  return make(Connective::Wand, 0, 0, 0, a.node_, b.node_);
}
Formula Formula::points_to(Expr address, Expr value) {
  return make(Connective::PointsTo, 0, address.var.id(), value.var.id(), nullptr,
              nullptr);
}
Formula Formula::expr_eq(Expr a, Expr b) {
  return make(Connective::ExprEq, 0, a.var.id(), b.var.id(), nullptr, nullptr);
}
Formula Formula::exists(Symbol var, Formula body) {
  return make(Connective::Exists, var.id(), 0, 0, body.node_, nullptr);
}

Connective Formula::kind() const { return node_->kind; }
Formula Formula::lhs() const { return Formula(node_->left); }
Formula Formula::rhs() const { return Formula(node_->right); }

Symbol Formula::symbol() const { return Symbol::from_id(node_->sym); }
Expr Formula::left_expr() const { return Expr{Symbol::from_id(node_->e1)}; }
Expr Formula::right_expr() const { return Expr{Symbol::from_id(node_->e2)}; }

std::size_t Formula::size() const { return node_->size; }
std::uint32_t Formula::id() const { return node_->id; }
bool Formula::mentions_heap() const { return node_->heap; }

bool Formula::is_binary() const {
  switch (kind()) {
    case Connective::And:
    case Connective::Or:
    case Connective::Imp:
    case Connective::Star:
    case Connective::Wand:
      return true;
    default:
      return false;
  }
}

Formula septraction(Formula a, Formula b) {
  return Formula::negation(Formula::wand(a, Formula::negation(b)));
}

namespace {

// Higher binds tighter. Heap atoms and quantifiers print parenthesized
// whenever they are not the whole formula.
int precedence(Formula f) {
  switch (f.kind()) {
    case Connective::Imp:
      return 1;
    case Connective::Wand:
      return 2;
    case Connective::Or:
      return 3;
    case Connective::And:
      return 4;
    case Connective::Star:
      return 5;
    case Connective::Not:
      return 6;
    case Connective::PointsTo:
    case Connective::ExprEq:
    case Connective::Exists:
      return 0;
    default:
      return 7;
  }
}

bool right_assoc(Connective k) { return k == Connective::Imp || k == Connective::Wand; }

const char* infix(Connective k) {
  switch (k) {
    case Connective::And:
      return " /\\ ";
    case Connective::Or:
      return " \\/ ";
    case Connective::Imp:
      return " -> ";
    case Connective::Star:
      return " * ";
    case Connective::Wand:
      return " -* ";
    default:
      return "?";
  }
}

void print_into(Formula f, int required, std::string& out) {
  int p = precedence(f);
  bool parens = required > 0 && p < required;
  if (parens) out += '(';
  switch (f.kind()) {
    case Connective::Prop:
      out += f.symbol().name();
      break;
    case Connective::Top:
      out += "true";
      break;
    case Connective::Bot:
      out += "false";
      break;
    case Connective::Emp:
      out += "emp";
      break;
    case Connective::Not:
      out += '~';
      print_into(f.operand(), 6, out);
      break;
    case Connective::PointsTo:
      out += f.left_expr().name();
      out += " |-> ";
      out += f.right_expr().name();
      break;
    case Connective::ExprEq:
      out += f.left_expr().name();
      out += " = ";
      out += f.right_expr().name();
      break;
    case Connective::Exists: {
      out += "exists";
      Formula g = f;
      while (g.kind() == Connective::Exists) {
        out += ' ';
        out += g.symbol().name();
        g = g.body();
      }
      out += ". ";
      print_into(g, 0, out);
      break;
    }
    default: {
      bool ra = right_assoc(f.kind());
      print_into(f.lhs(), ra ? p + 1 : p, out);
      out += infix(f.kind());
      print_into(f.rhs(), ra ? p : p + 1, out);
      break;
    }
  }
  if (parens) out += ')';
}

bool occurs_free(Formula f, Expr e) {
  switch (f.kind()) {
    case Connective::PointsTo:
    case Connective::ExprEq:
      return f.left_expr() == e || f.right_expr() == e;
    case Connective::Exists:
      return f.symbol() != e.var && occurs_free(f.body(), e);
    case Connective::Not:
      return occurs_free(f.operand(), e);
    default:
      if (f.is_binary()) return occurs_free(f.lhs(), e) || occurs_free(f.rhs(), e);
      return false;
  }
}

}  // namespace

std::string print(Formula f) {
  std::string out;
  print_into(f, 0, out);
  return out;
}

std::vector<Symbol> propositions(Formula f) {
  std::vector<Symbol> out;
  std::vector<Formula> stack{f};
  // Pre-order, left to right.
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    if (g.kind() == Connective::Prop) {
      if (std::find(out.begin(), out.end(), g.symbol()) == out.end())
        out.push_back(g.symbol());
    } else if (g.is_binary()) {
      stack.push_back(g.rhs());
      stack.push_back(g.lhs());
    } else if (g.kind() == Connective::Not || g.kind() == Connective::Exists) {
      stack.push_back(g.operand());
    }
  }
  return out;
}

std::vector<Expr> free_exprs(Formula f) {
  std::vector<Expr> out;
  std::vector<Symbol> names;
  collect_expr_names(f, names);
  for (Symbol s : names)
    if (occurs_free(f, Expr{s})) out.push_back(Expr{s});
  return out;
}

void collect_expr_names(Formula f, std::vector<Symbol>& out) {
  auto add = [&out](Symbol s) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  };
  switch (f.kind()) {
    case Connective::PointsTo:
    case Connective::ExprEq:
      add(f.left_expr().var);
      add(f.right_expr().var);
      return;
    case Connective::Exists:
      add(f.symbol());
      collect_expr_names(f.body(), out);
      return;
    case Connective::Not:
      collect_expr_names(f.operand(), out);
      return;
    default:
      if (f.is_binary()) {
        collect_expr_names(f.lhs(), out);
        collect_expr_names(f.rhs(), out);
      }
  }
}

Formula substitute_expr(Formula f, Expr from, Expr to) {
  if (from == to || !f.mentions_heap()) return f;
  switch (f.kind()) {
    case Connective::PointsTo:
    case Connective::ExprEq: {
      Expr a = f.left_expr() == from ? to : f.left_expr();
      Expr b = f.right_expr() == from ? to : f.right_expr();
      return f.kind() == Connective::PointsTo ? Formula::points_to(a, b)
                                              : Formula::expr_eq(a, b);
    }
    case Connective::Exists: {
      if (f.symbol() == from.var || !occurs_free(f.body(), from)) return f;
      if (f.symbol() != to.var)
        return Formula::exists(f.symbol(), substitute_expr(f.body(), from, to));
      // The binder would capture `to`: rename it first.
      std::vector<Symbol> used;
      collect_expr_names(f.body(), used);
      used.push_back(from.var);
      used.push_back(to.var);
      const std::string& base = f.symbol().name();
      Symbol fresh;
      for (int i = 1;; ++i) {
        fresh = Symbol::intern(base + "_" + std::to_string(i));
        if (std::find(used.begin(), used.end(), fresh) == used.end()) break;
      }
      Formula renamed = substitute_expr(f.body(), Expr{f.symbol()}, Expr{fresh});
      return Formula::exists(fresh, substitute_expr(renamed, from, to));
    }
    case Connective::Not:
      return Formula::negation(substitute_expr(f.operand(), from, to));
    case Connective::And:
      return Formula::conj(substitute_expr(f.lhs(), from, to),
                           substitute_expr(f.rhs(), from, to));
    case Connective::Or:
      return Formula::disj(substitute_expr(f.lhs(), from, to),
                           substitute_expr(f.rhs(), from, to));
    case Connective::Imp:
      return Formula::imp(substitute_expr(f.lhs(), from, to),
                          substitute_expr(f.rhs(), from, to));
    case Connective::Star:
      return Formula::star(substitute_expr(f.lhs(), from, to),
                           substitute_expr(f.rhs(), from, to));
    case Connective::Wand:
      return Formula::wand(substitute_expr(f.lhs(), from, to),
                           substitute_expr(f.rhs(), from, to));
    default:
      return f;
  }
}

}  // namespace separata
