#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace separata {

// Interned identifier (proposition names, store variables, bound variables).
class Symbol {
 public:
  Symbol() = default;
  static Symbol intern(std::string_view name);
  static Symbol from_id(std::uint32_t id) { return Symbol(id); }

  std::uint32_t id() const { return id_; }
  const std::string& name() const;

  friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
  friend auto operator<=>(Symbol a, Symbol b) { return a.id_ <=> b.id_; }

 private:
  explicit Symbol(std::uint32_t id) : id_(id) {}
  std::uint32_t id_ = 0;
};

// Store variable. There is no arithmetic: an expression is a variable and
// nothing else.
struct Expr {
  Symbol var;

  static Expr named(std::string_view name) { return Expr{Symbol::intern(name)}; }
  const std::string& name() const { return var.name(); }

  friend bool operator==(Expr a, Expr b) { return a.var == b.var; }
  friend auto operator<=>(Expr a, Expr b) { return a.var <=> b.var; }
};

enum class Connective : std::uint8_t {
  Prop,
  Top,
  Bot,
  Not,
  And,
  Or,
  Imp,
  Emp,
  Star,
  Wand,
  PointsTo,
  ExprEq,
  Exists,
};

namespace detail {
struct FormulaNode;
}

// Hash-consed immutable formula. Two formulas are structurally equal iff they
// share the same node, so equality and hashing are O(1). Nodes are never
// freed; the interning table is safe to use from several threads.
class Formula {
 public:
  Formula();  // Top

  static Formula prop(std::string_view name);
  static Formula prop(Symbol name);
  static Formula top();
  static Formula bot();
  static Formula emp();
  static Formula negation(Formula f);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  static Formula imp(Formula a, Formula b);
  static Formula star(Formula a, Formula b);
  static Formula wand(Formula a, Formula b);
  static Formula points_to(Expr address, Expr value);
  static Formula expr_eq(Expr a, Expr b);
  static Formula exists(Symbol var, Formula body);

  Connective kind() const;
  // Operand of Not / Exists, or left operand of a binary connective.
  Formula lhs() const;
  Formula rhs() const;
  Formula operand() const { return lhs(); }
  Formula body() const { return lhs(); }
  // Proposition name, or the bound variable of Exists.
  Symbol symbol() const;
  Expr left_expr() const;
  Expr right_expr() const;

  // Node count.
  std::size_t size() const;
  // Interning order; deterministic for a single-threaded construction order.
  std::uint32_t id() const;

  bool is_binary() const;
  bool is_heap_atom() const {
    return kind() == Connective::PointsTo || kind() == Connective::ExprEq;
  }
  bool mentions_heap() const;

  friend bool operator==(Formula a, Formula b) { return a.node_ == b.node_; }

 private:
  explicit Formula(const detail::FormulaNode* n) : node_(n) {}
  static Formula make(Connective k, std::uint32_t sym, std::uint32_t e1,
                      std::uint32_t e2, const detail::FormulaNode* l,
                      const detail::FormulaNode* r);

  const detail::FormulaNode* node_;
};

// ¬(a −∗ ¬b)
Formula septraction(Formula a, Formula b);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at position " + std::to_string(pos)),
        position_(pos) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

Formula parse(std::string_view text);
std::string print(Formula f);

// Propositions occurring in f, in first-occurrence order.
std::vector<Symbol> propositions(Formula f);
// Free store variables of f, in first-occurrence order.
std::vector<Expr> free_exprs(Formula f);
// Every store-variable name occurring in f, bound or free.
void collect_expr_names(Formula f, std::vector<Symbol>& out);

// Capture-avoiding replacement of the free store variable `from` by `to`.
Formula substitute_expr(Formula f, Expr from, Expr to);

}  // namespace separata

template <>
struct std::hash<separata::Formula> {
  std::size_t operator()(separata::Formula f) const noexcept {
    return std::hash<std::uint32_t>{}(f.id());
  }
};

template <>
struct std::hash<separata::Expr> {
  std::size_t operator()(separata::Expr e) const noexcept {
    return std::hash<std::uint32_t>{}(e.var.id());
  }
};
