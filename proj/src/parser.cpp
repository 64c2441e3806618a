#include <cctype>
#include <string>
#include <vector>

#include "separata/formula.hpp"

namespace separata {

namespace {

enum class Tok {
  Ident,
  True,
  False,
  Emp,
  Exists,
  Not,
  And,
  Or,
  Imp,
  Star,
  Wand,
  MapsTo,
  Eq,
  LParen,
  RParen,
  Dot,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

bool starts_with(std::string_view s, std::size_t i, std::string_view prefix) {
  return s.substr(i, prefix.size()) == prefix;
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  // Multi-byte spellings first so that e.g. "-*" wins over "-".
  static const std::pair<std::string_view, Tok> kSymbols[] = {
      {"\xE2\x8A\xA4*", Tok::Emp},            // ⊤*
      {"\xE2\x8A\xA4\xE2\x88\x97", Tok::Emp},  // ⊤∗
      {"\xE2\x8A\xA4", Tok::True},            // ⊤
      {"\xE2\x8A\xA5", Tok::False},           // ⊥
      {"\xC2\xAC", Tok::Not},                 // ¬
      {"\xE2\x88\xA7", Tok::And},             // ∧
      {"\xE2\x88\xA8", Tok::Or},              // ∨
      {"\xE2\x86\x92", Tok::Imp},             // →
      {"\xE2\x88\x92\xE2\x88\x97", Tok::Wand},  // −∗
      {"-\xE2\x88\x97", Tok::Wand},           // -∗
      {"\xE2\x88\x97", Tok::Star},            // ∗
      {"\xE2\x86\xA6", Tok::MapsTo},          // ↦
      {"\xE2\x88\x83", Tok::Exists},          // ∃
      {"|->", Tok::MapsTo},
      {"->", Tok::Imp},
      {"-*", Tok::Wand},
      {"/\\", Tok::And},
      {"\\/", Tok::Or},
      {"~", Tok::Not},
      {"*", Tok::Star},
      {"=", Tok::Eq},
      {"(", Tok::LParen},
      {")", Tok::RParen},
      {".", Tok::Dot},
  };
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (std::islower(c)) {
      std::size_t j = i + 1;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
        ++j;
      std::string word(s.substr(i, j - i));
      Tok k = Tok::Ident;
      if (word == "true") k = Tok::True;
      else if (word == "false") k = Tok::False;
      else if (word == "emp") k = Tok::Emp;
      else if (word == "exists") k = Tok::Exists;
      out.push_back({k, word, i});
      i = j;
      continue;
    }
    bool matched = false;
    for (const auto& [spelling, kind] : kSymbols) {
      if (starts_with(s, i, spelling)) {
        out.push_back({kind, std::string(spelling), i});
        i += spelling.size();
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError("unexpected character '" + std::string(1, s[i]) + "'", i);
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Formula parse_all() {
    Formula f = formula();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().pos);
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(std::string("expected ") + what);
  }

  // formula := wand | wand "->" formula
  Formula formula() {
    Formula lhs = wand();
    if (accept(Tok::Imp)) return Formula::imp(lhs, formula());
    return lhs;
  }

  // wand := or | or "-*" wand
  Formula wand() {
    Formula lhs = disj();
    if (accept(Tok::Wand)) return Formula::wand(lhs, wand());
    return lhs;
  }

  Formula disj() {
    Formula f = conj();
    while (accept(Tok::Or)) f = Formula::disj(f, conj());
    return f;
  }

  Formula conj() {
    Formula f = star();
    while (accept(Tok::And)) f = Formula::conj(f, star());
    return f;
  }

  Formula star() {
    Formula f = unary();
    while (accept(Tok::Star)) f = Formula::star(f, unary());
    return f;
  }

  Formula unary() {
    if (accept(Tok::Not)) return Formula::negation(unary());
    return atom();
  }

  Expr expr() {
    if (peek().kind != Tok::Ident) fail("expected store variable");
    return Expr::named(toks_[pos_++].text);
  }

  Formula atom() {
    switch (peek().kind) {
      case Tok::True:
        ++pos_;
        return Formula::top();
      case Tok::False:
        ++pos_;
        return Formula::bot();
      case Tok::Emp:
        ++pos_;
        return Formula::emp();
      case Tok::LParen: {
        ++pos_;
        Formula f = formula();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::Exists: {
        ++pos_;
        std::vector<Symbol> vars;
        while (peek().kind == Tok::Ident) vars.push_back(Symbol::intern(toks_[pos_++].text));
        if (vars.empty()) fail("expected bound variable");
        expect(Tok::Dot, "'.'");
        Formula body = formula();
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = Formula::exists(*it, body);
        return body;
      }
      case Tok::Ident: {
        if (peek(1).kind == Tok::MapsTo) {
          Expr a = expr();
          ++pos_;
          return Formula::points_to(a, expr());
        }
        if (peek(1).kind == Tok::Eq) {
          Expr a = expr();
          ++pos_;
          return Formula::expr_eq(a, expr());
        }
        return Formula::prop(toks_[pos_++].text);
      }
      case Tok::End:
        fail("unexpected end of input");
      default:
        fail("unexpected '" + peek().text + "'");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse(std::string_view text) { return Parser(lex(text)).parse_all(); }

}  // namespace separata
