#include <cctype>
#include <sstream>

#include "charflow/errors.hpp"
#include "charflow/field_system.hpp"

namespace charflow {
namespace {

enum class Tok { Ident, Number, Plus, Minus, Star, Caret, LParen, RParen, Comma, EndStmt, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blanks();
      const std::size_t l = line_, c = col_;
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", l, c});
        return out;
      }
      const char ch = src_[pos_];
      if (ch == '\n' || ch == ';') {
        advance();
        out.push_back({Tok::EndStmt, ";", l, c});
      } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
        std::string id;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          id += advance();
        out.push_back({Tok::Ident, id, l, c});
      } else if (std::isdigit(static_cast<unsigned char>(ch))) {
        std::string num = digits();
        // p/q with no whitespace is a single rational literal.
        if (pos_ + 1 < src_.size() && src_[pos_] == '/' && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
          advance();
          num += "/" + digits();
        }
        out.push_back({Tok::Number, num, l, c});
      } else {
        Tok k;
        switch (ch) {
          case '+': k = Tok::Plus; break;
          case '-': k = Tok::Minus; break;
          case '*': k = Tok::Star; break;
          case '^': k = Tok::Caret; break;
          case '(': k = Tok::LParen; break;
          case ')': k = Tok::RParen; break;
          case ',': k = Tok::Comma; break;
          case '/': throw ParseError("division is not part of the polynomial grammar", l, c);
          default: throw ParseError(std::string("unexpected character '") + ch + "'", l, c);
        }
        advance();
        out.push_back({k, std::string(1, ch), l, c});
      }
    }
  }

 private:
  char advance() {
    const char ch = src_[pos_++];
    if (ch == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return ch;
  }

  void skip_blanks() {
    while (pos_ < src_.size()) {
      const char ch = src_[pos_];
      if (ch == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (ch == ' ' || ch == '\t' || ch == '\r') {
        advance();
      } else {
        break;
      }
    }
  }

  std::string digits() {
    std::string d;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) d += advance();
    return d;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  FieldSystem system() {
    std::vector<std::string> vars;
    std::vector<PolyVectorField> fields;
    bool have_vars = false;
    while (true) {
      skip_ends();
      const Token& t = peek();
      if (t.kind == Tok::End) break;
      if (t.kind != Tok::Ident) fail("expected 'vars' or 'field'");
      if (t.text == "vars") {
        if (have_vars) fail("variables declared twice");
        next();
        vars = ident_list();
        have_vars = true;
        vars_ = vars;
      } else if (t.text == "field") {
        if (!have_vars) fail("'field' before 'vars'");
        const Token start = next();
        std::vector<Poly> comps;
        comps.push_back(expr());
        while (peek().kind == Tok::Comma) {
          next();
          comps.push_back(expr());
        }
        if (comps.size() != vars.size())
          throw ParseError("field has " + std::to_string(comps.size()) + " components but " +
                               std::to_string(vars.size()) + " variables are declared",
                           start.line, start.column);
        fields.emplace_back(std::move(comps));
      } else {
        fail("expected 'vars' or 'field', found '" + t.text + "'");
      }
      expect_end();
    }
    if (!have_vars) throw ParseError("missing 'vars' declaration", 1, 1);
    if (fields.empty()) throw ParseError("no 'field' declared", peek().line, peek().column);
    return FieldSystem(std::move(vars), std::move(fields));
  }

  Poly single(const std::vector<std::string>& vars) {
    vars_ = vars;
    skip_ends();
    Poly p = expr();
    skip_ends();
    if (peek().kind != Tok::End) fail("unexpected trailing input");
    return p;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, peek().column); }

  void skip_ends() {
    while (peek().kind == Tok::EndStmt) next();
  }
  void expect_end() {
    if (peek().kind != Tok::EndStmt && peek().kind != Tok::End) fail("expected ';' or end of line");
  }

  std::vector<std::string> ident_list() {
    std::vector<std::string> out;
    do {
      if (!out.empty()) next();
      if (peek().kind != Tok::Ident) fail("expected variable name");
      const Token t = next();
      if (t.text == "vars" || t.text == "field") throw ParseError("reserved word used as variable", t.line, t.column);
      for (const auto& v : out)
        if (v == t.text) throw ParseError("duplicate variable '" + t.text + "'", t.line, t.column);
      out.push_back(t.text);
    } while (peek().kind == Tok::Comma);
    if (out.size() > kMaxVars) fail("at most " + std::to_string(kMaxVars) + " variables are supported");
    return out;
  }

  std::size_t n() const { return vars_.size(); }

  Poly expr() {
    Poly acc = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const bool minus = next().kind == Tok::Minus;
      Poly rhs = term();
      if (minus)
        acc -= rhs;
      else
        acc += rhs;
    }
    return acc;
  }

  Poly term() {
    Poly acc = unary();
    while (peek().kind == Tok::Star) {
      next();
      acc = acc * unary();
    }
    return acc;
  }

  Poly unary() {
    if (peek().kind == Tok::Minus) {
      next();
      return -unary();
    }
    if (peek().kind == Tok::Plus) {
      next();
      return unary();
    }
    return power();
  }

  Poly power() {
    Poly base = primary();
    if (peek().kind != Tok::Caret) return base;
    next();
    if (peek().kind != Tok::Number || peek().text.find('/') != std::string::npos)
      fail("exponent must be a non-negative integer literal");
    const Token t = next();
    if (t.text.size() > 4) throw ParseError("exponent too large", t.line, t.column);
    const int e = std::stoi(t.text);
    Poly out = Poly::constant(n(), 1);
    for (int i = 0; i < e; ++i) out = out * base;
    return out;
  }

  Poly primary() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::Number:
        next();
        return Poly::constant(n(), parse_rational(t.text));
      case Tok::Ident: {
        next();
        for (std::size_t i = 0; i < n(); ++i)
          if (vars_[i] == t.text) return Poly::variable(n(), i);
        throw ParseError("unknown variable '" + t.text + "'", t.line, t.column);
      }
      case Tok::LParen: {
        next();
        Poly inner = expr();
        if (peek().kind != Tok::RParen) fail("expected ')'");
        next();
        return inner;
      }
      default:
        fail(t.kind == Tok::End || t.kind == Tok::EndStmt ? "unexpected end of expression"
                                                            : "unexpected token '" + t.text + "'");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> vars_;
};

}  // namespace

FieldSystem parse_field_system(std::string_view text) { return Parser(Lexer(text).run()).system(); }

Poly parse_poly(std::string_view text, const std::vector<std::string>& variables) {
  if (variables.empty() || variables.size() > kMaxVars) throw DimensionMismatch("bad variable list");
  return Parser(Lexer(text).run()).single(variables);
}

std::string format_field(const PolyVectorField& X, const std::vector<std::string>& variables) {
  std::string s;
  for (std::size_t k = 0; k < X.dimension(); ++k) {
    if (k) s += ", ";
    s += X[k].to_string(variables);
  }
  return s;
}

std::string format_field_system(const FieldSystem& sys) {
  std::ostringstream os;
  os << "vars ";
  for (std::size_t i = 0; i < sys.dimension(); ++i) os << (i ? ", " : "") << sys.variables()[i];
  os << ";\n";
  for (const auto& X : sys.fields()) os << "field " << format_field(X, sys.variables()) << ";\n";
  return os.str();
}

}  // namespace charflow
