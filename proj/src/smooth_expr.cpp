#include "charflow/smooth_expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "charflow/errors.hpp"

namespace charflow {

double flat2(double u) {
  if (std::abs(u) < kFlatThreshold) return 0.0;
  return std::exp(-1.0 / (u * u));
}

double flatabs(double u) {
  if (std::abs(u) < kFlatThreshold) return 0.0;
  return std::exp(-1.0 / std::abs(u));
}

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Flat2, FlatAbs };

struct SmoothExpr::Node {
  Op op;
  double value = 0.0;  // Const
  long index = 0;      // Var: variable index; Pow: exponent
  std::size_t a = 0, b = 0;
};

namespace {

using Node = SmoothExpr::Node;

class ExprParser {
 public:
  ExprParser(std::string_view text, const std::vector<std::string>& vars) : text_(text), vars_(vars) {}

  std::size_t parse_all(std::vector<Node>& out) {
    nodes_ = &out;
    skip();
    if (pos_ >= text_.size()) fail("empty expression");
    const std::size_t root = expr();
    skip();
    if (pos_ < text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return root;
  }

 private:
  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::vector<Node>* nodes_ = nullptr;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 1, pos_ + 1); }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::size_t push(Node n) {
    nodes_->push_back(n);
    return nodes_->size() - 1;
  }

  std::size_t expr() {
    std::size_t left = term();
    while (true) {
      if (accept('+')) left = push({Op::Add, 0, 0, left, term()});
      else if (accept('-')) left = push({Op::Sub, 0, 0, left, term()});
      else return left;
    }
  }
  std::size_t term() {
    std::size_t left = unary();
    while (true) {
      if (accept('*')) left = push({Op::Mul, 0, 0, left, unary()});
      else if (accept('/')) left = push({Op::Div, 0, 0, left, unary()});
      else return left;
    }
  }
  std::size_t unary() {
    if (accept('-')) return push({Op::Neg, 0, 0, unary(), 0});
    if (accept('+')) return unary();
    return power();
  }
  std::size_t power() {
    const std::size_t base = atom();
    if (!accept('^')) return base;
    skip();
    bool neg = accept('-');
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_ || pos_ - start > 4) fail("exponent must be an integer literal");
    long e = std::stol(std::string(text_.substr(start, pos_ - start)));
    return push({Op::Pow, 0, neg ? -e : e, base, 0});
  }
  std::size_t atom() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const std::size_t inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(text_.substr(pos_));
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(rest, &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos_ += used;
      return push({Op::Const, v, 0, 0, 0});
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string name(text_.substr(start, pos_ - start));
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == name) return push({Op::Var, 0, static_cast<long>(i), 0, 0});
      if (name == "pi") return push({Op::Const, std::numbers::pi, 0, 0, 0});
      std::optional<Op> fn;
      if (name == "sin") fn = Op::Sin;
      else if (name == "cos") fn = Op::Cos;
      else if (name == "exp") fn = Op::Exp;
      else if (name == "flat2") fn = Op::Flat2;
      else if (name == "flatabs") fn = Op::FlatAbs;
      if (!fn) {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      if (!accept('(')) fail("expected '(' after " + name);
      const std::size_t arg = expr();
      if (!accept(')')) fail("expected ')'");
      return push({*fn, 0, 0, arg, 0});
    }
    fail(std::string("unexpected '") + c + "'");
  }
};

double eval_node(const std::vector<Node>& nodes, std::size_t i, std::span<const double> x, bool in_flat) {
  const Node& n = nodes[i];
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return x[static_cast<std::size_t>(n.index)];
    case Op::Neg: return -eval_node(nodes, n.a, x, in_flat);
    case Op::Add: return eval_node(nodes, n.a, x, in_flat) + eval_node(nodes, n.b, x, in_flat);
    case Op::Sub: return eval_node(nodes, n.a, x, in_flat) - eval_node(nodes, n.b, x, in_flat);
    case Op::Mul: return eval_node(nodes, n.a, x, in_flat) * eval_node(nodes, n.b, x, in_flat);
    case Op::Div: {
      const double num = eval_node(nodes, n.a, x, in_flat);
      const double den = eval_node(nodes, n.b, x, in_flat);
      if (den == 0.0) {
        if (!in_flat || num == 0.0) throw EvalError("division by zero");
        return std::copysign(INFINITY, num);
      }
      return num / den;
    }
    case Op::Pow: {
      const double b = eval_node(nodes, n.a, x, in_flat);
      if (n.index < 0 && b == 0.0) {
        if (!in_flat) throw EvalError("division by zero in negative power");
        return INFINITY;
      }
      return std::pow(b, static_cast<int>(n.index));
    }
    case Op::Sin: return std::sin(eval_node(nodes, n.a, x, in_flat));
    case Op::Cos: return std::cos(eval_node(nodes, n.a, x, in_flat));
    case Op::Exp: return std::exp(eval_node(nodes, n.a, x, in_flat));
    case Op::Flat2: return flat2(eval_node(nodes, n.a, x, true));
    case Op::FlatAbs: return flatabs(eval_node(nodes, n.a, x, true));
  }
  return 0.0;
}

}  // namespace

SmoothExpr::SmoothExpr() : nodes_(std::make_shared<std::vector<Node>>(1, Node{Op::Const, 0.0, 0, 0, 0})), text_("0") {}

SmoothExpr SmoothExpr::constant(double c) {
  SmoothExpr e;
  e.nodes_ = std::make_shared<std::vector<Node>>(1, Node{Op::Const, c, 0, 0, 0});
  std::ostringstream os;
  os.precision(17);
  os << c;
  e.text_ = os.str();
  return e;
}

SmoothExpr SmoothExpr::parse(std::string_view text, const std::vector<std::string>& variables) {
  auto nodes = std::make_shared<std::vector<Node>>();
  ExprParser p(text, variables);
  SmoothExpr e;
  e.root_ = p.parse_all(*nodes);
  e.nodes_ = std::move(nodes);
  e.nvars_ = variables.size();
  e.text_ = std::string(text);
  return e;
}

double SmoothExpr::evaluate(std::span<const double> point) const {
  if (point.size() < nvars_) throw DimensionMismatch("expression evaluated at a point of the wrong dimension");
  const double v = eval_node(*nodes_, root_, point, false);
  if (!std::isfinite(v)) throw EvalError("non-finite value of '" + text_ + "'");
  return v;
}

bool SmoothExpr::is_zero_literal() const {
  const Node& n = (*nodes_)[root_];
  return n.op == Op::Const && n.value == 0.0;
}

std::vector<double> SmoothField::evaluate(std::span<const double> point) const {
  std::vector<double> v;
  v.reserve(coeffs.size());
  for (const auto& c : coeffs) v.push_back(c.evaluate(point));
  return v;
}

SmoothFieldSystem parse_smooth_system(const std::vector<std::string>& variables,
                                      const std::vector<std::vector<std::string>>& components) {
  if (variables.empty()) throw PreconditionError("no variables declared");
  if (components.empty()) throw PreconditionError("at least one field is required");
  SmoothFieldSystem sys{variables, {}};
  for (std::size_t j = 0; j < components.size(); ++j) {
    if (components[j].size() != variables.size())
      throw DimensionMismatch("field " + std::to_string(j + 1) + " has " + std::to_string(components[j].size()) +
                              " components, expected " + std::to_string(variables.size()));
    SmoothField f;
    for (const auto& c : components[j]) f.coeffs.push_back(SmoothExpr::parse(c, variables));
    sys.fields.push_back(std::move(f));
  }
  return sys;
}

}  // namespace charflow
