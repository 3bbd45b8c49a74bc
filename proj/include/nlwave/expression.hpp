#pragma once

// Closed-form scalar expressions over (t, x, y) for coefficient fields,
// kernels and manufactured solutions.
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | primary
//   primary := number | 't' | 's' | 'x' | 'y' | 'pi'
//            | ('cos' | 'sin' | 'exp') '(' expr ')' | '(' expr ')'
// 's' is an alias for 't' (kernels are written in the integration variable).

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include "nlwave/types.hpp"

namespace nlwave {

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : ConfigError(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

enum class Variable { t = 0, x = 1, y = 2 };

class Expression {
 public:
  enum class Op { constant, variable, add, sub, mul, div, neg, cos, sin, exp };

  Expression() : Expression(constant(0.0)) {}

  static Expression constant(double value) {
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = value;
    return Expression(std::move(n));
  }
  static Expression variable(Variable v) {
    auto n = std::make_shared<Node>();
    n->op = Op::variable;
    n->var = v;
    return Expression(std::move(n));
  }

  static Expression parse(std::string_view text);

  double operator()(double t, double x, double y = 0.0) const { return eval(*node_, t, x, y); }

  /// Symbolic partial derivative.
  Expression derivative(Variable v) const { return Expression(diff(node_, v)); }

  bool is_constant() const { return !depends_on(*node_, Variable::t) && !depends_on(*node_, Variable::x) &&
                                    !depends_on(*node_, Variable::y); }
  bool depends_on(Variable v) const { return depends_on(*node_, v); }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    print(os, *node_);
    return os.str();
  }

 private:
  struct Node {
    Op op = Op::constant;
    double value = 0.0;
    Variable var = Variable::t;
    std::shared_ptr<const Node> lhs, rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  explicit Expression(NodePtr n) : node_(std::move(n)) {}

  static NodePtr make(Op op, NodePtr a, NodePtr b = nullptr) {
    // Constant folding keeps derivative trees small.
    const bool ca = a && a->op == Op::constant;
    const bool cb = b && b->op == Op::constant;
    auto num = [](double v) { return constant(v).node_; };
    switch (op) {
      case Op::add:
        if (ca && cb) return num(a->value + b->value);
        if (ca && a->value == 0.0) return b;
        if (cb && b->value == 0.0) return a;
        break;
      case Op::sub:
        if (ca && cb) return num(a->value - b->value);
        if (cb && b->value == 0.0) return a;
        if (ca && a->value == 0.0) return make(Op::neg, b);
        break;
      case Op::mul:
        if (ca && cb) return num(a->value * b->value);
        if ((ca && a->value == 0.0) || (cb && b->value == 0.0)) return num(0.0);
        if (ca && a->value == 1.0) return b;
        if (cb && b->value == 1.0) return a;
        break;
      case Op::div:
        if (ca && cb) return num(a->value / b->value);
        if (ca && a->value == 0.0) return num(0.0);
        if (cb && b->value == 1.0) return a;
        break;
      case Op::neg:
        if (ca) return num(-a->value);
        if (a->op == Op::neg) return a->lhs;
        break;
      case Op::cos:
        if (ca) return num(std::cos(a->value));
        break;
      case Op::sin:
        if (ca) return num(std::sin(a->value));
        break;
      case Op::exp:
        if (ca) return num(std::exp(a->value));
        break;
      default:
        break;
    }
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  static double eval(const Node& n, double t, double x, double y) {
    switch (n.op) {
      case Op::constant: return n.value;
      case Op::variable: return n.var == Variable::t ? t : (n.var == Variable::x ? x : y);
      case Op::add: return eval(*n.lhs, t, x, y) + eval(*n.rhs, t, x, y);
      case Op::sub: return eval(*n.lhs, t, x, y) - eval(*n.rhs, t, x, y);
      case Op::mul: return eval(*n.lhs, t, x, y) * eval(*n.rhs, t, x, y);
      case Op::div: return eval(*n.lhs, t, x, y) / eval(*n.rhs, t, x, y);
      case Op::neg: return -eval(*n.lhs, t, x, y);
      case Op::cos: return std::cos(eval(*n.lhs, t, x, y));
      case Op::sin: return std::sin(eval(*n.lhs, t, x, y));
      case Op::exp: return std::exp(eval(*n.lhs, t, x, y));
    }
    return 0.0;
  }

  static bool depends_on(const Node& n, Variable v) {
    if (n.op == Op::constant) return false;
    if (n.op == Op::variable) return n.var == v;
    return (n.lhs && depends_on(*n.lhs, v)) || (n.rhs && depends_on(*n.rhs, v));
  }

  static NodePtr diff(const NodePtr& n, Variable v) {
    const auto zero = constant(0.0).node_;
    switch (n->op) {
      case Op::constant: return zero;
      case Op::variable: return constant(n->var == v ? 1.0 : 0.0).node_;
      case Op::add: return make(Op::add, diff(n->lhs, v), diff(n->rhs, v));
      case Op::sub: return make(Op::sub, diff(n->lhs, v), diff(n->rhs, v));
      case Op::mul:
        return make(Op::add, make(Op::mul, diff(n->lhs, v), n->rhs), make(Op::mul, n->lhs, diff(n->rhs, v)));
      case Op::div: {
        // (f/g)' = f'/g - f g'/g^2
        auto first = make(Op::div, diff(n->lhs, v), n->rhs);
        auto second = make(Op::div, make(Op::mul, n->lhs, diff(n->rhs, v)), make(Op::mul, n->rhs, n->rhs));
        return make(Op::sub, first, second);
      }
      case Op::neg: return make(Op::neg, diff(n->lhs, v));
      case Op::cos: return make(Op::neg, make(Op::mul, make(Op::sin, n->lhs), diff(n->lhs, v)));
      case Op::sin: return make(Op::mul, make(Op::cos, n->lhs), diff(n->lhs, v));
      case Op::exp: return make(Op::mul, n, diff(n->lhs, v));
    }
    return zero;
  }

  static void print(std::ostream& os, const Node& n) {
    auto binary = [&](const char* sym) {
      os << '(';
      print(os, *n.lhs);
      os << ' ' << sym << ' ';
      print(os, *n.rhs);
      os << ')';
    };
    auto unary = [&](const char* name) {
      os << name << '(';
      print(os, *n.lhs);
      os << ')';
    };
    switch (n.op) {
      case Op::constant:
        if (n.value < 0) os << '(' << n.value << ')';
        else os << n.value;
        break;
      case Op::variable: os << (n.var == Variable::t ? 't' : (n.var == Variable::x ? 'x' : 'y')); break;
      case Op::add: binary("+"); break;
      case Op::sub: binary("-"); break;
      case Op::mul: binary("*"); break;
      case Op::div: binary("/"); break;
      case Op::neg: unary("-"); break;
      case Op::cos: unary("cos"); break;
      case Op::sin: unary("sin"); break;
      case Op::exp: unary("exp"); break;
    }
  }

  class Parser;

  NodePtr node_;
};

class Expression::Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    auto e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = make(Op::add, lhs, parse_term());
      else if (accept('-')) lhs = make(Op::sub, lhs, parse_term());
      else return lhs;
    }
  }
  NodePtr parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::mul, lhs, parse_unary());
      else if (accept('/')) lhs = make(Op::div, lhs, parse_unary());
      else return lhs;
    }
  }
  NodePtr parse_unary() {
    if (accept('-')) return make(Op::neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_primary();
  }
  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (accept('(')) {
      auto e = parse_expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(text_.substr(pos_));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) throw ParseError("malformed number", pos_);
      pos_ += static_cast<std::size_t>(end - rest.c_str());
      return constant(v).node_;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t begin = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string_view id = text_.substr(begin, pos_ - begin);
      if (id == "t" || id == "s") return variable(Variable::t).node_;
      if (id == "x") return variable(Variable::x).node_;
      if (id == "y") return variable(Variable::y).node_;
      if (id == "pi") return constant(std::numbers::pi).node_;
      Op op;
      if (id == "cos") op = Op::cos;
      else if (id == "sin") op = Op::sin;
      else if (id == "exp") op = Op::exp;
      else throw ParseError("unknown identifier '" + std::string(id) + "'", begin);
      if (!accept('(')) throw ParseError("expected '(' after " + std::string(id), pos_);
      auto arg = parse_expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return make(op, arg);
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse_all()); }

/// An expression that remembers the text it was parsed from (for serialization).
struct NamedExpression {
  std::string source;
  Expression expr;

  NamedExpression() : source("0") {}
  NamedExpression(const char* text) : NamedExpression(std::string(text)) {}  // NOLINT
  NamedExpression(std::string text) : source(std::move(text)), expr(Expression::parse(source)) {}  // NOLINT

  double operator()(double t, double x, double y = 0.0) const { return expr(t, x, y); }
};

}  // namespace nlwave
