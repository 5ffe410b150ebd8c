/**
 * @file expr.hpp
 * @brief Polynomial/rational expression trees for ODE right-hand sides.
 *
 * Grammar (whitespace ignored):
 *   expr    := term (('+' | '-') term)*
 *   term    := unary (('*' | '/') unary)*
 *   unary   := '-' unary | power
 *   power   := primary ('^' INTEGER)*
 *   primary := NUMBER | IDENT | '(' expr ')'
 * so '^' binds tighter than unary minus, which binds tighter than * and /.
 */
#pragma once

#include <cctype>
#include <cmath>
#include <charconv>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "ttube/errors.hpp"
#include "ttube/interval.hpp"

namespace ttube {

enum class ExprOp { Constant, Var, Param, Neg, Add, Sub, Mul, Div, PowInt };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprOp op = ExprOp::Constant;
  double value = 0.0;      // Constant
  std::size_t index = 0;   // Var
  std::string name;        // Param
  unsigned exponent = 0;   // PowInt
  ExprPtr lhs;             // unary operand / left operand
  ExprPtr rhs;
};

/// Immutable expression tree; copies share structure.
class Expr {
 public:
  Expr() = default;
  explicit Expr(ExprPtr root) : root_(std::move(root)) {}

  static Expr constant(double v) { return make({.op = ExprOp::Constant, .value = v}); }
  static Expr var(std::size_t i) { return make({.op = ExprOp::Var, .index = i}); }
  static Expr param(std::string name) { return make({.op = ExprOp::Param, .name = std::move(name)}); }
  static Expr neg(const Expr& a) { return make({.op = ExprOp::Neg, .lhs = a.root_}); }
  static Expr binary(ExprOp op, const Expr& a, const Expr& b) { return make({.op = op, .lhs = a.root_, .rhs = b.root_}); }
  static Expr pow_int(const Expr& a, unsigned m) { return make({.op = ExprOp::PowInt, .exponent = m, .lhs = a.root_}); }

  [[nodiscard]] const ExprNode& node() const { return *root_; }
  [[nodiscard]] const ExprPtr& ptr() const noexcept { return root_; }
  [[nodiscard]] Expr lhs() const { return Expr(root_->lhs); }
  [[nodiscard]] Expr rhs() const { return Expr(root_->rhs); }
  [[nodiscard]] ExprOp op() const { return root_->op; }

 private:
  static Expr make(ExprNode n) { return Expr(std::make_shared<const ExprNode>(std::move(n))); }
  ExprPtr root_;
};

[[nodiscard]] inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return a == b;
  if (a->op != b->op) return false;
  switch (a->op) {
    case ExprOp::Constant:
      return a->value == b->value;
    case ExprOp::Var:
      return a->index == b->index;
    case ExprOp::Param:
      return a->name == b->name;
    case ExprOp::PowInt:
      return a->exponent == b->exponent && structurally_equal(a->lhs, b->lhs);
    case ExprOp::Neg:
      return structurally_equal(a->lhs, b->lhs);
    default:
      return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
  }
}

inline bool operator==(const Expr& a, const Expr& b) { return structurally_equal(a.ptr(), b.ptr()); }

namespace detail {

class ExprParser {
 public:
  ExprParser(std::string_view text, std::span<const std::string> vars, std::span<const std::string> params)
      : s_(text), vars_(vars), params_(params) {}

  Expr parse() {
    skip_ws();
    if (pos_ == s_.size()) throw SyntaxError(pos_, "empty expression");
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) throw SyntaxError(pos_, std::string("unexpected '") + s_[pos_] + "'");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+')) {
        e = Expr::binary(ExprOp::Add, e, parse_term());
      } else if (accept('-')) {
        e = Expr::binary(ExprOp::Sub, e, parse_term());
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) {
        e = Expr::binary(ExprOp::Mul, e, parse_unary());
      } else if (accept('/')) {
        e = Expr::binary(ExprOp::Div, e, parse_unary());
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::neg(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr e = parse_primary();
    while (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      std::size_t end = start;
      while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
      if (end == start) {
        if (end == s_.size()) throw SyntaxError(end, "missing exponent");
        throw NonIntegerExponent(start);
      }
      if (end < s_.size() && (s_[end] == '.' || s_[end] == 'e' || s_[end] == 'E' || std::isalpha(static_cast<unsigned char>(s_[end])))) {
        throw NonIntegerExponent(start);
      }
      unsigned m = 0;
      auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + end, m);
      if (ec != std::errc() || ptr != s_.data() + end) throw NonIntegerExponent(start);
      pos_ = end;
      e = Expr::pow_int(e, m);
    }
    return e;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ == s_.size()) throw SyntaxError(pos_, "unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      if (!accept(')')) {
        skip_ws();
        throw SyntaxError(pos_, "expected ')'");
      }
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw SyntaxError(pos_, std::string("unexpected '") + c + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    auto digits = [&] {
      while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
    };
    digits();
    if (end < s_.size() && s_[end] == '.') {
      ++end;
      digits();
    }
    if (end < s_.size() && (s_[end] == 'e' || s_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < s_.size() && (s_[e] == '+' || s_[e] == '-')) ++e;
      if (e < s_.size() && std::isdigit(static_cast<unsigned char>(s_[e]))) {
        end = e;
        digits();
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + end, v);
    if (ec != std::errc() || ptr != s_.data() + end) throw SyntaxError(start, "malformed number");
    pos_ = end;
    return Expr::constant(v);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name(s_.substr(start, pos_ - start));
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) return Expr::var(i);
    }
    for (const auto& p : params_) {
      if (p == name) return Expr::param(name);
    }
    throw UnknownIdentifier(start, name);
  }

  std::string_view s_;
  std::span<const std::string> vars_;
  std::span<const std::string> params_;
  std::size_t pos_ = 0;
};

}  // namespace detail

[[nodiscard]] inline Expr parse_expr(std::string_view text, std::span<const std::string> vars,
                                     std::span<const std::string> params = {}) {
  return detail::ExprParser(text, vars, params).parse();
}

/// Fully parenthesised rendering; parse(to_string(e)) reproduces e exactly.
[[nodiscard]] inline std::string to_string(const Expr& e, std::span<const std::string> vars) {
  const ExprNode& n = e.node();
  switch (n.op) {
    case ExprOp::Constant: {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, n.value);
      (void)ec;
      return std::string(buf, ptr);
    }
    case ExprOp::Var:
      return n.index < vars.size() ? vars[n.index] : "x" + std::to_string(n.index);
    case ExprOp::Param:
      return n.name;
    case ExprOp::Neg:
      return "(-" + to_string(e.lhs(), vars) + ")";
    case ExprOp::PowInt:
      return "(" + to_string(e.lhs(), vars) + "^" + std::to_string(n.exponent) + ")";
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div: {
      const char sym = n.op == ExprOp::Add ? '+' : n.op == ExprOp::Sub ? '-' : n.op == ExprOp::Mul ? '*' : '/';
      return "(" + to_string(e.lhs(), vars) + " " + sym + " " + to_string(e.rhs(), vars) + ")";
    }
  }
  return {};
}

using ParamMap = std::map<std::string, Interval, std::less<>>;

/// Evaluates e in the scalar semantics S. `lift` turns an Interval constant
/// (a literal enclosure or a parameter value) into an S.
template <class S, class Lift>
[[nodiscard]] S eval_generic(const Expr& e, std::span<const S> env, const ParamMap& params, Lift&& lift) {
  const ExprNode& n = e.node();
  switch (n.op) {
    case ExprOp::Constant:
      return lift(literal_enclosure(n.value));
    case ExprOp::Var:
      if (n.index >= env.size()) throw DimensionMismatch("variable index out of range");
      return env[n.index];
    case ExprOp::Param: {
      auto it = params.find(n.name);
      if (it == params.end()) throw UnknownIdentifier(0, n.name);
      return lift(it->second);
    }
    case ExprOp::Neg:
      return -eval_generic<S>(e.lhs(), env, params, lift);
    case ExprOp::PowInt: {
      const S base = eval_generic<S>(e.lhs(), env, params, lift);
      if constexpr (std::is_same_v<S, double>) {
        return std::pow(base, static_cast<double>(n.exponent));
      } else {
        return pow_int(base, n.exponent);
      }
    }
    case ExprOp::Add:
      return eval_generic<S>(e.lhs(), env, params, lift) + eval_generic<S>(e.rhs(), env, params, lift);
    case ExprOp::Sub:
      return eval_generic<S>(e.lhs(), env, params, lift) - eval_generic<S>(e.rhs(), env, params, lift);
    case ExprOp::Mul:
      return eval_generic<S>(e.lhs(), env, params, lift) * eval_generic<S>(e.rhs(), env, params, lift);
    case ExprOp::Div:
      return eval_generic<S>(e.lhs(), env, params, lift) / eval_generic<S>(e.rhs(), env, params, lift);
  }
  throw InvalidArgument("corrupt expression node");
}

[[nodiscard]] inline Interval eval_interval(const Expr& e, std::span<const Interval> env, const ParamMap& params = {}) {
  return eval_generic<Interval>(e, env, params, [](const Interval& c) { return c; });
}

/// Non-validated evaluation at a point; constants enter through their midpoints.
[[nodiscard]] inline double eval_point(const Expr& e, std::span<const double> env, const ParamMap& params = {}) {
  return eval_generic<double>(e, env, params, [](const Interval& c) { return mid(c); });
}

}  // namespace ttube
