/**
 * @file system.hpp
 * @brief Autonomous ODE systems x' = f(x) and their compiled evaluation tape.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ttube/errors.hpp"
#include "ttube/expr.hpp"
#include "ttube/interval.hpp"

namespace ttube {

/// Straight-line program for f. Constant subtrees are folded to enclosures at
/// compile time; x^m becomes a chain of squarings and products.
struct Tape {
  enum class Kind : std::uint8_t { Const, Var, Neg, Add, Sub, Mul, Div, Sqr };
  struct Op {
    Kind kind;
    std::uint32_t a = 0;  // operand node, or variable index for Var
    std::uint32_t b = 0;
    Interval c;           // Const value
  };

  std::size_t dim = 0;
  std::vector<Op> ops;
  std::vector<std::uint32_t> outputs;  // node index of f_i

  [[nodiscard]] bool is_const(std::uint32_t node) const { return ops[node].kind == Kind::Const; }
};

namespace detail {

class TapeBuilder {
 public:
  TapeBuilder(std::size_t dim, const ParamMap& params) : params_(params) { tape_.dim = dim; }

  std::uint32_t build(const Expr& e) {
    const ExprNode& n = e.node();
    switch (n.op) {
      case ExprOp::Constant:
        return push_const(literal_enclosure(n.value));
      case ExprOp::Param: {
        auto it = params_.find(n.name);
        if (it == params_.end()) throw UnknownIdentifier(0, n.name);
        return push_const(it->second);
      }
      case ExprOp::Var:
        if (n.index >= tape_.dim) throw DimensionMismatch("variable index exceeds system dimension");
        return push({Tape::Kind::Var, static_cast<std::uint32_t>(n.index), 0, {}});
      case ExprOp::Neg:
        return unary(Tape::Kind::Neg, build(e.lhs()));
      case ExprOp::Add:
        return binary(Tape::Kind::Add, build(e.lhs()), build(e.rhs()));
      case ExprOp::Sub:
        return binary(Tape::Kind::Sub, build(e.lhs()), build(e.rhs()));
      case ExprOp::Mul:
        return binary(Tape::Kind::Mul, build(e.lhs()), build(e.rhs()));
      case ExprOp::Div:
        return binary(Tape::Kind::Div, build(e.lhs()), build(e.rhs()));
      case ExprOp::PowInt:
        return power(build(e.lhs()), n.exponent);
    }
    throw InvalidArgument("corrupt expression node");
  }

  /// Drops nodes not reachable from an output (operands of folded constants).
  Tape finish(const std::vector<std::uint32_t>& outputs) {
    const auto& ops = tape_.ops;
    std::vector<char> live(ops.size(), 0);
    for (auto o : outputs) live[o] = 1;
    for (std::size_t i = ops.size(); i-- > 0;) {
      if (!live[i]) continue;
      const auto k = ops[i].kind;
      if (k == Tape::Kind::Const || k == Tape::Kind::Var) continue;
      live[ops[i].a] = 1;
      if (k != Tape::Kind::Neg && k != Tape::Kind::Sqr) live[ops[i].b] = 1;
    }
    Tape out;
    out.dim = tape_.dim;
    std::vector<std::uint32_t> remap(ops.size(), 0);
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (!live[i]) continue;
      Tape::Op op = ops[i];
      if (op.kind != Tape::Kind::Const && op.kind != Tape::Kind::Var) {
        op.a = remap[op.a];
        op.b = remap[op.b];
      }
      remap[i] = static_cast<std::uint32_t>(out.ops.size());
      out.ops.push_back(op);
    }
    for (auto o : outputs) out.outputs.push_back(remap[o]);
    return out;
  }

 private:
  std::uint32_t push(Tape::Op op) {
    tape_.ops.push_back(op);
    return static_cast<std::uint32_t>(tape_.ops.size() - 1);
  }
  std::uint32_t push_const(const Interval& c) { return push({Tape::Kind::Const, 0, 0, c}); }
  const Interval& cval(std::uint32_t i) const { return tape_.ops[i].c; }

  std::uint32_t unary(Tape::Kind k, std::uint32_t a) {
    if (tape_.is_const(a)) return push_const(k == Tape::Kind::Neg ? -cval(a) : sqr(cval(a)));
    return push({k, a, 0, {}});
  }

  std::uint32_t binary(Tape::Kind k, std::uint32_t a, std::uint32_t b) {
    if (tape_.is_const(a) && tape_.is_const(b)) {
      switch (k) {
        case Tape::Kind::Add: return push_const(cval(a) + cval(b));
        case Tape::Kind::Sub: return push_const(cval(a) - cval(b));
        case Tape::Kind::Mul: return push_const(cval(a) * cval(b));
        default: return push_const(cval(a) / cval(b));
      }
    }
    if (k == Tape::Kind::Div && tape_.is_const(b) && cval(b).contains_zero()) throw DivisionByZeroInterval();
    return push({k, a, b, {}});
  }

  std::uint32_t power(std::uint32_t a, unsigned m) {
    if (m == 0) return push_const(Interval(1.0));
    if (m == 1) return a;
    // left-to-right binary exponentiation
    unsigned top = 1;
    while ((top << 1) <= m) top <<= 1;
    std::uint32_t r = a;
    for (top >>= 1; top != 0; top >>= 1) {
      r = unary(Tape::Kind::Sqr, r);
      if (m & top) r = binary(Tape::Kind::Mul, r, a);
    }
    return r;
  }

  const ParamMap& params_;
  Tape tape_;
};

}  // namespace detail

[[nodiscard]] inline Tape compile_tape(std::span<const Expr> rhs, std::size_t dim, const ParamMap& params) {
  detail::TapeBuilder builder(dim, params);
  std::vector<std::uint32_t> out;
  out.reserve(rhs.size());
  for (const auto& e : rhs) out.push_back(builder.build(e));
  return builder.finish(out);
}

/// x' = f(x). Immutable after construction.
class OdeSystem {
 public:
  OdeSystem() = default;
  OdeSystem(std::string name, std::vector<std::string> var_names, ParamMap params, std::vector<Expr> rhs)
      : name_(std::move(name)), vars_(std::move(var_names)), params_(std::move(params)), rhs_(std::move(rhs)) {
    if (vars_.empty()) throw InvalidArgument("system needs at least one variable");
    if (rhs_.size() != vars_.size()) throw DimensionMismatch("rhs count differs from dimension");
    tape_ = compile_tape(rhs_, vars_.size(), params_);
  }

  /// Parses every right-hand side against the variable and parameter names.
  static OdeSystem from_text(std::string name, std::vector<std::string> var_names, ParamMap params,
                             std::span<const std::string> rhs_text) {
    std::vector<std::string> pnames;
    for (const auto& [k, v] : params) pnames.push_back(k);
    std::vector<Expr> rhs;
    for (const auto& t : rhs_text) rhs.push_back(parse_expr(t, var_names, pnames));
    return OdeSystem(std::move(name), std::move(var_names), std::move(params), std::move(rhs));
  }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::size_t dim() const noexcept { return vars_.size(); }
  [[nodiscard]] const std::vector<std::string>& var_names() const noexcept { return vars_; }
  [[nodiscard]] const ParamMap& params() const noexcept { return params_; }
  [[nodiscard]] const std::vector<Expr>& rhs() const noexcept { return rhs_; }
  [[nodiscard]] const Tape& tape() const noexcept { return tape_; }

 private:
  std::string name_;
  std::vector<std::string> vars_;
  ParamMap params_;
  std::vector<Expr> rhs_;
  Tape tape_;
};

namespace detail {
inline double lift_scalar(const Interval& c, double) { return mid(c); }
inline Interval lift_scalar(const Interval& c, const Interval&) { return c; }
inline double sqr_scalar(double x) { return x * x; }
inline Interval sqr_scalar(const Interval& x) { return sqr(x); }
}  // namespace detail

/// f(x) through the tape, in double or Interval semantics.
template <class T>
void eval_rhs(const Tape& tape, std::span<const T> x, std::span<T> out, std::vector<T>& scratch) {
  if (x.size() != tape.dim || out.size() != tape.dim) throw DimensionMismatch("rhs evaluation dimension");
  scratch.resize(tape.ops.size());
  for (std::size_t i = 0; i < tape.ops.size(); ++i) {
    const auto& op = tape.ops[i];
    T& r = scratch[i];
    switch (op.kind) {
      case Tape::Kind::Const: r = detail::lift_scalar(op.c, T{}); break;
      case Tape::Kind::Var: r = x[op.a]; break;
      case Tape::Kind::Neg: r = -scratch[op.a]; break;
      case Tape::Kind::Add: r = scratch[op.a] + scratch[op.b]; break;
      case Tape::Kind::Sub: r = scratch[op.a] - scratch[op.b]; break;
      case Tape::Kind::Mul: r = scratch[op.a] * scratch[op.b]; break;
      case Tape::Kind::Div: r = scratch[op.a] / scratch[op.b]; break;
      case Tape::Kind::Sqr: r = detail::sqr_scalar(scratch[op.a]); break;
    }
  }
  for (std::size_t c = 0; c < tape.dim; ++c) out[c] = scratch[tape.outputs[c]];
}

[[nodiscard]] inline Box eval_rhs(const OdeSystem& sys, const Box& x) {
  std::vector<Interval> out(sys.dim()), scratch;
  eval_rhs<Interval>(sys.tape(), x.components(), out, scratch);
  return Box(std::move(out));
}

[[nodiscard]] inline Point eval_rhs(const OdeSystem& sys, std::span<const double> x) {
  Point out(sys.dim());
  std::vector<double> scratch;
  eval_rhs<double>(sys.tape(), x, out, scratch);
  return out;
}

}  // namespace ttube
