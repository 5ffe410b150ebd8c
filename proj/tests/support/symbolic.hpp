// Test-only oracle: the coefficient recurrence f^[i] = (1/i) J_{f^[i-1]} f
// taken literally, by symbolic differentiation of expression trees.
// Independent of the series propagation in the library; small i only.
#pragma once

#include <cstddef>
#include <vector>

#include "ttube/expr.hpp"
#include "ttube/system.hpp"

namespace ttube::testing {

inline Expr d_dx(const Expr& e, std::size_t j) {
  const ExprNode& n = e.node();
  const Expr zero = Expr::constant(0.0);
  switch (n.op) {
    case ExprOp::Constant:
    case ExprOp::Param:
      return zero;
    case ExprOp::Var:
      return Expr::constant(n.index == j ? 1.0 : 0.0);
    case ExprOp::Neg:
      return Expr::neg(d_dx(e.lhs(), j));
    case ExprOp::Add:
      return Expr::binary(ExprOp::Add, d_dx(e.lhs(), j), d_dx(e.rhs(), j));
    case ExprOp::Sub:
      return Expr::binary(ExprOp::Sub, d_dx(e.lhs(), j), d_dx(e.rhs(), j));
    case ExprOp::Mul:
      return Expr::binary(ExprOp::Add, Expr::binary(ExprOp::Mul, d_dx(e.lhs(), j), e.rhs()),
                          Expr::binary(ExprOp::Mul, e.lhs(), d_dx(e.rhs(), j)));
    case ExprOp::Div: {
      // (u/v)' = (u' v - u v') / v^2
      const Expr num = Expr::binary(ExprOp::Sub, Expr::binary(ExprOp::Mul, d_dx(e.lhs(), j), e.rhs()),
                                    Expr::binary(ExprOp::Mul, e.lhs(), d_dx(e.rhs(), j)));
      return Expr::binary(ExprOp::Div, num, Expr::pow_int(e.rhs(), 2));
    }
    case ExprOp::PowInt: {
      if (n.exponent == 0) return zero;
      const Expr inner = d_dx(e.lhs(), j);
      const Expr k = Expr::constant(static_cast<double>(n.exponent));
      return Expr::binary(ExprOp::Mul, Expr::binary(ExprOp::Mul, k, Expr::pow_int(e.lhs(), n.exponent - 1)), inner);
    }
  }
  return zero;
}

/// Symbolic f^[0..p] for the system; entry i is a vector of n expressions.
inline std::vector<std::vector<Expr>> symbolic_coefficients(const OdeSystem& sys, std::size_t p) {
  const std::size_t n = sys.dim();
  std::vector<std::vector<Expr>> out;
  std::vector<Expr> id(n);
  for (std::size_t c = 0; c < n; ++c) id[c] = Expr::var(c);
  out.push_back(id);
  for (std::size_t i = 1; i <= p; ++i) {
    std::vector<Expr> next(n);
    for (std::size_t c = 0; c < n; ++c) {
      Expr acc = Expr::constant(0.0);
      for (std::size_t j = 0; j < n; ++j) {
        acc = Expr::binary(ExprOp::Add, acc, Expr::binary(ExprOp::Mul, d_dx(out.back()[c], j), sys.rhs()[j]));
      }
      next[c] = Expr::binary(ExprOp::Div, acc, Expr::constant(static_cast<double>(i)));
    }
    out.push_back(std::move(next));
  }
  return out;
}

inline std::vector<Point> eval_coefficients(const std::vector<std::vector<Expr>>& coeffs, const OdeSystem& sys,
                                            const Point& x) {
  std::vector<Point> out;
  for (const auto& row : coeffs) {
    Point v(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) v[c] = eval_point(row[c], x, sys.params());
    out.push_back(v);
  }
  return out;
}

}  // namespace ttube::testing
