/**
 * @file jets.hpp
 * @brief Normalized Taylor coefficients f^[i] and their Jacobians J_{f^[i]}.
 *
 * Coefficients come from the series recurrence x_{i+1} = f(x)_i / (i+1) run
 * over the compiled tape. Seeding the sensitivities of x_0 with the identity
 * makes the partials of x_i exactly J_{f^[i]}(x_0).
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ttube/interval.hpp"
#include "ttube/system.hpp"

namespace ttube {

/// Truncated time series of every tape node, optionally with first-order
/// sensitivities with respect to the initial point.
template <class T>
class SeriesPropagation {
 public:
  SeriesPropagation(const Tape& tape, std::span<const T> x0, std::size_t order, bool with_partials)
      : tape_(tape), n_(tape.dim), k_(order + 1), partials_(with_partials) {
    if (x0.size() != n_) throw DimensionMismatch("initial point dimension");
    const std::size_t nodes = tape.ops.size();
    val_.assign(nodes * k_, T(0.0));
    x_.assign(n_ * k_, T(0.0));
    if (partials_) {
      dval_.assign(nodes * n_ * k_, T(0.0));
      dx_.assign(n_ * n_ * k_, T(0.0));
    }
    for (std::size_t c = 0; c < n_; ++c) {
      x_[c * k_] = x0[c];
      if (partials_) dx_[(c * n_ + c) * k_] = T(1.0);
    }
    run();
  }

  /// Coefficient i of component c, i.e. f^[i](x0)_c.
  [[nodiscard]] const T& coeff(std::size_t i, std::size_t c) const { return x_[c * k_ + i]; }
  /// d coeff(i, c) / d x0_j, i.e. J_{f^[i]}(x0)_{c,j}.
  [[nodiscard]] const T& partial(std::size_t i, std::size_t c, std::size_t j) const { return dx_[(c * n_ + j) * k_ + i]; }
  [[nodiscard]] std::size_t order() const noexcept { return k_ - 1; }

 private:
  T* v(std::size_t node) { return &val_[node * k_]; }
  T* dv(std::size_t node, std::size_t j) { return &dval_[(node * n_ + j) * k_]; }

  void run() {
    const auto& ops = tape_.ops;
    for (std::size_t i = 0; i < k_; ++i) {
      for (std::size_t node = 0; node < ops.size(); ++node) step(node, i);
      if (i + 1 == k_) break;
      const T denom(static_cast<double>(i + 1));
      for (std::size_t c = 0; c < n_; ++c) {
        const std::size_t out = tape_.outputs[c];
        x_[c * k_ + i + 1] = val_[out * k_ + i] / denom;
        if (partials_) {
          for (std::size_t j = 0; j < n_; ++j) dx_[(c * n_ + j) * k_ + i + 1] = dval_[(out * n_ + j) * k_ + i] / denom;
        }
      }
    }
  }

  void step(std::size_t node, std::size_t i) {
    const auto& op = tape_.ops[node];
    T* r = v(node);
    switch (op.kind) {
      case Tape::Kind::Const:
        if (i == 0) r[0] = detail::lift_scalar(op.c, T{});
        return;
      case Tape::Kind::Var:
        r[i] = x_[op.a * k_ + i];
        if (partials_) {
          for (std::size_t j = 0; j < n_; ++j) dv(node, j)[i] = dx_[(op.a * n_ + j) * k_ + i];
        }
        return;
      case Tape::Kind::Neg: {
        r[i] = -v(op.a)[i];
        if (partials_) {
          for (std::size_t j = 0; j < n_; ++j) dv(node, j)[i] = -dv(op.a, j)[i];
        }
        return;
      }
      case Tape::Kind::Add:
      case Tape::Kind::Sub: {
        const bool sub = op.kind == Tape::Kind::Sub;
        const bool ca = tape_.is_const(op.a), cb = tape_.is_const(op.b);
        const T a = (ca && i > 0) ? T(0.0) : v(op.a)[i];
        const T b = (cb && i > 0) ? T(0.0) : v(op.b)[i];
        r[i] = sub ? a - b : a + b;
        if (partials_) {
          for (std::size_t j = 0; j < n_; ++j) {
            if (ca) {
              dv(node, j)[i] = sub ? -dv(op.b, j)[i] : dv(op.b, j)[i];
            } else if (cb) {
              dv(node, j)[i] = dv(op.a, j)[i];
            } else {
              dv(node, j)[i] = sub ? dv(op.a, j)[i] - dv(op.b, j)[i] : dv(op.a, j)[i] + dv(op.b, j)[i];
            }
          }
        }
        return;
      }
      case Tape::Kind::Mul: {
        const bool ca = tape_.is_const(op.a), cb = tape_.is_const(op.b);
        if (ca || cb) {
          const T k = ca ? v(op.a)[0] : v(op.b)[0];
          const std::uint32_t o = ca ? op.b : op.a;
          r[i] = k * v(o)[i];
          if (partials_) {
            for (std::size_t j = 0; j < n_; ++j) dv(node, j)[i] = k * dv(o, j)[i];
          }
          return;
        }
        const T* a = v(op.a);
        const T* b = v(op.b);
        T s = a[0] * b[i];
        for (std::size_t l = 1; l <= i; ++l) s = s + a[l] * b[i - l];
        r[i] = s;
        if (partials_) {
          for (std::size_t j = 0; j < n_; ++j) {
            const T* da = dv(op.a, j);
            const T* db = dv(op.b, j);
            T d = da[0] * b[i] + a[0] * db[i];
            for (std::size_t l = 1; l <= i; ++l) d = d + (da[l] * b[i - l] + a[l] * db[i - l]);
            dv(node, j)[i] = d;
          }
        }
        return;
      }
      case Tape::Kind::Div: {
        const T* a = v(op.a);
        const T* b = v(op.b);
        if (tape_.is_const(op.b)) {
          r[i] = a[i] / b[0];
          if (partials_) {
            for (std::size_t j = 0; j < n_; ++j) dv(node, j)[i] = dv(op.a, j)[i] / b[0];
          }
          return;
        }
        const bool ca = tape_.is_const(op.a);
        T s = (ca && i > 0) ? T(0.0) : a[i];
        for (std::size_t l = 1; l <= i; ++l) s = s - b[l] * r[i - l];
        r[i] = s / b[0];
        if (partials_) {
          for (std::size_t j = 0; j < n_; ++j) {
            const T* db = dv(op.b, j);
            const T* dr = dv(node, j);
            T d = ca ? T(0.0) : dv(op.a, j)[i];
            for (std::size_t l = 1; l <= i; ++l) d = d - (db[l] * r[i - l] + b[l] * dr[i - l]);
            d = d - db[0] * r[i];
            dv(node, j)[i] = d / b[0];
          }
        }
        return;
      }
      case Tape::Kind::Sqr: {
        const T* a = v(op.a);
        T s(0.0);
        for (std::size_t l = 0; 2 * l < i; ++l) s = s + a[l] * a[i - l];
        s = s + s;
        if (i % 2 == 0) s = s + detail::sqr_scalar(a[i / 2]);
        r[i] = s;
        if (partials_) {
          for (std::size_t j = 0; j < n_; ++j) {
            const T* da = dv(op.a, j);
            T d(0.0);
            for (std::size_t l = 0; l <= i; ++l) d = d + a[l] * da[i - l];
            dv(node, j)[i] = d + d;
          }
        }
        return;
      }
    }
  }

  const Tape& tape_;
  std::size_t n_;
  std::size_t k_;
  bool partials_;
  std::vector<T> val_, dval_, x_, dx_;
};

/// Entry i encloses f^[i](q) over the box q, for i = 0..p.
[[nodiscard]] inline std::vector<Box> taylor_coeffs(const OdeSystem& sys, const Box& q, std::size_t p) {
  if (q.dim() != sys.dim()) throw DimensionMismatch("box dimension differs from system");
  SeriesPropagation<Interval> s(sys.tape(), q.components(), p, false);
  std::vector<Box> out;
  out.reserve(p + 1);
  out.push_back(q);
  for (std::size_t i = 1; i <= p; ++i) {
    std::vector<Interval> c(sys.dim());
    for (std::size_t j = 0; j < sys.dim(); ++j) c[j] = s.coeff(i, j);
    out.emplace_back(std::move(c));
  }
  return out;
}

/// Non-validated point coefficients, for oracles and diagnostics.
[[nodiscard]] inline std::vector<Point> taylor_coeffs_point(const OdeSystem& sys, std::span<const double> q, std::size_t p) {
  if (q.size() != sys.dim()) throw DimensionMismatch("point dimension differs from system");
  SeriesPropagation<double> s(sys.tape(), q, p, false);
  std::vector<Point> out(p + 1, Point(sys.dim()));
  for (std::size_t i = 0; i <= p; ++i) {
    for (std::size_t j = 0; j < sys.dim(); ++j) out[i][j] = s.coeff(i, j);
  }
  return out;
}

namespace detail {
inline std::vector<IntervalMatrix> jacobians_from(const SeriesPropagation<Interval>& s, std::size_t n, std::size_t k) {
  std::vector<IntervalMatrix> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    IntervalMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) m(r, c) = s.partial(i, r, c);
    }
    out.push_back(std::move(m));
  }
  return out;
}
}  // namespace detail

/// Matrix i encloses J_{f^[i]}(x) over x in E, for i = 0..k-1.
[[nodiscard]] inline std::vector<IntervalMatrix> taylor_jacobians(const OdeSystem& sys, const Box& e, std::size_t k) {
  if (k == 0) throw InvalidArgument("taylor_jacobians needs k >= 1");
  if (e.dim() != sys.dim()) throw DimensionMismatch("box dimension differs from system");
  SeriesPropagation<Interval> s(sys.tape(), e.components(), k - 1, true);
  return detail::jacobians_from(s, sys.dim(), k);
}

[[nodiscard]] inline IntervalMatrix jacobian(const OdeSystem& sys, const Box& e) { return taylor_jacobians(sys, e, 2)[1]; }

/// Upper bound on sup over F of the 2-norm of f^[p+1].
[[nodiscard]] inline double norm_bound_coeff(const OdeSystem& sys, const Box& f, std::size_t p) {
  return norm2_mag_up(taylor_coeffs(sys, f, p + 1)[p + 1]);
}

}  // namespace ttube
