/**
 * @file interval.hpp
 * @brief Outward-rounded interval arithmetic, boxes, balls and interval matrices.
 *
 * Directed rounding is obtained from error-free transformations (TwoSum and
 * FMA-based residuals) evaluated in the default round-to-nearest mode. Every
 * +, -, *, / and sqrt endpoint is therefore the correctly rounded downward or
 * upward result, and no floating-point environment state is touched, so the
 * arithmetic is safe to use from any number of threads. exp is enclosed by
 * widening the libm result by two ulps on each side.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <span>
#include <vector>

#include "ttube/errors.hpp"

namespace ttube {

namespace rounding {

inline constexpr const char* kActivePath = "error-free transformations (TwoSum / FMA residual), round-to-nearest";

[[nodiscard]] inline double next_up(double x) noexcept {
  if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
    return x;
  }
  if (x == 0.0) {
    return std::numeric_limits<double>::denorm_min();
  }
  auto bits = std::bit_cast<std::uint64_t>(x);
  bits = (x > 0.0) ? bits + 1 : bits - 1;
  return std::bit_cast<double>(bits);
}

[[nodiscard]] inline double next_down(double x) noexcept { return -next_up(-x); }

namespace detail {

// Below this magnitude FMA residuals may underflow and lose their sign.
inline constexpr double kTiny = 0x1p-960;

[[nodiscard]] inline double two_sum_err(double a, double b, double s) noexcept {
  const double bb = s - a;
  return (a - (s - bb)) + (b - bb);
}

}  // namespace detail

[[nodiscard]] inline double add_down(double a, double b) noexcept {
  const double s = a + b;
  if (!std::isfinite(s)) {
    return (std::isfinite(a) && std::isfinite(b) && s > 0) ? std::numeric_limits<double>::max() : s;
  }
  return detail::two_sum_err(a, b, s) < 0.0 ? next_down(s) : s;
}

[[nodiscard]] inline double add_up(double a, double b) noexcept {
  const double s = a + b;
  if (!std::isfinite(s)) {
    return (std::isfinite(a) && std::isfinite(b) && s < 0) ? std::numeric_limits<double>::lowest() : s;
  }
  return detail::two_sum_err(a, b, s) > 0.0 ? next_up(s) : s;
}

[[nodiscard]] inline double sub_down(double a, double b) noexcept { return add_down(a, -b); }
[[nodiscard]] inline double sub_up(double a, double b) noexcept { return add_up(a, -b); }

[[nodiscard]] inline double mul_down(double a, double b) noexcept {
  const double p = a * b;
  if (!std::isfinite(p)) {
    return (std::isfinite(a) && std::isfinite(b) && p > 0) ? std::numeric_limits<double>::max() : p;
  }
  if (std::abs(p) < detail::kTiny) {
    return (a == 0.0 || b == 0.0) ? 0.0 : next_down(p);
  }
  return std::fma(a, b, -p) < 0.0 ? next_down(p) : p;
}

[[nodiscard]] inline double mul_up(double a, double b) noexcept {
  const double p = a * b;
  if (!std::isfinite(p)) {
    return (std::isfinite(a) && std::isfinite(b) && p < 0) ? std::numeric_limits<double>::lowest() : p;
  }
  if (std::abs(p) < detail::kTiny) {
    return (a == 0.0 || b == 0.0) ? 0.0 : next_up(p);
  }
  return std::fma(a, b, -p) > 0.0 ? next_up(p) : p;
}

[[nodiscard]] inline double div_down(double a, double b) noexcept {
  const double q = a / b;
  if (a == 0.0 && b != 0.0) return 0.0;
  if (!std::isfinite(q) || std::abs(q) < detail::kTiny) {
    return std::isfinite(q) ? next_down(q) : q;
  }
  const double r = std::fma(-q, b, a);
  // a / b = q + r / b
  return ((r < 0.0) != (b < 0.0)) && r != 0.0 ? next_down(q) : q;
}

[[nodiscard]] inline double div_up(double a, double b) noexcept {
  const double q = a / b;
  if (a == 0.0 && b != 0.0) return 0.0;
  if (!std::isfinite(q) || std::abs(q) < detail::kTiny) {
    return std::isfinite(q) ? next_up(q) : q;
  }
  const double r = std::fma(-q, b, a);
  return ((r > 0.0) == (b > 0.0)) && r != 0.0 ? next_up(q) : q;
}

[[nodiscard]] inline double sqrt_down(double a) noexcept {
  const double s = std::sqrt(a);
  if (s < detail::kTiny) {
    return s == 0.0 ? 0.0 : next_down(s);
  }
  return std::fma(-s, s, a) < 0.0 ? next_down(s) : s;
}

[[nodiscard]] inline double sqrt_up(double a) noexcept {
  const double s = std::sqrt(a);
  if (s < detail::kTiny) {
    return a == 0.0 ? 0.0 : next_up(std::max(s, std::numeric_limits<double>::denorm_min()));
  }
  return std::fma(-s, s, a) > 0.0 ? next_up(s) : s;
}

// libm exp is not correctly rounded; two ulps of widening covers its error.
[[nodiscard]] inline double exp_down(double a) noexcept {
  return std::max(0.0, next_down(next_down(std::exp(a))));
}
[[nodiscard]] inline double exp_up(double a) noexcept { return next_up(next_up(std::exp(a))); }

// x^m for x >= 0.
[[nodiscard]] inline double pow_down(double x, unsigned m) noexcept {
  double r = 1.0;
  for (unsigned i = 0; i < m; ++i) r = mul_down(r, x);
  return r;
}
[[nodiscard]] inline double pow_up(double x, unsigned m) noexcept {
  double r = 1.0;
  for (unsigned i = 0; i < m; ++i) r = mul_up(r, x);
  return r;
}

}  // namespace rounding

/// Closed interval [lo, hi] of reals.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr Interval() = default;
  constexpr Interval(double v) : lo(v), hi(v) {}  // NOLINT: implicit point interval
  Interval(double l, double h) : lo(l), hi(h) {
    if (!(l <= h)) {
      throw InvalidArgument("interval with lo > hi or NaN endpoint");
    }
  }

  [[nodiscard]] bool is_bounded() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }
  [[nodiscard]] bool is_point() const noexcept { return lo == hi; }
  [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  [[nodiscard]] bool contains_zero() const noexcept { return lo <= 0.0 && 0.0 <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

[[nodiscard]] inline double width(const Interval& a) noexcept { return rounding::sub_up(a.hi, a.lo); }

[[nodiscard]] inline double mid(const Interval& a) noexcept {
  if (a.lo == a.hi) return a.lo;
  const double m = 0.5 * a.lo + 0.5 * a.hi;
  return std::clamp(m, a.lo, a.hi);
}

/// Radius about mid(a), rounded up, so [mid - rad, mid + rad] contains a.
[[nodiscard]] inline double rad(const Interval& a) noexcept {
  const double m = mid(a);
  return std::max(rounding::sub_up(a.hi, m), rounding::sub_up(m, a.lo));
}

[[nodiscard]] inline double mag(const Interval& a) noexcept { return std::max(std::abs(a.lo), std::abs(a.hi)); }

[[nodiscard]] inline double mig(const Interval& a) noexcept {
  if (a.contains_zero()) return 0.0;
  return std::min(std::abs(a.lo), std::abs(a.hi));
}

[[nodiscard]] inline bool subset(const Interval& a, const Interval& b) noexcept { return b.lo <= a.lo && a.hi <= b.hi; }

[[nodiscard]] inline Interval hull(const Interval& a, const Interval& b) noexcept {
  Interval r;
  r.lo = std::min(a.lo, b.lo);
  r.hi = std::max(a.hi, b.hi);
  return r;
}

[[nodiscard]] inline std::optional<Interval> intersect(const Interval& a, const Interval& b) noexcept {
  const double l = std::max(a.lo, b.lo);
  const double h = std::min(a.hi, b.hi);
  if (l > h) return std::nullopt;
  Interval r;
  r.lo = l;
  r.hi = h;
  return r;
}

namespace detail {
[[nodiscard]] inline Interval make_unchecked(double lo, double hi) noexcept {
  Interval r;
  r.lo = lo;
  r.hi = hi;
  return r;
}
}  // namespace detail

[[nodiscard]] inline Interval operator-(const Interval& a) noexcept { return detail::make_unchecked(-a.hi, -a.lo); }

[[nodiscard]] inline Interval operator+(const Interval& a, const Interval& b) noexcept {
  return detail::make_unchecked(rounding::add_down(a.lo, b.lo), rounding::add_up(a.hi, b.hi));
}

[[nodiscard]] inline Interval operator-(const Interval& a, const Interval& b) noexcept {
  return detail::make_unchecked(rounding::sub_down(a.lo, b.hi), rounding::sub_up(a.hi, b.lo));
}

[[nodiscard]] inline Interval operator*(const Interval& a, const Interval& b) noexcept {
  using rounding::mul_down;
  using rounding::mul_up;
  using detail::make_unchecked;
  if (a.lo >= 0.0) {
    if (b.lo >= 0.0) return make_unchecked(mul_down(a.lo, b.lo), mul_up(a.hi, b.hi));
    if (b.hi <= 0.0) return make_unchecked(mul_down(a.hi, b.lo), mul_up(a.lo, b.hi));
    return make_unchecked(mul_down(a.hi, b.lo), mul_up(a.hi, b.hi));
  }
  if (a.hi <= 0.0) {
    if (b.lo >= 0.0) return make_unchecked(mul_down(a.lo, b.hi), mul_up(a.hi, b.lo));
    if (b.hi <= 0.0) return make_unchecked(mul_down(a.hi, b.hi), mul_up(a.lo, b.lo));
    return make_unchecked(mul_down(a.lo, b.hi), mul_up(a.lo, b.lo));
  }
  if (b.lo >= 0.0) return make_unchecked(mul_down(a.lo, b.hi), mul_up(a.hi, b.hi));
  if (b.hi <= 0.0) return make_unchecked(mul_down(a.hi, b.lo), mul_up(a.lo, b.lo));
  return make_unchecked(std::min(mul_down(a.lo, b.hi), mul_down(a.hi, b.lo)),
                        std::max(mul_up(a.lo, b.lo), mul_up(a.hi, b.hi)));
}

[[nodiscard]] inline Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains_zero()) {
    throw DivisionByZeroInterval();
  }
  using rounding::div_down;
  using rounding::div_up;
  if (b.lo > 0.0) {
    const double lo = a.lo >= 0.0 ? div_down(a.lo, b.hi) : div_down(a.lo, b.lo);
    const double hi = a.hi >= 0.0 ? div_up(a.hi, b.lo) : div_up(a.hi, b.hi);
    return detail::make_unchecked(lo, hi);
  }
  return -(a / (-b));
}

inline Interval& operator+=(Interval& a, const Interval& b) noexcept { return a = a + b; }
inline Interval& operator-=(Interval& a, const Interval& b) noexcept { return a = a - b; }
inline Interval& operator*=(Interval& a, const Interval& b) noexcept { return a = a * b; }

[[nodiscard]] inline Interval sqr(const Interval& a) noexcept {
  using rounding::mul_down;
  using rounding::mul_up;
  if (a.lo >= 0.0) return detail::make_unchecked(mul_down(a.lo, a.lo), mul_up(a.hi, a.hi));
  if (a.hi <= 0.0) return detail::make_unchecked(mul_down(a.hi, a.hi), mul_up(a.lo, a.lo));
  const double m = mag(a);
  return detail::make_unchecked(0.0, mul_up(m, m));
}

[[nodiscard]] inline Interval pow_int(const Interval& a, unsigned m) noexcept {
  using rounding::pow_down;
  using rounding::pow_up;
  if (m == 0) return Interval(1.0);
  if (m % 2 == 0) {
    if (a.lo >= 0.0) return detail::make_unchecked(pow_down(a.lo, m), pow_up(a.hi, m));
    if (a.hi <= 0.0) return detail::make_unchecked(pow_down(-a.hi, m), pow_up(-a.lo, m));
    return detail::make_unchecked(0.0, pow_up(mag(a), m));
  }
  const double lo = a.lo >= 0.0 ? pow_down(a.lo, m) : -pow_up(-a.lo, m);
  const double hi = a.hi >= 0.0 ? pow_up(a.hi, m) : -pow_down(-a.hi, m);
  return detail::make_unchecked(lo, hi);
}

[[nodiscard]] inline Interval exp(const Interval& a) noexcept {
  return detail::make_unchecked(rounding::exp_down(a.lo), rounding::exp_up(a.hi));
}

[[nodiscard]] inline Interval sqrt(const Interval& a) {
  if (a.lo < 0.0) {
    throw DomainError("sqrt of an interval reaching below zero");
  }
  return detail::make_unchecked(rounding::sqrt_down(a.lo), rounding::sqrt_up(a.hi));
}

/// Symmetric interval [-r, r].
[[nodiscard]] inline Interval symmetric(double r) noexcept { return detail::make_unchecked(-r, r); }

/// Interval guaranteed to contain the real number written as a decimal literal
/// whose nearest double is v. Integers below 2^53 are exact.
[[nodiscard]] inline Interval literal_enclosure(double v) noexcept {
  if (std::isfinite(v) && std::abs(v) < 0x1p53 && v == std::trunc(v)) {
    return Interval(v);
  }
  return detail::make_unchecked(rounding::next_down(v), rounding::next_up(v));
}

inline std::ostream& operator<<(std::ostream& os, const Interval& a) {
  return os << '[' << a.lo << ", " << a.hi << ']';
}

using Point = std::vector<double>;

/// Axis-aligned box: product of n intervals.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> components) : c_(std::move(components)) {}
  Box(std::initializer_list<Interval> components) : c_(components) {}

  /// Box containing every point at most radius[i] away from center[i] in coordinate i.
  static Box from_center_radius(std::span<const double> center, std::span<const double> radius) {
    if (center.size() != radius.size()) throw DimensionMismatch("center/radius dimension mismatch");
    std::vector<Interval> c(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
      if (radius[i] < 0.0) throw InvalidArgument("negative box radius");
      c[i] = detail::make_unchecked(rounding::sub_down(center[i], radius[i]), rounding::add_up(center[i], radius[i]));
    }
    return Box(std::move(c));
  }

  static Box point(std::span<const double> p) {
    std::vector<Interval> c(p.begin(), p.end());
    return Box(std::move(c));
  }

  [[nodiscard]] std::size_t dim() const noexcept { return c_.size(); }
  [[nodiscard]] Interval& operator[](std::size_t i) noexcept { return c_[i]; }
  [[nodiscard]] const Interval& operator[](std::size_t i) const noexcept { return c_[i]; }
  [[nodiscard]] auto begin() noexcept { return c_.begin(); }
  [[nodiscard]] auto end() noexcept { return c_.end(); }
  [[nodiscard]] auto begin() const noexcept { return c_.begin(); }
  [[nodiscard]] auto end() const noexcept { return c_.end(); }
  [[nodiscard]] const std::vector<Interval>& components() const noexcept { return c_; }

  [[nodiscard]] bool is_bounded() const noexcept {
    return std::all_of(c_.begin(), c_.end(), [](const Interval& i) { return i.is_bounded(); });
  }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  std::vector<Interval> c_;
};

inline std::ostream& operator<<(std::ostream& os, const Box& b) {
  os << '(';
  for (std::size_t i = 0; i < b.dim(); ++i) os << (i ? " x " : "") << b[i];
  return os << ')';
}

[[nodiscard]] inline std::string to_string(const Box& b) {
  std::ostringstream os;
  os.precision(17);
  os << b;
  return os.str();
}

/// Euclidean ball.
struct Ball {
  Point center;
  double radius = 0.0;
};

namespace detail {
inline void require_same_dim(const Box& a, const Box& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("box dimension mismatch");
}
}  // namespace detail

[[nodiscard]] inline double box_width_max(const Box& b) noexcept {
  double w = 0.0;
  for (const auto& c : b) w = std::max(w, width(c));
  return w;
}

[[nodiscard]] inline Point box_mid(const Box& b) {
  Point m(b.dim());
  for (std::size_t i = 0; i < b.dim(); ++i) m[i] = mid(b[i]);
  return m;
}

[[nodiscard]] inline double box_volume(const Box& b) noexcept {
  double v = 1.0;
  for (const auto& c : b) v = rounding::mul_up(v, width(c));
  return v;
}

[[nodiscard]] inline Box box_hull(const Box& a, const Box& b) {
  detail::require_same_dim(a, b);
  std::vector<Interval> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) c[i] = hull(a[i], b[i]);
  return Box(std::move(c));
}

/// Componentwise interval sum a + e (the Minkowski sum of two boxes).
[[nodiscard]] inline Box minkowski(const Box& a, const Box& e) {
  detail::require_same_dim(a, e);
  std::vector<Interval> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) c[i] = a[i] + e[i];
  return Box(std::move(c));
}

[[nodiscard]] inline std::optional<Box> box_intersect(const Box& a, const Box& b) {
  detail::require_same_dim(a, b);
  std::vector<Interval> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    auto r = intersect(a[i], b[i]);
    if (!r) return std::nullopt;
    c[i] = *r;
  }
  return Box(std::move(c));
}

[[nodiscard]] inline bool box_subset(const Box& a, const Box& b) {
  detail::require_same_dim(a, b);
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if (!subset(a[i], b[i])) return false;
  }
  return true;
}

[[nodiscard]] inline bool box_contains(const Box& b, std::span<const double> p) {
  if (b.dim() != p.size()) throw DimensionMismatch("point dimension mismatch");
  for (std::size_t i = 0; i < b.dim(); ++i) {
    if (!b[i].contains(p[i])) return false;
  }
  return true;
}

/// The 2^n congruent subboxes from bisecting every coordinate at its midpoint.
/// Subbox k takes the upper half of coordinate i iff bit i of k is set.
[[nodiscard]] inline std::vector<Box> split_box(const Box& b) {
  const std::size_t n = b.dim();
  if (n == 0) throw InvalidArgument("cannot split a 0-dimensional box");
  if (n >= 20) throw InvalidArgument("split_box: dimension too large");
  std::vector<Box> out;
  out.reserve(std::size_t{1} << n);
  for (std::size_t k = 0; k < (std::size_t{1} << n); ++k) {
    std::vector<Interval> c(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double m = mid(b[i]);
      c[i] = ((k >> i) & 1U) ? detail::make_unchecked(m, b[i].hi) : detail::make_unchecked(b[i].lo, m);
    }
    out.emplace_back(std::move(c));
  }
  return out;
}

[[nodiscard]] inline Box ball_to_box(const Ball& ball) {
  std::vector<double> r(ball.center.size(), ball.radius);
  return Box::from_center_radius(ball.center, r);
}

/// Ball centred at box_mid(b) whose radius is the half-diagonal rounded up.
[[nodiscard]] inline Ball box_to_ball(const Box& b) {
  Ball ball;
  ball.center = box_mid(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < b.dim(); ++i) {
    const double m = ball.center[i];
    const double half = std::max(rounding::sub_up(b[i].hi, m), rounding::sub_up(m, b[i].lo));
    sum = rounding::add_up(sum, rounding::mul_up(half, half));
  }
  ball.radius = rounding::sqrt_up(sum);
  return ball;
}

/// Upper bound of the Euclidean norm of the magnitude vector of b.
[[nodiscard]] inline double norm2_mag_up(const Box& b) noexcept {
  double sum = 0.0;
  for (const auto& c : b) {
    const double m = mag(c);
    sum = rounding::add_up(sum, rounding::mul_up(m, m));
  }
  return rounding::sqrt_up(sum);
}

/// Box [-r, r]^n.
[[nodiscard]] inline Box centered_box(std::size_t n, double r) {
  return Box(std::vector<Interval>(n, symmetric(r)));
}

/// Dense square interval matrix, row-major.
class IntervalMatrix {
 public:
  IntervalMatrix() = default;
  IntervalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, Interval(0.0)) {}

  static IntervalMatrix identity(std::size_t n) {
    IntervalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Interval(1.0);
    return m;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] Interval& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * cols_ + j]; }
  [[nodiscard]] const Interval& operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * cols_ + j]; }

  friend bool operator==(const IntervalMatrix&, const IntervalMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Interval> a_;
};

[[nodiscard]] inline Box operator*(const IntervalMatrix& a, const Box& x) {
  if (a.cols() != x.dim()) throw DimensionMismatch("matrix-vector dimension mismatch");
  std::vector<Interval> y(a.rows(), Interval(0.0));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  }
  return Box(std::move(y));
}

}  // namespace ttube
