/**
 * @file stepper.hpp
 * @brief One-step enclosures: a-priori full enclosure (StepA), the Direct
 * mean-value end-enclosure (StepB), and its tube-tightened variant E1.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "ttube/errors.hpp"
#include "ttube/interval.hpp"
#include "ttube/jets.hpp"
#include "ttube/system.hpp"
#include "ttube/tube.hpp"

namespace ttube {

/// (E_prev, h, F, E_next): F encloses Image(E_prev, h), E_next encloses End(E_prev, h).
struct Quad {
  Box e_prev;
  double h = 0.0;
  Box f;
  Box e_next;
};

namespace detail {
[[nodiscard]] inline Box inflate(const Box& b, double factor, double abs) {
  std::vector<Interval> c(b.dim());
  for (std::size_t i = 0; i < b.dim(); ++i) {
    const double m = mid(b[i]);
    const double r = rounding::add_up(rounding::mul_up(rad(b[i]), factor), abs);
    c[i] = make_unchecked(rounding::sub_down(m, r), rounding::add_up(m, r));
  }
  return Box(std::move(c));
}

/// E0 + [0, h] g, componentwise.
[[nodiscard]] inline Box picard_image(const Box& e0, double h, const Box& g) {
  const Interval t(0.0, h);
  std::vector<Interval> c(e0.dim());
  for (std::size_t i = 0; i < e0.dim(); ++i) c[i] = e0[i] + t * g[i];
  return Box(std::move(c));
}
}  // namespace detail

inline constexpr int kPicardIterations = 20;
inline constexpr double kPicardInflateFactor = 1.1;
inline constexpr double kPicardInflateAbs = 1e-6;

/// First-order Picard validation of a full enclosure for (E0, h). Returns F with
/// E0 + [0,h] f(F') ⊆ F' for some F' ⊇ F, so every trajectory from E0 stays in
/// F on [0, h]. A hint (a known enclosure for a longer step) is tried first.
[[nodiscard]] inline std::optional<Box> picard_enclosure(const OdeSystem& sys, const Box& e0, double h,
                                                         const Box* hint = nullptr) {
  if (!(h >= 0.0)) throw InvalidArgument("Picard step must be nonnegative");
  try {
    if (hint != nullptr && box_subset(e0, *hint)) {
      const Box next = detail::picard_image(e0, h, eval_rhs(sys, *hint));
      if (box_subset(next, *hint)) return next;
    }
    Box f = box_hull(e0, detail::picard_image(e0, h, eval_rhs(sys, e0)));
    f = detail::inflate(f, kPicardInflateFactor, kPicardInflateAbs);
    for (int it = 0; it < kPicardIterations; ++it) {
      if (!f.is_bounded()) return std::nullopt;
      const Box next = detail::picard_image(e0, h, eval_rhs(sys, f));
      if (box_subset(next, f)) return next;
      f = detail::inflate(box_hull(next, e0), kPicardInflateFactor, kPicardInflateAbs);
    }
  } catch (const DivisionByZeroInterval&) {
  } catch (const DomainError&) {
  }
  return std::nullopt;
}

struct StepAResult {
  double h = 0.0;
  Box f;
};

/// Largest h = h_request / 2^j (j <= 40) admitting a validated full enclosure.
[[nodiscard]] inline StepAResult step_a(const OdeSystem& sys, const Box& e0, double h_request, double t_now = 0.0) {
  if (!(h_request > 0.0)) throw InvalidArgument("step_a: requested step must be positive");
  if (e0.dim() != sys.dim()) throw DimensionMismatch("step_a: box dimension");
  const double h_min = std::ldexp(h_request, -40);
  for (double h = h_request; h >= h_min; h *= 0.5) {
    if (auto f = picard_enclosure(sys, e0, h)) return {h, std::move(*f)};
  }
  throw StepFailure("no validated step down to 2^-40 of the requested step", t_now);
}

/// Jet data shared by every evaluation of the Direct formula for one (E0, F1).
struct DirectData {
  std::size_t k = 1;
  Point center;                     // m(E0)
  std::vector<Box> point_coeffs;    // f^[i](m(E0)), i < k
  Box fk;                           // f^[k](F1)
  std::vector<IntervalMatrix> jac;  // J_{f^[i]}(E0), i < k
  Box spread;                       // E0 - m(E0)
};

[[nodiscard]] inline DirectData prepare_direct(const OdeSystem& sys, const Box& e0, const Box& f1, std::size_t k) {
  if (k < 1) throw InvalidArgument("Direct order must be >= 1");
  if (e0.dim() != sys.dim() || f1.dim() != sys.dim()) throw DimensionMismatch("Direct: box dimension");
  DirectData d;
  d.k = k;
  d.center = box_mid(e0);
  d.point_coeffs = taylor_coeffs(sys, Box::point(d.center), k - 1);
  d.fk = taylor_coeffs(sys, f1, k)[k];
  d.jac = taylor_jacobians(sys, e0, k);
  std::vector<Interval> s(e0.dim());
  for (std::size_t i = 0; i < e0.dim(); ++i) s[i] = e0[i] - Interval(d.center[i]);
  d.spread = Box(std::move(s));
  return d;
}

/// The three summands of the Direct formula at time(s) t.
struct DirectTerms {
  Box point;        // Tay^{k-1}_{m(E0)}(t)
  Box point_error;  // t^k f^[k](F1)
  Box range;        // (Σ t^i J_{f^[i]}(E0)) (E0 - m(E0))

  [[nodiscard]] Box sum() const { return minkowski(minkowski(point, point_error), range); }
};

[[nodiscard]] inline DirectTerms direct_terms(const DirectData& d, const Interval& t) {
  const std::size_t n = d.center.size();
  DirectTerms out;
  out.point = taylor_poly_eval(d.point_coeffs, t);
  const Interval tk = pow_int(t, static_cast<unsigned>(d.k));
  std::vector<Interval> pe(n);
  for (std::size_t i = 0; i < n; ++i) pe[i] = tk * d.fk[i];
  out.point_error = Box(std::move(pe));
  IntervalMatrix s(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      Interval acc = d.jac[d.k - 1](r, c);
      for (std::size_t i = d.k - 1; i-- > 0;) acc = acc * t + d.jac[i](r, c);
      s(r, c) = acc;
    }
  }
  out.range = s * d.spread;
  return out;
}

/// Direct end-enclosure at time t (or refinement candidate for the full
/// enclosure when t = [0, h]). Requires (E0, sup t, F1) admissible.
[[nodiscard]] inline Box direct(const OdeSystem& sys, const Box& e0, const Interval& t, const Box& f1, std::size_t k) {
  return direct_terms(prepare_direct(sys, e0, f1, k), t).sum();
}

enum class Span { End, Whole };

namespace detail {
[[nodiscard]] inline Box intersect_or_throw(const Box& a, const Box& b, const char* what) {
  auto r = box_intersect(a, b);
  if (!r) throw InternalSoundnessViolation(what);
  return std::move(*r);
}
}  // namespace detail

struct E1Result {
  Box box;
  bool tube_applied = false;
};

/// Tube-tightened enclosure. `rem` must enclose f^[p+1](F1). If the tube
/// hypotheses fail the plain Direct result is returned with tube_applied unset.
[[nodiscard]] inline E1Result e1_combined(const DirectData& d, const Box& e0, const Interval& h, Span span, const Box& f1,
                                          const TubeParams& tp, const TaylorCurve& curve, const Box& rem) {
  const Interval t = span == Span::End ? h : Interval(0.0, h.hi);
  const DirectTerms terms = direct_terms(d, t);
  const Box plain = terms.sum();
  const Ball ball = box_to_ball(e0);

  if (tp.p < 1 || !(tp.delta > 0.0) || tp.p != curve.p || tp.h_bar != curve.h_bar || ball.center != curve.q0 ||
      !(h == curve.horizon) || !(tp.h_bar <= h_taylor(tp.p, h.hi, tp.m_bar, tp.mu_bar, tp.delta)) ||
      !check_curve_inclusion(curve, rem, f1)) {
    return {plain, false};
  }

  const double grow = detail::exp_mu_t_up(tp.mu_bar, h);
  const double spread = rounding::mul_up(ball.radius, span == Span::End ? grow : std::max(1.0, grow));
  const std::size_t n = e0.dim();

  if (tp.p + 1 == d.k && curve.pieces() == 1) {
    // x(t) = C(t) + (y(t) - C(t)) + (x(t) - y(t)) with y the trajectory of the
    // centre: y - C lies in PE and within the tube radius; x - y lies in
    // RE + PE - PE and within the spread radius.
    const double tube_r = detail::tube_radius(h, tp, curve);
    const Box pe = detail::intersect_or_throw(terms.point_error, centered_box(n, tube_r), "tube error term is empty");
    std::vector<Interval> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = terms.range[i] + (terms.point_error[i] - terms.point_error[i]);
    const Box re = detail::intersect_or_throw(Box(std::move(diff)), centered_box(n, spread), "tube spread term is empty");
    const Box tight = minkowski(minkowski(terms.point, pe), re);
    return {detail::intersect_or_throw(tight, plain, "term-wise tube enclosure misses Direct"), true};
  }

  const Box tube_box = span == Span::End ? ball_to_box(tube_end_enclosure(ball, h, tp, curve))
                                         : tube_full_enclosure(ball, h, tp, curve);
  return {detail::intersect_or_throw(tube_box, plain, "tube enclosure misses Direct"), true};
}

/// Convenience form computing the jet data and the remainder bound itself.
[[nodiscard]] inline E1Result e1_combined(const OdeSystem& sys, const Box& e0, const Interval& h, Span span, const Box& f1,
                                          std::size_t k, const TubeParams& tp, const TaylorCurve& curve) {
  const DirectData d = prepare_direct(sys, e0, f1, k);
  const Box rem = taylor_coeffs(sys, f1, tp.p + 1)[tp.p + 1];
  return e1_combined(d, e0, h, span, f1, tp, curve, rem);
}

}  // namespace ttube
