/**
 * @file tube.hpp
 * @brief Taylor curves, the tube step-size bound, and tube enclosures.
 *
 * A Taylor curve from q0 with step h̄ restarts the degree-p Taylor polynomial
 * at each node q_i. If every node's image stays in the full enclosure F1,
 * M̄ bounds ‖f^[p+1](F1)‖ and μ̄ bounds the log norm on F1, then choosing
 * h̄ <= h_taylor(p, h, M̄, μ̄, δ) keeps the curve within δ of the true
 * trajectory of q0 on [0, h].
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ttube/errors.hpp"
#include "ttube/interval.hpp"
#include "ttube/jets.hpp"
#include "ttube/system.hpp"

namespace ttube {

namespace detail {
/// Largest r found with r^p <= x, r rounded down.
[[nodiscard]] inline double root_down(double x, unsigned p) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return x;
  double r = p == 1 ? x : std::pow(x, 1.0 / p);
  while (r > 0.0 && rounding::pow_up(r, p) > x) r = rounding::next_down(r);
  return r;
}
}  // namespace detail

/// Mini-step bound keeping a degree-p Taylor curve inside a δ-tube over [0, h].
/// Every operation rounds toward a smaller result. M̄ = 0 yields +infinity.
[[nodiscard]] inline double h_taylor(unsigned p, double h, double m_bar, double mu_bar, double delta) {
  if (p < 1) throw InvalidArgument("h_taylor: degree must be >= 1");
  if (!(h > 0.0)) throw InvalidArgument("h_taylor: horizon must be positive");
  if (!(m_bar >= 0.0)) throw InvalidArgument("h_taylor: M bound must be nonnegative");
  if (!(delta > 0.0)) throw InvalidArgument("h_taylor: delta must be positive");
  if (std::isnan(mu_bar)) throw InvalidArgument("h_taylor: mu bound is NaN");
  using namespace rounding;
  if (m_bar == 0.0) return std::numeric_limits<double>::infinity();
  if (mu_bar > 0.0) {
    const double num = mul_down(mu_bar, delta);
    const double den = mul_up(m_bar, sub_up(exp_up(mul_up(mu_bar, h)), 1.0));
    return ttube::detail::root_down(div_down(num, den), p);
  }
  if (mu_bar == 0.0) return ttube::detail::root_down(div_down(delta, mul_up(m_bar, h)), p);
  const double num = mul_down(-mu_bar, delta);
  const double den = mul_up(mul_up(2.0, m_bar), sub_up(1.0, exp_down(mul_down(mu_bar, h))));
  return std::min(ttube::detail::root_down(div_down(num, den), p), div_down(1.0, -mu_bar));
}

/// G_0..G_m from G_i = M̄ h̄^{p+1} + G_{i-1} e^{μ̄ h̄}, plain floating point.
[[nodiscard]] inline std::vector<double> g_sequence(double m_bar, double mu_bar, double h_bar, unsigned p, std::size_t m) {
  std::vector<double> g(m + 1, 0.0);
  const double inc = m_bar * std::pow(h_bar, static_cast<double>(p + 1));
  const double grow = std::exp(mu_bar * h_bar);
  for (std::size_t i = 1; i <= m; ++i) g[i] = inc + g[i - 1] * grow;
  return g;
}

/// Closed form of G_i. For μ̄ = 0 this is the limit i·M̄h̄^{p+1}.
[[nodiscard]] inline double g_closed_form(double m_bar, double mu_bar, double h_bar, unsigned p, std::size_t i) {
  const double inc = m_bar * std::pow(h_bar, static_cast<double>(p + 1));
  if (mu_bar == 0.0) return static_cast<double>(i) * inc;
  return inc * std::expm1(static_cast<double>(i) * mu_bar * h_bar) / std::expm1(mu_bar * h_bar);
}

/// Error bounds at the curve nodes over [0, h] when the final step is the
/// remainder h - (m-1)h̄; the last entry bounds the error at time h.
[[nodiscard]] inline std::vector<double> g_sequence_to_horizon(double m_bar, double mu_bar, double h_bar, unsigned p, double h) {
  std::vector<double> g{0.0};
  double t = 0.0;
  while (t < h) {
    const double s = std::min(h_bar, h - t);
    g.push_back(m_bar * std::pow(s, static_cast<double>(p + 1)) + g.back() * std::exp(mu_bar * s));
    t = (h - t <= h_bar) ? h : t + h_bar;
  }
  return g;
}

struct TubeParams {
  unsigned p = 1;
  double delta = 0.0;
  double mu_bar = 0.0;
  double m_bar = 0.0;
  double h_bar = 0.0;
};

/// Interval Horner evaluation of Σ s^j c_j.
[[nodiscard]] inline Box taylor_poly_eval(std::span<const Box> c, const Interval& s) {
  std::vector<Interval> r = c.back().components();
  for (std::size_t j = c.size() - 1; j-- > 0;) {
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = r[k] * s + c[j][k];
  }
  return Box(std::move(r));
}

/// Piecewise Taylor curve with materialized nodes. Nodes are doubles; the
/// rounding committed when stepping from one node to the next is summed in
/// node_slack (Euclidean norm) and added to every tube radius.
struct TaylorCurve {
  Point q0;
  double h_bar = 0.0;
  unsigned p = 1;
  Interval horizon;
  std::vector<Point> nodes;
  std::vector<std::vector<Box>> coeffs;  // coeffs[i][j] encloses f^[j](nodes[i])
  std::vector<Interval> piece_len;
  double node_slack = 0.0;

  [[nodiscard]] std::size_t pieces() const noexcept { return nodes.size(); }
};

/// Builds the curve covering [0, horizon]: full pieces of length h̄, last piece the remainder.
[[nodiscard]] inline TaylorCurve build_taylor_curve(const OdeSystem& sys, std::span<const double> q0, double h_bar,
                                                    unsigned p, const Interval& horizon) {
  if (q0.size() != sys.dim()) throw DimensionMismatch("curve start dimension");
  if (!(h_bar > 0.0) || !std::isfinite(h_bar)) throw InvalidArgument("curve step must be positive and finite");
  if (p < 1) throw InvalidArgument("curve degree must be >= 1");
  if (!(horizon.lo >= 0.0) || !horizon.is_bounded()) throw InvalidArgument("curve horizon must be finite and nonnegative");

  TaylorCurve c;
  c.q0.assign(q0.begin(), q0.end());
  c.h_bar = h_bar;
  c.p = p;
  c.horizon = horizon;

  std::size_t m = 1;
  if (horizon.hi > h_bar) {
    const double q = std::ceil(horizon.hi / h_bar);
    if (q > 1e6) throw InvalidArgument("curve needs too many pieces");
    m = static_cast<std::size_t>(q);
  }
  auto last_len = [&](std::size_t pieces) {
    const Interval before = Interval(static_cast<double>(pieces - 1)) * Interval(h_bar);
    Interval l = horizon - before;
    l.lo = std::max(l.lo, 0.0);
    l.hi = std::max(l.hi, l.lo);
    return l;
  };
  if (m > 1) {
    while (last_len(m).hi > h_bar) ++m;
    while (m > 1 && rounding::mul_down(static_cast<double>(m - 1), h_bar) >= horizon.hi) --m;
  }

  Point q(q0.begin(), q0.end());
  for (std::size_t i = 0; i < m; ++i) {
    auto coeff = taylor_coeffs(sys, Box::point(q), p);
    const Interval len = (m == 1) ? horizon : (i + 1 < m ? Interval(h_bar) : last_len(m));
    c.nodes.push_back(q);
    c.piece_len.push_back(len);
    if (i + 1 < m) {
      const Box next = taylor_poly_eval(coeff, Interval(h_bar));
      Point nq = box_mid(next);
      double sum = 0.0;
      for (std::size_t k = 0; k < nq.size(); ++k) {
        const double e = std::max(rounding::sub_up(next[k].hi, nq[k]), rounding::sub_up(nq[k], next[k].lo));
        sum = rounding::add_up(sum, rounding::mul_up(e, e));
      }
      c.node_slack = rounding::add_up(c.node_slack, rounding::sqrt_up(sum));
      q = std::move(nq);
    }
    c.coeffs.push_back(std::move(coeff));
  }
  return c;
}

/// Enclosure of the curve's value at the (possibly uncertain) time t.
[[nodiscard]] inline Box taylor_curve_enclose(const TaylorCurve& c, const Interval& t) {
  if (t.lo < 0.0 || t.hi > c.horizon.hi) throw NodeRangeExceeded("time outside the materialized curve");
  const std::size_t m = c.pieces();
  std::size_t i = 0;
  if (m > 1) {
    i = static_cast<std::size_t>(std::floor(t.lo / c.h_bar));
    i = std::min(i, m - 1);
  }
  const Interval start = Interval(static_cast<double>(i)) * Interval(c.h_bar);
  Interval s = t - start;
  s.lo = std::max(s.lo, 0.0);
  s.hi = std::max(s.hi, s.lo);
  if (i + 1 < m && s.hi > c.h_bar) throw NodeRangeExceeded("time interval spans two curve pieces");
  return taylor_poly_eval(c.coeffs[i], s);
}

/// Value of the curve at time t (midpoint of the enclosure).
[[nodiscard]] inline Point taylor_curve_eval(const TaylorCurve& c, double t) {
  if (t < 0.0) throw NodeRangeExceeded("negative curve time");
  return box_mid(taylor_curve_enclose(c, Interval(t)));
}

namespace detail {
/// Upper bound of e^{μ t} over t in the interval.
[[nodiscard]] inline double exp_mu_t_up(double mu, const Interval& t) {
  return rounding::exp_up(mu >= 0.0 ? rounding::mul_up(mu, t.hi) : rounding::mul_up(mu, t.lo));
}

inline void check_tube_inputs(const Ball& e0, const Interval& h, const TubeParams& tp, const TaylorCurve& c) {
  if (tp.p < 1 || !(tp.delta > 0.0)) throw InvalidArgument("tube parameters need p >= 1 and delta > 0");
  if (tp.p != c.p || tp.h_bar != c.h_bar) throw InvalidArgument("tube parameters disagree with the curve");
  if (e0.center != c.q0) throw InvalidArgument("curve must start at the ball centre");
  if (!(h == c.horizon)) throw InvalidArgument("curve horizon differs from the step");
  if (!(h.hi > 0.0)) throw InvalidArgument("tube step must be positive");
  if (tp.h_bar > h_taylor(tp.p, h.hi, tp.m_bar, tp.mu_bar, tp.delta)) throw InvalidArgument("mini-step exceeds the tube bound");
}

/// δ plus the node rounding slack propagated to the end of the step.
[[nodiscard]] inline double tube_radius(const Interval& h, const TubeParams& tp, const TaylorCurve& c) {
  const double amp = rounding::exp_up(rounding::mul_up(std::max(tp.mu_bar, 0.0), h.hi));
  return rounding::add_up(tp.delta, rounding::mul_up(c.node_slack, amp));
}
}  // namespace detail

/// Ball around the curve end containing End(E0, h), radius r0 e^{μ̄h} + δ.
[[nodiscard]] inline Ball tube_end_enclosure(const Ball& e0, const Interval& h, const TubeParams& tp, const TaylorCurve& c) {
  detail::check_tube_inputs(e0, h, tp, c);
  const Box end = taylor_curve_enclose(c, h);
  Ball out = box_to_ball(end);
  const double spread = rounding::mul_up(e0.radius, detail::exp_mu_t_up(tp.mu_bar, h));
  out.radius = rounding::add_up(out.radius, rounding::add_up(spread, detail::tube_radius(h, tp, c)));
  return out;
}

/// Box containing Image(E0, h): the curve's range over [0, h] inflated by
/// r = δ + max(r0, r0 e^{μ̄h}).
[[nodiscard]] inline Box tube_full_enclosure(const Ball& e0, const Interval& h, const TubeParams& tp, const TaylorCurve& c) {
  detail::check_tube_inputs(e0, h, tp, c);
  std::optional<Box> hull_box;
  for (std::size_t i = 0; i < c.pieces(); ++i) {
    const Box piece = taylor_poly_eval(c.coeffs[i], Interval(0.0, c.piece_len[i].hi));
    hull_box = hull_box ? box_hull(*hull_box, piece) : piece;
  }
  const double spread = rounding::mul_up(e0.radius, std::max(1.0, detail::exp_mu_t_up(tp.mu_bar, h)));
  const double r = rounding::add_up(spread, detail::tube_radius(h, tp, c));
  return minkowski(*hull_box, centered_box(c.q0.size(), r));
}

/// Sufficient test for Image(q, len) ⊆ F1 given rem ⊇ f^[p+1](F1):
/// T_q([0, len]) + [0, len]^{p+1} rem ⊆ F1.
[[nodiscard]] inline bool check_image_inclusion(std::span<const Box> coeffs, const Interval& len, const Box& rem, const Box& f1) noexcept {
  try {
    const Interval s(0.0, len.hi);
    const Box poly = taylor_poly_eval(coeffs, s);
    const Interval sp = pow_int(s, static_cast<unsigned>(coeffs.size()));
    std::vector<Interval> r(poly.dim());
    for (std::size_t k = 0; k < poly.dim(); ++k) r[k] = poly[k] + sp * rem[k];
    return box_subset(Box(std::move(r)), f1);
  } catch (...) {
    return false;
  }
}

[[nodiscard]] inline bool check_image_inclusion(const OdeSystem& sys, std::span<const double> q, double h_bar, unsigned p,
                                                const Box& f1) noexcept {
  try {
    const auto coeffs = taylor_coeffs(sys, Box::point(q), p);
    const auto rem = taylor_coeffs(sys, f1, p + 1)[p + 1];
    return check_image_inclusion(coeffs, Interval(h_bar), rem, f1);
  } catch (...) {
    return false;
  }
}

/// Inclusion test for every piece of the curve.
[[nodiscard]] inline bool check_curve_inclusion(const TaylorCurve& c, const Box& rem, const Box& f1) noexcept {
  for (std::size_t i = 0; i < c.pieces(); ++i) {
    if (!check_image_inclusion(c.coeffs[i], c.piece_len[i], rem, f1)) return false;
  }
  return true;
}

}  // namespace ttube
