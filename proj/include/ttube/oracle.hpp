/**
 * @file oracle.hpp
 * @brief Non-validated high-accuracy reference integrator (Boost.Odeint,
 * adaptive Runge-Kutta-Fehlberg 7(8)). Used only to check enclosures.
 */
#pragma once

#include <boost/numeric/odeint.hpp>
#include <span>
#include <vector>

#include "ttube/interval.hpp"
#include "ttube/system.hpp"

namespace ttube {

inline constexpr double kOracleTolerance = 1e-12;

/// Integrates x' = f(x) from x0 and records the state at each requested time
/// (times must be nondecreasing and >= 0).
[[nodiscard]] inline std::vector<Point> reference_trajectory(const OdeSystem& sys, std::span<const double> x0,
                                                             std::span<const double> times,
                                                             double tol = kOracleTolerance) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  std::vector<double> scratch;
  auto rhs = [&](const State& x, State& dx, double) {
    dx.resize(x.size());
    eval_rhs<double>(sys.tape(), x, dx, scratch);
  };
  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<State>());
  State x(x0.begin(), x0.end());
  double t = 0.0;
  std::vector<Point> out;
  out.reserve(times.size());
  for (double target : times) {
    if (target > t) {
      const double dt0 = std::min(1e-3, target - t);
      odeint::integrate_adaptive(stepper, rhs, x, t, target, dt0);
      t = target;
    }
    out.push_back(x);
  }
  return out;
}

[[nodiscard]] inline Point reference_endpoint(const OdeSystem& sys, std::span<const double> x0, double t,
                                              double tol = kOracleTolerance) {
  const double times[] = {t};
  return reference_trajectory(sys, x0, times, tol).front();
}

}  // namespace ttube
