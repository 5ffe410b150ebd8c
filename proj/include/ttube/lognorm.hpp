/**
 * @file lognorm.hpp
 * @brief Upper bounds on the logarithmic 2-norm of interval matrices.
 */
#pragma once

#include <algorithm>
#include <limits>

#include "ttube/errors.hpp"
#include "ttube/interval.hpp"
#include "ttube/jets.hpp"
#include "ttube/system.hpp"

namespace ttube {

/// Bound on sup mu_2(A) over A in a: Gershgorin row bound of the interval
/// symmetric part S = (A + A^T)/2.
[[nodiscard]] inline double lognorm_bound(const IntervalMatrix& a) {
  if (a.rows() != a.cols()) throw NonSquare();
  const std::size_t n = a.rows();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double row = a(i, i).hi;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      // (a_ij + a_ji) / 2; halving is exact
      const Interval s = (a(i, j) + a(j, i)) * Interval(0.5);
      row = rounding::add_up(row, mag(s));
    }
    best = std::max(best, row);
  }
  return n == 0 ? 0.0 : best;
}

[[nodiscard]] inline double lognorm_on_box(const OdeSystem& sys, const Box& b) { return lognorm_bound(jacobian(sys, b)); }

}  // namespace ttube
