// Random sampling helpers shared by the test suites.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ttube/interval.hpp"

namespace ttube::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  std::uniform_real_distribution<double> d(lo, hi);
  const double x = d(rng);
  return x < lo ? lo : (x > hi ? hi : x);
}

inline Interval random_interval(Rng& rng, double lo, double hi) {
  double a = uniform(rng, lo, hi), b = uniform(rng, lo, hi);
  if (a > b) std::swap(a, b);
  return {a, b};
}

inline Point sample_point(Rng& rng, const Box& b) {
  Point p(b.dim());
  for (std::size_t i = 0; i < b.dim(); ++i) p[i] = uniform(rng, b[i].lo, b[i].hi);
  return p;
}

/// Corners first, then uniform interior points.
inline std::vector<Point> sample_points(Rng& rng, const Box& b, std::size_t count) {
  std::vector<Point> out;
  const std::size_t n = b.dim();
  for (std::size_t k = 0; k < (std::size_t{1} << n) && out.size() < count; ++k) {
    Point p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = ((k >> i) & 1U) ? b[i].hi : b[i].lo;
    out.push_back(p);
  }
  if (out.size() < count) out.push_back(box_mid(b));
  while (out.size() < count) out.push_back(sample_point(rng, b));
  return out;
}

inline Box random_box(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<Interval> c(n);
  for (auto& x : c) x = random_interval(rng, lo, hi);
  return Box(std::move(c));
}

}  // namespace ttube::testing
