/**
 * @file experiments.hpp
 * @brief The two experiment families: the one-step enclosure comparison σ and
 * the End-Cover table over Taylor degrees.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ttube/endcover.hpp"
#include "ttube/jets.hpp"
#include "ttube/lognorm.hpp"
#include "ttube/problems.hpp"
#include "ttube/stepper.hpp"
#include "ttube/tube.hpp"

namespace ttube {

/// Tube degree used for a given Taylor order k: p = k - 1, and p = 1 for k = 1.
[[nodiscard]] inline unsigned tube_degree_for_order(unsigned order) { return order <= 2 ? 1U : order - 1; }

struct SigmaRow {
  std::string problem;
  double delta = 0.0;
  unsigned order = 0;
  unsigned p = 0;
  double horizon = 0.0;  // H of the triple (E0, H, F1)
  double h_bar = 0.0;
  double mu_bar = 0.0;
  double m_bar = 0.0;
  double sigma = 1.0;
  bool tube_applied = false;
  bool f1_admissible = true;  // E0 + [0,H] f(F1) ⊆ F1
};

/// vol(a) / vol(b) for b ⊆ a, as a product of per-axis ratios. Degenerate axes
/// shared by both boxes count as 1.
[[nodiscard]] inline double volume_ratio(const Box& a, const Box& b) {
  double r = 1.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double wa = width(a[i]), wb = width(b[i]);
    if (wa == wb) continue;
    r *= wb == 0.0 ? std::numeric_limits<double>::infinity() : wa / wb;
  }
  return r;
}

[[nodiscard]] inline bool picard_contained(const OdeSystem& sys, const Box& e0, double h, const Box& f1) {
  try {
    return box_subset(detail::picard_image(e0, h, eval_rhs(sys, f1)), f1);
  } catch (const Error&) {
    return false;
  }
}

/// One σ comparison on the triple (E0, H, F1).
[[nodiscard]] inline SigmaRow sigma_row(const OdeSystem& sys, const Box& e0, double horizon, const Box& f1, double delta,
                                        unsigned order) {
  if (order < 1) throw InvalidArgument("order must be at least 1");
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  SigmaRow row;
  row.problem = sys.name();
  row.delta = delta;
  row.order = order;
  row.p = tube_degree_for_order(order);
  row.horizon = horizon;
  row.f1_admissible = picard_contained(sys, e0, horizon, f1);
  row.mu_bar = lognorm_on_box(sys, f1);
  row.m_bar = norm_bound_coeff(sys, f1, row.p);
  row.h_bar = std::min(horizon, h_taylor(row.p, horizon, row.m_bar, row.mu_bar, delta));

  const Interval h(row.h_bar);
  const DirectData d = prepare_direct(sys, e0, f1, order);
  const Box plain = direct_terms(d, Interval(0.0, row.h_bar)).sum();
  const TubeParams tp{row.p, delta, row.mu_bar, row.m_bar, row.h_bar};
  const TaylorCurve curve = build_taylor_curve(sys, box_mid(e0), row.h_bar, row.p, h);
  const Box rem = row.p + 1 == d.k ? d.fk : taylor_coeffs(sys, f1, row.p + 1)[row.p + 1];
  const E1Result e1 = e1_combined(d, e0, h, Span::Whole, f1, tp, curve, rem);
  row.tube_applied = e1.tube_applied;
  row.sigma = volume_ratio(plain, e1.box);
  return row;
}

struct SigmaSpec {
  Problem problem;
  double horizon = 0.1;
  std::vector<double> deltas{0.1, 0.01, 0.001};
  std::vector<unsigned> orders{1, 3, 7, 20};
  std::optional<Box> fixed_f1;  // replaces StepA's F1 when set
};

/// Rows sorted by δ descending, then order ascending.
[[nodiscard]] inline std::vector<SigmaRow> run_sigma_experiment(const SigmaSpec& spec) {
  if (spec.deltas.empty() || spec.orders.empty()) throw InvalidArgument("sigma grid is empty");
  const OdeSystem& sys = spec.problem.system;
  const Box& e0 = spec.problem.initial_box;
  double horizon = spec.horizon;
  Box f1;
  if (spec.fixed_f1) {
    if (spec.fixed_f1->dim() != sys.dim()) throw DimensionMismatch("fixed F1 dimension");
    f1 = *spec.fixed_f1;
  } else {
    const StepAResult a = step_a(sys, e0, horizon);
    horizon = a.h;
    f1 = a.f;
  }
  std::vector<double> deltas = spec.deltas;
  std::vector<unsigned> orders = spec.orders;
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  std::sort(orders.begin(), orders.end());
  std::vector<SigmaRow> rows;
  for (double delta : deltas) {
    for (unsigned order : orders) rows.push_back(sigma_row(sys, e0, horizon, f1, delta, order));
  }
  return rows;
}

inline void write_sigma_csv(std::ostream& os, const std::vector<SigmaRow>& rows) {
  os << "problem,delta,order,p,H,h_bar,mu_bar,M_bar,sigma,tube_applied,f1_admissible\n";
  const auto old_prec = os.precision(10);
  for (const auto& r : rows) {
    os << r.problem << ',' << r.delta << ',' << r.order << ',' << r.p << ',' << r.horizon << ',' << r.h_bar << ','
       << r.mu_bar << ',' << r.m_bar << ',' << r.sigma << ',' << (r.tube_applied ? 1 : 0) << ','
       << (r.f1_admissible ? 1 : 0) << '\n';
  }
  os.precision(old_prec);
}

struct CoverConfig {
  unsigned degree = 19;
  bool bisect = true;
  bool tube = true;
};

/// Degrees 1, 3, 5, 7, 19 without and with Bisect, then degree 19 without the tube.
[[nodiscard]] inline std::vector<CoverConfig> default_cover_grid() {
  std::vector<CoverConfig> grid;
  for (unsigned deg : {1U, 3U, 5U, 7U, 19U}) {
    grid.push_back({deg, false, true});
    grid.push_back({deg, true, true});
  }
  grid.push_back({19, true, false});
  return grid;
}

struct CoverRow {
  std::string problem;
  double horizon = 0.0;
  double epsilon = 0.0;
  CoverConfig config;
  std::size_t cover_size = 0;
  SolverStats stats;
  std::string status = "ok";  // or the failure message
};

inline void write_cover_header(std::ostream& os) {
  os << "problem,T,epsilon,degree,bisect,tube,cover_size,step_b_calls,tube_calls,bisect_calls,wall_seconds,status\n";
}

inline void write_cover_row(std::ostream& os, const CoverRow& r) {
  std::string status = r.status;
  std::replace(status.begin(), status.end(), ',', ';');
  os << r.problem << ',' << r.horizon << ',' << r.epsilon << ',' << r.config.degree << ',' << (r.config.bisect ? 1 : 0)
     << ',' << (r.config.tube ? 1 : 0) << ',' << r.cover_size << ',' << r.stats.step_b_calls << ',' << r.stats.tube_calls
     << ',' << r.stats.bisect_calls << ',' << r.stats.wall_seconds << ',' << status << '\n';
}

/// Runs every configuration; rows are streamed to `sink` (when given) as they
/// finish. A StepFailure or ResourceLimit ends the run after flushing the
/// failed row, and is rethrown.
[[nodiscard]] inline std::vector<CoverRow> run_cover_experiment(const Problem& problem, double horizon, double eps,
                                                                const std::vector<CoverConfig>& grid, SolverConfig base,
                                                                std::ostream* sink = nullptr) {
  if (grid.empty()) throw InvalidArgument("cover grid is empty");
  if (sink) write_cover_header(*sink);
  std::vector<CoverRow> rows;
  for (const auto& c : grid) {
    SolverConfig cfg = base;
    cfg.degree = c.degree;
    cfg.bisect = c.bisect;
    cfg.tube = c.tube;
    CoverRow row{problem.system.name(), horizon, eps, c};
    try {
      const Cover cover = end_cover(problem.system, problem.initial_box, horizon, eps, cfg);
      row.cover_size = cover.boxes.size();
      row.stats = cover.stats;
    } catch (const Error& e) {
      row.status = e.what();
      rows.push_back(row);
      if (sink) {
        write_cover_row(*sink, row);
        sink->flush();
      }
      throw;
    }
    rows.push_back(row);
    if (sink) {
      write_cover_row(*sink, row);
      sink->flush();
    }
  }
  return rows;
}

}  // namespace ttube
