/**
 * @file endcover.hpp
 * @brief End-Cover: scaffolds from sub-boxes of B0 extended to the horizon and
 * refined until each end box is narrower than ε; the end boxes form the cover.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>
#include <vector>

#include "ttube/errors.hpp"
#include "ttube/interval.hpp"
#include "ttube/oracle.hpp"
#include "ttube/scaffold.hpp"
#include "ttube/system.hpp"

namespace ttube {

struct Cover {
  std::vector<Box> boxes;
  std::vector<Box> origins;  // E0 of the scaffold that produced each box
  double epsilon = 0.0;
  double horizon = 0.0;
  SolverStats stats;
};

namespace detail {

/// Drives one scaffold until it finishes or asks for a split.
/// Returns true when the scaffold's end box belongs to the cover.
inline bool advance_scaffold(const SolverContext& ctx, Scaffold& s, double horizon, double eps) {
  for (;;) {
    if (s.m() == 0) {
      s.extend(ctx, horizon);
    } else if (s.width() > eps) {
      if (s.refine(ctx, eps) == RefineStatus::SplitRequested) return false;
    } else if (s.t() < horizon) {
      s.extend(ctx, horizon);
    } else {
      return true;
    }
  }
}

struct CoverEntry {
  std::vector<std::uint32_t> path;
  Box box;
  Box origin;
};

/// LIFO scaffold queue shared by the workers.
class ScaffoldQueue {
 public:
  void push(std::vector<Scaffold> items) {
    {
      std::lock_guard lock(mu_);
      // reversed so child 0 is processed first
      for (auto it = items.rbegin(); it != items.rend(); ++it) stack_.push_back(std::move(*it));
    }
    cv_.notify_all();
  }

  /// Blocks until work is available or every worker is idle with an empty queue.
  bool pop(Scaffold& out) {
    std::unique_lock lock(mu_);
    ++idle_;
    cv_.wait(lock, [&] { return !stack_.empty() || idle_ == workers_ || aborted_; });
    if (aborted_ || stack_.empty()) {
      cv_.notify_all();
      return false;
    }
    --idle_;
    out = std::move(stack_.back());
    stack_.pop_back();
    return true;
  }

  void abort() {
    {
      std::lock_guard lock(mu_);
      aborted_ = true;
    }
    cv_.notify_all();
  }

  void set_workers(unsigned w) { workers_ = w; }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<Scaffold> stack_;
  unsigned idle_ = 0;
  unsigned workers_ = 1;
  bool aborted_ = false;
};

}  // namespace detail

/// ε-cover of End(B0, H). Throws StepFailure when a stage cannot be validated
/// and ResourceLimit when the configured limits are exceeded.
[[nodiscard]] inline Cover end_cover(const OdeSystem& sys, const Box& b0, double horizon, double eps,
                                     const SolverConfig& cfg = {}) {
  cfg.validate();
  if (b0.dim() != sys.dim()) throw DimensionMismatch("initial box dimension");
  if (!b0.is_bounded()) throw InvalidArgument("initial box must be bounded");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be positive and finite");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("epsilon must be positive and finite");

  const auto start = std::chrono::steady_clock::now();
  detail::ScaffoldQueue queue;
  queue.set_workers(cfg.workers);
  queue.push({Scaffold(b0)});

  std::mutex sink_mu;
  std::vector<detail::CoverEntry> entries;
  SolverStats total;
  total.scaffolds = 1;
  std::exception_ptr failure;

  auto worker = [&] {
    SolverStats local;
    SolverContext ctx{sys, cfg, local};
    Scaffold s;
    try {
      while (queue.pop(s)) {
        if (detail::advance_scaffold(ctx, s, horizon, eps)) {
          std::lock_guard lock(sink_mu);
          entries.push_back({s.path(), s.end_box(), s.e0()});
          continue;
        }
        auto children = s.split();
        {
          std::lock_guard lock(sink_mu);
          ++total.splits;
          total.scaffolds += children.size();
          if (total.scaffolds > cfg.max_scaffolds) throw ResourceLimit("scaffold limit exceeded");
        }
        queue.push(std::move(children));
      }
    } catch (...) {
      std::lock_guard lock(sink_mu);
      if (!failure) failure = std::current_exception();
      queue.abort();
    }
    std::lock_guard lock(sink_mu);
    local.scaffolds = 0;
    local.splits = 0;
    total.merge(local);
  };

  if (cfg.workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < cfg.workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  Cover cover;
  cover.epsilon = eps;
  cover.horizon = horizon;
  for (auto& e : entries) {
    cover.boxes.push_back(std::move(e.box));
    cover.origins.push_back(std::move(e.origin));
  }
  total.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  cover.stats = total;
  return cover;
}

struct CoverReport {
  std::size_t samples = 0;
  std::size_t contained = 0;         // within the oracle slack of some box
  std::size_t contained_strict = 0;  // inside some box as printed
  double fraction = 0.0;
  double max_center_distance = 0.0;  // max over boxes of the distance from its centre to the nearest endpoint
  double max_width = 0.0;
};

/// The reference integrator's own global error (about 1e-12 per unit of
/// state) can exceed the slack of a tight enclosure, so endpoints are tested
/// against boxes widened by this much, relative to max(1, |y_i|).
inline constexpr double kOracleSlack = 1e-9;

/// Integrates sampled initial points (corners, centre, then uniform) with the
/// reference integrator and checks each endpoint lies in some cover box.
[[nodiscard]] inline CoverReport verify_cover(const OdeSystem& sys, const Box& b0, double horizon, const Cover& cover,
                                              std::size_t samples, std::uint64_t seed = 1) {
  CoverReport rep;
  const std::size_t n = b0.dim();
  std::mt19937_64 rng(seed);
  std::vector<Point> starts;
  const std::size_t corners = n < 16 ? (std::size_t{1} << n) : 0;
  for (std::size_t c = 0; c < corners && starts.size() < samples; ++c) {
    Point x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (c >> i) & 1U ? b0[i].hi : b0[i].lo;
    starts.push_back(std::move(x));
  }
  if (starts.size() < samples) starts.push_back(box_mid(b0));
  while (starts.size() < samples) {
    Point x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::uniform_real_distribution<double>(b0[i].lo, b0[i].hi)(rng);
    starts.push_back(std::move(x));
  }

  std::vector<Point> ends;
  ends.reserve(starts.size());
  for (const auto& x : starts) {
    Point y = reference_endpoint(sys, x, horizon);
    ++rep.samples;
    auto near = [&](const Box& b) {
      for (std::size_t i = 0; i < n; ++i) {
        const double tol = kOracleSlack * std::max(1.0, std::abs(y[i]));
        if (!(y[i] >= b[i].lo - tol && y[i] <= b[i].hi + tol)) return false;
      }
      return true;
    };
    if (std::any_of(cover.boxes.begin(), cover.boxes.end(), [&](const Box& b) { return box_contains(b, y); })) {
      ++rep.contained_strict;
    }
    if (std::any_of(cover.boxes.begin(), cover.boxes.end(), near)) ++rep.contained;
    ends.push_back(std::move(y));
  }
  rep.fraction = rep.samples == 0 ? 1.0 : static_cast<double>(rep.contained) / static_cast<double>(rep.samples);
  for (const auto& b : cover.boxes) {
    rep.max_width = std::max(rep.max_width, box_width_max(b));
    const Point c = box_mid(b);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : ends) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) d2 += (c[i] - y[i]) * (c[i] - y[i]);
      best = std::min(best, std::sqrt(d2));
    }
    rep.max_center_distance = std::max(rep.max_center_distance, best);
  }
  return rep;
}

inline void write_stats_footer(std::ostream& os, const SolverStats& s) {
  os << "# scaffolds=" << s.scaffolds << '\n'
     << "# step_a_calls=" << s.step_a_calls << '\n'
     << "# step_b_calls=" << s.step_b_calls << '\n'
     << "# tube_calls=" << s.tube_calls << '\n'
     << "# tube_fallbacks=" << s.tube_fallbacks << '\n'
     << "# bisect_calls=" << s.bisect_calls << '\n'
     << "# phases=" << s.phases << '\n'
     << "# splits=" << s.splits << '\n'
     << "# forced_splits=" << s.forced_splits << '\n'
     << "# wall_seconds=" << s.wall_seconds << '\n';
}

/// CSV: box_index, lo_1, hi_1, ..., lo_n, hi_n, then the stats footer.
inline void write_cover_csv(std::ostream& os, const Cover& cover) {
  const std::size_t n = cover.boxes.empty() ? 0 : cover.boxes.front().dim();
  os << "box_index";
  for (std::size_t i = 1; i <= n; ++i) os << ",lo_" << i << ",hi_" << i;
  os << '\n';
  const auto old_prec = os.precision(17);
  for (std::size_t b = 0; b < cover.boxes.size(); ++b) {
    os << b;
    for (std::size_t i = 0; i < n; ++i) os << ',' << cover.boxes[b][i].lo << ',' << cover.boxes[b][i].hi;
    os << '\n';
  }
  os.precision(old_prec);
  os << "# boxes=" << cover.boxes.size() << '\n' << "# epsilon=" << cover.epsilon << '\n' << "# horizon=" << cover.horizon << '\n';
  write_stats_footer(os, cover.stats);
}

}  // namespace ttube
