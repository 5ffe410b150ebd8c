/**
 * @file scaffold.hpp
 * @brief Scaffolds: chains of admissible quads from an initial box, with
 * per-stage mini-scaffolds refined by bisection or by the Taylor tube.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ttube/errors.hpp"
#include "ttube/interval.hpp"
#include "ttube/jets.hpp"
#include "ttube/lognorm.hpp"
#include "ttube/stepper.hpp"
#include "ttube/system.hpp"
#include "ttube/tube.hpp"

namespace ttube {

/// When Refine gives up on a scaffold and asks for its initial box to be split.
enum class SplitRule : std::uint8_t {
  LogNorm,   // r·e^{μmax·t} > ε/2, checked after every phase
  Progress,  // only when refinement stops making progress
};

struct SolverConfig {
  unsigned degree = 19;  // Taylor curve degree p
  unsigned order = 20;   // Direct order k
  bool bisect = true;
  bool tube = true;
  double delta_fraction = 0.1;
  double delta_floor = 0x1p-40;
  unsigned max_level = 8;  // mini-scaffold levels per stage
  unsigned max_phases = 64;
  unsigned stall_phases = 2;        // consecutive phases below stall_improvement
  double stall_improvement = 0.01;  // relative width decrease counted as progress
  SplitRule split_rule = SplitRule::LogNorm;
  std::size_t max_scaffolds = 1'000'000;
  std::size_t max_steps = 200'000'000;  // Direct evaluations
  double min_step_fraction = 1e-10;     // of the horizon; smaller StepA steps signal a blow-up
  unsigned workers = 1;

  void validate() const {
    if (degree < 1) throw InvalidArgument("degree must be >= 1");
    if (order < 1) throw InvalidArgument("order must be >= 1");
    if (!(delta_fraction > 0.0)) throw InvalidArgument("delta fraction must be positive");
    if (!(delta_floor > 0.0)) throw InvalidArgument("delta floor must be positive");
    if (max_phases < 1) throw InvalidArgument("max_phases must be >= 1");
    if (workers < 1) throw InvalidArgument("workers must be >= 1");
    if (!(min_step_fraction >= 0.0 && min_step_fraction < 1.0)) throw InvalidArgument("min_step_fraction must lie in [0, 1)");
  }
};

struct SolverStats {
  std::size_t scaffolds = 0;
  std::size_t step_a_calls = 0;
  std::size_t step_b_calls = 0;  // Direct evaluations, including those under the tube
  std::size_t tube_calls = 0;    // mini-steps tightened by the tube
  std::size_t tube_fallbacks = 0;
  std::size_t bisect_calls = 0;
  std::size_t phases = 0;
  std::size_t splits = 0;
  std::size_t forced_splits = 0;  // splits not triggered by the criterion
  double wall_seconds = 0.0;

  void merge(const SolverStats& o) {
    scaffolds += o.scaffolds;
    step_a_calls += o.step_a_calls;
    step_b_calls += o.step_b_calls;
    tube_calls += o.tube_calls;
    tube_fallbacks += o.tube_fallbacks;
    bisect_calls += o.bisect_calls;
    phases += o.phases;
    splits += o.splits;
    forced_splits += o.forced_splits;
  }
};

struct SolverContext {
  const OdeSystem& sys;
  const SolverConfig& cfg;
  SolverStats& stats;
};

/// Stage refinement state: 2^level uniform mini-steps over [t_start, t_end].
struct MiniScaffold {
  unsigned level = 0;
  std::vector<Box> e;  // 2^level + 1 boxes; e[0] is the stage's start box
  std::vector<Box> f;  // 2^level full enclosures
  std::vector<double> mu;     // log-norm bound on f[j]
  std::vector<double> m_bar;  // bound on ‖f^[p+1](f[j])‖
  double mu_bar = 0.0;
  double delta = 0.0;
  double h_taylor = 0.0;
};

struct Stage {
  double t_start = 0.0;
  double t_end = 0.0;
  MiniScaffold mini;
  bool saturated = false;         // last refinement changed nothing measurable
  bool bisect_exhausted = false;  // last bisection did not help

  /// Encloses t_end - t_start.
  [[nodiscard]] Interval step() const {
    return Interval(rounding::sub_down(t_end, t_start), rounding::sub_up(t_end, t_start));
  }
  [[nodiscard]] Interval mini_step() const {
    const Interval s = step();
    const int l = -static_cast<int>(mini.level);
    return Interval(std::ldexp(s.lo, l), std::ldexp(s.hi, l));
  }
  [[nodiscard]] const Box& e_prev() const { return mini.e.front(); }
  [[nodiscard]] const Box& e_next() const { return mini.e.back(); }
  [[nodiscard]] Box full() const {
    Box h = mini.f.front();
    for (std::size_t j = 1; j < mini.f.size(); ++j) h = box_hull(h, mini.f[j]);
    return h;
  }
  [[nodiscard]] Quad quad() const { return {e_prev(), t_end - t_start, full(), e_next()}; }
};

enum class RefineStatus : std::uint8_t { Satisfied, SplitRequested };

class Scaffold {
 public:
  Scaffold() = default;
  explicit Scaffold(Box e0) : e0_(std::move(e0)) {}

  [[nodiscard]] const Box& e0() const noexcept { return e0_; }
  [[nodiscard]] double t() const noexcept { return stages_.empty() ? 0.0 : stages_.back().t_end; }
  [[nodiscard]] std::size_t m() const noexcept { return stages_.size(); }
  [[nodiscard]] const Box& end_box() const noexcept { return stages_.empty() ? e0_ : stages_.back().e_next(); }
  [[nodiscard]] const std::vector<Stage>& stages() const noexcept { return stages_; }
  [[nodiscard]] double width() const { return box_width_max(end_box()); }
  /// Child indices from the root scaffold, used to order cover output.
  [[nodiscard]] const std::vector<std::uint32_t>& path() const noexcept { return path_; }

  /// Largest stored log-norm bound over all mini-scaffolds.
  [[nodiscard]] double mu_max() const {
    double mu = -std::numeric_limits<double>::infinity();
    for (const auto& s : stages_) mu = std::max(mu, s.mini.mu_bar);
    return mu;
  }

  /// r·e^{μmax·t} > ε/2 with r = width_max(E0).
  [[nodiscard]] bool split_criterion(double eps) const {
    if (stages_.empty()) return false;
    const double r = box_width_max(e0_);
    return rounding::mul_up(r, rounding::exp_up(rounding::mul_up(mu_max(), t()))) > eps * 0.5;
  }

  /// Appends one stage towards the horizon.
  void extend(const SolverContext& ctx, double horizon) {
    const double t0 = t();
    if (!(t0 < horizon)) throw InvalidArgument("extend: scaffold already reached the horizon");
    const Box start = end_box();
    const double h_req = rounding::sub_up(horizon, t0);
    StepAResult a;
    try {
      a = step_a(ctx.sys, start, h_req, t0);
    } catch (const StepFailure& e) {
      throw StepFailure(std::string(e.what()) + "; scaffold initial box " + to_string(e0_), t0);
    }
    ++ctx.stats.step_a_calls;
    if (a.h < ctx.cfg.min_step_fraction * horizon) {
      throw StepFailure("step size collapsed to " + std::to_string(a.h) + " (solution may blow up); scaffold initial box " +
                            to_string(e0_),
                        t0);
    }
    // the real step t1 - t0 must not exceed the validated h
    const double t1 = a.h == h_req ? horizon : std::min(horizon, rounding::add_down(t0, a.h));
    if (!(t1 > t0)) throw StepFailure("step below time resolution; scaffold initial box " + to_string(e0_), t0);

    Stage s;
    s.t_start = t0;
    s.t_end = t1;
    s.mini.e = {start, start};
    s.mini.f = {a.f};
    const Interval h = s.step();
    const DirectData d = direct_data(ctx, start, a.f);
    const Box f = detail::intersect_or_throw(a.f, direct_terms(d, Interval(0.0, h.hi)).sum(), "extend: full enclosure");
    s.mini.f[0] = f;
    s.mini.e[1] = detail::intersect_or_throw(direct_terms(d, h).sum(), f, "extend: end enclosure");
    stages_.push_back(std::move(s));
    finalize(ctx, stages_.back());
  }

  /// One refinement of stage i (0-based): tube, bisection, or a Direct re-run.
  /// A saturated stage whose start box is unchanged would reproduce itself and
  /// is skipped.
  void refine_stage(const SolverContext& ctx, std::size_t i) {
    Stage& s = stages_.at(i);
    const Box& start = i == 0 ? e0_ : stages_[i - 1].e_next();
    if (s.saturated && start == s.e_prev()) return;
    s.mini.e.front() = start;
    const double we = box_width_max(s.e_next()), wf = box_width_max(s.full());
    const double keep = 1.0 - ctx.cfg.stall_improvement;
    auto improved = [&] { return box_width_max(s.e_next()) < we * keep || box_width_max(s.full()) < wf * keep; };
    if (ctx.cfg.tube && s.mini_step().hi <= s.mini.h_taylor) {
      taylor_tube_stage(ctx, i);
    } else if (ctx.cfg.bisect && s.mini.level < ctx.cfg.max_level && !s.bisect_exhausted) {
      // Finer mini-steps can lose more to wrapping than they gain, so the
      // bisection is judged against a Direct re-run at the current level and
      // undone (keeping the tighter end box) unless it wins.
      direct_stage(ctx, i);
      const double base_width = box_width_max(s.e_next());
      MiniScaffold base = s.mini;
      if (bisect_stage(ctx, i) && !(box_width_max(s.e_next()) < base_width * keep)) {
        Box end = detail::intersect_or_throw(s.e_next(), base.e.back(), "bisect: revert");
        s.mini = std::move(base);
        s.mini.e.back() = std::move(end);
        s.bisect_exhausted = true;
        finalize(ctx, s);
      }
    } else {
      direct_stage(ctx, i);
    }
    s.saturated = !improved();
  }

  /// Doubles the stage's mini-steps. Every mini-quad keeps F enclosing the image
  /// of its whole start box, which the tube relies on for the box centre.
  /// Returns false when an odd half could not be validated and the stage was
  /// refined by Direct instead.
  bool bisect_stage(const SolverContext& ctx, std::size_t i) {
    Stage& s = stages_.at(i);
    s.mini.e.front() = i == 0 ? e0_ : stages_[i - 1].e_next();
    ++ctx.stats.bisect_calls;
    const MiniScaffold old = s.mini;
    const std::size_t count = old.f.size();
    s.mini.level = old.level + 1;
    const Interval h = s.mini_step();
    s.mini.e.assign(2 * count + 1, Box{});
    s.mini.f.assign(2 * count, Box{});
    s.mini.e[0] = old.e[0];
    for (std::size_t j = 0; j < 2 * count; ++j) {
      const Box& parent_f = old.f[j / 2];
      const Box& e = s.mini.e[j];
      // An even half starts inside the parent's start box, so the parent's F
      // stays valid for it. An odd half starts from a computed mid box whose
      // points need not be reachable: it gets a validated enclosure of its own.
      Box f = parent_f;
      auto fresh = picard_enclosure(ctx.sys, e, h.hi, &parent_f);
      if (j % 2 == 0) {
        if (fresh) {
          if (auto both = box_intersect(*fresh, parent_f)) f = std::move(*both);
        }
      } else if (fresh) {
        f = std::move(*fresh);
      } else {
        s.mini = old;
        direct_stage(ctx, i);
        return false;
      }
      const DirectData d = direct_data(ctx, e, f);
      f = detail::intersect_or_throw(f, direct_terms(d, Interval(0.0, h.hi)).sum(), "bisect: full enclosure");
      Box next = detail::intersect_or_throw(direct_terms(d, h).sum(), f, "bisect: end enclosure");
      if (j % 2 == 1) next = detail::intersect_or_throw(next, old.e[j / 2 + 1], "bisect: end versus old");
      s.mini.f[j] = std::move(f);
      s.mini.e[j + 1] = std::move(next);
    }
    finalize(ctx, s);
    return true;
  }

  /// Tube-tightened enclosures on every mini-step (falls back to Direct per mini-step).
  void taylor_tube_stage(const SolverContext& ctx, std::size_t i) {
    Stage& s = stages_.at(i);
    s.mini.e.front() = i == 0 ? e0_ : stages_[i - 1].e_next();
    const Interval h = s.mini_step();
    const unsigned p = ctx.cfg.degree;
    for (std::size_t j = 0; j < s.mini.f.size(); ++j) {
      const Box e = s.mini.e[j];
      const Box& f = s.mini.f[j];
      const DirectData d = direct_data(ctx, e, f);
      const Box rem = p + 1 == d.k ? d.fk : taylor_coeffs(ctx.sys, f, p + 1)[p + 1];
      const TubeParams tp{p, s.mini.delta, s.mini.mu[j], s.mini.m_bar[j], h.hi};
      const TaylorCurve curve = build_taylor_curve(ctx.sys, box_mid(e), h.hi, p, h);
      const E1Result whole = e1_combined(d, e, h, Span::Whole, f, tp, curve, rem);
      const E1Result end = e1_combined(d, e, h, Span::End, f, tp, curve, rem);
      if (whole.tube_applied && end.tube_applied) {
        ++ctx.stats.tube_calls;
      } else {
        ++ctx.stats.tube_fallbacks;
      }
      Box nf = detail::intersect_or_throw(f, whole.box, "tube: full enclosure");
      Box ne = detail::intersect_or_throw(end.box, nf, "tube: end enclosure");
      s.mini.e[j + 1] = detail::intersect_or_throw(ne, s.mini.e[j + 1], "tube: end versus old");
      s.mini.f[j] = std::move(nf);
    }
    finalize(ctx, s);
  }

  /// Re-runs Direct on the current mini-steps from the current start box.
  void direct_stage(const SolverContext& ctx, std::size_t i) {
    Stage& s = stages_.at(i);
    s.mini.e.front() = i == 0 ? e0_ : stages_[i - 1].e_next();
    const Interval h = s.mini_step();
    for (std::size_t j = 0; j < s.mini.f.size(); ++j) {
      const DirectData d = direct_data(ctx, s.mini.e[j], s.mini.f[j]);
      Box nf = detail::intersect_or_throw(s.mini.f[j], direct_terms(d, Interval(0.0, h.hi)).sum(), "direct: full");
      Box ne = detail::intersect_or_throw(direct_terms(d, h).sum(), nf, "direct: end");
      s.mini.e[j + 1] = detail::intersect_or_throw(ne, s.mini.e[j + 1], "direct: end versus old");
      s.mini.f[j] = std::move(nf);
    }
    finalize(ctx, s);
  }

  /// Phases of refine_stage over all stages until width(E_m) <= ε, or a split request.
  RefineStatus refine(const SolverContext& ctx, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("refine: epsilon must be positive");
    if (width() <= eps) return RefineStatus::Satisfied;
    double prev = width();
    unsigned stalled = 0;
    for (unsigned phase = 0; phase < ctx.cfg.max_phases; ++phase) {
      for (std::size_t i = 0; i < stages_.size(); ++i) refine_stage(ctx, i);
      ++ctx.stats.phases;
      const double w = width();
      if (w <= eps) return RefineStatus::Satisfied;
      if (ctx.cfg.split_rule == SplitRule::LogNorm && split_criterion(eps)) return RefineStatus::SplitRequested;
      if (!can_still_refine()) break;
      if (w > prev * (1.0 - ctx.cfg.stall_improvement)) {
        if (++stalled >= ctx.cfg.stall_phases) break;
      } else {
        stalled = 0;
      }
      prev = w;
    }
    ++ctx.stats.forced_splits;
    return RefineStatus::SplitRequested;
  }

  /// 2^n children, one per sub-box of E0, inheriting every stage.
  /// Throws StepFailure when E0 is already too narrow to halve, since
  /// splitting could then go on forever.
  [[nodiscard]] std::vector<Scaffold> split() const {
    bool splittable = false;
    for (std::size_t i = 0; i < e0_.dim(); ++i) {
      const double m = mid(e0_[i]);
      splittable = splittable || (e0_[i].lo < m && m < e0_[i].hi);
    }
    if (!splittable) {
      throw StepFailure("initial box " + to_string(e0_) + " cannot be split further; epsilon unreachable", t());
    }
    std::vector<Scaffold> out;
    const auto parts = split_box(e0_);
    out.reserve(parts.size());
    for (std::size_t c = 0; c < parts.size(); ++c) {
      Scaffold child = *this;
      child.e0_ = parts[c];
      for (auto& st : child.stages_) st.saturated = st.bisect_exhausted = false;
      child.path_.push_back(static_cast<std::uint32_t>(c));
      out.push_back(std::move(child));
    }
    return out;
  }

  /// Line-oriented stage listing.
  void dump(std::ostream& os) const {
    os << "scaffold m=" << m() << " t=" << t() << " E0=" << to_string(e0_) << '\n';
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      const Stage& s = stages_[i];
      os << "stage " << i + 1 << " t=" << s.t_end << " level=" << s.mini.level << " mu_bar=" << s.mini.mu_bar
         << " delta=" << s.mini.delta << " h_taylor=" << s.mini.h_taylor << " E=" << to_string(s.e_next())
         << " F=" << to_string(s.full()) << '\n';
    }
  }

 private:
  [[nodiscard]] DirectData direct_data(const SolverContext& ctx, const Box& e, const Box& f) const {
    ++ctx.stats.step_b_calls;
    if (ctx.stats.step_b_calls > ctx.cfg.max_steps) throw ResourceLimit("Direct evaluation limit exceeded");
    return prepare_direct(ctx.sys, e, f, ctx.cfg.order);
  }

  /// True while some stage may still change under further phases.
  [[nodiscard]] bool can_still_refine() const {
    return std::any_of(stages_.begin(), stages_.end(), [](const Stage& s) { return !s.saturated; });
  }

  /// Recomputes μ̄, M̄, δ and h_taylor from the current boxes.
  static void finalize(const SolverContext& ctx, Stage& s) {
    MiniScaffold& ms = s.mini;
    const std::size_t count = ms.f.size();
    ms.mu.resize(count);
    ms.m_bar.resize(count);
    ms.delta = std::max(rounding::mul_down(ctx.cfg.delta_fraction, box_width_max(s.e_next())), ctx.cfg.delta_floor);
    const double h = s.mini_step().hi;
    ms.mu_bar = -std::numeric_limits<double>::infinity();
    ms.h_taylor = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) {
      ms.mu[j] = lognorm_on_box(ctx.sys, ms.f[j]);
      ms.mu_bar = std::max(ms.mu_bar, ms.mu[j]);
      if (!ctx.cfg.tube) continue;
      ms.m_bar[j] = norm_bound_coeff(ctx.sys, ms.f[j], ctx.cfg.degree);
      if (!std::isfinite(ms.m_bar[j]) || !std::isfinite(ms.mu[j]) || !(h > 0.0)) {
        ms.h_taylor = 0.0;
        continue;
      }
      ms.h_taylor = std::min(ms.h_taylor, h_taylor(ctx.cfg.degree, h, ms.m_bar[j], ms.mu[j], ms.delta));
    }
    if (!ctx.cfg.tube) ms.h_taylor = 0.0;
  }

  Box e0_;
  std::vector<Stage> stages_;
  std::vector<std::uint32_t> path_;
};

}  // namespace ttube
