// ttube: end-covers of IVPs with Taylor tubes, plus the two experiment tables.
//
// Exit status: 0 success, 1 solver failure, 2 usage error.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ttube/oracle.hpp"
#include "ttube/ttube.hpp"

namespace {

constexpr int kExitSolver = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string problem;
  std::optional<double> horizon;
  std::optional<double> epsilon;
  unsigned degree = 19;
  unsigned order = 20;
  bool no_bisect = false;
  bool no_tube = false;
  double delta_frac = 0.1;
  std::string experiment;
  std::string out;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::size_t samples = 1000;
  std::string fixed_f1;
};

ttube::Problem load_problem(const std::string& spec) {
  if (auto p = ttube::find_builtin_problem(spec)) return std::move(*p);
  if (std::filesystem::is_regular_file(spec)) return ttube::load_problem_file(spec);
  std::string msg = "unknown problem '" + spec + "' (not a file); built-ins:";
  for (const auto& n : ttube::builtin_problem_names()) msg += " " + n;
  throw UsageError(msg);
}

/// "lo1,hi1,lo2,hi2,..." into a box of dimension n.
ttube::Box parse_box(const std::string& text, std::size_t n) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("--fixed-f1: not a number: '" + tok + "'");
    }
  }
  if (v.size() != 2 * n) throw UsageError("--fixed-f1 needs " + std::to_string(2 * n) + " values (lo,hi per axis)");
  std::vector<ttube::Interval> c;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(v[2 * i] <= v[2 * i + 1])) throw UsageError("--fixed-f1: lo > hi on axis " + std::to_string(i + 1));
    c.emplace_back(v[2 * i], v[2 * i + 1]);
  }
  return ttube::Box(std::move(c));
}

/// Output stream: the --out file, or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw UsageError("cannot open output file '" + path + "'");
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

ttube::SolverConfig solver_config(const Options& o) {
  ttube::SolverConfig cfg;
  cfg.degree = o.degree;
  cfg.order = o.order;
  cfg.bisect = !o.no_bisect;
  cfg.tube = !o.no_tube;
  cfg.delta_fraction = o.delta_frac;
  cfg.workers = o.workers;
  return cfg;
}

int run_single(const Options& o, const ttube::Problem& p, const ttube::ProblemDefaults& d) {
  const double horizon = o.horizon.value_or(d.cover_horizon);
  const double eps = o.epsilon.value_or(d.cover_epsilon);
  const ttube::Cover cover = ttube::end_cover(p.system, p.initial_box, horizon, eps, solver_config(o));
  const ttube::CoverReport rep = ttube::verify_cover(p.system, p.initial_box, horizon, cover, o.samples, o.seed);
  Sink sink(o.out);
  ttube::write_cover_csv(sink.get(), cover);
  sink.get() << "# verify_samples=" << rep.samples << '\n'
             << "# verify_contained=" << rep.contained << '\n'
             << "# verify_contained_strict=" << rep.contained_strict << '\n'
             << "# verify_fraction=" << rep.fraction << '\n';
  std::cerr << p.system.name() << ": " << cover.boxes.size() << " boxes, max width " << rep.max_width
            << ", containment " << rep.contained << "/" << rep.samples << ", step_b_calls "
            << cover.stats.step_b_calls << ", " << cover.stats.wall_seconds << " s\n";
  if (rep.contained != rep.samples) {
    std::cerr << "error: cover misses sampled endpoints\n";
    return kExitSolver;
  }
  return 0;
}

int run_sigma(const Options& o, const ttube::Problem& p, const ttube::ProblemDefaults& d) {
  ttube::SigmaSpec spec{p, o.horizon.value_or(d.sigma_horizon)};
  if (!o.fixed_f1.empty()) spec.fixed_f1 = parse_box(o.fixed_f1, p.system.dim());
  const auto rows = ttube::run_sigma_experiment(spec);
  Sink sink(o.out);
  ttube::write_sigma_csv(sink.get(), rows);
  return 0;
}

int run_cover(const Options& o, const ttube::Problem& p, const ttube::ProblemDefaults& d) {
  Sink sink(o.out);
  ttube::SolverConfig base = solver_config(o);
  (void)ttube::run_cover_experiment(p, o.horizon.value_or(d.cover_horizon), o.epsilon.value_or(d.cover_epsilon),
                                    ttube::default_cover_grid(), base, &sink.get());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Validated end-covers of ODE initial value problems with Taylor tubes"};
  Options o;
  std::string builtins;
  for (const auto& n : ttube::builtin_problem_names()) builtins += (builtins.empty() ? "" : ", ") + n;
  app.add_option("--problem", o.problem, "Built-in name (" + builtins + ") or problem file")->required();
  app.add_option("--horizon", o.horizon, "Time horizon H (sigma: the step offered to StepA)");
  app.add_option("--epsilon", o.epsilon, "Cover width target");
  app.add_option("--degree", o.degree, "Taylor tube degree")->check(CLI::PositiveNumber);
  app.add_option("--order", o.order, "Taylor order of StepB")->check(CLI::PositiveNumber);
  app.add_flag("--no-bisect", o.no_bisect, "Disable Bisect");
  app.add_flag("--no-tube", o.no_tube, "Disable the Taylor tube");
  app.add_option("--delta-frac", o.delta_frac, "Tube radius as a fraction of the stage width");
  app.add_option("--experiment", o.experiment, "Experiment table")->check(CLI::IsMember({"sigma", "cover"}));
  app.add_option("--out", o.out, "Output CSV path (default stdout)");
  app.add_option("--seed", o.seed, "Seed for verification sampling");
  app.add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--samples", o.samples, "Verification samples");
  app.add_option("--fixed-f1", o.fixed_f1, "sigma only: F1 as lo1,hi1,lo2,hi2,...");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (o.epsilon && !(*o.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
    if (o.horizon && !(*o.horizon > 0.0)) throw UsageError("--horizon must be positive");
    if (!(o.delta_frac > 0.0)) throw UsageError("--delta-frac must be positive");
    if (!o.fixed_f1.empty() && o.experiment != "sigma") throw UsageError("--fixed-f1 applies to --experiment sigma");
    const ttube::Problem p = load_problem(o.problem);
    const ttube::ProblemDefaults d = ttube::builtin_defaults(p.system.name());
    if (o.experiment == "sigma") return run_sigma(o, p, d);
    if (o.experiment == "cover") return run_cover(o, p, d);
    return run_single(o, p, d);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const ttube::StepFailure& e) {
    std::cerr << "step failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ttube::ResourceLimit& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ttube::InternalSoundnessViolation& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ttube::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
}
