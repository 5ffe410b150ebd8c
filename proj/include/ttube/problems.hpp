/**
 * @file problems.hpp
 * @brief Problem definitions (system + initial box) from text files and the
 * built-in benchmark registry.
 *
 * File format, one directive per line, '#' starts a comment:
 *   name <id>
 *   dim <n>
 *   vars <v1> ... <vn>
 *   param <name> <constant expression>      (optional, repeatable)
 *   rhs <var> <expression>                  (one per variable)
 *   init_center <c1> ... <cn>
 *   init_radius <r1> ... <rn>
 */
#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ttube/errors.hpp"
#include "ttube/expr.hpp"
#include "ttube/interval.hpp"
#include "ttube/system.hpp"

namespace ttube {

struct Problem {
  OdeSystem system;
  Point init_center;
  Point init_radius;
  Box initial_box;  // outward enclosure of init_center ± init_radius
};

/// Suggested run settings for the built-in benchmarks.
struct ProblemDefaults {
  double sigma_horizon = 0.1;  // step H offered to StepA in the enclosure comparison
  double cover_horizon = 1.0;
  double cover_epsilon = 1.0;
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline double parse_real(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ProblemFormatError(line, "not a number: '" + tok + "'");
  return v;
}

/// Parameter value: a constant expression such as 8/3, enclosed outward.
inline Interval parse_param_value(const std::string& text, std::size_t line) {
  try {
    return eval_interval(parse_expr(text, {}, {}), {});
  } catch (const Error& e) {
    throw ProblemFormatError(line, std::string("bad parameter value: ") + e.what());
  }
}

inline Point parse_vector(const std::vector<std::string>& tok, std::size_t n, std::size_t line, const char* key) {
  if (tok.size() != n + 1) throw ProblemFormatError(line, std::string(key) + " needs " + std::to_string(n) + " values");
  Point v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = parse_real(tok[i + 1], line);
  return v;
}

}  // namespace detail

[[nodiscard]] inline Problem make_problem(OdeSystem sys, Point center, Point radius) {
  if (center.size() != sys.dim() || radius.size() != sys.dim()) throw DimensionMismatch("initial box dimension");
  Problem p;
  p.initial_box = Box::from_center_radius(center, radius);
  p.system = std::move(sys);
  p.init_center = std::move(center);
  p.init_radius = std::move(radius);
  return p;
}

[[nodiscard]] inline Problem parse_problem(std::string_view text) {
  std::optional<std::string> name;
  std::optional<std::size_t> dim;
  std::optional<std::vector<std::string>> vars;
  ParamMap params;
  std::vector<std::pair<std::string, std::string>> rhs;  // var, expression text
  std::vector<std::size_t> rhs_lines;
  std::optional<Point> center, radius;
  std::size_t radius_line = 0;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = raw.substr(0, hash);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    auto rest_after = [&](std::size_t skip) {
      // remainder of the line after `skip` tokens, whitespace preserved
      std::size_t pos = 0;
      for (std::size_t i = 0; i < skip; ++i) {
        pos = line.find_first_not_of(" \t\r", pos);
        pos = line.find_first_of(" \t\r", pos);
      }
      const auto start = line.find_first_not_of(" \t\r", pos == std::string::npos ? line.size() : pos);
      return start == std::string::npos ? std::string() : line.substr(start);
    };
    if (key == "name") {
      if (tok.size() != 2) throw ProblemFormatError(line_no, "name takes one token");
      name = tok[1];
    } else if (key == "dim") {
      if (tok.size() != 2) throw ProblemFormatError(line_no, "dim takes one integer");
      const double d = detail::parse_real(tok[1], line_no);
      if (d < 1 || d != static_cast<double>(static_cast<std::size_t>(d))) throw ProblemFormatError(line_no, "dim must be a positive integer");
      dim = static_cast<std::size_t>(d);
    } else if (key == "vars") {
      vars = std::vector<std::string>(tok.begin() + 1, tok.end());
    } else if (key == "param") {
      if (tok.size() < 3) throw ProblemFormatError(line_no, "param needs a name and a value");
      params[tok[1]] = detail::parse_param_value(rest_after(2), line_no);
    } else if (key == "rhs") {
      if (tok.size() < 3) throw ProblemFormatError(line_no, "rhs needs a variable and an expression");
      rhs.emplace_back(tok[1], rest_after(2));
      rhs_lines.push_back(line_no);
    } else if (key == "init_center") {
      if (!dim) throw ProblemFormatError(line_no, "init_center before dim");
      center = detail::parse_vector(tok, *dim, line_no, "init_center");
    } else if (key == "init_radius") {
      if (!dim) throw ProblemFormatError(line_no, "init_radius before dim");
      radius = detail::parse_vector(tok, *dim, line_no, "init_radius");
      radius_line = line_no;
    } else {
      throw ProblemFormatError(line_no, "unknown key '" + key + "'");
    }
  }
  const std::size_t end = line_no + 1;
  if (!name) throw ProblemFormatError(end, "missing 'name'");
  if (!dim) throw ProblemFormatError(end, "missing 'dim'");
  if (!vars) throw ProblemFormatError(end, "missing 'vars'");
  if (vars->size() != *dim) throw ProblemFormatError(end, "vars count differs from dim");
  if (!center) throw ProblemFormatError(end, "missing 'init_center'");
  if (!radius) throw ProblemFormatError(end, "missing 'init_radius'");
  for (double r : *radius) {
    if (!(r >= 0.0)) throw ProblemFormatError(radius_line, "negative init_radius");
  }

  std::vector<std::string> pnames;
  for (const auto& [k, v] : params) pnames.push_back(k);
  std::vector<Expr> exprs(*dim);
  std::vector<bool> seen(*dim, false);
  for (std::size_t r = 0; r < rhs.size(); ++r) {
    const auto it = std::find(vars->begin(), vars->end(), rhs[r].first);
    if (it == vars->end()) throw ProblemFormatError(rhs_lines[r], "rhs for unknown variable '" + rhs[r].first + "'");
    const auto idx = static_cast<std::size_t>(it - vars->begin());
    if (seen[idx]) throw ProblemFormatError(rhs_lines[r], "duplicate rhs for '" + rhs[r].first + "'");
    seen[idx] = true;
    try {
      exprs[idx] = parse_expr(rhs[r].second, *vars, pnames);
    } catch (const Error& e) {
      throw ProblemFormatError(rhs_lines[r], e.what());
    }
  }
  for (std::size_t i = 0; i < *dim; ++i) {
    if (!seen[i]) throw ProblemFormatError(end, "missing rhs for '" + (*vars)[i] + "'");
  }
  return make_problem(OdeSystem(*name, *vars, std::move(params), std::move(exprs)), *center, *radius);
}

[[nodiscard]] inline Problem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open problem file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

namespace detail {
struct BuiltinEntry {
  const char* name;
  const char* text;
  ProblemDefaults defaults;
};

// Van der Pol uses y' = c(1 - x^2) y - x, the oscillator's usual sign.
inline const std::vector<BuiltinEntry>& builtin_table() {
  static const std::vector<BuiltinEntry> table{
      {"volterra",
       "name volterra\ndim 2\nvars x y\nparam a 2\nparam b 1\n"
       "rhs x a*x*(1-y)\nrhs y -b*y*(1-x)\ninit_center 1 3\ninit_radius 0.1 0.1\n",
       {0.1, 2.0, 0.01}},
      {"vanderpol",
       "name vanderpol\ndim 2\nvars x y\nparam c 1\n"
       "rhs x y\nrhs y c*(1-x^2)*y - x\ninit_center -3 3\ninit_radius 0.1 0.1\n",
       {0.05, 2.0, 0.01}},
      {"asymptote",
       "name asymptote\ndim 2\nvars x y\n"
       "rhs x x^2\nrhs y -y^2 + 7*x\ninit_center -1.5 8.5\ninit_radius 0.01 0.01\n",
       {0.04, 1.0, 0.01}},
      {"lorenz",
       "name lorenz\ndim 3\nvars x y z\nparam sigma 10\nparam rho 28\nparam beta 8/3\n"
       "rhs x sigma*(y-x)\nrhs y x*(rho-z)-y\nrhs z x*y-beta*z\n"
       "init_center 15 15 36\ninit_radius 0.001 0.001 0.001\n",
       {0.027, 1.0, 1.0}},
      {"rossler",
       "name rossler\ndim 3\nvars x y z\nparam a 0.2\nparam b 0.2\nparam c 5.7\n"
       "rhs x -y-z\nrhs y x+a*y\nrhs z b+z*(x-c)\n"
       "init_center 1 2 3\ninit_radius 0.1 0.1 0.1\n",
       {0.1, 2.0, 1.0}},
  };
  return table;
}
}  // namespace detail

[[nodiscard]] inline std::vector<std::string> builtin_problem_names() {
  std::vector<std::string> out;
  for (const auto& e : detail::builtin_table()) out.emplace_back(e.name);
  return out;
}

[[nodiscard]] inline std::optional<Problem> find_builtin_problem(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  key.erase(std::remove_if(key.begin(), key.end(), [](char c) { return c == '_' || c == '-' || c == ' '; }), key.end());
  for (const auto& e : detail::builtin_table()) {
    if (key == e.name) return parse_problem(e.text);
  }
  return std::nullopt;
}

[[nodiscard]] inline Problem builtin_problem(std::string_view name) {
  if (auto p = find_builtin_problem(name)) return std::move(*p);
  std::string msg = "unknown problem '" + std::string(name) + "'; built-ins:";
  for (const auto& n : builtin_problem_names()) msg += " " + n;
  throw InvalidArgument(msg);
}

[[nodiscard]] inline ProblemDefaults builtin_defaults(std::string_view name) {
  for (const auto& e : detail::builtin_table()) {
    if (name == e.name) return e.defaults;
  }
  return {};
}

}  // namespace ttube
