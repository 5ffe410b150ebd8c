// Expression parsing, printing and evaluation; tape compilation.
#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "support/sampling.hpp"
#include "ttube/expr.hpp"
#include "ttube/system.hpp"

using namespace ttube;
using ttube::testing::Rng;

namespace {
const std::vector<std::string> kXY{"x", "y"};
const std::vector<std::string> kAB{"a", "b"};

Expr c(double v) { return Expr::constant(v); }
Expr var(std::size_t i) { return Expr::var(i); }
}  // namespace

TEST(Parse, VolterraFirstComponent) {
  const Expr e = parse_expr("a*x*(1-y)", kXY, kAB);
  const Expr want = Expr::binary(ExprOp::Mul, Expr::binary(ExprOp::Mul, Expr::param("a"), var(0)),
                                 Expr::binary(ExprOp::Sub, c(1), var(1)));
  EXPECT_TRUE(e == want);
}

TEST(Parse, SingleVariable) { EXPECT_TRUE(parse_expr("x", kXY) == var(0)); }

TEST(Parse, UnbalancedParenthesisPosition) {
  try {
    (void)parse_expr("x^2 - (", kXY);
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.position, 7U);
  }
}

TEST(Parse, Precedence) {
  // -x^2 is -(x^2)
  EXPECT_TRUE(parse_expr("-x^2", kXY) == Expr::neg(Expr::pow_int(var(0), 2)));
  // left associativity
  EXPECT_TRUE(parse_expr("x-y-x", kXY) ==
              Expr::binary(ExprOp::Sub, Expr::binary(ExprOp::Sub, var(0), var(1)), var(0)));
  EXPECT_TRUE(parse_expr("x/y*x", kXY) ==
              Expr::binary(ExprOp::Mul, Expr::binary(ExprOp::Div, var(0), var(1)), var(0)));
  EXPECT_TRUE(parse_expr("x+y*x", kXY) ==
              Expr::binary(ExprOp::Add, var(0), Expr::binary(ExprOp::Mul, var(1), var(0))));
  EXPECT_TRUE(parse_expr("2*-x", kXY) == Expr::binary(ExprOp::Mul, c(2), Expr::neg(var(0))));
  EXPECT_TRUE(parse_expr(" 1.5e1 ", kXY) == c(15.0));
}

TEST(Parse, Errors) {
  EXPECT_THROW((void)parse_expr("x^y", kXY), NonIntegerExponent);
  EXPECT_THROW((void)parse_expr("x^2.5", kXY), NonIntegerExponent);
  EXPECT_THROW((void)parse_expr("x^-1", kXY), NonIntegerExponent);
  try {
    (void)parse_expr("x + zz", kXY);
    FAIL();
  } catch (const UnknownIdentifier& e) {
    EXPECT_EQ(e.identifier, "zz");
    EXPECT_EQ(e.position, 4U);
  }
  EXPECT_THROW((void)parse_expr("", kXY), SyntaxError);
  EXPECT_THROW((void)parse_expr("x y", kXY), SyntaxError);
  EXPECT_THROW((void)parse_expr("(x", kXY), SyntaxError);
  EXPECT_THROW((void)parse_expr("x $ y", kXY), SyntaxError);
}

TEST(Print, ParsePrintParseFixpoint) {
  const std::vector<std::string> texts{
      "a*x*(1-y)", "-b*y*(1-x)", "x^2", "-y^2 + 7*x", "10*(y-x)", "x*(28-b)-y", "0.2 + x*(y - 5.7)",
      "x / (1 + y^3) - -x", "0.1*x*y - 1e-3", "((x))", "2^0 + x^1",
  };
  for (const auto& t : texts) {
    const Expr e = parse_expr(t, kXY, kAB);
    const std::string printed = to_string(e, kXY);
    const Expr again = parse_expr(printed, kXY, kAB);
    EXPECT_TRUE(e == again) << t << " -> " << printed;
    EXPECT_EQ(to_string(again, kXY), printed);
  }
}

TEST(Eval, VolterraAtPoint) {
  const ParamMap params{{"a", Interval(2)}, {"b", Interval(1)}};
  const Expr f1 = parse_expr("a*x*(1-y)", kXY, kAB);
  const Expr f2 = parse_expr("-b*y*(1-x)", kXY, kAB);
  const std::vector<double> pt{1.0, 3.0};
  EXPECT_EQ(eval_point(f1, pt, params), -4.0);
  EXPECT_EQ(eval_point(f2, pt, params), 0.0);
}

TEST(Eval, IntervalIdentityAndDependency) {
  const std::vector<Interval> env{Interval(0, 1)};
  const std::vector<std::string> vx{"x"};
  EXPECT_EQ(eval_interval(parse_expr("x", vx), env), Interval(0, 1));
  const std::vector<Interval> sym{Interval(-1, 1)};
  const Interval d = eval_interval(parse_expr("x*x - x^2", vx), sym);
  EXPECT_TRUE(d.contains(0.0));
}

TEST(Eval, UnboundParameterThrows) {
  const Expr e = parse_expr("a*x", kXY, kAB);
  const std::vector<double> pt{1.0, 2.0};
  EXPECT_THROW((void)eval_point(e, pt, {}), UnknownIdentifier);
}

TEST(Eval, PointInsideBoxEvaluation) {
  Rng rng(7);
  const ParamMap params{{"a", literal_enclosure(0.2)}, {"b", literal_enclosure(5.7)}};
  const std::vector<std::string> texts{"a*x*(1-y)", "x^3 - b*y^2 + x*y/(2 + y^2)", "-(x - a)^5 + 7*y"};
  for (const auto& t : texts) {
    const Expr e = parse_expr(t, kXY, kAB);
    for (int trial = 0; trial < 10; ++trial) {
      const Box b = ttube::testing::random_box(rng, 2, -2.0, 2.0);
      const Interval range = eval_interval(e, b.components(), params);
      for (int s = 0; s < 1000; ++s) {
        const Point p = ttube::testing::sample_point(rng, b);
        const std::vector<Interval> pbox(p.begin(), p.end());
        const Interval at = eval_interval(e, pbox, params);
        EXPECT_TRUE(subset(at, range)) << t;
      }
    }
  }
}

TEST(Tape, MatchesTreeEvaluation) {
  Rng rng(8);
  const ParamMap params{{"a", Interval(2)}, {"b", literal_enclosure(8.0 / 3.0)}};
  const std::vector<std::string> rhs{"a*x*(1-y) + x^5", "-b*y*(1-x)/(3 + x^2) - 4"};
  const OdeSystem sys = OdeSystem::from_text("t", kXY, params, rhs);
  for (int i = 0; i < 200; ++i) {
    const Point p{ttube::testing::uniform(rng, -2, 2), ttube::testing::uniform(rng, -2, 2)};
    const Point f = eval_rhs(sys, p);
    for (std::size_t k = 0; k < 2; ++k) {
      const double ref = eval_point(sys.rhs()[k], p, params);
      EXPECT_NEAR(f[k], ref, 1e-12 * (1 + std::abs(ref)));
    }
    const Box b = ttube::testing::random_box(rng, 2, -2.0, 2.0);
    const Box fb = eval_rhs(sys, b);
    const Point q = ttube::testing::sample_point(rng, b);
    const Box fq = eval_rhs(sys, Box::point(q));
    EXPECT_TRUE(box_subset(fq, fb));
  }
}

TEST(Tape, ConstantFoldingAndPowers) {
  const std::vector<std::string> vx{"x"};
  const OdeSystem sys = OdeSystem::from_text("p", vx, {}, std::vector<std::string>{"(8/3)*x^7 - 2^3"});
  std::size_t consts = 0;
  for (const auto& op : sys.tape().ops) consts += op.kind == Tape::Kind::Const;
  EXPECT_LE(consts, 2U);
  const Point f = eval_rhs(sys, Point{1.5});
  EXPECT_NEAR(f[0], 8.0 / 3.0 * std::pow(1.5, 7) - 8.0, 1e-12);
}

TEST(System, Validation) {
  const std::vector<std::string> vx{"x"};
  EXPECT_THROW(OdeSystem::from_text("bad", vx, {}, std::vector<std::string>{"x", "x"}), DimensionMismatch);
  EXPECT_THROW(OdeSystem::from_text("bad", vx, {}, std::vector<std::string>{"x/0"}), DivisionByZeroInterval);
}
