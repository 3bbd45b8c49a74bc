#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlwave/config.hpp"
#include "nlwave/expression.hpp"

using namespace nlwave;
using std::numbers::pi;

TEST(Expression, EvaluatesVariablesAndFunctions) {
  const auto e = Expression::parse("1 + t/2 + 0.25*cos(x) - exp(-s)*y");
  EXPECT_NEAR(e(0.5, 0.0, 2.0), 1.0 + 0.25 + 0.25 - std::exp(-0.5) * 2.0, 1e-15);
  EXPECT_NEAR(Expression::parse("sin(pi/2) + exp(0) + cos(0)")(0, 0, 0), 3.0, 1e-15);
  EXPECT_NEAR(Expression::parse("-2*-3")(0, 0, 0), 6.0, 1e-15);
  EXPECT_NEAR(Expression::parse("1e-3 + 2E2")(0, 0, 0), 200.001, 1e-12);
}

TEST(Expression, SymbolicDerivativesMatchFiniteDifferences) {
  const auto e = Expression::parse("(1 + t)*exp(-t)*cos(2*x) + sin(t*x)/(2 + t)");
  const auto et = e.derivative(Variable::t), ett = et.derivative(Variable::t), ex = e.derivative(Variable::x);
  const double t = 0.7, x = 1.3, d = 1e-4;
  EXPECT_NEAR(et(t, x), (e(t + d, x) - e(t - d, x)) / (2 * d), 1e-7);
  EXPECT_NEAR(ett(t, x), (e(t + d, x) - 2 * e(t, x) + e(t - d, x)) / (d * d), 1e-5);
  EXPECT_NEAR(ex(t, x), (e(t, x + d) - e(t, x - d)) / (2 * d), 1e-7);
}

TEST(Expression, ConstantDetection) {
  EXPECT_TRUE(Expression::parse("2*pi").is_constant());
  EXPECT_FALSE(Expression::parse("2*t").is_constant());
  EXPECT_TRUE(Expression::parse("cos(x)").depends_on(Variable::x));
  EXPECT_FALSE(Expression::parse("cos(x)").depends_on(Variable::t));
}

TEST(Expression, ParseErrorsCarryPosition) {
  for (const char* bad : {"1 +", "cos(x", "2 ** 3", "sqrt(2)", "", "1 2", "z", "2^3"}) {
    EXPECT_THROW(Expression::parse(bad), ParseError) << bad;
  }
  try {
    Expression::parse("1 + $");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
}

TEST(IniDocument, ParsesSectionsAndComments) {
  const auto d = IniDocument::parse("# top\n[a]\nx = 1 + 1\n; other\ny = hello world \n\n[b]\nlist = 1, 2,3\n");
  EXPECT_EQ(d.number("a", "x"), 2.0);
  EXPECT_EQ(d.get("a", "y"), "hello world");
  EXPECT_EQ(d.integer_list("b", "list"), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(d.number_or("a", "missing", 7.0), 7.0);
  EXPECT_TRUE(d.has_section("b"));
  EXPECT_FALSE(d.has("b", "x"));
}

TEST(IniDocument, NumbersAcceptConstantExpressions) {
  EXPECT_NEAR(IniDocument::parse_number("pi/2", "k"), pi / 2, 1e-15);
  EXPECT_THROW(IniDocument::parse_number("t + 1", "k"), ConfigError);
  EXPECT_THROW(IniDocument::parse_number("1/0", "k"), ConfigError);
}

TEST(IniDocument, Errors) {
  EXPECT_THROW(IniDocument::parse("x = 1\n"), ConfigError);
  EXPECT_THROW(IniDocument::parse("[a\n"), ConfigError);
  EXPECT_THROW(IniDocument::parse("[a]\nnovalue\n"), ConfigError);
  try {
    IniDocument::parse("[a]\nx = 1\nx = 2\n", "f.ini");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("f.ini:3"), std::string::npos);
  }
  const auto d = IniDocument::parse("[a]\nx = 1.5\nflag = maybe\n");
  EXPECT_THROW(d.integer_or("a", "x", 0), ConfigError);
  EXPECT_THROW(d.boolean_or("a", "flag", false), ConfigError);
  EXPECT_THROW(d.get("a", "nope"), ConfigError);
  EXPECT_THROW(d.reject_unknown("a", {"x"}), ConfigError);
}

TEST(IniDocument, SerializeRoundTrip) {
  IniDocument d;
  d.set("s", "k", IniDocument::format_number(0.1));
  d.set("s", "j", "text");
  d.set("t", "k", "1");
  const auto back = IniDocument::parse(d.serialize());
  EXPECT_EQ(back.serialize(), d.serialize());
  EXPECT_EQ(back.number("s", "k"), 0.1);
}
