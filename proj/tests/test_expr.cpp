#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "hyzeno/error.hpp"
#include "hyzeno/expr.hpp"
#include "oracles.hpp"

using namespace hyzeno;

namespace {

ParseContext ctx3() { return ParseContext{3, 2, {"lambda", "g"}, {}}; }

const std::vector<double> kParams{0.5, 9.81};

double eval_at(const Expr& e, std::vector<double> x, std::vector<double> u = {0.0, 0.0}) {
  return eval_real(e, EvalEnv{x, u, kParams});
}

bool holds_at(const std::string& text, std::vector<double> x) {
  return eval_bool(parse_expr(text, ctx3()), EvalEnv{x, {}, kParams});
}

const char* const kBallV = "(1 + (1 - lambda^2)/(3.141592653589793*(1 + lambda^2))*atan(x2))*(x2^2/2 + g*x1)";

// Corpus of inputs covering every production of the grammar.
const std::vector<std::string> kCorpus = {
    "x1",
    "42",
    "1.5e-3",
    "lambda",
    "-x2",
    "x1 + x2 - x3",
    "x1 - (x2 - x3)",
    "x1 - x2 - x3",
    "x1 * x2 / x3",
    "x1 / (x2 * x3)",
    "x1 / x2 / x3",
    "(x1 + x2) * x3",
    "x1^2",
    "(-x1)^2",
    "-x1^2",
    "x1^-2",
    "(x1 + 1)^3",
    "x2^2/2 + g*x1",
    "sqrt(x1^2 + x2^2)",
    "exp(-x3)",
    "abs(x1 - x2)",
    "atan(x2)",
    "sin(x1)*cos(x2)",
    "min(x1, max(x2, x3))",
    "if(x1 == 0 && x2 == 0, 0, g)",
    "-if(x1 == 0 && x2 == 0, 0, g)",
    "x1 > 0 || (x1 == 0 && x2 >= 0)",
    "x1 == 0 && x2 < 0",
    "!(x1 < 0)",
    "!!(x1 <= x2)",
    "x1 > 0 && x2 > 0 || x3 > 0",
    "x1 > 0 && (x2 > 0 || x3 > 0)",
    "if(x1 > 0, x1 > 1, x2 > 1)",
    "u1 * x1 + u2",
    "if(u1 == 0 && u2 < 0, -lambda*x1, x1)",
    kBallV,
    "2 * -x1",
    "x1 - -x2",
    "x1 == x2 || x3 == 1",
};

}  // namespace

TEST(ExprParse, BallFlowSetIsBoolean) {
  const Expr e = parse_expr("x1 > 0 || (x1 == 0 && x2 >= 0)", ctx3());
  EXPECT_TRUE(e.is_bool());
  EXPECT_EQ(e.op(), ExprOp::Or);
}

TEST(ExprParse, GammaIsConditional) {
  const Expr e = parse_expr("if(x1 == 0 && x2 == 0, 0, 9.81)", ctx3());
  EXPECT_EQ(e.op(), ExprOp::If);
  EXPECT_TRUE(e.is_real());
  EXPECT_EQ(eval_at(e, {0, 0, 0}), 0.0);
  EXPECT_EQ(eval_at(e, {1, -3, 0}), 9.81);
}

TEST(ExprParse, SyntaxErrorPosition) {
  try {
    parse_expr("x1 +", ctx3());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::SyntaxError);
    EXPECT_EQ(e.position(), 5u);
  }
}

TEST(ExprParse, ErrorKinds) {
  auto code = [](const std::string& text) {
    try {
      parse_expr(text, ParseContext{2, 0, {"lambda"}, {}});
    } catch (const ParseError& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code("x3"), ErrorCode::UnknownIdentifier);
  EXPECT_EQ(code("u1"), ErrorCode::UnknownIdentifier);
  EXPECT_EQ(code("mu * x1"), ErrorCode::UnknownIdentifier);
  EXPECT_EQ(code("foo(x1)"), ErrorCode::UnknownIdentifier);
  EXPECT_EQ(code("sqrt(x1, x2)"), ErrorCode::ArityMismatch);
  EXPECT_EQ(code("max(x1)"), ErrorCode::ArityMismatch);
  EXPECT_EQ(code("if(x1 > 0, 1)"), ErrorCode::ArityMismatch);
  EXPECT_EQ(code("x1 + (x2 > 0)"), ErrorCode::TypeMismatch);
  EXPECT_EQ(code("!x1"), ErrorCode::TypeMismatch);
  EXPECT_EQ(code("if(x1, 1, 2)"), ErrorCode::TypeMismatch);
  EXPECT_EQ(code("if(x1 > 0, 1, x2 > 0)"), ErrorCode::TypeMismatch);
  EXPECT_EQ(code("x1 ^ 1.5"), ErrorCode::SyntaxError);
  EXPECT_EQ(code("(x1"), ErrorCode::SyntaxError);
  EXPECT_EQ(code("x1 x2"), ErrorCode::SyntaxError);
  EXPECT_EQ(code(""), ErrorCode::SyntaxError);
  EXPECT_EQ(code("x1 < x2 < 3"), ErrorCode::SyntaxError);
  EXPECT_EQ(code("x1 # 2"), ErrorCode::SyntaxError);
}

TEST(ExprParse, PrecedenceMatchesArithmetic) {
  const std::vector<double> x{2.0, 3.0, 5.0};
  EXPECT_DOUBLE_EQ(eval_at(parse_expr("x1 + x2 * x3", ctx3()), x), 17.0);
  EXPECT_DOUBLE_EQ(eval_at(parse_expr("x1 - x2 - x3", ctx3()), x), -6.0);
  EXPECT_DOUBLE_EQ(eval_at(parse_expr("x3 / x1 / x2", ctx3()), x), 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(eval_at(parse_expr("-x1^2", ctx3()), x), -4.0);
  EXPECT_DOUBLE_EQ(eval_at(parse_expr("(-x1)^2", ctx3()), x), 4.0);
  EXPECT_DOUBLE_EQ(eval_at(parse_expr("x1^-2", ctx3()), x), 0.25);
  EXPECT_TRUE(holds_at("x1 > 0 && x2 > 5 || x3 > 4", x));
  EXPECT_FALSE(holds_at("x1 > 0 && (x2 > 5 || x3 > 6)", x));
}

TEST(ExprEval, EqualityUsesTolerance) {
  EXPECT_TRUE(holds_at("x1 == 0", {1e-10, 0, 0}));
  EXPECT_FALSE(holds_at("x1 == 0", {1e-8, 0, 0}));
  const Expr e = parse_expr("x1 == 0", ctx3());
  const std::vector<double> x{1e-6, 0, 0};
  EXPECT_TRUE(eval_bool(e, EvalEnv{x, {}, kParams, 1e-5}));
}

TEST(ExprEval, LyapunovCandidateVanishesAtOrigin) {
  const Expr v = parse_expr("(1 + 0.19099*atan(x2))*(x2^2/2 + 9.81*x1)", ctx3());
  EXPECT_EQ(eval_at(v, {0, 0, 0}), 0.0);
}

TEST(ExprEval, RuntimeErrors) {
  auto code = [](const std::string& text, std::vector<double> x) {
    try {
      eval_at(parse_expr(text, ctx3()), x);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code("1 / x1", {0, 0, 0}), ErrorCode::DivisionByZero);
  EXPECT_EQ(code("x1^-1", {0, 0, 0}), ErrorCode::DivisionByZero);
  EXPECT_EQ(code("sqrt(x1)", {-1, 0, 0}), ErrorCode::DomainError);
  const Expr e = parse_expr("x3", ctx3());
  const std::vector<double> short_state{1.0};
  EXPECT_THROW(eval_real(e, EvalEnv{short_state, {}, kParams}), Error);
  try {
    eval_real(e, EvalEnv{short_state, {}, kParams});
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::IndexOutOfRange);
  }
}

TEST(ExprEval, Functions) {
  const std::vector<double> x{0.3, -1.2, 2.0};
  auto v = [&](const char* text) { return eval_at(parse_expr(text, ctx3()), x); };
  EXPECT_DOUBLE_EQ(v("sqrt(x3)"), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(v("exp(x2)"), std::exp(-1.2));
  EXPECT_DOUBLE_EQ(v("abs(x2)"), 1.2);
  EXPECT_DOUBLE_EQ(v("atan(x1)"), std::atan(0.3));
  EXPECT_DOUBLE_EQ(v("sin(x1) + cos(x1)"), std::sin(0.3) + std::cos(0.3));
  EXPECT_DOUBLE_EQ(v("min(x1, x2)"), -1.2);
  EXPECT_DOUBLE_EQ(v("max(x1, x2)"), 0.3);
  EXPECT_DOUBLE_EQ(v("u1 + u2"), 0.0);
}

TEST(ExprCalculus, SimpleDerivatives) {
  const Expr e = parse_expr("9.81*x1 + x2^2/2", ctx3());
  EXPECT_EQ(to_string(differentiate(e, 0)), "9.81");
  const Expr d = differentiate(parse_expr("atan(x2)", ctx3()), 1);
  EXPECT_TRUE(structurally_equal(d, parse_expr("1/(1 + x2^2)", ctx3()))) << to_string(d);
  EXPECT_TRUE(differentiate(parse_expr("x1*x2", ctx3()), 2).is_number(0.0));
  EXPECT_THROW(differentiate(parse_expr("x1 > 0", ctx3()), 0), Error);
}

TEST(ExprCalculus, GradientMatchesFiniteDifferences) {
  const Expr v = parse_expr(kBallV, ctx3());
  const auto grad = gradient(v, 3);
  oracle::Rng rng(11);
  auto f = [&](const std::vector<double>& x) { return eval_at(v, x); };
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x{rng.uniform(0.0, 5.0), rng.uniform(-10.0, 10.0), rng.uniform(-5.0, 5.0)};
    const auto fd = oracle::central_gradient(f, x, 1e-5);
    for (std::size_t k = 0; k < 3; ++k) {
      const double sym = eval_at(grad[k], x);
      EXPECT_LE(std::fabs(sym - fd[k]), 1e-6 * std::max(1.0, std::fabs(sym))) << "component " << k;
    }
  }
}

// Property: random smooth expressions differentiate consistently with finite differences.
TEST(ExprCalculusProperty, RandomExpressionGradients) {
  oracle::Rng rng(5);
  const std::vector<std::string> leaves = {"x1", "x2", "x3", "lambda", "2", "0.5"};
  std::function<std::string(int)> gen = [&](int depth) -> std::string {
    if (depth == 0) return leaves[rng.below(leaves.size())];
    switch (rng.below(8)) {
      case 0: return "(" + gen(depth - 1) + " + " + gen(depth - 1) + ")";
      case 1: return "(" + gen(depth - 1) + " - " + gen(depth - 1) + ")";
      case 2: return "(" + gen(depth - 1) + " * " + gen(depth - 1) + ")";
      case 3: return "(" + gen(depth - 1) + ")/(2 + (" + gen(depth - 1) + ")^2)";
      case 4: return "atan(" + gen(depth - 1) + ")";
      case 5: return "sin(" + gen(depth - 1) + ")";
      case 6: return "exp(" + gen(depth - 1) + "/4)";
      default: return "(" + gen(depth - 1) + ")^" + std::to_string(1 + rng.below(3));
    }
  };
  for (int trial = 0; trial < 50; ++trial) {
    const Expr e = parse_expr(gen(3), ctx3());
    const auto grad = gradient(e, 3);
    auto f = [&](const std::vector<double>& x) { return eval_at(e, x); };
    for (int p = 0; p < 4; ++p) {
      const std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const auto fd = oracle::central_gradient(f, x, 1e-5);
      for (std::size_t k = 0; k < 3; ++k) {
        const double sym = eval_at(grad[k], x);
        EXPECT_LE(std::fabs(sym - fd[k]), 1e-5 * std::max(1.0, std::fabs(sym))) << to_string(e);
      }
    }
  }
}

TEST(ExprPrint, CorpusRoundTrip) {
  ASSERT_GE(kCorpus.size(), 30u);
  for (const auto& text : kCorpus) {
    const Expr e = parse_expr(text, ctx3());
    const std::string printed = to_string(e);
    const Expr again = parse_expr(printed, ctx3());
    EXPECT_TRUE(structurally_equal(e, again)) << text << " -> " << printed;
    EXPECT_EQ(to_string(again), printed);
  }
}

// Property: random strings from the grammar survive print/parse unchanged.
TEST(ExprPrintProperty, RandomRoundTrip) {
  oracle::Rng rng(3);
  std::function<std::string(int)> real;
  std::function<std::string(int)> boolean;
  real = [&](int depth) -> std::string {
    if (depth == 0) {
      switch (rng.below(5)) {
        case 0: return "x" + std::to_string(1 + rng.below(3));
        case 1: return "u" + std::to_string(1 + rng.below(2));
        case 2: return rng.coin() ? "lambda" : "g";
        case 3: return std::to_string(rng.below(100));
        default: return "0.125";
      }
    }
    switch (rng.below(9)) {
      case 0: return real(depth - 1) + " + " + real(depth - 1);
      case 1: return real(depth - 1) + " - " + real(depth - 1);
      case 2: return real(depth - 1) + " * " + real(depth - 1);
      case 3: return real(depth - 1) + " / " + real(depth - 1);
      case 4: return "(" + real(depth - 1) + ")^" + std::to_string(rng.below(4));
      case 5: return "-(" + real(depth - 1) + ")";
      case 6: return "max(" + real(depth - 1) + ", " + real(depth - 1) + ")";
      case 7: return "if(" + boolean(depth - 1) + ", " + real(depth - 1) + ", " + real(depth - 1) + ")";
      default: return "(" + real(depth - 1) + ")";
    }
  };
  boolean = [&](int depth) -> std::string {
    static const char* const ops[] = {" < ", " <= ", " > ", " >= ", " == "};
    if (depth == 0) return real(0) + ops[rng.below(5)] + real(0);
    switch (rng.below(5)) {
      case 0: return boolean(depth - 1) + " && " + boolean(depth - 1);
      case 1: return boolean(depth - 1) + " || " + boolean(depth - 1);
      case 2: return "!(" + boolean(depth - 1) + ")";
      case 3: return "(" + boolean(depth - 1) + ")";
      default: return real(depth - 1) + ops[rng.below(5)] + real(depth - 1);
    }
  };
  for (int trial = 0; trial < 500; ++trial) {
    const std::string text = trial % 2 ? real(1 + rng.below(4)) : boolean(1 + rng.below(4));
    const Expr e = parse_expr(text, ctx3());
    const std::string printed = to_string(e);
    const Expr again = parse_expr(printed, ctx3());
    ASSERT_TRUE(structurally_equal(e, again)) << text << " -> " << printed;
  }
}

TEST(ExprRewrite, SubstituteAndArity) {
  const Expr e = parse_expr("x1 * u1 + lambda * x2", ctx3());
  EXPECT_EQ(state_arity(e), 2u);
  EXPECT_EQ(input_arity(e), 1u);
  Substitution sub;
  sub.state = [](std::size_t i) { return Expr::state(i + 2); };
  sub.input = [](std::size_t) { return Expr::state(0); };
  const Expr moved = substitute(e, sub);
  EXPECT_EQ(state_arity(moved), 4u);
  EXPECT_EQ(input_arity(moved), 0u);
  const std::vector<double> x{7.0, 0.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(eval_real(moved, EvalEnv{x, {}, kParams}), 2.0 * 7.0 + 0.5 * 3.0);
}

TEST(ExprRewrite, SimplifyFoldsConstants) {
  EXPECT_TRUE(simplify(parse_expr("0*x1 + 1*2", ctx3())).is_number(2.0));
  EXPECT_EQ(to_string(simplify(parse_expr("x1*1 - 0", ctx3()))), "x1");
  EXPECT_EQ(to_string(simplify(parse_expr("if(x1 > 0, x2, x2)", ctx3()))), "x2");
}
