#include <cmath>
#include <cstdint>
#include <string>

#include "benfordseq/errors.hpp"
#include "benfordseq/expr.hpp"
#include "doctest.h"

using namespace benfordseq;

namespace {

double eval_at(const std::string& text, std::int64_t n = 1, std::uint64_t seed = 0) {
  Expr e = parse_expr(text);
  EvalContext ctx;
  ctx.n = n;
  ctx.trial_seed = seed;
  return eval(e, ctx);
}

std::size_t parse_offset(const std::string& text) {
  try {
    parse_expr(text);
  } catch (const ParseError& e) {
    return e.offset;
  }
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST_CASE("operator precedence and associativity") {
  CHECK(eval_at("2+3*4") == 14.0);
  CHECK(eval_at("(2+3)*4") == 20.0);
  CHECK(eval_at("-2^2") == -4.0);  // ^ binds tighter than unary minus
  CHECK(eval_at("(-2)^2") == 4.0);
  CHECK(eval_at("2^3^2") == 512.0);  // right associative
  CHECK(eval_at("6/3/2") == 1.0);    // left associative
  CHECK(eval_at("1-2-3") == -4.0);
  CHECK(eval_at("2^-1") == 0.5);
  CHECK(eval_at("--3") == 3.0);
}

TEST_CASE("pow(a, b) parses to the same node as a^b") {
  CHECK(structurally_equal(parse_expr("pow(n, 2)"), parse_expr("n^2")));
  CHECK(structurally_equal(parse_expr("pow(1+n, 2*n)"), parse_expr("(1+n)^(2*n)")));
}

TEST_CASE("step variable and builtin calls") {
  CHECK(eval_at("n", 7) == 7.0);
  CHECK(eval_at("n^2 - n", 5) == 20.0);
  CHECK(eval_at("exp(0)") == 1.0);
  CHECK(eval_at("log(exp(1))") == doctest::Approx(1.0));
  CHECK(eval_at("log10(1000)") == doctest::Approx(3.0));
  CHECK(eval_at("sqrt(49)") == 7.0);
  CHECK(eval_at("floor(2.9)") == 2.0);
  CHECK(eval_at("floor(-0.5)") == -1.0);
  CHECK(eval_at("abs(-5)") == 5.0);
  CHECK(eval_at("1.5e2") == 150.0);
  CHECK(eval_at(".5") == 0.5);
}

TEST_CASE("to_string reparses to a structurally equal tree") {
  const char* cases[] = {
      "1",
      "n",
      "-n",
      "2+3*4",
      "(2+3)*4",
      "-2^2",
      "(-2)^2",
      "2^3^2",
      "(2^3)^2",
      "6/3/2",
      "6/(3/2)",
      "1-2-3",
      "1-(2-3)",
      "n^2 - 3*n + 1",
      "exp(log(n))",
      "sqrt(abs(n - 10))",
      "floor(n/2)",
      "uniform(0, 1)*n + uniform(-1, 1)",
      "log10(n)^2",
      "-(n+1)",
      "2^-n",
      "pow(n, 3)",
  };
  for (const char* text : cases) {
    CAPTURE(text);
    Expr e = parse_expr(text);
    Expr back = parse_expr(to_string(e));
    CHECK(structurally_equal(e, back));
  }
}

TEST_CASE("parse errors carry the byte offset of the offending character") {
  CHECK(parse_offset("2*+") == 2);
  CHECK(parse_offset("foo(1)") == 0);
  CHECK(parse_offset("(1+2") == 4);
  CHECK(parse_offset("") == 0);
  CHECK(parse_offset("1 2") == 2);
  CHECK(parse_offset("sqrt(1, 2)") == 0);  // arity reported at the call site
  CHECK_THROWS_WITH_AS(parse_expr("2*+"), "unexpected character (byte 2)", ParseError);
  CHECK_THROWS_AS(parse_expr("1e999999"), ParseError);  // overflows to inf
}

TEST_CASE("evaluation domain errors") {
  CHECK_THROWS_AS(eval_at("log(-1)"), DomainError);
  CHECK_THROWS_AS(eval_at("log(0)"), DomainError);
  CHECK_THROWS_AS(eval_at("log10(0)"), DomainError);
  CHECK_THROWS_AS(eval_at("sqrt(0-1)"), DomainError);
  CHECK_THROWS_AS(eval_at("(0-2)^(1/2)"), DomainError);  // fractional power of a negative
  CHECK_THROWS_AS(eval_at("1/(n-1)", 1), DomainError);
  CHECK_THROWS_AS(eval_at("0^-1"), DomainError);
  CHECK_THROWS_AS(eval_at("uniform(1, 0)"), DomainError);
}

TEST_CASE("uniform draws are keyed by seed, step, and pre-order position") {
  Expr two = parse_expr("uniform(0,1) + uniform(0,1)");
  EvalContext a{5, 42, 0};
  double v1 = eval(two, a);
  CHECK(a.draw_counter == 2);
  EvalContext b{5, 42, 0};
  CHECK(eval(two, b) == v1);  // same context reproduces exactly

  Expr one = parse_expr("uniform(0,1)");
  EvalContext c{5, 42, 0};
  double first = eval(one, c);
  EvalContext d{5, 42, 1};  // start at the second counter slot
  double second = eval(one, d);
  CHECK(first != second);
  CHECK(v1 == first + second);  // the sum drew exactly those two slots

  EvalContext other_seed{5, 43, 0};
  CHECK(eval(one, other_seed) != first);
  EvalContext other_n{6, 42, 0};
  CHECK(eval(one, other_n) != first);
}

TEST_CASE("uniform bounds may depend on n") {
  Expr e = parse_expr("uniform(n, n+1)");
  for (std::int64_t n = 1; n <= 50; ++n) {
    EvalContext ctx{n, 7, 0};
    double v = eval(e, ctx);
    CHECK(v >= static_cast<double>(n));
    CHECK(v < static_cast<double>(n + 1));
  }
}

TEST_CASE("unit_draw stays in the half-open unit interval") {
  for (std::int64_t i = 0; i < 1000; ++i) {
    double u = unit_draw(99, i, static_cast<std::uint64_t>(i) * 7);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == unit_draw(99, i, static_cast<std::uint64_t>(i) * 7));
  }
}

TEST_CASE("substream separates coefficient slots and seeds") {
  CHECK(substream(12345, 0) != substream(12345, 1));
  CHECK(substream(1, 0) != substream(2, 0));
}

TEST_CASE("is_constant and has_random classify structurally") {
  CHECK(is_constant(parse_expr("3*(2+1)^2")));
  CHECK(!is_constant(parse_expr("n")));
  CHECK(!is_constant(parse_expr("2 + 0*n")));  // structural, not algebraic
  CHECK(!is_constant(parse_expr("uniform(0,1)")));
  CHECK(!has_random(parse_expr("n^2")));
  CHECK(has_random(parse_expr("1 + uniform(0,1)*n")));
  CHECK(has_random(parse_expr("abs(uniform(-1,1))")));
}
