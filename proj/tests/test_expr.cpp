#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/finite_diff.hpp"
#include "finsler/jet.hpp"
#include "support/helpers.hpp"

using namespace finsler;
using testsupport::close_rel;

TEST_CASE("euclidean norm expression evaluates") {
  Expr e = Expr::parse("sqrt(y1^2 + y2^2)", 2, true);
  JetPoint p = JetPoint::tangent({0.0, 0.0}, {3.0, 4.0});
  REQUIRE(e.evaluate(p, 1).value() == Catch::Approx(5.0));
}

TEST_CASE("precedence: x1 + 2*x2^3 parses as x1 + (2*(x2^3))") {
  Expr e = Expr::parse("x1 + 2*x2^3", 2, false);
  JetPoint p = JetPoint::base({5.0, 2.0});
  REQUIRE(e.evaluate(p, 0).value() == Catch::Approx(5.0 + 2.0 * 8.0));
  REQUIRE(e.to_string() == "x1 + 2 * x2^3");
}

TEST_CASE("unary minus binds looser than ^") {
  Expr e = Expr::parse("-x1^2", 1, false);
  REQUIRE(e.evaluate(JetPoint::base({3.0}), 0).value() == Catch::Approx(-9.0));
}

TEST_CASE("^ is restricted to integer literals") {
  REQUIRE_THROWS_AS(Expr::parse("x1^2.5", 1, false), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("x1^x1", 1, false), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("x1^2^3", 1, false), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("pow(x1, 0.5)", 1, false), ParseError);
  // negative integer exponents are division
  Expr e = Expr::parse("x1^-2", 1, false);
  REQUIRE(e.evaluate(JetPoint::base({2.0}), 0).value() == Catch::Approx(0.25));
  Expr e2 = Expr::parse("pow(x1, -2)", 1, false);
  REQUIRE(e2.evaluate(JetPoint::base({2.0}), 0).value() == Catch::Approx(0.25));
}

TEST_CASE("syntax errors carry a position") {
  try {
    Expr::parse("y1 + ", 2, true);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.position() == 5);
  }
  REQUIRE_THROWS_AS(Expr::parse("x1 + (x2", 2, false), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("x1 @ x2", 2, false), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("x1 x2", 2, false), ParseError);
}

TEST_CASE("unknown and out-of-range identifiers") {
  REQUIRE_THROWS_AS(Expr::parse("x3", 2, false), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("z1", 2, false), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("foo(x1)", 2, false), ParseError);
}

TEST_CASE("fibre variables are rejected when not allowed") {
  REQUIRE_THROWS_AS(Expr::parse("y1 + x1", 2, false), ParseError);
  REQUIRE_NOTHROW(Expr::parse("y1 + x1", 2, true));
}

TEST_CASE("euclidean energy has identity fibre hessian everywhere") {
  Expr e = Expr::parse("0.5*(y1^2 + y2^2)", 2, true);
  JetPoint p = JetPoint::tangent({0.7, -0.3}, {0.4, 1.1});
  Jet j = e.evaluate(p, 2);
  std::vector<int> e22{0, 0, 2, 0}, e33{0, 0, 0, 2}, e23{0, 0, 1, 1};
  REQUIRE(j.partial(e22) == Catch::Approx(1.0));
  REQUIRE(j.partial(e33) == Catch::Approx(1.0));
  REQUIRE(j.partial(e23) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("randers value at a fibre point") {
  Expr e = Expr::parse("sqrt(y1^2 + y2^2) + 0.3*y1", 2, true);
  JetPoint p = JetPoint::tangent({0.0, 0.0}, {1.0, 0.0});
  REQUIRE(e.evaluate(p, 2).value() == Catch::Approx(1.3));
}

TEST_CASE("domain errors carry expression position and point") {
  Expr e = Expr::parse("log(x1)", 1, false);
  try {
    e.evaluate(JetPoint::base({-1.0}), 1);
    FAIL("expected EvalError");
  } catch (const EvalError& err) {
    REQUIRE(err.position() == 0);
    REQUIRE(err.point().size() == 1);
    REQUIRE(err.point()[0] == Catch::Approx(-1.0));
  }
}

TEST_CASE("pretty-print round trip is idempotent on the corpus") {
  for (const auto& entry : testsupport::expression_corpus()) {
    Expr first = Expr::parse(entry.source, entry.dim, entry.fibre);
    std::string printed = first.to_string();
    Expr second = Expr::parse(printed, entry.dim, entry.fibre);
    REQUIRE(second.to_string() == printed);
    // and the reparse evaluates identically
    JetPoint p = testsupport::corpus_point(entry);
    REQUIRE(first.evaluate(p, 2).value() ==
            Catch::Approx(second.evaluate(p, 2).value()).margin(1e-14));
  }
}

TEST_CASE("corpus partials match finite differences to second order") {
  for (const auto& entry : testsupport::expression_corpus()) {
    Expr e = Expr::parse(entry.source, entry.dim, entry.fibre);
    JetPoint p = testsupport::corpus_point(entry);
    Jet j = e.evaluate(p, 2);
    auto f = [&](std::span<const double> z) {
      JetPoint q = p;
      q.values.assign(z.begin(), z.end());
      return e.evaluate(q, 0).value();
    };
    int m = p.dim();
    for (const auto& mi : testsupport::multi_indices_up_to(m, 2)) {
      int total = 0;
      for (int v : mi) total += v;
      if (total == 0) continue;
      double fd = finite_difference(f, p.values, mi, fd_step_for_order(total));
      INFO(entry.source);
      REQUIRE(close_rel(j.partial(mi), fd, 1e-6));
    }
  }
}

TEST_CASE("field expressions reject fibre variables and arity mismatches") {
  REQUIRE_NOTHROW(FieldExpr::parse("[x1^2, x1*x2]", 2));
  REQUIRE_THROWS_AS(FieldExpr::parse("[y1, x1]", 2), ParseError);
  REQUIRE_THROWS_AS(FieldExpr::parse("[x1]", 2), ParseError);
  REQUIRE_THROWS_AS(FieldExpr::parse("[x1, x2, x1]", 2), ParseError);
}
