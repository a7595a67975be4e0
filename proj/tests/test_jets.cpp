#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "finsler/finite_diff.hpp"
#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"
#include "finsler/sampling.hpp"
#include "support/helpers.hpp"

using namespace finsler;
using testsupport::close_rel;

TEST_CASE("coordinate jets and polynomial differentiation") {
  // x^2 at x = 3: value 9, d/dx = 6, (1/2) d^2/dx^2 = 1
  Jet x = Jet::variable(0, 3.0, 1, 2);
  Jet sq = x * x;
  REQUIRE(sq.value() == Catch::Approx(9.0));
  REQUIRE(sq.coeffs()[1] == Catch::Approx(6.0));
  REQUIRE(sq.coeffs()[2] == Catch::Approx(1.0));

  Jet z = Jet::variable(0, 0.0, 2, 4);
  int nonzero = 0;
  for (double c : z.coeffs())
    if (c != 0.0) ++nonzero;
  REQUIRE(nonzero == 1);
  std::vector<int> e10{1, 0};
  REQUIRE(z.coeff(e10) == 1.0);
}

TEST_CASE("taylor series of elementary functions") {
  Jet s = sin(Jet::variable(0, 0.0, 1, 3));
  REQUIRE(s.coeffs()[0] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(s.coeffs()[1] == Catch::Approx(1.0));
  REQUIRE(s.coeffs()[2] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(s.coeffs()[3] == Catch::Approx(-1.0 / 6.0));

  Jet ex = exp(Jet::variable(0, 0.0, 1, 4));
  const double expect[5] = {1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
  for (int k = 0; k <= 4; ++k) REQUIRE(ex.coeffs()[k] == Catch::Approx(expect[k]));
}

TEST_CASE("gradient of the euclidean norm via sqrt") {
  // sqrt(y1^2 + y2^2) at y = (3,4): value 5, gradient (3/5, 4/5)
  Jet y1 = Jet::variable(0, 3.0, 2, 2);
  Jet y2 = Jet::variable(1, 4.0, 2, 2);
  Jet r = sqrt(y1 * y1 + y2 * y2);
  REQUIRE(r.value() == Catch::Approx(5.0));
  std::vector<int> e10{1, 0}, e01{0, 1};
  REQUIRE(r.partial(e10) == Catch::Approx(3.0 / 5.0));
  REQUIRE(r.partial(e01) == Catch::Approx(4.0 / 5.0));
}

TEST_CASE("domain violations are reported with the offending value") {
  Jet z = Jet::constant(0.0, 1, 2);
  REQUIRE_THROWS_AS(Jet::constant(1.0, 1, 2) / z, JetError);
  REQUIRE_THROWS_AS(sqrt(Jet::constant(-1.0, 1, 2)), JetError);
  REQUIRE_THROWS_AS(log(Jet::constant(0.0, 1, 2)), JetError);
  try {
    sqrt(Jet::constant(-2.0, 1, 2));
  } catch (const JetError& e) {
    REQUIRE(e.op() == "sqrt");
    REQUIRE(e.offending_value() == Catch::Approx(-2.0));
  }
}

TEST_CASE("order and index preconditions") {
  REQUIRE_THROWS_AS(Jet::constant(1.0, 1, 5), std::invalid_argument);
  REQUIRE_THROWS_AS(Jet::variable(3, 0.0, 2, 2), std::invalid_argument);
  Jet j = Jet::variable(0, 1.0, 2, 2);
  std::vector<int> deg3{2, 1};
  REQUIRE_THROWS_AS(j.partial(deg3), std::invalid_argument);
}

TEST_CASE("partial extraction with factorial un-normalization") {
  // d^2(x^2 y)/dx dy = 2x = 2 at (1,1)
  Jet x = Jet::variable(0, 1.0, 2, 3);
  Jet y = Jet::variable(1, 1.0, 2, 3);
  Jet f = x * x * y;
  std::vector<int> e11{1, 1}, e00{0, 0};
  REQUIRE(f.partial(e11) == Catch::Approx(2.0));
  REQUIRE(f.partial(e00) == Catch::Approx(f.value()));

  // hessian in y of E = (y1^2+y2^2)/2 is the identity
  Jet ya = Jet::variable(0, 0.3, 2, 2);
  Jet yb = Jet::variable(1, -0.8, 2, 2);
  Jet e = (ya * ya + yb * yb) * 0.5;
  std::vector<int> e20{2, 0}, e02{0, 2};
  REQUIRE(e.partial(e20) == Catch::Approx(1.0));
  REQUIRE(e.partial(e02) == Catch::Approx(1.0));
  REQUIRE(e.partial(e11) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("ring laws on random jets") {
  Rng rng = make_rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    int m = rng.uniform_int(1, 8);
    auto random_jet = [&] {
      Jet j = Jet::constant(rng.uniform(-2.0, 2.0), m, 4);
      for (int i = 0; i < m; ++i)
        j += rng.uniform(-1.0, 1.0) * Jet::variable(i, rng.uniform(-1.0, 1.0), m, 4);
      Jet k = j;
      return j * k + rng.uniform(-1.0, 1.0);  // fill higher coefficients
    };
    Jet a = random_jet(), b = random_jet(), c = random_jet();
    Jet lhs = (a * b) * c;
    Jet rhs = a * (b * c);
    Jet dist_l = a * (b + c);
    Jet dist_r = a * b + a * c;
    double scale = 1.0;
    for (double v : lhs.coeffs()) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < lhs.size(); ++i) {
      REQUIRE(std::abs(lhs.coeffs()[i] - rhs.coeffs()[i]) <= 1e-12 * scale);
      REQUIRE(std::abs(dist_l.coeffs()[i] - dist_r.coeffs()[i]) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("chain rule consistency against finite differences") {
  // random composite expressions, partials up to order 3
  Rng rng = make_rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    double a = rng.uniform(0.3, 1.2), b = rng.uniform(-1.0, 1.0);
    auto f = [a, b](std::span<const double> z) {
      return std::exp(0.3 * z[0]) * std::sin(z[1]) + a / (2.0 + std::cos(z[0])) +
             std::sqrt(z[0] * z[0] + z[1] * z[1] + 1.5) * b;
    };
    std::vector<double> pt{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    Jet x = Jet::variable(0, pt[0], 2, 3);
    Jet y = Jet::variable(1, pt[1], 2, 3);
    Jet j = exp(0.3 * x) * sin(y) + a / (2.0 + cos(x)) + sqrt(x * x + y * y + 1.5) * b;
    for (const auto& mi : testsupport::multi_indices_up_to(2, 3)) {
      double jet_val = j.partial(mi);
      double fd = finite_difference(f, pt, mi);
      REQUIRE(close_rel(jet_val, fd, 1e-5));
    }
  }
}

TEST_CASE("jet linear solver: identity and diagonal cases") {
  int m = 1;
  Mat<Jet> eye(2, 2, Jet::constant(0.0, m, 2));
  eye(0, 0) = Jet::constant(1.0, m, 2);
  eye(1, 1) = Jet::constant(1.0, m, 2);
  std::vector<Jet> b{Jet::variable(0, 0.5, m, 2), Jet::constant(-2.0, m, 2)};
  std::vector<Jet> x = solve_linear(eye, b);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < x[i].size(); ++k)
      REQUIRE(x[i].coeffs()[k] == Catch::Approx(b[i].coeffs()[k]).margin(1e-15));

  Mat<Jet> diag(2, 2, Jet::constant(0.0, m, 2));
  diag(0, 0) = Jet::constant(2.0, m, 2);
  diag(1, 1) = Jet::constant(4.0, m, 2);
  std::vector<Jet> b2{Jet::constant(2.0, m, 2), Jet::constant(8.0, m, 2)};
  std::vector<Jet> x2 = solve_linear(diag, b2);
  REQUIRE(x2[0].value() == Catch::Approx(1.0));
  REQUIRE(x2[1].value() == Catch::Approx(2.0));
}

TEST_CASE("jet linear solver differentiates through the solve") {
  // A = [[x, 0], [0, 1]] at x = 2, b = (1, 1): first component is 1/x,
  // so value 1/2 and d/dx = -1/4.  Cross-checked against finite
  // differences of repeated numeric solves.
  Mat<Jet> a(2, 2, Jet::constant(0.0, 1, 2));
  a(0, 0) = Jet::variable(0, 2.0, 1, 2);
  a(1, 1) = Jet::constant(1.0, 1, 2);
  std::vector<Jet> b{Jet::constant(1.0, 1, 2), Jet::constant(1.0, 1, 2)};
  std::vector<Jet> x = solve_linear(a, b);
  REQUIRE(x[0].value() == Catch::Approx(0.5));
  std::vector<int> e1{1};
  REQUIRE(x[0].partial(e1) == Catch::Approx(-0.25));
  auto numeric = [](std::span<const double> z) {
    DMat am(2, 2, 0.0);
    am(0, 0) = z[0];
    am(1, 1) = 1.0;
    return solve_linear(am, std::vector<double>{1.0, 1.0})[0];
  };
  std::vector<double> pt{2.0};
  double fd = finite_difference(numeric, pt, e1, 1e-5);
  REQUIRE(close_rel(x[0].partial(e1), fd, 1e-8));
}

TEST_CASE("jet linear solver: singular value-part matrix is rejected") {
  Mat<Jet> a(2, 2, Jet::constant(0.0, 1, 1));
  a(0, 0) = Jet::variable(0, 0.0, 1, 1);  // zero constant term
  a(1, 1) = Jet::constant(1.0, 1, 1);
  std::vector<Jet> b{Jet::constant(1.0, 1, 1), Jet::constant(1.0, 1, 1)};
  REQUIRE_THROWS_AS(solve_linear(a, b), DegenerateError);
}

TEST_CASE("solver residual property on random jet systems") {
  Rng rng = make_rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    int n = rng.uniform_int(2, 5);
    int m = 3;
    Mat<Jet> a(n, n, Jet::constant(0.0, m, 3));
    std::vector<Jet> b;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Jet e = Jet::constant(rng.uniform(-1.0, 1.0) + (i == j ? 3.0 : 0.0), m, 3);
        for (int v = 0; v < m; ++v)
          e += rng.uniform(-0.5, 0.5) * Jet::variable(v, rng.uniform(-1.0, 1.0), m, 3);
        a(i, j) = e;
      }
      b.push_back(Jet::variable(rng.uniform_int(0, m - 1), rng.uniform(-1.0, 1.0), m, 3));
    }
    std::vector<Jet> x = solve_linear(a, b);
    double bscale = 1.0;
    for (const auto& j : b)
      for (double v : j.coeffs()) bscale = std::max(bscale, std::abs(v));
    for (int i = 0; i < n; ++i) {
      Jet r = -b[i];
      for (int j = 0; j < n; ++j) r += a(i, j) * x[j];
      for (double v : r.coeffs()) REQUIRE(std::abs(v) <= 1e-10 * bscale);
    }
  }
}

TEST_CASE("finite difference oracle basics") {
  auto cube = [](std::span<const double> z) { return z[0] * z[0] * z[0]; };
  std::vector<double> pt{1.0};
  std::vector<int> e2{2};
  REQUIRE(close_rel(finite_difference(cube, pt, e2, 1e-4), 6.0, 1e-6));
  auto constant = [](std::span<const double>) { return 3.5; };
  REQUIRE(finite_difference(constant, pt, e2, 1e-4) == Catch::Approx(0.0).margin(1e-9));

  // randers-type energy: mixed x/y partial, jets vs finite differences
  auto randers_e = [](std::span<const double> z) {
    double f = std::sqrt(z[2] * z[2] + z[3] * z[3]) + 0.3 * z[2] * (1.0 + 0.1 * z[0]);
    return 0.5 * f * f;
  };
  std::vector<double> pt4{0.4, -0.2, 0.9, 0.6};
  Jet x1 = Jet::variable(0, pt4[0], 4, 2);
  Jet y1 = Jet::variable(2, pt4[2], 4, 2);
  Jet y2 = Jet::variable(3, pt4[3], 4, 2);
  Jet f = sqrt(y1 * y1 + y2 * y2) + 0.3 * y1 * (1.0 + 0.1 * x1);
  Jet e = 0.5 * f * f;
  std::vector<int> mixed{1, 0, 1, 0};
  double fd = finite_difference(randers_e, pt4, mixed, 1e-4);
  REQUIRE(close_rel(e.partial(mixed), fd, 1e-5));
}

TEST_CASE("derivative and remap plumbing") {
  Jet x = Jet::variable(0, 0.7, 2, 3);
  Jet y = Jet::variable(1, -0.3, 2, 3);
  Jet f = x * x * y + y * y;
  Jet fx = f.derivative(0);
  REQUIRE(fx.order() == 2);
  REQUIRE(fx.value() == Catch::Approx(2 * 0.7 * -0.3));
  std::vector<int> map{0, 2};
  Jet g = f.remapped(4, map);
  REQUIRE(g.num_vars() == 4);
  REQUIRE(g.value() == Catch::Approx(f.value()));
  std::vector<int> mi_src{1, 1}, mi_dst{1, 0, 1, 0};
  REQUIRE(g.partial(mi_dst) == Catch::Approx(f.partial(mi_src)));
}
