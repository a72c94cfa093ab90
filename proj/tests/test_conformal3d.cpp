#include <doctest.h>

#include <cmath>

#include "calderon/conformal3d.hpp"
#include "calderon/quadrature.hpp"

using namespace calderon;
using conformal::ConformalFactor;
using conformal::Direction;
using profiles::Metric3D;
using profiles::Profile;

namespace {
const Profile one = Profile::constant(1.0);
}

TEST_CASE("conformal factor ODE") {
  // c == 1 is the fixed point of c'' + (log h)'/2 c' + lambda^2 f (c - c^5) = 0
  auto r1 = conformal::solve_c_ode(one, Profile::parse("1 + 0.3*x"), 2.0, 1.0, 0.0);
  REQUIRE(std::holds_alternative<ConformalFactor>(r1));
  auto c1 = std::get<ConformalFactor>(r1);
  for (double x : {0.0, 0.5, 1.0}) CHECK(c1.c(x) == doctest::Approx(1.0).epsilon(1e-10));

  // lambda^2 = 0, h == 1: c = A + B x
  auto r2 = conformal::solve_c_ode(one, one, 0.0, 1.0, 1.0);
  REQUIRE(std::holds_alternative<ConformalFactor>(r2));
  auto c2 = std::get<ConformalFactor>(r2);
  for (double x : {0.25, 1.0}) CHECK(c2.c(x) == doctest::Approx(1.0 + x).epsilon(1e-10));
  CHECK(c2.monotone);

  // lambda^2 = 0, h = (1+x)^2: c = 1 + log(1+x)
  auto r3 = conformal::solve_c_ode(one, Profile::parse("(1+x)^2"), 0.0, 1.0, 1.0);
  REQUIRE(std::holds_alternative<ConformalFactor>(r3));
  auto c3 = std::get<ConformalFactor>(r3);
  for (double x : {0.5, 1.0}) CHECK(c3.c(x) == doctest::Approx(1.0 + std::log1p(x)).epsilon(1e-9));

  // strongly supercritical data blows past the cap before x = 1
  auto rb = conformal::solve_c_ode(one, one, 40.0, 3.0, 8.0);
  REQUIRE(std::holds_alternative<conformal::BlowUp>(rb));
  CHECK(std::get<conformal::BlowUp>(rb).x_reached <= 1.0);
}

TEST_CASE("affine zero-frequency factors") {
  auto c = conformal::c_affine_zero_freq(one, 1.0, 1.0, Direction::FromZero);
  CHECK(c.c(1.0) == doctest::Approx(2.0).epsilon(1e-11));
  CHECK(c.monotone);

  // cross-component family: A = 2, h == 1 gives c = 8 - 6x with c(0) = c(1)^3
  auto cc = conformal::c_affine_zero_freq(one, 2.0, 6.0, Direction::FromOne);
  CHECK(cc.c(0.0) == doctest::Approx(8.0).epsilon(1e-11));
  CHECK(cc.c(1.0) == doctest::Approx(2.0).epsilon(1e-11));
  CHECK(cc.c(0.5) == doctest::Approx(5.0).epsilon(1e-10));

  auto cb = conformal::c_affine_zero_freq(Profile::parse("2 + x"), 3.0, 0.0, Direction::FromZero);
  for (double x : {0.0, 0.7}) CHECK(cb.c(x) == doctest::Approx(3.0));
  CHECK(!cb.monotone);

  CHECK_THROWS_AS(conformal::c_affine_zero_freq(one, 1.0, -2.0, Direction::FromZero),
                  std::domain_error);
  CHECK_THROWS_AS(conformal::c_affine_zero_freq(one, -1.0, 1.0, Direction::FromZero),
                  std::domain_error);
}

TEST_CASE("h_from_c") {
  Profile c = Profile::parse("1+x");
  // lambda^2 = 0, c'' = 0: the exponent vanishes, h == C
  Profile h = conformal::h_from_c(one, c, 0.0, 1.0);
  for (double x : {0.0, 0.4, 1.0}) CHECK(h(x) == doctest::Approx(1.0).epsilon(1e-10));

  // lambda^2 = 0 with curved monotone c: h = C c'(0)^2 / c'^2
  Profile c2 = Profile::parse("1 + x + 0.2*x^2");
  Profile h2 = conformal::h_from_c(one, c2, 0.0, 2.0);
  for (double x : {0.0, 0.5, 1.0}) {
    const double cp = 1.0 + 0.4 * x;
    CHECK(h2(x) == doctest::Approx(2.0 * 1.0 / (cp * cp)).epsilon(1e-9));
  }

  // lambda^2 = 1, c = 1+x, f == 1: quadrature oracle for the exponent
  Profile h3 = conformal::h_from_c(one, c, 1.0, 1.0);
  auto exponent = [](double x) {
    // -2 int_0^x ((1+s) - (1+s)^5) ds
    auto F = [](double u) { return u * u / 2.0 - u * u * u * u * u * u / 6.0; };
    return -2.0 * (F(1.0 + x) - F(1.0));
  };
  for (double x : {0.0, 0.3, 0.8, 1.0})
    CHECK(h3(x) == doctest::Approx(std::exp(exponent(x))).epsilon(1e-9));

  // degenerate factor: c' == 0
  CHECK_THROWS_AS(conformal::h_from_c(one, one, 0.0, 1.0), std::domain_error);
}

TEST_CASE("h_from_c satisfies the c-ODE residual") {
  Profile c = Profile::parse("1 + x + 0.1*sin(x)");
  const double lambda2 = 0.8;
  Profile f = Profile::parse("1.1 + 0.2*x");
  Profile h = conformal::h_from_c(f, c, lambda2, 1.0);
  double res = 0.0;
  for (double x : profiles::uniform_grid(257)) {
    const double lh1 = h.eval(x, 1) / h.eval(x, 0);
    const double cv = c(x);
    res = std::max(res, std::abs(c.eval(x, 2) + 0.5 * lh1 * c.eval(x, 1) +
                                 lambda2 * f(x) * (cv - std::pow(cv, 5))));
  }
  CHECK(res < 1e-8);
}

TEST_CASE("conformal metric scaling") {
  Metric3D g(one, one);
  Metric3D same = conformal::conformal_metric(g, one);
  CHECK(same.f(0.7) == doctest::Approx(1.0));

  Profile c = Profile::parse("1+x");
  Metric3D gt = conformal::conformal_metric(g, c);
  CHECK(gt.f(1.0) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(gt.h(1.0) == doctest::Approx(16.0).epsilon(1e-12));
  // volume element ratio sqrt|g~| / sqrt|g| = c^6
  Metric3D g2(Profile::parse("1.3 + 0.1*x"), Profile::parse("1 + 0.2*x"));
  Metric3D g2t = conformal::conformal_metric(g2, c);
  for (double x : {0.2, 0.9}) {
    const double ratio = std::sqrt(g2t.f(x) * g2t.f(x) * g2t.h(x)) /
                         std::sqrt(g2.f(x) * g2.f(x) * g2.h(x));
    CHECK(ratio == doctest::Approx(std::pow(c(x), 6)).epsilon(1e-12));
  }
}

TEST_CASE("same-component families") {
  Metric3D g(one, one);
  // B = 0 is the identity
  auto fid = conformal::family_same_component(g, 0.0, 0.0);
  CHECK(fid.report.max_q_dev < 1e-14);

  // lambda^2 = 0, B = 1: g~ = (1+x)^4 g and all reduced potentials agree
  auto fam = conformal::family_same_component(g, 0.0, 1.0);
  CHECK(fam.report.max_q_dev < 1e-10);
  CHECK(fam.tilde.f(1.0) == doctest::Approx(16.0).epsilon(1e-9));

  // lambda^2 = 1 with supplied c: h is rebuilt via the exponent formula
  auto fam1 = conformal::family_same_component(g, 1.0, Profile::parse("1+x"));
  CHECK(fam1.report.max_q_dev < 1e-9);
  CHECK(fam1.base.h(0.0) == doctest::Approx(1.0).epsilon(1e-10));

  // c(0) != 1 is rejected
  CHECK_THROWS_AS(conformal::family_same_component(g, 1.0, Profile::parse("2+x")),
                  std::invalid_argument);
}

TEST_CASE("cross-component families") {
  Metric3D g(one, one);
  auto fam = conformal::family_cross_component(g, 0.0, 2.0, 3);
  CHECK(fam.c.c0 == doctest::Approx(8.0).epsilon(1e-10));
  CHECK(fam.c.c1 == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fam.report.max_q_dev < 1e-9);
  CHECK(fam.report.tl_max_dev < 1e-8);

  // A = 1 collapses to the identity smoke case
  auto fid = conformal::family_cross_component(g, 0.0, 1.0, 2);
  CHECK(fid.report.tl_max_dev < 1e-12);

  // boundary constraint c(1)^3 = c(0) violated
  CHECK_THROWS_AS(conformal::family_cross_component(g, 1.0, Profile::parse("1+x"), 2),
                  std::invalid_argument);

  // nonzero frequency with a mild monotone factor: c(1) = 1.05, c(0) = 1.05^3
  {
    const double c1 = 1.05, c0 = c1 * c1 * c1;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12f - %.12f*x", c0, c0 - c1);
    auto famc = conformal::family_cross_component(g, 0.5, Profile::parse(buf), 3);
    CHECK(famc.report.max_q_dev < 1e-9);
    CHECK(famc.report.tl_max_dev < 1e-8);
  }
}

TEST_CASE("zero-frequency ODE solutions match the affine family") {
  Profile h = Profile::parse("1 + 0.6*x + 0.1*sin(2*x)");
  const double B = 0.7;
  auto affine = conformal::c_affine_zero_freq(h, 1.0, B, Direction::FromZero);
  auto ode = conformal::solve_c_ode(one, h, 0.0, 1.0, B / std::sqrt(h(0.0)));
  REQUIRE(std::holds_alternative<ConformalFactor>(ode));
  auto cf = std::get<ConformalFactor>(ode);
  double dev = 0.0;
  for (double x : profiles::uniform_grid(101)) dev = std::max(dev, std::abs(cf.c(x) - affine.c(x)));
  CHECK(dev < 1e-9);
}
