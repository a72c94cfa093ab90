#include <doctest.h>

#include <cmath>

#include "calderon/deformations.hpp"
#include "calderon/dn_map.hpp"

using namespace calderon;
using deform::XiVector;
using profiles::Potential;
using profiles::Profile;
using sl::Complex;

namespace {
const Potential q_zero;

// closed forms for q == 0, k = 1: v = sqrt(2) sin(pi x)
double tail1(double x) { return 1.0 - x + std::sin(2.0 * M_PI * x) / (2.0 * M_PI); }
double theta1(double t, double x) { return 1.0 + std::expm1(t) * tail1(x); }
}  // namespace

TEST_CASE("theta_kt") {
  auto spec = sl::dirichlet_spectrum(q_zero, 2);
  CHECK(deform::theta_kt(spec, 1, 0.0, 0.3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(deform::theta_kt(spec, 1, 0.5, 0.5) == doctest::Approx(theta1(0.5, 0.5)).epsilon(1e-9));
  CHECK(deform::theta_kt(spec, 2, 0.7, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(deform::theta_kt(spec, 3, 0.1, 0.5), std::invalid_argument);
  // positive for strongly negative t as well
  CHECK(deform::theta_kt(spec, 1, -3.0, 0.5) > 0.0);
}

TEST_CASE("single-mode potential deformation: closed form and endpoints") {
  auto spec = sl::dirichlet_spectrum(q_zero, 1);
  auto q0 = deform::deform_potential_single(q_zero, spec, 1, 0.0);
  for (double x : {0.0, 0.4, 1.0}) CHECK(std::abs(q0(x)) < 1e-12);

  auto qd = deform::deform_potential_single(q_zero, spec, 1, 0.5);
  // at x = 1/2 the cross term vanishes (v'(1/2) = 0): q = 8 a^2 / theta^2
  const double a = std::expm1(0.5);
  const double expect = 8.0 * a * a / (theta1(0.5, 0.5) * theta1(0.5, 0.5));
  CHECK(expect == doctest::Approx(1.91952).epsilon(1e-4));
  CHECK(qd(0.5) == doctest::Approx(expect).epsilon(1e-9));
  // endpoint preservation
  CHECK(std::abs(qd(0.0)) < 1e-9);
  CHECK(std::abs(qd(1.0)) < 1e-9);
}

TEST_CASE("single-mode deformation is isospectral") {
  auto spec = sl::dirichlet_spectrum(q_zero, 2);
  for (int k : {1, 2}) {
    auto qd = deform::deform_potential_single(q_zero, spec, k, 0.5);
    auto lam = sl::dirichlet_eigenvalues(qd, 8);
    for (int j = 1; j <= 8; ++j)
      CHECK(lam[j - 1] == doctest::Approx(j * j * M_PI * M_PI).epsilon(1e-8));
  }
}

TEST_CASE("characteristic function is preserved, Weyl function is not") {
  auto spec = sl::dirichlet_spectrum(q_zero, 1);
  auto qd = deform::deform_potential_single(q_zero, spec, 1, 0.1);
  double max_delta_dev = 0.0, max_m_dev = 0.0;
  for (int m = 0; m <= 10; ++m) {
    auto s0 = sl::spectral_functions(q_zero, Complex(static_cast<double>(m * m)));
    auto sd = sl::spectral_functions(qd, Complex(static_cast<double>(m * m)));
    max_delta_dev = std::max(max_delta_dev, std::abs(s0.Delta.real() - sd.Delta.real()));
    max_m_dev = std::max(max_m_dev, std::abs(s0.M.real() - sd.M.real()));
  }
  CHECK(max_delta_dev < 1e-8);  // Delta == Delta~ (Borg-Marchenko data differ though)
  CHECK(max_m_dev > 1e-3);
}

TEST_CASE("general xi deformation") {
  auto spec = sl::dirichlet_spectrum(q_zero, 3);

  // empty support is the identity
  auto qid = deform::deform_potential_xi(q_zero, spec, XiVector{}, {});
  CHECK(qid(0.37) == 0.0);

  // a 1x1 minor reduces to the single-mode formula
  auto q1 = deform::deform_potential_xi(q_zero, spec, XiVector::single(1, 0.4), {});
  auto qs = deform::deform_potential_single(q_zero, spec, 1, 0.4);
  double dev = 0.0;
  for (double x : profiles::uniform_grid(101)) dev = std::max(dev, std::abs(q1(x) - qs(x)));
  CHECK(dev < 1e-6);

  // two-mode deformation keeps the flat spectrum
  XiVector xi{{{1, 0.3}, {2, -0.2}}};
  auto qxi = deform::deform_potential_xi(q_zero, spec, xi, {});
  auto lam = sl::dirichlet_eigenvalues(qxi, 10);
  for (int j = 1; j <= 10; ++j)
    CHECK(lam[j - 1] == doctest::Approx(j * j * M_PI * M_PI).epsilon(2e-6));
  // endpoints preserved
  CHECK(std::abs(qxi(0.0)) < 1e-5);
  CHECK(std::abs(qxi(1.0)) < 1e-5);

  CHECK_THROWS_AS(deform::deform_potential_xi(q_zero, spec, XiVector{{{1, 0.1}, {1, 0.2}}}, {}),
                  std::invalid_argument);
}

TEST_CASE("disjoint-support composition matches the combined deformation") {
  auto spec = sl::dirichlet_spectrum(q_zero, 3);
  auto qa = deform::deform_potential_xi(q_zero, spec, XiVector::single(1, 0.3), {});
  auto spec_a = sl::dirichlet_spectrum(qa, 3);
  auto qab = deform::deform_potential_xi(qa, spec_a, XiVector::single(3, -0.25), {});
  XiVector both{{{1, 0.3}, {3, -0.25}}};
  auto qsum = deform::deform_potential_xi(q_zero, spec, both, {});
  auto l1 = sl::dirichlet_eigenvalues(qab, 8);
  auto l2 = sl::dirichlet_eigenvalues(qsum, 8);
  for (int j = 0; j < 8; ++j) CHECK(std::abs(l1[j] - l2[j]) < 1e-5);
}

TEST_CASE("metric deformation closed forms") {
  const Profile one = Profile::constant(1.0);
  auto d0 = deform::deform_metric_2d(one, 1.0, 1, 0.0);
  for (double x : {0.0, 0.5, 1.0}) CHECK(d0.f(x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d0.positive);

  auto d = deform::deform_metric_2d(one, 1.0, 1, 0.1);
  const double a = std::expm1(0.1);
  const double expect = 1.0 - 8.0 * a * a / (theta1(0.1, 0.5) * theta1(0.1, 0.5));
  CHECK(expect == doctest::Approx(0.92013).epsilon(1e-4));
  CHECK(d.f(0.5) == doctest::Approx(expect).epsilon(1e-8));
  CHECK(d.f(0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.f(1.0) == doctest::Approx(1.0).epsilon(1e-9));
  // the cross term makes the family non-positive at this t (see the window test)
  CHECK(!d.positive);

  CHECK_THROWS_AS(deform::deform_metric_2d(one, 0.0, 1, 0.1), std::invalid_argument);
}

TEST_CASE("positivity window") {
  const Profile one = Profile::constant(1.0);
  // grid-checked window for k = 1, lambda^2 = 1 sits near 0.08: the cross
  // term 4 a theta v v' dominates away from x = 1/2
  const double T1 = deform::positivity_window(one, 1.0, 1);
  CHECK(T1 > 0.04);
  CHECK(T1 < 0.15);
  // the x = 1/2 closed form still shows the t = 0.5 violation
  auto d5 = deform::deform_metric_2d(one, 1.0, 1, 0.5);
  CHECK(d5.f(0.5) == doctest::Approx(-0.91952).epsilon(1e-4));
  CHECK(!d5.positive);
  // within the window both signs of t stay positive
  for (double t : {0.9 * T1, -0.9 * T1}) {
    auto din = deform::deform_metric_2d(one, 1.0, 1, t);
    CHECK(din.positive);
  }
  // lambda^2 = -1: q_lambda = +1 > 0, window is positive as well
  CHECK(deform::positivity_window(one, -1.0, 1) > 0.0);
}

TEST_CASE("Schrodinger potential deformation") {
  const Profile one = Profile::constant(1.0);
  const Profile V0 = Profile::constant(0.0);

  auto vid = deform::deform_schrodinger_potential(one, std::nullopt, V0, 0.0, 1, 0.0);
  for (double x : {0.0, 0.5, 1.0}) CHECK(std::abs(vid(x)) < 1e-12);

  // 2D: f == 1, V == 0, lambda^2 = 0, (k,t) = (1, 0.5):
  // V~ - V = -(2/f)(log theta)'' = +(q~ - q)/f, so V~(1/2) = +1.91952
  auto vt = deform::deform_schrodinger_potential(one, std::nullopt, V0, 0.0, 1, 0.5);
  const double a = std::expm1(0.5);
  const double expect = 8.0 * a * a / (theta1(0.5, 0.5) * theta1(0.5, 0.5));
  CHECK(vt(0.5) == doctest::Approx(expect).epsilon(1e-8));
  CHECK(std::abs(vt(0.0)) < 1e-9);
  CHECK(std::abs(vt(1.0)) < 1e-9);

  // 3D requires f == h
  CHECK_THROWS_AS(deform::deform_schrodinger_potential(one, Profile::parse("1+x"), V0, 0.0, 1, 0.1),
                  std::invalid_argument);
  auto v3 = deform::deform_schrodinger_potential(one, one, V0, 0.0, 1, 0.5);
  CHECK(v3(0.5) == doctest::Approx(expect).epsilon(1e-8));

  // isospectrality of the reduced potentials (the V~ family content)
  profiles::Metric2D g(one);
  auto q = profiles::reduced_potential_2d(g, V0, 0.0);
  auto qt = profiles::reduced_potential_2d(g, vt, 0.0);
  auto l0 = sl::dirichlet_eigenvalues(q, 8);
  auto lt = sl::dirichlet_eigenvalues(qt, 8);
  for (int j = 0; j < 8; ++j) CHECK(std::abs(l0[j] - lt[j]) < 1e-7);
}
