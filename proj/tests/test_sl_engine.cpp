#include <doctest.h>

#include <cmath>
#include <complex>

#include "calderon/sl_engine.hpp"

using namespace calderon;
using profiles::Potential;
using profiles::Profile;
using sl::Complex;

namespace {
const Potential q_zero;
const Potential q_five([](double) { return 5.0; });
}  // namespace

TEST_CASE("fundamental solutions at lambda = 0 closed forms") {
  // q == 0, z = 1: c0(1) = cosh 1, s0(1) = sinh 1
  auto fss = sl::integrate_fss(q_zero, Complex(1.0));
  CHECK(fss.c0_1.real() == doctest::Approx(std::cosh(1.0)).epsilon(1e-11));
  CHECK(fss.s0_1.real() == doctest::Approx(std::sinh(1.0)).epsilon(1e-11));
  CHECK(fss.c1_0.real() == doctest::Approx(std::cosh(1.0)).epsilon(1e-11));
  CHECK(fss.s1_0.real() == doctest::Approx(-std::sinh(1.0)).epsilon(1e-11));
  CHECK(fss.wronskian_defect_left < 1e-10);   // < 10 * tol
  CHECK(fss.wronskian_defect_right < 1e-10);

  // z = 0 limit: v'' = 0, so s0(1) = 1, c0(1) = 1
  auto f0 = sl::integrate_fss(q_zero, Complex(0.0));
  CHECK(f0.s0_1.real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f0.c0_1.real() == doctest::Approx(1.0).epsilon(1e-12));

  // constant-potential shift oracle: Delta_{q0}(z) = Delta_0(z + q0)
  auto f5 = sl::integrate_fss(q_five, Complex(1.0));
  CHECK(f5.s0_1.real() == doctest::Approx(std::sinh(std::sqrt(6.0)) / std::sqrt(6.0)).epsilon(1e-11));
}

TEST_CASE("spectral functions") {
  auto sf = sl::spectral_functions(q_zero, Complex(1.0));
  CHECK(!sf.pole);
  CHECK(sf.Delta.real() == doctest::Approx(std::sinh(1.0)).epsilon(1e-11));
  CHECK(sf.M.real() == doctest::Approx(-1.0 / std::tanh(1.0)).epsilon(1e-11));
  CHECK(sf.N.real() == doctest::Approx(-1.0 / std::tanh(1.0)).epsilon(1e-11));

  // first Dirichlet eigenvalue: z = -pi^2 is a pole
  auto sp = sl::spectral_functions(q_zero, Complex(-M_PI * M_PI));
  CHECK(sp.pole);

  // z = 0: Delta = 1, M = N = -1 (limits of sinh(mu)/mu and -mu coth(mu))
  auto s0 = sl::spectral_functions(q_zero, Complex(0.0));
  CHECK(s0.Delta.real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s0.M.real() == doctest::Approx(-1.0).epsilon(1e-11));
  CHECK(s0.N.real() == doctest::Approx(-1.0).epsilon(1e-11));
}

TEST_CASE("complex spectral parameter") {
  const Complex z(0.0, 1.0);  // mu^2 = i
  const Complex mu = std::sqrt(z);
  auto sf = sl::spectral_functions(q_zero, z);
  CHECK(std::abs(sf.Delta - std::sinh(mu) / mu) < 1e-10);
  CHECK(std::abs(sf.M + mu / std::tanh(mu)) < 1e-9);
}

TEST_CASE("Dirichlet spectrum") {
  auto lam = sl::dirichlet_eigenvalues(q_zero, 3);
  CHECK(lam[0] == doctest::Approx(M_PI * M_PI).epsilon(1e-10));
  CHECK(lam[1] == doctest::Approx(4 * M_PI * M_PI).epsilon(1e-10));
  CHECK(lam[2] == doctest::Approx(9 * M_PI * M_PI).epsilon(1e-10));

  auto l5 = sl::dirichlet_eigenvalues(q_five, 1);
  CHECK(l5[0] == doctest::Approx(5.0 + M_PI * M_PI).epsilon(1e-10));

  // zeros of Delta sit at minus the eigenvalues
  for (double l : lam) {
    auto sf = sl::spectral_functions(q_zero, Complex(-l));
    CHECK(sf.pole);
  }
}

TEST_CASE("eigenfunctions, normalization and tails") {
  auto spec = sl::dirichlet_spectrum(q_zero, 2);
  const auto& m1 = spec.modes[0];
  const std::size_t mid = spec.grid.size() / 2;
  // v1 = sqrt(2) sin(pi x)
  CHECK(m1.values[mid] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(m1.tail[mid] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(m1.tail.front() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(m1.tail.back() == 0.0);
  CHECK(m1.derivs.front() > 0.0);  // sign convention v'(0) > 0

  // composite Simpson norm check
  double h = spec.grid[1] - spec.grid[0];
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    double w = (i == 0 || i + 1 == spec.grid.size()) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * m1.values[i] * m1.values[i];
  }
  CHECK(acc * h / 3.0 == doctest::Approx(1.0).epsilon(1e-8));

  // second mode: v2 = sqrt(2) sin(2 pi x), vanishing at x = 1/2
  CHECK(std::abs(spec.modes[1].values[mid]) < 1e-9);

  CHECK_THROWS_AS(sl::eigenfunction(q_zero, M_PI * M_PI + 0.5), std::invalid_argument);
  auto m = sl::eigenfunction(q_zero, M_PI * M_PI);
  CHECK(m.values[mid] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("residues at poles") {
  // closed form for q == 0: mu^2-residue at alpha_k^2 = -k^2 pi^2 is 2 k^2 pi^2
  auto r1 = sl::residue_at_pole(q_zero, 1);
  CHECK(r1.mu2_residue == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-9));
  CHECK(r1.alpha_k.imag() == doctest::Approx(M_PI).epsilon(1e-10));
  CHECK(r1.alpha_k.real() == doctest::Approx(0.0));
  // mu-residue = mu^2-residue / (2 alpha_k)
  CHECK(std::abs(r1.mu_residue - r1.mu2_residue / (2.0 * r1.alpha_k)) < 1e-12);

  auto r2 = sl::residue_at_pole(q_zero, 2);
  CHECK(r2.mu2_residue == doctest::Approx(8.0 * M_PI * M_PI).epsilon(1e-9));

  // constant shift moves the pole to -(5 + pi^2) but leaves the residue
  // value invariant (substitute w = z + 5 in the shift oracle)
  auto r5 = sl::residue_at_pole(q_five, 1);
  CHECK(r5.mu2_residue == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-8));
  CHECK(r5.alpha_k.imag() == doctest::Approx(std::sqrt(5.0 + M_PI * M_PI)).epsilon(1e-9));
}

TEST_CASE("interior-point fundamental solutions are consistent") {
  Potential q([](double x) { return 2.0 * std::sin(3.0 * x); });
  const Complex z(2.5, 0.0);
  auto at = sl::fss_at(q, z, 0.6);
  auto sf = sl::spectral_functions(q, z);
  // W(s0, s1) is x-independent and collapses to s0(1) at the right endpoint
  Complex delta_mid = at.s0 * at.s1p - at.s0p * at.s1;
  CHECK(std::abs(delta_mid - sf.Delta) < 1e-10);
  Complex d_mid = at.c0 * at.s1p - at.c0p * at.s1;
  CHECK(std::abs(-d_mid / delta_mid - sf.M) < 1e-9);
}

TEST_CASE("prufer counting") {
  // between lambda_1 = pi^2 and lambda_2 = 4 pi^2 the count is 1
  CHECK(static_cast<int>(std::floor(sl::prufer_angle(q_zero, 20.0) / M_PI)) == 1);
  CHECK(static_cast<int>(std::floor(sl::prufer_angle(q_zero, 5.0) / M_PI)) == 0);
  CHECK(static_cast<int>(std::floor(sl::prufer_angle(q_zero, 90.0) / M_PI)) == 3);
}
