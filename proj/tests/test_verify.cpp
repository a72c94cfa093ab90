#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "calderon/verify.hpp"

using namespace calderon;
using profiles::Metric3D;
using profiles::Potential;
using profiles::Profile;
using sl::Complex;

namespace {
const Potential q_zero;
const Profile one = Profile::constant(1.0);
}  // namespace

TEST_CASE("compare_spectra") {
  CHECK(verify::compare_spectra(q_zero, q_zero, 6) < 1e-12);
  // constant shift is NOT isospectral: every eigenvalue moves by exactly 1
  Potential q_one([](double) { return 1.0; });
  CHECK(verify::compare_spectra(q_zero, q_one, 6) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hadamard product check") {
  CHECK(verify::hadamard_check(q_zero, Complex(0.0), 10) < 1e-14);
  // sin-type product: sinh(mu)/mu = prod (1 + mu^2 / k^2 pi^2) at mu = i pi/2
  const double d200 = verify::hadamard_check(q_zero, Complex(-M_PI * M_PI / 4.0), 200);
  CHECK(d200 < 0.02);
  const double d50 = verify::hadamard_check(q_zero, Complex(-M_PI * M_PI / 4.0), 50);
  const double d400 = verify::hadamard_check(q_zero, Complex(-M_PI * M_PI / 4.0), 400);
  CHECK(d50 > d200);
  CHECK(d200 > d400);
}

TEST_CASE("mittag-leffler truncation decreases") {
  sl::EngineOptions fast;
  fast.abs_tol = fast.rel_tol = 1e-9;
  const double d100 = verify::mittag_leffler_check(q_zero, Complex(1.0), 100, fast);
  const double d400 = verify::mittag_leffler_check(q_zero, Complex(1.0), 400, fast);
  CHECK(d100 < 0.01);
  CHECK(d400 < d100);
  // closed-form target: M(1) - M(0) = 1 - coth(1)
  auto s1 = sl::spectral_functions(q_zero, Complex(1.0));
  auto s0 = sl::spectral_functions(q_zero, Complex(0.0));
  CHECK((s1.M - s0.M).real() == doctest::Approx(1.0 - 1.0 / std::tanh(1.0)).epsilon(1e-10));
}

TEST_CASE("structural identities pass on closed forms and random z") {
  auto checks = verify::structural_identities(q_zero, {Complex(1.0), Complex(4.0), Complex(-1.0)});
  for (const auto& c : checks) {
    INFO(c.name, " defect=", c.defect);
    CHECK(c.pass);
  }
  Potential q([](double x) { return 1.5 * std::sin(2.0 * M_PI * x) - 0.4; });
  auto checks2 = verify::structural_identities(q, {Complex(2.0, 0.5), Complex(-3.0, 1.0)});
  for (const auto& c : checks2) CHECK(c.pass);
}

TEST_CASE("corrupted characteristic function is caught") {
  // negative control: negating Delta breaks M = -D/Delta by 2|M|
  auto sf = sl::spectral_functions(q_zero, Complex(1.0));
  const Complex corrupted_delta = -sf.Delta;
  const double defect = std::abs(sf.M + sf.D / corrupted_delta) / std::max(1.0, std::abs(sf.M));
  CHECK(defect > 1e-3);
}

TEST_CASE("non-isometry witnesses") {
  // 2D: identical profiles have zero witnesses
  auto w0 = verify::non_isometry_witness_2d(one, one);
  CHECK(w0.boundary_dev_0 == 0.0);
  CHECK(w0.interior_max_dev == 0.0);

  // 3D volume ratio for c = 1+x: int (1+x)^6 = 127/7
  Metric3D g(one, one);
  Metric3D gt(Profile::parse("(1+x)^4"), Profile::parse("(1+x)^4"));
  auto w3 = verify::non_isometry_witness_3d(g, gt);
  CHECK(w3.vol_tilde / w3.vol == doctest::Approx(127.0 / 7.0).epsilon(1e-10));
  CHECK(w3.relative_difference == doctest::Approx(127.0 / 7.0 - 1.0).epsilon(1e-9));
}

TEST_CASE("link check preconditions") {
  Metric3D g(one, one);
  CHECK(verify::conformal_schrodinger_link_check(g, one, 2, 2) < 1e-12);
  // c' != 0 on the boundary is rejected
  CHECK_THROWS_AS(verify::conformal_schrodinger_link_check(g, Profile::parse("1 + 0.1*x^2"), 2, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(verify::conformal_schrodinger_link_check(g, Profile::parse("1.5 + 0*x"), 2, 2),
                  std::invalid_argument);
}

TEST_CASE("compare_dn reflexivity") {
  verify::Setup2D s{profiles::Metric2D(Profile::parse("1.2 + 0.3*sin(pi*x)")), std::nullopt};
  auto dev = verify::compare_dn_2d(s, s, 0.9, 6);
  CHECK(dev.L < 1e-12);
  CHECK(dev.R < 1e-12);
  CHECK(dev.T_L < 1e-12);
  CHECK(dev.T_R < 1e-12);
}

TEST_CASE("scenario registry") {
  CHECK(verify::scenario_ids().size() == 10);
  CHECK(verify::acceptance_scenario_ids().size() == 9);
  CHECK_THROWS_AS(verify::run_scenario("nope"), std::invalid_argument);
  // the cheap scenarios run green end to end
  for (const char* id : {"lambda0-closed-forms", "flat-spectrum", "conformal-potential-identity"}) {
    auto rep = verify::run_scenario(id);
    CHECK(rep.all_pass());
    auto j = rep.to_json();
    CHECK(j["pass"].get<bool>());
    CHECK(j["criteria"].is_array());
    CHECK(j["environment"].contains("tol_ode_abs"));
  }
}

TEST_CASE("mittag-leffler at z = 0 is trivially exact") {
  sl::EngineOptions fast;
  fast.abs_tol = fast.rel_tol = 1e-9;
  CHECK(verify::mittag_leffler_check(q_zero, Complex(0.0), 5, fast) < 1e-14);
}

TEST_CASE("worker cap from the environment") {
  // CALDERON_THREADS=1 must serialize without changing results
  setenv("CALDERON_THREADS", "1", 1);
  auto l1 = sl::dirichlet_eigenvalues(q_zero, 4);
  unsetenv("CALDERON_THREADS");
  auto l2 = sl::dirichlet_eigenvalues(q_zero, 4);
  for (int i = 0; i < 4; ++i) CHECK(l1[i] == l2[i]);
}
