#pragma once

#include <complex>
#include <vector>

#include "calderon/ode.hpp"
#include "calderon/profile.hpp"

namespace calderon::sl {

using Complex = std::complex<double>;
using profiles::Potential;

/// Spectral parameter z = mu^2 of  -v'' + q v = -mu^2 v.
struct SpectralParameter {
  Complex z;
};

struct EngineOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-11;
  bool keep_trajectories = false;

  num::OdeOptions ode() const { return {abs_tol, rel_tol}; }
};

/// Pole guard: |Delta| below this means z sits on (minus) the Dirichlet
/// spectrum and the Weyl-Titchmarsh functions are treated as poles.
inline double pole_guard_epsilon(Complex z) { return 1e-8 * std::max(1.0, std::abs(z)); }

struct FssSample {
  double x;
  Complex c, cp, s, sp;
};

/// Endpoint data of the four fundamental solutions: c0,s0 carry Cauchy data
/// at x=0 and are reported at x=1; c1,s1 the reverse.
struct FssData {
  Complex c0_1, c0p_1, s0_1, s0p_1;
  Complex c1_0, c1p_0, s1_0, s1p_0;
  double wronskian_defect_left = 0.0;   // |W(c0,s0)(1) - 1|
  double wronskian_defect_right = 0.0;  // |W(c1,s1)(0) - 1|
  std::vector<FssSample> left_trajectory;   // accepted steps, (c0, s0)
  std::vector<FssSample> right_trajectory;  // accepted steps, (c1, s1)
};

/// All eight fundamental-solution values at an interior point.
struct FssAtPoint {
  double x;
  Complex c0, c0p, s0, s0p;
  Complex c1, c1p, s1, s1p;
};

struct SpectralFunctions {
  Complex Delta, D, E;
  Complex M, N;  // set only when !pole
  bool pole = false;
};

/// First K Dirichlet eigenvalues, normalized eigenfunctions and their tail
/// integrals on the shared uniform grid.
struct EigenMode {
  double lambda;
  std::vector<double> values;  // v_k, ||v_k||_2 = 1, v_k'(0) > 0
  std::vector<double> derivs;  // v_k'
  std::vector<double> tail;    // x -> integral_x^1 v_k^2
};

struct SpectralData {
  std::vector<double> grid;  // uniform, kFunctionGridSize points
  std::vector<double> eigenvalues;
  std::vector<EigenMode> modes;
};

struct Residue {
  double mu2_residue;  // residue of z -> M(z) at z = alpha_k^2 = -lambda_k
  Complex alpha_k;     // principal square root, Im >= 0
  Complex mu_residue;  // residue of mu -> M(mu^2) at mu = alpha_k
};

class SearchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

FssData integrate_fss(const Potential& q, Complex z, const EngineOptions& opt = {});
FssAtPoint fss_at(const Potential& q, Complex z, double x, const EngineOptions& opt = {});

/// Delta = s0(1,z) = W(s0,s1); D = W(c0,s1) = c0(1); E = W(c1,s0) = c1(0);
/// M = -D/Delta, N = -E/Delta (pole-flagged when |Delta| < pole guard).
SpectralFunctions spectral_functions(const Potential& q, Complex z, const EngineOptions& opt = {});

/// Eigenvalues of -d^2/dx^2 + q with Dirichlet conditions, Prufer-certified
/// brackets, bisection + Newton polish on lambda -> Delta(-lambda).
std::vector<double> dirichlet_eigenvalues(const Potential& q, int K, const EngineOptions& opt = {});

SpectralData dirichlet_spectrum(const Potential& q, int K, const EngineOptions& opt = {});

/// lambda must be within 1e-8*max(1,|lambda|) of a true eigenvalue.
EigenMode eigenfunction(const Potential& q, double lambda, const EngineOptions& opt = {});

/// mu^2-residue of M at alpha_k^2 = -lambda_k via -D / (dDelta/dmu^2), the
/// derivative by a 4th-order central stencil with step 1e-4*max(1,|alpha_k^2|).
Residue residue_at_pole(const Potential& q, int k, const EngineOptions& opt = {});
Residue residue_at_lambda(const Potential& q, double lambda_k, const EngineOptions& opt = {});

/// Scaled Prufer angle phi(1, lambda); floor(phi/pi) counts eigenvalues
/// below lambda (zeros of s0 cross multiples of pi upward).
double prufer_angle(const Potential& q, double lambda, const EngineOptions& opt = {});

}  // namespace calderon::sl
