#include "calderon/sl_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "calderon/parallel.hpp"

namespace calderon::sl {

namespace {

constexpr double kPi = 3.14159265358979323846;

// State layout: (c, c', s, s');  v'' = (q + z) v for both columns.
template <class S>
struct PairRhs {
  const Potential& q;
  S z;
  void operator()(double x, const std::array<S, 4>& y, std::array<S, 4>& dy) const {
    const S w = S(q(x)) + z;
    dy[0] = y[1];
    dy[1] = w * y[0];
    dy[2] = y[3];
    dy[3] = w * y[2];
  }
};

template <class S>
std::array<S, 4> cauchy_pair() {
  return {S(1), S(0), S(0), S(1)};  // c = 1, c' = 0, s = 0, s' = 1
}

// Integrate the (c,s) pair from x0 to x1, optionally recording the trajectory.
template <class S>
std::array<S, 4> run_pair(const Potential& q, S z, double x0, double x1, const EngineOptions& opt,
                          std::vector<FssSample>* trajectory) {
  auto y = cauchy_pair<S>();
  PairRhs<S> rhs{q, z};
  if (trajectory) {
    trajectory->push_back({x0, Complex(y[0]), Complex(y[1]), Complex(y[2]), Complex(y[3])});
    num::integrate_observed(rhs, x0, x1, y, opt.ode(), [&](double x, const std::array<S, 4>& s) {
      trajectory->push_back({x, Complex(s[0]), Complex(s[1]), Complex(s[2]), Complex(s[3])});
    });
  } else {
    num::integrate(rhs, x0, x1, y, opt.ode());
  }
  return y;
}

bool is_real(Complex z) { return z.imag() == 0.0; }

struct PairResult {
  Complex c, cp, s, sp;
};

PairResult run_pair_dispatch(const Potential& q, Complex z, double x0, double x1,
                             const EngineOptions& opt, std::vector<FssSample>* traj = nullptr) {
  if (is_real(z)) {
    auto y = run_pair<double>(q, z.real(), x0, x1, opt, traj);
    return {y[0], y[1], y[2], y[3]};
  }
  auto y = run_pair<Complex>(q, z, x0, x1, opt, traj);
  return {y[0], y[1], y[2], y[3]};
}

}  // namespace

FssData integrate_fss(const Potential& q, Complex z, const EngineOptions& opt) {
  FssData out;
  std::vector<FssSample>*lt = nullptr, *rt = nullptr;
  if (opt.keep_trajectories) {
    lt = &out.left_trajectory;
    rt = &out.right_trajectory;
  }
  PairResult left = run_pair_dispatch(q, z, 0.0, 1.0, opt, lt);
  out.c0_1 = left.c;
  out.c0p_1 = left.cp;
  out.s0_1 = left.s;
  out.s0p_1 = left.sp;
  PairResult right = run_pair_dispatch(q, z, 1.0, 0.0, opt, rt);
  out.c1_0 = right.c;
  out.c1p_0 = right.cp;
  out.s1_0 = right.s;
  out.s1p_0 = right.sp;
  out.wronskian_defect_left = std::abs(out.c0_1 * out.s0p_1 - out.c0p_1 * out.s0_1 - 1.0);
  out.wronskian_defect_right = std::abs(out.c1_0 * out.s1p_0 - out.c1p_0 * out.s1_0 - 1.0);
  return out;
}

FssAtPoint fss_at(const Potential& q, Complex z, double x, const EngineOptions& opt) {
  FssAtPoint out;
  out.x = x;
  PairResult left = run_pair_dispatch(q, z, 0.0, x, opt);
  out.c0 = left.c;
  out.c0p = left.cp;
  out.s0 = left.s;
  out.s0p = left.sp;
  PairResult right = run_pair_dispatch(q, z, 1.0, x, opt);
  out.c1 = right.c;
  out.c1p = right.cp;
  out.s1 = right.s;
  out.s1p = right.sp;
  return out;
}

SpectralFunctions spectral_functions(const Potential& q, Complex z, const EngineOptions& opt) {
  SpectralFunctions out;
  PairResult left = run_pair_dispatch(q, z, 0.0, 1.0, opt);
  PairResult right = run_pair_dispatch(q, z, 1.0, 0.0, opt);
  out.Delta = left.s;  // s0(1)
  out.D = left.c;      // W(c0,s1) at x=1 collapses to c0(1)
  out.E = right.c;     // W(c1,s0) at x=0 collapses to c1(0)
  if (std::abs(out.Delta) < pole_guard_epsilon(z)) {
    out.pole = true;
    return out;
  }
  out.M = -out.D / out.Delta;
  out.N = -out.E / out.Delta;
  return out;
}

double prufer_angle(const Potential& q, double lambda, const EngineOptions&) {
  // scaled Prufer variable (v = r sin(phi), v' = r w cos(phi)):
  //   phi' = w cos^2(phi) + ((lambda - q)/w) sin^2(phi),  w = sqrt(max(1,lambda)).
  // For large lambda the right-hand side is w + O(q/w), so the total
  // contribution of the oscillatory term is O(|q|/w) and a loose tolerance
  // counts zeros reliably at any frequency.
  const double w = std::sqrt(std::max(1.0, lambda));
  std::array<double, 1> y{0.0};
  num::OdeOptions o;
  o.abs_tol = 1e-6;
  o.rel_tol = 1e-6;
  num::integrate(
      [&q, lambda, w](double x, const std::array<double, 1>& th, std::array<double, 1>& dth) {
        const double c = std::cos(th[0]), s = std::sin(th[0]);
        dth[0] = w * c * c + ((lambda - q(x)) / w) * s * s;
      },
      0.0, 1.0, y, o);
  return y[0];
}

namespace {

int count_below(const Potential& q, double lambda, const EngineOptions& opt) {
  return static_cast<int>(std::floor(prufer_angle(q, lambda, opt) / kPi));
}

// Delta(-lambda) = s0(1) and its lambda-derivative via the variational system.
struct DeltaEval {
  double value;
  double dlambda;
};

DeltaEval delta_at_lambda(const Potential& q, double lambda, const EngineOptions& opt) {
  // y = (v, v', w, w') with w = d v / d lambda:  v'' = (q - lambda) v,
  // w'' = (q - lambda) w - v.
  std::array<double, 4> y{0.0, 1.0, 0.0, 0.0};
  num::integrate(
      [&q, lambda](double x, const std::array<double, 4>& s, std::array<double, 4>& ds) {
        const double w = q(x) - lambda;
        ds[0] = s[1];
        ds[1] = w * s[0];
        ds[2] = s[3];
        ds[3] = w * s[2] - s[0];
      },
      0.0, 1.0, y, opt.ode());
  return {y[0], y[2]};
}

double find_eigenvalue(const Potential& q, int k, const EngineOptions& opt) {
  const double qmin = q.min_on_grid(), qmax = q.max_on_grid(), qmean = q.mean_on_grid();
  const double kk = static_cast<double>(k) * k * kPi * kPi;
  // lambda_k lies in [kk+qmin, kk+qmax]; pad by a fraction of the spectral gap
  // so the Prufer counts at the bracket ends stay well-conditioned at large k.
  double lo = kk + qmin - 0.45 * (2.0 * k - 1.0) * kPi * kPi;
  double hi = kk + qmax + 0.45 * (2.0 * k + 1.0) * kPi * kPi;
  const double span = std::max(1.0, qmax - qmin);

  // widen until the bracket certifiably contains lambda_k
  int clo = count_below(q, lo, opt), chi = count_below(q, hi, opt);
  double step = span;
  for (int tries = 0; clo > k - 1 || chi < k; ++tries) {
    if (tries > 60) throw SearchError("eigenvalue bracketing failed for k=" + std::to_string(k));
    if (clo > k - 1) {
      lo -= step;
      clo = count_below(q, lo, opt);
    }
    if (chi < k) {
      hi += step;
      chi = count_below(q, hi, opt);
    }
    step *= 2.0;
  }
  // squeeze until the bracket contains exactly lambda_k
  for (int tries = 0; clo != k - 1 || chi != k; ++tries) {
    if (tries > 200) throw SearchError("eigenvalue isolation failed for k=" + std::to_string(k));
    const double mid = 0.5 * (lo + hi);
    const int cm = count_below(q, mid, opt);
    if (cm <= k - 1) {
      lo = mid;
      clo = cm;
    } else {
      hi = mid;
      chi = cm;
    }
  }

  // safeguarded Newton on Delta(-lambda), bisection fallback inside [lo, hi].
  // Converged when the residual undercuts 1e-12 * scale or lambda stops
  // moving (the residual floor is set by the integration tolerance).
  double flo = delta_at_lambda(q, lo, opt).value;
  double lambda = std::clamp(kk + qmean, lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo));
  for (int it = 0; it < 80; ++it) {
    DeltaEval d = delta_at_lambda(q, lambda, opt);
    const double scale = std::max(1.0, std::abs(lambda * d.dlambda));
    if (std::abs(d.value) < 1e-12 * scale) return lambda;
    // shrink the certified bracket with the sign information
    if ((d.value > 0) == (flo > 0)) {
      lo = lambda;
      flo = d.value;
    } else {
      hi = lambda;
    }
    const double eps_l = 1e-13 * std::max(1.0, std::abs(lambda));
    if (hi - lo < eps_l) return 0.5 * (lo + hi);
    double next = lambda - d.value / d.dlambda;
    if (!(next > lo && next < hi) || d.dlambda == 0.0) next = 0.5 * (lo + hi);
    if (std::abs(next - lambda) < eps_l) return next;
    lambda = next;
  }
  throw SearchError("eigenvalue refinement stalled for k=" + std::to_string(k));
}

}  // namespace

std::vector<double> dirichlet_eigenvalues(const Potential& q, int K, const EngineOptions& opt) {
  if (K < 1) throw std::invalid_argument("dirichlet_eigenvalues: K must be >= 1");
  std::vector<double> lam(K);
  num::parallel_for(static_cast<std::size_t>(K),
                    [&](std::size_t i) { lam[i] = find_eigenvalue(q, static_cast<int>(i) + 1, opt); });
  for (int i = 0; i + 1 < K; ++i)
    if (!(lam[i] < lam[i + 1])) throw SearchError("eigenvalues not strictly increasing");
  return lam;
}

namespace {

double simpson(const std::vector<double>& f, double h) {
  // composite Simpson; the grids used here always have an even interval count
  double acc = f.front() + f.back();
  for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
  return acc * h / 3.0;
}

EigenMode eigenmode_at(const Potential& q, double lambda, const EngineOptions& opt,
                       const std::vector<double>& grid) {
  EigenMode mode;
  mode.lambda = lambda;
  const std::size_t n = grid.size();
  mode.values.resize(n);
  mode.derivs.resize(n);
  mode.tail.resize(n);
  std::vector<double> running(n);
  // y = (v, v', J) with J' = v^2
  std::array<double, 3> y{0.0, 1.0, 0.0};
  num::integrate_grid(
      [&q, lambda](double x, const std::array<double, 3>& s, std::array<double, 3>& ds) {
        ds[0] = s[1];
        ds[1] = (q(x) - lambda) * s[0];
        ds[2] = s[0] * s[0];
      },
      0.0, grid, y, opt.ode(), [&](std::size_t i, const std::array<double, 3>& s) {
        mode.values[i] = s[0];
        mode.derivs[i] = s[1];
        running[i] = s[2];
      });
  // normalization by composite Simpson on the sampled grid
  std::vector<double> v2(n);
  for (std::size_t i = 0; i < n; ++i) v2[i] = mode.values[i] * mode.values[i];
  const double norm2 = simpson(v2, grid[1] - grid[0]);
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t i = 0; i < n; ++i) {
    mode.values[i] *= inv;
    mode.derivs[i] *= inv;
    mode.tail[i] = (running[n - 1] - running[i]) / norm2;
  }
  return mode;
}

}  // namespace

SpectralData dirichlet_spectrum(const Potential& q, int K, const EngineOptions& opt) {
  SpectralData data;
  data.grid = profiles::uniform_grid(profiles::kFunctionGridSize);
  data.eigenvalues = dirichlet_eigenvalues(q, K, opt);
  data.modes.resize(K);
  num::parallel_for(static_cast<std::size_t>(K), [&](std::size_t i) {
    data.modes[i] = eigenmode_at(q, data.eigenvalues[i], opt, data.grid);
  });
  return data;
}

EigenMode eigenfunction(const Potential& q, double lambda, const EngineOptions& opt) {
  // polish and reject inputs that do not sit on the spectrum
  double l = lambda;
  for (int it = 0; it < 8; ++it) {
    DeltaEval d = delta_at_lambda(q, l, opt);
    if (std::abs(d.value) < 1e-12 * std::max(1.0, std::abs(l * d.dlambda))) break;
    if (d.dlambda == 0.0) break;
    l -= d.value / d.dlambda;
  }
  if (std::abs(l - lambda) > 1e-8 * std::max(1.0, std::abs(lambda)))
    throw std::invalid_argument("eigenfunction: lambda is not a Dirichlet eigenvalue");
  return eigenmode_at(q, l, opt, profiles::uniform_grid(profiles::kFunctionGridSize));
}

Residue residue_at_lambda(const Potential& q, double lambda_k, const EngineOptions& opt) {
  const double z0 = -lambda_k;
  const double h = 1e-4 * std::max(1.0, std::abs(z0));
  auto delta_at_z = [&](double z) {
    PairResult left = run_pair_dispatch(q, Complex(z, 0.0), 0.0, 1.0, opt);
    return left.s.real();
  };
  const double dm2 = delta_at_z(z0 - 2 * h), dm1 = delta_at_z(z0 - h);
  const double dp1 = delta_at_z(z0 + h), dp2 = delta_at_z(z0 + 2 * h);
  const double dDelta = (dm2 - 8.0 * dm1 + 8.0 * dp1 - dp2) / (12.0 * h);
  if (std::abs(dDelta) < 1e-12)
    throw std::runtime_error("residue_at_pole: degenerate dDelta/dmu^2");
  PairResult left = run_pair_dispatch(q, Complex(z0, 0.0), 0.0, 1.0, opt);
  const double D = left.c.real();
  Residue r;
  r.mu2_residue = -D / dDelta;
  r.alpha_k = std::sqrt(Complex(z0, 0.0));  // principal branch, Im >= 0
  r.mu_residue = r.mu2_residue / (2.0 * r.alpha_k);
  return r;
}

Residue residue_at_pole(const Potential& q, int k, const EngineOptions& opt) {
  auto lam = dirichlet_eigenvalues(q, k, opt);
  return residue_at_lambda(q, lam[static_cast<std::size_t>(k) - 1], opt);
}

}  // namespace calderon::sl
