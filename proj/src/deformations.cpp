#include "calderon/deformations.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "calderon/format.hpp"
#include "calderon/spline.hpp"

namespace calderon::deform {

using num::CubicSpline;
using profiles::kCheckGridSize;
using profiles::kFunctionGridSize;
using profiles::uniform_grid;

int XiVector::max_index() const {
  int m = 0;
  for (const auto& [k, v] : entries) m = std::max(m, k);
  return m;
}

namespace {

void check_mode(const SpectralData& spec, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > spec.modes.size())
    throw std::invalid_argument("deformation: mode index k outside computed spectral data");
}

// Splined eigenfunction data for continuous evaluation between grid nodes.
struct ModeInterp {
  CubicSpline v, vp, tail;

  ModeInterp(const SpectralData& spec, int k) {
    const auto& mode = spec.modes[static_cast<std::size_t>(k - 1)];
    v = CubicSpline::not_a_knot(spec.grid, mode.values);
    vp = CubicSpline::not_a_knot(spec.grid, mode.derivs);
    tail = CubicSpline::not_a_knot(spec.grid, mode.tail);
  }
};

// -2 (log theta)'' = 2 [ 2 a theta v v' + a^2 v^4 ] / theta^2,  a = e^t - 1.
double neg2_dlogtheta(const ModeInterp& mi, double a, double x) {
  const double vv = mi.v(x);
  const double vp = mi.vp(x);
  const double th = 1.0 + a * mi.tail(x);
  const double v2 = vv * vv;
  return 2.0 * (2.0 * a * th * vv * vp + a * a * v2 * v2) / (th * th);
}

}  // namespace

double theta_kt(const SpectralData& spec, int k, double t, double x) {
  check_mode(spec, k);
  ModeInterp mi(spec, k);
  return 1.0 + std::expm1(t) * mi.tail(x);
}

Potential deform_potential_single(const Potential& q, const SpectralData& spec, int k, double t) {
  check_mode(spec, k);
  auto mi = std::make_shared<ModeInterp>(spec, k);
  const double a = std::expm1(t);
  auto info = q.info();
  return Potential([q, mi, a](double x) { return q(x) + neg2_dlogtheta(*mi, a, x); }, info);
}

namespace {

// Finite-difference weights (Fornberg) for derivative `order` at x0 over the
// given nodes; exact rational recursion, works for one-sided stencils.
std::vector<double> fd_weights(double x0, const std::vector<double>& nodes, int order) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(order) + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, order);
    double c2 = 1.0;
    double c5 = c4;
    c4 = nodes[static_cast<std::size_t>(i)] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int s = mn; s >= 1; --s)
          c[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] =
              c1 * (s * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(s - 1)] -
                    c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(s)]) / c2;
        c[static_cast<std::size_t>(i)][0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
      }
      for (int s = mn; s >= 1; --s)
        c[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)] =
            (c4 * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)] -
             s * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(s - 1)]) / c3;
      c[static_cast<std::size_t>(j)][0] *= c4 / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)][static_cast<std::size_t>(order)];
  return w;
}

// Second derivative of grid samples, 4th order: central 5-point stencil in the
// interior, 6-point one-sided stencils near the ends.
std::vector<double> second_derivative_grid(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> d2(n, 0.0);
  for (std::size_t i = 2; i + 2 < n; ++i)
    d2[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) /
            (12.0 * h * h);
  const int width = 6;
  std::vector<double> nodes(width);
  for (std::size_t i : {std::size_t{0}, std::size_t{1}, n - 2, n - 1}) {
    std::size_t start = i < 2 ? 0 : n - width;
    for (int j = 0; j < width; ++j) nodes[static_cast<std::size_t>(j)] = h * (start + static_cast<std::size_t>(j));
    auto w = fd_weights(h * i, nodes, 2);
    double acc = 0.0;
    for (int j = 0; j < width; ++j) acc += w[static_cast<std::size_t>(j)] * f[start + static_cast<std::size_t>(j)];
    d2[i] = acc;
  }
  return d2;
}

}  // namespace

Potential deform_potential_xi(const Potential& q, const SpectralData& spec, const XiVector& xi,
                              const EngineOptions&) {
  // drop zero entries; empty support returns q unchanged
  std::vector<std::pair<int, double>> sup;
  for (const auto& e : xi.entries)
    if (e.second != 0.0) sup.push_back(e);
  if (sup.empty()) return q;
  std::sort(sup.begin(), sup.end());
  for (std::size_t i = 0; i + 1 < sup.size(); ++i)
    if (sup[i].first == sup[i + 1].first)
      throw std::invalid_argument("xi vector: duplicate index");
  for (const auto& [k, t] : sup) check_mode(spec, k);

  const auto& grid = spec.grid;
  const std::size_t ng = grid.size();
  const std::size_t s = sup.size();

  // cumulative cross integrals C_ij(x) = integral_0^x v_i v_j on the grid
  std::vector<std::vector<double>> cum(s * s);
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = a; b < s; ++b) {
      const auto& va = spec.modes[static_cast<std::size_t>(sup[a].first - 1)].values;
      const auto& vb = spec.modes[static_cast<std::size_t>(sup[b].first - 1)].values;
      std::vector<double> prod(ng);
      for (std::size_t i = 0; i < ng; ++i) prod[i] = va[i] * vb[i];
      cum[a * s + b] = CubicSpline::not_a_knot(grid, prod).cumulative_at_knots();
    }

  // log det Theta_S over the grid
  std::vector<double> logdet(ng);
  Eigen::MatrixXd theta(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
  for (std::size_t i = 0; i < ng; ++i) {
    for (std::size_t a = 0; a < s; ++a) {
      const double fac = std::expm1(sup[a].second);
      for (std::size_t b = 0; b < s; ++b) {
        const auto& c = cum[std::min(a, b) * s + std::max(a, b)];
        const double tail_ab = c[ng - 1] - c[i];
        theta(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            (a == b ? 1.0 : 0.0) + fac * tail_ab;
      }
    }
    const double det = theta.determinant();
    if (!(det > 0.0))
      throw std::runtime_error("deform_potential_xi: det Theta not positive (internal error)");
    logdet[i] = std::log(det);
  }

  auto d2 = second_derivative_grid(logdet, grid[1] - grid[0]);
  std::vector<double> correction(ng);
  for (std::size_t i = 0; i < ng; ++i) correction[i] = -2.0 * d2[i];
  auto corr = std::make_shared<CubicSpline>(CubicSpline::not_a_knot(grid, correction));
  return Potential([q, corr](double x) { return q(x) + corr->eval(x, 0); }, q.info());
}

DeformedMetric2D deform_metric_2d(const Profile& f, double lambda2, int k, double t,
                                  const EngineOptions& opt) {
  if (lambda2 == 0.0)
    throw std::invalid_argument("deform_metric_2d: lambda^2 must be nonzero for this family");
  profiles::Metric2D g(f);
  Potential ql = profiles::reduced_potential_2d(g, std::nullopt, lambda2);
  SpectralData spec = sl::dirichlet_spectrum(ql, k, opt);
  ModeInterp mi(spec, k);
  const double a = std::expm1(t);
  auto grid = uniform_grid(kFunctionGridSize);
  std::vector<double> vals(grid.size());
  // f_{lambda,k,t} = (q_lambda - 2(log theta)'') / (-lambda^2) = f - corr/lambda^2
  for (std::size_t i = 0; i < grid.size(); ++i)
    vals[i] = f(grid[i]) - neg2_dlogtheta(mi, a, grid[i]) / lambda2;
  Profile def = Profile::grid_samples(std::move(vals));
  return DeformedMetric2D{def, def.positive_on_check_grid()};
}

double positivity_window(const Profile& f, double lambda2, int k, const EngineOptions& opt) {
  if (lambda2 == 0.0) throw std::invalid_argument("positivity_window: lambda^2 must be nonzero");
  profiles::Metric2D g(f);
  Potential ql = profiles::reduced_potential_2d(g, std::nullopt, lambda2);
  SpectralData spec = sl::dirichlet_spectrum(ql, k, opt);
  ModeInterp mi(spec, k);
  auto grid = uniform_grid(kCheckGridSize);

  auto family_positive = [&](double T) {
    // 33 symmetric samples spanning the open interval (-T, T)
    for (int j = 1; j <= 33; ++j) {
      const double t = -T + 2.0 * T * j / 34.0;
      const double a = std::expm1(t);
      for (double x : grid)
        if (f(x) - neg2_dlogtheta(mi, a, x) / lambda2 <= 0.0) return false;
    }
    return true;
  };

  const double cap = 10.0;
  if (family_positive(cap)) return cap;
  double lo = 0.0, hi = cap;
  while (hi - lo > 1e-3 * std::max(hi, 1e-6)) {
    const double mid = 0.5 * (lo + hi);
    if (family_positive(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

Profile deform_schrodinger_potential(const Profile& f, const std::optional<Profile>& h,
                                     const Profile& V, double lambda2, int k, double t,
                                     const EngineOptions& opt) {
  Potential base;
  if (h) {
    auto grid = uniform_grid(kCheckGridSize);
    for (double x : grid)
      if (std::abs(f(x) - (*h)(x)) > 1e-12 * std::max(1.0, std::abs(f(x))))
        throw std::invalid_argument(
            "deform_schrodinger_potential: 3D family requires f == h");
    profiles::Metric3D g(f, *h);
    base = profiles::reduced_potential_3d(g, std::optional<Profile>(V), lambda2, 0);
  } else {
    profiles::Metric2D g(f);
    base = profiles::reduced_potential_2d(g, V, lambda2);
  }
  SpectralData spec = sl::dirichlet_spectrum(base, k, opt);
  ModeInterp mi(spec, k);
  const double a = std::expm1(t);
  auto grid = uniform_grid(kFunctionGridSize);
  std::vector<double> vals(grid.size());
  // V - (2/f)(log theta)'' = V + neg2_dlogtheta / f
  for (std::size_t i = 0; i < grid.size(); ++i)
    vals[i] = V(grid[i]) + neg2_dlogtheta(mi, a, grid[i]) / f(grid[i]);
  return Profile::grid_samples(std::move(vals));
}

void dump_family_csv(std::ostream& os, const std::string& name, const Profile& original,
                     const Profile& deformed) {
  os << "x," << name << "_original," << name << "_deformed\n";
  for (double x : uniform_grid(kFunctionGridSize))
    os << io::format_double(x) << ',' << io::format_double(original(x)) << ','
       << io::format_double(deformed(x)) << '\n';
}

}  // namespace calderon::deform
