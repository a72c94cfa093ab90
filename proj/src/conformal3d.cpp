#include "calderon/conformal3d.hpp"

#include <array>
#include <cmath>
#include <ostream>

#include "calderon/dn_map.hpp"
#include "calderon/format.hpp"
#include "calderon/ode.hpp"

namespace calderon::conformal {

using profiles::kCheckGridSize;
using profiles::kFunctionGridSize;
using profiles::Potential;
using profiles::uniform_grid;

namespace {

constexpr double kCMin = 1e-6;
constexpr double kCCap = 1e6;

bool strictly_monotone(const Profile& c) {
  auto grid = uniform_grid(kCheckGridSize);
  const double sign = c.eval(0.0, 1) > 0 ? 1.0 : -1.0;
  for (double x : grid)
    if (sign * c.eval(x, 1) <= 0.0) return false;
  return true;
}

}  // namespace

SolveResult solve_c_ode(const Profile& f, const Profile& h, double lambda2, double c0, double c0p,
                        const EngineOptions& opt) {
  if (c0 <= 0.0) throw std::domain_error("solve_c_ode: c(0) must be positive");
  auto grid = uniform_grid(kFunctionGridSize);
  std::vector<double> vals(grid.size());
  std::array<double, 2> y{c0, c0p};
  double blow_x = -1.0, blow_c = c0;
  std::size_t idx = 0;
  try {
    num::integrate_core(
        [&](double x, const std::array<double, 2>& s, std::array<double, 2>& ds) {
          const double lh1 = h.eval(x, 1) / h.eval(x, 0);
          ds[0] = s[1];
          ds[1] = -0.5 * lh1 * s[1] - lambda2 * f(x) * (s[0] - std::pow(s[0], 5));
        },
        0.0, 1.0, y, opt.ode(), grid,
        [&](double x, const std::array<double, 2>& s, num::StepEvent ev) {
          blow_c = s[0];
          if (s[0] < kCMin || s[0] > kCCap) {
            blow_x = x;
            return false;
          }
          if (ev == num::StepEvent::Target) vals[idx++] = s[0];
          return true;
        });
  } catch (const num::IntegrationError& e) {
    // step-size underflow next to the c ~ (1-x)^{-1/2} style singularity
    return BlowUp{e.where(), blow_c};
  }
  if (blow_x >= 0.0) return BlowUp{blow_x, blow_c};

  ConformalFactor out;
  out.c = Profile::grid_samples(std::move(vals));
  out.provenance = Provenance::OdeSolved;
  out.c0 = out.c(0.0);
  out.c1 = out.c(1.0);
  out.monotone = strictly_monotone(out.c);
  if (!out.c.positive_on_check_grid())
    return BlowUp{1.0, out.c.min_on_check_grid()};
  return out;
}

ConformalFactor c_affine_zero_freq(const Profile& h, double A, double B, Direction dir) {
  if (A <= 0.0) throw std::domain_error("c_affine_zero_freq: A must be positive");
  Profile integrand = Profile::constant(1.0) / Profile::sqrt_of(h);
  Profile u = Profile::antiderivative(integrand);  // integral_0^x ds/sqrt(h)
  Profile c;
  if (dir == Direction::FromZero) {
    c = B * u + A;
  } else {
    const double total = u(1.0);
    c = (-B) * u + (A + B * total);  // A + B * integral_x^1
  }
  if (!c.positive_on_check_grid()) {
    // report the violating x
    for (double x : uniform_grid(kCheckGridSize))
      if (c(x) <= 0.0)
        throw std::domain_error("c_affine_zero_freq: c not positive at x = " + std::to_string(x));
  }
  ConformalFactor out;
  out.c = c;
  out.provenance = Provenance::AffineZeroFrequency;
  out.c0 = c(0.0);
  out.c1 = c(1.0);
  out.monotone = (B != 0.0) && strictly_monotone(c);
  return out;
}

Profile h_from_c(const Profile& f, const Profile& c, double lambda2, double C) {
  if (C <= 0.0) throw std::domain_error("h_from_c: C must be positive");
  if (c.max_order() < 3)
    throw profiles::RepresentationError("h_from_c: c must carry three derivatives");
  {
    auto grid = uniform_grid(kCheckGridSize);
    const double sign = c.eval(0.0, 1) > 0 ? 1.0 : -1.0;
    for (double x : grid)
      if (sign * c.eval(x, 1) <= 0.0)
        throw std::domain_error("h_from_c: c' vanishes (c must be strictly monotone)");
  }
  // w = -2 (c'' + lambda^2 f (c - c^5)) / c'
  Profile cp = Profile::derivative_of(c, 1);
  Profile cpp = Profile::derivative_of(c, 2);
  Profile w = (-2.0) * ((cpp + lambda2 * (f * (c - c.pow_int(5)))) / cp);
  return C * Profile::exp_of(Profile::antiderivative(w));
}

Metric3D conformal_metric(const Metric3D& g, const Profile& c) {
  if (!c.positive_on_check_grid()) throw std::domain_error("conformal_metric: c must be positive");
  Profile c4 = c.pow_int(4);
  return Metric3D(c4 * g.f, c4 * g.h);
}

namespace {

// max over n in {0..3} and the function grid of |q_ln(g) - q_ln(g~)|
void q_deviation(const Metric3D& g, const Metric3D& gt, double lambda2, FamilyReport& rep) {
  auto grid = uniform_grid(kFunctionGridSize);
  rep.max_q_dev = 0.0;
  for (int n = 0; n <= 3; ++n) {
    Potential q = profiles::reduced_potential_3d(g, std::nullopt, lambda2, n);
    Potential qt = profiles::reduced_potential_3d(gt, std::nullopt, lambda2, n);
    for (double x : grid) {
      const double d = std::abs(q(x) - qt(x));
      if (d > rep.max_q_dev) {
        rep.max_q_dev = d;
        rep.worst_n = n;
        rep.worst_x = x;
      }
    }
  }
}

const Profile& param_profile(const std::variant<double, Profile>& param, const char* who) {
  if (!std::holds_alternative<Profile>(param))
    throw std::invalid_argument(std::string(who) +
                                ": nonzero frequency needs an explicit conformal factor c");
  return std::get<Profile>(param);
}

double param_scalar(const std::variant<double, Profile>& param, const char* who) {
  if (!std::holds_alternative<double>(param))
    throw std::invalid_argument(std::string(who) + ": zero frequency takes a scalar parameter");
  return std::get<double>(param);
}

}  // namespace

FamilyResult family_same_component(const Metric3D& g, double lambda2,
                                   const std::variant<double, Profile>& param,
                                   const EngineOptions& opt) {
  (void)opt;
  ConformalFactor cf;
  Metric3D base = g;
  if (lambda2 == 0.0) {
    const double B = param_scalar(param, "family_same_component");
    if (B == 0.0) {
      cf.c = Profile::constant(1.0);
      cf.monotone = false;
    } else {
      cf = c_affine_zero_freq(g.h, 1.0, B, Direction::FromZero);
    }
  } else {
    const Profile& c = param_profile(param, "family_same_component");
    if (std::abs(c(0.0) - 1.0) > 1e-10)
      throw std::invalid_argument("family_same_component: c(0) must equal 1");
    cf.c = c;
    cf.monotone = strictly_monotone(c);
    base = Metric3D(g.f, h_from_c(g.f, c, lambda2));
  }
  cf.provenance = Provenance::Family;
  cf.c0 = cf.c(0.0);
  cf.c1 = cf.c(1.0);

  FamilyResult out{base, conformal_metric(base, cf.c), cf, {}};
  q_deviation(out.base, out.tilde, lambda2, out.report);
  return out;
}

FamilyResult family_cross_component(const Metric3D& g, double lambda2,
                                    const std::variant<double, Profile>& param, int mode_cutoff,
                                    const EngineOptions& opt) {
  ConformalFactor cf;
  Metric3D base = g;
  if (lambda2 == 0.0) {
    const double A = param_scalar(param, "family_cross_component");
    if (A == 1.0) {
      cf.c = Profile::constant(1.0);  // identity smoke case
      cf.monotone = false;
    } else {
      Profile integrand = Profile::constant(1.0) / Profile::sqrt_of(g.h);
      const double total = Profile::antiderivative(integrand)(1.0);
      const double B = (A * A * A - A) / total;
      cf = c_affine_zero_freq(g.h, A, B, Direction::FromOne);
    }
  } else {
    const Profile& c = param_profile(param, "family_cross_component");
    const double c0 = c(0.0), c1 = c(1.0);
    if (std::abs(c1 * c1 * c1 - c0) > 1e-10)
      throw std::invalid_argument("family_cross_component: constraint c(1)^3 = c(0) violated by " +
                                  std::to_string(std::abs(c1 * c1 * c1 - c0)));
    cf.c = c;
    cf.monotone = strictly_monotone(c);
    base = Metric3D(g.f, h_from_c(g.f, c, lambda2));
  }
  cf.provenance = Provenance::Family;
  cf.c0 = cf.c(0.0);
  cf.c1 = cf.c(1.0);

  FamilyResult out{base, conformal_metric(base, cf.c), cf, {}};
  q_deviation(out.base, out.tilde, lambda2, out.report);

  // T_L agreement over the mode square
  auto tb = dn::block_table_3d(out.base, std::nullopt, lambda2, mode_cutoff, mode_cutoff, opt);
  auto tt = dn::block_table_3d(out.tilde, std::nullopt, lambda2, mode_cutoff, mode_cutoff, opt);
  for (std::size_t i = 0; i < tb.size(); ++i) {
    const double d = std::abs(tb[i].T_L - tt[i].T_L);
    if (d > out.report.tl_max_dev) {
      out.report.tl_max_dev = d;
      out.report.tl_worst_m = tb[i].m;
      out.report.tl_worst_n = tb[i].n;
    }
  }
  return out;
}

void dump_family_csv(std::ostream& os, const FamilyResult& fam) {
  os << "x,f,h,c,f_tilde,h_tilde\n";
  for (double x : uniform_grid(kFunctionGridSize))
    os << io::format_double(x) << ',' << io::format_double(fam.base.f(x)) << ','
       << io::format_double(fam.base.h(x)) << ',' << io::format_double(fam.c.c(x)) << ','
       << io::format_double(fam.tilde.f(x)) << ',' << io::format_double(fam.tilde.h(x)) << '\n';
}

}  // namespace calderon::conformal
