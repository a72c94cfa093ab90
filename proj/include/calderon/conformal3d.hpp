#pragma once

#include <iosfwd>
#include <variant>

#include "calderon/profile.hpp"
#include "calderon/sl_engine.hpp"

namespace calderon::conformal {

using profiles::Metric3D;
using profiles::Profile;
using sl::EngineOptions;

enum class Provenance { OdeSolved, AffineZeroFrequency, Family };

struct ConformalFactor {
  Profile c;  // positive on [0,1]
  Provenance provenance = Provenance::Family;
  double c0 = 1.0, c1 = 1.0;  // boundary values
  bool monotone = false;      // c' of constant sign on the check grid
};

/// Solution escaped (c_min, c_cap) = (1e-6, 1e6) before reaching x = 1.
struct BlowUp {
  double x_reached;
  double c_value;
};

using SolveResult = std::variant<ConformalFactor, BlowUp>;

/// Integrate c'' + (log h)'/2 c' + lambda^2 f (c - c^5) = 0 with
/// c(0) = c0, c'(0) = c0p.  c == 1 is the fixed point.
SolveResult solve_c_ode(const Profile& f, const Profile& h, double lambda2, double c0, double c0p,
                        const EngineOptions& opt = {});

enum class Direction { FromZero, FromOne };

/// c(x) = A + B * integral_0^x ds/sqrt(h)   (FromZero)
///      = A + B * integral_x^1 ds/sqrt(h)   (FromOne); rejected if not positive.
ConformalFactor c_affine_zero_freq(const Profile& h, double A, double B, Direction dir);

/// h = C exp(-2 integral_0^x (c'' + lambda^2 f (c - c^5)) / c'); requires a
/// strictly monotone c.  By construction (f, h, c) satisfy the c-ODE.
Profile h_from_c(const Profile& f, const Profile& c, double lambda2, double C = 1.0);

/// g~ = c^4 g, i.e. f~ = c^4 f, h~ = c^4 h.
Metric3D conformal_metric(const Metric3D& g, const Profile& c);

struct FamilyReport {
  double max_q_dev = 0.0;  // max over n in {0..3}, grid x of |q_ln - q~_ln|
  int worst_n = 0;
  double worst_x = 0.0;
  double tl_max_dev = 0.0;  // cross-component families only
  int tl_worst_m = 0, tl_worst_n = 0;
};

struct FamilyResult {
  Metric3D base;    // the metric actually used (h may have been rebuilt)
  Metric3D tilde;   // c^4 * base
  ConformalFactor c;
  FamilyReport report;
};

/// Gamma_D, Gamma_N in the same component: c(0) = 1.
/// lambda^2 == 0 takes the B parameter; otherwise a strictly monotone c with
/// c(0) = 1, and h is rebuilt so the c-ODE holds.
FamilyResult family_same_component(const Metric3D& g, double lambda2,
                                   const std::variant<double, Profile>& param,
                                   const EngineOptions& opt = {});

/// Gamma_D, Gamma_N in distinct components: c(1)^3 = c(0) != 1.
/// lambda^2 == 0 takes the A parameter; otherwise a strictly monotone c
/// satisfying the boundary constraint within 1e-10 (h rebuilt).  The report
/// includes the T_L agreement over |m|,|n| <= mode_cutoff.
FamilyResult family_cross_component(const Metric3D& g, double lambda2,
                                    const std::variant<double, Profile>& param,
                                    int mode_cutoff = 8, const EngineOptions& opt = {});

/// CSV dump: x, f, h, c, f_tilde, h_tilde.
void dump_family_csv(std::ostream& os, const FamilyResult& fam);

}  // namespace calderon::conformal
