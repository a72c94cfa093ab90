#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "calderon/profile.hpp"
#include "calderon/sl_engine.hpp"

namespace calderon::deform {

using profiles::Potential;
using profiles::Profile;
using sl::EngineOptions;
using sl::SpectralData;

/// Single-mode deformation parameters; k must be within the spectral range.
struct DeformationParam {
  int k = 1;
  double t = 0.0;
};

/// Finite-support sequence xi: (index k >= 1, value xi_k), indices distinct.
struct XiVector {
  std::vector<std::pair<int, double>> entries;
  int max_index() const;
  static XiVector single(int k, double t) { return XiVector{{{k, t}}}; }
};

/// theta_{k,t}(x) = 1 + (e^t - 1) * integral_x^1 v_k^2; strictly positive.
double theta_kt(const SpectralData& spec, int k, double t, double x);

/// q_{k,t} = q - 2 (log theta_{k,t})'' through the closed form
///   -2 (log theta)'' = 2 [ 2(e^t-1) theta v v' + (e^t-1)^2 v^4 ] / theta^2,
/// no numerical differentiation.  Endpoint values of q are preserved.
Potential deform_potential_single(const Potential& q, const SpectralData& spec, int k, double t);

/// General finite-support deformation q_xi = q - 2 (log det Theta_S)'',
/// the second derivative by 4th-order finite differences on the grid.
Potential deform_potential_xi(const Potential& q, const SpectralData& spec, const XiVector& xi,
                              const EngineOptions& opt = {});

struct DeformedMetric2D {
  Profile f;        // spline over the eigenfunction grid
  bool positive;    // > 0 on the check grid
};

/// f_{lambda,k,t} = (q_lambda)_{k,t} / (-lambda^2); lambda^2 must be nonzero.
DeformedMetric2D deform_metric_2d(const Profile& f, double lambda2, int k, double t,
                                  const EngineOptions& opt = {});

/// Largest T (bisection, relative 1e-3, capped at 10) with f_{lambda,k,t} > 0
/// on the check grid for 33 t-samples spanning (-T, T).
double positivity_window(const Profile& f, double lambda2, int k, const EngineOptions& opt = {});

/// V_tilde = V - (2/f) (log theta_{k,t})'' built on the spectral data of
/// q_{lambda,V} (2D) or q_{lambda,V,n=0} (3D; requires f == h).
Profile deform_schrodinger_potential(const Profile& f, const std::optional<Profile>& h,
                                     const Profile& V, double lambda2, int k, double t,
                                     const EngineOptions& opt = {});

/// CSV family dump: x, <name>_original, <name>_deformed over the grid.
void dump_family_csv(std::ostream& os, const std::string& name, const Profile& original,
                     const Profile& deformed);

}  // namespace calderon::deform
