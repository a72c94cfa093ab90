#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "calderon/dn_map.hpp"
#include "calderon/profile.hpp"
#include "calderon/sl_engine.hpp"

namespace calderon::verify {

using profiles::Metric2D;
using profiles::Metric3D;
using profiles::Potential;
using profiles::Profile;
using sl::Complex;
using sl::EngineOptions;

/// One verified quantity: pass iff value < tolerance (Less) or
/// value > tolerance (Greater).
struct Criterion {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  enum class Sense { Less, Greater } sense = Sense::Less;
  bool pass = false;
  std::string where;  // mode / x tag of the extremum

  static Criterion less(std::string name, double value, double tol, std::string where = "");
  static Criterion greater(std::string name, double value, double tol, std::string where = "");
};

struct ComparisonReport {
  std::string scenario;
  std::vector<Criterion> criteria;
  nlohmann::json environment;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

/// Max deviations of the four DN coefficient classes over |m| <= m_max.
struct DnDeviation {
  double L = 0, R = 0, T_L = 0, T_R = 0;
  int argmax_L = 0, argmax_R = 0, argmax_TL = 0, argmax_TR = 0;  // encoded m (2D) or m*1000+n
};

struct Setup2D {
  Metric2D g;
  std::optional<Profile> V;
};

struct Setup3D {
  Metric3D g;
  std::optional<Profile> V;
};

DnDeviation compare_dn_2d(const Setup2D& a, const Setup2D& b, double lambda2, int m_max,
                          const EngineOptions& opt = {});
DnDeviation compare_dn_3d(const Setup3D& a, const Setup3D& b, double lambda2, int m_max, int n_max,
                          const EngineOptions& opt = {});

/// max_k |lambda_k - lambda~_k| over the first K eigenvalues.
double compare_spectra(const Potential& q1, const Potential& q2, int K = 15,
                       const EngineOptions& opt = {});

/// |Delta(z) - Delta(0) prod_{k<=K} (1 - z/alpha_k^2)| / |Delta(z)|.
double hadamard_check(const Potential& q, Complex z, int K, const EngineOptions& opt = {});

/// |M(z) - M(0) - 2 sum_{k<=K} (Res(m;alpha_k)/alpha_k) z/(z - alpha_k^2)|
/// relative to |M(z) - M(0)|.
double mittag_leffler_check(const Potential& q, Complex z, int K, const EngineOptions& opt = {});

struct IdentityCheck {
  std::string name;
  double defect = 0.0;
  bool pass = false;
};

/// Wronskian constancy, endpoint identities, M = -D/Delta, N = -E/Delta,
/// each within 1e-9 at every sample z.
std::vector<IdentityCheck> structural_identities(const Potential& q,
                                                 const std::vector<Complex>& zs,
                                                 const EngineOptions& opt = {});

struct Witness2D {
  double boundary_dev_0 = 0;  // |sqrt(f(0)) - sqrt(f~(0))|
  double boundary_dev_1 = 0;
  double interior_max_dev = 0;
  double interior_argmax_x = 0;
};
Witness2D non_isometry_witness_2d(const Profile& f, const Profile& f_tilde);

struct Witness3D {
  double vol = 0, vol_tilde = 0;
  double relative_difference = 0;  // |vol~ - vol| / vol
};
Witness3D non_isometry_witness_3d(const Metric3D& g, const Metric3D& g_tilde);

/// Compares the DN blocks of (c g, V = 0) against (g, V = -q_c) with
/// q_c = conformal_laplacian_q(c, g), over |m| <= m_max, |n| <= n_max.
/// Requires c = 1 and c' = 0 at both endpoints (within 1e-10).
double conformal_schrodinger_link_check(const Metric3D& g, const Profile& c, int m_max, int n_max,
                       const EngineOptions& opt = {});

/// Named scenario runners; ids listed by scenario_ids().
ComparisonReport run_scenario(const std::string& id, const EngineOptions& opt = {});
std::vector<std::string> scenario_ids();
/// The ordered subset of scenarios forming the acceptance gate.
std::vector<std::string> acceptance_scenario_ids();

}  // namespace calderon::verify
