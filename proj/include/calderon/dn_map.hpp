#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <vector>

#include "calderon/profile.hpp"
#include "calderon/sl_engine.hpp"

namespace calderon::dn {

using profiles::Metric2D;
using profiles::Metric3D;
using profiles::Profile;
using sl::Complex;
using sl::EngineOptions;

/// Per-mode DN block, the 2x2 matrix [[L, T_R], [T_L, R]] acting on
/// (Gamma_0, Gamma_1) Fourier coefficients.
struct DnBlock {
  int m = 0, n = 0;
  double L = 0, T_R = 0, T_L = 0, R = 0;
};

/// The frequency sits on the Dirichlet spectrum for some mode.
class FrequencyAtEigenvalueError : public std::runtime_error {
public:
  FrequencyAtEigenvalueError(int m, int n, double abs_delta);
  int m, n;
  double abs_delta;
};

/// Open arc (a, a+len) on T^1 = [-pi, pi), len in (0, 2*pi].
struct Arc {
  double a = -M_PI;
  double len = 2 * M_PI;
  bool contains(double y) const;
};

struct Mask2D {
  std::vector<Arc> arcs;
  bool contains(double y) const;
  bool empty() const { return arcs.empty(); }
  static Mask2D full();
  /// Parse "a:b,c:d" (radians).
  static Mask2D parse(const std::string& s);
};

struct Rect {
  Arc y, z;
};

struct Mask3D {
  std::vector<Rect> rects;
  bool contains(double y, double z) const;
  static Mask3D full();
  /// Parse "ay:byxaz:bz,..." (radians, 'x' separates the two arcs).
  static Mask3D parse(const std::string& s);
};

/// Fourier data on one boundary circle: coef[m + m_max], |m| <= m_max.
struct BoundaryData2D {
  int component = 0;  // 0 = Gamma_0, 1 = Gamma_1
  int m_max = 0;
  std::vector<Complex> coef;
  bool hermitian = false;  // real physical-space datum

  Complex at(int m) const { return coef[static_cast<std::size_t>(m + m_max)]; }
  static BoundaryData2D single_mode(int component, int m, Complex c, int m_max);
};

/// Fourier data on one boundary torus: coef[(m+m_max)*(2n_max+1) + (n+n_max)].
struct BoundaryData3D {
  int component = 0;
  int m_max = 0, n_max = 0;
  std::vector<Complex> coef;
  bool hermitian = false;

  Complex at(int m, int n) const {
    return coef[static_cast<std::size_t>(m + m_max) * (2 * n_max + 1) +
                static_cast<std::size_t>(n + n_max)];
  }
  static BoundaryData3D single_mode(int component, int m, int n, Complex c, int m_max, int n_max);
};

struct GuardReport {
  bool pass = true;
  int m = 0, n = 0;        // offending mode when rejected
  double abs_delta = 0.0;  // |Delta| there
  double epsilon = 0.0;    // guard threshold used
};

DnBlock dn_block_2d(const Metric2D& g, const std::optional<Profile>& V, double lambda2, int m,
                    const EngineOptions& opt = {});
/// Coefficient-level block from an already-reduced potential; only the
/// boundary values of f enter (must be positive there).  Used for comparing
/// deformed families whose interior profile need not stay positive.
DnBlock dn_block_2d_from_potential(const profiles::Potential& q, double f0, double f1, int m,
                                   const EngineOptions& opt = {});
DnBlock dn_block_3d(const Metric3D& g, const std::optional<Profile>& V, double lambda2, int m,
                    int n, const EngineOptions& opt = {});
/// V given as a plain evaluator (e.g. a conformal-Laplacian potential).
DnBlock dn_block_3d(const Metric3D& g, const std::function<double(double)>& V, double lambda2,
                    int m, int n, const EngineOptions& opt = {});

GuardReport frequency_guard_2d(const Metric2D& g, const std::optional<Profile>& V, double lambda2,
                               int m_max, const EngineOptions& opt = {});
GuardReport frequency_guard_3d(const Metric3D& g, const std::optional<Profile>& V, double lambda2,
                               int m_max, int n_max, const EngineOptions& opt = {});

/// All blocks for |m| <= m_max (2D), computed in parallel over distinct m^2.
std::vector<DnBlock> block_table_2d(const Metric2D& g, const std::optional<Profile>& V,
                                    double lambda2, int m_max, const EngineOptions& opt = {});
/// All blocks for |m| <= m_max, |n| <= n_max (3D), parallel over (m^2, n^2).
std::vector<DnBlock> block_table_3d(const Metric3D& g, const std::optional<Profile>& V,
                                    double lambda2, int m_max, int n_max,
                                    const EngineOptions& opt = {});
std::vector<DnBlock> block_table_3d(const Metric3D& g, const std::function<double(double)>& V,
                                    double lambda2, int m_max, int n_max,
                                    const EngineOptions& opt = {});

/// CSV dump: columns m,n,L,T_R,T_L,R (n blank for 2D), 17 significant digits.
void dump_blocks_csv(std::ostream& os, const std::vector<DnBlock>& blocks, bool three_d);

struct NeumannSample {
  int component;
  double y, z;  // z = 0 for 2D
  Complex value;
};

struct PartialDnResult2D {
  std::vector<double> grid;                          // boundary angles
  std::array<std::vector<Complex>, 2> full_trace;    // diagnostics, both circles
  std::vector<NeumannSample> neumann;                // restricted to Gamma_N
};

struct PartialDnResult3D {
  std::vector<double> grid;                          // shared angle grid per axis
  std::array<std::vector<Complex>, 2> full_trace;    // row-major (iy * grid + iz)
  std::vector<NeumannSample> neumann;
};

/// Partial DN map applied to psi (supported in gamma_d on psi's component),
/// sampled on a uniform boundary grid and restricted to gamma_n on
/// component gamma_n_component.
PartialDnResult2D apply_partial_dn_2d(const Metric2D& g, const std::optional<Profile>& V,
                                      double lambda2, const BoundaryData2D& psi,
                                      const Mask2D& gamma_d, int gamma_n_component,
                                      const Mask2D& gamma_n, int grid_size = 256,
                                      const EngineOptions& opt = {});

PartialDnResult3D apply_partial_dn_3d(const Metric3D& g, const std::optional<Profile>& V,
                                      double lambda2, const BoundaryData3D& psi,
                                      const Mask3D& gamma_d, int gamma_n_component,
                                      const Mask3D& gamma_n, int grid_size = 256,
                                      const EngineOptions& opt = {});

}  // namespace calderon::dn
