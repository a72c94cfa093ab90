#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "calderon/expr.hpp"

namespace calderon::profiles {

/// Guard grid for positivity/boundedness checks.
inline constexpr int kCheckGridSize = 2049;
/// Eigenfunction / deformation sampling grid.
inline constexpr int kFunctionGridSize = 1025;

/// n uniform points on [0,1], endpoints included.
std::vector<double> uniform_grid(int n);

/// A representation cannot supply what was asked of it (derivative order,
/// smoothness).
class RepresentationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ProfileImpl {
public:
  virtual ~ProfileImpl() = default;
  virtual double eval(double x, int order) const = 0;  // 0 <= order <= max_order()
  virtual int max_order() const = 0;
};

/// Radial profile on [0,1]: value semantics over an immutable implementation,
/// safe to share across threads.  Exact first and second derivatives; most
/// representations also carry a third derivative for internal consumers.
class Profile {
public:
  Profile();  // constant 0
  static Profile parse(const std::string& src);
  static Profile expression(expr::Expression e);
  static Profile constant(double v);
  /// Not-a-knot cubic spline through the samples (>= 4 points covering [0,1]).
  static Profile samples(std::vector<double> x, std::vector<double> y);
  static Profile grid_samples(std::vector<double> y);  // uniform grid on [0,1]

  double operator()(double x) const { return eval(x, 0); }
  /// order 0..max_order(); x in [0,1].
  double eval(double x, int order) const;
  int max_order() const;

  bool positive_on_check_grid() const;
  bool bounded_on_check_grid() const;
  double min_on_check_grid() const;
  double max_on_check_grid() const;

  // algebra with exact derivative propagation
  friend Profile operator+(const Profile&, const Profile&);
  friend Profile operator-(const Profile&, const Profile&);
  friend Profile operator*(const Profile&, const Profile&);
  friend Profile operator/(const Profile&, const Profile&);
  friend Profile operator*(double, const Profile&);
  friend Profile operator+(const Profile&, double);
  Profile pow_int(int k) const;  // k >= 1
  static Profile sqrt_of(const Profile& u);
  static Profile exp_of(const Profile& u);
  static Profile derivative_of(const Profile& p, int k = 1);
  /// x -> C + integral_0^x integrand (value via spline of an RK pass; derivatives exact).
  static Profile antiderivative(const Profile& integrand, double C = 0.0);

private:
  friend struct ProfileAccess;
  explicit Profile(std::shared_ptr<const ProfileImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const ProfileImpl> impl_;
};

struct ProfileAccess;  // internal algebra hook

/// Spec operation: profile evaluation restricted to derivative orders 0..2.
double eval_profile(const Profile& p, double x, int order);

struct Metric2D {
  Profile f;
  explicit Metric2D(Profile f_in);  // enforces positivity on the check grid
};

struct Metric3D {
  Profile f, h;
  Metric3D(Profile f_in, Profile h_in);  // positivity + h twice differentiable
};

/// Where a reduced potential came from (diagnostic metadata).
struct ReductionInfo {
  int dim = 0;  // 0 = raw, 2, 3
  double lambda2 = 0.0;
  int n = 0;
  bool has_potential = false;
};

/// Reduced 1D potential q(x); bounded on the check grid (verified at
/// construction).  Evaluation is thread-safe.
class Potential {
public:
  Potential();  // identically zero
  Potential(std::function<double(double)> q, ReductionInfo info = {});
  explicit Potential(const Profile& p, ReductionInfo info = {});

  double operator()(double x) const { return q_(x); }
  const ReductionInfo& info() const { return info_; }
  double min_on_grid() const { return qmin_; }
  double max_on_grid() const { return qmax_; }
  double mean_on_grid() const { return qmean_; }  // composite Simpson over the check grid

private:
  std::function<double(double)> q_;
  ReductionInfo info_;
  double qmin_ = 0.0, qmax_ = 0.0, qmean_ = 0.0;
  void check_bounded();
};

/// q = (V - lambda^2) f, V == 0 when absent.
Potential reduced_potential_2d(const Metric2D& g, const std::optional<Profile>& V, double lambda2);

/// q = ((log h)')^2/16 + (log h)''/4 + n^2 f/h + (V - lambda^2) f.
Potential reduced_potential_3d(const Metric3D& g, const std::optional<Profile>& V, double lambda2,
                               int n);
/// Same with V supplied as a plain evaluator (used when V has no profile form).
Potential reduced_potential_3d(const Metric3D& g, const std::function<double(double)>& V,
                               double lambda2, int n);

/// q(x) = -c^{-1/4} (1/f) [w'' + (log h)'/2 w'],  w = c^{1/4}.
/// Vanishes identically for constant c.
Potential conformal_laplacian_q(const Profile& c, const Metric3D& g);

}  // namespace calderon::profiles
