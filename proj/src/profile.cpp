#include "calderon/profile.hpp"

#include <array>
#include <cmath>

#include "calderon/ode.hpp"
#include "calderon/spline.hpp"

namespace calderon::profiles {

std::vector<double> uniform_grid(int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = static_cast<double>(i) / (n - 1);
  g.back() = 1.0;
  return g;
}

namespace {

void check_domain(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("profile: x outside [0,1]");
}

class ConstImpl final : public ProfileImpl {
public:
  explicit ConstImpl(double v) : v_(v) {}
  double eval(double, int order) const override { return order == 0 ? v_ : 0.0; }
  int max_order() const override { return 3; }

private:
  double v_;
};

class ExprImpl final : public ProfileImpl {
public:
  explicit ExprImpl(expr::Expression e) {
    d_[0] = e;
    for (int k = 1; k <= kMaxOrder; ++k) d_[k] = d_[k - 1].derivative();
  }
  double eval(double x, int order) const override { return d_[order](x); }
  int max_order() const override { return kMaxOrder; }

private:
  static constexpr int kMaxOrder = 3;
  std::array<expr::Expression, kMaxOrder + 1> d_;
};

class SplineImpl final : public ProfileImpl {
public:
  explicit SplineImpl(num::CubicSpline s) : s_(std::move(s)) {}
  double eval(double x, int order) const override { return s_.eval(x, order); }
  int max_order() const override { return 3; }

private:
  num::CubicSpline s_;
};

class SumImpl final : public ProfileImpl {
public:
  SumImpl(std::shared_ptr<const ProfileImpl> a, std::shared_ptr<const ProfileImpl> b, double sb)
      : a_(std::move(a)), b_(std::move(b)), sb_(sb) {}
  double eval(double x, int order) const override {
    return a_->eval(x, order) + sb_ * b_->eval(x, order);
  }
  int max_order() const override { return std::min(a_->max_order(), b_->max_order()); }

private:
  std::shared_ptr<const ProfileImpl> a_, b_;
  double sb_;
};

class ScaleImpl final : public ProfileImpl {
public:
  ScaleImpl(double s, std::shared_ptr<const ProfileImpl> a) : s_(s), a_(std::move(a)) {}
  double eval(double x, int order) const override { return s_ * a_->eval(x, order); }
  int max_order() const override { return a_->max_order(); }

private:
  double s_;
  std::shared_ptr<const ProfileImpl> a_;
};

class ShiftImpl final : public ProfileImpl {
public:
  ShiftImpl(std::shared_ptr<const ProfileImpl> a, double c) : a_(std::move(a)), c_(c) {}
  double eval(double x, int order) const override {
    return a_->eval(x, order) + (order == 0 ? c_ : 0.0);
  }
  int max_order() const override { return a_->max_order(); }

private:
  std::shared_ptr<const ProfileImpl> a_;
  double c_;
};

class ProductImpl final : public ProfileImpl {
public:
  ProductImpl(std::shared_ptr<const ProfileImpl> a, std::shared_ptr<const ProfileImpl> b)
      : a_(std::move(a)), b_(std::move(b)) {}
  double eval(double x, int order) const override {
    switch (order) {
      case 0: return a_->eval(x, 0) * b_->eval(x, 0);
      case 1: return a_->eval(x, 1) * b_->eval(x, 0) + a_->eval(x, 0) * b_->eval(x, 1);
      case 2:
        return a_->eval(x, 2) * b_->eval(x, 0) + 2.0 * a_->eval(x, 1) * b_->eval(x, 1) +
               a_->eval(x, 0) * b_->eval(x, 2);
      case 3:
        return a_->eval(x, 3) * b_->eval(x, 0) + 3.0 * a_->eval(x, 2) * b_->eval(x, 1) +
               3.0 * a_->eval(x, 1) * b_->eval(x, 2) + a_->eval(x, 0) * b_->eval(x, 3);
      default: throw RepresentationError("product: derivative order too high");
    }
  }
  int max_order() const override { return std::min(a_->max_order(), b_->max_order()); }

private:
  std::shared_ptr<const ProfileImpl> a_, b_;
};

// w = u / v via Leibniz on u = w v.
class QuotientImpl final : public ProfileImpl {
public:
  QuotientImpl(std::shared_ptr<const ProfileImpl> u, std::shared_ptr<const ProfileImpl> v)
      : u_(std::move(u)), v_(std::move(v)) {}
  double eval(double x, int order) const override {
    double u0 = u_->eval(x, 0), v0 = v_->eval(x, 0);
    double w0 = u0 / v0;
    if (order == 0) return w0;
    double u1 = u_->eval(x, 1), v1 = v_->eval(x, 1);
    double w1 = (u1 - w0 * v1) / v0;
    if (order == 1) return w1;
    double u2 = u_->eval(x, 2), v2 = v_->eval(x, 2);
    double w2 = (u2 - 2.0 * w1 * v1 - w0 * v2) / v0;
    if (order == 2) return w2;
    double u3 = u_->eval(x, 3), v3 = v_->eval(x, 3);
    double w3 = (u3 - 3.0 * w2 * v1 - 3.0 * w1 * v2 - w0 * v3) / v0;
    if (order == 3) return w3;
    throw RepresentationError("quotient: derivative order too high");
  }
  int max_order() const override { return std::min(u_->max_order(), v_->max_order()); }

private:
  std::shared_ptr<const ProfileImpl> u_, v_;
};

// s = sqrt(u) via Leibniz on u = s^2.
class SqrtImpl final : public ProfileImpl {
public:
  explicit SqrtImpl(std::shared_ptr<const ProfileImpl> u) : u_(std::move(u)) {}
  double eval(double x, int order) const override {
    double s0 = std::sqrt(u_->eval(x, 0));
    if (order == 0) return s0;
    double s1 = u_->eval(x, 1) / (2.0 * s0);
    if (order == 1) return s1;
    double s2 = (u_->eval(x, 2) - 2.0 * s1 * s1) / (2.0 * s0);
    if (order == 2) return s2;
    double s3 = (u_->eval(x, 3) - 6.0 * s1 * s2) / (2.0 * s0);
    if (order == 3) return s3;
    throw RepresentationError("sqrt: derivative order too high");
  }
  int max_order() const override { return u_->max_order(); }

private:
  std::shared_ptr<const ProfileImpl> u_;
};

class ExpImpl final : public ProfileImpl {
public:
  explicit ExpImpl(std::shared_ptr<const ProfileImpl> u) : u_(std::move(u)) {}
  double eval(double x, int order) const override {
    double v = std::exp(u_->eval(x, 0));
    if (order == 0) return v;
    double u1 = u_->eval(x, 1);
    if (order == 1) return u1 * v;
    double u2 = u_->eval(x, 2);
    if (order == 2) return (u2 + u1 * u1) * v;
    double u3 = u_->eval(x, 3);
    if (order == 3) return (u3 + 3.0 * u1 * u2 + u1 * u1 * u1) * v;
    throw RepresentationError("exp: derivative order too high");
  }
  int max_order() const override { return u_->max_order(); }

private:
  std::shared_ptr<const ProfileImpl> u_;
};

class DerivImpl final : public ProfileImpl {
public:
  DerivImpl(std::shared_ptr<const ProfileImpl> a, int k) : a_(std::move(a)), k_(k) {}
  double eval(double x, int order) const override { return a_->eval(x, order + k_); }
  int max_order() const override { return a_->max_order() - k_; }

private:
  std::shared_ptr<const ProfileImpl> a_;
  int k_;
};

// C + integral_0^x u:  value through a spline over an RK pass, derivatives
// exact through the integrand.
class AntiderivImpl final : public ProfileImpl {
public:
  AntiderivImpl(std::shared_ptr<const ProfileImpl> u, double C) : u_(std::move(u)), C_(C) {
    auto grid = uniform_grid(kFunctionGridSize);
    std::vector<double> cum(grid.size(), 0.0);
    std::array<double, 1> y{0.0};
    num::OdeOptions opt;
    opt.abs_tol = opt.rel_tol = 1e-12;
    num::integrate_grid([this](double x, const std::array<double, 1>&,
                               std::array<double, 1>& dy) { dy[0] = u_->eval(x, 0); },
                        0.0, grid, y, opt, [&](std::size_t i, const std::array<double, 1>& s) {
                          cum[i] = s[0];
                        });
    spline_ = num::CubicSpline::not_a_knot(std::move(grid), std::move(cum));
  }
  double eval(double x, int order) const override {
    if (order == 0) return C_ + spline_.eval(x, 0);
    return u_->eval(x, order - 1);
  }
  int max_order() const override { return std::min(3, u_->max_order() + 1); }

private:
  std::shared_ptr<const ProfileImpl> u_;
  double C_;
  num::CubicSpline spline_;
};

std::shared_ptr<const ProfileImpl> impl_of(const Profile& p);

}  // namespace

// private accessor for algebra helpers
struct ProfileAccess {
  static std::shared_ptr<const ProfileImpl> impl(const Profile& p);
  static Profile wrap(std::shared_ptr<const ProfileImpl> impl);
};

Profile::Profile() : impl_(std::make_shared<ConstImpl>(0.0)) {}

Profile Profile::parse(const std::string& src) { return expression(expr::Expression::parse(src)); }

Profile Profile::expression(expr::Expression e) {
  double v;
  if (e.constant_value(&v)) return constant(v);
  return Profile(std::make_shared<ExprImpl>(std::move(e)));
}

Profile Profile::constant(double v) { return Profile(std::make_shared<ConstImpl>(v)); }

Profile Profile::samples(std::vector<double> x, std::vector<double> y) {
  if (x.size() < 4) throw RepresentationError("profile samples: need at least 4 points");
  if (std::abs(x.front()) > 1e-12 || std::abs(x.back() - 1.0) > 1e-12)
    throw std::invalid_argument("profile samples must cover [0,1]");
  x.front() = 0.0;
  x.back() = 1.0;
  return Profile(std::make_shared<SplineImpl>(num::CubicSpline::not_a_knot(std::move(x), std::move(y))));
}

Profile Profile::grid_samples(std::vector<double> y) {
  const int n = static_cast<int>(y.size());
  return samples(uniform_grid(n), std::move(y));
}

double Profile::eval(double x, int order) const {
  check_domain(x);
  if (order < 0 || order > impl_->max_order())
    throw RepresentationError("profile: unsupported derivative order " + std::to_string(order));
  return impl_->eval(x, order);
}

int Profile::max_order() const { return impl_->max_order(); }

bool Profile::positive_on_check_grid() const { return min_on_check_grid() > 0.0; }

bool Profile::bounded_on_check_grid() const {
  for (double x : uniform_grid(kCheckGridSize))
    if (!std::isfinite(impl_->eval(x, 0))) return false;
  return true;
}

double Profile::min_on_check_grid() const {
  double m = impl_->eval(0.0, 0);
  for (double x : uniform_grid(kCheckGridSize)) m = std::min(m, impl_->eval(x, 0));
  return m;
}

double Profile::max_on_check_grid() const {
  double m = impl_->eval(0.0, 0);
  for (double x : uniform_grid(kCheckGridSize)) m = std::max(m, impl_->eval(x, 0));
  return m;
}

std::shared_ptr<const ProfileImpl> ProfileAccess::impl(const Profile& p) { return p.impl_; }
Profile ProfileAccess::wrap(std::shared_ptr<const ProfileImpl> impl) {
  return Profile(std::move(impl));
}

namespace {
std::shared_ptr<const ProfileImpl> impl_of(const Profile& p) { return ProfileAccess::impl(p); }
}  // namespace

Profile operator+(const Profile& a, const Profile& b) {
  return ProfileAccess::wrap(std::make_shared<SumImpl>(impl_of(a), impl_of(b), 1.0));
}
Profile operator-(const Profile& a, const Profile& b) {
  return ProfileAccess::wrap(std::make_shared<SumImpl>(impl_of(a), impl_of(b), -1.0));
}
Profile operator*(const Profile& a, const Profile& b) {
  return ProfileAccess::wrap(std::make_shared<ProductImpl>(impl_of(a), impl_of(b)));
}
Profile operator/(const Profile& a, const Profile& b) {
  return ProfileAccess::wrap(std::make_shared<QuotientImpl>(impl_of(a), impl_of(b)));
}
Profile operator*(double s, const Profile& a) {
  return ProfileAccess::wrap(std::make_shared<ScaleImpl>(s, impl_of(a)));
}
Profile operator+(const Profile& a, double c) {
  return ProfileAccess::wrap(std::make_shared<ShiftImpl>(impl_of(a), c));
}

Profile Profile::pow_int(int k) const {
  if (k < 1) throw std::invalid_argument("pow_int: exponent must be >= 1");
  Profile r = *this;
  for (int i = 1; i < k; ++i) r = r * (*this);
  return r;
}

Profile Profile::sqrt_of(const Profile& u) {
  return ProfileAccess::wrap(std::make_shared<SqrtImpl>(impl_of(u)));
}
Profile Profile::exp_of(const Profile& u) {
  return ProfileAccess::wrap(std::make_shared<ExpImpl>(impl_of(u)));
}
Profile Profile::derivative_of(const Profile& p, int k) {
  if (k < 1) return p;
  if (p.max_order() < k) throw RepresentationError("derivative_of: profile too rough");
  return ProfileAccess::wrap(std::make_shared<DerivImpl>(impl_of(p), k));
}
Profile Profile::antiderivative(const Profile& integrand, double C) {
  return ProfileAccess::wrap(std::make_shared<AntiderivImpl>(impl_of(integrand), C));
}

double eval_profile(const Profile& p, double x, int order) {
  if (order < 0 || order > 2)
    throw RepresentationError("eval_profile: derivative order must be 0, 1 or 2");
  return p.eval(x, order);
}

Metric2D::Metric2D(Profile f_in) : f(std::move(f_in)) {
  if (!f.positive_on_check_grid()) throw std::domain_error("Metric2D: f must be positive on [0,1]");
}

Metric3D::Metric3D(Profile f_in, Profile h_in) : f(std::move(f_in)), h(std::move(h_in)) {
  if (!f.positive_on_check_grid()) throw std::domain_error("Metric3D: f must be positive on [0,1]");
  if (!h.positive_on_check_grid()) throw std::domain_error("Metric3D: h must be positive on [0,1]");
  if (h.max_order() < 2) throw RepresentationError("Metric3D: h must be twice differentiable");
}

Potential::Potential() : q_([](double) { return 0.0; }) { check_bounded(); }

Potential::Potential(std::function<double(double)> q, ReductionInfo info)
    : q_(std::move(q)), info_(info) {
  check_bounded();
}

Potential::Potential(const Profile& p, ReductionInfo info)
    : q_([p](double x) { return p(x); }), info_(info) {
  check_bounded();
}

void Potential::check_bounded() {
  auto grid = uniform_grid(kCheckGridSize);
  double mn = q_(0.0), mx = mn;
  // composite Simpson for the mean (grid has an even interval count)
  double acc = 0.0;
  for (int i = 0; i < kCheckGridSize; ++i) {
    double v = q_(grid[i]);
    if (!std::isfinite(v)) throw std::domain_error("potential: unbounded on [0,1]");
    mn = std::min(mn, v);
    mx = std::max(mx, v);
    double w = (i == 0 || i == kCheckGridSize - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * v;
  }
  qmin_ = mn;
  qmax_ = mx;
  qmean_ = acc * (grid[1] - grid[0]) / 3.0;
}

Potential reduced_potential_2d(const Metric2D& g, const std::optional<Profile>& V,
                               double lambda2) {
  ReductionInfo info{2, lambda2, 0, V.has_value()};
  Profile f = g.f;
  if (V) {
    Profile Vp = *V;
    return Potential([f, Vp, lambda2](double x) { return (Vp(x) - lambda2) * f(x); }, info);
  }
  return Potential([f, lambda2](double x) { return -lambda2 * f(x); }, info);
}

namespace {
double reduced_3d_value(const Metric3D& g, double Vx, double lambda2, int n, double x) {
  const double h0 = g.h.eval(x, 0), h1 = g.h.eval(x, 1), h2 = g.h.eval(x, 2);
  const double lh1 = h1 / h0;                  // (log h)'
  const double lh2 = h2 / h0 - lh1 * lh1;      // (log h)''
  const double fx = g.f.eval(x, 0);
  return lh1 * lh1 / 16.0 + lh2 / 4.0 + static_cast<double>(n) * n * fx / h0 +
         (Vx - lambda2) * fx;
}
}  // namespace

Potential reduced_potential_3d(const Metric3D& g, const std::optional<Profile>& V, double lambda2,
                               int n) {
  ReductionInfo info{3, lambda2, n, V.has_value()};
  if (V) {
    Profile Vp = *V;
    Metric3D gc = g;
    return Potential(
        [gc, Vp, lambda2, n](double x) { return reduced_3d_value(gc, Vp(x), lambda2, n, x); },
        info);
  }
  Metric3D gc = g;
  return Potential([gc, lambda2, n](double x) { return reduced_3d_value(gc, 0.0, lambda2, n, x); },
                   info);
}

Potential reduced_potential_3d(const Metric3D& g, const std::function<double(double)>& V,
                               double lambda2, int n) {
  ReductionInfo info{3, lambda2, n, true};
  Metric3D gc = g;
  auto Vc = V;
  return Potential(
      [gc, Vc, lambda2, n](double x) { return reduced_3d_value(gc, Vc(x), lambda2, n, x); }, info);
}

Potential conformal_laplacian_q(const Profile& c, const Metric3D& g) {
  if (!c.positive_on_check_grid())
    throw std::domain_error("conformal_laplacian_q: c must be positive");
  Profile cc = c, f = g.f, h = g.h;
  return Potential(
      [cc, f, h](double x) {
        const double c0 = cc.eval(x, 0), c1 = cc.eval(x, 1), c2 = cc.eval(x, 2);
        const double w0 = std::pow(c0, 0.25);
        const double w1 = 0.25 * std::pow(c0, -0.75) * c1;
        const double w2 = 0.25 * (std::pow(c0, -0.75) * c2 - 0.75 * std::pow(c0, -1.75) * c1 * c1);
        const double lh1 = h.eval(x, 1) / h.eval(x, 0);
        return -(w2 + 0.5 * lh1 * w1) / (f.eval(x, 0) * w0);
      },
      ReductionInfo{3, 0.0, 0, false});
}

}  // namespace calderon::profiles
