#include "calderon/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace calderon::num {

CubicSpline CubicSpline::not_a_knot(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("spline: x/y size mismatch");
  if (n < 4) throw std::invalid_argument("spline: need at least 4 knots");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(x[i + 1] > x[i])) throw std::invalid_argument("spline: knots must be increasing");

  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];

  // Solve for interior moments M_1..M_{n-2}; not-a-knot eliminates M_0, M_{n-1}:
  //   M_0     = (1 + r0) M_1 - r0 M_2,          r0 = h_0 / h_1
  //   M_{n-1} = (1 + r1) M_{n-2} - r1 M_{n-3},  r1 = h_{n-2} / h_{n-3}
  const std::size_t m = n - 2;
  std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
  for (std::size_t i = 1; i <= m; ++i) {
    rhs[i - 1] = (y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1];
    lower[i - 1] = h[i - 1] / 6.0;
    diag[i - 1] = (h[i - 1] + h[i]) / 3.0;
    upper[i - 1] = h[i] / 6.0;
  }
  const double r0 = h[0] / h[1];
  diag[0] += lower[0] * (1.0 + r0);
  upper[0] -= lower[0] * r0;
  const double r1 = h[n - 2] / h[n - 3];
  diag[m - 1] += upper[m - 1] * (1.0 + r1);
  lower[m - 1] -= upper[m - 1] * r1;

  // Thomas algorithm
  for (std::size_t i = 1; i < m; ++i) {
    double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> M(n, 0.0);
  M[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t i = m - 1; i >= 1; --i) M[i] = (rhs[i - 1] - upper[i - 1] * M[i + 1]) / diag[i - 1];
  M[0] = (1.0 + r0) * M[1] - r0 * M[2];
  M[n - 1] = (1.0 + r1) * M[n - 2] - r1 * M[n - 3];

  CubicSpline s;
  s.uniform_ = true;
  s.h0_ = h[0];
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (std::abs(h[i] - h[0]) > 1e-12 * std::max(1.0, std::abs(h[0]))) {
      s.uniform_ = false;
      break;
    }
  s.x_ = std::move(x);
  s.y_ = std::move(y);
  s.m_ = std::move(M);
  return s;
}

std::size_t CubicSpline::interval(double x) const {
  const std::size_t n = x_.size();
  if (uniform_) {
    double t = (x - x_.front()) / h0_;
    auto i = static_cast<std::ptrdiff_t>(t);
    if (i < 0) i = 0;
    if (i > static_cast<std::ptrdiff_t>(n) - 2) i = static_cast<std::ptrdiff_t>(n) - 2;
    return static_cast<std::size_t>(i);
  }
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i == 0) return 0;
  if (i >= n) return n - 2;
  return i - 1;
}

double CubicSpline::eval(double x, int order) const {
  if (x_.empty()) throw std::logic_error("spline: empty");
  const double lo = x_.front(), hi = x_.back();
  const double pad = 1e-12 * std::max(1.0, std::abs(hi - lo));
  if (x < lo - pad || x > hi + pad) throw std::domain_error("spline: x outside knot range");
  std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double A = x_[i + 1] - x, B = x - x_[i];
  const double Mi = m_[i], Mj = m_[i + 1];
  switch (order) {
    case 0:
      return Mi * A * A * A / (6.0 * h) + Mj * B * B * B / (6.0 * h) +
             (y_[i] - Mi * h * h / 6.0) * A / h + (y_[i + 1] - Mj * h * h / 6.0) * B / h;
    case 1:
      return -Mi * A * A / (2.0 * h) + Mj * B * B / (2.0 * h) + (y_[i + 1] - y_[i]) / h -
             (Mj - Mi) * h / 6.0;
    case 2:
      return (Mi * A + Mj * B) / h;
    case 3:
      return (Mj - Mi) / h;
    default:
      throw std::invalid_argument("spline: derivative order must be 0..3");
  }
}

std::vector<double> CubicSpline::cumulative_at_knots() const {
  std::vector<double> c(x_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    const double h = x_[i + 1] - x_[i];
    c[i + 1] = c[i] + h * (y_[i] + y_[i + 1]) / 2.0 - h * h * h * (m_[i] + m_[i + 1]) / 24.0;
  }
  return c;
}

}  // namespace calderon::num
