#pragma once

#include <vector>

namespace calderon::num {

/// Not-a-knot cubic spline interpolant on a strictly increasing knot grid.
/// C2 on the interior; third derivative piecewise constant.
class CubicSpline {
public:
  CubicSpline() = default;

  /// Needs at least 4 knots.
  static CubicSpline not_a_knot(std::vector<double> x, std::vector<double> y);

  /// Derivative orders 0..3; x must lie within the knot range.
  double eval(double x, int order = 0) const;
  double operator()(double x) const { return eval(x, 0); }

  /// Cumulative integral of the spline from the first knot to each knot.
  std::vector<double> cumulative_at_knots() const;

  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }

private:
  std::vector<double> x_, y_, m_;  // knots, values, second derivatives
  bool uniform_ = false;
  double h0_ = 0.0;

  std::size_t interval(double x) const;
};

}  // namespace calderon::num
