#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace calderon::num {

/// Adaptive Gauss-Kronrod (G7,K15) quadrature of f over [a,b].
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(std::forward<F>(f), a, b,
                                                                       15, tol, &err);
}

}  // namespace calderon::num
