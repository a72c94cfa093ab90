#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace calderon::num {

struct OdeOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-11;
  double initial_step = 0.0;  // 0 = automatic
  std::size_t max_steps = 4'000'000;
};

/// Step-size underflow or step-budget exhaustion; where() is the x reached.
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& msg, double x)
      : std::runtime_error(msg + " at x = " + std::to_string(x)), x_(x) {}
  double where() const { return x_; }

private:
  double x_;
};

namespace detail {
inline double mag(double v) { return std::abs(v); }
inline double mag(const std::complex<double>& v) { return std::abs(v); }
}  // namespace detail

enum class StepEvent { Step, Target };

/// Adaptive embedded Runge-Kutta 5(4), Dormand-Prince coefficients, FSAL.
///
/// Integrates y' = rhs(x, y) from x0 to x1 (either direction).  Steps land
/// exactly on every value of `targets` (must be strictly monotone from x0
/// towards x1) and on x1.  `cb(x, y, event)` is invoked at each accepted step;
/// returning false stops the integration early.  Returns the x reached.
template <class State, class Rhs, class StepCb>
double integrate_core(Rhs&& rhs, double x0, double x1, State& y, const OdeOptions& opt,
                      std::span<const double> targets, StepCb&& cb) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b*: error estimator weights
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (x0 == x1 && targets.empty()) return x0;
  const double dir = (x1 >= x0) ? 1.0 : -1.0;
  const std::size_t n = y.size();

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ynew = y, ytmp = y;

  double x = x0;
  std::size_t next_target = 0;
  double h = opt.initial_step != 0.0 ? std::abs(opt.initial_step) * dir
                                     : 0.01 * (x1 - x0 + (x1 == x0 ? dir : 0.0));
  if (h == 0.0) h = dir * 1e-4;

  rhs(x, y, k1);

  for (std::size_t step = 0; step < opt.max_steps;) {
    // next stopping point: target or final endpoint
    double stop = (next_target < targets.size()) ? targets[next_target] : x1;
    if ((stop - x) * dir <= 0.0) {
      // already at (or past) the stop point
      if (next_target < targets.size()) {
        if (!cb(x, y, StepEvent::Target)) return x;
        ++next_target;
        continue;
      }
      return x;
    }

    bool clamped = false;
    if ((x + h - stop) * dir > 0.0) {
      h = stop - x;
      clamped = true;
    }
    if (std::abs(h) < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
      throw IntegrationError("ODE step size underflow", x);

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a21 * k1[i]);
    rhs(x + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(x + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(x + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(x + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(x + h, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(x + h, ynew, k7);

    double err2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double scale = opt.abs_tol + opt.rel_tol * std::max(detail::mag(y[i]), detail::mag(ynew[i]));
      double r = detail::mag(ei) / scale;
      err2 += r * r;
    }
    double err = std::sqrt(err2 / static_cast<double>(n));
    ++step;

    if (err <= 1.0) {
      x = clamped ? stop : x + h;
      y = ynew;
      k1 = k7;  // FSAL
      double grow = (err == 0.0) ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      h *= grow;
      if (clamped && next_target < targets.size() && stop == targets[next_target]) {
        if (!cb(x, y, StepEvent::Target)) return x;
        ++next_target;
      } else {
        if (!cb(x, y, StepEvent::Step)) return x;
      }
      if (next_target >= targets.size() && (x - x1) * dir >= 0.0) return x;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));  // k1 still valid at (x, y)
    }
  }
  throw IntegrationError("ODE step budget exhausted", x);
}

template <class State, class Rhs>
void integrate(Rhs&& rhs, double x0, double x1, State& y, const OdeOptions& opt = {}) {
  integrate_core(rhs, x0, x1, y, opt, {}, [](double, const State&, StepEvent) { return true; });
}

/// Observer form: obs(x, y) at every accepted step.
template <class State, class Rhs, class Obs>
void integrate_observed(Rhs&& rhs, double x0, double x1, State& y, const OdeOptions& opt,
                        Obs&& obs) {
  integrate_core(rhs, x0, x1, y, opt, {}, [&](double x, const State& s, StepEvent) {
    obs(x, s);
    return true;
  });
}

/// Integrate hitting each grid point exactly; fn(index, y) at each one.
/// grid must be strictly monotone starting from x0's side.
template <class State, class Rhs, class Fn>
void integrate_grid(Rhs&& rhs, double x0, std::span<const double> grid, State& y,
                    const OdeOptions& opt, Fn&& fn) {
  if (grid.empty()) return;
  std::size_t idx = 0;
  integrate_core(rhs, x0, grid.back(), y, opt, grid, [&](double, const State& s, StepEvent ev) {
    if (ev == StepEvent::Target) fn(idx++, s);
    return true;
  });
}

}  // namespace calderon::num
