#pragma once

// Independent reference implementations used as test oracles. These are
// deliberately written with different methods than the library code they
// check (finite differences vs reverse mode, RK4 vs semi-implicit Euler,
// exhaustive search vs LP, dense Bellman solves vs temporal differences).

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "coil/tensor.hpp"

namespace oracles {

// Central finite difference of a scalar function of one flat parameter
// vector.
inline std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Classic RK4 on a first-order ODE system y' = f(t, y).
inline std::vector<double> rk4_step(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& f,
    double t, const std::vector<double>& y, double h) {
  auto axpy = [](const std::vector<double>& base, double a,
                 const std::vector<double>& d) {
    std::vector<double> out(base.size());
    for (size_t i = 0; i < base.size(); ++i) out[i] = base[i] + a * d[i];
    return out;
  };
  const auto k1 = f(t, y);
  const auto k2 = f(t + h / 2, axpy(y, h / 2, k1));
  const auto k3 = f(t + h / 2, axpy(y, h / 2, k2));
  const auto k4 = f(t + h, axpy(y, h, k3));
  std::vector<double> out(y.size());
  for (size_t i = 0; i < y.size(); ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

// Damped rigid pendulum (uniform rod pivoted at one end, angle measured
// from the hanging rest pose): I theta'' = -m g (l/2) sin(theta)
// - d theta' + tau, with I = m l^2 / 3.
struct PendulumOde {
  double mass, length, gravity, damping, torque = 0.0;

  std::vector<double> operator()(double, const std::vector<double>& y) const {
    const double inertia = mass * length * length / 3.0;
    const double acc = (-mass * gravity * 0.5 * length * std::sin(y[0]) -
                        damping * y[1] + torque) /
                       inertia;
    return {y[1], acc};
  }
};

// Minimum over all assignments of mean matched distance; the exhaustive
// counterpart of the optimal-transport LP for equal-size uniform inputs.
inline double brute_force_matching(const std::vector<std::vector<double>>& a,
                                   const std::vector<std::vector<double>>& b) {
  const size_t n = a.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  auto dist = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
    return std::sqrt(s);
  };
  do {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) total += dist(a[i], b[perm[i]]);
    best = std::min(best, total / n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace oracles
