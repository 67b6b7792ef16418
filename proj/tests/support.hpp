#pragma once

// Independent oracles shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "aist/dynamics.hpp"
#include "aist/traffic.hpp"

namespace aist::testing {

inline LtiPetcSystem benchmark_system(int kappa_bar = 4, double h = 0.05) {
  Matrix A(2, 2), B(2, 1), K(1, 2);
  A << 0, 1, -2, 3;
  B << 0, 1;
  K << 0, -5;
  return LtiPetcSystem(A, B, K, SigmaTrigger{0.1}, h, kappa_bar);
}

/// Truncated Taylor series in long double, no scaling. Only accurate for
/// ‖M t‖ of order one.
inline Matrix series_exponential(const Matrix& m, double t, int terms = 200) {
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const LMatrix a = (m * t).cast<long double>();
  LMatrix term = LMatrix::Identity(m.rows(), m.cols());
  LMatrix sum = term;
  for (int k = 1; k < terms; ++k) {
    term = term * a / static_cast<long double>(k);
    sum += term;
  }
  return sum.cast<double>();
}

/// Plant state after `periods` checking periods from x0 with the input held
/// at K x0, by classic RK4 with `steps` steps per period.
inline Vector rk4_hold(const LtiPetcSystem& sys, const Vector& x0, double duration, int steps) {
  const Vector u = sys.B() * (sys.K() * x0);
  auto f = [&](const Vector& x) -> Vector { return sys.A() * x + u; };
  const double dt = duration / steps;
  Vector x = x0;
  for (int s = 0; s < steps; ++s) {
    const Vector k1 = f(x);
    const Vector k2 = f(x + 0.5 * dt * k1);
    const Vector k3 = f(x + 0.5 * dt * k2);
    const Vector k4 = f(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

/// IST by integrating the held-input plant period by period and testing the
/// stacked quadratic trigger directly.
inline int simulated_ist(const LtiPetcSystem& sys, const Vector& x0, int steps_per_period = 200) {
  const Matrix R = sys.triggering_matrix();
  const auto n = x0.size();
  Vector xi = x0;
  const Vector u = sys.B() * (sys.K() * x0);
  const double dt = sys.h() / steps_per_period;
  auto f = [&](const Vector& x) -> Vector { return sys.A() * x + u; };
  for (int k = 1; k < sys.kappa_bar(); ++k) {
    for (int s = 0; s < steps_per_period; ++s) {
      const Vector k1 = f(xi);
      const Vector k2 = f(xi + 0.5 * dt * k1);
      const Vector k3 = f(xi + 0.5 * dt * k2);
      const Vector k4 = f(xi + dt * k3);
      xi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Vector z(2 * n);
    z << xi, x0;
    if (z.dot(R * z) > 0.0) return k;
  }
  return sys.kappa_bar();
}

struct CycleExtremes {
  std::optional<Rational> min, max;
};

/// Enumerates every simple cycle inside `allowed` (each rooted at its
/// smallest vertex) and returns the extreme means.
inline CycleExtremes brute_force_cycle_means(const WeightedDigraph& g, const std::vector<int>& allowed) {
  std::vector<char> in(static_cast<std::size_t>(g.size()), 0);
  for (int v : allowed) in[v] = 1;
  CycleExtremes out;
  std::vector<char> on_path(static_cast<std::size_t>(g.size()), 0);
  std::function<void(int, int, long long, long long)> dfs = [&](int root, int v, long long w, long long len) {
    for (const auto& e : g.adj[v]) {
      if (!in[e.to] || e.to < root) continue;
      if (e.to == root) {
        const Rational mean(w + e.weight, len + 1);
        if (!out.min || mean < *out.min) out.min = mean;
        if (!out.max || mean > *out.max) out.max = mean;
      } else if (!on_path[e.to]) {
        on_path[e.to] = 1;
        dfs(root, e.to, w + e.weight, len + 1);
        on_path[e.to] = 0;
      }
    }
  };
  for (int r : allowed) {
    on_path[r] = 1;
    dfs(r, r, 0, 0);
    on_path[r] = 0;
  }
  return out;
}

}  // namespace aist::testing
