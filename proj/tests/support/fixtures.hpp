#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "blab/domain.hpp"
#include "blab/spectral.hpp"

namespace blab::testing {

inline constexpr double pi = std::numbers::pi;

inline Potential bump(const Grid& g, double amplitude, double M) {
  return sample_potential(
      [&](double x, double y) {
        return amplitude * std::sin(pi * x / g.Lx()) * std::sin(pi * y / g.Ly());
      },
      g, M);
}

// Sorted values pi^2 (m^2/Lx^2 + k^2/Ly^2) for the first `count` modes.
inline std::vector<double> analytic_dirichlet_eigenvalues(double Lx, double Ly, int count) {
  std::vector<double> v;
  const int r = 4 * count + 8;
  for (int m = 1; m <= r; ++m)
    for (int k = 1; k <= r; ++k)
      v.push_back(pi * pi * (m * m / (Lx * Lx) + k * k / (Ly * Ly)));
  std::sort(v.begin(), v.end());
  v.resize(count);
  return v;
}

// Exact eigenvalues of the 5-point matrix: separable sine modes.
inline std::vector<double> discrete_dirichlet_eigenvalues(const Grid& g, int count) {
  std::vector<double> v;
  for (int m = 1; m <= g.nx(); ++m)
    for (int k = 1; k <= g.ny(); ++k) {
      double sx = std::sin(m * pi * g.hx() / (2 * g.Lx()));
      double sy = std::sin(k * pi * g.hy() / (2 * g.Ly()));
      v.push_back(4 * sx * sx / (g.hx() * g.hx()) + 4 * sy * sy / (g.hy() * g.hy()));
    }
  std::sort(v.begin(), v.end());
  v.resize(count);
  return v;
}

inline BoundaryFunction edge_function(const Grid& g, Edge e,
                                      const std::function<Complex(double)>& fn) {
  return make_boundary_function(g, [&](const BoundaryNode& b) -> Complex {
    if (b.edge != e) return 0.0;
    return fn((e == Edge::Bottom || e == Edge::Top) ? b.x : b.y);
  });
}

inline double rel_err(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return (a - b).norm() / b.norm();
}

}  // namespace blab::testing
