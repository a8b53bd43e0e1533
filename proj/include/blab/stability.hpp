#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "blab/domain.hpp"
#include "blab/spectral.hpp"

namespace blab {

// Groups of consecutive indices that form a cluster in either BSD. Every
// cluster of either side lies inside one group.
std::vector<Cluster> joint_clusters(const BoundarySpectralData& a, const BoundarySpectralData& b,
                                    double rel_tol = 1e-6);

// Rotates each joint cluster of `other` onto `ref` by boundary-weighted
// orthogonal Procrustes; singletons get the sign that maximizes overlap.
// Interior eigenvectors, when present, are rotated along.
BoundarySpectralData align_clusters(const BoundarySpectralData& ref,
                                    const BoundarySpectralData& other, double rel_tol = 1e-6);

struct DiscrepancyReport {
  std::vector<double> delta;  // delta[N-1] = max_{N <= n <= K} |lambda_1n - lambda_2n|
  std::vector<double> eps;    // eps[N-1] = (sum_{n >= N} ||psi_1n - psi_2n||^2)^{1/2}
  double l2_diff = 0;
  int K = 0;
  std::string note;
};

DiscrepancyReport discrepancy(const BoundarySpectralData& bsd1, const BoundarySpectralData& bsd2,
                              const Potential& q1, const Potential& q2);

// ||q||_inf + discrete H^1 norm over interior differences.
double h1_proxy(const Grid& grid, const Potential& q);

// Extrapolates q1 - q2 to every boundary sample (2 d1 - d2) and throws
// InvalidArgument when it exceeds 1e-2 of the interior maximum.
void check_boundary_equality(const Grid& grid, const Potential& q1, const Potential& q2);

struct HoelderRow {
  double delta = 0, l2_diff = 0, ratio = 0;
  double h1 = 0;
  bool h1_ok = true;
  bool skipped = false;  // q2 == q1
};

struct HoelderResult {
  std::vector<HoelderRow> rows;
  double slope = 0, intercept = 0;  // log l2_diff = intercept + slope log delta
  double constant = 0;              // max ratio over the rows
  double spread = 0;                // max ratio / min ratio
  std::string note;
};

// delta = max over n in [K/2, K] of |lambda_1n - lambda_2n|; ratio = l2_diff / delta^{1/2}.
HoelderResult hoelder_experiment(const Grid& grid, const Potential& q1,
                                 const std::vector<Potential>& family, int K,
                                 double h1_bound = 1e300);

// max(C, 2M) delta^{1/2}
double two_regime_bound(double C, double M, double delta);

struct PlancherelCheck {
  double spatial = 0, fourier = 0, rel_gap = 0;
};

// Zero-extends onto a (2nx) x (2ny) box and compares sum |d|^2 hx hy with the
// DFT energy.
PlancherelCheck plancherel(const Grid& grid, const Eigen::VectorXd& values);

struct BandSplit {
  double inner = 0, outer = 0, total = 0;
};

// Energy of the zero-extended DFT split at |xi| <= R, xi_k = 2 pi k / (2 n h).
BandSplit band_split(const Grid& grid, const Eigen::VectorXd& values, double R);

}  // namespace blab
