#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace blab {

struct LanczosResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // Euclidean-orthonormal columns
  Eigen::VectorXd residuals;
  int basis_size = 0;
};

struct LanczosOptions {
  int block = 4;            // exposes multiplicities up to this size
  double tol = 1e-10;       // on ||Ax - lambda x|| / (|lambda| + 1)
  unsigned seed = 12345;
};

// K smallest eigenpairs of a symmetric matrix bounded below by `lower`.
// Block Krylov iteration on (A - sigma I)^{-1}, sigma = lower - 1, with full
// reorthogonalization and Rayleigh-Ritz over the whole basis.
LanczosResult shift_invert_lanczos(const Eigen::SparseMatrix<double>& A, int K,
                                   double lower, const LanczosOptions& opts = {});

}  // namespace blab
