#include "blab/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include "blab/error.hpp"

namespace blab {

namespace {

// Orthogonalize W against the first `used` columns of V (two passes), then
// return an orthonormal basis of what is left.
Eigen::MatrixXd extend_basis(const Eigen::MatrixXd& V, int used, Eigen::MatrixXd W) {
  for (int pass = 0; pass < 2; ++pass) {
    if (used > 0) {
      auto Vu = V.leftCols(used);
      W -= Vu * (Vu.transpose() * W);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(W.rows(), W.cols());
  if (used > 0) {
    auto Vu = V.leftCols(used);
    Q -= Vu * (Vu.transpose() * Q);
  }
  for (int c = 0; c < Q.cols(); ++c) Q.col(c).normalize();
  return Q;
}

}  // namespace

LanczosResult shift_invert_lanczos(const Eigen::SparseMatrix<double>& A, int K,
                                   double lower, const LanczosOptions& opts) {
  const int N = A.rows();
  if (K < 1 || K > N) throw InvalidArgument("lanczos: need 1 <= K <= N");
  const double sigma = lower - 1.0;
  Eigen::SparseMatrix<double> S = A;
  for (int k = 0; k < N; ++k) S.coeffRef(k, k) -= sigma;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw NumericalError("lanczos: factorization failed");

  const int b = std::max(1, opts.block);
  const int cap = N;
  int target = std::min(cap, 2 * K + 4 * b + 20);
  Eigen::MatrixXd V(N, std::min(cap, target + 8 * b));
  Eigen::MatrixXd W(N, V.cols());  // (A - sigma)^{-1} V

  std::mt19937 rng(opts.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd block(N, b);
  for (int c = 0; c < b; ++c)
    for (int r = 0; r < N; ++r) block(r, c) = normal(rng);

  int used = 0;
  LanczosResult out;
  for (;;) {
    while (used < target) {
      const int take = std::min<int>(b, cap - used);
      if (used + take > V.cols()) {
        V.conservativeResize(Eigen::NoChange, std::min(cap, used + 8 * b));
        W.conservativeResize(Eigen::NoChange, V.cols());
      }
      Eigen::MatrixXd Q = extend_basis(V, used, block.leftCols(take));
      V.middleCols(used, take) = Q;
      W.middleCols(used, take) = ldlt.solve(Q);
      block = W.middleCols(used, take);
      used += take;
    }
    auto Vu = V.leftCols(used);
    Eigen::MatrixXd H = Vu.transpose() * W.leftCols(used);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    // Largest theta of the inverse are the smallest lambda of A.
    out.values.resize(K);
    out.vectors.resize(N, K);
    out.residuals.resize(K);
    bool converged = true;
    for (int n = 0; n < K; ++n) {
      const int c = used - 1 - n;
      Eigen::VectorXd x = Vu * es.eigenvectors().col(c);
      x.normalize();
      const double lambda = x.dot(A * x);
      const double r = (A * x - lambda * x).norm();
      out.values[n] = lambda;
      out.vectors.col(n) = x;
      out.residuals[n] = r;
      if (r > opts.tol * (std::abs(lambda) + 1)) converged = false;
    }
    out.basis_size = used;
    if (converged) break;
    if (used >= cap)
      throw NumericalError("lanczos: no convergence with a full basis");
    target = std::min(cap, used + std::max(4 * b, K / 2));
  }

  // Sort ascending (Ritz order is already ascending up to ties).
  std::vector<int> order(K);
  for (int n = 0; n < K; ++n) order[n] = n;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int c) { return out.values[a] < out.values[c]; });
  LanczosResult sorted = out;
  for (int n = 0; n < K; ++n) {
    sorted.values[n] = out.values[order[n]];
    sorted.vectors.col(n) = out.vectors.col(order[n]);
    sorted.residuals[n] = out.residuals[order[n]];
  }
  return sorted;
}

}  // namespace blab
