#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "blab/domain.hpp"

namespace blab {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct DiscreteOperator {
  Grid grid;
  Potential potential;
  SparseMatrix matrix;  // 5-point -Laplacian + diag(q), Dirichlet rows eliminated
};

DiscreteOperator assemble(const Grid& grid, const Potential& q);

// OnePoint: -phi(sigma - h nu)/h, times h_t/w at the edge-end samples whose
// quadrature weight w exceeds the tangential spacing h_t. For Dirichlet
// eigenfunctions on a flat edge phi_nn vanishes, so this is second order too,
// and it is the trace that makes the discrete Green identity exact under the
// boundary quadrature.
// TwoPoint: -(4 phi(sigma - h nu) - phi(sigma - 2h nu))/(2h).
enum class TraceStencil { OnePoint, TwoPoint };

// Outward normal derivative of a grid function that vanishes on the boundary.
BoundaryFunction normal_trace(const Eigen::VectorXd& phi, const Grid& grid,
                              TraceStencil stencil = TraceStencil::TwoPoint);
BoundaryFunction normal_trace(const Eigen::VectorXcd& phi, const Grid& grid,
                              TraceStencil stencil = TraceStencil::TwoPoint);
// Outward normal derivative of a field taking the values f on the boundary,
// second-order one-sided: (3f - 4u1 + u2)/(2h).
BoundaryFunction normal_trace(const Eigen::VectorXcd& u, const BoundaryFunction& f,
                              const Grid& grid);

struct EigenPair {
  double lambda = 0;
  Eigen::VectorXd phi;    // unit discrete L2 norm; may be empty when loaded from disk
  BoundaryFunction psi;
};

struct Cluster {
  int first = 0;
  int size = 0;
  double lambda = 0;  // mean of the members
};

std::vector<Cluster> cluster_eigenvalues(const std::vector<double>& lambdas,
                                         double rel_tol = 1e-6);

class BoundarySpectralData {
 public:
  BoundarySpectralData(Grid grid, double sup_bound, std::vector<EigenPair> pairs);

  const Grid& grid() const { return grid_; }
  double sup_bound() const { return sup_bound_; }
  int size() const { return static_cast<int>(pairs_.size()); }
  const EigenPair& operator[](int n) const { return pairs_[n]; }
  const std::vector<EigenPair>& pairs() const { return pairs_; }
  std::vector<EigenPair>& pairs() { return pairs_; }
  std::vector<double> lambdas() const;
  bool has_interior() const;
  std::vector<Cluster> clusters(double rel_tol = 1e-6) const;
  BoundarySpectralData truncated(int K) const;

 private:
  Grid grid_;
  double sup_bound_;
  std::vector<EigenPair> pairs_;
};

struct EigenOptions {
  TraceStencil trace = TraceStencil::OnePoint;
  double residual_tol = 1e-8;
  int dense_limit = 1024;
};

BoundarySpectralData eigenpairs(const DiscreteOperator& op, int K,
                                const EigenOptions& opts = {});

// Sign gauge: first component above noise level made positive.
void fix_sign(Eigen::VectorXd& v);

struct WeylConstants {
  double c_low = 0, c_high = 0;
};

WeylConstants weyl_fit(const BoundarySpectralData& bsd);

double rayleigh_quotient(const SparseMatrix& A, const Eigen::VectorXd& v);

}  // namespace blab
