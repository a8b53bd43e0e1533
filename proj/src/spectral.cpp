#include "blab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <lapacke.h>

#include "blab/error.hpp"
#include "blab/lanczos.hpp"

namespace blab {

DiscreteOperator assemble(const Grid& grid, const Potential& q) {
  require_same_grid(grid.shape(), q.shape(), "assemble");
  const int nx = grid.nx(), ny = grid.ny();
  const double ax = 1.0 / (grid.hx() * grid.hx());
  const double ay = 1.0 / (grid.hy() * grid.hy());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * static_cast<size_t>(grid.interior_size()));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = grid.index(i, j);
      t.emplace_back(k, k, 2 * ax + 2 * ay + q[k]);
      if (i > 0) t.emplace_back(k, grid.index(i - 1, j), -ax);
      if (i + 1 < nx) t.emplace_back(k, grid.index(i + 1, j), -ax);
      if (j > 0) t.emplace_back(k, grid.index(i, j - 1), -ay);
      if (j + 1 < ny) t.emplace_back(k, grid.index(i, j + 1), -ay);
    }
  }
  SparseMatrix A(grid.interior_size(), grid.interior_size());
  A.setFromTriplets(t.begin(), t.end());
  return {grid, q, std::move(A)};
}

namespace {

template <class Vec>
BoundaryFunction dirichlet_trace(const Vec& phi, const Grid& grid, TraceStencil stencil) {
  if (phi.size() != grid.interior_size())
    throw InvalidArgument("normal_trace: field size does not match the grid");
  Eigen::VectorXcd out(grid.boundary_size());
  for (int k = 0; k < grid.boundary_size(); ++k) {
    const double h = grid.normal_spacing(k);
    const Complex u1 = phi[grid.inward_neighbor(k, 1)];
    if (stencil == TraceStencil::OnePoint) {
      out[k] = -u1 / h * (grid.tangent_spacing(k) / grid.boundary()[k].weight);
    } else {
      const Complex u2 = phi[grid.inward_neighbor(k, 2)];
      out[k] = -(4.0 * u1 - u2) / (2 * h);
    }
  }
  return BoundaryFunction(grid, std::move(out));
}

}  // namespace

BoundaryFunction normal_trace(const Eigen::VectorXd& phi, const Grid& grid,
                              TraceStencil stencil) {
  return dirichlet_trace(phi, grid, stencil);
}

BoundaryFunction normal_trace(const Eigen::VectorXcd& phi, const Grid& grid,
                              TraceStencil stencil) {
  return dirichlet_trace(phi, grid, stencil);
}

BoundaryFunction normal_trace(const Eigen::VectorXcd& u, const BoundaryFunction& f,
                              const Grid& grid) {
  require_same_grid(f.shape(), grid.shape(), "normal_trace");
  if (u.size() != grid.interior_size())
    throw InvalidArgument("normal_trace: field size does not match the grid");
  Eigen::VectorXcd out(grid.boundary_size());
  for (int k = 0; k < grid.boundary_size(); ++k) {
    const double h = grid.normal_spacing(k);
    out[k] = (3.0 * f[k] - 4.0 * u[grid.inward_neighbor(k, 1)] +
              u[grid.inward_neighbor(k, 2)]) / (2 * h);
  }
  return BoundaryFunction(grid, std::move(out));
}

std::vector<Cluster> cluster_eigenvalues(const std::vector<double>& lambdas,
                                         double rel_tol) {
  std::vector<Cluster> out;
  for (int n = 0; n < static_cast<int>(lambdas.size()); ++n) {
    if (!out.empty()) {
      Cluster& c = out.back();
      const double prev = lambdas[c.first + c.size - 1];
      if (std::abs(lambdas[n] - prev) <= rel_tol * (1 + std::abs(prev))) {
        c.lambda = (c.lambda * c.size + lambdas[n]) / (c.size + 1);
        ++c.size;
        continue;
      }
    }
    out.push_back({n, 1, lambdas[n]});
  }
  return out;
}

BoundarySpectralData::BoundarySpectralData(Grid grid, double sup_bound,
                                           std::vector<EigenPair> pairs)
    : grid_(std::move(grid)), sup_bound_(sup_bound), pairs_(std::move(pairs)) {
  for (size_t n = 1; n < pairs_.size(); ++n)
    if (pairs_[n].lambda < pairs_[n - 1].lambda)
      throw InvalidArgument("eigenvalues must be nondecreasing");
  for (auto& p : pairs_) require_same_grid(p.psi.shape(), grid_.shape(), "BoundarySpectralData");
}

std::vector<double> BoundarySpectralData::lambdas() const {
  std::vector<double> out;
  out.reserve(pairs_.size());
  for (auto& p : pairs_) out.push_back(p.lambda);
  return out;
}

bool BoundarySpectralData::has_interior() const {
  return std::all_of(pairs_.begin(), pairs_.end(), [&](const EigenPair& p) {
    return p.phi.size() == grid_.interior_size();
  });
}

std::vector<Cluster> BoundarySpectralData::clusters(double rel_tol) const {
  return cluster_eigenvalues(lambdas(), rel_tol);
}

BoundarySpectralData BoundarySpectralData::truncated(int K) const {
  if (K < 0 || K > size()) throw InvalidArgument("truncation exceeds available eigenpairs");
  return BoundarySpectralData(grid_, sup_bound_,
                              std::vector<EigenPair>(pairs_.begin(), pairs_.begin() + K));
}

void fix_sign(Eigen::VectorXd& v) {
  const double floor = 1e-10 * v.cwiseAbs().maxCoeff();
  for (int k = 0; k < v.size(); ++k) {
    if (std::abs(v[k]) > floor) {
      if (v[k] < 0) v = -v;
      return;
    }
  }
}

double rayleigh_quotient(const SparseMatrix& A, const Eigen::VectorXd& v) {
  return v.dot(A * v) / v.squaredNorm();
}

namespace {

// Lowest K eigenpairs of the banded matrix through LAPACK's band reduction.
void banded_eigen(const SparseMatrix& A, int bandwidth, int K, Eigen::VectorXd& values,
                  Eigen::MatrixXd& vectors) {
  const lapack_int n = A.rows(), kd = bandwidth, ldab = kd + 1;
  std::vector<double> ab(static_cast<size_t>(ldab) * n, 0.0);
  for (int j = 0; j < A.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(A, j); it; ++it)
      if (it.row() <= j) ab[(kd + it.row() - j) + static_cast<size_t>(j) * ldab] = it.value();
  std::vector<double> q(static_cast<size_t>(n) * n), w(n);
  vectors.resize(n, K);
  std::vector<lapack_int> ifail(n);
  lapack_int found = 0;
  lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, kd, ab.data(), ldab,
                                   q.data(), n, 0.0, 0.0, 1, K, 2 * LAPACKE_dlamch('S'),
                                   &found, w.data(), vectors.data(), n, ifail.data());
  if (info != 0 || found != K)
    throw NumericalError("banded eigensolver failed (info = " + std::to_string(info) + ")");
  values = Eigen::Map<Eigen::VectorXd>(w.data(), K);
}

}  // namespace

BoundarySpectralData eigenpairs(const DiscreteOperator& op, int K, const EigenOptions& opts) {
  const Grid& grid = op.grid;
  const int N = grid.interior_size();
  if (K < 1 || K > N) throw InvalidArgument("eigenpairs: need 1 <= K <= nx*ny");

  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  if (N <= opts.dense_limit) {
    banded_eigen(op.matrix, grid.nx(), K, values, vectors);
  } else {
    auto r = shift_invert_lanczos(op.matrix, K, -op.potential.sup_bound(),
                                  {.tol = std::min(1e-10, opts.residual_tol)});
    values = r.values;
    vectors = r.vectors;
  }

  const double scale = 1.0 / std::sqrt(grid.cell_area());
  std::vector<EigenPair> pairs(K);
  std::string bad;
  for (int n = 0; n < K; ++n) {
    Eigen::VectorXd v = vectors.col(n);
    const double res = (op.matrix * v - values[n] * v).norm() / v.norm();
    if (!(res <= opts.residual_tol * (1 + std::abs(values[n]))))
      bad += " n=" + std::to_string(n + 1) + ":" + std::to_string(res);
    fix_sign(v);
    pairs[n].lambda = values[n];
    pairs[n].phi = v * scale;
    pairs[n].psi = normal_trace(pairs[n].phi, grid, opts.trace);
  }
  if (!bad.empty()) throw NumericalError("eigensolver residuals above tolerance:" + bad);
  return BoundarySpectralData(grid, op.potential.sup_bound(), std::move(pairs));
}

WeylConstants weyl_fit(const BoundarySpectralData& bsd) {
  if (bsd.size() < 20) throw InvalidArgument("weyl_fit needs at least 20 eigenpairs");
  WeylConstants c{INFINITY, 0};
  for (int n = 6; n <= bsd.size(); ++n) {
    const double lambda = bsd[n - 1].lambda;
    if (lambda <= 0)
      throw NumericalError("nonpositive eigenvalue at n = " + std::to_string(n) +
                           " past the fit window");
    const double r = lambda / n;  // n^{2/d} with d = 2
    c.c_low = std::min(c.c_low, r);
    c.c_high = std::max(c.c_high, r);
  }
  return c;
}

}  // namespace blab
