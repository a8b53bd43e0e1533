#include "blab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "blab/error.hpp"
#include "blab/parallel.hpp"

namespace blab {

std::vector<Cluster> joint_clusters(const BoundarySpectralData& a, const BoundarySpectralData& b,
                                    double rel_tol) {
  const int K = std::min(a.size(), b.size());
  std::vector<char> link(K, 0);  // link[n]: n and n+1 share a group
  for (const auto* s : {&a, &b})
    for (const auto& c : cluster_eigenvalues(s->truncated(K).lambdas(), rel_tol))
      for (int n = c.first; n + 1 < c.first + c.size; ++n) link[n] = 1;
  std::vector<Cluster> out;
  for (int n = 0; n < K; ++n) {
    if (n > 0 && link[n - 1]) {
      ++out.back().size;
    } else {
      out.push_back({n, 1, 0});
    }
  }
  for (auto& c : out) {
    double s = 0;
    for (int n = c.first; n < c.first + c.size; ++n) s += a[n].lambda;
    c.lambda = s / c.size;
  }
  return out;
}

BoundarySpectralData align_clusters(const BoundarySpectralData& ref,
                                    const BoundarySpectralData& other, double rel_tol) {
  require_same_grid(ref.grid().shape(), other.grid().shape(), "align_clusters");
  const Grid& g = ref.grid();
  const int K = std::min(ref.size(), other.size());
  std::vector<EigenPair> pairs(other.pairs().begin(), other.pairs().begin() + K);
  const int nb = g.boundary_size();
  Eigen::VectorXd w(nb);
  for (int k = 0; k < nb; ++k) w[k] = g.boundary()[k].weight;
  const bool rotate_phi = other.has_interior();

  for (const auto& c : joint_clusters(ref, other, rel_tol)) {
    const int s = c.size;
    Eigen::MatrixXd P1(nb, s), P2(nb, s);
    for (int j = 0; j < s; ++j) {
      P1.col(j) = ref[c.first + j].psi.values().real();
      P2.col(j) = other[c.first + j].psi.values().real();
    }
    if (P1 == P2) continue;
    const Eigen::MatrixXd A = P1.transpose() * w.asDiagonal() * P2;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (s > 1 && !(sv[s - 1] > 1e-8 * std::max(sv[0], 1e-300)))
      throw NumericalError("cannot align degenerate cluster n = " + std::to_string(c.first + 1) +
                           ".." + std::to_string(c.first + s) + " (lambda ~ " +
                           std::to_string(c.lambda) + "): boundary traces do not span a common subspace");
    const Eigen::MatrixXd R = svd.matrixV() * svd.matrixU().transpose();
    const Eigen::MatrixXd P2r = P2 * R;
    Eigen::MatrixXd F2r;
    if (rotate_phi) {
      Eigen::MatrixXd F2(g.interior_size(), s);
      for (int j = 0; j < s; ++j) F2.col(j) = other[c.first + j].phi;
      F2r = F2 * R;
    }
    for (int j = 0; j < s; ++j) {
      pairs[c.first + j].psi = BoundaryFunction(g, P2r.col(j).cast<Complex>());
      if (rotate_phi) pairs[c.first + j].phi = F2r.col(j);
    }
  }
  return BoundarySpectralData(g, other.sup_bound(), std::move(pairs));
}

DiscrepancyReport discrepancy(const BoundarySpectralData& bsd1, const BoundarySpectralData& bsd2,
                              const Potential& q1, const Potential& q2) {
  const Grid& g = bsd1.grid();
  require_same_grid(bsd2.grid().shape(), g.shape(), "discrepancy");
  require_same_grid(q1.shape(), g.shape(), "discrepancy");
  require_same_grid(q2.shape(), g.shape(), "discrepancy");
  if (bsd1.size() != bsd2.size()) throw InvalidArgument("discrepancy needs equal truncations");
  const int K = bsd1.size();
  BoundarySpectralData b2 = align_clusters(bsd1, bsd2);

  DiscrepancyReport r;
  r.K = K;
  r.delta.assign(K, 0);
  r.eps.assign(K, 0);
  double dmax = 0, tail = 0;
  for (int n = K - 1; n >= 0; --n) {
    dmax = std::max(dmax, std::abs(bsd1[n].lambda - b2[n].lambda));
    const double e = boundary_norm(BoundaryFunction(g, bsd1[n].psi.values() - b2[n].psi.values()), g);
    tail += e * e;
    r.delta[n] = dmax;
    r.eps[n] = std::sqrt(tail);
  }
  r.l2_diff = interior_norm(Eigen::VectorXd(q1.values() - q2.values()), g);
  r.note = "partial sums over the first " + std::to_string(K) +
           " pairs; summability of the psi differences is not checked beyond the truncation";
  return r;
}

double h1_proxy(const Grid& g, const Potential& q) {
  const auto& v = q.values();
  double grad = 0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (i + 1 < g.nx()) grad += std::pow((v[g.index(i + 1, j)] - v[g.index(i, j)]) / g.hx(), 2);
      if (j + 1 < g.ny()) grad += std::pow((v[g.index(i, j + 1)] - v[g.index(i, j)]) / g.hy(), 2);
    }
  const double h1 = std::sqrt((v.squaredNorm() + grad) * g.cell_area());
  return v.cwiseAbs().maxCoeff() + h1;
}

void check_boundary_equality(const Grid& g, const Potential& q1, const Potential& q2) {
  require_same_grid(q1.shape(), g.shape(), "check_boundary_equality");
  require_same_grid(q2.shape(), g.shape(), "check_boundary_equality");
  if (g.nx() < 2 || g.ny() < 2) throw InvalidArgument("boundary extrapolation needs nx, ny >= 2");
  const Eigen::VectorXd d = q1.values() - q2.values();
  const double scale = d.cwiseAbs().maxCoeff();
  if (scale == 0) return;
  for (int k = 0; k < g.boundary_size(); ++k) {
    const double b = 2 * d[g.inward_neighbor(k, 1)] - d[g.inward_neighbor(k, 2)];
    if (std::abs(b) > 1e-2 * scale) {
      const auto& node = g.boundary()[k];
      throw InvalidArgument("q1 and q2 differ on the boundary near (" + std::to_string(node.x) +
                            ", " + std::to_string(node.y) + "): extrapolated difference " +
                            std::to_string(b));
    }
  }
}

HoelderResult hoelder_experiment(const Grid& grid, const Potential& q1,
                                 const std::vector<Potential>& family, int K, double h1_bound) {
  if (K < 2) throw InvalidArgument("hoelder_experiment needs K >= 2");
  for (const auto& q2 : family) check_boundary_equality(grid, q1, q2);
  const auto lam1 = eigenpairs(assemble(grid, q1), K).lambdas();
  HoelderResult res;
  res.rows.resize(family.size());
  parallel_for(static_cast<int>(family.size()), [&](int m) {
    const Potential& q2 = family[m];
    HoelderRow& row = res.rows[m];
    row.l2_diff = interior_norm(Eigen::VectorXd(q1.values() - q2.values()), grid);
    row.h1 = std::max(h1_proxy(grid, q1), h1_proxy(grid, q2));
    row.h1_ok = row.h1 <= h1_bound;
    if (row.l2_diff == 0) {
      row.skipped = true;
      return;
    }
    const auto lam2 = eigenpairs(assemble(grid, q2), K).lambdas();
    for (int n = K / 2 - 1; n < K; ++n) row.delta = std::max(row.delta, std::abs(lam1[n] - lam2[n]));
    row.ratio = row.delta > 0 ? row.l2_diff / std::sqrt(row.delta) : INFINITY;
  });

  std::vector<double> x, y;
  double rmin = INFINITY, rmax = 0;
  for (const auto& r : res.rows) {
    if (r.skipped) continue;
    rmin = std::min(rmin, r.ratio);
    rmax = std::max(rmax, r.ratio);
    if (r.delta > 0) {
      x.push_back(std::log(r.delta));
      y.push_back(std::log(r.l2_diff));
    }
  }
  res.constant = rmax;
  res.spread = rmin > 0 && std::isfinite(rmin) ? rmax / rmin : INFINITY;
  if (x.size() >= 2) {
    const double n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    res.intercept = (sy - res.slope * sx) / n;
  }
  res.note = "delta is the max over n in [" + std::to_string(K / 2) + ", " + std::to_string(K) +
             "] of the computed window; the Neumann-difference sum is a partial sum";
  return res;
}

double two_regime_bound(double C, double M, double delta) {
  return std::max(C, 2 * M) * std::sqrt(delta);
}

namespace {

// DFT of the zero-extended field on a (2nx) x (2ny) box, row-major in x.
Eigen::MatrixXcd padded_dft(const Grid& g, const Eigen::VectorXd& v) {
  if (v.size() != g.interior_size()) throw InvalidArgument("field size does not match the grid");
  const int Nx = 2 * g.nx(), Ny = 2 * g.ny();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(Nx, Ny);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) a(i, j) = v[g.index(i, j)];
  Eigen::FFT<double> fft;
  Eigen::VectorXcd in, out;
  for (int j = 0; j < Ny; ++j) {
    in = a.col(j);
    fft.fwd(out, in);
    a.col(j) = out;
  }
  for (int i = 0; i < Nx; ++i) {
    in = a.row(i).transpose();
    fft.fwd(out, in);
    a.row(i) = out.transpose();
  }
  return a;
}

}  // namespace

PlancherelCheck plancherel(const Grid& g, const Eigen::VectorXd& values) {
  const Eigen::MatrixXcd F = padded_dft(g, values);
  PlancherelCheck c;
  c.spatial = values.squaredNorm() * g.cell_area();
  c.fourier = F.cwiseAbs2().sum() / static_cast<double>(F.size()) * g.cell_area();
  c.rel_gap = c.spatial > 0 ? std::abs(c.spatial - c.fourier) / c.spatial : std::abs(c.fourier);
  return c;
}

BandSplit band_split(const Grid& g, const Eigen::VectorXd& values, double R) {
  const Eigen::MatrixXcd F = padded_dft(g, values);
  const int Nx = F.rows(), Ny = F.cols();
  const double norm = g.cell_area() / static_cast<double>(F.size());
  BandSplit b;
  for (int j = 0; j < Ny; ++j)
    for (int i = 0; i < Nx; ++i) {
      const int kx = i <= Nx / 2 ? i : i - Nx, ky = j <= Ny / 2 ? j : j - Ny;
      const double xi = std::hypot(2 * std::numbers::pi * kx / (Nx * g.hx()), 2 * std::numbers::pi * ky / (Ny * g.hy()));
      const double e = std::norm(F(i, j)) * norm;
      (xi <= R ? b.inner : b.outer) += e;
    }
  b.total = F.cwiseAbs2().sum() * norm;
  return b;
}

}  // namespace blab
