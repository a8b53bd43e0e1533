#include "blab/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "blab/bvp.hpp"
#include "blab/error.hpp"

namespace blab {

namespace {

std::string cluster_name(const Cluster& c) {
  return "n = " + std::to_string(c.first + 1) + ".." + std::to_string(c.first + c.size);
}

// Index of t / dt when it is a whole number of steps, else -1.
int step_index(double t, double dt) {
  const double k = std::round(t / dt);
  return std::abs(k * dt - t) <= 1e-9 * std::max(t, dt) ? static_cast<int>(k) : -1;
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-12);
}

// -phi(adj)/h_n * h_t/w, the one-point flux of a field vanishing on the boundary.
struct OnePointTap {
  int adj;
  double factor;
};

OnePointTap tap(const Grid& g, int k) {
  return {g.inward_neighbor(k, 1),
          -1.0 / g.normal_spacing(k) * (g.tangent_spacing(k) / g.boundary()[k].weight)};
}

// Crank-Nicolson march of U' = -A U + G h(t), U(0) = 0. observe(k, U) runs
// after every step k = 1..nsteps.
void march(const Grid& grid, const Potential& q, const Eigen::MatrixXd& G, double gscale,
           const TimeSignal& h, double dt, int nsteps,
           const std::function<void(int, const Eigen::MatrixXd&)>& observe) {
  const double M = std::max(0.0, q.sup_bound());
  if (dt * M / 2 >= 1)
    throw InvalidArgument("time step " + std::to_string(dt) + " too large for |q| <= " +
                          std::to_string(M) + ": Crank-Nicolson needs dt M / 2 < 1");
  const SparseMatrix A = assemble(grid, q).matrix;
  SparseMatrix I(A.rows(), A.cols());
  I.setIdentity();
  const SparseMatrix plus = I + (dt / 2) * A;
  const SparseMatrix minus = I - (dt / 2) * A;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(plus);
  if (ldlt.info() != Eigen::Success) throw NumericalError("Crank-Nicolson factorization failed");

  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(A.rows(), G.cols());
  double hprev = h(0), hmax = std::abs(hprev);
  for (int k = 1; k <= nsteps; ++k) {
    const double t = k * dt, hk = h(t);
    hmax = std::max(hmax, std::abs(hk));
    U = ldlt.solve(minus * U + (dt / 2) * (hprev + hk) * G);
    hprev = hk;
    // Discrete maximum principle with the e^{Mt} allowance for negative q;
    // Crank-Nicolson overshoots it only mildly, so a factor 10 means trouble.
    const double umax = U.cwiseAbs().maxCoeff();
    if (!std::isfinite(umax) || umax > 10 * std::exp(M * t) * hmax * gscale + 1e-12)
      throw NumericalError("heat march unstable at t = " + std::to_string(t) + ": max |u| = " +
                           std::to_string(umax) + " exceeds the bound " +
                           std::to_string(std::exp(M * t) * hmax * gscale));
    observe(k, U);
  }
}

Eigen::MatrixXd coupling_column(const Grid& grid, const BoundaryFunction& g) {
  return boundary_coupling(grid, g).real();
}

}  // namespace

Gammas default_gammas(const Grid& grid, int overlap) {
  const auto bottom = grid.edge_nodes(Edge::Bottom), right = grid.edge_nodes(Edge::Right);
  if (overlap < 0) overlap = std::max(1, grid.nx() / 4);
  overlap = std::min<int>({overlap, static_cast<int>(bottom.size()), static_cast<int>(right.size())});
  Gammas g;
  g.in = bottom;
  g.in.insert(g.in.end(), right.begin(), right.begin() + overlap);
  g.out.assign(bottom.end() - overlap, bottom.end());
  g.out.insert(g.out.end(), right.begin(), right.end());
  return g;
}

Gammas edge_gammas(const Grid& grid, std::vector<Edge> in, std::vector<Edge> out) {
  Gammas g;
  for (auto* p : {&in, &out}) {
    auto& dst = p == &in ? g.in : g.out;
    for (Edge e : *p) {
      const auto n = grid.edge_nodes(e);
      dst.insert(dst.end(), n.begin(), n.end());
    }
    std::sort(dst.begin(), dst.end());
    dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
  }
  return g;
}

std::vector<int> gamma_intersection(const Gammas& g) {
  std::vector<int> a = g.in, b = g.out, out;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> gamma_union(const Gammas& g) {
  std::vector<int> a = g.in, b = g.out, out;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<std::string> check_gammas(const Grid& grid, const Gammas& g) {
  std::vector<std::string> d;
  if (gamma_intersection(g).empty()) d.push_back("Gamma_in and Gamma_out share no boundary sample");
  const int missing = grid.boundary_size() - static_cast<int>(gamma_union(g).size());
  if (missing > 0)
    d.push_back("Gamma_in and Gamma_out leave " + std::to_string(missing) + " of " +
                std::to_string(grid.boundary_size()) + " boundary samples uncovered");
  return d;
}

TimeSignal interpolate_signal(std::vector<double> t, std::vector<double> v) {
  if (t.size() != v.size() || t.size() < 2)
    throw InvalidArgument("a time signal needs at least two (t, value) samples");
  for (size_t k = 1; k < t.size(); ++k)
    if (!(t[k] > t[k - 1])) throw InvalidArgument("signal times must increase");
  return [t = std::move(t), v = std::move(v)](double s) {
    if (s < t.front() || s > t.back()) return 0.0;
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    if (it == t.end()) return v.back();
    const size_t k = it - t.begin();
    const double a = (s - t[k - 1]) / (t[k] - t[k - 1]);
    return (1 - a) * v[k - 1] + a * v[k];
  };
}

void validate_input(const Grid& grid, const BoundaryInput& in, const std::vector<int>& gamma_in) {
  if (!(in.eps > 0 && in.eps < in.T0 && in.T0 < in.T))
    throw InvalidArgument("need 0 < eps < T0 < T, got eps = " + std::to_string(in.eps) +
                          ", T0 = " + std::to_string(in.T0) + ", T = " + std::to_string(in.T));
  if (!in.h) throw InvalidArgument("time signal h is missing");
  require_same_grid(in.g.shape(), grid.shape(), "validate_input");
  double scale = 0;
  for (int k = 0; k <= 1000; ++k) scale = std::max(scale, std::abs(in.h(in.T * k / 1000)));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  if (std::abs(in.h(0)) > tol) throw InvalidArgument("h(0) must vanish (compatibility with u(0) = 0)");
  for (int k = 0; k <= 1000; ++k) {
    const double t = in.T0 - in.eps + in.eps * k / 1000;
    if (std::abs(in.h(t)) > tol)
      throw InvalidArgument("h must vanish on the quiet window [T0 - eps, T0]; h(" +
                            std::to_string(t) + ") = " + std::to_string(in.h(t)));
  }
  if (!gamma_in.empty()) {
    std::vector<char> inside(grid.boundary_size(), 0);
    for (int k : gamma_in) inside[k] = 1;
    for (int k = 0; k < grid.boundary_size(); ++k)
      if (!inside[k] && in.g[k] != 0.0)
        throw InvalidArgument("g is nonzero at boundary sample " + std::to_string(k) +
                              " outside Gamma_in");
  }
}

HeatTrajectory heat_solve(const Grid& grid, const Potential& q, const BoundaryInput& input, int nt) {
  if (nt < 16) throw InvalidArgument("heat_solve needs nt >= 16");
  validate_input(grid, input, {});
  require_same_grid(q.shape(), grid.shape(), "heat_solve");
  HeatTrajectory tr;
  tr.dt = input.T / nt;
  tr.u.reserve(nt + 1);
  tr.u.push_back(Eigen::VectorXd::Zero(grid.interior_size()));
  const double gscale = input.g.values().cwiseAbs().maxCoeff();
  march(grid, q, coupling_column(grid, input.g), gscale, input.h, tr.dt, nt,
        [&](int, const Eigen::MatrixXd& U) { tr.u.push_back(U.col(0)); });
  return tr;
}

ParabolicTrace parabolic_dn(const Grid& grid, const Potential& q, const BoundaryInput& input,
                            int nt, const Gammas& gammas) {
  if (nt < 16) throw InvalidArgument("parabolic_dn needs nt >= 16");
  validate_input(grid, input, gammas.in);
  require_same_grid(q.shape(), grid.shape(), "parabolic_dn");
  const double dt = input.T / nt;
  const int k0 = step_index(input.T0, dt);
  if (k0 < 0)
    throw InvalidArgument("T0 = " + std::to_string(input.T0) + " is not a multiple of dt = T/nt = " +
                          std::to_string(dt));
  Eigen::VectorXd u;
  const double gscale = input.g.values().cwiseAbs().maxCoeff();
  march(grid, q, coupling_column(grid, input.g), gscale, input.h, dt, k0,
        [&](int k, const Eigen::MatrixXd& U) {
          if (k == k0) u = U.col(0);
        });
  ParabolicTrace out;
  out.samples = gammas.out;
  out.flux.resize(gammas.out.size());
  for (size_t j = 0; j < gammas.out.size(); ++j) {
    const auto t = tap(grid, gammas.out[j]);
    out.flux[j] = t.factor * u[t.adj];
  }
  return out;
}

ParabolicTrace spectral_parabolic_dn(const BoundarySpectralData& bsd, const BoundaryInput& input,
                                     const Gammas& gammas, int K) {
  const Grid& grid = bsd.grid();
  validate_input(grid, input, gammas.in);
  if (K < 0 || K > bsd.size()) K = bsd.size();
  ParabolicTrace out;
  out.samples = gammas.out;
  out.flux = Eigen::VectorXd::Zero(gammas.out.size());
  for (int n = 0; n < K; ++n) {
    const double lambda = bsd[n].lambda;
    const double c = boundary_inner(input.g, bsd[n].psi, grid).real();
    if (c == 0) continue;
    // Beyond 60/lambda past eps the weight e^{-lambda s} is below e^{-60}.
    const double upper = lambda > 0 ? std::min(input.T0, input.eps + 60 / lambda) : input.T0;
    const double I = integrate(
        [&](double s) { return std::exp(-lambda * s) * input.h(input.T0 - s); }, input.eps, upper);
    for (size_t j = 0; j < gammas.out.size(); ++j)
      out.flux[j] -= I * c * bsd[n].psi[gammas.out[j]].real();
  }

  if (K >= 20 && K == bsd.size()) {
    // Tail bound with lambda_n >= c n, ||psi_n||^2 <= ||psi_K||^2 lambda_n / lambda_K
    // and time weight <= e^{-lambda_n eps} / lambda_n.
    const double c = weyl_fit(bsd).c_low;
    const double psiK = boundary_norm(bsd[K - 1].psi, grid);
    double hmax = 0;
    for (int k = 0; k <= 1000; ++k) hmax = std::max(hmax, std::abs(input.h(input.T0 * k / 1000)));
    const double tail = boundary_norm(input.g, grid) * hmax * psiK * psiK / bsd[K - 1].lambda *
                        std::exp(-c * (K + 1) * input.eps) / (1 - std::exp(-c * input.eps));
    double norm = 0;
    for (size_t j = 0; j < gammas.out.size(); ++j)
      norm += grid.boundary()[gammas.out[j]].weight * out.flux[j] * out.flux[j];
    norm = std::sqrt(norm);
    if (tail > 1e-3 * norm)
      out.warnings.push_back("truncation at K = " + std::to_string(K) +
                             " may be too small: Weyl tail estimate " + std::to_string(tail) +
                             " against trace norm " + std::to_string(norm));
  }
  return out;
}

Eigen::MatrixXd dn_kernel_samples(const BoundarySpectralData& bsd, const BoundaryFunction& g,
                                  const std::vector<double>& s, const Gammas& gammas, int K) {
  const Grid& grid = bsd.grid();
  require_same_grid(g.shape(), grid.shape(), "dn_kernel_samples");
  for (size_t j = 0; j < s.size(); ++j)
    if (!(s[j] > 0) || (j > 0 && !(s[j] > s[j - 1])))
      throw InvalidArgument("s values must be positive and increasing");
  std::vector<char> inside(grid.boundary_size(), 0);
  for (int k : gammas.in) inside[k] = 1;
  for (int k = 0; k < grid.boundary_size(); ++k)
    if (!inside[k] && g[k] != 0.0) throw InvalidArgument("g must be supported in Gamma_in");
  if (K < 0 || K > bsd.size()) K = bsd.size();
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(gammas.out.size(), s.size());
  for (int n = 0; n < K; ++n) {
    const double c = boundary_inner(g, bsd[n].psi, grid).real();
    if (c == 0) continue;
    Eigen::VectorXd psi(gammas.out.size());
    for (size_t i = 0; i < gammas.out.size(); ++i) psi[i] = bsd[n].psi[gammas.out[i]].real();
    for (size_t j = 0; j < s.size(); ++j) F.col(j) += std::exp(-bsd[n].lambda * s[j]) * c * psi;
  }
  return F;
}

Eigen::MatrixXd theta_kernel(const BoundarySpectralData& bsd, const Cluster& cluster,
                             const Gammas& gammas) {
  if (cluster.size < 1 || cluster.first < 0 || cluster.first + cluster.size > bsd.size())
    throw InvalidArgument("cluster " + cluster_name(cluster) + " outside the BSD");
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(gammas.in.size(), gammas.out.size());
  double scale = 0;
  for (int n = cluster.first; n < cluster.first + cluster.size; ++n) {
    Eigen::VectorXd a(gammas.in.size()), b(gammas.out.size());
    for (size_t i = 0; i < gammas.in.size(); ++i) a[i] = bsd[n].psi[gammas.in[i]].real();
    for (size_t i = 0; i < gammas.out.size(); ++i) b[i] = bsd[n].psi[gammas.out[i]].real();
    theta += a * b.transpose();
    scale = std::max(scale, bsd[n].psi.values().squaredNorm());
  }
  if (!(theta.cwiseAbs().maxCoeff() > 1e-10 * scale))
    throw NumericalError("theta kernel of cluster " + cluster_name(cluster) +
                         " vanishes on Gamma_in x Gamma_out: discretization or clustering fault");
  return theta;
}

std::vector<ClusterAlignment> match_eigenbases(const BoundarySpectralData& bsd1,
                                               const BoundarySpectralData& bsd2,
                                               const Gammas& gammas, double rel_tol) {
  const Grid& grid = bsd1.grid();
  require_same_grid(bsd2.grid().shape(), grid.shape(), "match_eigenbases");
  const int K = std::min(bsd1.size(), bsd2.size());
  const auto c1 = bsd1.truncated(K).clusters(rel_tol), c2 = bsd2.truncated(K).clusters(rel_tol);
  const std::vector<int> cand = gamma_intersection(gammas), all = gamma_union(gammas);
  if (cand.empty()) throw InvalidArgument("Gamma_in and Gamma_out do not intersect");

  std::vector<ClusterAlignment> out;
  for (size_t ci = 0; ci < c1.size(); ++ci) {
    const Cluster& c = c1[ci];
    if (ci >= c2.size() || c2[ci].first != c.first || c2[ci].size != c.size)
      throw InvalidArgument("cluster multiplicities differ at " + cluster_name(c));
    if (std::abs(c.lambda - c2[ci].lambda) > rel_tol * std::max(1.0, std::abs(c.lambda)))
      throw InvalidArgument("spectra differ at " + cluster_name(c) + ": " + std::to_string(c.lambda) +
                            " vs " + std::to_string(c2[ci].lambda));
    const int m = c.size;
    if (m > static_cast<int>(cand.size()))
      throw NumericalError("cluster " + cluster_name(c) + " has more members than overlap samples");
    Eigen::MatrixXd P1c(cand.size(), m);
    for (size_t r = 0; r < cand.size(); ++r)
      for (int j = 0; j < m; ++j) P1c(r, j) = bsd1[c.first + j].psi[cand[r]].real();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(P1c.transpose());
    ClusterAlignment a;
    a.cluster = c;
    Eigen::MatrixXd P1(m, m), P2(m, m);
    for (int r = 0; r < m; ++r) {
      const int k = cand[qr.colsPermutation().indices()[r]];
      a.points.push_back(k);
      for (int j = 0; j < m; ++j) {
        P1(r, j) = bsd1[c.first + j].psi[k].real();
        P2(r, j) = bsd2[c.first + j].psi[k].real();
      }
    }
    const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(P1).singularValues();
    const double cond = sv[m - 1] > 0 ? sv[0] / sv[m - 1] : INFINITY;
    if (!(cond <= 1e8))
      throw NumericalError("no well-conditioned point set for cluster " + cluster_name(c) +
                           " (condition number " + std::to_string(cond) + ")");
    a.M = P1.partialPivLu().solve(P2);
    a.orthogonality =
        (a.M.transpose() * a.M - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
    if (a.orthogonality > 1e-8)
      throw NumericalError("M for cluster " + cluster_name(c) + " is not orthogonal: |M^T M - I| = " +
                           std::to_string(a.orthogonality));

    Eigen::MatrixXd Psi1(m, grid.boundary_size()), Psi2(m, grid.boundary_size());
    for (int j = 0; j < m; ++j) {
      Psi1.row(j) = bsd1[c.first + j].psi.values().real().transpose();
      Psi2.row(j) = bsd2[c.first + j].psi.values().real().transpose();
    }
    const Eigen::MatrixXd aligned = a.M * Psi2;
    double scale = 0;
    for (int k : all) {
      a.residual = std::max(a.residual, (Psi1.col(k) - aligned.col(k)).cwiseAbs().maxCoeff());
      scale = std::max(scale, Psi1.col(k).cwiseAbs().maxCoeff());
    }
    if (a.residual > 1e-6 * scale)
      throw NumericalError("Psi_1 = M Psi_2 fails for cluster " + cluster_name(c) +
                           " on Gamma_in u Gamma_out (max deviation " + std::to_string(a.residual) + ")");
    for (int j = 0; j < m; ++j)
      a.aligned.emplace_back(grid, aligned.row(j).transpose().cast<Complex>());
    out.push_back(std::move(a));
  }
  return out;
}

double pulse_weight(const PulseOptions& o, double lambda) {
  return integrate(
      [&](double r) {
        const double s = std::sin(std::numbers::pi * r / o.pulse);
        return s * s * std::exp(-lambda * (o.t_first - r));
      },
      0, o.pulse);
}

TraceSet simulate_pulse_traces(const Grid& grid, const Potential& q, const Gammas& gammas,
                               const PulseOptions& o) {
  if (!(o.pulse > 0 && o.t_first > o.pulse && o.ds > 0 && o.dt > 0 && o.samples >= 2))
    throw InvalidArgument("pulse experiment needs 0 < pulse < t_first, ds > 0, dt > 0, samples >= 2");
  const int k_first = step_index(o.t_first, o.dt), stride = step_index(o.ds, o.dt);
  if (k_first < 0 || stride < 1)
    throw InvalidArgument("t_first and ds must be whole multiples of dt");
  require_same_grid(q.shape(), grid.shape(), "simulate_pulse_traces");

  const int m = gammas.in.size(), nout = gammas.out.size();
  Eigen::MatrixXd G(grid.interior_size(), m);
  double gscale = 0;
  for (int i = 0; i < m; ++i) {
    BoundaryFunction g(grid);
    const double w = grid.boundary()[gammas.in[i]].weight;
    g.values()[gammas.in[i]] = 1 / w;
    gscale = std::max(gscale, 1 / w);
    G.col(i) = coupling_column(grid, g);
  }
  std::vector<OnePointTap> taps;
  for (int k : gammas.out) taps.push_back(tap(grid, k));
  const TimeSignal h = [p = o.pulse](double t) {
    if (t <= 0 || t >= p) return 0.0;
    const double s = std::sin(std::numbers::pi * t / p);
    return s * s;
  };

  TraceSet ts;
  ts.in = gammas.in;
  ts.out = gammas.out;
  ts.pulse = o;
  ts.values.resize(static_cast<Eigen::Index>(m) * nout, o.samples);
  const int last = k_first + (o.samples - 1) * stride;
  march(grid, q, G, gscale, h, o.dt, last, [&](int k, const Eigen::MatrixXd& U) {
    if (k < k_first || (k - k_first) % stride != 0) return;
    const int col = (k - k_first) / stride;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < nout; ++j) ts.values(i * nout + j, col) = taps[j].factor * U(taps[j].adj, i);
  });
  return ts;
}

Recovery recover_from_traces(const TraceSet& traces, int order) {
  // Time is measured from t_first, so amplitudes are -pulse_weight * theta.
  ExpSumData d{0.0, traces.pulse.ds, traces.values};
  Recovery r;
  r.model = exp_sum_extract(d, order);
  const int nin = traces.in.size(), nout = traces.out.size();
  for (size_t k = 0; k < r.model.rates.size(); ++k) {
    RecoveredCluster c;
    c.lambda = r.model.rates[k];
    const double w = pulse_weight(traces.pulse, c.lambda);
    c.theta.resize(nin, nout);
    for (int i = 0; i < nin; ++i)
      for (int j = 0; j < nout; ++j) c.theta(i, j) = -r.model.amplitudes(i * nout + j, k) / w;
    r.clusters.push_back(std::move(c));
  }
  return r;
}

}  // namespace blab
