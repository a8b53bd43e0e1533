#include "blab/isozaki.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include <Eigen/LU>

#include "blab/error.hpp"
#include "blab/parallel.hpp"

namespace blab {

namespace {

constexpr Complex I(0, 1);

}  // namespace

Complex grid_symbol(const Grid& grid, const Eigen::Vector2cd& k) {
  const double h[2] = {grid.hx(), grid.hy()};
  Complex s = 0;
  for (int d = 0; d < 2; ++d) {
    const Complex t = std::sin(k[d] * h[d] / 2.0);
    s += 4.0 * t * t / (h[d] * h[d]);
  }
  return s;
}

namespace {

Eigen::Vector2cd symbol_gradient(const Grid& grid, const Eigen::Vector2cd& k) {
  const double h[2] = {grid.hx(), grid.hy()};
  Eigen::Vector2cd g;
  for (int d = 0; d < 2; ++d) g[d] = 2.0 / h[d] * std::sin(k[d] * h[d]);
  return g;
}

// Newton on the continuum wave vector. For xi = 0 both conditions coincide
// and only the length along eta is free.
Eigen::Vector2cd grid_wave(const Grid& grid, const IsozakiProbe& p) {
  const Complex c = 1.0 + I / p.tau;
  const Eigen::Vector2cd xi = p.xi.cast<Complex>();
  Eigen::Vector2cd k = (p.tau + I) * p.eta_plus.cast<Complex>();
  const double scale = std::abs(p.lambda_plus);
  for (int it = 0; it < 60; ++it) {
    const Complex r1 = grid_symbol(grid, k) - p.lambda_plus;
    Eigen::Vector2cd step;
    if (p.xi.norm() == 0) {
      const Eigen::Vector2cd e = p.eta.cast<Complex>();
      step = e * (r1 / symbol_gradient(grid, k).cwiseProduct(e).sum());
    } else {
      const Eigen::Vector2cd k2 = k + c * xi;
      Eigen::Matrix2cd J;
      J.row(0) = symbol_gradient(grid, k).transpose();
      J.row(1) = symbol_gradient(grid, k2).transpose();
      step = J.partialPivLu().solve(
          Eigen::Vector2cd(r1, grid_symbol(grid, k2) - p.lambda_plus));
    }
    k -= step;
    if (!k.allFinite()) break;
    if (step.norm() <= 1e-14 * p.tau) {
      const Complex r2 = grid_symbol(grid, k + c * xi) - p.lambda_plus;
      if (std::abs(grid_symbol(grid, k) - p.lambda_plus) <= 1e-11 * scale &&
          std::abs(r2) <= 1e-11 * scale)
        return k;
    }
  }
  throw NumericalError("grid wave vector did not converge (tau = " + std::to_string(p.tau) + ")");
}

}  // namespace

IsozakiProbe make_probe(const Vec2& xi, double tau, const Grid& grid) {
  const double xn = xi.norm();
  if (!(tau > xn + 1))
    throw InvalidArgument("probe needs tau > |xi| + 1 (tau = " + std::to_string(tau) +
                          ", |xi| = " + std::to_string(xn) + ")");
  IsozakiProbe p;
  p.xi = xi;
  p.eta = xn > 0 ? Vec2(-xi.y() / xn, xi.x() / xn) : Vec2(1, 0);
  p.tau = tau;
  p.beta = std::sqrt(1 - xn * xn / (4 * tau * tau));
  p.eta_plus = p.beta * p.eta - xi / (2 * tau);
  p.eta_minus = p.beta * p.eta + xi / (2 * tau);
  p.lambda_plus = (tau + I) * (tau + I);
  p.lambda_minus = (tau - I) * (tau - I);
  p.k_plus = grid_wave(grid, p);
  p.k_minus = (p.k_plus + (1.0 + I / tau) * xi.cast<Complex>()).conjugate();

  const Eigen::Vector2cd cp = (tau + I) * p.eta_plus.cast<Complex>();
  const Eigen::Vector2cd cm = (tau - I) * p.eta_minus.cast<Complex>();
  auto wave = [](const Eigen::Vector2cd& k, double x, double y) {
    return std::exp(I * (k[0] * x + k[1] * y));
  };
  const int nb = grid.boundary_size(), ni = grid.interior_size();
  Eigen::VectorXcd fp(nb), fm(nb), gp(nb), gm(nb);
  for (int k = 0; k < nb; ++k) {
    const auto& b = grid.boundary()[k];
    fp[k] = wave(cp, b.x, b.y);
    fm[k] = wave(cm, b.x, b.y);
    gp[k] = wave(p.k_plus, b.x, b.y);
    gm[k] = wave(p.k_minus, b.x, b.y);
  }
  p.f_plus = BoundaryFunction(grid, std::move(fp));
  p.f_minus = BoundaryFunction(grid, std::move(fm));
  p.g_plus = BoundaryFunction(grid, std::move(gp));
  p.g_minus = BoundaryFunction(grid, std::move(gm));
  p.f_plus_interior.resize(ni);
  p.f_minus_interior.resize(ni);
  p.g_plus_interior.resize(ni);
  p.g_minus_interior.resize(ni);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const int n = grid.index(i, j);
      p.f_plus_interior[n] = wave(cp, grid.x(i), grid.y(j));
      p.f_minus_interior[n] = wave(cm, grid.x(i), grid.y(j));
      p.g_plus_interior[n] = wave(p.k_plus, grid.x(i), grid.y(j));
      p.g_minus_interior[n] = wave(p.k_minus, grid.x(i), grid.y(j));
    }
  return p;
}

double c_star(const Grid& grid) {
  const double d = grid.diameter();
  return (1 + std::sqrt(d) + std::sqrt(grid.perimeter())) * std::exp(d);
}

double resolution_limit(const Grid& grid) {
  return 2 * std::numbers::pi / (8 * std::max(grid.hx(), grid.hy()));
}

std::vector<double> tau_schedule(double xi_norm, double tau_max, const Grid& grid, double ratio) {
  const double cap = std::min(tau_max, resolution_limit(grid));
  const double tau0 = std::max(5.0, xi_norm + 2);
  if (!(ratio > 1)) throw InvalidArgument("tau ratio must exceed 1");
  if (!(cap > tau0))
    throw InvalidArgument("tau schedule is empty: start " + std::to_string(tau0) +
                          " is not below the cap " + std::to_string(cap));
  std::vector<double> out;
  for (double t = tau0; t < cap * (1 - 1e-9); t *= ratio) out.push_back(t);
  // A point just under the cap would make the last Richardson step degenerate.
  if (out.size() > 1 && cap / out.back() < std::sqrt(ratio)) out.pop_back();
  out.push_back(cap);
  return out;
}

BoundaryFunction green_flux(const ShiftedSolver& solver, const IsozakiProbe& p) {
  const Grid& g = solver.grid();
  const Potential& q = solver.potential();
  const Eigen::VectorXcd u = solver.solve(p.g_plus).values;
  Eigen::VectorXcd flux(g.boundary_size());
  for (int k = 0; k < g.boundary_size(); ++k) {
    const auto& b = g.boundary()[k];
    const double h = g.normal_spacing(k);
    const int adj = g.inward_neighbor(k, 1);
    const Complex kt = (b.edge == Edge::Bottom || b.edge == Edge::Top) ? p.k_plus[0] : p.k_plus[1];
    const Complex gk = p.g_plus[k];
    flux[k] = (gk - u[adj]) / h * (g.tangent_spacing(k) / b.weight) + h / 2 * (kt * kt + q[adj] - solver.lambda()) * gk;
  }
  return BoundaryFunction(g, std::move(flux));
}

Complex dn_pairing(const ShiftedSolver& solver, const IsozakiProbe& p) {
  if (std::abs(solver.lambda() - p.lambda_plus) > 1e-12 * std::abs(p.lambda_plus))
    throw InvalidArgument("solver shift does not match the probe");
  return boundary_inner(green_flux(solver, p), p.g_minus, solver.grid());
}

Complex dn_pairing_direct(const Grid& grid, const Potential& q, const IsozakiProbe& p) {
  return dn_pairing(ShiftedSolver(grid, q, p.lambda_plus), p);
}

Complex dn_pairing_spectral(const BoundarySpectralData& bsd, const IsozakiProbe& p, double mu,
                            const BoundaryFunction& reference_flux, int K) {
  if (!(mu < -(1 + bsd.sup_bound()))) throw InvalidArgument("spectral pairing needs mu < -(1+M)");
  const Grid& g = bsd.grid();
  // The series is the one-point trace of u_lambda - u_mu; the flux above adds
  // (h/2)(mu - lambda) g on top of it.
  BoundaryFunction diff = neumann_difference(bsd, p.g_plus, p.lambda_plus, mu, K);
  for (int k = 0; k < g.boundary_size(); ++k)
    diff.values()[k] += g.normal_spacing(k) / 2 * (mu - p.lambda_plus) * p.g_plus[k];
  return boundary_inner(diff, p.g_minus, g) + boundary_inner(reference_flux, p.g_minus, g);
}

PairingSample s_tau(const Grid& grid, const Potential& q1, const Potential& q2,
                    const IsozakiProbe& p) {
  PairingSample s;
  s.tau = p.tau;
  s.s1 = dn_pairing_direct(grid, q1, p);
  s.s2 = dn_pairing_direct(grid, q2, p);
  s.s = s.s1 - s.s2;
  return s;
}

Complex richardson(const PairingSample& a, const PairingSample& b) {
  return (b.tau * b.s - a.tau * a.s) / (b.tau - a.tau);
}

namespace {

void check_schedule(const Grid& grid, const Vec2& xi, const std::vector<double>& schedule) {
  if (schedule.size() < 2) throw InvalidArgument("tau schedule needs at least two points");
  for (size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > xi.norm() + 1)) throw InvalidArgument("tau schedule entry <= |xi| + 1");
    if (k > 0 && !(schedule[k] > schedule[k - 1]))
      throw InvalidArgument("tau schedule must increase");
  }
  const double limit = resolution_limit(grid);
  if (schedule.back() > limit * (1 + 1e-12)) {
    const double hmax = 2 * std::numbers::pi / (8 * schedule.back());
    const int need = static_cast<int>(std::ceil(std::max(grid.Lx(), grid.Ly()) / hmax)) - 1;
    throw InvalidArgument("grid under-resolves tau = " + std::to_string(schedule.back()) +
                          " (8 points per wavelength need nx, ny >= " + std::to_string(need) + ")");
  }
}

}  // namespace

FourierEstimate fourier_estimate(const Grid& grid, const Potential& q1, const Potential& q2,
                                 const Vec2& xi, const std::vector<double>& schedule) {
  check_schedule(grid, xi, schedule);
  FourierEstimate out;
  for (double tau : schedule) out.samples.push_back(s_tau(grid, q1, q2, make_probe(xi, tau, grid)));
  const size_t n = out.samples.size();
  out.value = richardson(out.samples[n - 2], out.samples[n - 1]);
  return out;
}

std::vector<Vec2> xi_lattice(const Grid& grid, double xi_max) {
  const double dx = 2 * std::numbers::pi / grid.Lx(), dy = 2 * std::numbers::pi / grid.Ly();
  const int jx = static_cast<int>(std::floor(xi_max / dx + 1e-12));
  const int jy = static_cast<int>(std::floor(xi_max / dy + 1e-12));
  std::vector<Vec2> out;
  for (int b = -jy; b <= jy; ++b)
    for (int a = -jx; a <= jx; ++a) {
      Vec2 xi(a * dx, b * dy);
      if (xi.norm() <= xi_max * (1 + 1e-12)) out.push_back(xi);
    }
  return out;
}

Eigen::VectorXcd fourier_synthesis(const Grid& grid, const std::vector<LatticeValue>& spectrum) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(grid.interior_size());
  const double inv_area = 1.0 / (grid.Lx() * grid.Ly());
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      Complex s = 0;
      for (const auto& v : spectrum)
        s += v.value * std::exp(I * (v.xi.x() * grid.x(i) + v.xi.y() * grid.y(j)));
      out[grid.index(i, j)] = s * inv_area;
    }
  return out;
}

Reconstruction reconstruct_difference(const Grid& grid, const Potential& q1, const Potential& q2,
                                      double xi_max, double tau_max) {
  require_same_grid(q1.shape(), grid.shape(), "reconstruct_difference");
  require_same_grid(q2.shape(), grid.shape(), "reconstruct_difference");
  const auto lattice = xi_lattice(grid, xi_max);

  // Only the last two points of each schedule enter the extrapolation. Group
  // the work by tau so each factorization serves every xi that needs it.
  std::map<double, std::vector<std::pair<int, int>>> by_tau;
  for (int k = 0; k < static_cast<int>(lattice.size()); ++k) {
    auto sched = tau_schedule(lattice[k].norm(), tau_max, grid);
    if (sched.size() < 2) throw InvalidArgument("tau schedule too short for extrapolation");
    check_schedule(grid, lattice[k], sched);
    by_tau[sched[sched.size() - 2]].push_back({k, 0});
    by_tau[sched.back()].push_back({k, 1});
  }
  std::vector<std::pair<double, std::vector<std::pair<int, int>>>> groups(by_tau.begin(),
                                                                          by_tau.end());
  std::vector<std::array<PairingSample, 2>> samples(lattice.size());
  parallel_for(static_cast<int>(groups.size()), [&](int gi) {
    const double tau = groups[gi].first;
    const Complex lp = (tau + I) * (tau + I);
    ShiftedSolver s1(grid, q1, lp), s2(grid, q2, lp);
    for (auto [k, slot] : groups[gi].second) {
      IsozakiProbe p = make_probe(lattice[k], tau, grid);
      PairingSample& s = samples[k][slot];
      s.tau = tau;
      s.s1 = dn_pairing(s1, p);
      s.s2 = dn_pairing(s2, p);
      s.s = s.s1 - s.s2;
    }
  });

  Reconstruction out;
  for (size_t k = 0; k < lattice.size(); ++k)
    out.spectrum.push_back({lattice[k], richardson(samples[k][0], samples[k][1])});
  Eigen::VectorXcd synth = fourier_synthesis(grid, out.spectrum);
  out.field = synth.real();
  const double re = synth.real().norm(), im = synth.imag().norm();
  out.imag_residual = re > 0 ? im / re : (im > 0 ? INFINITY : 0.0);
  out.warning = out.imag_residual > 0.05;
  return out;
}

Complex zeta(const IsozakiProbe& p, const BoundaryFunction& psi, const BoundaryFunction& phi,
             const Grid& grid) {
  return boundary_inner(p.g_plus, psi, grid) * std::conj(boundary_inner(p.g_minus, phi, grid));
}

Complex incomplete_data_term(const BoundarySpectralData& bsd1, const BoundarySpectralData& bsd2,
                             const IsozakiProbe& p, int N) {
  if (N < 1 || N - 1 > std::min(bsd1.size(), bsd2.size()))
    throw InvalidArgument("incomplete_data_term: N exceeds the truncation");
  const Grid& g = bsd1.grid();
  require_same_grid(bsd2.grid().shape(), g.shape(), "incomplete_data_term");
  Complex s = 0;
  for (int n = 0; n < N - 1; ++n) {
    s += zeta(p, bsd1[n].psi, bsd1[n].psi, g) / (p.lambda_plus - bsd1[n].lambda);
    s -= zeta(p, bsd2[n].psi, bsd2[n].psi, g) / (p.lambda_plus - bsd2[n].lambda);
  }
  return s;
}

Complex spectral_s_tau(const BoundarySpectralData& bsd1, const BoundarySpectralData& bsd2,
                       const IsozakiProbe& p) {
  return incomplete_data_term(bsd1, bsd2, p, std::min(bsd1.size(), bsd2.size()) + 1);
}

TailTerms tail_terms(const BoundarySpectralData& bsd1, const BoundarySpectralData& bsd2,
                     const IsozakiProbe& p, int N) {
  const int K = std::min(bsd1.size(), bsd2.size());
  if (N < 1 || N > K + 1) throw InvalidArgument("tail_terms: N outside 1..K+1");
  const Grid& g = bsd1.grid();
  require_same_grid(bsd2.grid().shape(), g.shape(), "tail_terms");
  TailTerms t;
  for (int n = N - 1; n < K; ++n) {
    const auto& e1 = bsd1[n];
    const auto& e2 = bsd2[n];
    const Complex d1 = p.lambda_plus - e1.lambda, d2 = p.lambda_plus - e2.lambda;
    t.a.push_back((e1.lambda - e2.lambda) * zeta(p, e1.psi, e1.psi, g) / (d1 * d2));
    BoundaryFunction diff(g, e1.psi.values() - e2.psi.values());
    t.b.push_back((zeta(p, diff, e1.psi, g) + zeta(p, e2.psi, diff, g)) / d2);
  }
  return t;
}

TailSums tail_functionals(const BoundarySpectralData& bsd1, const BoundarySpectralData& bsd2,
                          const IsozakiProbe& p, int N) {
  TailTerms t = tail_terms(bsd1, bsd2, p, N);
  TailSums s{0, 0};
  for (auto v : t.a) s.sum_a += v;
  for (auto v : t.b) s.sum_b += v;
  return s;
}

}  // namespace blab
