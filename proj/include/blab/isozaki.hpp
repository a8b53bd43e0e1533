#pragma once

#include <vector>

#include <Eigen/Core>

#include "blab/bvp.hpp"
#include "blab/domain.hpp"
#include "blab/spectral.hpp"

namespace blab {

using Vec2 = Eigen::Vector2d;

struct IsozakiProbe {
  Vec2 xi, eta;
  double tau = 0, beta = 0;
  Vec2 eta_plus, eta_minus;
  Complex lambda_plus, lambda_minus;
  BoundaryFunction f_plus, f_minus;
  Eigen::VectorXcd f_plus_interior, f_minus_interior;
  // Grid waves e^{i k.x} with the 5-point symbol of k_plus equal to lambda_plus
  // and conj(k_minus) = k_plus + (1 + i/tau) xi, so the product identity stays
  // exact. These carry the pairings; the continuum samples above do not solve
  // the discrete equation and drift by O(tau^3 h^2).
  Eigen::Vector2cd k_plus, k_minus;
  BoundaryFunction g_plus, g_minus;
  Eigen::VectorXcd g_plus_interior, g_minus_interior;
};

// 5-point symbol sum_d (4/h_d^2) sin^2(k_d h_d / 2).
Complex grid_symbol(const Grid& grid, const Eigen::Vector2cd& k);

IsozakiProbe make_probe(const Vec2& xi, double tau, const Grid& grid);

// (1 + diam^{1/2} + |dOmega|^{1/2}) sup e^{|x|}, with the origin at the lower-left corner.
double c_star(const Grid& grid);

// Largest tau with 8 grid points per wavelength 2 pi / tau.
double resolution_limit(const Grid& grid);

// tau_k = tau0 r^k, tau0 = max(5, |xi|+2), stopped below the cap min(tau_max,
// resolution limit); the cap itself closes the list and replaces a last point
// closer to it than a factor sqrt(r).
std::vector<double> tau_schedule(double xi_norm, double tau_max, const Grid& grid,
                                 double ratio = 1.3);

struct PairingSample {
  double tau = 0;
  Complex s1, s2, s;
};

// <Lambda_{q, lambda_plus} g_plus, g_minus>. The flux is
// (g - u1)/h + (h/2)(-g_tt + (q - lambda) g), with the first term rescaled at
// edge ends like the one-point trace, which keeps the discrete Green identity
// exact for differences.
Complex dn_pairing_direct(const Grid& grid, const Potential& q, const IsozakiProbe& p);
Complex dn_pairing(const ShiftedSolver& solver, const IsozakiProbe& p);
// Flux of the solution with data g_plus at the solver's own shift; at a real
// mu this is the reference flux the spectral route expects.
BoundaryFunction green_flux(const ShiftedSolver& solver, const IsozakiProbe& p);

// Neumann-difference series at (lambda_plus, mu) paired with f_minus, plus
// <reference_flux, f_minus>. K < 0 uses every pair.
Complex dn_pairing_spectral(const BoundarySpectralData& bsd, const IsozakiProbe& p, double mu,
                            const BoundaryFunction& reference_flux, int K = -1);

PairingSample s_tau(const Grid& grid, const Potential& q1, const Potential& q2,
                    const IsozakiProbe& p);

// Two-point extrapolation in 1/tau from the last two samples.
Complex richardson(const PairingSample& a, const PairingSample& b);

struct FourierEstimate {
  Complex value;
  std::vector<PairingSample> samples;
};

FourierEstimate fourier_estimate(const Grid& grid, const Potential& q1, const Potential& q2,
                                 const Vec2& xi, const std::vector<double>& schedule);

struct LatticeValue {
  Vec2 xi;
  Complex value;
};

struct Reconstruction {
  Eigen::VectorXd field;     // real part of the synthesis on interior nodes
  double imag_residual = 0;  // ||Im|| / ||Re||
  bool warning = false;      // imag_residual above 5%
  std::vector<LatticeValue> spectrum;
};

// Lattice (2 pi / L) Z^2 cut at |xi| <= xi_max. Each estimate extrapolates
// the last two points of its tau schedule.
Reconstruction reconstruct_difference(const Grid& grid, const Potential& q1, const Potential& q2,
                                      double xi_max, double tau_max);

std::vector<Vec2> xi_lattice(const Grid& grid, double xi_max);

// Fourier synthesis (1/|box|) sum F(xi) e^{i xi.x} on interior nodes.
Eigen::VectorXcd fourier_synthesis(const Grid& grid, const std::vector<LatticeValue>& spectrum);

// zeta(psi, phi) = <f_plus, psi> conj(<f_minus, phi>)
Complex zeta(const IsozakiProbe& p, const BoundaryFunction& psi, const BoundaryFunction& phi,
             const Grid& grid);

// Contribution of pairs n < N (1-based) to the spectral-route S_tau.
Complex incomplete_data_term(const BoundarySpectralData& bsd1, const BoundarySpectralData& bsd2,
                             const IsozakiProbe& p, int N);

// S_tau assembled from two BSDs in the mu -> -infinity form, all common pairs.
Complex spectral_s_tau(const BoundarySpectralData& bsd1, const BoundarySpectralData& bsd2,
                       const IsozakiProbe& p);

struct TailTerms {
  std::vector<Complex> a, b;  // entries for n = N, N+1, ..., K
};

TailTerms tail_terms(const BoundarySpectralData& bsd1, const BoundarySpectralData& bsd2,
                     const IsozakiProbe& p, int N);

struct TailSums {
  Complex sum_a, sum_b;
};

TailSums tail_functionals(const BoundarySpectralData& bsd1, const BoundarySpectralData& bsd2,
                          const IsozakiProbe& p, int N);

}  // namespace blab
