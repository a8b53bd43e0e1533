#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "blab/domain.hpp"
#include "blab/expsum.hpp"
#include "blab/spectral.hpp"

namespace blab {

// Boundary sample index sets, in boundary order.
struct Gammas {
  std::vector<int> in, out;
};

// Gamma_in = bottom plus the first `overlap` samples of the right edge,
// Gamma_out = right plus the last `overlap` samples of the bottom edge, so
// the two share 2*overlap samples around the corner (Lx, 0). overlap < 0
// means max(1, nx/4).
Gammas default_gammas(const Grid& grid, int overlap = -1);
Gammas edge_gammas(const Grid& grid, std::vector<Edge> in, std::vector<Edge> out);
std::vector<int> gamma_intersection(const Gammas& g);
std::vector<int> gamma_union(const Gammas& g);

// Human-readable findings on the union/overlap hypotheses; empty when both hold.
std::vector<std::string> check_gammas(const Grid& grid, const Gammas& g);

using TimeSignal = std::function<double(double)>;

// Piecewise linear interpolation of (t, value) samples; zero outside.
TimeSignal interpolate_signal(std::vector<double> t, std::vector<double> v);

struct BoundaryInput {
  BoundaryFunction g;
  TimeSignal h;
  double eps = 0, T = 0, T0 = 0;
};

// Throws InvalidArgument unless 0 < eps < T0 < T, h(0) = 0, h vanishes on
// [T0 - eps, T0] and g vanishes off gamma_in (skipped when gamma_in is empty).
void validate_input(const Grid& grid, const BoundaryInput& input, const std::vector<int>& gamma_in);

struct HeatTrajectory {
  double dt = 0;
  std::vector<Eigen::VectorXd> u;  // u[k] at t = k dt, k = 0..nt
};

// Crank-Nicolson for u_t = Delta u - q u with Dirichlet data g h(t), u(0) = 0,
// nt uniform steps on [0, T].
HeatTrajectory heat_solve(const Grid& grid, const Potential& q, const BoundaryInput& input, int nt);

struct ParabolicTrace {
  std::vector<int> samples;  // boundary indices of Gamma_out
  Eigen::VectorXd flux;      // aligned with samples
  std::vector<std::string> warnings;
};

// One-point flux of u(T0); T0 must fall on a time step.
ParabolicTrace parabolic_dn(const Grid& grid, const Potential& q, const BoundaryInput& input,
                            int nt, const Gammas& gammas);

// -sum_n [int_eps^T0 e^{-lambda_n s} h(T0 - s) ds] <g, psi_n> psi_n on Gamma_out.
ParabolicTrace spectral_parabolic_dn(const BoundarySpectralData& bsd, const BoundaryInput& input,
                                     const Gammas& gammas, int K = -1);

// F(sigma', s) = sum_n e^{-lambda_n s} <g, psi_n> psi_n(sigma'); rows follow
// gammas.out, columns follow s.
Eigen::MatrixXd dn_kernel_samples(const BoundarySpectralData& bsd, const BoundaryFunction& g,
                                  const std::vector<double>& s, const Gammas& gammas, int K = -1);

// theta(sigma, sigma') = sum_i psi_i(sigma) psi_i(sigma') over one cluster,
// rows over gammas.in, columns over gammas.out. Throws NumericalError when
// max |theta| <= 1e-10 max ||psi_i||^2.
Eigen::MatrixXd theta_kernel(const BoundarySpectralData& bsd, const Cluster& cluster,
                             const Gammas& gammas);

struct ClusterAlignment {
  Cluster cluster;
  std::vector<int> points;  // selected sigma_1..sigma_m
  Eigen::MatrixXd M;        // P1^{-1} P2, so Psi_1 = M Psi_2
  double orthogonality = 0; // ||M^T M - I||_max
  double residual = 0;      // max |Psi_1 - M Psi_2| over the union
  std::vector<BoundaryFunction> aligned;  // M Psi_2 on the whole boundary
};

std::vector<ClusterAlignment> match_eigenbases(const BoundarySpectralData& bsd1,
                                               const BoundarySpectralData& bsd2,
                                               const Gammas& gammas, double rel_tol = 1e-6);

// Pulse experiment: inputs e_sigma / w_sigma for every sigma in Gamma_in, all
// driven by h(t) = sin^2(pi t / pulse) on [0, pulse]. Traces are recorded at
// t_first + k ds after the pulse is over, where every recorded time is a valid
// T0 with eps = t - pulse.
struct PulseOptions {
  double pulse = 0.02;
  double dt = 1e-4;
  double t_first = 0.03;
  double ds = 5e-4;
  int samples = 200;
};

struct TraceSet {
  std::vector<int> in, out;
  PulseOptions pulse;
  Eigen::MatrixXd values;  // row in_index * |out| + out_index, column k
};

TraceSet simulate_pulse_traces(const Grid& grid, const Potential& q, const Gammas& gammas,
                               const PulseOptions& opts = {});

// int_0^pulse sin^2(pi r / pulse) e^{-lambda (t_first - r)} dr
double pulse_weight(const PulseOptions& opts, double lambda);

struct RecoveredCluster {
  double lambda = 0;
  Eigen::MatrixXd theta;  // |in| x |out|
};

struct Recovery {
  ExpSumModel model;
  std::vector<RecoveredCluster> clusters;
};

// Fits `order` exponentials to the traces and converts amplitudes to theta
// kernels by theta = -A / pulse_weight(lambda).
Recovery recover_from_traces(const TraceSet& traces, int order);

}  // namespace blab
