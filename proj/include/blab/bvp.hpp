#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "blab/domain.hpp"
#include "blab/spectral.hpp"

namespace blab {

struct ComplexField {
  ComplexField(const Grid& grid, Eigen::VectorXcd values);
  GridShape shape;
  Eigen::VectorXcd values;
};

struct ShiftedProblem {
  Grid grid;
  Potential q;
  Complex lambda;
  BoundaryFunction f;
  std::vector<double> spectrum;  // computed eigenvalues of A_q, if known
};

// Throws ResonanceError when lambda lies within 1e-9(1+|lambda_n|) of a listed eigenvalue.
void check_resonance(Complex lambda, std::span<const double> spectrum);

// Interior right-hand side that carries Dirichlet data f through the stencil.
Eigen::VectorXcd boundary_coupling(const Grid& grid, const BoundaryFunction& f);

// Factorization of A_q - lambda I, reusable across boundary data.
class ShiftedSolver {
 public:
  ShiftedSolver(const Grid& grid, const Potential& q, Complex lambda,
                std::span<const double> spectrum = {});
  ~ShiftedSolver();
  ShiftedSolver(ShiftedSolver&&) noexcept;
  ShiftedSolver& operator=(ShiftedSolver&&) noexcept;

  const Grid& grid() const;
  const Potential& potential() const;
  Complex lambda() const;
  ComplexField solve(const BoundaryFunction& f) const;
  // Outward normal derivative of the solution with data f.
  BoundaryFunction neumann_trace(const BoundaryFunction& f) const;
  Eigen::VectorXcd solve_interior(const Eigen::VectorXcd& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ComplexField solve_direct(const ShiftedProblem& p);

ComplexField solve_series(const BoundarySpectralData& bsd, const BoundaryFunction& f,
                          Complex lambda, int K = 200);

// Series coefficients <f, psi_n>/(lambda - lambda_n), n < K.
Eigen::VectorXcd series_coefficients(const BoundarySpectralData& bsd,
                                     const BoundaryFunction& f, Complex lambda, int K);

std::vector<double> decay_profile(const Grid& grid, const Potential& q,
                                  const BoundaryFunction& f,
                                  const std::vector<double>& lambdas);

// (mu - lambda) sum_n <f,psi_n> psi_n / ((lambda - lambda_n)(mu - lambda_n)); K < 0 uses all pairs.
BoundaryFunction neumann_difference(const BoundarySpectralData& bsd, const BoundaryFunction& f,
                                    Complex lambda, Complex mu, int K = -1);

std::vector<double> potential_dimming(const Grid& grid, const Potential& q1,
                                      const Potential& q2, const BoundaryFunction& f,
                                      const std::vector<double>& lambdas);

double field_norm(const ComplexField& u, const Grid& grid);

}  // namespace blab
