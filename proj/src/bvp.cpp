#include "blab/bvp.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseCore>
#include <Eigen/UmfPackSupport>

#include "blab/error.hpp"

namespace blab {

namespace {

using ComplexSparse = Eigen::SparseMatrix<Complex>;

// UmfPackLU keeps UMFPACK's info array protected; we want its rcond estimate.
class UmfLU : public Eigen::UmfPackLU<ComplexSparse> {
 public:
  double rcond() const { return m_umfpackInfo(UMFPACK_RCOND); }
};

}  // namespace

ComplexField::ComplexField(const Grid& grid, Eigen::VectorXcd v)
    : shape(grid.shape()), values(std::move(v)) {
  if (values.size() != grid.interior_size())
    throw InvalidArgument("field size does not match the grid");
  if (!values.allFinite()) throw NumericalError("field has non-finite entries");
}

double field_norm(const ComplexField& u, const Grid& grid) {
  return interior_norm(u.values, grid);
}

void check_resonance(Complex lambda, std::span<const double> spectrum) {
  for (size_t n = 0; n < spectrum.size(); ++n) {
    const double d = std::abs(lambda - spectrum[n]);
    if (d <= 1e-9 * (1 + std::abs(spectrum[n])))
      throw ResonanceError("shift resonates with eigenvalue n = " + std::to_string(n + 1) +
                               " (distance " + std::to_string(d) + ")",
                           d);
  }
}

Eigen::VectorXcd boundary_coupling(const Grid& grid, const BoundaryFunction& f) {
  require_same_grid(f.shape(), grid.shape(), "boundary_coupling");
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(grid.interior_size());
  for (int k = 0; k < grid.boundary_size(); ++k) {
    const double h = grid.normal_spacing(k);
    b[grid.inward_neighbor(k, 1)] += f[k] / (h * h);
  }
  return b;
}

struct ShiftedSolver::Impl {
  Impl(const Grid& g, const Potential& p, Complex l) : grid(g), q(p), lambda(l) {}
  Grid grid;
  Potential q;
  Complex lambda;
  ComplexSparse matrix;
  UmfLU lu;
};

ShiftedSolver::ShiftedSolver(const Grid& grid, const Potential& q, Complex lambda,
                             std::span<const double> spectrum) {
  check_resonance(lambda, spectrum);
  impl_ = std::make_unique<Impl>(grid, q, lambda);
  impl_->matrix = assemble(grid, q).matrix.cast<Complex>();
  for (int k = 0; k < grid.interior_size(); ++k) impl_->matrix.coeffRef(k, k) -= lambda;
  impl_->matrix.makeCompressed();
  impl_->lu.compute(impl_->matrix);
  const double rc = impl_->lu.rcond();
  if (impl_->lu.info() != Eigen::Success || !(rc > 1e-15))
    throw ResonanceError("shifted operator is numerically singular (rcond " +
                             std::to_string(rc) + ")",
                         0.0);
}

ShiftedSolver::~ShiftedSolver() = default;
ShiftedSolver::ShiftedSolver(ShiftedSolver&&) noexcept = default;
ShiftedSolver& ShiftedSolver::operator=(ShiftedSolver&&) noexcept = default;

const Grid& ShiftedSolver::grid() const { return impl_->grid; }
const Potential& ShiftedSolver::potential() const { return impl_->q; }
Complex ShiftedSolver::lambda() const { return impl_->lambda; }

Eigen::VectorXcd ShiftedSolver::solve_interior(const Eigen::VectorXcd& rhs) const {
  Eigen::VectorXcd u = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success) throw NumericalError("sparse LU solve failed");
  return u;
}

ComplexField ShiftedSolver::solve(const BoundaryFunction& f) const {
  return ComplexField(impl_->grid, solve_interior(boundary_coupling(impl_->grid, f)));
}

BoundaryFunction ShiftedSolver::neumann_trace(const BoundaryFunction& f) const {
  return normal_trace(solve(f).values, f, impl_->grid);
}

ComplexField solve_direct(const ShiftedProblem& p) {
  return ShiftedSolver(p.grid, p.q, p.lambda, p.spectrum).solve(p.f);
}

Eigen::VectorXcd series_coefficients(const BoundarySpectralData& bsd,
                                     const BoundaryFunction& f, Complex lambda, int K) {
  if (K < 0 || K > bsd.size()) throw InvalidArgument("series truncation exceeds available pairs");
  const auto lambdas = bsd.lambdas();
  check_resonance(lambda, std::span<const double>(lambdas.data(), K));
  Eigen::VectorXcd c(K);
  for (int n = 0; n < K; ++n)
    c[n] = boundary_inner(f, bsd[n].psi, bsd.grid()) / (lambda - bsd[n].lambda);
  return c;
}

ComplexField solve_series(const BoundarySpectralData& bsd, const BoundaryFunction& f,
                          Complex lambda, int K) {
  if (!bsd.has_interior())
    throw InvalidArgument("solve_series needs interior eigenfunctions");
  Eigen::VectorXcd c = series_coefficients(bsd, f, lambda, K);
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(bsd.grid().interior_size());
  for (int n = 0; n < K; ++n) u += c[n] * bsd[n].phi.cast<Complex>();
  return ComplexField(bsd.grid(), std::move(u));
}

std::vector<double> decay_profile(const Grid& grid, const Potential& q,
                                  const BoundaryFunction& f,
                                  const std::vector<double>& lambdas) {
  std::vector<double> out;
  for (double lambda : lambdas) {
    if (!(lambda < -(1 + q.sup_bound())))
      throw InvalidArgument("decay_profile needs lambda < -(1+M)");
    out.push_back(field_norm(solve_direct({grid, q, lambda, f, {}}), grid));
  }
  return out;
}

BoundaryFunction neumann_difference(const BoundarySpectralData& bsd, const BoundaryFunction& f,
                                    Complex lambda, Complex mu, int K) {
  if (K < 0) K = bsd.size();
  if (K > bsd.size()) throw InvalidArgument("truncation exceeds available pairs");
  const auto lambdas = bsd.lambdas();
  std::span<const double> spec(lambdas.data(), K);
  check_resonance(lambda, spec);
  check_resonance(mu, spec);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(bsd.grid().boundary_size());
  for (int n = 0; n < K; ++n) {
    const Complex a = (mu - lambda) * boundary_inner(f, bsd[n].psi, bsd.grid()) /
                      ((lambda - bsd[n].lambda) * (mu - bsd[n].lambda));
    out += a * bsd[n].psi.values();
  }
  return BoundaryFunction(bsd.grid(), std::move(out));
}

std::vector<double> potential_dimming(const Grid& grid, const Potential& q1,
                                      const Potential& q2, const BoundaryFunction& f,
                                      const std::vector<double>& lambdas) {
  const double M = std::max(q1.sup_bound(), q2.sup_bound());
  std::vector<double> out;
  for (double lambda : lambdas) {
    if (!(lambda < -(1 + M))) throw InvalidArgument("potential_dimming needs lambda < -(1+M)");
    BoundaryFunction d1 = ShiftedSolver(grid, q1, lambda).neumann_trace(f);
    BoundaryFunction d2 = ShiftedSolver(grid, q2, lambda).neumann_trace(f);
    out.push_back(boundary_norm(BoundaryFunction(grid, d1.values() - d2.values()), grid));
  }
  return out;
}

}  // namespace blab
