#include <doctest.h>

#include <cmath>
#include <string>

#include "blab/error.hpp"
#include "blab/stability.hpp"
#include "fixtures.hpp"

using namespace blab;
using namespace blab::testing;

namespace {

BoundarySpectralData rotate_cluster(const BoundarySpectralData& b, int first, double angle) {
  auto pairs = b.pairs();
  const double c = std::cos(angle), s = std::sin(angle);
  auto& p1 = pairs[first];
  auto& p2 = pairs[first + 1];
  Eigen::VectorXcd a = c * p1.psi.values() + s * p2.psi.values();
  Eigen::VectorXcd d = -s * p1.psi.values() + c * p2.psi.values();
  Eigen::VectorXd fa = c * p1.phi + s * p2.phi, fd = -s * p1.phi + c * p2.phi;
  p1.psi = BoundaryFunction(b.grid(), a);
  p2.psi = BoundaryFunction(b.grid(), d);
  p1.phi = fa;
  p2.phi = fd;
  return BoundarySpectralData(b.grid(), b.sup_bound(), pairs);
}

}  // namespace

TEST_SUITE("stability") {

TEST_CASE("discrepancy: equal potentials give zeros") {
  Grid g = build_grid(1, 1, 16, 16);
  auto q = bump(g, 0.4, 1);
  auto b = eigenpairs(assemble(g, q), 20);
  auto r = discrepancy(b, b, q, q);
  for (int n = 0; n < 20; ++n) {
    CHECK(r.delta[n] == 0.0);
    CHECK(r.eps[n] == 0.0);
  }
  CHECK(r.l2_diff == 0.0);
}

TEST_CASE("discrepancy: constant shift moves eigenvalues only") {
  Grid g = build_grid(1, 1, 16, 16);
  auto q1 = bump(g, 0.4, 2);
  Potential q2(g, (q1.values().array() + 0.75).matrix(), 2);
  auto r = discrepancy(eigenpairs(assemble(g, q1), 24), eigenpairs(assemble(g, q2), 24), q1, q2);
  for (int n = 0; n < 24; ++n) {
    CHECK(r.delta[n] == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(r.eps[n] <= 1e-7);  // roundoff of two separate eigensolves, |psi| ~ 10-100
  }
  CHECK(r.l2_diff == doctest::Approx(0.75 * 16.0 / 17.0).epsilon(1e-12));
}

TEST_CASE("discrepancy: bump perturbation obeys min-max and monotonicity") {
  Grid g = build_grid(1, 1, 20, 20);
  auto q1 = constant_potential(g, 0, 1);
  auto q2 = bump(g, 0.1, 1);
  auto r = discrepancy(eigenpairs(assemble(g, q1), 30), eigenpairs(assemble(g, q2), 30), q1, q2);
  CHECK(r.delta[0] <= 0.1);
  CHECK(r.delta[0] <= (q1.values() - q2.values()).cwiseAbs().maxCoeff() + 1e-8);
  for (int n = 1; n < 30; ++n) {
    CHECK(r.delta[n] <= r.delta[n - 1]);
    CHECK(r.eps[n] <= r.eps[n - 1]);
  }
  CHECK(r.eps[0] > 0);
  CHECK(r.note.find("30") != std::string::npos);
}

TEST_CASE("align_clusters undoes a rotation inside a double eigenvalue") {
  Grid g = build_grid(1, 1, 16, 16);
  auto b = eigenpairs(assemble(g, constant_potential(g, 0, 0)), 6);
  auto cl = b.clusters();
  REQUIRE(cl[1].size == 2);
  auto rotated = rotate_cluster(b, 1, 0.7);
  // flip a singleton too
  rotated.pairs()[0].psi = BoundaryFunction(g, -rotated[0].psi.values());
  rotated.pairs()[0].phi = -rotated[0].phi;
  auto back = align_clusters(b, rotated);
  for (int n = 0; n < 6; ++n) {
    CHECK((back[n].psi.values() - b[n].psi.values()).norm() <= 1e-10 * b[n].psi.values().norm());
    CHECK((back[n].phi - b[n].phi).norm() <= 1e-10);
  }
}

TEST_CASE("align_clusters names a cluster it cannot align") {
  Grid g = build_grid(1, 1, 16, 16);
  auto b = eigenpairs(assemble(g, constant_potential(g, 0, 0)), 6);
  auto broken = b;
  broken.pairs()[1].psi = BoundaryFunction(g);
  broken.pairs()[2].psi = BoundaryFunction(g);
  try {
    align_clusters(b, broken);
    FAIL("expected an alignment error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("n = 2..3") != std::string::npos);
  }
}

TEST_CASE("joint clusters merge splits from either side") {
  Grid g = build_grid(1, 1, 12, 12);
  auto a = eigenpairs(assemble(g, constant_potential(g, 0, 0)), 8);
  auto b = eigenpairs(assemble(g, sample_potential([](double x, double) { return x; }, g, 1)), 8);
  auto j = joint_clusters(a, b);
  int covered = 0;
  for (auto& c : j) covered += c.size;
  CHECK(covered == 8);
  CHECK(j[1].first == 1);
  CHECK(j[1].size == 2);
}

TEST_CASE("boundary equality check") {
  Grid g = build_grid(1, 1, 24, 24);
  auto q1 = constant_potential(g, 0, 1);
  CHECK_NOTHROW(check_boundary_equality(g, q1, bump(g, 0.3, 1)));
  CHECK_THROWS_AS(check_boundary_equality(g, q1, constant_potential(g, 0.3, 1)), InvalidArgument);
  CHECK_NOTHROW(check_boundary_equality(g, q1, q1));
}

TEST_CASE("hoelder_experiment on scaled bumps") {
  Grid g = build_grid(1, 1, 24, 24);
  auto q1 = constant_potential(g, 0, 1);
  std::vector<Potential> family;
  const std::vector<double> eps{0.02, 0.05, 0.1, 0.2};
  for (double e : eps) family.push_back(bump(g, e, 1));
  family.push_back(q1);
  auto r = hoelder_experiment(g, q1, family, 40);
  REQUIRE(r.rows.size() == 5);
  const double unit = r.rows[0].l2_diff / eps[0];
  for (size_t m = 0; m < eps.size(); ++m) {
    CHECK(r.rows[m].l2_diff == doctest::Approx(unit * eps[m]).epsilon(1e-12));
    CHECK_FALSE(r.rows[m].skipped);
    CHECK(r.rows[m].h1_ok);
  }
  CHECK(r.rows[4].skipped);
  CHECK(r.spread <= 5);
  // First-order perturbation: delta is linear in epsilon, so l2 ~ delta.
  CHECK(r.slope == doctest::Approx(1).epsilon(0.05));
  for (size_t m = 0; m < eps.size(); ++m)
    CHECK(r.rows[m].l2_diff <= two_regime_bound(r.constant, 1, r.rows[m].delta) * (1 + 1e-12));

  auto bad = family;
  bad.push_back(constant_potential(g, 0.2, 1));
  CHECK_THROWS_AS(hoelder_experiment(g, q1, bad, 40), InvalidArgument);
  auto flagged = hoelder_experiment(g, q1, {bump(g, 0.2, 1)}, 10, 0.1);
  CHECK_FALSE(flagged.rows[0].h1_ok);
}

TEST_CASE("h1 proxy of a bump") {
  // ||b||_inf + (||b||^2 + ||grad b||^2)^{1/2} -> 1 + (1/4 + pi^2/2)^{1/2} for b = sin sin
  Grid g = build_grid(1, 1, 200, 200);
  auto b = bump(g, 1, 1);
  CHECK(h1_proxy(g, b) == doctest::Approx(1 + std::sqrt(0.25 + pi * pi / 2)).epsilon(0.01));
}

TEST_CASE("Plancherel and band split") {
  Grid g = build_grid(1, 1, 20, 30);
  Eigen::VectorXd v(g.interior_size());
  for (int k = 0; k < v.size(); ++k) v[k] = std::sin(0.37 * k) + 0.1 * (k % 7);
  auto p = plancherel(g, v);
  CHECK(p.rel_gap <= 1e-12);
  for (double R : {0.0, 5.0, 20.0, 100.0, 1e9}) {
    auto b = band_split(g, v, R);
    CHECK(std::abs(b.inner + b.outer - b.total) <= 1e-10 * b.total);
    CHECK(b.total == doctest::Approx(p.spatial).epsilon(1e-12));
  }
  CHECK(band_split(g, v, 1e9).outer == 0.0);
  // Zero frequency alone carries (sum v)^2 hx hy / (Nx Ny).
  const double dc = std::pow(v.sum(), 2) * g.cell_area() / (40.0 * 60.0);
  CHECK(band_split(g, v, 0).inner == doctest::Approx(dc).epsilon(1e-12));
}

}
