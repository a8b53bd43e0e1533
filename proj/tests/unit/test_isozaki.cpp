#include <doctest.h>

#include <cmath>

#include "blab/error.hpp"
#include "blab/isozaki.hpp"
#include "fixtures.hpp"

using namespace blab;
using namespace blab::testing;

namespace {

const Complex I(0, 1);

double quadrature_sin_integral(int m) {
  // midpoint rule for int_0^1 sin(pi t) dt
  double s = 0;
  for (int k = 0; k < m; ++k) s += std::sin(pi * (k + 0.5) / m);
  return s / m;
}

BoundarySpectralData full_bsd(const Grid& g, const Potential& q) {
  return eigenpairs(assemble(g, q), g.interior_size());
}

}  // namespace

TEST_SUITE("isozaki") {

TEST_CASE("make_probe: closed forms and construction") {
  Grid g = build_grid(1, 1, 32, 32);
  // tau = 2 with |xi| = 1 sits on the excluded endpoint tau = |xi| + 1.
  CHECK_THROWS_AS(make_probe(Vec2(1, 0), 2, g), InvalidArgument);
  auto p = make_probe(Vec2(1, 0), 2.5, g);
  CHECK(p.beta == doctest::Approx(std::sqrt(24.0) / 5).epsilon(1e-15));
  CHECK(p.eta.dot(p.xi) == 0.0);
  CHECK(p.eta == Vec2(0, 1));
  auto p2 = make_probe(Vec2(0.5, 0), 2, g);
  CHECK(p2.lambda_plus == Complex(3, 4));
  CHECK(p2.lambda_minus == Complex(3, -4));

  auto p0 = make_probe(Vec2(0, 0), 5, g);
  CHECK(p0.eta == Vec2(1, 0));
  CHECK(p0.beta == 1.0);

  CHECK_THROWS_AS(make_probe(Vec2(3, 4), 6, g), InvalidArgument);
  CHECK_THROWS_AS(make_probe(Vec2(0, 0), 1, g), InvalidArgument);
}

TEST_CASE("make_probe: invariants over a sweep") {
  Grid g = build_grid(1, 1, 48, 48);
  for (Vec2 xi : {Vec2(0, 0), Vec2(2 * pi, 0), Vec2(-2 * pi, 4 * pi), Vec2(1.3, -0.7)})
    for (double tau : {xi.norm() + 1.5, xi.norm() + 8, xi.norm() + 20}) {
      auto p = make_probe(xi, tau, g);
      CHECK(std::abs(p.eta_plus.norm() - 1) <= 1e-12);
      CHECK(std::abs(p.eta_minus.norm() - 1) <= 1e-12);
      CHECK(p.lambda_plus.imag() == 2 * tau);
      CHECK(std::abs(grid_symbol(g, p.k_plus) - p.lambda_plus) <= 1e-10 * std::norm(p.lambda_plus));
      CHECK(std::abs(grid_symbol(g, p.k_minus) - p.lambda_minus) <= 1e-10 * std::norm(p.lambda_plus));
      double worst = 0, worst_grid = 0, over = 0;
      for (int k = 0; k < g.boundary_size(); ++k) {
        const auto& b = g.boundary()[k];
        const Complex target = std::exp(-I * ((tau + I) / tau) * xi.dot(Vec2(b.x, b.y)));
        worst = std::max(worst, std::abs(p.f_plus[k] * std::conj(p.f_minus[k]) - target));
        worst_grid = std::max(worst_grid, std::abs(p.g_plus[k] * std::conj(p.g_minus[k]) - target));
        const double r = std::hypot(b.x, b.y);
        over = std::max({over, std::abs(p.f_plus[k]) - std::exp(r), std::abs(p.f_minus[k]) - std::exp(r)});
      }
      CHECK(worst <= 1e-10);
      CHECK(worst_grid <= 1e-10);
      CHECK(over <= 1e-12);
      for (double l : discrete_dirichlet_eigenvalues(g, 40))
        CHECK(std::abs(p.lambda_plus - l) >= 2 * tau);
    }
}

TEST_CASE("grid waves approach the continuum waves as h shrinks") {
  double prev = 0;
  for (int n : {32, 64, 128}) {
    Grid g = build_grid(1, 1, n, n);
    auto p = make_probe(Vec2(2 * pi, 2 * pi), 20, g);
    Eigen::Vector2cd kc = (20.0 + I) * p.eta_plus.cast<Complex>();
    double d = (p.k_plus - kc).norm();
    if (prev > 0) CHECK(prev / d == doctest::Approx(4).epsilon(0.05));
    prev = d;
  }
}

TEST_CASE("c_star and resolution limit") {
  Grid g = build_grid(1, 1, 64, 64);
  CHECK(c_star(g) == doctest::Approx(17.231257752585076).epsilon(1e-14));
  CHECK(resolution_limit(g) == doctest::Approx(pi * 65 / 4).epsilon(1e-14));
  Grid r = build_grid(2, 1, 63, 31);
  CHECK(resolution_limit(r) == doctest::Approx(pi / (4 * (1.0 / 32))).epsilon(1e-14));
}

TEST_CASE("tau_schedule: geometric, capped, no degenerate last step") {
  Grid g = build_grid(1, 1, 64, 64);
  auto s = tau_schedule(0, 40, g);
  const std::vector<double> expect{5.0, 6.5, 8.450000000000001, 10.985000000000001,
                                   14.280500000000002, 18.564650000000004, 24.134045000000008,
                                   31.37425850000001, 40.0};
  REQUIRE(s.size() == expect.size());
  for (size_t k = 0; k < s.size(); ++k) CHECK(s[k] == doctest::Approx(expect[k]).epsilon(1e-14));

  auto s2 = tau_schedule(2 * pi, 40, g);
  CHECK(s2.front() == doctest::Approx(2 * pi + 2));
  CHECK(s2.back() == 40.0);
  CHECK(s2.back() / s2[s2.size() - 2] >= std::sqrt(1.3));

  Grid coarse = build_grid(1, 1, 16, 16);
  CHECK(tau_schedule(0, 40, coarse).back() == doctest::Approx(resolution_limit(coarse)));
  CHECK_THROWS_AS(tau_schedule(30, 40, coarse), InvalidArgument);
}

TEST_CASE("fourier_estimate refuses an under-resolved schedule") {
  Grid g = build_grid(1, 1, 16, 16);
  auto q = constant_potential(g, 0, 1);
  CHECK_THROWS_AS(fourier_estimate(g, q, q, Vec2(0, 0), {5, 10, 20}), InvalidArgument);
  CHECK_THROWS_AS(fourier_estimate(g, q, q, Vec2(0, 0), {5}), InvalidArgument);
  CHECK_THROWS_AS(fourier_estimate(g, q, q, Vec2(0, 0), {6, 5}), InvalidArgument);
}

TEST_CASE("s_tau: equal potentials cancel") {
  Grid g = build_grid(1, 1, 32, 32);
  auto q = bump(g, 0.7, 1);
  for (double tau : {5.0, 12.0, 25.0}) {
    auto s = s_tau(g, q, q, make_probe(Vec2(2 * pi, 0), tau + 2 * pi, g));
    CHECK(s.s == s.s1 - s.s2);
    CHECK(std::abs(s.s) <= 1e-10);
  }
}

TEST_CASE("dn_pairing_direct is second order under refinement") {
  std::vector<Complex> v;
  for (int n : {16, 32, 64}) {
    Grid g = build_grid(1, 1, n, n);
    auto q = bump(g, 1, 1);
    v.push_back(dn_pairing_direct(g, q, make_probe(Vec2(0, 0), 5, g)));
  }
  const double r = std::abs(v[1] - v[0]) / std::abs(v[2] - v[1]);
  CHECK(r == doctest::Approx(4).epsilon(0.15));
  // Bounded by the c* scale.
  CHECK(std::abs(v[2]) <= std::pow(17.24, 2) * 3);
}

TEST_CASE("fourier_estimate: constant and bump differences") {
  Grid g = build_grid(1, 1, 64, 64);
  auto q0 = constant_potential(g, 0, 1), q1 = constant_potential(g, 1, 1);
  auto sched = tau_schedule(0, 40, g);
  auto one = fourier_estimate(g, q1, q0, Vec2(0, 0), sched);
  CHECK(std::abs(one.value - 1.0) <= 0.01);
  // S_tau itself tends to 1.
  CHECK(std::abs(one.samples.back().s - 1.0) < std::abs(one.samples.front().s - 1.0));

  auto full_period = fourier_estimate(g, q1, q0, Vec2(2 * pi, 0), tau_schedule(2 * pi, 40, g));
  CHECK(std::abs(full_period.value) <= 0.01);

  const double per_axis = quadrature_sin_integral(4096);
  CHECK(per_axis == doctest::Approx(2 / pi).epsilon(1e-7));
  auto qb = bump(g, 1, 1);
  auto fb = fourier_estimate(g, qb, q0, Vec2(0, 0), sched);
  CHECK(std::abs(fb.value - per_axis * per_axis) <= 0.01 * per_axis * per_axis);
}

TEST_CASE("fourier_estimate: conjugate symmetry holds up to the 1/tau remainder") {
  Grid g = build_grid(1, 1, 128, 128);
  auto q0 = constant_potential(g, 0, 1);
  auto qb = bump(g, 1, 1);
  const Vec2 xi(2 * pi, 2 * pi);
  auto sched = tau_schedule(xi.norm(), 40, g);
  auto a = fourier_estimate(g, qb, q0, xi, sched);
  auto b = fourier_estimate(g, qb, q0, -xi, sched);
  // int_0^1 sin(pi t) e^{-2 pi i t} dt = -2/(3 pi) on each axis.
  const double exact = std::pow(2 / (3 * pi), 2);
  CHECK(std::abs(a.value - exact) <= 0.05 * exact);
  CHECK(std::abs(a.value - std::conj(b.value)) <= 0.01);
  CHECK(std::abs(a.value.real() - b.value.real()) <= 0.01 * exact);
}

TEST_CASE("spectral pairing matches the direct pairing with a full basis") {
  Grid g = build_grid(1, 1, 14, 14);
  auto q = bump(g, 2, 2);
  auto bsd = full_bsd(g, q);
  auto p = make_probe(Vec2(2 * pi, 0), 9, g);
  const double mu = -1e4 * 3;
  ShiftedSolver at_mu(g, q, mu);
  auto ref = green_flux(at_mu, p);
  const Complex direct = dn_pairing_direct(g, q, p);
  const Complex full = dn_pairing_spectral(bsd, p, mu, ref);
  CHECK(std::abs(full - direct) <= 1e-9 * std::abs(direct));

  double prev = INFINITY;
  for (int K : {24, 48, 96, 196}) {
    double err = std::abs(dn_pairing_spectral(bsd, p, mu, ref, K) - direct);
    CHECK(err <= prev);
    prev = err;
  }
  CHECK_THROWS_AS(dn_pairing_spectral(bsd, p, -2.0, ref), InvalidArgument);
}

TEST_CASE("spectral S_tau agrees with the direct difference at full basis") {
  // The only gap is the mu -> -infinity reference term, which keeps the
  // half-cell (h/2) sum w (q1 - q2) g_plus conj(g_minus) on the first interior row.
  for (int n : {10, 20}) {
    Grid g = build_grid(1, 1, n, n);
    auto q1 = bump(g, 1, 1);
    auto q2 = constant_potential(g, 0, 1);
    auto b1 = full_bsd(g, q1), b2 = full_bsd(g, q2);
    for (double tau : {6.0, 10.0}) {
      auto p = make_probe(Vec2(0, 0), tau, g);
      double half_cell = 0;
      for (int k = 0; k < g.boundary_size(); ++k) {
        const int adj = g.inward_neighbor(k, 1);
        half_cell += g.normal_spacing(k) / 2 * g.boundary()[k].weight *
                     std::abs((q1[adj] - q2[adj]) * p.g_plus[k] * std::conj(p.g_minus[k]));
      }
      const Complex direct = s_tau(g, q1, q2, p).s;
      CHECK(std::abs(spectral_s_tau(b1, b2, p) - direct) <= 1.1 * half_cell);
    }
  }
}

TEST_CASE("incomplete_data_term: empty sum, identical data, finite-term bound") {
  Grid g = build_grid(1, 1, 16, 16);
  auto q1 = bump(g, 1, 1), q2 = constant_potential(g, 0, 1);
  auto b1 = eigenpairs(assemble(g, q1), 10), b2 = eigenpairs(assemble(g, q2), 10);
  auto p = make_probe(Vec2(2 * pi, 0), 12, g);
  CHECK(incomplete_data_term(b1, b2, p, 1) == Complex(0));
  CHECK(incomplete_data_term(b1, b1, p, 8) == Complex(0));
  const double cs = c_star(g);
  for (int N : {2, 4, 8, 11}) {
    double mass = 0;
    for (int n = 0; n < N - 1; ++n)
      mass += std::pow(boundary_norm(b1[n].psi, g), 2) + std::pow(boundary_norm(b2[n].psi, g), 2);
    CHECK(std::abs(incomplete_data_term(b1, b2, p, N)) <= cs * cs * mass / (2 * p.tau));
  }
  CHECK_THROWS_AS(incomplete_data_term(b1, b2, p, 12), InvalidArgument);
}

TEST_CASE("tail terms split the spectral summand exactly") {
  Grid g = build_grid(1, 1, 16, 16);
  auto q1 = bump(g, 1, 1), q2 = bump(g, 0.6, 1);
  auto b1 = eigenpairs(assemble(g, q1), 30), b2 = eigenpairs(assemble(g, q2), 30);
  auto p = make_probe(Vec2(0, 2 * pi), 15, g);
  auto t = tail_terms(b1, b2, p, 5);
  REQUIRE(t.a.size() == 26);
  for (int n = 4; n < 30; ++n) {
    const Complex summand = zeta(p, b1[n].psi, b1[n].psi, g) / (p.lambda_plus - b1[n].lambda) -
                            zeta(p, b2[n].psi, b2[n].psi, g) / (p.lambda_plus - b2[n].lambda);
    CHECK(std::abs(t.a[n - 4] + t.b[n - 4] - summand) <= 1e-12 * (1 + std::abs(summand)));
  }
  auto sums = tail_functionals(b1, b2, p, 1);
  CHECK(std::abs(sums.sum_a + sums.sum_b - spectral_s_tau(b1, b2, p)) <= 1e-12);

  auto same = tail_functionals(b1, b1, p, 1);
  CHECK(same.sum_a == Complex(0));
  CHECK(same.sum_b == Complex(0));
}

TEST_CASE("resolvent bounds on the constant potential") {
  Grid g = build_grid(1, 1, 64, 64);
  auto q = constant_potential(g, 1, 1);
  const double cs = c_star(g), M = 1;
  for (double tau : tau_schedule(0, 40, g)) {
    auto p = make_probe(Vec2(0, 0), tau, g);
    auto u = ShiftedSolver(g, q, p.lambda_plus).solve(p.g_plus);
    CHECK(interior_norm(Eigen::VectorXcd(u.values - p.g_plus_interior), g) <= M * cs / (2 * tau));
    CHECK(interior_norm(u.values, g) <= (M + 2) * cs / 2 * 1.1);
  }
}

TEST_CASE("reconstruct_difference: equal potentials and lattice") {
  Grid g = build_grid(1, 1, 32, 32);
  auto q = bump(g, 1, 1);
  auto lat = xi_lattice(g, 4 * pi);
  CHECK(lat.size() == 13);
  auto r = reconstruct_difference(g, q, q, 4 * pi, 20);
  CHECK(r.field.norm() == 0.0);
  CHECK(r.imag_residual == 0.0);
  CHECK_FALSE(r.warning);
}

TEST_CASE("reconstruct_difference: smooth bump at moderate resolution") {
  Grid g = build_grid(1, 1, 64, 64);
  auto q1 = bump(g, 0.5, 1), q2 = constant_potential(g, 0, 1);
  auto r = reconstruct_difference(g, q1, q2, 8 * pi, 40);
  const double err = (r.field - q1.values()).norm() / q1.values().norm();
  CHECK(err <= 0.1);
  CHECK(r.spectrum.size() == 49);
}

TEST_CASE("fourier_synthesis inverts a single mode") {
  Grid g = build_grid(1, 1, 10, 10);
  std::vector<LatticeValue> spec{{Vec2(2 * pi, 0), Complex(0.5, 0)}, {Vec2(-2 * pi, 0), Complex(0.5, 0)}};
  auto f = fourier_synthesis(g, spec);
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 10; ++i)
      CHECK(std::abs(f[g.index(i, j)] - std::cos(2 * pi * g.x(i))) <= 1e-13);
}

}
