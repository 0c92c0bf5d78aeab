#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "yamabe/elliptic.hpp"

using namespace yamabe;

namespace {

ManifoldModel profile(ProfileFamily family, int n, double h, int N) {
  ProfileSpec s;
  s.family = family;
  s.n = n;
  s.h = h;
  s.N = N;
  return build_profile(s);
}

ManifoldModel gaussian_coefficient(double h, int N, int n = 3) {
  ProfileSpec s;
  s.n = n;
  s.h = h;
  s.N = N;
  s.mode = ModelMode::coefficient;
  s.coefficient_r0 = [](double r) { return std::exp(-r * r); };
  return build_profile(s);
}

double gauss(double r) { return std::exp(-r * r); }

std::vector<double> gaussian_oracle(double R, double h) {
  return oracle::shoot_radial(
      3, [](double r) { return r; }, [](double) { return 1.0; }, gauss, gauss, R, h, 0.0);
}

}  // namespace

TEST_CASE("conformal Laplacian is exact on r^2 in flat space") {
  for (int n : {3, 4, 5, 8}) {
    const auto m = profile(ProfileFamily::euclidean, n, 0.01, 100);
    const auto u = GridFunction::sample(m.grid, [](double r) { return r * r; });
    const auto Lu = apply_conformal_laplacian(m, u);
    for (int i = 0; i < 100; ++i) CHECK(std::abs(Lu[i] + m.cn() * 2.0 * n) <= 1e-8);
  }
  const auto m3 = profile(ProfileFamily::euclidean, 3, 0.01, 100);
  const auto Lu = apply_conformal_laplacian(m3, GridFunction::sample(m3.grid, [](double r) { return r * r; }));
  CHECK(std::abs(Lu[50] + 48.0) <= 1e-8);
}

TEST_CASE("constants map to R0 exactly") {
  ProfileSpec s;
  s.family = ProfileFamily::sphere_cap;
  s.h = 0.01;
  s.N = 300;
  const auto m = build_profile(s);
  const auto Lu = apply_conformal_laplacian(m, GridFunction(m.grid.size(), 1.0));
  for (int i = 0; i < 300; ++i) CHECK(Lu[i] == m.R0[i]);
}

TEST_CASE("sphere cap: L cos r converges at second order") {
  // Δ cos r = -cos r - 2 cot r sin r = -3 cos r, so L cos r = 24 cos r + 6 cos r.
  double prev = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double h = 0.02 / (1 << k);
    const int N = static_cast<int>(std::lround(1.5 / h));
    const auto m = profile(ProfileFamily::sphere_cap, 3, h, N);
    const auto Lu = apply_conformal_laplacian(m, GridFunction::sample(m.grid, [](double r) { return std::cos(r); }));
    double err = 0.0;
    for (int i = 0; i < N; ++i) err = std::max(err, std::abs(Lu[i] - 30.0 * std::cos(m.grid.r(i))));
    CHECK(err < 1e-2);
    if (k > 0) CHECK(prev / err >= 3.5);
    prev = err;
  }
}

TEST_CASE("assembled operator is an M-matrix in every dimension") {
  for (int n = 3; n <= 9; ++n) {
    for (auto fam : {ProfileFamily::euclidean, ProfileFamily::cylinder, ProfileFamily::sphere_cap}) {
      const auto m = profile(fam, n, 0.01, 300);
      const auto op = assemble_conformal_laplacian(m, 3.0);
      CHECK(op.cn == doctest::Approx(4.0 * (n - 1) / (n - 2)));
      for (int i = 0; i <= op.last(); ++i) {
        CHECK(op.sub[i] <= 0.0);
        CHECK(op.super[i] <= 0.0);
        CHECK(op.diag[i] > 0.0);
      }
    }
  }
  auto m = profile(ProfileFamily::euclidean, 3, 0.1, 100);
  m = with_coefficient_r0(m, GridFunction(m.grid.size(), -5.0));
  CHECK_THROWS_AS(assemble_conformal_laplacian(m, 10.0), NumericalError);
  CHECK_THROWS_AS(assemble_conformal_laplacian(m, 1.05), std::invalid_argument);
}

TEST_CASE("Dirichlet ball solves") {
  SUBCASE("barrier: 0 < u <= 1") {
    const auto m = profile(ProfileFamily::sphere_cap, 3, 0.01, 300);
    const auto u = solve_dirichlet_ball(m, GridFunction(m.grid.size(), 0.0), 2.5, 1.0);
    for (int i = 0; i <= 250; ++i) {
      CHECK(u[i] > 0.0);
      CHECK(u[i] <= 1.0);
    }
  }
  SUBCASE("flat, no source: u = 1") {
    const auto m = profile(ProfileFamily::euclidean, 3, 0.01, 300);
    const auto u = solve_dirichlet_ball(m, GridFunction(m.grid.size(), 0.0), 3.0, 1.0);
    for (double x : u) CHECK(std::abs(x - 1.0) <= 1e-12);
  }
  SUBCASE("gaussian potential vs shooting oracle") {
    const double h = 0.01;
    const auto m = gaussian_coefficient(h, 800);
    const auto u = solve_dirichlet_ball(m, m.R0, 8.0, 0.0);
    const auto ref = gaussian_oracle(8.0, h / 16);
    double err = 0.0;
    for (int i = 0; i <= 800; ++i) err = std::max(err, std::abs(u[i] - ref[16 * i]));
    CHECK(err <= 1e-5);
    // independent high-accuracy value (adaptive DOP853 shooting)
    CHECK(std::abs(ref[0] - 0.0532919716363601) <= 1e-10);
    CHECK(std::abs(u[0] - 0.0532919716363601) <= 1e-5);
  }
  SUBCASE("second-order convergence") {
    const auto ref = gaussian_oracle(8.0, 0.04 / 16 / 4);
    double prev = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double h = 0.04 / (1 << k);
      const int N = static_cast<int>(std::lround(8.0 / h));
      const auto m = gaussian_coefficient(h, N);
      const auto u = solve_dirichlet_ball(m, m.R0, 8.0, 0.0);
      const int stride = 64 >> k;
      double err = 0.0;
      for (int i = 0; i <= N; ++i) err = std::max(err, std::abs(u[i] - ref[stride * i]));
      if (k > 0) CHECK(prev / err >= 3.5);
      prev = err;
    }
  }
}

TEST_CASE("discrete maximum and comparison principles (randomized)") {
  std::mt19937_64 rng(20241016);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3 + trial % 4;
    const auto fam = trial % 2 ? ProfileFamily::cylinder : ProfileFamily::euclidean;
    auto m = profile(fam, n, 0.05, 100);
    GridFunction R0(m.grid.size()), rhs1(m.grid.size()), rhs2(m.grid.size());
    const double scale = 10.0 * unif(rng);
    for (std::size_t i = 0; i < R0.size(); ++i) {
      R0[i] = unif(rng) < 0.3 ? 0.0 : scale * unif(rng);
      rhs1[i] = unif(rng) < 0.5 ? 0.0 : unif(rng);
      rhs2[i] = rhs1[i] + (unif(rng) < 0.5 ? 0.0 : unif(rng));
    }
    m = with_coefficient_r0(m, R0);
    const double b = unif(rng);
    const auto u1 = solve_dirichlet_ball(m, rhs1, 5.0, b);
    const auto u2 = solve_dirichlet_ball(m, rhs2, 5.0, b);
    for (std::size_t i = 0; i < u1.size(); ++i) {
      CHECK(u1[i] >= -1e-12);
      CHECK(u1[i] <= u2[i] + 1e-12);
    }
  }
}

TEST_CASE("exhaustion") {
  SUBCASE("zero source") {
    const auto m = gaussian_coefficient(0.05, 640);
    const auto res = exhaust_poisson(m, GridFunction(m.grid.size(), 0.0), {4, 8, 16, 32}, 1e-6);
    CHECK(res.converged);
    CHECK(res.converged_stage == 1);
    CHECK(res.limit.sup_abs() == 0.0);
  }
  SUBCASE("gaussian potential: monotone, matches oracle") {
    const double h = 0.01;
    const auto m = gaussian_coefficient(h, 3200);
    const auto res = exhaust_poisson(m, m.R0, {4, 8, 16, 32}, 1e-6);
    REQUIRE(res.stages.size() == 4);
    CHECK_FALSE(res.converged);  // 1/r tails: the schedule is exhausted, reported
    for (std::size_t k = 1; k < res.stages.size(); ++k) {
      for (std::size_t i = 0; i < res.limit.size(); ++i) CHECK(res.stages[k - 1][i] <= res.stages[k][i] + 1e-12);
    }
    const auto ref = gaussian_oracle(32.0, h / 16);
    double err = 0.0;
    for (int i = 0; i <= 3200; ++i) err = std::max(err, std::abs(res.limit[i] - ref[16 * i]));
    CHECK(err <= 1e-5);
    CHECK(std::abs(res.limit[0] - 0.0580081437900115) <= 1e-5);
    CHECK(res.residual <= 1e-12);
  }
  SUBCASE("compactly supported source: shrinking stage changes") {
    auto m = profile(ProfileFamily::euclidean, 3, 0.05, 320);
    m = with_coefficient_r0(m, GridFunction::sample(m.grid, [](double r) { return r < 1.0 ? std::pow(std::cos(M_PI * r / 2), 2) : 0.0; }));
    const auto res = exhaust_poisson(m, m.R0, {4, 8, 16}, 1e-12);
    REQUIRE(res.sup_changes.size() == 2);
    CHECK(res.sup_changes[1] < res.sup_changes[0]);
  }
  SUBCASE("errors") {
    const auto m = gaussian_coefficient(0.05, 320);
    CHECK_THROWS_AS(exhaust_poisson(m, m.R0, {8, 4}, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS(exhaust_poisson(m, m.R0, {4, 32}, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS(exhaust_poisson(m, GridFunction(m.grid.size(), -1.0), {4, 8, 16}, 1e-6), NumericalError);
  }
}

TEST_CASE("property (M) and the zero-scalar-curvature metric") {
  SUBCASE("trivial potential") {
    const auto m = profile(ProfileFamily::euclidean, 3, 0.05, 320);
    const auto pm = property_m_solution(m, {4, 8, 16}, 1e-6);
    CHECK(pm.trivial);
    CHECK(pm.v.sup_abs() == 0.0);
    const auto z = yamabe_zero_metric_M(m, pm.v);
    CHECK(z.min_w == 1.0);
    CHECK(z.residual_sup == 0.0);
  }
  SUBCASE("w = 1 with nonzero R0 is not a zero-curvature metric") {
    const auto m = gaussian_coefficient(0.05, 320);
    CHECK_THROWS_AS(yamabe_zero_metric_M(m, GridFunction(m.grid.size(), 0.0)), NumericalError);
  }
  SUBCASE("gaussian potential") {
    const auto m = gaussian_coefficient(0.01, 3200);
    const auto pm = property_m_solution(m, {4, 8, 16, 32}, 1e-6);
    CHECK_FALSE(pm.trivial);
    CHECK(pm.v.max() <= 1.0);
    CHECK(std::abs(pm.v[0] - 0.0580081437900115) <= 1e-5);
    for (int i = 1; i <= 3200; ++i) CHECK(pm.v[i] <= pm.v[i - 1]);
    CHECK(pm.v[3200] < 1e-2 * pm.v[0]);
    CHECK(pm.decay_ok);
    const auto z = yamabe_zero_metric_M(m, pm.v);
    CHECK(z.min_w > 0.0);
    CHECK(z.residual_sup <= 1e-8);
    CHECK(z.outer_value == 1.0);
    const auto Rg = scalar_curvature_of_conformal(m, z.w);
    CHECK(Rg.sup_abs(0, 3199) <= 1e-6);
  }
  SUBCASE("uniqueness probe") {
    const auto m = gaussian_coefficient(0.05, 640);
    const auto u = property_m_uniqueness(m, {4, 8, 16, 32}, 1e-6);
    CHECK(u.agrees);
  }
}

TEST_CASE("property (H)") {
  const auto m = gaussian_coefficient(0.02, 1600);
  const std::vector<double> radii{4, 8, 16, 32};
  SUBCASE("phi = 1 reduces to property (M)") {
    const auto ph = property_h_construction(m, GridFunction(m.grid.size(), 1.0), 0.5, radii, 1e-6);
    REQUIRE(ph.metric_emitted);
    const auto pm = property_m_solution(m, radii, 1e-6);
    const auto z = yamabe_zero_metric_M(m, pm.v);
    CHECK((ph.w - z.w).sup_abs() <= 1e-10);
  }
  SUBCASE("phi = 1 + exp(-r) violates L phi >= 0 and is flagged") {
    const auto phi = GridFunction::sample(m.grid, [](double r) { return 1.0 + std::exp(-r); });
    const auto ph = property_h_construction(m, phi, 0.5, radii, 1e-6);
    CHECK_FALSE(ph.condition1);
    CHECK_FALSE(ph.metric_emitted);
    CHECK(ph.w.empty());
    CHECK(ph.min_L_phi < 0.0);
  }
  SUBCASE("superharmonic phi = 1 + (1+r^2)^(-1/2)") {
    const auto phi = GridFunction::sample(m.grid, [](double r) { return 1.0 + 1.0 / std::sqrt(1.0 + r * r); });
    const auto ph = property_h_construction(m, phi, 0.5, radii, 1e-6, phi);
    CHECK(ph.condition1);
    CHECK(ph.condition2);
    CHECK(ph.theta < 1.0);
    CHECK(ph.below_supersolution);
    REQUIRE(ph.metric_emitted);
    CHECK(ph.w.min() > 0.0);
    const auto Lw = apply_conformal_laplacian(m, ph.w);
    CHECK(Lw.sup_abs(0, m.grid.N() - 1) <= 1e-8);
  }
  SUBCASE("tight theta bound flags condition (2)") {
    const auto phi = GridFunction::sample(m.grid, [](double r) { return 1.0 + 1.0 / std::sqrt(1.0 + r * r); });
    const auto ph = property_h_construction(m, phi, 1e-6, radii, 1e-6);
    CHECK_FALSE(ph.condition2);
    CHECK_FALSE(ph.metric_emitted);
  }
}

TEST_CASE("scalar curvature of conformal metrics") {
  ProfileSpec s;
  s.family = ProfileFamily::sphere_cap;
  s.h = 0.01;
  s.N = 300;
  const auto m = build_profile(s);
  const auto one = scalar_curvature_of_conformal(m, GridFunction(m.grid.size(), 1.0));
  for (int i = 0; i < 300; ++i) CHECK(one[i] == m.R0[i]);
  const double c = 1.7;
  const auto sc = scalar_curvature_of_conformal(m, GridFunction(m.grid.size(), c));
  for (int i = 0; i < 300; ++i) CHECK(sc[i] == doctest::Approx(std::pow(c, -4.0) * m.R0[i]).epsilon(1e-13));

  // u = 2 + cos r: R(g) = (24 cos r + 6 (2 + cos r)) / u^5
  double prev = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double h = 0.02 / (1 << k);
    const auto mk = profile(ProfileFamily::sphere_cap, 3, h, static_cast<int>(std::lround(3.0 / h)));
    const auto u = GridFunction::sample(mk.grid, [](double r) { return 2.0 + std::cos(r); });
    const auto R = scalar_curvature_of_conformal(mk, u);
    double err = 0.0;
    for (int i = 0; i < mk.grid.N(); ++i) {
      const double r = mk.grid.r(i);
      err = std::max(err, std::abs(R[i] - (24 * std::cos(r) + 6 * (2 + std::cos(r))) / std::pow(2 + std::cos(r), 5)));
    }
    if (k > 0) CHECK(prev / err >= 3.5);
    prev = err;
  }
  CHECK_THROWS_AS(scalar_curvature_of_conformal(m, GridFunction(m.grid.size(), 0.0)), NumericalError);
}
