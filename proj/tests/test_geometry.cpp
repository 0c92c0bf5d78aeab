#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "yamabe/geometry.hpp"

using namespace yamabe;

namespace {

ProfileSpec spec(ProfileFamily family, int n, double h, int N) {
  ProfileSpec s;
  s.family = family;
  s.n = n;
  s.h = h;
  s.N = N;
  return s;
}

double sech2(double r) {
  const double s = 1.0 / std::cosh(r);
  return s * s;
}

}  // namespace

TEST_CASE("euclidean profile is exactly flat") {
  const auto m = build_profile(spec(ProfileFamily::euclidean, 3, 0.01, 1000));
  for (int i = 0; i <= 1000; ++i) {
    CHECK(m.f[i] == m.grid.r(i));
    CHECK(m.fp[i] == 1.0);
  }
  const auto c = curvature_data(m);
  CHECK(c.K.sup_abs() == 0.0);
  CHECK(c.K1.sup_abs() == 0.0);
  CHECK(c.R0.sup_abs() == 0.0);
  CHECK(m.R0.sup_abs() == 0.0);
}

TEST_CASE("sphere cap curvatures") {
  const auto m = build_profile(spec(ProfileFamily::sphere_cap, 3, 0.01, 300));
  CHECK(m.f[100] == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  const auto c = curvature_data(m);
  for (int i = 0; i <= 300; ++i) {
    CHECK(std::abs(c.K[i] - 1.0) <= 1e-6);
    CHECK(std::abs(c.K1[i] - 1.0) <= 1e-6);
    CHECK(std::abs(c.R0[i] - 6.0) <= 1e-6);
  }
  CHECK(std::abs(c.K1[100] - 1.0) <= 1e-12);
}

TEST_CASE("cylinder (tanh) curvatures against closed forms") {
  const auto m = build_profile(spec(ProfileFamily::cylinder, 3, 0.01, 1000));
  const auto c = curvature_data(m);
  double prev = 1e300;
  for (int i = 0; i <= 1000; ++i) {
    const double r = m.grid.r(i);
    CHECK(std::abs(c.K[i] - 2.0 * sech2(r)) <= 1e-6);
    // (1 - sech^4)/tanh^2 = 1 + sech^2
    const double K1 = 1.0 + sech2(r);
    CHECK(std::abs(c.K1[i] - K1) <= 1e-6);
    CHECK(c.K1[i] <= prev + 1e-12);
    prev = c.K1[i];
  }
  CHECK(std::abs(c.K1[1000] - 1.0) <= 1e-4);
  const double R0_closed = 2 * 2 * 2 * sech2(10.0) + 2 * 1 * (1.0 + sech2(10.0));
  CHECK(std::abs(c.R0[1000] - R0_closed) <= 1e-5);
}

TEST_CASE("from_curvature reproduces tanh and round-trips K") {
  auto s = spec(ProfileFamily::from_curvature, 3, 0.01, 1000);
  s.curvature = [](double r) { return 2.0 * sech2(r); };
  const auto m = build_profile(s);
  double err = 0.0;
  for (int i = 0; i <= 1000; ++i) err = std::max(err, std::abs(m.f[i] - std::tanh(m.grid.r(i))));
  CHECK(err <= 1e-8);

  const auto K = radial_curvature(m);
  double kerr = 0.0;
  for (int i = 0; i <= 1000 - 5; ++i) kerr = std::max(kerr, std::abs(K[i] - s.curvature(m.grid.r(i))));
  CHECK(kerr <= 1e-6);

  // compactly supported smooth K
  auto s2 = spec(ProfileFamily::from_curvature, 4, 0.01, 800);
  s2.curvature = [](double r) { return r < 2.0 ? 0.3 * std::pow(std::sin(std::numbers::pi * r / 2.0), 4) : 0.0; };
  const auto m2 = build_profile(s2);
  const auto K2 = radial_curvature(m2);
  kerr = 0.0;
  for (int i = 0; i <= 800 - 5; ++i) kerr = std::max(kerr, std::abs(K2[i] - s2.curvature(m2.grid.r(i))));
  CHECK(kerr <= 1e-6);
}

TEST_CASE("scalar curvature identity holds pointwise") {
  for (auto fam : {ProfileFamily::euclidean, ProfileFamily::sphere_cap, ProfileFamily::cylinder}) {
    for (int n : {3, 4, 5, 7}) {
      const auto m = build_profile(spec(fam, n, 0.01, 300));
      const auto c = curvature_data(m);
      for (std::size_t i = 0; i < c.K.size(); ++i) {
        CHECK(std::abs(c.R0[i] - (2.0 * (n - 1) * c.K[i] + (n - 1.0) * (n - 2.0) * c.K1[i])) <= 1e-10);
        CHECK(std::abs(c.Rc_radial[i] - (n - 1.0) * c.K[i]) <= 1e-12);
        CHECK(std::abs(c.Rc_tangential[i] - (c.K[i] + (n - 2.0) * c.K1[i])) <= 1e-12);
      }
    }
  }
}

TEST_CASE("pole regularization: K1(0) = K(0)") {
  const auto m = build_profile(spec(ProfileFamily::cylinder, 5, 0.01, 400));
  CHECK(tangent_curvature(m)[0] == radial_curvature(m)[0]);
  CHECK(std::abs(radial_curvature(m)[0] - 2.0) <= 1e-8);
}

TEST_CASE("profile validation errors") {
  CHECK_THROWS_AS(build_profile(spec(ProfileFamily::euclidean, 3, 0.1, 7)), std::invalid_argument);
  CHECK_THROWS_AS(build_profile(spec(ProfileFamily::euclidean, 2, 0.1, 20)), std::invalid_argument);
  CHECK_THROWS_AS(build_profile(spec(ProfileFamily::sphere_cap, 3, 0.01, 400)), std::invalid_argument);

  auto t = spec(ProfileFamily::tabulated, 3, 0.05, 20);
  RadialGrid g(0.05, 20);
  t.table_f = GridFunction::sample(g, [](double r) { return r + 0.01; });
  CHECK_THROWS_AS(build_profile(t), std::invalid_argument);  // f(0) != 0
  t.table_f = GridFunction::sample(g, [](double r) { return 2.0 * r; });
  CHECK_THROWS_AS(build_profile(t), std::invalid_argument);  // f'(0) != 1
  t.table_f = GridFunction::sample(g, [](double r) { return std::sin(r) * (r < 0.55 ? 1.0 : -1.0); });
  CHECK_THROWS_AS(build_profile(t), std::invalid_argument);  // f <= 0 inside
  t.table_f = GridFunction::sample(g, [](double r) { return std::sin(r); });
  CHECK_NOTHROW(build_profile(t));

  auto c = spec(ProfileFamily::euclidean, 3, 0.1, 20);
  c.mode = ModelMode::coefficient;
  CHECK_THROWS_AS(build_profile(c), std::invalid_argument);
  c.coefficient_r0 = [](double r) { return -std::exp(-r * r); };
  CHECK_NOTHROW(build_profile(c));
  c.require_nonnegative_r0 = true;
  CHECK_THROWS_AS(build_profile(c), std::invalid_argument);
}

TEST_CASE("unit sphere areas") {
  CHECK(sphere_area(3) == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-14));
  CHECK(sphere_area(4) == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("ball volumes") {
  const auto e3 = build_profile(spec(ProfileFamily::euclidean, 3, 0.01, 1000));
  CHECK(std::abs(volume_of_ball(e3, 1.0) / (4.0 * std::numbers::pi / 3.0) - 1.0) <= 1e-4);
  const auto e4 = build_profile(spec(ProfileFamily::euclidean, 4, 0.01, 1000));
  const double v4 = std::numbers::pi * std::numbers::pi / 2.0 * 16.0;
  CHECK(std::abs(volume_of_ball(e4, 2.0) / v4 - 1.0) <= 1e-4);

  // 4π ∫_0^10 tanh^2 = 4π (10 - tanh 10)
  const auto cyl = build_profile(spec(ProfileFamily::cylinder, 3, 0.01, 1000));
  const double exact = 4.0 * std::numbers::pi * (10.0 - std::tanh(10.0));
  CHECK(std::abs(volume_of_ball(cyl, 10.0) / exact - 1.0) <= 1e-8);

  double prev = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double v = volume_of_ball(cyl, cyl.grid.r(i));
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(volume_of_ball(cyl, 10.5), std::invalid_argument);
  CHECK_THROWS_AS(volume_of_ball(cyl, 0.0), std::invalid_argument);
  CHECK(volume_of_ball(cyl, 2.005) > volume_of_ball(cyl, 2.0));
}

TEST_CASE("ball volume converges at second order") {
  // sphere cap n=3: V(R) = 2π (R - sin(2R)/2)
  const double R = 2.0;
  const double exact = 2.0 * std::numbers::pi * (R - 0.5 * std::sin(2.0 * R));
  double prev_err = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double h = 0.04 / (1 << k);
    const auto m = build_profile(spec(ProfileFamily::sphere_cap, 3, h, static_cast<int>(std::lround(3.0 / h))));
    const double err = std::abs(volume_of_ball(m, R) - exact);
    if (k > 0) CHECK(std::log2(prev_err / err) >= 1.9);
    prev_err = err;
  }
}

TEST_CASE("Bishop comparison") {
  const std::vector<double> radii{0.5, 1.0, 2.0, 2.9};
  const auto e = bishop_check(build_profile(spec(ProfileFamily::euclidean, 3, 0.01, 300)), radii);
  CHECK(e.applicable);
  CHECK(e.passed);
  CHECK(std::abs(e.max_ratio - 1.0) <= 1e-6);

  const auto c = bishop_check(build_profile(spec(ProfileFamily::cylinder, 3, 0.01, 1000)), {1.0, 5.0, 10.0});
  CHECK(c.applicable);
  CHECK(c.passed);
  for (double q : c.ratios) CHECK(q <= 1.0);

  const auto s = bishop_check(build_profile(spec(ProfileFamily::sphere_cap, 3, 0.01, 300)), radii);
  CHECK(s.applicable);
  CHECK(s.passed);

  auto hyp = spec(ProfileFamily::from_curvature, 3, 0.01, 300);
  hyp.curvature = [](double) { return -1.0; };
  const auto b = bishop_check(build_profile(hyp), radii);
  CHECK_FALSE(b.applicable);
  CHECK_FALSE(b.passed);
}
