#include "yamabe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "yamabe/io.hpp"
#include "yamabe/numerics.hpp"

namespace yamabe {

std::string to_string(ModelMode mode) {
  return mode == ModelMode::geometric ? "geometric" : "coefficient";
}

std::string to_string(ProfileFamily family) {
  switch (family) {
    case ProfileFamily::euclidean: return "euclidean";
    case ProfileFamily::sphere_cap: return "sphere_cap";
    case ProfileFamily::cylinder: return "cylinder";
    case ProfileFamily::from_curvature: return "from_curvature";
    case ProfileFamily::tabulated: return "tabulated";
  }
  return "?";
}

ProfileFamily profile_family_from_string(const std::string& name) {
  if (name == "euclidean") return ProfileFamily::euclidean;
  if (name == "sphere_cap") return ProfileFamily::sphere_cap;
  if (name == "cylinder") return ProfileFamily::cylinder;
  if (name == "from_curvature") return ProfileFamily::from_curvature;
  if (name == "tabulated") return ProfileFamily::tabulated;
  throw std::invalid_argument("unknown profile family '" + name + "'");
}

namespace {

void validate_warp(int n, const RadialGrid& grid, const GridFunction& f, const GridFunction& fp) {
  if (n < 3) throw std::invalid_argument("n must be >= 3");
  if (f.size() != grid.size() || fp.size() != grid.size())
    throw std::invalid_argument("warp tables must have N+1 entries");
  if (!f.all_finite() || !fp.all_finite()) throw std::invalid_argument("warp has non-finite entries");
  if (std::abs(f[0]) > 1e-12) throw std::invalid_argument("warp must satisfy f(0) = 0");
  if (std::abs(fp[0] - 1.0) > 1e-12) throw std::invalid_argument("warp must satisfy f'(0) = 1");
  for (int i = 1; i <= grid.N(); ++i) {
    if (!(f[i] > 0.0))
      throw std::invalid_argument("warp must be positive for r > 0 (f <= 0 at r = " +
                                  std::to_string(grid.r(i)) + ")");
  }
}

// f'' = -K f from f(0)=0, f'(0)=1, classical RK4 with substeps per cell.
void integrate_warp(const RadialGrid& grid, const std::function<double(double)>& K,
                    GridFunction& f, GridFunction& fp) {
  constexpr int substeps = 4;
  const double dr = grid.h() / substeps;
  double y = 0.0, yp = 1.0;
  f[0] = y;
  fp[0] = yp;
  for (int i = 0; i < grid.N(); ++i) {
    double r = grid.r(i);
    for (int s = 0; s < substeps; ++s) {
      const double k1y = yp, k1p = -K(r) * y;
      const double k2y = yp + 0.5 * dr * k1p, k2p = -K(r + 0.5 * dr) * (y + 0.5 * dr * k1y);
      const double k3y = yp + 0.5 * dr * k2p, k3p = -K(r + 0.5 * dr) * (y + 0.5 * dr * k2y);
      const double k4y = yp + dr * k3p, k4p = -K(r + dr) * (y + dr * k3y);
      y += dr / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
      yp += dr / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
      r = grid.r(i) + (s + 1) * dr;
    }
    f[i + 1] = y;
    fp[i + 1] = yp;
  }
}

}  // namespace

void validate(const ManifoldModel& model, bool require_nonnegative_r0) {
  validate_warp(model.n, model.grid, model.f, model.fp);
  if (model.R0.size() != model.grid.size() || !model.R0.all_finite())
    throw std::invalid_argument("R0 must be finite with N+1 entries");
  if (model.mode == ModelMode::geometric) {
    const auto R0 = scalar_curvature_background(model);
    for (std::size_t i = 0; i < R0.size(); ++i) {
      if (std::abs(R0[i] - model.R0[i]) > 1e-10)
        throw std::invalid_argument("geometric-mode R0 disagrees with the curvature of f");
    }
  }
  if (require_nonnegative_r0 && model.R0.min() < 0.0)
    throw std::invalid_argument("R0 must be nonnegative for this scenario");
}

ManifoldModel build_profile(const ProfileSpec& spec) {
  ManifoldModel m;
  m.n = spec.n;
  if (spec.n < 3) throw std::invalid_argument("n must be >= 3");
  m.grid = RadialGrid(spec.h, spec.N);
  const auto& grid = m.grid;
  switch (spec.family) {
    case ProfileFamily::euclidean:
      m.f = GridFunction::sample(grid, [](double r) { return r; });
      m.fp = GridFunction(grid.size(), 1.0);
      break;
    case ProfileFamily::sphere_cap:
      if (grid.extent() >= std::numbers::pi)
        throw std::invalid_argument("sphere_cap needs N*h < pi");
      m.f = GridFunction::sample(grid, [](double r) { return std::sin(r); });
      m.fp = GridFunction::sample(grid, [](double r) { return std::cos(r); });
      break;
    case ProfileFamily::cylinder:
      m.f = GridFunction::sample(grid, [](double r) { return std::tanh(r); });
      m.fp = GridFunction::sample(grid, [](double r) {
        const double s = 1.0 / std::cosh(r);
        return s * s;
      });
      break;
    case ProfileFamily::from_curvature:
      if (!spec.curvature) throw std::invalid_argument("from_curvature needs a curvature function");
      m.f = GridFunction(grid.size());
      m.fp = GridFunction(grid.size());
      integrate_warp(grid, spec.curvature, m.f, m.fp);
      break;
    case ProfileFamily::tabulated:
      if (!spec.table_f) throw std::invalid_argument("tabulated profile needs an f table");
      m.f = *spec.table_f;
      if (m.f.size() != grid.size()) throw std::invalid_argument("f table must have N+1 entries");
      if (spec.table_fp) {
        m.fp = *spec.table_fp;
      } else {
        // f'(0) = 1 is imposed once the differenced table agrees with it.
        m.fp = differentiate(m.f, grid.h(), 1, 2, Parity::odd);
        if (std::abs(m.fp[0] - 1.0) > 1e-6) throw std::invalid_argument("warp must satisfy f'(0) = 1");
        m.fp[0] = 1.0;
      }
      break;
  }
  validate_warp(m.n, grid, m.f, m.fp);
  m.mode = spec.mode;
  if (spec.mode == ModelMode::geometric) {
    m.R0 = scalar_curvature_background(m);
  } else if (spec.coefficient_r0_table) {
    m.R0 = *spec.coefficient_r0_table;
  } else if (spec.coefficient_r0) {
    m.R0 = GridFunction::sample(grid, spec.coefficient_r0);
  } else {
    throw std::invalid_argument("coefficient mode needs an R0 function or table");
  }
  validate(m, spec.require_nonnegative_r0);
  return m;
}

ManifoldModel with_coefficient_r0(const ManifoldModel& model, GridFunction R0) {
  ManifoldModel m = model;
  m.mode = ModelMode::coefficient;
  m.R0 = std::move(R0);
  validate(m);
  return m;
}

PoleSeries pole_series(const ManifoldModel& model) {
  // f odd => f' even; f''' = (f')'' etc. Differences of f' about f'(0) are
  // exact zeros on flat profiles.
  const double h = model.grid.h();
  const int p = std::min(5, model.grid.N());
  PoleSeries s;
  s.c3 = derivative_at_pole(model.fp, h, 2, p, Parity::even) / 6.0;
  s.c5 = derivative_at_pole(model.fp, h, 4, p, Parity::even) / 120.0;
  s.c7 = derivative_at_pole(model.fp, h, 6, p, Parity::even) / 5040.0;
  return s;
}

GridFunction radial_curvature(const ManifoldModel& model) {
  const auto fpp = differentiate(model.fp, model.grid.h(), 1, 3, Parity::even);
  GridFunction K(model.grid.size());
  K[0] = -6.0 * pole_series(model).c3;
  for (int i = 1; i <= model.grid.N(); ++i) K[i] = -fpp[i] / model.f[i];
  return K;
}

GridFunction tangent_curvature(const ManifoldModel& model) {
  const auto& grid = model.grid;
  const auto s = pole_series(model);
  GridFunction K1(grid.size());
  const double r_eps = pole_radius(grid);
  for (int i = 0; i <= grid.N(); ++i) {
    const double r = grid.r(i);
    if (r < r_eps - 1e-12 * grid.h()) {
      const double r2 = r * r;
      K1[i] = -6.0 * s.c3 + (3.0 * s.c3 * s.c3 - 10.0 * s.c5) * r2 +
              (2.0 * s.c3 * s.c5 - 14.0 * s.c7) * r2 * r2;
    } else {
      K1[i] = (1.0 - model.fp[i] * model.fp[i]) / (model.f[i] * model.f[i]);
    }
  }
  return K1;
}

GridFunction scalar_curvature_background(const ManifoldModel& model) {
  const auto K = radial_curvature(model);
  const auto K1 = tangent_curvature(model);
  const int n = model.n;
  GridFunction R0(K.size());
  for (std::size_t i = 0; i < K.size(); ++i)
    R0[i] = 2.0 * (n - 1) * K[i] + (n - 1.0) * (n - 2.0) * K1[i];
  return R0;
}

CurvatureData curvature_data(const ManifoldModel& model) {
  CurvatureData c;
  c.K = radial_curvature(model);
  c.K1 = tangent_curvature(model);
  const int n = model.n;
  c.R0 = GridFunction(c.K.size());
  c.Rc_radial = GridFunction(c.K.size());
  c.Rc_tangential = GridFunction(c.K.size());
  for (std::size_t i = 0; i < c.K.size(); ++i) {
    c.R0[i] = 2.0 * (n - 1) * c.K[i] + (n - 1.0) * (n - 2.0) * c.K1[i];
    c.Rc_radial[i] = (n - 1.0) * c.K[i];
    c.Rc_tangential[i] = c.K[i] + (n - 2.0) * c.K1[i];
  }
  return c;
}

double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

namespace {

double trapezoid_ball(const RadialGrid& grid, const std::vector<double>& y, double R) {
  if (!(R > 0.0) || R > grid.extent() * (1.0 + 1e-12))
    throw std::invalid_argument("ball radius " + std::to_string(R) + " outside (0, N*h]");
  const double h = grid.h();
  int j = static_cast<int>(std::floor(R / h + 1e-9));
  j = std::min(j, grid.N());
  double v = trapezoid(y, h, j);
  const double rest = R - grid.r(j);
  if (rest > 1e-12 * h && j < grid.N()) {
    const double yR = y[j] + (y[j + 1] - y[j]) * rest / h;
    v += 0.5 * rest * (y[j] + yR);
  }
  return v;
}

}  // namespace

double volume_of_ball(const ManifoldModel& model, double R) {
  std::vector<double> y(model.grid.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::pow(model.f[i], model.n - 1);
  return sphere_area(model.n) * trapezoid_ball(model.grid, y, R);
}

double ball_integral(const ManifoldModel& model, const GridFunction& g, double R) {
  if (g.size() != model.grid.size()) throw std::invalid_argument("ball integral: size mismatch");
  std::vector<double> y(model.grid.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = g[i] * std::pow(model.f[i], model.n - 1);
  return sphere_area(model.n) * trapezoid_ball(model.grid, y, R);
}

BishopReport bishop_check(const ManifoldModel& model, const std::vector<double>& radii) {
  BishopReport rep;
  const auto c = curvature_data(model);
  rep.applicable = c.Rc_radial.min() >= -1e-10 && c.Rc_tangential.min() >= -1e-10;
  rep.radii = radii;
  std::vector<double> flat(model.grid.size());
  for (int i = 0; i <= model.grid.N(); ++i) flat[i] = std::pow(model.grid.r(i), model.n - 1);
  rep.passed = true;
  for (double R : radii) {
    const double ratio =
        volume_of_ball(model, R) / (sphere_area(model.n) * trapezoid_ball(model.grid, flat, R));
    rep.ratios.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (ratio > 1.0 + 1e-12) rep.passed = false;
  }
  if (!rep.applicable) rep.passed = false;
  return rep;
}

void write_geometry_csv(const std::string& path, const ManifoldModel& model,
                        const CurvatureData& c) {
  CsvWriter csv(path, {"r", "f", "fp", "K", "K1", "R0", "Rc_r", "Rc_t"});
  for (int i = 0; i <= model.grid.N(); ++i) {
    csv.row({model.grid.r(i), model.f[i], model.fp[i], c.K[i], c.K1[i], model.R0[i],
             c.Rc_radial[i], c.Rc_tangential[i]});
  }
}

}  // namespace yamabe
