#include "yamabe/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace yamabe {

namespace {

GridFunction solve_on_ball(const ManifoldModel& model, const RadialLaplacian& lap,
                           const GridFunction& rhs, int M, double boundary_value,
                           double* scaled_res = nullptr) {
  const auto op = assemble_conformal_laplacian(model, lap, M);
  std::vector<double> b(M + 1);
  for (int i = 0; i < M; ++i) b[i] = rhs[i];
  b[M] = boundary_value;
  const auto x = thomas_solve(op, b);
  const double res = scaled_residual(op, x, b);
  const double bound = 1e-12 * (rhs.sup_abs(0, M - 1) + 1.0);
  if (!(res <= bound))
    throw NumericalError("Dirichlet solve residual " + std::to_string(res) + " exceeds " +
                         std::to_string(bound));
  if (scaled_res) *scaled_res = res;
  GridFunction u(model.grid.size(), boundary_value);
  for (int i = 0; i <= M; ++i) u[i] = x[i];
  return u;
}

double interior_residual(const ManifoldModel& model, const RadialLaplacian& lap,
                         const GridFunction& u, const GridFunction& rhs, int M) {
  const double cn = model.cn();
  double worst = 0.0;
  for (int i = 0; i < M; ++i) {
    const double Lu = -cn * lap.apply_at(u, i) + model.R0[i] * u[i];
    worst = std::max(worst, std::abs(Lu - rhs[i]));
  }
  return worst;
}

// Node range of the outer 10% window of [0, R].
std::pair<int, int> outer_window(const RadialGrid& grid, double R) {
  const int M = grid.index_of(R);
  const int first = static_cast<int>(std::ceil(0.9 * R / grid.h() - 1e-9));
  return {std::min(first, M), M};
}

}  // namespace

GridFunction solve_dirichlet_ball(const ManifoldModel& model, const GridFunction& rhs, double R,
                                  double boundary_value) {
  if (rhs.size() != model.grid.size()) throw std::invalid_argument("rhs must live on the model grid");
  const RadialLaplacian lap(model);
  return solve_on_ball(model, lap, rhs, model.grid.index_of(R), boundary_value);
}

std::vector<double> doubling_schedule(double R_min, double R_max) {
  if (!(R_min > 0.0) || R_min > R_max) throw std::invalid_argument("bad doubling schedule bounds");
  std::vector<double> radii;
  for (double R = R_min; R <= R_max * (1.0 + 1e-12); R *= 2.0) radii.push_back(R);
  return radii;
}

ExhaustionResult exhaust_poisson(const ManifoldModel& model, const GridFunction& rhs,
                                 const std::vector<double>& radii, double tol) {
  if (radii.empty()) throw std::invalid_argument("exhaustion schedule is empty");
  for (std::size_t k = 1; k < radii.size(); ++k) {
    if (!(radii[k] > radii[k - 1])) throw std::invalid_argument("exhaustion radii must increase");
  }
  if (radii.back() > model.grid.extent() * (1.0 + 1e-12))
    throw std::invalid_argument("exhaustion radius exceeds the grid extent");

  const RadialLaplacian lap(model);
  ExhaustionResult res;
  const int inner = model.grid.index_of(radii.front());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const int M = model.grid.index_of(radii[k]);
    double scaled = 0.0;
    auto u = solve_on_ball(model, lap, rhs, M, 0.0, &scaled);
    if (k > 0) {
      const auto& prev = res.stages.back();
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (prev[i] > u[i] + 1e-12)
          throw NumericalError("exhaustion stages not monotone at r = " +
                               std::to_string(model.grid.r(static_cast<int>(i))) + " (R = " +
                               std::to_string(radii[k]) + ")");
      }
      double change = 0.0;
      for (int i = 0; i <= inner; ++i) change = std::max(change, std::abs(u[i] - prev[i]));
      res.sup_changes.push_back(change);
    }
    res.radii.push_back(radii[k]);
    res.residual = scaled;
    res.residual_abs = interior_residual(model, lap, u, rhs, M);
    res.stages.push_back(std::move(u));
    if (k > 0 && res.sup_changes.back() < tol) {
      res.converged = true;
      res.converged_stage = static_cast<int>(k);
      break;
    }
  }
  res.limit = res.stages.back();
  return res;
}

PropertyMResult property_m_solution(const ManifoldModel& model, const std::vector<double>& radii,
                                    double tol, double delta_fraction) {
  PropertyMResult out;
  out.exhaustion = exhaust_poisson(model, model.R0, radii, tol);
  out.v = out.exhaustion.limit;
  const double R = out.exhaustion.radii.back();
  const int M = model.grid.index_of(R);
  if (model.R0.sup_abs() == 0.0) {
    out.trivial = true;
    out.decay_ok = true;
    out.note = "R0 vanishes identically: v = 0 (trivial)";
    return out;
  }
  const double vmax = out.v.max();
  if (vmax > 1.0 + 1e-10)
    throw NumericalError("Poisson solution exceeds 1 (sup v = " + std::to_string(vmax) +
                         "); the maximum principle is violated");
  for (int i = 0; i < M; ++i) {
    if (!(out.v[i] > 0.0)) {
      out.note = "v not positive at r = " + std::to_string(model.grid.r(i));
      break;
    }
  }
  const auto [first, last] = outer_window(model.grid, R);
  for (int i = first; i <= last; ++i) out.outer_window_max = std::max(out.outer_window_max, out.v[i]);
  out.decay_delta = delta_fraction * vmax;
  out.decay_ok = out.outer_window_max < out.decay_delta;
  if (!out.decay_ok && out.note.empty()) out.note = "property (M) not numerically confirmed";
  return out;
}

ZeroMetricResult yamabe_zero_metric_M(const ManifoldModel& model, const GridFunction& v,
                                      double residual_tol) {
  ZeroMetricResult out;
  out.w = GridFunction(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.w[i] = 1.0 - v[i];
  out.min_w = out.w.min();
  if (!(out.min_w > 0.0))
    throw NumericalError("w = 1 - v is not positive (min " + std::to_string(out.min_w) + ")");
  const RadialLaplacian lap(model);
  const GridFunction zero(v.size(), 0.0);
  out.residual_sup = interior_residual(model, lap, out.w, zero, model.grid.N());
  out.outer_value = out.w[model.grid.N()];
  if (!(out.residual_sup <= residual_tol))
    throw NumericalError("L w residual " + std::to_string(out.residual_sup) + " exceeds tolerance");
  return out;
}

PropertyHResult property_h_construction(const ManifoldModel& model, const GridFunction& phi,
                                        double theta_bound, const std::vector<double>& radii,
                                        double tol, const std::optional<GridFunction>& supersolution) {
  if (!(theta_bound > 0.0 && theta_bound < 1.0)) throw std::invalid_argument("theta must be in (0,1)");
  if (phi.size() != model.grid.size() || !(phi.min() > 0.0))
    throw std::invalid_argument("phi must be positive on the grid");
  PropertyHResult out;
  out.f_rhs = apply_conformal_laplacian(model, phi);
  const int N = model.grid.N();
  out.min_L_phi = *std::min_element(out.f_rhs.begin(), out.f_rhs.begin() + N);
  out.condition1 = out.min_L_phi >= -1e-12;
  if (!out.condition1) return out;

  out.exhaustion = exhaust_poisson(model, out.f_rhs, radii, tol);
  out.u_inf = out.exhaustion.limit;
  const double R = out.exhaustion.radii.back();
  const int M = model.grid.index_of(R);
  if (supersolution) {
    for (int i = 0; i <= M; ++i) {
      if (out.u_inf[i] > (*supersolution)[i] + 1e-10) out.below_supersolution = false;
    }
  }
  const auto [first, last] = outer_window(model.grid, R);
  for (int i = first; i <= last; ++i) out.theta = std::max(out.theta, out.u_inf[i] / phi[i]);
  out.condition2 = out.theta <= theta_bound;

  GridFunction w(phi.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = phi[i] - out.u_inf[i];
  out.w_positive = true;
  for (int i = 0; i <= M; ++i) out.w_positive = out.w_positive && w[i] > 0.0;
  out.metric_emitted = out.condition1 && out.condition2 && out.below_supersolution && out.w_positive;
  if (out.metric_emitted) out.w = std::move(w);
  return out;
}

GridFunction scalar_curvature_of_conformal(const ManifoldModel& model, const GridFunction& u) {
  if (!(u.min() > 0.0)) throw NumericalError("conformal factor must be positive");
  const auto Lu = apply_conformal_laplacian(model, u);
  const double p = (model.n + 2.0) / (model.n - 2.0);
  GridFunction R(u.size());
  for (int i = 0; i < model.grid.N(); ++i) R[i] = std::pow(u[i], -p) * Lu[i];
  return R;
}

UniquenessReport property_m_uniqueness(const ManifoldModel& model, const std::vector<double>& radii,
                                       double tol) {
  std::vector<double> refined;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (k > 0) {
      const double mid = model.grid.h() * std::round(0.5 * (radii[k - 1] + radii[k]) / model.grid.h());
      if (mid > radii[k - 1] && mid < radii[k]) refined.push_back(mid);
    }
    refined.push_back(radii[k]);
  }
  const auto a = exhaust_poisson(model, model.R0, radii, tol);
  const auto b = exhaust_poisson(model, model.R0, refined, tol);
  UniquenessReport rep;
  rep.difference = (a.limit - b.limit).sup_abs();
  rep.agrees = rep.difference <= 10.0 * tol;
  return rep;
}

}  // namespace yamabe
