#pragma once

#include <optional>
#include <string>
#include <vector>

#include "yamabe/geometry.hpp"
#include "yamabe/grid.hpp"
#include "yamabe/laplacian.hpp"

namespace yamabe {

/// Solves L u = rhs on the ball [0, R], u(R) = boundary_value. The returned
/// function covers the whole grid and equals boundary_value beyond R.
GridFunction solve_dirichlet_ball(const ManifoldModel& model, const GridFunction& rhs, double R,
                                  double boundary_value);

struct ExhaustionResult {
  std::vector<double> radii;
  std::vector<GridFunction> stages;
  std::vector<double> sup_changes;  // sup over the innermost ball, stage k vs k-1
  GridFunction limit;
  bool converged = false;
  int converged_stage = -1;
  double residual = 0.0;      // row-scaled residual of the limit's solve
  double residual_abs = 0.0;  // sup |L u - rhs| over the limit ball's interior
};

/// Doubling schedule {R_min * 2^k} up to R_max.
std::vector<double> doubling_schedule(double R_min, double R_max);

/// Zero-boundary Dirichlet solves on growing balls. Throws NumericalError on
/// a non-monotone stage; an exhausted schedule is reported (converged=false).
ExhaustionResult exhaust_poisson(const ManifoldModel& model, const GridFunction& rhs,
                                 const std::vector<double>& radii, double tol);

struct PropertyMResult {
  GridFunction v;
  ExhaustionResult exhaustion;
  bool trivial = false;        // R0 ≡ 0, so v ≡ 0
  bool decay_ok = false;       // outer-window values below delta
  double decay_delta = 0.0;
  double outer_window_max = 0.0;
  std::string note;
};

/// Poisson solution v of L v = R0 decaying at infinity, via exhaustion.
PropertyMResult property_m_solution(const ManifoldModel& model, const std::vector<double>& radii,
                                    double tol, double delta_fraction = 0.05);

/// w = 1 - v, with w > 0 and L w ≈ 0 asserted.
struct ZeroMetricResult {
  GridFunction w;
  double min_w = 0.0;
  double residual_sup = 0.0;  // sup |L w| over interior nodes
  double outer_value = 0.0;
};
ZeroMetricResult yamabe_zero_metric_M(const ManifoldModel& model, const GridFunction& v,
                                      double residual_tol = 1e-8);

struct PropertyHResult {
  bool condition1 = false;  // L φ >= -1e-12
  bool condition2 = false;  // u∞/φ <= θ_bound on the outer window
  bool below_supersolution = true;
  bool w_positive = false;
  bool metric_emitted = false;
  double theta = 0.0;
  double min_L_phi = 0.0;
  GridFunction f_rhs;
  GridFunction u_inf;
  GridFunction w;  // empty unless metric_emitted
  ExhaustionResult exhaustion;
};

PropertyHResult property_h_construction(const ManifoldModel& model, const GridFunction& phi,
                                        double theta_bound, const std::vector<double>& radii,
                                        double tol,
                                        const std::optional<GridFunction>& supersolution = {});

/// R(g) = u^{-(n+2)/(n-2)} L u at nodes 0..N-1 (entry N is 0).
GridFunction scalar_curvature_of_conformal(const ManifoldModel& model, const GridFunction& u);

/// Uniqueness probe: limits with the schedule and with its midpoint-refined
/// version agree within 10*tol.
struct UniquenessReport {
  double difference = 0.0;
  bool agrees = false;
};
UniquenessReport property_m_uniqueness(const ManifoldModel& model, const std::vector<double>& radii,
                                       double tol);

}  // namespace yamabe
