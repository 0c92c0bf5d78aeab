#pragma once

#include <vector>

#include "yamabe/geometry.hpp"
#include "yamabe/grid.hpp"

namespace yamabe {

/// Which unknown the implicit step is solved for. Both discretize
///   ∂t U = -L(U^m),  U = u^{(n+2)/(n-2)},  m = (n-2)/(n+2)
/// with the same implicit Euler scheme and agree to Newton tolerance.
enum class FlowForm {
  pme,        // Newton on U:  U + dt L(U^m) = U_k
  conformal,  // Newton on u:  u^p + dt L u = U_k,  p = (n+2)/(n-2)
};

struct FlowConfig {
  double dt = 0.01;
  double T = 1.0;
  double newton_tol = 1e-12;
  int newton_max = 50;
  double positivity_floor = 1e-8;
  double C = 1.0;  // barrier constant of the class A_C
  int stride = 10;
  FlowForm form = FlowForm::pme;

  void validate() const;
};

struct FlowState {
  double t = 0.0;
  GridFunction u;
  double dt_last = 0.0;
  int newton_iters = 0;
  double step_residual = 0.0;
};

struct NewtonStats {
  int steps = 0;
  int total_iterations = 0;
  int max_iterations = 0;
  int dt_halvings = 0;
  double max_residual = 0.0;
};

struct FlowTrajectory {
  ManifoldModel model;
  FlowConfig config;
  std::vector<FlowState> states;  // sampled every `stride` steps, plus the final state
  std::vector<double> step_times;   // every accepted step, starting at t = 0
  std::vector<double> pole_values;  // u(t, 0) at step_times
  NewtonStats stats;

  const FlowState& final_state() const { return states.back(); }
};

/// Implicit Euler stepper with the outer node frozen at u_outer.
class FlowStepper {
 public:
  FlowStepper(const ManifoldModel& model, const FlowConfig& config, double u_outer);

  /// One step of size dt from `state`. On Newton failure the step is retried
  /// as two half steps; a second failure throws NumericalError.
  FlowState step(const FlowState& state, double dt, NewtonStats* stats = nullptr) const;

  /// (L u)_i on rows 0..N-1.
  double apply_L(const std::vector<double>& u, int i) const;

 private:
  struct Attempt {
    bool ok = false;
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;
  };
  Attempt newton(const std::vector<double>& Uk, double dt) const;
  void check_floor(const GridFunction& u, double t) const;

  const ManifoldModel& model_;
  FlowConfig config_;
  double u_outer_;
  double m_;
  std::vector<double> sub_, diag_, super_;  // L on rows 0..N-1
};

/// One step of size config.dt; the outer node keeps its value.
FlowState step_flow(const FlowState& state, const ManifoldModel& model, const FlowConfig& config);

/// Iterates to T (the last step is shortened if T is not a multiple of dt).
FlowTrajectory run_flow(const ManifoldModel& model, const GridFunction& u0, const FlowConfig& config);

struct ClassACCheck {
  bool inside = false;
  double margin = 0.0;  // min_x (C v - |u - 1|)
  int worst_node = -1;
};
ClassACCheck check_class_AC(const GridFunction& u, const GridFunction& v_barrier, double C,
                            double slack = 1e-10);

struct BarrierReport {
  bool passed = false;
  std::vector<double> times;
  std::vector<double> margins;
  double first_breach_time = -1.0;
  int first_breach_node = -1;
};
BarrierReport verify_barriers(const FlowTrajectory& trajectory, const GridFunction& v_barrier,
                              double C, double slack = 1e-8);

struct FineBounds {
  double C1 = 0.0;  // inf u^{4/(n-2)}
  double C2 = 0.0;  // sup u^{4/(n-2)}
  bool fine = false;
};
FineBounds check_fine_bounds(const FlowTrajectory& trajectory);

struct ConvergenceReport {
  std::vector<double> times;
  std::vector<double> d;  // sup over r <= 0.8 R of |u(t) - w*|
  bool eventually_decreasing = false;  // over the second half of the samples
  double terminal = 0.0;
};
ConvergenceReport convergence_to_yamabe(const FlowTrajectory& trajectory, const GridFunction& w_star);

}  // namespace yamabe
