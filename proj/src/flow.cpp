#include "yamabe/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "yamabe/laplacian.hpp"

namespace yamabe {

void FlowConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("flow: dt must be positive");
  if (!(T >= 0.0) || (T > 0.0 && T < dt * (1.0 - 1e-12)))
    throw std::invalid_argument("flow: T must be 0 or at least dt");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("flow: newton_tol must be positive");
  if (newton_max < 1) throw std::invalid_argument("flow: newton_max must be >= 1");
  if (!(positivity_floor > 0.0)) throw std::invalid_argument("flow: positivity_floor must be positive");
  if (!(C >= 1.0)) throw std::invalid_argument("flow: barrier constant C must be >= 1");
  if (stride < 1) throw std::invalid_argument("flow: stride must be >= 1");
}

FlowStepper::FlowStepper(const ManifoldModel& model, const FlowConfig& config, double u_outer)
    : model_(model), config_(config), u_outer_(u_outer) {
  m_ = (model.n - 2.0) / (model.n + 2.0);
  const RadialLaplacian lap(model);
  const int N = model.grid.N();
  const double cn = model.cn();
  sub_.assign(N, 0.0);
  diag_.assign(N, 0.0);
  super_.assign(N, 0.0);
  for (int i = 0; i < N; ++i) {
    sub_[i] = -cn * lap.lower(i);
    super_[i] = -cn * lap.upper(i);
    diag_[i] = cn * (lap.lower(i) + lap.upper(i)) + model.R0[i];
  }
}

double FlowStepper::apply_L(const std::vector<double>& u, int i) const {
  double acc = diag_[i] * u[i] + super_[i] * u[i + 1];
  if (i > 0) acc += sub_[i] * u[i - 1];
  return acc;
}

FlowStepper::Attempt FlowStepper::newton(const std::vector<double>& Uk, double dt) const {
  const int N = model_.grid.N();
  const bool pme = config_.form == FlowForm::pme;
  const double p = 1.0 / m_;

  // Unknown x is U (pme) or u (conformal); y = u in both cases.
  std::vector<double> x(N + 1);
  for (int i = 0; i <= N; ++i) x[i] = pme ? Uk[i] : std::pow(Uk[i], m_);
  const double x_out = pme ? std::pow(u_outer_, p) : u_outer_;
  x[N] = x_out;

  std::vector<double> y(N + 1), F(N + 1);
  auto residual = [&](const std::vector<double>& xs) {
    for (int i = 0; i <= N; ++i) y[i] = pme ? std::pow(xs[i], m_) : xs[i];
    double worst = 0.0;
    for (int i = 0; i < N; ++i) {
      const double mass = pme ? xs[i] : std::pow(xs[i], p);
      double flux_scale = std::abs(diag_[i] * y[i]) + std::abs(super_[i] * y[i + 1]);
      if (i > 0) flux_scale += std::abs(sub_[i] * y[i - 1]);
      F[i] = mass - Uk[i] + dt * apply_L(y, i);
      worst = std::max(worst, std::abs(F[i]) / (std::abs(Uk[i]) + std::abs(mass) + dt * flux_scale));
    }
    F[N] = xs[N] - x_out;
    worst = std::max(worst, std::abs(F[N]) / (1.0 + x_out));
    return worst;
  };

  Attempt out;
  TridiagonalOperator J;
  J.sub.assign(N + 1, 0.0);
  J.diag.assign(N + 1, 0.0);
  J.super.assign(N + 1, 0.0);
  J.diag[N] = 1.0;
  std::vector<double> rhs(N + 1), trial(N + 1);

  double norm = residual(x);
  for (int it = 0; it <= config_.newton_max; ++it) {
    if (!std::isfinite(norm)) break;
    if (norm <= config_.newton_tol) {
      out.ok = true;
      out.x = std::move(x);
      out.iterations = it;
      out.residual = norm;
      return out;
    }
    if (it == config_.newton_max) break;
    for (int i = 0; i < N; ++i) {
      if (pme) {
        auto dy = [&](int j) { return m_ * std::pow(x[j], m_ - 1.0); };
        J.diag[i] = 1.0 + dt * diag_[i] * dy(i);
        J.super[i] = dt * super_[i] * dy(i + 1);
        J.sub[i] = i > 0 ? dt * sub_[i] * dy(i - 1) : 0.0;
      } else {
        J.diag[i] = p * std::pow(x[i], p - 1.0) + dt * diag_[i];
        J.super[i] = dt * super_[i];
        J.sub[i] = i > 0 ? dt * sub_[i] : 0.0;
      }
    }
    for (int i = 0; i <= N; ++i) rhs[i] = -F[i];
    const auto delta = thomas_solve(J, rhs);

    double lambda = 1.0;
    double trial_norm = norm;
    bool accepted = false;
    for (int halving = 0; halving <= 8; ++halving, lambda *= 0.5) {
      bool positive = true;
      for (int i = 0; i <= N; ++i) {
        trial[i] = x[i] + lambda * delta[i];
        if (!(trial[i] > 0.0)) positive = false;
      }
      if (!positive) continue;
      trial_norm = residual(trial);
      if (trial_norm < norm || halving == 8) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    x.swap(trial);
    norm = residual(x);
  }
  out.ok = false;
  out.residual = norm;
  return out;
}

void FlowStepper::check_floor(const GridFunction& u, double t) const {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] >= config_.positivity_floor)) {
      std::ostringstream msg;
      msg << "flow: positivity floor breached at node " << i << " (r = " << model_.grid.r(static_cast<int>(i))
          << ", t = " << t << ", u = " << u[i] << ")";
      throw NumericalError(msg.str());
    }
  }
}

FlowState FlowStepper::step(const FlowState& state, double dt, NewtonStats* stats) const {
  const int N = model_.grid.N();
  if (state.u.size() != model_.grid.size()) throw std::invalid_argument("flow: state size mismatch");
  check_floor(state.u, state.t);
  const double p = 1.0 / m_;
  std::vector<double> Uk(N + 1);
  for (int i = 0; i <= N; ++i) Uk[i] = std::pow(state.u[i], p);

  auto to_state = [&](const Attempt& a, double t, double h) {
    FlowState s;
    s.t = t;
    s.dt_last = h;
    s.newton_iters = a.iterations;
    s.step_residual = a.residual;
    s.u = GridFunction(a.x);
    if (config_.form == FlowForm::pme)
      for (auto& v : s.u) v = std::pow(v, m_);
    return s;
  };

  FlowState next;
  auto a = newton(Uk, dt);
  if (a.ok) {
    next = to_state(a, state.t + dt, dt);
  } else {
    if (stats) ++stats->dt_halvings;
    auto half = newton(Uk, 0.5 * dt);
    if (!half.ok)
      throw NumericalError("flow: Newton did not converge at t = " + std::to_string(state.t) +
                           " (residual " + std::to_string(a.residual) + "), also with dt/2");
    std::vector<double> Umid = half.x;
    if (config_.form == FlowForm::conformal)
      for (auto& v : Umid) v = std::pow(v, p);
    auto second = newton(Umid, 0.5 * dt);
    if (!second.ok)
      throw NumericalError("flow: Newton did not converge at t = " + std::to_string(state.t) +
                           " with dt/2 (second half step)");
    second.iterations += half.iterations;
    second.residual = std::max(second.residual, half.residual);
    next = to_state(second, state.t + dt, 0.5 * dt);
  }
  check_floor(next.u, next.t);
  if (stats) {
    ++stats->steps;
    stats->total_iterations += next.newton_iters;
    stats->max_iterations = std::max(stats->max_iterations, next.newton_iters);
    stats->max_residual = std::max(stats->max_residual, next.step_residual);
  }
  return next;
}

FlowState step_flow(const FlowState& state, const ManifoldModel& model, const FlowConfig& config) {
  config.validate();
  if (state.u.size() != model.grid.size()) throw std::invalid_argument("flow: state size mismatch");
  const FlowStepper stepper(model, config, state.u[model.grid.N()]);
  return stepper.step(state, config.dt);
}

FlowTrajectory run_flow(const ManifoldModel& model, const GridFunction& u0, const FlowConfig& config) {
  config.validate();
  if (u0.size() != model.grid.size()) throw std::invalid_argument("flow: u0 size mismatch");
  if (!(u0.min() > 0.0)) throw std::invalid_argument("flow: u0 must be positive");

  FlowTrajectory traj;
  traj.model = model;
  traj.config = config;
  FlowState state;
  state.u = u0;
  traj.states.push_back(state);
  traj.step_times.push_back(0.0);
  traj.pole_values.push_back(u0[0]);
  if (config.T == 0.0) return traj;

  const FlowStepper stepper(traj.model, config, u0[model.grid.N()]);
  const long steps = static_cast<long>(std::ceil(config.T / config.dt - 1e-9));
  for (long k = 1; k <= steps; ++k) {
    const double t_next = (k == steps) ? config.T : k * config.dt;
    const double dt = t_next - state.t;
    state = stepper.step(state, dt, &traj.stats);
    state.t = t_next;
    traj.step_times.push_back(state.t);
    traj.pole_values.push_back(state.u[0]);
    if (k % config.stride == 0 || k == steps) traj.states.push_back(state);
  }
  return traj;
}

ClassACCheck check_class_AC(const GridFunction& u, const GridFunction& v_barrier, double C, double slack) {
  if (u.size() != v_barrier.size()) throw std::invalid_argument("class A_C: size mismatch");
  ClassACCheck out;
  out.margin = INFINITY;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double margin = C * v_barrier[i] - std::abs(u[i] - 1.0);
    if (margin < out.margin) {
      out.margin = margin;
      out.worst_node = static_cast<int>(i);
    }
  }
  out.inside = out.margin >= -slack;
  return out;
}

BarrierReport verify_barriers(const FlowTrajectory& trajectory, const GridFunction& v_barrier, double C,
                              double slack) {
  BarrierReport rep;
  rep.passed = true;
  for (const auto& s : trajectory.states) {
    const auto chk = check_class_AC(s.u, v_barrier, C, slack);
    rep.times.push_back(s.t);
    rep.margins.push_back(chk.margin);
    if (!chk.inside && rep.passed) {
      rep.passed = false;
      rep.first_breach_time = s.t;
      rep.first_breach_node = chk.worst_node;
    }
  }
  return rep;
}

FineBounds check_fine_bounds(const FlowTrajectory& trajectory) {
  if (trajectory.states.empty()) throw std::invalid_argument("fine bounds: empty trajectory");
  const double e = 4.0 / (trajectory.model.n - 2.0);
  double lo = INFINITY, hi = 0.0;
  for (const auto& s : trajectory.states) {
    lo = std::min(lo, s.u.min());
    hi = std::max(hi, s.u.max());
  }
  FineBounds b;
  b.C1 = std::pow(lo, e);
  b.C2 = std::pow(hi, e);
  b.fine = b.C1 > 0.0 && std::isfinite(b.C2) && b.C1 <= b.C2;
  return b;
}

ConvergenceReport convergence_to_yamabe(const FlowTrajectory& trajectory, const GridFunction& w_star) {
  const auto& grid = trajectory.model.grid;
  if (w_star.size() != grid.size()) throw std::invalid_argument("convergence: w* size mismatch");
  const int last = static_cast<int>(std::floor(0.8 * grid.N()));
  ConvergenceReport rep;
  for (const auto& s : trajectory.states) {
    rep.times.push_back(s.t);
    rep.d.push_back((s.u - w_star).sup_abs(0, last));
  }
  rep.terminal = rep.d.back();
  const std::size_t start = rep.d.size() / 2;
  rep.eventually_decreasing = rep.d.size() >= 2;
  for (std::size_t k = std::max<std::size_t>(start, 1); k < rep.d.size(); ++k)
    if (rep.d[k] > rep.d[k - 1] + 1e-14) rep.eventually_decreasing = false;
  return rep;
}

}  // namespace yamabe
