#include "yamabe/stability.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include "yamabe/io.hpp"
#include "yamabe/laplacian.hpp"
#include "yamabe/numerics.hpp"

namespace yamabe {

PMEParams::PMEParams(int n_) : n(n_) {
  if (n < 3) throw std::invalid_argument("n must be >= 3");
  m = (n - 2.0) / (n + 2.0);
  alpha = (n + 2.0) / 4.0;
  cn = 4.0 * (n - 1) / (n - 2.0);
  if (std::abs((1.0 - m) * alpha - 1.0) > 1e-14)
    throw NumericalError("PME exponents: (1-m) alpha != 1 for n = " + std::to_string(n));
}

Cutoff build_cutoff(const ManifoldModel& model, double R, int k) {
  const PMEParams pme(model.n);
  if (k == 0) k = 2 * static_cast<int>(std::ceil(2.0 * pme.alpha));
  if (!(k > 2.0 * pme.alpha))
    throw std::invalid_argument("cutoff exponent k = " + std::to_string(k) + " must exceed 2 alpha");
  if (!(R > 0.0) || R > model.grid.extent() * (1.0 + 1e-12))
    throw std::invalid_argument("cutoff radius outside the grid");
  Cutoff c;
  c.R = R;
  c.k = k;
  c.psi0 = GridFunction::sample(model.grid, [R](double r) {
    const double s = std::clamp(2.0 * r / R - 1.0, 0.0, 1.0);
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  });
  c.psi = c.psi0;
  for (auto& x : c.psi) x = std::pow(x, k);
  c.lap_psi = RadialLaplacian(model).apply(c.psi);
  return c;
}

double integrate_volume(const ManifoldModel& model, const GridFunction& g) {
  std::vector<double> y(g.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = g[i] * std::pow(model.f[i], model.n - 1);
  return sphere_area(model.n) * trapezoid(y, model.grid.h(), model.grid.N());
}

double stability_constant(const ManifoldModel& model, const Cutoff& cutoff) {
  const PMEParams pme(model.n);
  GridFunction g(cutoff.psi.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (cutoff.psi[i] > 0.0)
      g[i] = std::pow(std::abs(cutoff.lap_psi[i]), pme.alpha) * std::pow(cutoff.psi[i], -pme.alpha * pme.m);
    if (!std::isfinite(g[i]))
      throw NumericalError("C(psi): non-finite integrand at node " + std::to_string(i) +
                           " (cutoff exponent too small)");
  }
  return std::pow(integrate_volume(model, g), 1.0 - pme.m);
}

double l1_functional(const GridFunction& U, const GridFunction& V, const Cutoff& cutoff,
                     const ManifoldModel& model) {
  if (U.size() != V.size() || U.size() != cutoff.psi.size())
    throw std::invalid_argument("l1 functional: size mismatch");
  GridFunction g(U.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::abs(U[i] - V[i]) * cutoff.psi[i];
  return integrate_volume(model, g);
}

GridFunction pme_density(const GridFunction& u, int n) {
  GridFunction U = u;
  const double p = (n + 2.0) / (n - 2.0);
  for (auto& x : U) x = std::pow(x, p);
  return U;
}

namespace {

void require_shared_times(const FlowTrajectory& a, const FlowTrajectory& b) {
  if (a.states.size() != b.states.size()) throw std::invalid_argument("trajectories differ in length");
  for (std::size_t k = 0; k < a.states.size(); ++k)
    if (a.states[k].t != b.states[k].t) throw std::invalid_argument("trajectories differ in sample times");
}

std::pair<FlowTrajectory, FlowTrajectory> run_pair(const ManifoldModel& model, const GridFunction& u0,
                                                   const GridFunction& v0, const FlowConfig& config,
                                                   int threads) {
  if (threads > 1) {
    auto fa = std::async(std::launch::async, [&] { return run_flow(model, u0, config); });
    auto b = run_flow(model, v0, config);
    return {fa.get(), std::move(b)};
  }
  auto a = run_flow(model, u0, config);
  return {std::move(a), run_flow(model, v0, config)};
}

double median(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t k = x.size() / 2;
  return x.size() % 2 ? x[k] : 0.5 * (x[k - 1] + x[k]);
}

}  // namespace

StabilityReport stability_from_trajectories(const FlowTrajectory& a, const FlowTrajectory& b,
                                            const Cutoff& cutoff) {
  require_shared_times(a, b);
  const auto& model = a.model;
  const PMEParams pme(model.n);
  StabilityReport rep;
  rep.C_psi = stability_constant(model, cutoff);
  const double rate = (1.0 - pme.m) * pme.cn * rep.C_psi;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    const double F = l1_functional(pme_density(a.states[k].u, model.n), pme_density(b.states[k].u, model.n),
                                   cutoff, model);
    rep.times.push_back(a.states[k].t);
    rep.F.push_back(F);
    rep.F_pow.push_back(std::pow(F, 1.0 - pme.m));
  }
  for (double t : rep.times) rep.bound_rhs.push_back(rep.F_pow.front() + rate * t);
  for (std::size_t s = 0; s < rep.times.size(); ++s) {
    for (std::size_t t = s + 1; t < rep.times.size(); ++t) {
      const double slack = rep.F_pow[t] - (rep.F_pow[s] + rate * (rep.times[t] - rep.times[s]));
      rep.worst_slack = std::max(rep.worst_slack, slack);
      ++rep.pairs_checked;
    }
  }
  rep.passed = rep.pairs_checked == 0 || rep.worst_slack <= 1e-9;
  return rep;
}

StabilityReport verify_stability_inequality(const ManifoldModel& model, const GridFunction& u0,
                                            const GridFunction& v0, const FlowConfig& config,
                                            const Cutoff& cutoff, int threads) {
  const auto [a, b] = run_pair(model, u0, v0, config, threads);
  return stability_from_trajectories(a, b, cutoff);
}

KatoReport kato_check(const ManifoldModel& model, const GridFunction& a, const GridFunction& b) {
  if (a.size() != model.grid.size() || b.size() != model.grid.size())
    throw std::invalid_argument("kato check: size mismatch");
  const PMEParams pme(model.n);
  const RadialLaplacian lap(model);
  GridFunction d(a.size()), abs_d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = std::pow(a[i], pme.m) - std::pow(b[i], pme.m);
    abs_d[i] = std::abs(d[i]);
  }
  KatoReport rep;
  rep.worst = -INFINITY;
  for (int i = 0; i < model.grid.N(); ++i) {
    const double sign = a[i] > b[i] ? 1.0 : (a[i] < b[i] ? -1.0 : 0.0);
    const double gap = sign * lap.apply_at(d, i) - lap.apply_at(abs_d, i);
    rep.worst = std::max(rep.worst, gap);
    if (gap > 1e-10) ++rep.violations;
    ++rep.nodes_checked;
  }
  return rep;
}

SubharmonicReport subharmonic_difference_check(const ManifoldModel& model, const FlowTrajectory& u,
                                               const FlowTrajectory& v,
                                               const std::vector<double>& test_radii) {
  require_shared_times(u, v);
  const PMEParams pme(model.n);
  const RadialLaplacian lap(model);
  const auto& vol = lap.cell_volumes();
  const std::size_t S = u.states.size();

  // |U - V| and |U^m - V^m| = |u - v| at every sample.
  std::vector<GridFunction> D, W;
  for (std::size_t k = 0; k < S; ++k) {
    const auto Ud = pme_density(u.states[k].u, model.n) - pme_density(v.states[k].u, model.n);
    const auto Wd = u.states[k].u - v.states[k].u;
    GridFunction a(Ud.size()), w(Wd.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = std::abs(Ud[i]);
      w[i] = std::abs(Wd[i]);
    }
    D.push_back(std::move(a));
    W.push_back(std::move(w));
  }

  SubharmonicReport rep;
  for (double Rt : test_radii) {
    if (Rt > model.grid.extent() - 2.0 * model.grid.h())
      throw std::invalid_argument("test cutoff must vanish near the outer boundary");
    const auto phi = build_cutoff(model, Rt);
    std::vector<double> A(S), G(S), Gabs(S);
    for (std::size_t k = 0; k < S; ++k) {
      double mass = 0.0, flux = 0.0, flux_abs = 0.0;
      for (std::size_t i = 0; i < vol.size(); ++i) {
        mass += vol[i] * D[k][i] * phi.psi[i];
        const double term = vol[i] * W[k][i] * (pme.cn * phi.lap_psi[i] - model.R0[i] * phi.psi[i]);
        flux += term;
        flux_abs += std::abs(term);
      }
      A[k] = mass;
      G[k] = flux;
      Gabs[k] = flux_abs;
    }
    auto check = [&](std::size_t s, std::size_t t) {
      double trap = 0.0, right = 0.0, scale_int = 0.0;
      for (std::size_t k = s + 1; k <= t; ++k) {
        const double dt = u.states[k].t - u.states[k - 1].t;
        trap += 0.5 * dt * (G[k] + G[k - 1]);
        right += dt * G[k];
        scale_int += 0.5 * dt * (Gabs[k] + Gabs[k - 1]);
      }
      const double gap = std::abs(trap - right);
      const double scale = std::max({std::abs(A[s]), std::abs(A[t]), scale_int});
      const double excess = (A[t] - A[s]) - trap - (1e-6 * scale + gap);
      rep.max_quadrature_gap = std::max(rep.max_quadrature_gap, gap);
      rep.worst_excess = std::max(rep.worst_excess, excess);
      ++rep.checks;
      if (excess > 0.0) ++rep.failures;
    };
    for (std::size_t k = 1; k < S; ++k) check(k - 1, k);
    if (S > 2) check(0, S - 1);
  }
  return rep;
}

MeanValueReport mean_value_check(const ManifoldModel& model, const GridFunction& hfun,
                                 const std::vector<double>& radii) {
  MeanValueReport rep;
  rep.radii = radii;
  const auto c = curvature_data(model);
  if (c.Rc_radial.min() < -1e-10 || c.Rc_tangential.min() < -1e-10) {
    rep.reason = "Ricci curvature of the background is negative somewhere";
    return rep;
  }
  if (hfun.min() < 0.0) {
    rep.reason = "function is negative somewhere";
    return rep;
  }
  const auto lap = RadialLaplacian(model).apply(hfun);
  if (lap.min() < -1e-10) {
    rep.reason = "function is not subharmonic";
    return rep;
  }
  rep.applicable = true;
  for (double R : radii) {
    const double ratio = hfun[0] * volume_of_ball(model, R) / ball_integral(model, hfun, R);
    rep.ratios.push_back(ratio);
    rep.C = std::max(rep.C, ratio);
  }
  rep.bounded = !rep.ratios.empty() && rep.ratios.back() <= 2.0 * median(rep.ratios) + 1e-12;
  return rep;
}

DecayReport uniqueness_decay_experiment(const ManifoldModel& model, const GridFunction& u0,
                                        const std::vector<double>& radii, double t_probe,
                                        const FlowConfig& config, double bump_amplitude, int threads) {
  if (radii.size() < 2) throw std::invalid_argument("decay experiment needs at least two radii");
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] > radii[k - 1])) throw std::invalid_argument("decay radii must increase");
  if (radii.back() + 2.0 > model.grid.extent() - model.grid.h())
    throw std::invalid_argument("decay experiment: the outermost bump must fit inside the grid");
  const PMEParams pme(model.n);
  DecayReport rep;
  rep.radii = radii;
  rep.exponent_expected = 2.0 * pme.m * pme.alpha;
  rep.threshold = -rep.exponent_expected + 0.3;

  FlowConfig cfg = config;
  cfg.T = t_probe;
  for (double R : radii) {
    GridFunction v0 = u0;
    for (int i = 0; i <= model.grid.N(); ++i) {
      const double r = model.grid.r(i);
      if (r > R && r < R + 2.0) v0[i] += bump_amplitude * std::pow(std::sin(M_PI * (r - R) / 2.0), 2);
    }
    const auto [a, b] = run_pair(model, u0, v0, cfg, threads);
    std::vector<double> g(a.pole_values.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = std::abs(a.pole_values[k] - b.pole_values[k]);
    double w = 0.0;
    for (std::size_t k = 1; k < g.size(); ++k) w += 0.5 * (a.step_times[k] - a.step_times[k - 1]) * (g[k] + g[k - 1]);
    rep.w_probe.push_back(w);
  }

  constexpr double floor = 1e-14;
  if (std::all_of(rep.w_probe.begin(), rep.w_probe.end(), [](double w) { return w < floor; })) {
    rep.decayed_to_zero = true;
    rep.passed = true;
    rep.fitted_slope = -INFINITY;
    rep.note = "decayed to numerical zero";
    return rep;
  }
  std::vector<double> x, y;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    x.push_back(std::log(radii[k]));
    y.push_back(std::log(std::max(rep.w_probe[k], floor)));
  }
  rep.fitted_slope = fit_slope(x, y);
  rep.passed = rep.fitted_slope <= rep.threshold;
  if (std::any_of(rep.w_probe.begin(), rep.w_probe.end(), [](double w) { return w < floor; }))
    rep.note = "values below 1e-14 clamped before the fit";
  return rep;
}

LocalBoundReport nonneg_ricci_local_bound(const ManifoldModel& model, const FlowTrajectory& u,
                                          const FlowTrajectory& v, const std::vector<double>& radii, int k) {
  require_shared_times(u, v);
  LocalBoundReport rep;
  rep.radii = radii;
  const auto c = curvature_data(model);
  rep.applicable = c.Rc_radial.min() >= -1e-10 && c.Rc_tangential.min() >= -1e-10;
  if (!rep.applicable || radii.empty()) return rep;
  const PMEParams pme(model.n);
  const double e = (1.0 - model.n / 2.0) * (1.0 - pme.m);
  std::vector<GridFunction> U, V;
  for (std::size_t j = 0; j < u.states.size(); ++j) {
    U.push_back(pme_density(u.states[j].u, model.n));
    V.push_back(pme_density(v.states[j].u, model.n));
  }
  for (double R : radii) {
    const auto psi = build_cutoff(model, R, k);
    const double F0 = std::pow(l1_functional(U[0], V[0], psi, model), 1.0 - pme.m);
    double best = 0.0;
    for (std::size_t j = 1; j < u.states.size(); ++j) {
      const double t = u.states[j].t;
      const double Ft = std::pow(l1_functional(U[j], V[j], psi, model), 1.0 - pme.m);
      best = std::max(best, (Ft - F0) / (t * std::pow(R, e)));
    }
    rep.C_emp.push_back(best);
  }
  rep.bounded = rep.C_emp.back() <= 2.0 * median(rep.C_emp) + 1e-12;
  return rep;
}

void write_stability_csv(const std::string& path, const StabilityReport& report) {
  CsvWriter csv(path, {"t", "F", "F_pow", "bound_rhs"});
  for (std::size_t k = 0; k < report.times.size(); ++k)
    csv.row({report.times[k], report.F[k], report.F_pow[k], report.bound_rhs[k]});
}

void write_decay_csv(const std::string& path, const DecayReport& report) {
  CsvWriter csv(path, {"R", "w_probe"});
  for (std::size_t k = 0; k < report.radii.size(); ++k) csv.row({report.radii[k], report.w_probe[k]});
}

}  // namespace yamabe
