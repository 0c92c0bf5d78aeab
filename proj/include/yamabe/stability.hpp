#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "yamabe/flow.hpp"
#include "yamabe/geometry.hpp"
#include "yamabe/grid.hpp"

namespace yamabe {

/// Porous-medium exponents for dimension n: m = (n-2)/(n+2), α = (n+2)/4,
/// so that (1 - m) α = 1.
struct PMEParams {
  explicit PMEParams(int n);
  int n;
  double m;
  double alpha;
  double cn;
};

/// ψ = ψ0^k with ψ0 a C² quintic step: 1 on [0, R/2], 0 on [R, ∞).
struct Cutoff {
  double R = 0.0;
  int k = 0;
  GridFunction psi0;
  GridFunction psi;
  GridFunction lap_psi;  // radial stencil; 0 at the last node
};

/// k = 0 selects the default 2*ceil(2α). Requires k > 2α and R <= extent.
Cutoff build_cutoff(const ManifoldModel& model, double R, int k = 0);

/// ∫ g dμ = ω ∫ g f^{n-1} dr, composite trapezoid over the whole grid.
double integrate_volume(const ManifoldModel& model, const GridFunction& g);

/// C(ψ) = [∫ |Δψ|^α ψ^{-αm} dμ]^{1-m}; the integrand is 0 where ψ = 0.
double stability_constant(const ManifoldModel& model, const Cutoff& cutoff);

/// ∫ |U - V| ψ dμ.
double l1_functional(const GridFunction& U, const GridFunction& V, const Cutoff& cutoff,
                     const ManifoldModel& model);

/// PME density U = u^{(n+2)/(n-2)} of a conformal factor.
GridFunction pme_density(const GridFunction& u, int n);

struct StabilityReport {
  std::vector<double> times;
  std::vector<double> F;          // ∫ |U - V| ψ dμ
  std::vector<double> F_pow;      // F^{1-m}
  std::vector<double> bound_rhs;  // F(0)^{1-m} + (1-m) c_n C(ψ) t
  double C_psi = 0.0;
  int pairs_checked = 0;
  double worst_slack = -INFINITY;  // max over s < t of lhs - rhs
  bool passed = false;
};

/// Runs both flows (concurrently unless threads <= 1) and checks
///   F(t)^{1-m} <= F(s)^{1-m} + (1-m) c_n C(ψ) (t - s) + 1e-9
/// for all sampled s < t.
StabilityReport verify_stability_inequality(const ManifoldModel& model, const GridFunction& u0,
                                            const GridFunction& v0, const FlowConfig& config,
                                            const Cutoff& cutoff, int threads = 1);

/// Same check on precomputed trajectories sharing sample times.
StabilityReport stability_from_trajectories(const FlowTrajectory& a, const FlowTrajectory& b,
                                            const Cutoff& cutoff);

struct KatoReport {
  int nodes_checked = 0;
  int violations = 0;
  double worst = 0.0;  // max of rhs - lhs
};

/// Δ|a^m - b^m| >= sign(a - b) Δ(a^m - b^m) - 1e-10 on nodes 0..N-1.
KatoReport kato_check(const ManifoldModel& model, const GridFunction& a, const GridFunction& b);

struct SubharmonicReport {
  int checks = 0;
  int failures = 0;
  double worst_excess = -INFINITY;  // max of lhs - rhs - tol
  double max_quadrature_gap = 0.0;
};

/// Time-integrated weak form of the subharmonicity of |U - V| tested against
/// cutoffs of the given radii, between consecutive sampled states and over
/// the whole run. Cell volumes are the spatial measure; the time integral is
/// the trapezoid rule, with its gap to the right-endpoint sum added to the
/// tolerance.
SubharmonicReport subharmonic_difference_check(const ManifoldModel& model, const FlowTrajectory& u,
                                               const FlowTrajectory& v,
                                               const std::vector<double>& test_radii);

struct MeanValueReport {
  bool applicable = false;
  std::string reason;
  std::vector<double> radii;
  std::vector<double> ratios;  // h(p) V(R) / ∫_{B_R} h
  double C = 0.0;
  bool bounded = false;
};
MeanValueReport mean_value_check(const ManifoldModel& model, const GridFunction& hfun,
                                 const std::vector<double>& radii);

struct DecayReport {
  std::vector<double> radii;
  std::vector<double> w_probe;
  double fitted_slope = 0.0;
  double exponent_expected = 0.0;  // 2 m α
  double threshold = 0.0;          // -2 m α + 0.3
  bool decayed_to_zero = false;
  bool passed = false;
  std::string note;
};

/// For each R, flows from u0 and from u0 plus a bump supported in
/// [R, R + 2], and integrates |u - v|(s, 0) over [0, t_probe].
DecayReport uniqueness_decay_experiment(const ManifoldModel& model, const GridFunction& u0,
                                        const std::vector<double>& radii, double t_probe,
                                        const FlowConfig& config, double bump_amplitude = 0.5,
                                        int threads = 1);

struct LocalBoundReport {
  bool applicable = false;
  std::vector<double> radii;
  std::vector<double> C_emp;
  bool bounded = false;
};

/// C_emp(R) = max_t ([F(t)]^{1-m} - [F(0)]^{1-m}) / (t R^{(1-n/2)(1-m)}), clamped at 0.
LocalBoundReport nonneg_ricci_local_bound(const ManifoldModel& model, const FlowTrajectory& u,
                                          const FlowTrajectory& v, const std::vector<double>& radii,
                                          int k = 0);

void write_stability_csv(const std::string& path, const StabilityReport& report);
void write_decay_csv(const std::string& path, const DecayReport& report);

}  // namespace yamabe
