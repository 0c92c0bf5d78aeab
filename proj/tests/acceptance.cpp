// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "yamabe/config.hpp"
#include "yamabe/elliptic.hpp"
#include "yamabe/flow.hpp"
#include "yamabe/numerics.hpp"
#include "yamabe/riccati.hpp"
#include "yamabe/scenario.hpp"
#include "yamabe/stability.hpp"

using namespace yamabe;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

ManifoldModel profile(ProfileFamily family, int n, double h, int N) {
  ProfileSpec s;
  s.family = family;
  s.n = n;
  s.h = h;
  s.N = N;
  return build_profile(s);
}

double gauss(double r) { return std::exp(-r * r); }

ManifoldModel gaussian_coefficient(double h, int N) {
  ProfileSpec s;
  s.h = h;
  s.N = N;
  s.mode = ModelMode::coefficient;
  s.coefficient_r0 = gauss;
  return build_profile(s);
}

FlowConfig flow_config(double dt, double T, int stride) {
  FlowConfig c;
  c.dt = dt;
  c.T = T;
  c.stride = stride;
  return c;
}

Verdict curvature_identities() {
  struct Case {
    ProfileFamily family;
    int N;
    std::function<double(double)> K, K1;
  };
  const auto sech2 = oracle::sech2;
  const std::vector<Case> cases{
      {ProfileFamily::euclidean, 1000, [](double) { return 0.0; }, [](double) { return 0.0; }},
      {ProfileFamily::sphere_cap, 300, [](double) { return 1.0; }, [](double) { return 1.0; }},
      {ProfileFamily::cylinder, 1000, [&](double r) { return 2.0 * sech2(r); }, [&](double r) { return 1.0 + sech2(r); }},
  };
  double closed = 0.0, identity = 0.0;
  for (const auto& c : cases) {
    const auto m = profile(c.family, 3, 0.01, c.N);
    const auto cd = curvature_data(m);
    for (int i = 0; i <= c.N; ++i) {
      const double r = m.grid.r(i);
      const double K = c.K(r), K1 = c.K1(r);
      closed = std::max({closed, std::abs(cd.K[i] - K), std::abs(cd.K1[i] - K1),
                         std::abs(cd.R0[i] - (4.0 * K + 2.0 * K1))});
      identity = std::max(identity, std::abs(cd.R0[i] - (4.0 * cd.K[i] + 2.0 * cd.K1[i])));
    }
  }
  return {closed <= 1e-5 && identity <= 1e-10,
          "closed-form error " + fmt("%.2e", closed) + ", identity residual " + fmt("%.2e", identity)};
}

Verdict maximum_principle(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  int negatives = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 4;
    const auto fam = trial % 2 ? ProfileFamily::cylinder : ProfileFamily::euclidean;
    auto m = profile(fam, n, 0.05, 100);
    GridFunction R0(m.grid.size()), rhs(m.grid.size());
    const double scale = 10.0 * unif(rng);
    for (std::size_t i = 0; i < R0.size(); ++i) {
      R0[i] = unif(rng) < 0.3 ? 0.0 : scale * unif(rng);
      rhs[i] = unif(rng) < 0.5 ? 0.0 : unif(rng);
    }
    m = with_coefficient_r0(m, R0);
    const auto u = solve_dirichlet_ball(m, rhs, 5.0, unif(rng));
    for (double x : u) {
      worst = std::min(worst, x);
      if (x < -1e-12) ++negatives;
    }
  }
  return {negatives == 0, "200 problems, min value " + fmt("%.2e", worst) + ", " + std::to_string(negatives) +
                              " values below -1e-12"};
}

Verdict exhaustion() {
  const double h = 0.01;
  const auto m = gaussian_coefficient(h, 3200);
  const auto res = exhaust_poisson(m, m.R0, {4, 8, 16, 32}, 1e-6);
  double mono = 0.0;
  for (std::size_t k = 1; k < res.stages.size(); ++k)
    for (std::size_t i = 0; i < res.limit.size(); ++i) mono = std::max(mono, res.stages[k - 1][i] - res.stages[k][i]);
  const auto ref = oracle::shoot_radial(
      3, [](double r) { return r; }, [](double) { return 1.0; }, gauss, gauss, 32.0, h / 16, 0.0);
  double err = 0.0;
  for (int i = 0; i <= 3200; ++i) err = std::max(err, std::abs(res.limit[i] - ref[16 * i]));
  const auto z = yamabe_zero_metric_M(m, res.limit);
  const bool ok = mono <= 1e-12 && err <= 1e-5 && z.min_w > 0.0 && z.residual_sup <= 1e-8;
  return {ok, "monotonicity excess " + fmt("%.2e", mono) + ", oracle error " + fmt("%.2e", err) + ", min w " +
                  fmt("%.6f", z.min_w) + ", |Lw| " + fmt("%.2e", z.residual_sup)};
}

Verdict zero_scalar() {
  const auto m = gaussian_coefficient(0.01, 3200);
  const auto pm = property_m_solution(m, {4, 8, 16, 32}, 1e-6);
  const auto z = yamabe_zero_metric_M(m, pm.v);
  const double rm = scalar_curvature_of_conformal(m, z.w).sup_abs(0, 3199);

  const auto fx = build_cylinder_bump_fixture(0.01, 2000);
  const auto sol = integrate_riccati(fx.model, fx.a_star(0.05), RiccatiCase::case1);
  const auto factor = yamabe_factor_from_riccati(fx.model, sol, fx.V(0.0));
  const double rr = scalar_curvature_of_conformal(fx.model, factor.v).sup_abs(5, 1995);
  return {rm <= 1e-6 && rr <= 1e-4,
          "Property M metric " + fmt("%.2e", rm) + ", Riccati fixture metric " + fmt("%.2e", rr)};
}

Verdict flow_barriers() {
  const auto m = gaussian_coefficient(0.05, 320);
  const auto pm = property_m_solution(m, {4, 8, 16}, 1e-6);
  const auto& v = pm.v;
  const GridFunction one(m.grid.size(), 1.0);
  const GridFunction w = one - v;

  const auto still = run_flow(m, w, flow_config(0.05, 5.0, 1));
  double drift = 0.0;
  for (const auto& s : still.states) drift = std::max(drift, (s.u - w).sup_abs());
  const bool steps_ok = still.stats.steps == 100;

  const double C = 2.0;
  bool barriers = true, fine = true;
  double margin = INFINITY;
  const double vmax = v.max();
  for (double sign : {1.0, -1.0}) {
    const auto traj = run_flow(m, one + (sign * 0.5 * C) * v, flow_config(0.05, 2.0, 1));
    const auto b = verify_barriers(traj, v, C, 1e-8);
    barriers = barriers && b.passed;
    for (double x : b.margins) margin = std::min(margin, x);
    const auto fb = check_fine_bounds(traj);
    // A_C envelope: 1 - C v <= u <= 1 + C v, so u^{4/(n-2)} = u^4 lies in
    // [(1 - C sup v)^4, (1 + C sup v)^4]
    const double lo = std::pow(1.0 - C * vmax, 4), hi = std::pow(1.0 + C * vmax, 4);
    fine = fine && fb.fine && fb.C1 > 0.0 && fb.C1 <= fb.C2 && std::isfinite(fb.C2) && fb.C1 >= lo - 1e-8 &&
           fb.C2 <= hi + 1e-8;
  }
  return {steps_ok && drift <= 1e-6 && barriers && fine,
          "stationary drift " + fmt("%.2e", drift) + " over 100 steps, min A_C margin " + fmt("%.2e", margin) +
              ", fine bounds " + (fine ? "consistent" : "inconsistent")};
}

Verdict comparison(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto m = gaussian_coefficient(0.1, 100);
  double worst = -INFINITY;
  for (int trial = 0; trial < 50; ++trial) {
    GridFunction a(m.grid.size()), b(m.grid.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = 0.5 + unif(rng);
      b[i] = a[i] + (unif(rng) < 0.5 ? 0.0 : unif(rng));
    }
    const auto ta = run_flow(m, a, flow_config(0.1, 1.0, 1));
    const auto tb = run_flow(m, b, flow_config(0.1, 1.0, 1));
    for (std::size_t k = 0; k < ta.states.size(); ++k)
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, ta.states[k].u[i] - tb.states[k].u[i]);
  }
  return {worst <= 1e-10, "50 pairs, max order violation " + fmt("%.2e", worst)};
}

Verdict stability_inequality() {
  const auto mflat = profile(ProfileFamily::euclidean, 3, 0.05, 320);
  const auto mcoef = gaussian_coefficient(0.05, 320);
  const GridFunction one(mflat.grid.size(), 1.0);
  const auto bump = GridFunction::sample(mflat.grid, [](double r) { return 1.0 + 0.3 * gauss(r); });
  bool ok = true;
  std::string detail;
  for (const auto* m : {&mflat, &mcoef}) {
    const auto rep = verify_stability_inequality(*m, one, bump, flow_config(0.05, 2.0, 4), build_cutoff(*m, 16.0), 2);
    const std::size_t S = rep.times.size();
    ok = ok && rep.passed && S >= 10 && rep.pairs_checked == static_cast<int>(S * (S - 1) / 2) &&
         rep.worst_slack <= 1e-9;
    detail += std::string(detail.empty() ? "" : "; ") + (m == &mflat ? "flat" : "coefficient") + ": " +
              std::to_string(S) + " samples, " + std::to_string(rep.pairs_checked) + " pairs, worst slack " +
              fmt("%.3g", rep.worst_slack);
  }
  return {ok, detail};
}

Verdict cutoff_scaling() {
  const auto m = profile(ProfileFamily::euclidean, 3, 0.01, 3200);
  std::vector<double> x, y;
  for (double R : {8.0, 16.0, 32.0}) {
    x.push_back(std::log(R));
    y.push_back(std::log(stability_constant(m, build_cutoff(m, R))));
  }
  const double slope = fit_slope(x, y);
  return {std::abs(slope - 0.4) <= 0.1, "fitted exponent " + fmt("%.4f", slope) + " (predicted 0.4)"};
}

Verdict decay() {
  const auto m = profile(ProfileFamily::euclidean, 3, 0.05, 800);
  const GridFunction one(m.grid.size(), 1.0);
  const auto rep = uniqueness_decay_experiment(m, one, {8, 16, 32}, 1.0, flow_config(0.05, 1.0, 10), 0.5, 2);
  return {rep.passed && rep.fitted_slope <= -0.2,
          "fitted slope " + fmt("%.3f", rep.fitted_slope) + " (bound -0.2)" +
              (rep.note.empty() ? std::string() : ", " + rep.note)};
}

Verdict kato(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int violations = 0, nodes = 0;
  for (int n : {3, 4, 5}) {
    const auto m = profile(ProfileFamily::euclidean, n, 0.05, 60);
    for (int trial = 0; trial < 1000; ++trial) {
      GridFunction a(m.grid.size()), b(m.grid.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = 0.1 + unif(rng);
        b[i] = unif(rng) < 0.1 ? a[i] : 0.1 + unif(rng);
      }
      const auto r = kato_check(m, a, b);
      violations += r.violations;
      nodes += r.nodes_checked;
    }
  }
  return {violations == 0, "3000 pairs, " + std::to_string(nodes) + " nodes, " + std::to_string(violations) +
                               " violations"};
}

Verdict conjugation() {
  std::vector<double> gaps;
  for (int k = 0; k < 3; ++k) {
    const double h = 0.02 / (1 << k);
    const auto fx = build_cylinder_bump_fixture(h, static_cast<int>(std::lround(10.0 / h)));
    const auto V = GridFunction::sample(fx.model.grid, [](double r) { return 2.0 + std::exp(-r) + 0.1 * std::sin(r); });
    const auto c = conjugation_routes(fx.model, V);
    const int lo = fx.model.grid.index_of(1.0), hi = fx.model.grid.index_of(9.0);
    double gap = 0.0;
    for (int i = lo; i <= hi; ++i) gap = std::max(gap, std::abs(c.conformal_route[i] - c.schrodinger_route[i]));
    gaps.push_back(gap);
  }
  const double o1 = std::log2(gaps[0] / gaps[1]), o2 = std::log2(gaps[1] / gaps[2]);
  return {o1 >= 1.8 && o2 >= 1.8, "observed orders " + fmt("%.3f", o1) + ", " + fmt("%.3f", o2)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const fs::path dir = YAMABE_SCENARIO_DIR;
  const fs::path base = fs::temp_directory_path() / "yamabe_acceptance_determinism";
  int scenarios = 0, files = 0, mismatches = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".cfg") continue;
    ++scenarios;
    auto s = parse_config(entry.path());
    std::vector<fs::path> outs;
    for (int run = 0; run < 2; ++run) {
      s.out_dir = base / (entry.path().stem().string() + "_" + std::to_string(run));
      fs::remove_all(s.out_dir);
      RunOptions opt;
      opt.threads = run + 1;
      opt.quiet = true;
      if (run_scenario(s, opt) == kExitExecutionError) ++mismatches;
      outs.push_back(s.out_dir);
    }
    for (const auto& f : fs::recursive_directory_iterator(outs[0])) {
      if (f.path().extension() != ".csv") continue;
      ++files;
      if (slurp(f.path()) != slurp(outs[1] / fs::relative(f.path(), outs[0]))) ++mismatches;
    }
  }
  fs::remove_all(base);
  return {scenarios > 0 && files > 0 && mismatches == 0,
          std::to_string(scenarios) + " scenarios, " + std::to_string(files) + " CSVs, " +
              std::to_string(mismatches) + " mismatches"};
}

}  // namespace

int main() {
  const std::uint64_t seed_mp = 20241016, seed_cmp = 7, seed_kato = 99;
  std::printf("seeds: maximum principle %llu, comparison %llu, Kato %llu\n",
              static_cast<unsigned long long>(seed_mp), static_cast<unsigned long long>(seed_cmp),
              static_cast<unsigned long long>(seed_kato));
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"curvature identities", curvature_identities},
      {"discrete maximum principle", [&] { return maximum_principle(seed_mp); }},
      {"exhaustion monotonicity and Property M metric", exhaustion},
      {"zero scalar curvature", zero_scalar},
      {"flow stationarity and barriers", flow_barriers},
      {"flow comparison principle", [&] { return comparison(seed_cmp); }},
      {"L1 stability inequality", stability_inequality},
      {"cutoff constant scaling", cutoff_scaling},
      {"uniqueness decay", decay},
      {"Kato inequality", [&] { return kato(seed_kato); }},
      {"conjugation identity", conjugation},
      {"determinism", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s [%02d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", index, name.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
