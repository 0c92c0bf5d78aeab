#include "yamabe/scenario.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "yamabe/elliptic.hpp"
#include "yamabe/io.hpp"
#include "yamabe/numerics.hpp"
#include "yamabe/riccati.hpp"
#include "yamabe/stability.hpp"

#ifndef YAMABE_LAB_VERSION
#define YAMABE_LAB_VERSION "0.0.0"
#endif

namespace yamabe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  json summary = json::object();
  std::vector<std::string> failures;
  std::vector<std::string> files;
  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

json newton_json(const NewtonStats& s) {
  return {{"steps", s.steps},
          {"total_iterations", s.total_iterations},
          {"max_iterations", s.max_iterations},
          {"dt_halvings", s.dt_halvings},
          {"max_residual", s.max_residual}};
}

std::vector<double> schedule_or_default(const std::vector<double>& radii, const ManifoldModel& model) {
  if (!radii.empty()) return radii;
  const double extent = model.grid.extent();
  return doubling_schedule(std::min(4.0, extent), extent);
}

// ---- geometry ----

void run_geometry(const Scenario& s, const fs::path& dir, Outcome& out) {
  const auto model = build_model(s.model);
  const auto curv = curvature_data(model);
  write_geometry_csv((dir / "geometry.csv").string(), model, curv);
  out.files.push_back("geometry.csv");

  const int n = model.n;
  double identity = 0.0;
  if (model.mode == ModelMode::geometric) {
    for (std::size_t i = 0; i < model.grid.size(); ++i)
      identity = std::max(identity, std::abs(curv.R0[i] - (2.0 * (n - 1) * curv.K[i] +
                                                           (n - 1.0) * (n - 2.0) * curv.K1[i])));
    out.check(identity <= s.geometry.identity_tol, "scalar curvature identity off by " + format17(identity));
  }
  const bool finite = curv.K.all_finite() && curv.K1.all_finite() && curv.R0.all_finite();
  out.check(finite, "non-finite curvature values");

  out.summary = {{"mode", to_string(model.mode)},
                 {"profile", to_string(s.model.profile)},
                 {"n", n},
                 {"h", model.grid.h()},
                 {"N", model.grid.N()},
                 {"rows", model.grid.size()},
                 {"identity_residual", identity},
                 {"R0_min", curv.R0.min()},
                 {"R0_max", curv.R0.max()}};
  if (!s.geometry.bishop_radii.empty()) {
    const auto b = bishop_check(model, s.geometry.bishop_radii);
    out.summary["bishop"] = {{"applicable", b.applicable}, {"passed", b.passed}, {"radii", b.radii},
                             {"ratios", b.ratios}, {"max_ratio", b.max_ratio}};
    if (b.applicable) out.check(b.passed, "Bishop volume ratio exceeds 1");
  }
  write_json(dir / "geometry.json", out.summary);
  out.files.push_back("geometry.json");
}

// ---- poisson ----

void run_poisson(const Scenario& s, const fs::path& dir, Outcome& out) {
  const auto model = build_model(s.model);
  const auto radii = schedule_or_default(s.poisson.radii, model);
  const auto pm = property_m_solution(model, radii, s.poisson.tol, s.poisson.delta_fraction);
  const auto zm = yamabe_zero_metric_M(model, pm.v, s.poisson.residual_tol);
  const auto Lw = apply_conformal_laplacian(model, zm.w);

  CsvWriter csv((dir / "poisson.csv").string(), {"r", "v", "w", "residual"});
  for (int i = 0; i <= model.grid.N(); ++i) csv.row({model.grid.r(i), pm.v[i], zm.w[i], std::abs(Lw[i])});
  out.files.push_back("poisson.csv");

  out.check(zm.min_w > 0.0, "w is not positive");
  out.check(zm.residual_sup <= s.poisson.residual_tol, "L w residual " + format17(zm.residual_sup));
  out.check(pm.v.max() <= 1.0 + 1e-10, "sup v exceeds 1");

  out.summary = {{"mode", to_string(model.mode)},
                 {"n", model.n},
                 {"schedule", radii},
                 {"sup_changes", pm.exhaustion.sup_changes},
                 {"converged", pm.exhaustion.converged},
                 {"decay_flag", pm.decay_ok},
                 {"trivial", pm.trivial},
                 {"note", pm.note},
                 {"v_max", pm.v.max()},
                 {"min_w", zm.min_w},
                 {"residual_sup", zm.residual_sup}};
  write_json(dir / "poisson.json", out.summary);
  out.files.push_back("poisson.json");
}

// ---- flow ----

GridFunction flow_initial(const FlowParams& p, const ManifoldModel& model, const GridFunction& v,
                          const GridFunction& w) {
  const double A = p.u0_amplitude;
  const double C = p.config.C;
  if (p.u0 == "one") return GridFunction(model.grid.size(), 1.0);
  if (p.u0 == "w") return w;
  if (p.u0 == "barrier_plus") return GridFunction(model.grid.size(), 1.0) + (A * C) * v;
  if (p.u0 == "barrier_minus") return GridFunction(model.grid.size(), 1.0) - (A * C) * v;
  return GridFunction::sample(model.grid, [A](double r) { return 1.0 + A * std::exp(-r * r); });
}

void run_flow_command(const Scenario& s, const fs::path& dir, Outcome& out) {
  const auto model = build_model(s.model);
  const auto pm = property_m_solution(model, schedule_or_default(s.flow.radii, model), s.flow.tol);
  const GridFunction w = GridFunction(model.grid.size(), 1.0) - pm.v;
  const auto u0 = flow_initial(s.flow, model, pm.v, w);
  const double C = s.flow.config.C;
  const bool start_in_AC = check_class_AC(u0, pm.v, C, 1e-8).inside;

  const auto traj = run_flow(model, u0, s.flow.config);
  const auto barriers = verify_barriers(traj, pm.v, C);
  const auto fine = check_fine_bounds(traj);
  const auto conv = convergence_to_yamabe(traj, w);

  CsvWriter csv((dir / "flow.csv").string(), {"t", "r", "u"});
  for (const auto& st : traj.states)
    for (int i = 0; i <= model.grid.N(); ++i) csv.row({st.t, model.grid.r(i), st.u[i]});
  out.files.push_back("flow.csv");

  if (start_in_AC) {
    out.check(barriers.passed, "trajectory left A_C at t = " + format17(barriers.first_breach_time));
    out.check(fine.fine && fine.C1 <= fine.C2, "fine-bound certificate failed");
  }

  out.summary = {{"C1", fine.C1},
                 {"C2", fine.C2},
                 {"fine", fine.fine},
                 {"in_AC", barriers.passed},
                 {"initially_in_AC", start_in_AC},
                 {"C", C},
                 {"u0", s.flow.u0},
                 {"times", conv.times},
                 {"d_series", conv.d},
                 {"eventually_decreasing", conv.eventually_decreasing},
                 {"newton_stats", newton_json(traj.stats)}};
  write_json(dir / "flow.json", out.summary);
  out.files.push_back("flow.json");
}

// ---- stability ----

FlowTrajectory corrupt(FlowTrajectory traj) {
  // deliberately wrong dynamics: growth by 1 + 10 t
  for (auto& st : traj.states) st.u = (1.0 + 10.0 * st.t) * st.u;
  return traj;
}

void run_stability(const Scenario& s, const fs::path& dir, Outcome& out, int threads) {
  const auto model = build_model(s.model);
  const auto& p = s.stability;
  const GridFunction u0(model.grid.size(), 1.0);
  const auto v0 = GridFunction::sample(model.grid, [A = p.amplitude](double r) { return 1.0 + A * std::exp(-r * r); });
  const auto cutoff = build_cutoff(model, p.R, p.k);

  StabilityReport rep;
  if (!p.break_solver) {
    rep = verify_stability_inequality(model, u0, v0, p.config, cutoff, threads);
  } else {
    const auto a = run_flow(model, u0, p.config);
    const auto b = corrupt(run_flow(model, v0, p.config));
    rep = stability_from_trajectories(a, b, cutoff);
  }
  write_stability_csv((dir / "stability.csv").string(), rep);
  out.files.push_back("stability.csv");

  const PMEParams pme(model.n);
  const double expected = (model.n - 2.0 * pme.alpha) * (1.0 - pme.m);
  json slope = nullptr;
  if (p.scaling_radii.size() >= 2) {
    std::vector<double> x, y;
    for (double R : p.scaling_radii) {
      x.push_back(std::log(R));
      y.push_back(std::log(stability_constant(model, build_cutoff(model, R, p.k))));
    }
    const double fitted = fit_slope(x, y);
    slope = fitted;
    out.check(std::abs(fitted - expected) <= p.slope_tol, "C(psi) scaling exponent " + format17(fitted));
  }
  out.check(rep.passed, "stability inequality violated (worst slack " + format17(rep.worst_slack) + ")");

  out.summary = {{"C_psi", rep.C_psi},
                 {"pairs_checked", rep.pairs_checked},
                 {"samples", rep.times.size()},
                 {"worst_slack", rep.worst_slack},
                 {"fitted_slope", slope},
                 {"exponent_expected", expected},
                 {"passed", rep.passed}};
  write_json(dir / "stability.json", out.summary);
  out.files.push_back("stability.json");
}

// ---- decay ----

void run_decay(const Scenario& s, const fs::path& dir, Outcome& out, int threads) {
  const auto model = build_model(s.model);
  const GridFunction one(model.grid.size(), 1.0);
  const auto rep = uniqueness_decay_experiment(model, one, s.decay.radii, s.decay.t_probe, s.decay.config,
                                               s.decay.bump_amplitude, threads);
  write_decay_csv((dir / "decay.csv").string(), rep);
  out.files.push_back("decay.csv");
  out.check(rep.passed, "decay slope " + format17(rep.fitted_slope) + " above " + format17(rep.threshold));
  out.summary = {{"radii", rep.radii},
                 {"w_probe", rep.w_probe},
                 {"fitted_slope", rep.fitted_slope},
                 {"exponent_expected", rep.exponent_expected},
                 {"threshold", rep.threshold},
                 {"decayed_to_zero", rep.decayed_to_zero},
                 {"note", rep.note},
                 {"passed", rep.passed}};
  write_json(dir / "decay.json", out.summary);
  out.files.push_back("decay.json");
}

// ---- riccati ----

void run_riccati(const Scenario& s, const fs::path& dir, Outcome& out) {
  const auto& p = s.riccati;
  ManifoldModel model;
  double a0 = 0.0, V0 = 1.0;
  if (p.fixture == "cylinder_bump") {
    auto fx = build_cylinder_bump_fixture(s.model.h, s.model.N);
    model = fx.model;
    a0 = p.a0.value_or(fx.a_star(pole_radius(model.grid)));
    V0 = p.V0.value_or(fx.V(0.0));
  } else {
    model = build_model(s.model);
    a0 = *p.a0;
    V0 = p.V0.value_or(1.0);
  }
  const auto sd = potential_Q(model);
  const auto sol = integrate_riccati(model, sd.P, a0, p.case_tag);
  const int N = model.grid.N();
  const int lo = 5, hi = N - 5;

  out.summary = {{"case", to_string(p.case_tag)},
                 {"fixture", p.fixture},
                 {"a0", a0},
                 {"blew_up", sol.blew_up},
                 {"asymptote", sol.asymptote},
                 {"asymptote_ok", sol.asymptote_ok},
                 {"drift", sol.drift}};
  json residuals = {{"riccati", sol.residual}};
  out.check(!sol.blew_up, "Riccati solution blew up at r = " + format17(sol.blowup_radius));
  out.check(sol.asymptote_ok, "asymptotic condition not met (drift " + format17(sol.drift) + ")");
  out.check(sol.residual <= p.residual_tol, "Riccati residual " + format17(sol.residual));

  if (!sol.blew_up && sol.asymptote_ok) {
    const auto factor = yamabe_factor_from_riccati(model, sol, V0);
    const auto R = scalar_curvature_of_conformal(model, factor.v);
    const double h = model.grid.h();
    double fres = 0.0;
    for (int i = lo; i <= hi; ++i)
      fres = std::max(fres, std::abs(-(factor.V[i + 1] - 2 * factor.V[i] + factor.V[i - 1]) / (h * h) +
                                     sd.P[i] * factor.V[i]));
    const double curv = R.sup_abs(lo, hi);
    residuals["factorization"] = fres;
    residuals["curvature"] = curv;
    out.summary["pole_end"] = factor.pole_end;
    out.check(curv <= p.curvature_tol, "|R(g_v)| = " + format17(curv));
    write_riccati_csv((dir / "riccati.csv").string(), model, sd, sol, factor, R);
    out.files.push_back("riccati.csv");
  }
  out.summary["residuals"] = residuals;
  write_json(dir / "riccati.json", out.summary);
  out.files.push_back("riccati.json");
}

int classify(const Outcome& out) { return out.failures.empty() ? kExitPass : kExitAssertionFailed; }

int run_single(const Scenario& s, Command command, const fs::path& dir, const RunOptions& opt,
               Outcome& out) {
  try {
    switch (command) {
      case Command::geometry: run_geometry(s, dir, out); break;
      case Command::poisson: run_poisson(s, dir, out); break;
      case Command::flow: run_flow_command(s, dir, out); break;
      case Command::stability: run_stability(s, dir, out, opt.threads); break;
      case Command::decay: run_decay(s, dir, out, opt.threads); break;
      case Command::riccati: run_riccati(s, dir, out); break;
      case Command::report: throw std::logic_error("nested report");
    }
  } catch (const NumericalError& e) {
    out.failures.push_back(e.what());
    out.summary["error"] = e.what();
    write_json(dir / (to_string(command) + ".json"), out.summary);
    return kExitAssertionFailed;
  }
  return classify(out);
}

}  // namespace

int threads_from_env() {
  const char* v = std::getenv("YAMABE_LAB_THREADS");
  if (!v || !*v) return 2;
  char* end = nullptr;
  const long t = std::strtol(v, &end, 10);
  if (*end != '\0' || t < 1) return 1;
  return static_cast<int>(std::min<long>(t, 64));
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

int run_scenario(const Scenario& s, const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  int code = kExitPass;
  json manifest = {{"version", YAMABE_LAB_VERSION},
                   {"name", s.name},
                   {"command", to_string(s.command)},
                   {"config_hash", "sha256:" + sha256_hex(s.source)},
                   {"seed", s.seed},
                   {"threads", opt.threads}};
  try {
    fs::create_directories(s.out_dir);
    if (s.command == Command::report) {
      // every section present in the file, geometry always
      json codes = json::object();
      std::vector<Command> cmds{Command::geometry};
      for (auto c : {Command::poisson, Command::flow, Command::stability, Command::decay, Command::riccati})
        if (s.sections.count(to_string(c))) cmds.push_back(c);
      int worst = kExitPass;
      for (auto c : cmds) {
        const fs::path sub = s.out_dir / to_string(c);
        fs::create_directories(sub);
        Outcome out;
        int rc = kExitExecutionError;
        try {
          rc = run_single(s, c, sub, opt, out);
        } catch (const std::exception& e) {
          out.failures.push_back(e.what());
        }
        for (const auto& f : out.failures)
          if (!opt.quiet) std::cerr << to_string(c) << ": " << f << '\n';
        codes[to_string(c)] = {{"exit_code", rc}, {"failures", out.failures}};
        if (rc == kExitExecutionError || worst == kExitExecutionError)
          worst = kExitExecutionError;
        else
          worst = std::max(worst, rc);
      }
      write_json(s.out_dir / "report.json", codes);
      code = worst;
    } else {
      Outcome out;
      code = run_single(s, s.command, s.out_dir, opt, out);
      for (const auto& f : out.failures)
        if (!opt.quiet) std::cerr << to_string(s.command) << ": " << f << '\n';
      manifest["files"] = out.files;
      manifest["failures"] = out.failures;
    }
  } catch (const std::exception& e) {
    if (!opt.quiet) std::cerr << "error: " << e.what() << '\n';
    manifest["error"] = e.what();
    code = kExitExecutionError;
  }
  manifest["exit_code"] = code;
  manifest["wall_time"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    fs::create_directories(s.out_dir);
    write_json(s.out_dir / "manifest.json", manifest);
  } catch (const std::exception& e) {
    if (!opt.quiet) std::cerr << "error: " << e.what() << '\n';
    return kExitExecutionError;
  }
  return code;
}

}  // namespace yamabe
