#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamabe/flow.hpp"
#include "yamabe/geometry.hpp"
#include "yamabe/riccati.hpp"

namespace yamabe {

/// Malformed scenario file. The message starts with "line L: " when the
/// problem is attached to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

enum class Command { geometry, poisson, flow, stability, decay, riccati, report };
std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct ModelConfig {
  ProfileFamily profile = ProfileFamily::euclidean;
  int n = 3;
  double h = 0.01;
  int N = 1000;
  ModelMode mode = ModelMode::geometric;
  // coefficient-mode potential: zero | gaussian | compact
  std::string r0 = "zero";
  double r0_amplitude = 1.0;
  double r0_width = 1.0;
  // from_curvature: gaussian | compact
  std::string curvature = "gaussian";
  double curvature_amplitude = 1.0;
  double curvature_width = 1.0;
  std::filesystem::path table;  // tabulated: CSV with columns r,f[,fp]
  double extent() const { return h * N; }
};

struct GeometryParams {
  std::vector<double> bishop_radii;
  double identity_tol = 1e-10;
};

struct PoissonParams {
  std::vector<double> radii;  // empty: doubling from 4 up to the extent
  double tol = 1e-6;
  double delta_fraction = 0.05;
  double residual_tol = 1e-8;
};

struct FlowParams {
  FlowConfig config;          // dt defaults to h
  std::string u0 = "barrier_plus";  // one | w | barrier_plus | barrier_minus | bump
  double u0_amplitude = 0.5;
  std::vector<double> radii;  // exhaustion schedule for the barrier v
  double tol = 1e-6;
};

struct StabilityParams {
  double R = 16.0;  // cutoff radius
  int k = 0;
  FlowConfig config;
  double amplitude = 0.3;  // pair: u0 = 1, v0 = 1 + A e^{-r^2}
  std::vector<double> scaling_radii;
  double slope_tol = 0.1;
  bool break_solver = false;  // test hook: corrupts one trajectory
};

struct DecayParams {
  std::vector<double> radii{8, 16, 32};
  double t_probe = 1.0;
  FlowConfig config;
  double bump_amplitude = 0.5;
};

struct RiccatiParams {
  std::string fixture = "cylinder_bump";  // cylinder_bump | none
  std::optional<double> a0;
  RiccatiCase case_tag = RiccatiCase::case1;
  std::optional<double> V0;
  double residual_tol = 1e-6;
  double curvature_tol = 1e-4;
};

struct Scenario {
  std::string name;
  Command command = Command::geometry;
  ModelConfig model;
  GeometryParams geometry;
  PoissonParams poisson;
  FlowParams flow;
  StabilityParams stability;
  DecayParams decay;
  RiccatiParams riccati;
  std::set<std::string> sections;  // sections present in the file
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  std::string source;  // raw file text, hashed into the manifest
};

/// Parses `key = value` lines grouped by `[section]` headers; `#` starts a
/// comment. When `command` is given it overrides (and must agree with) the
/// file's own `command` key.
Scenario parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".",
                           std::optional<Command> command = {});
Scenario parse_config(const std::filesystem::path& path, std::optional<Command> command = {});

/// Builds the manifold described by the [model] section.
ManifoldModel build_model(const ModelConfig& mc);

}  // namespace yamabe
