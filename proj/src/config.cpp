#include "yamabe/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "yamabe/io.hpp"

namespace yamabe {

ConfigError::ConfigError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

std::string to_string(Command c) {
  switch (c) {
    case Command::geometry: return "geometry";
    case Command::poisson: return "poisson";
    case Command::flow: return "flow";
    case Command::stability: return "stability";
    case Command::decay: return "decay";
    case Command::riccati: return "riccati";
    case Command::report: return "report";
  }
  return "?";
}

Command command_from_string(const std::string& s) {
  for (auto c : {Command::geometry, Command::poisson, Command::flow, Command::stability, Command::decay,
                 Command::riccati, Command::report})
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown command '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Entry {
  std::string key;
  std::string value;
  int line;
};

double to_double(const Entry& e) {
  double x = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [p, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || p != last || !std::isfinite(x))
    throw ConfigError(e.line, "key '" + e.key + "' expects a number, got '" + e.value + "'");
  return x;
}

long long to_integer(const Entry& e) {
  long long x = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [p, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || p != last)
    throw ConfigError(e.line, "key '" + e.key + "' expects an integer, got '" + e.value + "'");
  return x;
}

bool to_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ConfigError(e.line, "key '" + e.key + "' expects true or false, got '" + e.value + "'");
}

std::vector<double> to_list(const Entry& e) {
  std::string s = e.value;
  if (!s.empty() && s.front() == '{' && s.back() == '}') s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double({e.key, trim(item), e.line}));
  if (out.empty()) throw ConfigError(e.line, "key '" + e.key + "' expects a comma-separated list");
  return out;
}

std::string one_of(const Entry& e, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (e.value == o) return e.value;
  std::string msg = "key '" + e.key + "' must be one of";
  for (const char* o : options) msg += std::string(" ") + o;
  throw ConfigError(e.line, msg + ", got '" + e.value + "'");
}

using Setter = std::function<void(Scenario&, const Entry&)>;
using KeyTable = std::map<std::string, Setter>;

template <class Get>
void add_flow_config_keys(KeyTable& t, Get get) {
  t["dt"] = [get](Scenario& s, const Entry& e) { get(s).dt = to_double(e); };
  t["T"] = [get](Scenario& s, const Entry& e) { get(s).T = to_double(e); };
  t["stride"] = [get](Scenario& s, const Entry& e) { get(s).stride = static_cast<int>(to_integer(e)); };
  t["newton_tol"] = [get](Scenario& s, const Entry& e) { get(s).newton_tol = to_double(e); };
  t["newton_max"] = [get](Scenario& s, const Entry& e) { get(s).newton_max = static_cast<int>(to_integer(e)); };
  t["positivity_floor"] = [get](Scenario& s, const Entry& e) { get(s).positivity_floor = to_double(e); };
  t["form"] = [get](Scenario& s, const Entry& e) {
    get(s).form = one_of(e, {"pme", "conformal"}) == "pme" ? FlowForm::pme : FlowForm::conformal;
  };
}

const std::map<std::string, KeyTable>& grammar() {
  static const std::map<std::string, KeyTable> g = [] {
    std::map<std::string, KeyTable> g;
    auto& top = g[""];
    top["name"] = [](Scenario& s, const Entry& e) { s.name = e.value; };
    top["command"] = [](Scenario& s, const Entry& e) {
      try {
        s.command = command_from_string(e.value);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(e.line, ex.what());
      }
    };
    top["seed"] = [](Scenario& s, const Entry& e) { s.seed = static_cast<std::uint64_t>(to_integer(e)); };

    auto& model = g["model"];
    model["profile"] = [](Scenario& s, const Entry& e) {
      try {
        s.model.profile = profile_family_from_string(e.value);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(e.line, ex.what());
      }
    };
    model["n"] = [](Scenario& s, const Entry& e) { s.model.n = static_cast<int>(to_integer(e)); };
    model["h"] = [](Scenario& s, const Entry& e) { s.model.h = to_double(e); };
    model["N"] = [](Scenario& s, const Entry& e) { s.model.N = static_cast<int>(to_integer(e)); };
    model["mode"] = [](Scenario& s, const Entry& e) {
      s.model.mode = one_of(e, {"geometric", "coefficient"}) == "geometric" ? ModelMode::geometric
                                                                             : ModelMode::coefficient;
    };
    model["r0"] = [](Scenario& s, const Entry& e) { s.model.r0 = one_of(e, {"zero", "gaussian", "compact"}); };
    model["r0_amplitude"] = [](Scenario& s, const Entry& e) { s.model.r0_amplitude = to_double(e); };
    model["r0_width"] = [](Scenario& s, const Entry& e) { s.model.r0_width = to_double(e); };
    model["curvature"] = [](Scenario& s, const Entry& e) { s.model.curvature = one_of(e, {"gaussian", "compact"}); };
    model["curvature_amplitude"] = [](Scenario& s, const Entry& e) { s.model.curvature_amplitude = to_double(e); };
    model["curvature_width"] = [](Scenario& s, const Entry& e) { s.model.curvature_width = to_double(e); };
    model["table"] = [](Scenario& s, const Entry& e) { s.model.table = e.value; };

    auto& geo = g["geometry"];
    geo["bishop_radii"] = [](Scenario& s, const Entry& e) { s.geometry.bishop_radii = to_list(e); };
    geo["identity_tol"] = [](Scenario& s, const Entry& e) { s.geometry.identity_tol = to_double(e); };

    auto& poi = g["poisson"];
    poi["radii"] = [](Scenario& s, const Entry& e) { s.poisson.radii = to_list(e); };
    poi["tol"] = [](Scenario& s, const Entry& e) { s.poisson.tol = to_double(e); };
    poi["delta_fraction"] = [](Scenario& s, const Entry& e) { s.poisson.delta_fraction = to_double(e); };
    poi["residual_tol"] = [](Scenario& s, const Entry& e) { s.poisson.residual_tol = to_double(e); };

    auto& flow = g["flow"];
    add_flow_config_keys(flow, [](Scenario& s) -> FlowConfig& { return s.flow.config; });
    flow["C"] = [](Scenario& s, const Entry& e) { s.flow.config.C = to_double(e); };
    flow["u0"] = [](Scenario& s, const Entry& e) {
      s.flow.u0 = one_of(e, {"one", "w", "barrier_plus", "barrier_minus", "bump"});
    };
    flow["u0_amplitude"] = [](Scenario& s, const Entry& e) { s.flow.u0_amplitude = to_double(e); };
    flow["radii"] = [](Scenario& s, const Entry& e) { s.flow.radii = to_list(e); };
    flow["tol"] = [](Scenario& s, const Entry& e) { s.flow.tol = to_double(e); };

    auto& st = g["stability"];
    add_flow_config_keys(st, [](Scenario& s) -> FlowConfig& { return s.stability.config; });
    st["R"] = [](Scenario& s, const Entry& e) { s.stability.R = to_double(e); };
    st["k"] = [](Scenario& s, const Entry& e) { s.stability.k = static_cast<int>(to_integer(e)); };
    st["amplitude"] = [](Scenario& s, const Entry& e) { s.stability.amplitude = to_double(e); };
    st["scaling_radii"] = [](Scenario& s, const Entry& e) { s.stability.scaling_radii = to_list(e); };
    st["slope_tol"] = [](Scenario& s, const Entry& e) { s.stability.slope_tol = to_double(e); };
    st["break_solver"] = [](Scenario& s, const Entry& e) { s.stability.break_solver = to_bool(e); };

    auto& dec = g["decay"];
    add_flow_config_keys(dec, [](Scenario& s) -> FlowConfig& { return s.decay.config; });
    dec.erase("T");  // horizon is t_probe
    dec["radii"] = [](Scenario& s, const Entry& e) { s.decay.radii = to_list(e); };
    dec["t_probe"] = [](Scenario& s, const Entry& e) { s.decay.t_probe = to_double(e); };
    dec["bump_amplitude"] = [](Scenario& s, const Entry& e) { s.decay.bump_amplitude = to_double(e); };

    auto& ric = g["riccati"];
    ric["fixture"] = [](Scenario& s, const Entry& e) { s.riccati.fixture = one_of(e, {"cylinder_bump", "none"}); };
    ric["a0"] = [](Scenario& s, const Entry& e) { s.riccati.a0 = to_double(e); };
    ric["case"] = [](Scenario& s, const Entry& e) {
      try {
        s.riccati.case_tag = riccati_case_from_string(e.value);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(e.line, ex.what());
      }
    };
    ric["V0"] = [](Scenario& s, const Entry& e) { s.riccati.V0 = to_double(e); };
    ric["residual_tol"] = [](Scenario& s, const Entry& e) { s.riccati.residual_tol = to_double(e); };
    ric["curvature_tol"] = [](Scenario& s, const Entry& e) { s.riccati.curvature_tol = to_double(e); };
    return g;
  }();
  return g;
}

// Range checks that need the whole file.
class Validator {
 public:
  Validator(const std::map<std::string, int>& lines, double h) : lines_(lines), h_(h) {}

  int line(const std::string& qualified) const {
    auto it = lines_.find(qualified);
    return it == lines_.end() ? 0 : it->second;
  }
  bool has(const std::string& qualified) const { return lines_.count(qualified) > 0; }
  void require(bool ok, const std::string& qualified, const std::string& what) const {
    if (!ok) throw ConfigError(line(qualified), what);
  }
  void radii(const std::vector<double>& r, const std::string& qualified, double extent, double margin = 0.0) const {
    for (std::size_t i = 0; i < r.size(); ++i) {
      require(r[i] > 0.0, qualified, "radii must be positive");
      require(r[i] + margin <= extent * (1 + 1e-12), qualified,
              "radius " + format17(r[i]) + (margin > 0 ? " (plus " + format17(margin) + ")" : std::string()) +
                  " exceeds the grid extent " + format17(extent));
      const double q = r[i] / h_;
      require(std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q), qualified,
              "radius " + format17(r[i]) + " is not a grid node");
      if (i > 0) require(r[i] > r[i - 1], qualified, "radii must be strictly increasing");
    }
  }
  void flow_config(const FlowConfig& c, const std::string& section) const {
    require(c.dt > 0.0, section + ".dt", "dt must be positive");
    require(c.T >= 0.0, section + ".T", "T must be nonnegative");
    require(c.stride >= 1, section + ".stride", "stride must be at least 1");
    require(c.newton_tol > 0.0, section + ".newton_tol", "newton_tol must be positive");
    require(c.newton_max >= 1, section + ".newton_max", "newton_max must be at least 1");
    require(c.positivity_floor > 0.0, section + ".positivity_floor", "positivity_floor must be positive");
  }

 private:
  const std::map<std::string, int>& lines_;
  double h_;
};

void validate_scenario(Scenario& s, const Validator& v) {
  auto& m = s.model;
  v.require(v.has(".command"), "", "missing required key 'command'");
  v.require(v.has("model.profile"), "", "missing required key 'profile' in [model]");
  v.require(m.n >= 3, "model.n", "n must be ≥ 3");
  v.require(m.h > 0.0, "model.h", "h must be positive");
  v.require(m.N >= 10, "model.N", "N must be at least 10");
  v.require(m.r0_width > 0.0, "model.r0_width", "r0_width must be positive");
  v.require(m.r0_amplitude >= 0.0, "model.r0_amplitude", "r0_amplitude must be nonnegative");
  v.require(m.curvature_width > 0.0, "model.curvature_width", "curvature_width must be positive");
  if (m.mode == ModelMode::geometric)
    v.require(!v.has("model.r0"), "model.r0", "r0 requires mode = coefficient");
  v.require(m.profile != ProfileFamily::tabulated || v.has("model.table"), "model.profile",
            "profile tabulated requires key 'table'");
  v.require(!v.has("model.table") || m.profile == ProfileFamily::tabulated, "model.table",
            "table requires profile = tabulated");
  const double extent = m.extent();
  // Only the sections that will run are range-checked.
  const auto active = [&](Command c) {
    return s.command == c || (s.command == Command::report && s.sections.count(to_string(c)));
  };

  v.radii(s.geometry.bishop_radii, "geometry.bishop_radii", extent);
  v.require(s.geometry.identity_tol > 0.0, "geometry.identity_tol", "identity_tol must be positive");

  if (active(Command::poisson)) {
    v.radii(s.poisson.radii, "poisson.radii", extent);
    v.require(s.poisson.tol > 0.0, "poisson.tol", "tol must be positive");
    v.require(s.poisson.delta_fraction > 0.0 && s.poisson.delta_fraction < 1.0, "poisson.delta_fraction",
              "delta_fraction must lie in (0, 1)");
  }

  // dt defaults to h
  if (!v.has("stability.dt")) s.stability.config.dt = m.h;
  if (!v.has("decay.dt")) s.decay.config.dt = m.h;
  if (!v.has("flow.dt")) s.flow.config.dt = m.h;
  if (active(Command::flow)) {
    v.flow_config(s.flow.config, "flow");
    v.require(s.flow.config.C >= 1.0, "flow.C", "C must be at least 1");
    v.radii(s.flow.radii, "flow.radii", extent);
    v.require(s.flow.tol > 0.0, "flow.tol", "tol must be positive");
  }
  if (active(Command::stability)) {
    v.flow_config(s.stability.config, "stability");
    v.radii({s.stability.R}, "stability.R", extent);
    v.require(s.stability.k == 0 || s.stability.k > 2.0 * (m.n + 2) / 4.0, "stability.k",
              "k must exceed 2 alpha = (n+2)/2");
    v.radii(s.stability.scaling_radii, "stability.scaling_radii", extent);
    v.require(s.stability.amplitude > -1.0, "stability.amplitude", "amplitude must exceed -1");
  }
  if (active(Command::decay)) {
    v.flow_config(s.decay.config, "decay");
    v.radii(s.decay.radii, "decay.radii", extent, 2.0);
    v.require(s.decay.t_probe > 0.0, "decay.t_probe", "t_probe must be positive");
  }
  if (active(Command::riccati)) {
    if (s.riccati.fixture == "cylinder_bump")
      v.require(m.n == 3, "riccati.fixture", "fixture cylinder_bump needs n = 3");
    else
      v.require(s.riccati.a0.has_value(), "riccati.fixture", "fixture = none requires key 'a0'");
    v.require(s.riccati.residual_tol > 0.0, "riccati.residual_tol", "residual_tol must be positive");
    v.require(s.riccati.curvature_tol > 0.0, "riccati.curvature_tol", "curvature_tol must be positive");
  }
}

}  // namespace

Scenario parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                           std::optional<Command> command) {
  Scenario s;
  s.source = text;
  std::map<std::string, int> lines;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty() || !grammar().count(section))
        throw ConfigError(lineno, "unknown section [" + section + "]");
      s.sections.insert(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value', got '" + line + "'");
    Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
    if (e.key.empty()) throw ConfigError(lineno, "missing key before '='");
    if (e.value.empty()) throw ConfigError(lineno, "missing value for key '" + e.key + "'");
    const auto& keys = grammar().at(section);
    auto it = keys.find(e.key);
    if (it == keys.end())
      throw ConfigError(lineno, "unknown key '" + e.key + "'" +
                                    (section.empty() ? std::string() : " in [" + section + "]"));
    const std::string qualified = section + "." + e.key;
    if (lines.count(qualified))
      throw ConfigError(lineno, "duplicate key '" + e.key + "' (first set on line " +
                                    std::to_string(lines[qualified]) + ")");
    lines[qualified] = lineno;
    it->second(s, e);
  }
  if (command) {
    if (lines.count(".command") && s.command != *command)
      throw ConfigError(lines[".command"], "config command '" + to_string(s.command) +
                                               "' does not match requested '" + to_string(*command) + "'");
    s.command = *command;
    lines.emplace(".command", 0);
  }
  if (!s.model.table.empty() && s.model.table.is_relative()) s.model.table = base_dir / s.model.table;
  validate_scenario(s, Validator(lines, s.model.h > 0.0 ? s.model.h : 1.0));
  return s;
}

Scenario parse_config(const std::filesystem::path& path, std::optional<Command> command) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path().empty() ? "." : path.parent_path(), command);
}

namespace {

std::function<double(double)> shape(const std::string& kind, double A, double w) {
  if (kind == "zero") return [](double) { return 0.0; };
  if (kind == "gaussian") return [A, w](double r) { return A * std::exp(-(r / w) * (r / w)); };
  // compact: C² bump A (1 - (r/w)^2)^3 on [0, w)
  return [A, w](double r) {
    if (r >= w) return 0.0;
    const double q = 1.0 - (r / w) * (r / w);
    return A * q * q * q;
  };
}

void read_table(const std::filesystem::path& path, int N, ProfileSpec& spec) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open table " + path.string());
  std::string header;
  std::getline(in, header);
  const bool with_fp = trim(header) == "r,f,fp";
  if (!with_fp && trim(header) != "r,f")
    throw std::invalid_argument("table header must be r,f or r,f,fp, got '" + trim(header) + "'");
  std::vector<double> f, fp;
  std::string row;
  while (std::getline(in, row)) {
    if (trim(row).empty()) continue;
    std::stringstream ss(row);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(to_double({"table", trim(cell), 0}));
    if (cells.size() != (with_fp ? 3u : 2u)) throw std::invalid_argument("table row has wrong arity: " + row);
    f.push_back(cells[1]);
    if (with_fp) fp.push_back(cells[2]);
  }
  if (static_cast<int>(f.size()) != N + 1)
    throw std::invalid_argument("table has " + std::to_string(f.size()) + " rows, grid needs " +
                                std::to_string(N + 1));
  spec.table_f = GridFunction(std::move(f));
  if (with_fp) spec.table_fp = GridFunction(std::move(fp));
}

}  // namespace

ManifoldModel build_model(const ModelConfig& mc) {
  ProfileSpec spec;
  spec.family = mc.profile;
  spec.n = mc.n;
  spec.h = mc.h;
  spec.N = mc.N;
  spec.mode = mc.mode;
  if (mc.profile == ProfileFamily::from_curvature)
    spec.curvature = shape(mc.curvature, mc.curvature_amplitude, mc.curvature_width);
  if (mc.profile == ProfileFamily::tabulated) read_table(mc.table, mc.N, spec);
  if (mc.mode == ModelMode::coefficient) {
    spec.coefficient_r0 = shape(mc.r0, mc.r0_amplitude, mc.r0_width);
    spec.require_nonnegative_r0 = true;
  }
  return build_profile(spec);
}

}  // namespace yamabe
