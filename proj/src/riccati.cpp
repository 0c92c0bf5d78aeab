#include "yamabe/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "yamabe/io.hpp"
#include "yamabe/laplacian.hpp"
#include "yamabe/numerics.hpp"

namespace yamabe {

namespace {

double half_dim(const ManifoldModel& model) { return 0.5 * (model.n - 1); }

Parity potential_parity(const ManifoldModel& model) { return model.n == 3 ? Parity::even : Parity::none; }

constexpr int kStart = 5;  // Riccati start node, r = 5h

}  // namespace

SchrodingerData potential_Q(const ManifoldModel& model) {
  const auto K = radial_curvature(model);
  const double k = half_dim(model);
  const int N = model.grid.N();
  SchrodingerData sd;
  sd.Q = GridFunction(model.grid.size());
  for (int i = 0; i <= N; ++i) {
    double q = -k * K[i];
    if (model.n != 3 && i > 0) {
      const double ratio = model.fp[i] / model.f[i];
      q += k * (k - 1.0) * ratio * ratio;
    }
    sd.Q[i] = q;
  }
  if (model.n != 3) sd.Q[0] = sd.Q[1];
  sd.P = sd.Q;
  const double cn = model.cn();
  for (int i = 0; i <= N; ++i) sd.P[i] += model.R0[i] / cn;
  return sd;
}

GridFunction to_schrodinger(const GridFunction& v, const ManifoldModel& model) {
  if (v.size() != model.grid.size()) throw std::invalid_argument("to_schrodinger: size mismatch");
  const double k = half_dim(model);
  GridFunction V = v;
  for (std::size_t i = 0; i < V.size(); ++i) V[i] *= std::pow(model.f[i], k);
  return V;
}

GridFunction from_schrodinger(const GridFunction& V, const ManifoldModel& model) {
  if (V.size() != model.grid.size()) throw std::invalid_argument("from_schrodinger: size mismatch");
  const double k = half_dim(model);
  GridFunction v = V;
  for (std::size_t i = 1; i < v.size(); ++i) v[i] /= std::pow(model.f[i], k);
  v[0] = v[1];
  return v;
}

GridFunction solve_radial_yamabe_ode(const ManifoldModel& model, double v0, double v1, bool singular_start) {
  if (!(v0 > 0.0)) throw std::invalid_argument("radial ODE: v(0) must be positive");
  if (v1 != 0.0 && !singular_start)
    throw std::invalid_argument("radial ODE: a smooth radial solution needs v'(0) = 0 (pass singular_start to override)");
  const auto& g = model.grid;
  const double h = g.h();
  const int N = g.N();
  const int n = model.n;
  const double cn = model.cn();

  auto coeffs = [&](double r, double& p, double& q) {
    const int i = std::clamp(static_cast<int>(std::floor(r / h)), 0, N - 1);
    const double f = hermite(model.f[i], model.fp[i], model.f[i + 1], model.fp[i + 1], h, r - g.r(i));
    p = (n - 1) * interpolate(model.fp, h, r, Parity::even) / f;
    q = interpolate(model.R0, h, r, Parity::even) / cn;
  };

  GridFunction v(g.size());
  v[0] = v0;
  double y = 0.0, w = 0.0;
  if (singular_start) {
    y = v0 + v1 * h;
    w = v1;
  } else {
    // v = v0 + b2 r^2 + b4 r^4 from the pole limit of the equation
    const double c3 = pole_series(model).c3;
    const double q0 = model.R0[0] / cn;
    const double q2 = derivative_at_pole(model.R0, h, 2, 3, Parity::even) / (2.0 * cn);
    const double p1 = 2.0 * (n - 1) * c3;
    const double b2 = q0 * v0 / (2.0 * n);
    const double b4 = (q0 * b2 + q2 * v0 - 2.0 * p1 * b2) / (4.0 * (n + 2));
    y = v0 + b2 * h * h + b4 * std::pow(h, 4);
    w = 2.0 * b2 * h + 4.0 * b4 * std::pow(h, 3);
  }
  v[1] = y;

  auto rhs = [&](double r, double yy, double ww, double& dy, double& dw) {
    double p, q;
    coeffs(r, p, q);
    dy = ww;
    dw = q * yy - p * ww;
  };
  for (int i = 1; i < N; ++i) {
    const double r = g.r(i);
    double k1y, k1w, k2y, k2w, k3y, k3w, k4y, k4w;
    rhs(r, y, w, k1y, k1w);
    rhs(r + 0.5 * h, y + 0.5 * h * k1y, w + 0.5 * h * k1w, k2y, k2w);
    rhs(r + 0.5 * h, y + 0.5 * h * k2y, w + 0.5 * h * k2w, k3y, k3w);
    rhs(r + h, y + h * k3y, w + h * k3w, k4y, k4w);
    y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    w += h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
    if (!std::isfinite(y) || std::abs(y) > 1e100)
      throw NumericalError("radial ODE: solution blows up near r = " + std::to_string(g.r(i + 1)));
    v[i + 1] = y;
  }
  return v;
}

std::string to_string(RiccatiCase c) { return c == RiccatiCase::case1 ? "case1" : "case2"; }

RiccatiCase riccati_case_from_string(const std::string& s) {
  if (s == "case1" || s == "1") return RiccatiCase::case1;
  if (s == "case2" || s == "2") return RiccatiCase::case2;
  throw std::invalid_argument("unknown Riccati case '" + s + "'");
}

RiccatiSolution integrate_riccati(const ManifoldModel& model, double a0, RiccatiCase case_tag) {
  return integrate_riccati(model, potential_Q(model).P, a0, case_tag);
}

RiccatiSolution integrate_riccati(const ManifoldModel& model, const GridFunction& P, double a0,
                                  RiccatiCase case_tag) {
  if (!std::isfinite(a0)) throw std::invalid_argument("Riccati: a0 must be finite");
  const auto& g = model.grid;
  const double h = g.h();
  const int N = g.N();
  if (N < 4 * kStart) throw std::invalid_argument("Riccati: grid too short");
  const double s = case_tag == RiccatiCase::case1 ? -1.0 : 1.0;
  const Parity parity = potential_parity(model);
  // For n != 3, P ~ k(k-1)/r^2 near the pole: interpolate r^2 P instead.
  GridFunction G = P;
  if (model.n != 3)
    for (int i = 0; i <= N; ++i) G[i] *= g.r(i) * g.r(i);
  auto P_at = [&](double r) {
    return model.n == 3 ? interpolate(P, h, r, parity) : interpolate(G, h, r, Parity::none) / (r * r);
  };
  auto rhs = [&](double r, double a) { return s * a * a + P_at(r); };

  RiccatiSolution sol;
  sol.case_tag = case_tag;
  sol.start_index = kStart;
  sol.a = GridFunction(g.size(), std::numeric_limits<double>::quiet_NaN());
  sol.a[kStart] = a0;
  sol.last_index = N;
  double a = a0;
  const int sub = 4;
  const double dr = h / sub;
  for (int i = kStart; i < N && !sol.blew_up; ++i) {
    for (int j = 0; j < sub; ++j) {
      const double r = g.r(i) + j * dr;
      const double k1 = rhs(r, a);
      const double k2 = rhs(r + 0.5 * dr, a + 0.5 * dr * k1);
      const double k3 = rhs(r + 0.5 * dr, a + 0.5 * dr * k2);
      const double k4 = rhs(r + dr, a + dr * k3);
      a += dr / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (!std::isfinite(a) || std::abs(a) > 1e100) {
        sol.blew_up = true;
        sol.blowup_radius = r + dr;
        sol.last_index = i;
        break;
      }
    }
    if (!sol.blew_up) sol.a[i + 1] = a;
  }

  // Nodes below the start: Taylor expansion about r_start (n = 3), or
  // placeholders (the potential is singular at the pole otherwise).
  const int first = model.n == 3 ? 0 : kStart;
  if (model.n == 3) {
    const double r0 = g.r(kStart);
    const auto dP = differentiate(P, h, 1, 3, parity);
    const auto d2P = differentiate(P, h, 2, 3, parity);
    const double a1 = s * a0 * a0 + P[kStart];
    const double a2 = 2 * s * a0 * a1 + dP[kStart];
    const double a3 = 2 * s * (a1 * a1 + a0 * a2) + d2P[kStart];
    for (int i = 0; i < kStart; ++i) {
      const double d = g.r(i) - r0;
      sol.a[i] = a0 + d * (a1 + d * (a2 / 2 + d * a3 / 6));
    }
  } else {
    for (int i = 0; i < kStart; ++i) sol.a[i] = a0;
  }

  // ODE residual with 6th-order differences on the integrated range.
  const int last = sol.last_index;
  {
    GridFunction seg(static_cast<std::size_t>(last - kStart + 1));
    for (int i = kStart; i <= last; ++i) seg[i - kStart] = sol.a[i];
    if (seg.size() >= 8) {
      const auto da = differentiate(seg, h, 1, 3, Parity::none);
      for (int i = kStart; i <= last; ++i)
        sol.residual = std::max(sol.residual, std::abs(da[i - kStart] - (s * sol.a[i] * sol.a[i] + P[i])));
    }
  }

  // ∫ a: cumulative trapezoid with the endpoint correction -h^2/12 [a']
  sol.integral = GridFunction(g.size(), std::numeric_limits<double>::quiet_NaN());
  auto slope = [&](int i) { return s * sol.a[i] * sol.a[i] + P[i]; };
  double acc = 0.0;
  for (int i = 0; i <= first; ++i) sol.integral[i] = 0.0;
  for (int i = first + 1; i <= last; ++i) {
    acc += 0.5 * h * (sol.a[i - 1] + sol.a[i]);
    sol.integral[i] = acc - h * h / 12.0 * (slope(i) - slope(first));
  }

  if (!sol.blew_up) {
    const double k = half_dim(model);
    const double sigma = -s;  // case 1: exp(+∫a)
    const int w0 = static_cast<int>(std::ceil(0.8 * N));
    double lo = INFINITY, hi = -INFINITY, mean = 0.0;
    for (int i = w0; i <= N; ++i) {
      const double q = std::pow(model.f[i], -k) * std::exp(sigma * sol.integral[i]);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
      mean += q;
    }
    mean /= (N - w0 + 1);
    sol.asymptote = std::pow(model.f[N], -k) * std::exp(sigma * sol.integral[N]);
    sol.drift = (hi - lo) / std::abs(mean);
    sol.asymptote_ok = lo > 0.0 && std::isfinite(hi) && sol.drift < 0.01;
  }
  return sol;
}

YamabeFactor yamabe_factor_from_riccati(const ManifoldModel& model, const RiccatiSolution& sol, double V0) {
  if (!sol.asymptote_ok)
    throw NumericalError("Riccati solution does not satisfy the asymptotic condition; no factor built");
  if (!(V0 > 0.0)) throw std::invalid_argument("V0 must be positive");
  const double sigma = sol.case_tag == RiccatiCase::case1 ? 1.0 : -1.0;
  YamabeFactor out;
  out.V = GridFunction(model.grid.size());
  const int first = model.n == 3 ? 0 : sol.start_index;
  for (int i = 0; i <= model.grid.N(); ++i) {
    const int j = std::max(i, first);
    out.V[i] = V0 * std::exp(sigma * sol.integral[j]);
  }
  out.v = from_schrodinger(out.V, model);
  out.pole_end = true;  // V(0) > 0 and f(0) = 0
  for (int i = 1; i <= model.grid.N(); ++i)
    if (!(out.v[i] > 0.0)) throw NumericalError("Yamabe factor is not positive at node " + std::to_string(i));
  return out;
}

CylinderBumpFixture build_cylinder_bump_fixture(double h, int N) {
  ProfileSpec spec;
  spec.family = ProfileFamily::cylinder;
  spec.n = 3;
  spec.h = h;
  spec.N = N;
  spec.mode = ModelMode::coefficient;
  const double cn = 8.0;
  // V''/V = e^{-r}/(2+e^{-r}), Q = -2 sech^2 r
  spec.coefficient_r0 = [cn](double r) {
    const double e = std::exp(-r);
    const double sech = 1.0 / std::cosh(r);
    return cn * (e / (2.0 + e) + 2.0 * sech * sech);
  };
  CylinderBumpFixture fx;
  fx.model = build_profile(spec);
  fx.a_star = [](double r) {
    const double e = std::exp(-r);
    return -e / (2.0 + e);
  };
  fx.V = [](double r) { return 2.0 + std::exp(-r); };
  fx.v = [](double r) { return (2.0 + std::exp(-r)) / std::tanh(r); };
  return fx;
}

ConjugationPair conjugation_routes(const ManifoldModel& model, const GridFunction& V) {
  const auto v = from_schrodinger(V, model);
  const auto Lv = apply_conformal_laplacian(model, v);
  const auto sd = potential_Q(model);
  const double k = half_dim(model);
  const double h = model.grid.h();
  const double cn = model.cn();
  ConjugationPair out;
  out.conformal_route = GridFunction(V.size());
  out.schrodinger_route = GridFunction(V.size());
  for (int i = 1; i < model.grid.N(); ++i) {
    out.conformal_route[i] = std::pow(model.f[i], k) * Lv[i] / cn;
    out.schrodinger_route[i] = -(V[i + 1] - 2.0 * V[i] + V[i - 1]) / (h * h) + sd.P[i] * V[i];
  }
  return out;
}

void write_riccati_csv(const std::string& path, const ManifoldModel& model, const SchrodingerData& sd,
                       const RiccatiSolution& sol, const YamabeFactor& factor, const GridFunction& R_of_gv) {
  CsvWriter csv(path, {"r", "Q", "P", "a", "V", "v", "R_of_gv"});
  for (int i = 0; i <= model.grid.N(); ++i)
    csv.row({model.grid.r(i), sd.Q[i], sd.P[i], sol.a[i], factor.V[i], factor.v[i], R_of_gv[i]});
}

}  // namespace yamabe
