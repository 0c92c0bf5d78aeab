#pragma once

#include <functional>
#include <string>

#include "yamabe/geometry.hpp"
#include "yamabe/grid.hpp"

namespace yamabe {

/// Schrödinger form of the radial conformal Laplacian. With k = (n-1)/2,
///   f^k L (f^{-k} V) = c_n (-V'' + P V),  P = Q + R0/c_n,
///   Q = k(k-1) (f'/f)^2 - k K.
/// For n != 3 Q is singular at the pole; nodes below 5h hold the formula
/// value and the pole node repeats node 1.
struct SchrodingerData {
  GridFunction Q;
  GridFunction P;
};
SchrodingerData potential_Q(const ManifoldModel& model);

/// V = f^{(n-1)/2} v.
GridFunction to_schrodinger(const GridFunction& v, const ManifoldModel& model);
/// v = f^{-(n-1)/2} V; the pole node (where f = 0) repeats node 1.
GridFunction from_schrodinger(const GridFunction& V, const ManifoldModel& model);

/// Regular solution of v'' + (n-1)(f'/f) v' = (R0/c_n) v with v(0) = v0,
/// v'(0) = v1, by RK4 from a series start at r = h. Smooth radial solutions
/// need v1 = 0; v1 != 0 is rejected unless singular_start is set.
GridFunction solve_radial_yamabe_ode(const ManifoldModel& model, double v0, double v1,
                                     bool singular_start = false);

enum class RiccatiCase {
  case1,  // a' = -a^2 + P,  V = V0 exp(+∫a)
  case2,  // a' = +a^2 + P,  V = V0 exp(-∫a)
};
std::string to_string(RiccatiCase c);
RiccatiCase riccati_case_from_string(const std::string& s);

struct RiccatiSolution {
  GridFunction a;
  RiccatiCase case_tag = RiccatiCase::case1;
  int start_index = 5;  // a(r_start) = a0
  int last_index = 0;   // last node reached (N unless blown up)
  bool blew_up = false;
  double blowup_radius = 0.0;
  GridFunction integral;  // ∫ a from 0 (n = 3) or from r_start
  double residual = 0.0;  // sup |a' - (∓a^2 + P)| with a' from 6th-order differences
  double asymptote = 0.0;
  bool asymptote_ok = false;
  double drift = 0.0;
};

/// RK4 (four substeps per cell) from r = 5h; for n = 3 the nodes below 5h
/// are filled by a Taylor expansion about 5h.
RiccatiSolution integrate_riccati(const ManifoldModel& model, double a0, RiccatiCase case_tag);

/// Same, with a caller-supplied potential.
RiccatiSolution integrate_riccati(const ManifoldModel& model, const GridFunction& P, double a0,
                                  RiccatiCase case_tag);

struct YamabeFactor {
  GridFunction V;
  GridFunction v;
  bool pole_end = false;  // v -> ∞ at r = 0: the pole is an asymptotic end
};

/// V = V0 exp(±∫a), v = from_schrodinger(V). Refuses solutions without the
/// asymptotic condition.
YamabeFactor yamabe_factor_from_riccati(const ManifoldModel& model, const RiccatiSolution& sol, double V0);

/// n = 3, f = tanh r, V = 2 + e^{-r}, coefficient R0 = c_n (V''/V - Q).
/// Then a* = V'/V solves case 1 and v = V / tanh r has zero scalar curvature.
struct CylinderBumpFixture {
  ManifoldModel model;
  std::function<double(double)> a_star;
  std::function<double(double)> V;
  std::function<double(double)> v;
  double asymptote = 2.0 / 3.0;
};
CylinderBumpFixture build_cylinder_bump_fixture(double h, int N);

/// (f^k / c_n) L (f^{-k} V) with the conformal-Laplacian stencil, and
/// -V'' + P V with second-order central differences. Interior nodes only.
struct ConjugationPair {
  GridFunction conformal_route;
  GridFunction schrodinger_route;
};
ConjugationPair conjugation_routes(const ManifoldModel& model, const GridFunction& V);

void write_riccati_csv(const std::string& path, const ManifoldModel& model, const SchrodingerData& sd,
                       const RiccatiSolution& sol, const YamabeFactor& factor, const GridFunction& R_of_gv);

}  // namespace yamabe
