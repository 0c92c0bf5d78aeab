#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "yamabe/grid.hpp"

namespace yamabe {

enum class ModelMode { geometric, coefficient };

std::string to_string(ModelMode mode);

/// Warped product M = S^{n-1} x R_+ with g0 = dr^2 + f(r)^2 dσ^2, sampled on a
/// radial grid. In geometric mode R0 is the scalar curvature of g0; in
/// coefficient mode it is an independent nonnegative potential.
struct ManifoldModel {
  int n = 3;
  RadialGrid grid{0.01, 8};
  GridFunction f;
  GridFunction fp;
  GridFunction R0;
  ModelMode mode = ModelMode::geometric;

  double cn() const { return 4.0 * (n - 1) / (n - 2); }
};

enum class ProfileFamily { euclidean, sphere_cap, cylinder, from_curvature, tabulated };

std::string to_string(ProfileFamily family);
ProfileFamily profile_family_from_string(const std::string& name);

struct ProfileSpec {
  ProfileFamily family = ProfileFamily::euclidean;
  int n = 3;
  double h = 0.01;
  int N = 1000;
  /// from_curvature: K(r); f solves f'' = -K f, f(0)=0, f'(0)=1.
  std::function<double(double)> curvature;
  /// tabulated: f (and optionally f') on the grid nodes.
  std::optional<GridFunction> table_f;
  std::optional<GridFunction> table_fp;
  ModelMode mode = ModelMode::geometric;
  /// coefficient mode: R0(r) (or a table via coefficient_r0_table).
  std::function<double(double)> coefficient_r0;
  std::optional<GridFunction> coefficient_r0_table;
  /// Reject models whose R0 has negative entries.
  bool require_nonnegative_r0 = false;
};

struct CurvatureData {
  GridFunction K;
  GridFunction K1;
  GridFunction R0;
  GridFunction Rc_radial;
  GridFunction Rc_tangential;
};

/// Taylor coefficients of the odd warp f = r + c3 r^3 + c5 r^5 + c7 r^7 + ...
struct PoleSeries {
  double c3 = 0.0;
  double c5 = 0.0;
  double c7 = 0.0;
};

/// Radius below which 0/0 forms switch to their Taylor expansion.
inline double pole_radius(const RadialGrid& grid) { return 5.0 * grid.h(); }

ManifoldModel build_profile(const ProfileSpec& spec);

/// Checks the ManifoldModel invariants; throws std::invalid_argument.
void validate(const ManifoldModel& model, bool require_nonnegative_r0 = false);

/// Copy of `model` in coefficient mode with the given potential.
ManifoldModel with_coefficient_r0(const ManifoldModel& model, GridFunction R0);

PoleSeries pole_series(const ManifoldModel& model);

GridFunction radial_curvature(const ManifoldModel& model);
GridFunction tangent_curvature(const ManifoldModel& model);
GridFunction scalar_curvature_background(const ManifoldModel& model);
CurvatureData curvature_data(const ManifoldModel& model);

/// Area of the unit (n-1)-sphere, 2 π^{n/2} / Γ(n/2).
double sphere_area(int n);

/// ω_{n-1} ∫_0^R f^{n-1} dr by the composite trapezoid rule.
double volume_of_ball(const ManifoldModel& model, double R);

/// ∫_{B_R} g dμ with the same quadrature as volume_of_ball.
double ball_integral(const ManifoldModel& model, const GridFunction& g, double R);

struct BishopReport {
  bool applicable = false;
  bool passed = false;
  double max_ratio = 0.0;
  std::vector<double> radii;
  std::vector<double> ratios;
};

/// V(R) against the euclidean ball volume under the same quadrature.
BishopReport bishop_check(const ManifoldModel& model, const std::vector<double>& radii);

/// Writes geometry.csv (r,f,fp,K,K1,R0,Rc_r,Rc_t).
void write_geometry_csv(const std::string& path, const ManifoldModel& model,
                        const CurvatureData& curv);

}  // namespace yamabe
