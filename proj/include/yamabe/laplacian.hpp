#pragma once

#include <vector>

#include "yamabe/geometry.hpp"
#include "yamabe/grid.hpp"

namespace yamabe {

/// Finite-volume radial Laplacian of g0:
///   (Δu)_i = lower_i (u_{i-1} - u_i) + upper_i (u_{i+1} - u_i),
/// with lower_i = A_{i-1/2}/(h V_i), upper_i = A_{i+1/2}/(h V_i), face areas
/// A = ω f^{n-1} at the half nodes and cell volumes V_i = ω ∫ f^{n-1} over
/// [r_i - h/2, r_i + h/2] ∩ [0, R]. All weights are nonnegative, and the
/// weighted form V_i (Δu)_i is symmetric. lower_0 = 0 (the pole has no inner
/// face); the outer node is defined only when u continues past R, so
/// apply() leaves it at zero.
class RadialLaplacian {
 public:
  explicit RadialLaplacian(const ManifoldModel& model);

  int N() const { return static_cast<int>(lower_.size()) - 1; }
  double lower(int i) const { return lower_[i]; }
  double upper(int i) const { return upper_[i]; }
  double cell_volume(int i) const { return volume_[i]; }
  const std::vector<double>& cell_volumes() const { return volume_; }

  double apply_at(const GridFunction& u, int i) const {
    const double ui = u[i];
    double acc = upper_[i] * (u[i + 1] - ui);
    if (i > 0) acc += lower_[i] * (u[i - 1] - ui);
    return acc;
  }

  /// Δu at nodes 0..N-1; entry N is 0.
  GridFunction apply(const GridFunction& u) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> volume_;
};

/// Tridiagonal matrix with a Dirichlet closure in its last row.
struct TridiagonalOperator {
  std::vector<double> sub;    // sub[i] multiplies u[i-1]; sub[0] = 0
  std::vector<double> diag;
  std::vector<double> super;  // super[i] multiplies u[i+1]; super[last] = 0
  double cn = 0.0;
  bool neumann_at_pole = true;
  bool dirichlet_at_outer = true;

  int last() const { return static_cast<int>(diag.size()) - 1; }
  /// (A u)_i for i = 0..last (the last row returns u_last).
  std::vector<double> apply(const std::vector<double>& u) const;
  double row_norm(int i) const;
};

/// L u = -c_n Δu + R0 u on nodes 0..M-1 (M = R/h), Dirichlet row at M.
/// Throws NumericalError if the matrix is not a nonsingular M-matrix
/// (checked by sign pattern and positivity of every elimination pivot).
TridiagonalOperator assemble_conformal_laplacian(const ManifoldModel& model, double R);

/// Same operator assembled from a precomputed Laplacian.
TridiagonalOperator assemble_conformal_laplacian(const ManifoldModel& model,
                                                 const RadialLaplacian& lap, int M);

/// Checks the M-matrix property; throws NumericalError naming the row.
void assert_m_matrix(const TridiagonalOperator& op);

/// Thomas algorithm for the tridiagonal system, followed by one step of
/// iterative refinement with an extended-precision residual.
std::vector<double> thomas_solve(const TridiagonalOperator& op, const std::vector<double>& rhs);

/// max_i |(A u - b)_i| / row_norm_i.
double scaled_residual(const TridiagonalOperator& op, const std::vector<double>& u,
                       const std::vector<double>& rhs);

/// L u on nodes 0..N-1 of the full grid (entry N is 0).
GridFunction apply_conformal_laplacian(const ManifoldModel& model, const GridFunction& u);

}  // namespace yamabe
