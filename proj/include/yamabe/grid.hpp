#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace yamabe {

/// Failure of a numerical postcondition (non-convergence, broken maximum
/// principle, blow-up). Input validation errors use std::invalid_argument.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform radial grid r_i = i*h, i = 0..N.
class RadialGrid {
 public:
  RadialGrid(double h, int N);

  double h() const { return h_; }
  int N() const { return N_; }
  std::size_t size() const { return static_cast<std::size_t>(N_) + 1; }
  double r(int i) const { return i * h_; }
  double extent() const { return N_ * h_; }

  /// Node index of radius R; throws if R is not a grid node (1e-9 relative).
  int index_of(double R) const;

  /// Coarsened/refined copy covering the same extent with h/factor.
  RadialGrid refined(int factor) const { return RadialGrid(h_ / factor, N_ * factor); }

 private:
  double h_;
  int N_;
};

/// Real values sampled on a RadialGrid.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(std::size_t n, double value = 0.0) : values_(n, value) {}
  explicit GridFunction(std::vector<double> values) : values_(std::move(values)) {}
  GridFunction(std::initializer_list<double> values) : values_(values) {}

  template <class Fn>
  static GridFunction sample(const RadialGrid& grid, Fn&& fn) {
    GridFunction g(grid.size());
    for (int i = 0; i <= grid.N(); ++i) g[i] = fn(grid.r(i));
    return g;
  }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  std::span<const double> view() const { return values_; }
  std::span<double> view() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool all_finite() const;
  double max() const;
  double min() const;
  /// sup |g_i| over the index range [first, last] (inclusive, clamped).
  double sup_abs(int first = 0, int last = -1) const;

  friend bool operator==(const GridFunction&, const GridFunction&) = default;

 private:
  std::vector<double> values_;
};

GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double s, const GridFunction& a);

}  // namespace yamabe
