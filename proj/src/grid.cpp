#include "yamabe/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace yamabe {

RadialGrid::RadialGrid(double h, int N) : h_(h), N_(N) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid spacing h must be > 0");
  if (N < 8) throw std::invalid_argument("grid node count N must be >= 8, got " + std::to_string(N));
}

int RadialGrid::index_of(double R) const {
  const double x = R / h_;
  const double i = std::round(x);
  if (std::abs(x - i) > 1e-9 * std::max(1.0, std::abs(x)) || i < 0 || i > N_) {
    throw std::invalid_argument("radius " + std::to_string(R) + " is not a node of the grid (h=" +
                                std::to_string(h_) + ", N=" + std::to_string(N_) + ")");
  }
  return static_cast<int>(i);
}

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double GridFunction::max() const {
  return values_.empty() ? -std::numeric_limits<double>::infinity()
                         : *std::max_element(values_.begin(), values_.end());
}

double GridFunction::min() const {
  return values_.empty() ? std::numeric_limits<double>::infinity()
                         : *std::min_element(values_.begin(), values_.end());
}

double GridFunction::sup_abs(int first, int last) const {
  if (values_.empty()) return 0.0;
  const int n = static_cast<int>(values_.size());
  if (last < 0 || last >= n) last = n - 1;
  first = std::max(first, 0);
  double s = 0.0;
  for (int i = first; i <= last; ++i) s = std::max(s, std::abs(values_[i]));
  return s;
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw std::invalid_argument("grid function size mismatch");
  GridFunction out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw std::invalid_argument("grid function size mismatch");
  GridFunction out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

GridFunction operator*(double s, const GridFunction& a) {
  GridFunction out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

}  // namespace yamabe
