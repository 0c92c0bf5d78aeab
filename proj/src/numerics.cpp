#include "yamabe/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace yamabe {

std::vector<double> fd_weights(double x0, std::span<const double> x, int m) {
  // Fornberg (1988), generation of finite difference formulas on arbitrary grids.
  const int n = static_cast<int>(x.size());
  if (m < 0 || n <= m) throw std::invalid_argument("fd_weights: need more nodes than derivative order");
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

namespace {

double ghost(const GridFunction& u, int j, Parity parity) {
  if (j >= 0) return u[j];
  switch (parity) {
    case Parity::even: return u[-j];
    case Parity::odd: return -u[-j];
    case Parity::none: break;
  }
  throw std::logic_error("ghost value requested without parity");
}

}  // namespace

GridFunction differentiate(const GridFunction& u, double h, int m, int halfwidth, Parity parity) {
  const int N = static_cast<int>(u.size()) - 1;
  const int w = halfwidth;
  if (N < 2 * w + 2) throw std::invalid_argument("differentiate: grid too small for stencil");
  GridFunction out(u.size());
  std::vector<double> x;
  const double scale = std::pow(h, -m);
  for (int i = 0; i <= N; ++i) {
    int lo = i - w;
    int hi = i + w;
    if (lo < 0 && parity == Parity::none) {
      lo = 0;
      hi = 2 * w + 1;
    } else if (hi > N) {
      hi = N;
      lo = N - 2 * w - 1;
    }
    x.clear();
    for (int j = lo; j <= hi; ++j) x.push_back(static_cast<double>(j - i));
    const auto wts = fd_weights(0.0, x, m);
    const double ui = u[i];
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += wts[j - lo] * (ghost(u, j, parity) - ui);
    out[i] = (m == 0 ? ui : acc * scale);
  }
  return out;
}

double derivative_at_pole(const GridFunction& u, double h, int m, int p, Parity parity) {
  if (parity == Parity::none) throw std::invalid_argument("derivative_at_pole needs a parity");
  std::vector<double> x;
  for (int j = -p; j <= p; ++j) x.push_back(static_cast<double>(j));
  const auto wts = fd_weights(0.0, x, m);
  double acc = 0.0;
  const double u0 = u[0];
  for (int j = -p; j <= p; ++j) acc += wts[j + p] * (ghost(u, j, parity) - u0);
  return acc * std::pow(h, -m);
}

double interpolate(const GridFunction& u, double h, double r, Parity parity) {
  const int N = static_cast<int>(u.size()) - 1;
  int i0 = static_cast<int>(std::floor(r / h));
  i0 = std::clamp(i0, 0, N - 1);
  int lo = i0 - 1;
  if (lo < 0 && parity == Parity::none) lo = 0;
  if (lo + 3 > N) lo = N - 3;
  const double s = r / h;
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    double L = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (b != a) L *= (s - (lo + b)) / static_cast<double>(a - b);
    }
    acc += L * ghost(u, lo + a, parity);
  }
  return acc;
}

double trapezoid(std::span<const double> y, double h, int last) {
  if (last <= 0) return 0.0;
  double s = 0.5 * (y[0] + y[last]);
  for (int i = 1; i < last; ++i) s += y[i];
  return s * h;
}

const GaussRule& gauss_legendre4() {
  static const GaussRule rule = [] {
    const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
    const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
    return GaussRule{{-b, -a, a, b}, {wb, wa, wa, wb}};
  }();
  return rule;
}

double hermite(double y0, double d0, double y1, double d1, double h, double s) {
  const double t = s / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("fit_slope needs >= 2 matching points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace yamabe
