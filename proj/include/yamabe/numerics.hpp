#pragma once

#include <span>
#include <vector>

#include "yamabe/grid.hpp"

namespace yamabe {

/// Symmetry of a radial function under r -> -r, used to build ghost values
/// at the pole. Smooth radial scalars are even; the warp f is odd.
enum class Parity { none, even, odd };

/// Finite-difference weights for the m-th derivative at x0 on nodes x
/// (Fornberg's recursion).
std::vector<double> fd_weights(double x0, std::span<const double> x, int m);

/// m-th derivative of u at every node with a (2*halfwidth+1)-point centered
/// stencil. Near the pole the stencil is completed with reflected ghosts
/// (parity even/odd) or shifted one-sided (none); near r = R it is shifted.
/// Differences are taken relative to the centre value, so constants map to
/// exact zeros.
GridFunction differentiate(const GridFunction& u, double h, int m, int halfwidth,
                           Parity parity);

/// m-th derivative at r = 0 of a function with the given parity, using the
/// symmetric stencil on nodes -p..p.
double derivative_at_pole(const GridFunction& u, double h, int m, int p, Parity parity);

/// Cubic Lagrange interpolation at r (4 nearest nodes; reflected ghosts at the
/// pole when parity is set, shifted window at the outer end).
double interpolate(const GridFunction& u, double h, double r, Parity parity);

/// Composite trapezoid of samples with spacing h over nodes [0, last].
double trapezoid(std::span<const double> y, double h, int last);

/// Gauss-Legendre nodes/weights on [-1, 1] (4 points).
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussRule& gauss_legendre4();

/// Cubic Hermite interpolant on [a, a+h] from values and slopes at both ends.
double hermite(double y0, double d0, double y1, double d1, double h, double s);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace yamabe
