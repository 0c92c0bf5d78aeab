#include "yamabe/laplacian.hpp"

#include <cmath>
#include <string>

#include "yamabe/numerics.hpp"

namespace yamabe {

namespace {

// ∫ f^{n-1} over [r_j + a, r_j + b] ⊂ [r_j, r_{j+1}], f cubic-Hermite on the cell.
double warp_power_integral(const ManifoldModel& m, int j, double a, double b) {
  const double h = m.grid.h();
  const auto& gl = gauss_legendre4();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t q = 0; q < gl.x.size(); ++q) {
    const double s = mid + half * gl.x[q];
    const double f = hermite(m.f[j], m.fp[j], m.f[j + 1], m.fp[j + 1], h, s);
    acc += gl.w[q] * std::pow(f, m.n - 1);
  }
  return acc * half;
}

}  // namespace

RadialLaplacian::RadialLaplacian(const ManifoldModel& model) {
  const int N = model.grid.N();
  const double h = model.grid.h();
  const double omega = sphere_area(model.n);
  std::vector<double> face(N);  // face[i] = A_{i+1/2}
  for (int i = 0; i < N; ++i) {
    const double fm = hermite(model.f[i], model.fp[i], model.f[i + 1], model.fp[i + 1], h, 0.5 * h);
    face[i] = omega * std::pow(fm, model.n - 1);
  }
  volume_.assign(N + 1, 0.0);
  for (int i = 0; i <= N; ++i) {
    double v = 0.0;
    if (i > 0) v += warp_power_integral(model, i - 1, 0.5 * h, h);
    if (i < N) v += warp_power_integral(model, i, 0.0, 0.5 * h);
    volume_[i] = omega * v;
  }
  lower_.assign(N + 1, 0.0);
  upper_.assign(N + 1, 0.0);
  for (int i = 0; i <= N; ++i) {
    if (i > 0) lower_[i] = face[i - 1] / (h * volume_[i]);
    if (i < N) upper_[i] = face[i] / (h * volume_[i]);
  }
}

GridFunction RadialLaplacian::apply(const GridFunction& u) const {
  GridFunction out(u.size());
  for (int i = 0; i < N(); ++i) out[i] = apply_at(u, i);
  return out;
}

std::vector<double> TridiagonalOperator::apply(const std::vector<double>& u) const {
  const int M = last();
  std::vector<double> out(M + 1);
  for (int i = 0; i <= M; ++i) {
    double acc = diag[i] * u[i];
    if (i > 0) acc += sub[i] * u[i - 1];
    if (i < M) acc += super[i] * u[i + 1];
    out[i] = acc;
  }
  return out;
}

double TridiagonalOperator::row_norm(int i) const {
  return std::abs(sub[i]) + std::abs(diag[i]) + std::abs(super[i]);
}

void assert_m_matrix(const TridiagonalOperator& op) {
  const int M = op.last();
  double pivot = 0.0;
  for (int i = 0; i <= M; ++i) {
    if (op.sub[i] > 0.0 || op.super[i] > 0.0)
      throw NumericalError("conformal Laplacian is not a Z-matrix at row " + std::to_string(i));
    if (!(op.diag[i] > 0.0))
      throw NumericalError("conformal Laplacian has nonpositive diagonal at row " +
                           std::to_string(i));
    pivot = (i == 0) ? op.diag[0] : op.diag[i] - op.sub[i] * op.super[i - 1] / pivot;
    if (!(pivot > 0.0))
      throw NumericalError("conformal Laplacian is not an M-matrix (pivot " + std::to_string(pivot) +
                           " at row " + std::to_string(i) + "); R0 too negative");
  }
}

TridiagonalOperator assemble_conformal_laplacian(const ManifoldModel& model,
                                                 const RadialLaplacian& lap, int M) {
  if (M < 1 || M > model.grid.N()) throw std::invalid_argument("truncation index out of range");
  TridiagonalOperator op;
  op.cn = model.cn();
  op.sub.assign(M + 1, 0.0);
  op.diag.assign(M + 1, 0.0);
  op.super.assign(M + 1, 0.0);
  for (int i = 0; i < M; ++i) {
    op.sub[i] = -op.cn * lap.lower(i);
    op.super[i] = -op.cn * lap.upper(i);
    op.diag[i] = op.cn * (lap.lower(i) + lap.upper(i)) + model.R0[i];
  }
  op.diag[M] = 1.0;
  assert_m_matrix(op);
  return op;
}

TridiagonalOperator assemble_conformal_laplacian(const ManifoldModel& model, double R) {
  const int M = model.grid.index_of(R);
  return assemble_conformal_laplacian(model, RadialLaplacian(model), M);
}

namespace {

struct ThomasFactor {
  std::vector<double> c;  // modified super-diagonal
  std::vector<double> d;  // pivots

  explicit ThomasFactor(const TridiagonalOperator& op) {
    const int M = op.last();
    c.assign(M + 1, 0.0);
    d.assign(M + 1, 0.0);
    d[0] = op.diag[0];
    for (int i = 1; i <= M; ++i) {
      const double l = op.sub[i] / d[i - 1];
      d[i] = op.diag[i] - l * op.super[i - 1];
      if (d[i] == 0.0 || !std::isfinite(d[i]))
        throw NumericalError("singular pivot in tridiagonal solve at row " + std::to_string(i));
    }
  }

  std::vector<double> solve(const TridiagonalOperator& op, std::vector<double> b) const {
    const int M = op.last();
    for (int i = 1; i <= M; ++i) b[i] -= op.sub[i] / d[i - 1] * b[i - 1];
    std::vector<double> x(M + 1);
    x[M] = b[M] / d[M];
    for (int i = M - 1; i >= 0; --i) x[i] = (b[i] - op.super[i] * x[i + 1]) / d[i];
    return x;
  }
};

}  // namespace

std::vector<double> thomas_solve(const TridiagonalOperator& op, const std::vector<double>& rhs) {
  if (static_cast<int>(rhs.size()) != op.last() + 1) throw std::invalid_argument("rhs size mismatch");
  const ThomasFactor fac(op);
  auto x = fac.solve(op, rhs);
  const int M = op.last();
  std::vector<double> res(M + 1);
  for (int i = 0; i <= M; ++i) {
    long double acc = static_cast<long double>(rhs[i]) - static_cast<long double>(op.diag[i]) * x[i];
    if (i > 0) acc -= static_cast<long double>(op.sub[i]) * x[i - 1];
    if (i < M) acc -= static_cast<long double>(op.super[i]) * x[i + 1];
    res[i] = static_cast<double>(acc);
  }
  const auto dx = fac.solve(op, res);
  for (int i = 0; i <= M; ++i) x[i] += dx[i];
  return x;
}

double scaled_residual(const TridiagonalOperator& op, const std::vector<double>& u,
                       const std::vector<double>& rhs) {
  const auto Au = op.apply(u);
  double worst = 0.0;
  for (int i = 0; i <= op.last(); ++i) worst = std::max(worst, std::abs(Au[i] - rhs[i]) / op.row_norm(i));
  return worst;
}

GridFunction apply_conformal_laplacian(const ManifoldModel& model, const GridFunction& u) {
  const RadialLaplacian lap(model);
  const double cn = model.cn();
  GridFunction out(u.size());
  for (int i = 0; i < lap.N(); ++i) out[i] = -cn * lap.apply_at(u, i) + model.R0[i] * u[i];
  return out;
}

}  // namespace yamabe
