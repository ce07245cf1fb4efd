#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "agmx/core.hpp"
#include "agmx/rng.hpp"

namespace agmx {

// ---------------------------------------------------------------------------
// Extreme eigenvalues of a symmetric PSD operator.

struct EigenBounds {
  double min = 0.0;
  double max = 0.0;
  long iterations = 0;
};

/// Thrown when power iteration hits its cap; carries whatever it had.
struct EigenEstimateError : NumericError {
  EigenEstimateError(const std::string& what, double partial_min, double partial_max)
      : NumericError(what), partial_min(partial_min), partial_max(partial_max) {}
  double partial_min;
  double partial_max;
};

using MatVec = std::function<Vector(const Vector&)>;

/// Power iteration for lambda_max, then power iteration on lambda_max*I - A for
/// lambda_min. Both stop on the eigen-residual |Av - theta v| <= tol*theta,
/// which bounds the eigenvalue error by the same amount.
inline EigenBounds estimate_extreme_eigs(const MatVec& matvec, Index dim, double tol,
                                         long max_iter = 200000) {
  if (dim <= 0) throw InputError("estimate_extreme_eigs: dim must be positive");
  if (!(tol > 0.0)) throw ParameterError("estimate_extreme_eigs: tol must be positive");

  Rng rng(0x5EEDULL);
  EigenBounds out;

  Vector v = rng.normal_vector(dim).normalized();
  double theta = 0.0;
  bool converged = false;
  for (long it = 0; it < max_iter; ++it) {
    Vector w = matvec(v);
    require_same_dim(dim, w, "matvec output");
    theta = v.dot(w);
    ++out.iterations;
    const double wn = w.norm();
    if (wn == 0.0) {
      theta = 0.0;
      converged = true;
      break;
    }
    const double residual = (w - theta * v).norm();
    if (residual <= tol * std::abs(theta)) {
      converged = true;
      break;
    }
    v = w / wn;
  }
  out.max = theta;
  if (!converged) throw EigenEstimateError("lambda_max did not converge", 0.0, theta);
  if (out.max == 0.0) return out;

  const double floor = 1e-14 * out.max;
  v = rng.normal_vector(dim).normalized();
  converged = false;
  for (long it = 0; it < max_iter; ++it) {
    Vector w = matvec(v);
    theta = v.dot(w);
    ++out.iterations;
    const double residual = (w - theta * v).norm();
    if (residual <= tol * std::abs(theta) + floor) {
      converged = true;
      break;
    }
    Vector shifted = out.max * v - w;
    const double sn = shifted.norm();
    if (sn == 0.0) {  // every eigenvalue equals lambda_max
      theta = out.max;
      converged = true;
      break;
    }
    v = shifted / sn;
  }
  out.min = theta;
  if (!converged) throw EigenEstimateError("lambda_min did not converge", theta, out.max);
  return out;
}

// ---------------------------------------------------------------------------
// Quadratics.

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// f(x) = 1/2 (x - c)^T A (x - c).
struct QuadraticObjective {
  SparseMatrix matrix;
  Vector center;
  double mu = 0.0;
  double lipschitz = 0.0;

  double value(const Vector& x) const {
    const Vector d = x - center;
    return 0.5 * d.dot(matrix * d);
  }
  Vector gradient(const Vector& x) const { return matrix * (x - center); }
  Index dim() const { return center.size(); }

  Objective objective() const {
    return Objective(*this, Constants{mu, lipschitz, 0.0}, center);
  }
};

/// Condition number of the n x n interior 5-point Dirichlet Laplacian.
inline double laplacian2d_kappa(int n) {
  const double h = 1.0 / (n + 1);
  const double t = std::numbers::pi * h / 2.0;
  const double c = std::cos(t) / std::sin(t);
  return c * c;
}

/// Grid size whose Laplacian condition number is closest to `kappa`.
inline int laplacian2d_grid_for_kappa(double kappa) {
  if (!(kappa >= 1.0)) throw ParameterError("kappa must be >= 1");
  const int guess = std::max(
      1, static_cast<int>(std::lround(std::numbers::pi / (2.0 * std::atan(1.0 / std::sqrt(kappa))))) - 1);
  int best = guess;
  for (int n = std::max(1, guess - 2); n <= guess + 2; ++n) {
    if (std::abs(laplacian2d_kappa(n) - kappa) < std::abs(laplacian2d_kappa(best) - kappa)) best = n;
  }
  return best;
}

/// 5-point finite-difference Laplacian on the unit square, n x n interior
/// points, Dirichlet boundary, centered at 0. Extreme eigenvalues are exact:
/// (8/h^2) sin^2(pi h/2) and (8/h^2) cos^2(pi h/2).
inline QuadraticObjective build_laplacian2d(int n) {
  if (n <= 0) throw ParameterError("laplacian2d: n must be >= 1");
  const double h = 1.0 / (n + 1);
  const double inv_h2 = 1.0 / (h * h);
  const Index dim = static_cast<Index>(n) * n;

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(5 * dim));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Index row = static_cast<Index>(i) * n + j;
      entries.emplace_back(row, row, 4.0 * inv_h2);
      if (i > 0) entries.emplace_back(row, row - n, -inv_h2);
      if (i + 1 < n) entries.emplace_back(row, row + n, -inv_h2);
      if (j > 0) entries.emplace_back(row, row - 1, -inv_h2);
      if (j + 1 < n) entries.emplace_back(row, row + 1, -inv_h2);
    }
  }
  QuadraticObjective q;
  q.matrix.resize(dim, dim);
  q.matrix.setFromTriplets(entries.begin(), entries.end());
  q.matrix.makeCompressed();
  q.center = Vector::Zero(dim);
  const double t = std::numbers::pi * h / 2.0;
  q.mu = 8.0 * inv_h2 * std::sin(t) * std::sin(t);
  q.lipschitz = 8.0 * inv_h2 * std::cos(t) * std::cos(t);
  return q;
}

/// diag(eigenvalues), centered at `center`. Exact mu and L.
inline QuadraticObjective build_diagonal_quadratic(const Vector& eigenvalues, Vector center) {
  require_same_dim(eigenvalues.size(), center, "center");
  if (eigenvalues.size() == 0) throw ParameterError("diagonal quadratic needs dim >= 1");
  if (!(eigenvalues.minCoeff() > 0.0)) throw ParameterError("eigenvalues must be positive");
  QuadraticObjective q;
  const Index dim = eigenvalues.size();
  q.matrix.resize(dim, dim);
  std::vector<Eigen::Triplet<double>> entries;
  for (Index i = 0; i < dim; ++i) entries.emplace_back(i, i, eigenvalues[i]);
  q.matrix.setFromTriplets(entries.begin(), entries.end());
  q.center = std::move(center);
  q.mu = eigenvalues.minCoeff();
  q.lipschitz = eigenvalues.maxCoeff();
  return q;
}

// ---------------------------------------------------------------------------
// Piecewise smooth test function:
//   f(x) = sum_i h(a_i^T x - b_i) + mu/2 |x|^2,  h(s) = s^2/2 exp(-eps/s) for s > 0.

struct PiecewiseSmoothObjective {
  Eigen::MatrixXd A;  // d x p, column i is a_i
  Vector b;
  double mu = 1.0;
  double eps = 1e-6;
  double lipschitz = 1e4;

  // exp(-t) is zero in double precision beyond this.
  static constexpr double kExpCutoff = 708.0;

  static double h(double s, double eps) {
    if (s <= 0.0) return 0.0;
    const double t = eps / s;
    if (t > kExpCutoff) return 0.0;
    return 0.5 * s * s * std::exp(-t);
  }
  static double h_prime(double s, double eps) {
    if (s <= 0.0) return 0.0;
    const double t = eps / s;
    if (t > kExpCutoff) return 0.0;
    return std::exp(-t) * (s + 0.5 * eps);
  }
  static double h_second(double s, double eps) {
    if (s <= 0.0) return 0.0;
    const double t = eps / s;
    if (t > kExpCutoff) return 0.0;
    // Exact value is 1 - O(t^3); rounding can land one ulp above 1.
    return std::min(1.0, std::exp(-t) * (1.0 + t + 0.5 * t * t));
  }

  double value(const Vector& x) const {
    const Vector s = A.transpose() * x - b;
    double sum = 0.0;
    for (Index i = 0; i < s.size(); ++i) sum += h(s[i], eps);
    return sum + 0.5 * mu * x.squaredNorm();
  }
  Vector gradient(const Vector& x) const {
    const Vector s = A.transpose() * x - b;
    Vector hp(s.size());
    for (Index i = 0; i < s.size(); ++i) hp[i] = h_prime(s[i], eps);
    Vector g = A * hp;
    g.noalias() += mu * x;
    return g;
  }
  Index dim() const { return A.rows(); }

  Objective objective() const { return Objective(*this, Constants{mu, lipschitz, std::nullopt}); }
};

inline double spectral_norm_squared(const Eigen::MatrixXd& A, double tol) {
  const auto bounds = estimate_extreme_eigs(
      [&A](const Vector& v) -> Vector { return A.transpose() * (A * v); }, A.cols(), tol, 1000000);
  return bounds.max;
}

/// Draws A (column by column) and then b from the standard normal stream, and
/// rescales A so that |A|_2 = sqrt(L - mu).
inline PiecewiseSmoothObjective build_piecewise(int d, int p, double mu, double lipschitz, double eps,
                                                Rng& rng) {
  if (d < 1 || p < 1) throw ParameterError("piecewise: d and p must be >= 1");
  if (!(mu > 0.0) || !(mu < lipschitz)) throw ParameterError("piecewise: need 0 < mu < L");
  if (!(eps > 0.0)) throw ParameterError("piecewise: eps must be positive");
  PiecewiseSmoothObjective f;
  f.A.resize(d, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < d; ++i) f.A(i, j) = rng.normal();
  f.b = rng.normal_vector(p);
  const double norm2 = spectral_norm_squared(f.A, 1e-14);
  if (!(norm2 > 0.0)) throw NumericError("piecewise: generated matrix has zero norm");
  f.A *= std::sqrt((lipschitz - mu) / norm2);
  f.mu = mu;
  f.eps = eps;
  f.lipschitz = lipschitz;
  return f;
}

// ---------------------------------------------------------------------------
// l2-regularized logistic regression:
//   f(x) = sum_i log(1 + exp(-b_i a_i^T x)) + lambda/2 |x|^2.

/// log(1 + exp(t)) without overflow.
inline double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

/// 1 / (1 + exp(-t)) without overflow.
inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

struct LogisticObjective {
  Eigen::MatrixXd A;  // d x m, column i is a_i
  Vector b;           // labels in {-1, +1}
  double lambda = 0.1;
  double lipschitz = 0.0;
  double hessian_lipschitz = 0.0;

  // sup |d^3/ds^3 log(1 + exp(-s))| is 1/(6 sqrt 3) ~ 0.0962; 0.11 bounds it.
  static constexpr double kThirdDerivativeBound = 0.11;

  double value(const Vector& x) const {
    const Vector s = b.cwiseProduct(A.transpose() * x);
    double sum = 0.0;
    for (Index i = 0; i < s.size(); ++i) sum += softplus(-s[i]);
    return sum + 0.5 * lambda * x.squaredNorm();
  }
  Vector gradient(const Vector& x) const {
    const Vector s = b.cwiseProduct(A.transpose() * x);
    Vector w(s.size());
    for (Index i = 0; i < s.size(); ++i) w[i] = -b[i] * sigmoid(-s[i]);
    Vector g = A * w;
    g.noalias() += lambda * x;
    return g;
  }
  Index dim() const { return A.rows(); }

  Objective objective() const {
    return Objective(*this, Constants{lambda, lipschitz, hessian_lipschitz});
  }
};

/// Draws A (column by column) from the standard normal stream, then labels
/// b_i = +1 with probability 1/2 and -1 otherwise.
inline LogisticObjective build_logistic(int d, int m, double lambda, Rng& rng) {
  if (d < 1 || m < 1) throw ParameterError("logistic: d and m must be >= 1");
  if (!(lambda > 0.0)) throw ParameterError("logistic: lambda must be positive");
  LogisticObjective f;
  f.A.resize(d, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < d; ++i) f.A(i, j) = rng.normal();
  f.b.resize(m);
  for (int j = 0; j < m; ++j) f.b[j] = rng.bernoulli(0.5) ? 1.0 : -1.0;
  f.lambda = lambda;
  f.lipschitz = spectral_norm_squared(f.A, 1e-13) + lambda;
  double cubes = 0.0;
  for (int j = 0; j < m; ++j) cubes += std::pow(f.A.col(j).norm(), 3);
  f.hessian_lipschitz = LogisticObjective::kThirdDerivativeBound * cubes;
  return f;
}

// ---------------------------------------------------------------------------

/// Largest coordinatewise gap between grad f(x) and central differences with
/// step 1e-6 (1 + |x|), measured relative to max(1, |grad f(x)|_inf).
template <SmoothFunction F>
double check_gradient(const F& f, const Vector& x) {
  require_same_dim(f.dim(), x, "x");
  if (!all_finite(x)) throw InputError("check_gradient: x must be finite");
  const Vector g = f.gradient(x);
  const double step = 1e-6 * (1.0 + x.norm());
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  Vector probe = x;
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + step;
    const double up = f.value(probe);
    probe[i] = xi - step;
    const double down = f.value(probe);
    probe[i] = xi;
    const double fd = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(g[i] - fd) / scale);
  }
  return worst;
}

}  // namespace agmx
