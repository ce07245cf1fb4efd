#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "agmx/agmx.hpp"

namespace agmx::testing {

/// Default benchmark problems, built once per process (seed 42, reference
/// minimizer attached).
inline const BuiltProblem& problem(const std::string& kind) {
  static const BuiltProblem lap = build_problem(default_problem("laplacian2d"));
  static const BuiltProblem pw = build_problem(default_problem("piecewise"));
  static const BuiltProblem lg = build_problem(default_problem("logistic"));
  if (kind == "laplacian2d") return lap;
  if (kind == "piecewise") return pw;
  return lg;
}

inline const std::vector<std::string>& problem_kinds() {
  static const std::vector<std::string> kinds = {"laplacian2d", "piecewise", "logistic"};
  return kinds;
}

/// x^4/4 in one dimension. Not strongly convex; used only for Bregman values.
struct Quartic {
  double value(const Vector& x) const { return 0.25 * std::pow(x[0], 4); }
  Vector gradient(const Vector& x) const { return Vector::Constant(1, std::pow(x[0], 3)); }
  Index dim() const { return 1; }
};

/// 1/2 sum_i w_i x_i^2 with minimizer 0; handy for hand-checked examples.
inline Objective scalar_quadratic(double curvature) {
  return build_diagonal_quadratic(Vector::Constant(1, curvature), Vector::Zero(1)).objective();
}

/// Counts gradient calls on a wrapped objective.
struct CountingFunction {
  Objective base;
  std::shared_ptr<long> calls = std::make_shared<long>(0);
  double value(const Vector& x) const { return base.value(x); }
  Vector gradient(const Vector& x) const {
    ++*calls;
    return base.gradient(x);
  }
  Index dim() const { return base.dim(); }
};

}  // namespace agmx::testing
