#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agmx/core.hpp"
#include "agmx/solvers.hpp"

namespace agmx {

/// Energies, all anchored at the objective's minimizer x*:
///   E_HNAG      D_f(x,x*)        + mu/2 |y-x*|^2
///   E_HNAG_PLUS D_{f-mu}(x,x*)   + mu   |y-x*|^2
///   E_PARTIAL   D_{f-mu_hat}(x,x*) + mu/2 |y-x*|^2
enum class LyapunovKind { E_HNAG, E_HNAG_PLUS, E_PARTIAL };

inline double lyapunov(LyapunovKind kind, const Objective& f, const Vector& x, const Vector& y,
                       double mu_hat = 0.0) {
  const Vector& xs = f.require_minimizer();
  require_same_dim(f.dim(), y, "y");
  const double mu = f.mu();
  const double y_err = (y - xs).squaredNorm();
  switch (kind) {
    case LyapunovKind::E_HNAG: return bregman(f, x, xs) + 0.5 * mu * y_err;
    case LyapunovKind::E_HNAG_PLUS: return bregman(ShiftedObjective(f, mu), x, xs) + mu * y_err;
    case LyapunovKind::E_PARTIAL:
      return bregman(ShiftedObjective(f, mu_hat), x, xs) + 0.5 * mu * y_err;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Strong Lyapunov property of the continuous flows.

enum class FlowVariant { HNAG, HNAG_PLUS, PARTIAL };

struct StrongLyapunovTerms {
  double lhs = 0.0;  // -<grad E(z), G(z)>
  double rhs = 0.0;  // the lemma's lower bound
  double residual() const { return lhs - rhs; }
  /// Inequality check with rounding slack relative to |lhs|.
  bool holds(double rel_tol = 1e-12) const { return residual() >= -rel_tol * (1.0 + std::abs(lhs)); }
};

/// Evaluates both sides of the strong Lyapunov inequality at z = (x, y).
///
/// HNAG flow G = (y - x - beta g, x - y - g/mu) with g = grad f(x); the
/// HNAG_PLUS flow doubles the (y - x) term in the x-component. grad E is
/// assembled analytically. Lower bounds:
///   HNAG      E + beta |g|^2 + mu/2 |x - y|^2
///   HNAG_PLUS 2E + beta |g_mu|^2 + beta mu <g_mu, x - x*>
///   PARTIAL   c E + d Delta_f(x, x*) + beta |g_hat|^2 + beta mu_hat <g_hat, x - x*>
/// where g_mu, g_hat are gradients of the shifted functions, delta = mu - mu_hat,
/// c = 2 - sqrt(delta/mu), d = 1 - sqrt(delta/mu).
inline StrongLyapunovTerms strong_lyapunov_terms(FlowVariant variant, const Objective& f, const Vector& x,
                                                 const Vector& y, double beta, double mu_hat = 0.0) {
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  const Vector& xs = f.require_minimizer();
  require_same_dim(f.dim(), x, "x");
  require_same_dim(f.dim(), y, "y");
  const double mu = f.mu();
  const Vector g = f.gradient(x);
  const Vector g_star = f.gradient(xs);
  const Vector ex = x - xs;
  const Vector ey = y - xs;

  StrongLyapunovTerms t;
  switch (variant) {
    case FlowVariant::HNAG: {
      const Vector gx_flow = (y - x) - beta * g;
      const Vector gy_flow = (x - y) - g / mu;
      t.lhs = -((g - g_star).dot(gx_flow) + mu * ey.dot(gy_flow));
      t.rhs = lyapunov(LyapunovKind::E_HNAG, f, x, y) + beta * g.squaredNorm() +
              0.5 * mu * (x - y).squaredNorm();
      break;
    }
    case FlowVariant::HNAG_PLUS: {
      const Vector g_mu = g - mu * ex;
      const Vector gx_flow = 2.0 * (y - x) - beta * g;
      const Vector gy_flow = (x - y) - g / mu;
      t.lhs = -((g_mu - g_star).dot(gx_flow) + 2.0 * mu * ey.dot(gy_flow));
      t.rhs = 2.0 * lyapunov(LyapunovKind::E_HNAG_PLUS, f, x, y) + beta * g_mu.squaredNorm() +
              beta * mu * g_mu.dot(ex);
      break;
    }
    case FlowVariant::PARTIAL: {
      if (!(mu_hat >= 0.0) || mu_hat > mu) throw ParameterError("mu_hat must lie in [0, mu]");
      const double delta = mu - mu_hat;
      const double root = std::sqrt(delta / mu);
      const Vector g_hat = g - mu_hat * ex;
      const Vector gx_flow = (y - x) - beta * g;
      const Vector gy_flow = (x - y) - g / mu;
      t.lhs = -((g_hat - g_star).dot(gx_flow) + mu * ey.dot(gy_flow));
      t.rhs = (2.0 - root) * lyapunov(LyapunovKind::E_PARTIAL, f, x, y, mu_hat) +
              (1.0 - root) * bregman_asymmetry(f, x, xs) + beta * g_hat.squaredNorm() +
              beta * mu_hat * g_hat.dot(ex);
      break;
    }
  }
  return t;
}

inline double strong_lyapunov_residual(FlowVariant variant, const Objective& f, const Vector& x,
                                       const Vector& y, double beta, double mu_hat = 0.0) {
  return strong_lyapunov_terms(variant, f, x, y, beta, mu_hat).residual();
}

// ---------------------------------------------------------------------------
// Per-iteration contraction of the discrete energies along a trace.

enum class Theorem { THM_HNAG_FUNCVAL, THM_HNAG_PLUS, PROP_QUADRATIC };

inline std::string_view theorem_name(Theorem t) {
  switch (t) {
    case Theorem::THM_HNAG_FUNCVAL: return "THM_HNAG_FUNCVAL";
    case Theorem::THM_HNAG_PLUS: return "THM_HNAG_PLUS";
    case Theorem::PROP_QUADRATIC: return "PROP_QUADRATIC";
  }
  return "?";
}

inline std::optional<Theorem> parse_theorem(std::string_view s) {
  for (Theorem t : {Theorem::THM_HNAG_FUNCVAL, Theorem::THM_HNAG_PLUS, Theorem::PROP_QUADRATIC})
    if (theorem_name(t) == s) return t;
  return std::nullopt;
}

/// The method whose iterates a theorem is about.
inline Method theorem_method(Theorem t) {
  return t == Theorem::THM_HNAG_PLUS ? Method::HNAG_PLUS : Method::HNAG;
}

/// Contraction factor r with E~_{k+1} <= r E~_k.
inline double theorem_rate(Theorem t, double kappa) {
  switch (t) {
    case Theorem::THM_HNAG_FUNCVAL: return 1.0 / (1.0 + std::sqrt(2.0 / kappa));
    case Theorem::THM_HNAG_PLUS: return 1.0 / (1.0 + 2.0 / std::sqrt(kappa));
    case Theorem::PROP_QUADRATIC: return 1.0 / (1.0 + 2.0 * std::sqrt(2.0 / kappa));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct ContractionReport {
  std::string theorem_tag;
  double rate = 0.0;
  double energy0 = 0.0;  // E~_0
  std::vector<long> steps;
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<double> residuals;
  double max_violation = -std::numeric_limits<double>::infinity();
  long max_violation_step = -1;

  bool within(double rel_tol) const { return residuals.empty() || max_violation <= rel_tol * energy0; }
};

/// Theorem-specific modified energy at one record:
///   THM_HNAG_FUNCVAL E - |grad f|^2/(2L)
///   THM_HNAG_PLUS    E - |grad f_{-mu}|^2/(2L)     (E is the HNAG+ energy)
///   PROP_QUADRATIC   E_shifted - |grad f_{-mu}|^2/(2L)
inline double modified_energy(Theorem t, const TraceRecord& r, double lipschitz) {
  switch (t) {
    case Theorem::THM_HNAG_FUNCVAL: return r.E - r.grad_norm * r.grad_norm / (2.0 * lipschitz);
    case Theorem::THM_HNAG_PLUS: return r.E - r.grad_shifted_sq / (2.0 * lipschitz);
    case Theorem::PROP_QUADRATIC: return r.E_shifted - r.grad_shifted_sq / (2.0 * lipschitz);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline ContractionReport contraction_residuals(Theorem theorem, const Trace& trace, const Objective& f) {
  if (trace.method != theorem_method(theorem)) {
    throw UsageError(std::string(theorem_name(theorem)) + " concerns " +
                     std::string(method_name(theorem_method(theorem))) + " iterates, got " +
                     std::string(method_name(trace.method)));
  }
  if (theorem == Theorem::PROP_QUADRATIC && f.hessian_lipschitz().value_or(1.0) != 0.0)
    throw UsageError("PROP_QUADRATIC applies to quadratic objectives only");
  if (trace.records.empty()) throw StateError("empty trace");
  if (std::isnan(trace.records.front().E))
    throw StateError("trace has no energies; record with a known minimizer and record_lyapunov on");

  ContractionReport rep;
  rep.theorem_tag = std::string(theorem_name(theorem));
  rep.rate = theorem_rate(theorem, f.kappa());
  const double lip = f.lipschitz();
  double prev = modified_energy(theorem, trace.records.front(), lip);
  rep.energy0 = prev;
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    const double cur = modified_energy(theorem, trace.records[i], lip);
    rep.steps.push_back(trace.records[i - 1].k);
    rep.lhs.push_back(cur);
    rep.rhs.push_back(rep.rate * prev);
    rep.residuals.push_back(cur - rep.rate * prev);
    if (rep.residuals.back() > rep.max_violation) {
      rep.max_violation = rep.residuals.back();
      rep.max_violation_step = rep.steps.back();
    }
    prev = cur;
  }
  return rep;
}

// ---------------------------------------------------------------------------

/// (|Delta_f(x, y)|, (M/6)|x - y|^3).
inline std::pair<double, double> asymmetry_bound_check(const Objective& f, const Vector& x, const Vector& y) {
  if (!f.hessian_lipschitz()) throw CapabilityError("objective has no Hessian Lipschitz constant");
  const double gap = std::abs(bregman_asymmetry(f, x, y));
  const double dist = (x - y).norm();
  return {gap, *f.hessian_lipschitz() / 6.0 * dist * dist * dist};
}

/// |grad f_{-mu_curr}(x)|^2 - (|grad f_{-mu_prev}(x)|^2
///   - 2 (mu_curr - mu_prev) <grad f_{-mu_prev}(x), x - x*>), which is
/// (mu_curr - mu_prev)^2 |x - x*|^2 >= 0 in exact arithmetic.
inline double gradient_norm_gap(const Objective& f, const Vector& x, double mu_prev, double mu_curr) {
  const Vector& xs = f.require_minimizer();
  const Vector g = f.gradient(x);
  const Vector ex = x - xs;
  const Vector g_prev = g - mu_prev * ex;
  const Vector g_curr = g - mu_curr * ex;
  return g_curr.squaredNorm() - (g_prev.squaredNorm() - 2.0 * (mu_curr - mu_prev) * g_prev.dot(ex));
}

/// Analysis-only shift sequences, in units of mu:
///   delta_k = delta0 (1 + a sqrt(2 rho))^{-2k/3},  mu_k = 1 - delta_k,
///   c_k = 2 - sqrt(delta_k),  r_k = 1 / (1 + c_k sqrt(2 rho)).
struct ShiftSchedule {
  double delta0 = 0.0;
  double a = 0.0;
  double rho = 0.0;
  std::vector<double> delta;
  std::vector<double> mu;
  std::vector<double> c;
  std::vector<double> r;

  /// r_0 < (1 + sqrt(2 rho))^{-3/2}
  bool admissible = false;
  /// 2 (1 - delta_k/delta_{k-1}) <= 1 - r_0 for every k >= 1.
  bool gradient_cancellation = false;
  double cancellation_lhs_max = 0.0;
  double cancellation_rhs = 0.0;

  double limit_rate() const { return 1.0 / (1.0 + 2.0 * std::sqrt(2.0 * rho)); }
};

inline constexpr double kMaxScheduleA = 0.75 * (1.4142135623730951 - 1.0);

inline ShiftSchedule shift_schedule(double delta0, double a, double rho, long k_max) {
  if (!(delta0 > 0.0 && delta0 <= 1.0)) throw ParameterError("delta0 must lie in (0, 1] (units of mu)");
  if (!(a > 0.0 && a <= kMaxScheduleA * (1.0 + 1e-15)))
    throw ParameterError("a must lie in (0, 3/4 (sqrt 2 - 1)]");
  if (!(rho > 0.0 && rho <= 1.0)) throw ParameterError("rho must lie in (0, 1]");
  if (k_max < 0) throw ParameterError("k_max must be >= 0");

  ShiftSchedule s;
  s.delta0 = delta0;
  s.a = a;
  s.rho = rho;
  const double root2rho = std::sqrt(2.0 * rho);
  const double decay = std::pow(1.0 + a * root2rho, -2.0 / 3.0);
  const auto n = static_cast<std::size_t>(k_max) + 1;
  s.delta.resize(n);
  s.mu.resize(n);
  s.c.resize(n);
  s.r.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    s.delta[k] = delta0 * std::pow(decay, static_cast<double>(k));
    s.mu[k] = 1.0 - s.delta[k];
    s.c[k] = 2.0 - std::sqrt(s.delta[k]);
    s.r[k] = 1.0 / (1.0 + s.c[k] * root2rho);
  }
  s.admissible = s.r[0] < std::pow(1.0 + root2rho, -1.5);
  s.cancellation_rhs = 1.0 - s.r[0];
  s.gradient_cancellation = true;
  for (std::size_t k = 1; k < n; ++k) {
    const double lhs = 2.0 * (1.0 - s.delta[k] / s.delta[k - 1]);
    s.cancellation_lhs_max = std::max(s.cancellation_lhs_max, lhs);
    if (lhs > s.cancellation_rhs) s.gradient_cancellation = false;
  }
  return s;
}

}  // namespace agmx
