#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "agmx/core.hpp"
#include "agmx/solvers.hpp"

namespace agmx {

struct OracleError : NumericError {
  using NumericError::NumericError;
};
struct EstimationError : NumericError {
  using NumericError::NumericError;
};

inline constexpr double kOracleTolerance = 1e-12;
inline constexpr long kOracleMaxIter = 2000000;

/// Reference minimizer. Returns the attached one when present; otherwise runs
/// NAG from the origin until |grad f| <= 1e-12 |grad f(0)|.
inline Vector find_minimizer(const Objective& f) {
  if (f.minimizer()) return *f.minimizer();
  const MethodParams p = make_params(Method::NAG, f);
  SolverState s = init_state(f, p, Vector::Zero(f.dim()));
  const double threshold = kOracleTolerance * s.grad.norm();
  while (s.grad.norm() > threshold) {
    if (s.k >= kOracleMaxIter)
      throw OracleError("minimizer oracle stopped at max_iter with relative gradient " +
                        std::to_string(s.grad.norm() / (threshold / kOracleTolerance)));
    s = step(std::move(s), f, p);
  }
  return s.x;
}

/// `f` with the oracle's minimizer attached.
inline Objective with_reference_minimizer(const Objective& f) {
  return f.minimizer() ? f : f.with_minimizer(find_minimizer(f));
}

// ---------------------------------------------------------------------------

struct RateEstimate {
  double rate = std::numeric_limits<double>::quiet_NaN();
  long k_start = 0;
  long k_end = 0;  // inclusive
  double fit_residual = 0.0;
  std::string metric;
};

inline constexpr double kRateFloor = 1e-28;
inline constexpr long kMinRateWindow = 10;  // k_end - k_start

/// Least-squares fit of ln e_k = c + k ln r over the tail of the sequence.
///
/// The sequence is cut at the first entry below 1e-28 e_0 (rounding floor).
/// The window is the last `tail_fraction` of what remains, widened to at
/// least 11 points.
inline RateEstimate estimate_rate(const std::vector<double>& errors, double tail_fraction = 0.5,
                                  std::string metric = "error") {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw ParameterError("tail_fraction must lie in (0, 1]");
  if (errors.empty() || !(errors.front() > 0.0) || !std::isfinite(errors.front()))
    throw EstimationError("rate fit needs a positive finite first entry");

  const double floor = kRateFloor * errors.front();
  std::size_t usable = 0;
  while (usable < errors.size() && std::isfinite(errors[usable]) && errors[usable] >= floor &&
         errors[usable] > 0.0)
    ++usable;
  if (usable < static_cast<std::size_t>(kMinRateWindow) + 1)
    throw EstimationError("rate fit needs at least 11 usable points, got " + std::to_string(usable));

  auto window = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(usable)));
  window = std::clamp(window, static_cast<std::size_t>(kMinRateWindow) + 1, usable);
  const std::size_t first = usable - window;

  // Center k to keep the normal equations well conditioned.
  const double n = static_cast<double>(window);
  const double k_mean = static_cast<double>(first) + 0.5 * (n - 1.0);
  double y_mean = 0.0;
  for (std::size_t k = first; k < usable; ++k) y_mean += std::log(errors[k]);
  y_mean /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = first; k < usable; ++k) {
    const double dk = static_cast<double>(k) - k_mean;
    sxy += dk * (std::log(errors[k]) - y_mean);
    sxx += dk * dk;
  }
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t k = first; k < usable; ++k) {
    const double r = std::log(errors[k]) - (y_mean + slope * (static_cast<double>(k) - k_mean));
    ss += r * r;
  }

  RateEstimate est;
  est.rate = std::exp(slope);
  est.k_start = static_cast<long>(first);
  est.k_end = static_cast<long>(usable - 1);
  est.fit_residual = std::sqrt(ss / n);
  est.metric = std::move(metric);
  return est;
}

// ---------------------------------------------------------------------------

enum class RateRegime { GENERAL, QUADRATIC_OR_ASYMPTOTIC };

/// Leading-order per-iteration rates from the standard literature:
///   GD 1 - 2/kappa, NAG 1 - 1/sqrt(kappa), TM 1 - 2/sqrt(kappa),
///   HNAG (1 + sqrt(2/kappa))^-1, or (1 + 2 sqrt(2/kappa))^-1 on quadratics
///   and asymptotically on C^2 functions, HNAG+ (1 + 2/sqrt(kappa))^-1.
inline double theoretical_rate(Method method, double kappa, RateRegime regime = RateRegime::GENERAL) {
  if (!(kappa >= 1.0)) throw ParameterError("kappa must be >= 1");
  const double sk = std::sqrt(kappa);
  switch (method) {
    case Method::GD: return std::max(0.0, 1.0 - 2.0 / kappa);
    case Method::NAG: return 1.0 - 1.0 / sk;
    case Method::TM: return 1.0 - 2.0 / sk;
    case Method::HNAG:
    case Method::HNAG_BOX:
      return regime == RateRegime::GENERAL ? 1.0 / (1.0 + std::sqrt(2.0 / kappa))
                                           : 1.0 / (1.0 + 2.0 * std::sqrt(2.0 / kappa));
    case Method::HNAG_PLUS: return 1.0 / (1.0 + 2.0 / sk);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// HNAG-family errors are measured on y, the others on x.
inline auto error_column(Method m) -> double TraceRecord::* {
  return is_hnag_family(m) ? &TraceRecord::y_err_sq : &TraceRecord::x_err_sq;
}

// ---------------------------------------------------------------------------

struct ComparisonRow {
  Method method = Method::HNAG;
  double kappa = 0.0;
  long iterations = 0;
  double runtime_seconds = 0.0;
  double measured_rate = std::numeric_limits<double>::quiet_NaN();
  double theoretical_rate = std::numeric_limits<double>::quiet_NaN();
  std::string status;  // Converged, MaxIter or Diverged
  std::string note;    // divergence or fit failure message
};

/// Runs every method from the same x0 with the same stopping rule. A diverging
/// method gets a "Diverged" row; the batch continues.
inline std::vector<ComparisonRow> compare(const Objective& f, const std::vector<Method>& methods,
                                          const SolverConfig& config, const Vector& x0,
                                          RateRegime regime = RateRegime::QUADRATIC_OR_ASYMPTOTIC) {
  config.validate();
  const Objective g = with_reference_minimizer(f);
  std::vector<ComparisonRow> rows;
  rows.reserve(methods.size());
  for (Method m : methods) {
    ComparisonRow row;
    row.method = m;
    row.kappa = g.kappa();
    row.theoretical_rate = theoretical_rate(m, g.kappa(), regime);
    SolverConfig c = config;
    c.method = m;
    c.record_lyapunov = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      const Trace t = solve(g, c, x0);
      row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      row.iterations = t.iterations;
      row.status = std::string(status_name(t.status));
      try {
        row.measured_rate = estimate_rate(t.column(error_column(m)), 0.5).rate;
      } catch (const EstimationError& e) {
        row.note = e.what();
      }
    } catch (const DivergenceError& e) {
      row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      row.iterations = e.iteration;
      row.status = "Diverged";
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace agmx
