#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agmx/core.hpp"

namespace agmx {

enum class Method { GD, NAG, TM, HNAG, HNAG_PLUS, HNAG_BOX };

inline constexpr std::array<Method, 6> kAllMethods = {Method::GD,   Method::NAG,       Method::TM,
                                                      Method::HNAG, Method::HNAG_PLUS, Method::HNAG_BOX};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::GD: return "gd";
    case Method::NAG: return "nag";
    case Method::TM: return "tm";
    case Method::HNAG: return "hnag";
    case Method::HNAG_PLUS: return "hnag+";
    case Method::HNAG_BOX: return "hnag_box";
  }
  return "?";
}

/// Accepts the canonical names plus aliases. "hnag++"/"hnagpp" is HNAG: the
/// refined rate is a sharper analysis of the same iteration.
inline std::optional<Method> parse_method(std::string_view s) {
  std::string k(s);
  std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
  if (k == "gd") return Method::GD;
  if (k == "nag") return Method::NAG;
  if (k == "tm") return Method::TM;
  if (k == "hnag" || k == "hnag++" || k == "hnagpp") return Method::HNAG;
  if (k == "hnag+" || k == "hnagplus" || k == "hnag_plus") return Method::HNAG_PLUS;
  if (k == "hnag_box" || k == "hnagbox") return Method::HNAG_BOX;
  return std::nullopt;
}

inline bool is_hnag_family(Method m) {
  return m == Method::HNAG || m == Method::HNAG_PLUS || m == Method::HNAG_BOX;
}

/// Triple momentum coefficients (Van Scoy, Freeman, Lynch 2018) with
/// rho = 1 - 1/sqrt(kappa):
///   step  = (1 + rho) / L
///   beta  = rho^2 / (2 - rho)
///   gamma = rho^2 / ((1 + rho)(2 - rho))
///   delta = rho^2 / (1 - rho^2)
/// Iteration: xi+ = (1+beta) xi - beta xi- - step grad f(y),
///            y = (1+gamma) xi - gamma xi-,  x = (1+delta) xi - delta xi-.
struct TripleMomentum {
  double rho = 0.0;
  double step = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
};

struct MethodParams {
  Method method = Method::HNAG;
  double mu = 0.0;
  double lipschitz = 0.0;
  double alpha = 0.0;       // HNAG family step size
  double alpha_beta = 0.0;  // product alpha*beta
  double step = 0.0;        // GD / NAG gradient step
  double momentum = 0.0;    // NAG
  TripleMomentum tm;

  double inv_lipschitz() const { return 1.0 / lipschitz; }
  double beta() const { return alpha_beta / alpha; }
};

inline MethodParams make_params(Method method, double mu, double lipschitz) {
  if (!(mu > 0.0)) throw ParameterError("mu must be positive");
  if (!(mu <= lipschitz)) throw ParameterError("mu must not exceed the Lipschitz constant");
  MethodParams p;
  p.method = method;
  p.mu = mu;
  p.lipschitz = lipschitz;
  const double kappa = lipschitz / mu;
  const double sk = std::sqrt(kappa);
  switch (method) {
    case Method::HNAG:
    case Method::HNAG_BOX:
      p.alpha = std::sqrt(2.0 * mu / lipschitz);
      p.alpha_beta = 1.0 / lipschitz;
      break;
    case Method::HNAG_PLUS:
      p.alpha = std::sqrt(mu / lipschitz);
      p.alpha_beta = 1.0 / lipschitz;
      break;
    case Method::GD:
      p.step = 2.0 / (lipschitz + mu);
      break;
    case Method::NAG:
      p.step = 1.0 / lipschitz;
      p.momentum = (sk - 1.0) / (sk + 1.0);
      break;
    case Method::TM: {
      const double rho = 1.0 - 1.0 / sk;
      p.tm.rho = rho;
      p.tm.step = (1.0 + rho) / lipschitz;
      p.tm.beta = rho * rho / (2.0 - rho);
      p.tm.gamma = rho * rho / ((1.0 + rho) * (2.0 - rho));
      p.tm.delta = rho * rho / (1.0 - rho * rho);
      break;
    }
  }
  return p;
}

inline MethodParams make_params(Method method, const Objective& f) {
  return make_params(method, f.mu(), f.lipschitz());
}

/// Iterate state.
///
/// `aux` holds y_k for HNAG and HNAG+ (the (x, y) scheme form, which is the
/// algorithm box with v_{k+1} = alpha*y_k), v_k for HNAG_BOX, the extrapolated
/// point y_k for NAG, xi_k for TM (with xi_{k-1} in `aux_prev`), and a copy of
/// x for GD. `grad` is always grad f(x_k).
struct SolverState {
  Vector x;
  Vector aux;
  Vector aux_prev;
  long k = 0;
  Vector grad;
};

/// Matched initial data: y_0 = x_0 (v_0 = alpha x_0 for the box form), and a
/// constant TM history xi_{-1} = xi_0 = x_0. Evaluates grad f(x_0) once.
inline SolverState init_state(const Objective& f, const MethodParams& p, const Vector& x0) {
  require_same_dim(f.dim(), x0, "x0");
  if (!all_finite(x0)) throw InputError("x0 must be finite");
  SolverState s;
  s.x = x0;
  s.k = 0;
  s.grad = f.gradient(x0);
  if (!all_finite(s.grad)) throw DivergenceError(0, "gradient at x0 is not finite");
  switch (p.method) {
    case Method::HNAG_BOX: s.aux = p.alpha * x0; break;
    case Method::TM:
      s.aux = x0;
      s.aux_prev = x0;
      break;
    default: s.aux = x0; break;
  }
  return s;
}

/// The y-iterate paired with x_k in error and energy bookkeeping.
inline Vector paired_y(const SolverState& s, const MethodParams& p) {
  switch (p.method) {
    case Method::HNAG_BOX: return s.aux / p.alpha;
    case Method::TM: return (1.0 + p.tm.gamma) * s.aux - p.tm.gamma * s.aux_prev;
    case Method::GD: return s.x;
    default: return s.aux;
  }
}

/// One iteration. HNAG, HNAG+, HNAG_BOX and GD evaluate the gradient once
/// (at the new x); NAG and TM also need it at their extrapolated point.
inline SolverState step(SolverState s, const Objective& f, const MethodParams& p) {
  const Vector& g = s.grad;
  const double inv_l = p.inv_lipschitz();
  switch (p.method) {
    case Method::HNAG: {
      // x+ = (x + alpha y - alpha*beta g) / (1 + alpha)
      // y+ = (y + alpha x+ - (alpha/mu) grad f(x+)) / (1 + alpha)
      const double a = p.alpha;
      Vector x_next = (s.x + a * s.aux - p.alpha_beta * g) / (1.0 + a);
      Vector g_next = f.gradient(x_next);
      s.aux = (s.aux + a * x_next - (a / p.mu) * g_next) / (1.0 + a);
      s.x = std::move(x_next);
      s.grad = std::move(g_next);
      break;
    }
    case Method::HNAG_PLUS: {
      // x+ = (x + 2 alpha y - alpha*beta g) / (1 + 2 alpha)
      // y+ = (y + alpha x+ - (alpha/mu) grad f(x+)) / (1 + alpha)
      const double a = p.alpha;
      Vector x_next = (s.x + 2.0 * a * s.aux - p.alpha_beta * g) / (1.0 + 2.0 * a);
      Vector g_next = f.gradient(x_next);
      s.aux = (s.aux + a * x_next - (a / p.mu) * g_next) / (1.0 + a);
      s.x = std::move(x_next);
      s.grad = std::move(g_next);
      break;
    }
    case Method::HNAG_BOX: {
      // Algorithm box as printed: 1/L in the v-update, 2/L in the x-update.
      const double a = p.alpha;
      s.aux = (s.aux + a * a * s.x - inv_l * g) / (1.0 + a);
      s.x = (s.x + s.aux - 2.0 * inv_l * g) / (1.0 + a);
      s.grad = f.gradient(s.x);
      break;
    }
    case Method::GD: {
      s.x -= p.step * g;
      s.aux = s.x;
      s.grad = f.gradient(s.x);
      break;
    }
    case Method::NAG: {
      const Vector gy = (s.aux - s.x).isZero(0.0) ? g : f.gradient(s.aux);
      Vector x_next = s.aux - p.step * gy;
      s.aux = x_next + p.momentum * (x_next - s.x);
      s.x = std::move(x_next);
      s.grad = f.gradient(s.x);
      break;
    }
    case Method::TM: {
      const auto& c = p.tm;
      const Vector y = (1.0 + c.gamma) * s.aux - c.gamma * s.aux_prev;
      const Vector gy = f.gradient(y);
      Vector xi_next = (1.0 + c.beta) * s.aux - c.beta * s.aux_prev - c.step * gy;
      s.aux_prev = std::move(s.aux);
      s.aux = std::move(xi_next);
      s.x = (1.0 + c.delta) * s.aux - c.delta * s.aux_prev;
      s.grad = f.gradient(s.x);
      break;
    }
  }
  ++s.k;
  if (!all_finite(s.x) || !all_finite(s.aux) || !all_finite(s.grad))
    throw DivergenceError(s.k, std::string(method_name(p.method)) + " produced a non-finite iterate");
  return s;
}

// ---------------------------------------------------------------------------

enum class Status { Converged, MaxIter };

inline std::string_view status_name(Status s) {
  return s == Status::Converged ? "Converged" : "MaxIter";
}

struct SolverConfig {
  Method method = Method::HNAG;
  double tol_rel_grad = 1e-8;
  long max_iter = 1000000;
  bool record_lyapunov = true;
  std::uint64_t seed = 42;

  void validate() const {
    if (!(tol_rel_grad > 0.0 && tol_rel_grad < 1.0))
      throw ParameterError("tol_rel_grad must lie in (0, 1)");
    if (max_iter < 1) throw ParameterError("max_iter must be >= 1");
  }
};

/// Per-iteration record. Error and energy columns are NaN when the objective
/// has no minimizer (energies also when record_lyapunov is off).
///
///   E         method's own energy: D_f(x,x*) + mu/2|y-x*|^2, or for HNAG+
///             D_{f-mu}(x,x*) + mu|y-x*|^2
///   E_shifted D_{f-mu}(x,x*) + mu/2|y-x*|^2
///   grad_shifted_sq |grad f(x) - mu (x - x*)|^2
struct TraceRecord {
  long k = 0;
  double f_gap = 0.0;
  double grad_norm = 0.0;
  double x_err_sq = 0.0;
  double y_err_sq = 0.0;
  double E = 0.0;
  double E_shifted = 0.0;
  double grad_shifted_sq = 0.0;
};

struct Trace {
  Method method = Method::HNAG;
  double mu = 0.0;
  double lipschitz = 0.0;
  std::vector<TraceRecord> records;
  Status status = Status::MaxIter;
  long iterations = 0;

  std::vector<double> column(double TraceRecord::*member) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.*member);
    return out;
  }
};

namespace detail {

/// Builds trace records; f(x*) and grad f(x*) are evaluated once up front.
class Recorder {
 public:
  Recorder(const Objective& f, const MethodParams& p, bool record_lyapunov)
      : f_(f), p_(p), record_lyapunov_(record_lyapunov) {
    if (f.minimizer()) {
      f_star_ = f.value(*f.minimizer());
      if (record_lyapunov_) grad_star_ = f.gradient(*f.minimizer());
    }
  }

  TraceRecord operator()(const SolverState& s) const {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    TraceRecord r;
    r.k = s.k;
    r.grad_norm = s.grad.stableNorm();
    if (!f_.minimizer()) {
      r.f_gap = r.x_err_sq = r.y_err_sq = r.E = r.E_shifted = r.grad_shifted_sq = nan;
      return r;
    }
    const Vector& xs = *f_.minimizer();
    const Vector y = paired_y(s, p_);
    const double fx = f_.value(s.x);
    r.f_gap = fx - f_star_;
    r.x_err_sq = (s.x - xs).squaredNorm();
    r.y_err_sq = (y - xs).squaredNorm();
    if (!record_lyapunov_) {
      r.E = r.E_shifted = r.grad_shifted_sq = nan;
      return r;
    }
    const double mu = f_.mu();
    const double d_f = fx - f_star_ - grad_star_.dot(s.x - xs);
    const double d_shift = d_f - 0.5 * mu * r.x_err_sq;
    r.E = (p_.method == Method::HNAG_PLUS) ? d_shift + mu * r.y_err_sq : d_f + 0.5 * mu * r.y_err_sq;
    r.E_shifted = d_shift + 0.5 * mu * r.y_err_sq;
    r.grad_shifted_sq = (s.grad - mu * (s.x - xs)).squaredNorm();
    return r;
  }

 private:
  const Objective& f_;
  const MethodParams& p_;
  bool record_lyapunov_;
  double f_star_ = 0.0;
  Vector grad_star_;
};

}  // namespace detail

/// Runs exactly `steps` iterations from `state`, recording each one. No
/// stopping test; status is MaxIter.
inline Trace iterate(const Objective& f, const MethodParams& p, SolverState state, long steps,
                     bool record_lyapunov = true) {
  if (steps < 0) throw InputError("steps must be >= 0");
  Trace t;
  t.method = p.method;
  t.mu = f.mu();
  t.lipschitz = f.lipschitz();
  const detail::Recorder record(f, p, record_lyapunov);
  t.records.reserve(static_cast<std::size_t>(steps) + 1);
  t.records.push_back(record(state));
  for (long i = 0; i < steps; ++i) {
    state = step(std::move(state), f, p);
    t.records.push_back(record(state));
  }
  t.iterations = steps;
  t.status = Status::MaxIter;
  return t;
}

/// Runs until |grad f(x_k)| <= tol |grad f(x_0)| or max_iter steps.
inline Trace solve(const Objective& f, const SolverConfig& config, const Vector& x0) {
  config.validate();
  const MethodParams p = make_params(config.method, f);
  SolverState state = init_state(f, p, x0);
  Trace t;
  t.method = config.method;
  t.mu = f.mu();
  t.lipschitz = f.lipschitz();
  const detail::Recorder record(f, p, config.record_lyapunov);
  t.records.push_back(record(state));
  const double threshold = config.tol_rel_grad * t.records.front().grad_norm;
  t.status = Status::MaxIter;
  if (t.records.front().grad_norm <= threshold) {
    t.status = Status::Converged;
    return t;
  }
  while (state.k < config.max_iter) {
    state = step(std::move(state), f, p);
    t.records.push_back(record(state));
    if (t.records.back().grad_norm <= threshold) {
      t.status = Status::Converged;
      break;
    }
  }
  t.iterations = state.k;
  return t;
}

/// Largest |x_j^{scheme} - x_j^{box}| over j <= k, both started from x0 with
/// matched internal variables.
inline double forms_deviation(const Objective& f, const Vector& x0, long k) {
  if (k < 0) throw InputError("forms_deviation: k must be >= 0");
  const MethodParams scheme = make_params(Method::HNAG, f);
  const MethodParams box = make_params(Method::HNAG_BOX, f);
  SolverState a = init_state(f, scheme, x0);
  SolverState b = init_state(f, box, x0);
  double worst = 0.0;
  for (long j = 0; j < k; ++j) {
    a = step(std::move(a), f, scheme);
    b = step(std::move(b), f, box);
    worst = std::max(worst, (a.x - b.x).norm());
  }
  return worst;
}

}  // namespace agmx
