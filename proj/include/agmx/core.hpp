#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace agmx {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy. Every failure mode in the library maps to one of these.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : Error {
  using Error::Error;
};
struct ParameterError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};
struct StateError : Error {
  using Error::Error;
};
struct CapabilityError : Error {
  using Error::Error;
};
struct UsageError : Error {
  using Error::Error;
};

/// Raised when an iterate acquires a non-finite coordinate.
struct DivergenceError : Error {
  DivergenceError(long iteration, const std::string& what)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration(iteration) {}
  long iteration;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_same_dim(Index expected, const Vector& v, const char* name) {
  if (v.size() != expected) {
    throw InputError(std::string("dimension mismatch for ") + name + ": expected " +
                     std::to_string(expected) + ", got " + std::to_string(v.size()));
  }
}

/// Anything with a value and a gradient over a fixed-dimension domain.
template <class F>
concept SmoothFunction = requires(const F& f, const Vector& x) {
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::convertible_to<Vector>;
  { f.dim() } -> std::convertible_to<Index>;
};

struct Constants {
  double mu = 0.0;
  double lipschitz = 0.0;
  std::optional<double> hessian_lipschitz;
};

/// A strongly convex, L-smooth objective.
///
/// Type-erased over any SmoothFunction model. The model is held behind a
/// shared pointer to const, so copies are cheap and evaluation is safe from
/// many threads as long as the model's own value/gradient are.
class Objective {
 public:
  template <SmoothFunction F>
  Objective(F model, Constants constants, std::optional<Vector> minimizer = std::nullopt)
      : impl_(std::make_shared<const Model<F>>(std::move(model))),
        constants_(constants),
        minimizer_(std::move(minimizer)) {
    validate();
  }

  double value(const Vector& x) const {
    require_same_dim(dim(), x, "x");
    return impl_->value(x);
  }
  Vector gradient(const Vector& x) const {
    require_same_dim(dim(), x, "x");
    return impl_->gradient(x);
  }
  Index dim() const { return impl_->dim(); }

  double mu() const { return constants_.mu; }
  double lipschitz() const { return constants_.lipschitz; }
  double kappa() const { return constants_.lipschitz / constants_.mu; }
  const std::optional<double>& hessian_lipschitz() const { return constants_.hessian_lipschitz; }
  const std::optional<Vector>& minimizer() const { return minimizer_; }
  const Constants& constants() const { return constants_; }

  const Vector& require_minimizer() const {
    if (!minimizer_) throw StateError("objective has no minimizer attached");
    return *minimizer_;
  }

  Objective with_minimizer(Vector x) const {
    Objective copy = *this;
    require_same_dim(dim(), x, "minimizer");
    copy.minimizer_ = std::move(x);
    return copy;
  }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
    virtual Index dim() const = 0;
  };
  template <class F>
  struct Model final : Concept {
    explicit Model(F f) : f(std::move(f)) {}
    double value(const Vector& x) const override { return f.value(x); }
    Vector gradient(const Vector& x) const override { return f.gradient(x); }
    Index dim() const override { return f.dim(); }
    F f;
  };

  void validate() const {
    if (!(constants_.mu > 0.0)) throw ParameterError("mu must be positive");
    if (!(constants_.lipschitz >= constants_.mu))
      throw ParameterError("lipschitz constant must be >= mu");
    if (constants_.hessian_lipschitz && !(*constants_.hessian_lipschitz >= 0.0))
      throw ParameterError("hessian Lipschitz constant must be >= 0");
    if (minimizer_) require_same_dim(dim(), *minimizer_, "minimizer");
  }

  std::shared_ptr<const Concept> impl_;
  Constants constants_;
  std::optional<Vector> minimizer_;
};

/// f(x) - (mu_hat/2)|x - center|^2, i.e. f with part of its convexity removed.
class ShiftedObjective {
 public:
  ShiftedObjective(Objective base, double mu_hat, Vector center)
      : base_(std::move(base)), mu_hat_(mu_hat), center_(std::move(center)) {
    if (!(mu_hat_ >= 0.0) || mu_hat_ > base_.mu())
      throw ParameterError("shift must satisfy 0 <= mu_hat <= mu");
    require_same_dim(base_.dim(), center_, "center");
  }

  /// Anchors the shift at the objective's attached minimizer.
  ShiftedObjective(const Objective& base, double mu_hat)
      : ShiftedObjective(base, mu_hat, base.require_minimizer()) {}

  double value(const Vector& x) const {
    const double v = base_.value(x);
    if (mu_hat_ == 0.0) return v;
    return v - 0.5 * mu_hat_ * (x - center_).squaredNorm();
  }
  Vector gradient(const Vector& x) const {
    Vector g = base_.gradient(x);
    if (mu_hat_ == 0.0) return g;
    g.noalias() -= mu_hat_ * (x - center_);
    return g;
  }
  Index dim() const { return base_.dim(); }

  double mu() const { return base_.mu() - mu_hat_; }
  double lipschitz() const { return base_.lipschitz() - mu_hat_; }
  double shift() const { return mu_hat_; }
  double remaining_convexity() const { return base_.mu() - mu_hat_; }
  const Vector& center() const { return center_; }
  const Objective& base() const { return base_; }

 private:
  Objective base_;
  double mu_hat_;
  Vector center_;
};

/// Bregman divergence D_f(y, x) = f(y) - f(x) - <grad f(x), y - x>.
template <SmoothFunction F>
double bregman(const F& f, const Vector& y, const Vector& x) {
  require_same_dim(f.dim(), y, "y");
  require_same_dim(f.dim(), x, "x");
  return f.value(y) - f.value(x) - f.gradient(x).dot(y - x);
}

/// Delta_f(x, y) = D_f(y, x) - D_f(x, y).
template <SmoothFunction F>
double bregman_asymmetry(const F& f, const Vector& x, const Vector& y) {
  return bregman(f, y, x) - bregman(f, x, y);
}

/// One gradient step x - (1/L) grad f(x); L is f's own smoothness constant.
template <SmoothFunction F>
  requires requires(const F& f) { { f.lipschitz() } -> std::convertible_to<double>; }
Vector grad_step(const F& f, const Vector& x) {
  const double lip = f.lipschitz();
  if (!(lip > 0.0)) throw ParameterError("grad_step needs a positive Lipschitz constant");
  return x - f.gradient(x) / lip;
}

namespace detail {
struct Tilted {
  Objective base;
  Vector slope;
  double value(const Vector& x) const { return base.value(x) - slope.dot(x); }
  Vector gradient(const Vector& x) const { return base.gradient(x) - slope; }
  Index dim() const { return base.dim(); }
};
}  // namespace detail

/// f(x) - <grad f(p), x>: same curvature constants, with p as exact stationary
/// point. Used to test fixed-point behavior at approximate minimizers.
inline Objective tilt_to_stationary(const Objective& f, const Vector& p) {
  Vector slope = f.gradient(p);
  return Objective(detail::Tilted{f, std::move(slope)}, f.constants(), p);
}

}  // namespace agmx
