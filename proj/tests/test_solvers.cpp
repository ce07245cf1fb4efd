#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

namespace agmx {
namespace {

using testing::problem;

Vector one(double v) { return Vector::Constant(1, v); }

TEST(Params, HnagRecommendedChoice) {
  const MethodParams p = make_params(Method::HNAG, 1.0, 1e4);
  EXPECT_NEAR(p.alpha, 0.0141421356237310, 1e-15);
  EXPECT_DOUBLE_EQ(p.alpha_beta, 1e-4);
  EXPECT_DOUBLE_EQ(p.alpha * p.alpha / p.mu, 2.0 / p.lipschitz);
}

TEST(Params, HnagPlusUnitCondition) {
  const MethodParams p = make_params(Method::HNAG_PLUS, 3.0, 3.0);
  EXPECT_DOUBLE_EQ(p.alpha, 1.0);
  EXPECT_DOUBLE_EQ(p.beta(), 1.0 / 3.0);
}

TEST(Params, NagMomentum) {
  EXPECT_NEAR(make_params(Method::NAG, 1.0, 100.0).momentum, 9.0 / 11.0, 1e-15);
  EXPECT_DOUBLE_EQ(make_params(Method::NAG, 1.0, 100.0).step, 0.01);
}

TEST(Params, GradientDescentStep) { EXPECT_DOUBLE_EQ(make_params(Method::GD, 1.0, 3.0).step, 0.5); }

TEST(Params, TripleMomentumCoefficients) {
  const TripleMomentum tm = make_params(Method::TM, 1.0, 100.0).tm;
  EXPECT_DOUBLE_EQ(tm.rho, 0.9);
  EXPECT_DOUBLE_EQ(tm.step, 0.019);
  EXPECT_NEAR(tm.beta, 0.81 / 1.1, 1e-15);
  EXPECT_NEAR(tm.gamma, 0.81 / (1.9 * 1.1), 1e-15);
  EXPECT_NEAR(tm.delta, 0.81 / 0.19, 1e-13);
}

TEST(Params, RejectsInvalidConstants) {
  EXPECT_THROW(make_params(Method::HNAG, 0.0, 1.0), ParameterError);
  EXPECT_THROW(make_params(Method::HNAG, -1.0, 1.0), ParameterError);
  EXPECT_THROW(make_params(Method::NAG, 2.0, 1.0), ParameterError);
}

TEST(Methods, NamesAndAliases) {
  EXPECT_EQ(parse_method("hnagpp"), Method::HNAG);
  EXPECT_EQ(parse_method("HNAG++"), Method::HNAG);
  EXPECT_EQ(parse_method("hnag+"), Method::HNAG_PLUS);
  EXPECT_EQ(parse_method("hnag_box"), Method::HNAG_BOX);
  EXPECT_FALSE(parse_method("nosuch").has_value());
  for (Method m : kAllMethods) EXPECT_EQ(parse_method(method_name(m)), m);
}

TEST(Step, HnagOneDimensionalHandValues) {
  const Objective f = testing::scalar_quadratic(1.0);
  const MethodParams p = make_params(Method::HNAG, f);
  const SolverState s = step(init_state(f, p, one(1.0)), f, p);
  EXPECT_NEAR(s.x[0], 2.0 - std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s.aux[0], 1.0 / (1.0 + std::sqrt(2.0)), 1e-15);
  EXPECT_EQ(s.k, 1);
}

TEST(Step, HnagPlusOneDimensionalHandValues) {
  const Objective f = testing::scalar_quadratic(1.0);
  const MethodParams p = make_params(Method::HNAG_PLUS, f);
  const SolverState s = step(init_state(f, p, one(1.0)), f, p);
  EXPECT_NEAR(s.x[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.aux[0], 0.5, 1e-15);
}

TEST(Step, SchemeMatchesVelocityForm) {
  // v-form: v+ = (v + a^2 x - (a^2/mu) g)/(1 + a), x+ = (x + v+ - ab g)/(1 + a),
  // with v_{k+1} = a y_k.
  for (const auto& kind : testing::problem_kinds()) {
    const auto& prob = problem(kind);
    const Objective& f = prob.objective;
    const MethodParams p = make_params(Method::HNAG, f);
    const double a = p.alpha;
    SolverState s = init_state(f, p, prob.x0);
    Vector x = prob.x0;
    Vector v = a * prob.x0;  // v_1 = a y_0
    Vector g = f.gradient(x);
    for (int k = 0; k < 25; ++k) {
      s = step(std::move(s), f, p);
      const Vector x_next = (x + v - p.alpha_beta * g) / (1.0 + a);
      const Vector g_next = f.gradient(x_next);
      const Vector v_next = (v + a * a * x_next - (a * a / p.mu) * g_next) / (1.0 + a);
      x = x_next;
      v = v_next;
      g = g_next;
      ASSERT_LE((s.x - x).norm(), 1e-12 * (1.0 + x.norm())) << kind << " k=" << k;
      ASSERT_LE((a * s.aux - v).norm(), 1e-12 * (1.0 + v.norm())) << kind << " k=" << k;
    }
  }
}

TEST(Step, OneGradientPerStepForHnagFamily) {
  const auto& prob = problem("logistic");
  for (Method m : {Method::HNAG, Method::HNAG_PLUS, Method::HNAG_BOX, Method::GD, Method::NAG, Method::TM}) {
    testing::CountingFunction counter{prob.objective};
    const Objective f(counter, prob.objective.constants());
    const MethodParams p = make_params(m, f);
    SolverState s = init_state(f, p, prob.x0);
    EXPECT_EQ(*counter.calls, 1);
    // NAG's first extrapolated point equals x0, so its gradient is reused.
    s = step(std::move(s), f, p);
    const long before = *counter.calls;
    for (int k = 0; k < 10; ++k) s = step(std::move(s), f, p);
    const long per_step = (*counter.calls - before) / 10;
    if (is_hnag_family(m) || m == Method::GD) {
      EXPECT_EQ(per_step, 1) << method_name(m);
    } else {
      EXPECT_EQ(per_step, 2) << method_name(m);
    }
  }
}

TEST(Step, FixedPointForEveryMethod) {
  for (const auto& kind : testing::problem_kinds()) {
    const Objective& base = problem(kind).objective;
    const Objective f = tilt_to_stationary(base, *base.minimizer());
    const Vector& xs = *f.minimizer();
    for (Method m : kAllMethods) {
      const MethodParams p = make_params(m, f);
      SolverState s = init_state(f, p, xs);
      for (int k = 0; k < 100; ++k) s = step(std::move(s), f, p);
      EXPECT_LE((s.x - xs).norm(), 1e-12 * (1.0 + xs.norm())) << kind << ' ' << method_name(m);
      EXPECT_LE((paired_y(s, p) - xs).norm(), 1e-12 * (1.0 + xs.norm())) << kind << ' ' << method_name(m);
    }
  }
}

struct Exploding {
  double value(const Vector& x) const { return 0.5 * x.squaredNorm(); }
  Vector gradient(const Vector& x) const { return 1e300 * x; }
  Index dim() const { return 1; }
};

TEST(Step, NonFiniteIterateRaisesWithIteration) {
  const Objective f(Exploding{}, Constants{1.0, 1.0, std::nullopt});
  SolverConfig c;
  c.method = Method::GD;
  try {
    solve(f, c, one(1.0));
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.iteration, 1);
  }
}

TEST(Solve, GradientDescentExactAtUnitCondition) {
  const Vector c = (Vector(3) << 1.0, 2.0, 3.0).finished();
  const Objective f = build_diagonal_quadratic(Vector::Constant(3, 2.0), c).objective();
  SolverConfig cfg;
  cfg.method = Method::GD;
  const Trace t = solve(f, cfg, Vector::Zero(3));
  EXPECT_EQ(t.status, Status::Converged);
  EXPECT_EQ(t.iterations, 1);
}

TEST(Solve, RegressionCountsOnLaplacian19) {
  // Frozen from tests/oracles/methods.py 19 (seed 42, x0 ~ U(0,1)).
  const BuiltProblem prob = build_problem(ProblemSpec{"laplacian2d", {{"n", 19}}, 42, {}});
  const std::pair<Method, long> expected[] = {
      {Method::GD, 1269}, {Method::NAG, 210}, {Method::TM, 223}, {Method::HNAG, 160}, {Method::HNAG_PLUS, 199}};
  for (const auto& [m, iters] : expected) {
    SolverConfig cfg;
    cfg.method = m;
    const Trace t = solve(prob.objective, cfg, prob.x0);
    EXPECT_EQ(t.status, Status::Converged);
    EXPECT_EQ(t.iterations, iters) << method_name(m);
  }
}

TEST(Solve, HonorsToleranceAndRecordShape) {
  const auto& prob = problem("piecewise");
  for (Method m : kAllMethods) {
    SolverConfig cfg;
    cfg.method = m;
    cfg.max_iter = 200000;
    const Trace t = solve(prob.objective, cfg, prob.x0);
    ASSERT_EQ(t.records.size(), static_cast<std::size_t>(t.iterations) + 1);
    EXPECT_EQ(t.records.front().k, 0);
    if (t.status == Status::Converged) {
      EXPECT_LE(t.records.back().grad_norm, 1e-8 * t.records.front().grad_norm) << method_name(m);
    }
  }
}

TEST(Solve, MaxIterIsAStatus) {
  const auto& prob = problem("laplacian2d");
  SolverConfig cfg;
  cfg.max_iter = 5;
  const Trace t = solve(prob.objective, cfg, prob.x0);
  EXPECT_EQ(t.status, Status::MaxIter);
  EXPECT_EQ(t.iterations, 5);
  EXPECT_EQ(t.records.size(), 6u);
}

TEST(Solve, StartingAtMinimizer) {
  const auto& prob = problem("laplacian2d");
  const Trace t = solve(prob.objective, SolverConfig{}, Vector::Zero(prob.objective.dim()));
  EXPECT_EQ(t.status, Status::Converged);
  EXPECT_EQ(t.iterations, 0);
}

TEST(Solve, ValidatesConfigAndStart) {
  const auto& prob = problem("laplacian2d");
  SolverConfig bad;
  bad.tol_rel_grad = 1.0;
  EXPECT_THROW(solve(prob.objective, bad, prob.x0), ParameterError);
  bad = SolverConfig{};
  bad.max_iter = 0;
  EXPECT_THROW(solve(prob.objective, bad, prob.x0), ParameterError);
  Vector x = prob.x0;
  x[3] = std::nan("");
  EXPECT_THROW(solve(prob.objective, SolverConfig{}, x), InputError);
  EXPECT_THROW(solve(prob.objective, SolverConfig{}, Vector::Zero(2)), InputError);
}

TEST(Solve, NoMinimizerLeavesErrorColumnsNan) {
  const BuiltProblem raw = build_problem(default_problem("logistic"), false);
  SolverConfig cfg;
  cfg.max_iter = 3;
  const Trace t = solve(raw.objective, cfg, raw.x0);
  EXPECT_TRUE(std::isnan(t.records.back().x_err_sq));
  EXPECT_TRUE(std::isnan(t.records.back().E));
  EXPECT_FALSE(std::isnan(t.records.back().grad_norm));
}

TEST(Solve, GradientEnvelope) {
  // |grad f(x_k)|^2 <= E(z_0) (2L/alpha) (1 + sqrt(2/kappa))^-k
  for (const auto& kind : testing::problem_kinds()) {
    const auto& prob = problem(kind);
    const Objective& f = prob.objective;
    const Trace t = solve(f, SolverConfig{}, prob.x0);
    const MethodParams p = make_params(Method::HNAG, f);
    const double c1 = t.records.front().E * 2.0 * f.lipschitz() / p.alpha;
    const double r = 1.0 / (1.0 + std::sqrt(2.0 / f.kappa()));
    for (const auto& rec : t.records)
      ASSERT_LE(rec.grad_norm * rec.grad_norm, c1 * std::pow(r, static_cast<double>(rec.k))) << kind << " k=" << rec.k;
  }
}

TEST(Solve, GradientDescentContraction) {
  const auto& prob = problem("laplacian2d");
  const double kappa = prob.objective.kappa();
  SolverConfig cfg;
  cfg.method = Method::GD;
  cfg.max_iter = 2000;
  const Trace t = solve(prob.objective, cfg, prob.x0);
  const double bound = (kappa - 1.0) / (kappa + 1.0);
  for (std::size_t i = 1; i < t.records.size(); ++i)
    ASSERT_LE(std::sqrt(t.records[i].x_err_sq), bound * std::sqrt(t.records[i - 1].x_err_sq) * (1 + 1e-12));
}

TEST(Solve, HnagBeatsBaselinesOnLaplacian) {
  const auto& prob = problem("laplacian2d");
  long hnag = 0;
  long best_other = std::numeric_limits<long>::max();
  for (Method m : {Method::HNAG, Method::HNAG_PLUS, Method::NAG, Method::TM}) {
    SolverConfig cfg;
    cfg.method = m;
    const long it = solve(prob.objective, cfg, prob.x0).iterations;
    if (m == Method::HNAG) hnag = it;
    else best_other = std::min(best_other, it);
  }
  EXPECT_LT(hnag, best_other);
}

TEST(FormsDeviation, Examples) {
  const Objective f = testing::scalar_quadratic(1.0);
  EXPECT_EQ(forms_deviation(f, one(1.0), 0), 0.0);
  EXPECT_NEAR(forms_deviation(f, one(1.0), 1), 2.0 - std::sqrt(2.0), 1e-15);
  EXPECT_EQ(forms_deviation(f, one(0.0), 50), 0.0);
  EXPECT_THROW(forms_deviation(f, one(1.0), -1), InputError);
}

TEST(FormsDeviation, BoxFormDiffersOnBenchmarks) {
  const auto& prob = problem("laplacian2d");
  EXPECT_GT(forms_deviation(prob.objective, prob.x0, 10), 1e-3);
}

}  // namespace
}  // namespace agmx
