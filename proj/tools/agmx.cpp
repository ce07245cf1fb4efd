// agmx: build a seeded benchmark problem, run first-order methods on it and
// check the Lyapunov contraction inequalities.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 non-convergence
// or a failed check, 3 divergence.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "agmx/agmx.hpp"

namespace {

using agmx::Method;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitDiverged = 3;

struct Options {
  std::string problem = "laplacian2d";
  std::optional<long> n, d, p, m;
  std::optional<double> kappa, mu, lipschitz, eps, lambda;
  std::optional<std::uint64_t> seed;
  std::string method = "hnag";
  std::string methods = "gd,nag,tm,hnag,hnag+";
  double tol = 1e-8;
  long max_iter = 1000000;
  std::string out;
  std::string format = "csv";
  std::string theorem = "THM_HNAG_FUNCVAL";
  std::optional<std::string> theorem_method;
  double mu_hat_fraction = 0.0;
  int samples = 100;
  double rel_tol = 1e-10;
};

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("AGMX_SEED")) {
    const std::string s(env);
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(s, &used, 10);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw agmx::UsageError("AGMX_SEED must be a decimal 64-bit integer, got '" + s + "'");
    return v;
  }
  return agmx::Rng::kDefaultSeed;
}

Method require_method(const std::string& name) {
  const auto m = agmx::parse_method(name);
  if (!m) throw agmx::UsageError("unknown method '" + name + "' (expected gd, nag, tm, hnag, hnag+, hnag_box or hnagpp)");
  return *m;
}

std::vector<Method> require_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(require_method(item));
  }
  return out;
}

agmx::ProblemSpec make_spec(const Options& o) {
  agmx::ProblemSpec s = agmx::default_problem(o.problem, resolve_seed(o));
  auto set_dim = [&](const char* key, const std::optional<long>& v) {
    if (!v) return;
    if (!s.dims.count(key)) throw agmx::UsageError(std::string("--") + key + " does not apply to " + o.problem);
    if (*v < 1) throw agmx::UsageError(std::string("--") + key + " must be >= 1");
    s.dims[key] = *v;
  };
  auto set_param = [&](const char* key, const char* flag, const std::optional<double>& v) {
    if (!v) return;
    if (!s.parameters.count(key)) throw agmx::UsageError(std::string("--") + flag + " does not apply to " + o.problem);
    s.parameters[key] = *v;
  };
  if (o.kappa) {
    if (o.problem != "laplacian2d") throw agmx::UsageError("--kappa applies to laplacian2d only");
    if (o.n) throw agmx::UsageError("give either --n or --kappa, not both");
    s.dims["n"] = agmx::laplacian2d_grid_for_kappa(*o.kappa);
  }
  set_dim("n", o.n);
  set_dim("d", o.d);
  set_dim("p", o.p);
  set_dim("m", o.m);
  set_param("mu", "mu", o.mu);
  set_param("L", "L", o.lipschitz);
  set_param("eps", "eps", o.eps);
  set_param("lambda", "lambda", o.lambda);
  return s;
}

agmx::SolverConfig make_config(const Options& o, Method m) {
  agmx::SolverConfig c;
  c.method = m;
  c.tol_rel_grad = o.tol;
  c.max_iter = o.max_iter;
  c.seed = resolve_seed(o);
  try {
    c.validate();
  } catch (const agmx::ParameterError& e) {
    throw agmx::UsageError(e.what());
  }
  return c;
}

/// Writes `text` to --out, or to stdout when --out is empty.
void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw agmx::UsageError("cannot open output file '" + o.out + "'");
  f << text;
}

agmx::RateRegime regime_for(Method m) {
  return agmx::is_hnag_family(m) ? agmx::RateRegime::QUADRATIC_OR_ASYMPTOTIC : agmx::RateRegime::GENERAL;
}

int cmd_run(const Options& o) {
  const Method m = require_method(o.method);
  const agmx::SolverConfig config = make_config(o, m);
  const agmx::BuiltProblem prob = agmx::build_problem(make_spec(o));
  const agmx::Trace trace = agmx::solve(prob.objective, config, prob.x0);

  if (!o.out.empty()) {
    std::ostringstream csv;
    agmx::write_trace_csv(csv, trace);
    emit(o, csv.str());
  }
  double measured = std::numeric_limits<double>::quiet_NaN();
  try {
    measured = agmx::estimate_rate(trace.column(agmx::error_column(m))).rate;
  } catch (const agmx::EstimationError&) {
  }
  const nlohmann::json summary = {
      {"method", agmx::method_name(m)},
      {"kappa", agmx::json_number(prob.objective.kappa())},
      {"iterations", trace.iterations},
      {"status", agmx::status_name(trace.status)},
      {"measured_rate", agmx::json_number(measured)},
      {"theoretical_rate", agmx::json_number(agmx::theoretical_rate(m, prob.objective.kappa(), regime_for(m)))}};
  std::cout << summary.dump() << '\n';
  return trace.status == agmx::Status::Converged ? kExitOk : kExitNotConverged;
}

int cmd_compare(const Options& o) {
  const std::vector<Method> methods = require_methods(o.methods);
  if (methods.size() < 2) throw agmx::UsageError("compare needs at least 2 methods");
  const agmx::SolverConfig config = make_config(o, methods.front());
  const agmx::BuiltProblem prob = agmx::build_problem(make_spec(o));
  const auto rows = agmx::compare(prob.objective, methods, config, prob.x0);

  if (o.format == "json") {
    emit(o, agmx::comparison_json(rows).dump(2) + "\n");
  } else {
    std::ostringstream csv;
    agmx::write_comparison_csv(csv, rows);
    emit(o, csv.str());
  }
  bool diverged = false;
  bool all_converged = true;
  for (const auto& r : rows) {
    if (r.status == "Diverged") {
      diverged = true;
      std::cerr << "agmx: " << r.note << '\n';
    }
    all_converged = all_converged && r.status == "Converged";
  }
  if (diverged) return kExitDiverged;
  return all_converged ? kExitOk : kExitNotConverged;
}

/// Strong Lyapunov sweep: `samples` seeded states around the minimizer,
/// residual >= -1e-12 (1 + |lhs|) at each.
int strong_sweep(const Options& o, agmx::FlowVariant variant) {
  const agmx::BuiltProblem prob = agmx::build_problem(make_spec(o));
  // Exact stationary anchor: the identities need grad f(x*) = 0 to the bit.
  const agmx::Objective f = agmx::tilt_to_stationary(prob.objective, prob.objective.require_minimizer());
  const agmx::Vector& xs = f.require_minimizer();
  const double beta = agmx::make_params(Method::HNAG, f).beta();
  const double mu_hat = o.mu_hat_fraction * f.mu();
  agmx::Rng rng(resolve_seed(o));
  agmx::ContractionReport rep;
  rep.theorem_tag = o.theorem;
  bool ok = true;
  long worst_step = -1;
  double worst = 0.0;
  for (int i = 0; i < o.samples; ++i) {
    const agmx::Vector x = xs + rng.normal_vector(f.dim());
    const agmx::Vector y = xs + rng.normal_vector(f.dim());
    const auto t = agmx::strong_lyapunov_terms(variant, f, x, y, beta, mu_hat);
    rep.steps.push_back(i);
    rep.lhs.push_back(t.lhs);
    rep.rhs.push_back(t.rhs);
    rep.residuals.push_back(t.residual());
    const double scaled = -t.residual() / (1.0 + std::abs(t.lhs));
    if (!t.holds(1e-12)) ok = false;
    if (scaled > worst) {
      worst = scaled;
      worst_step = i;
    }
  }
  std::ostringstream text;
  if (o.format == "json") {
    text << agmx::contraction_json(rep).dump(2) << '\n';
  } else {
    agmx::write_contraction_csv(text, rep);
  }
  emit(o, text.str());
  if (!ok) {
    std::cerr << "agmx: strong Lyapunov inequality violated at sample " << worst_step << '\n';
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_diagnose(const Options& o) {
  if (o.theorem == "STRONG_HNAG") return strong_sweep(o, agmx::FlowVariant::HNAG);
  if (o.theorem == "STRONG_HNAG_PLUS") return strong_sweep(o, agmx::FlowVariant::HNAG_PLUS);
  if (o.theorem == "STRONG_PARTIAL") {
    if (!(o.mu_hat_fraction >= 0.0 && o.mu_hat_fraction <= 1.0))
      throw agmx::UsageError("--mu-hat is a fraction of mu in [0, 1]");
    return strong_sweep(o, agmx::FlowVariant::PARTIAL);
  }

  const auto theorem = agmx::parse_theorem(o.theorem);
  if (!theorem)
    throw agmx::UsageError("unknown theorem '" + o.theorem +
                           "' (expected THM_HNAG_FUNCVAL, THM_HNAG_PLUS, PROP_QUADRATIC, STRONG_HNAG, "
                           "STRONG_HNAG_PLUS or STRONG_PARTIAL)");
  const Method m = o.theorem_method ? require_method(*o.theorem_method) : agmx::theorem_method(*theorem);
  if (m != agmx::theorem_method(*theorem))
    throw agmx::UsageError(o.theorem + " concerns " + std::string(agmx::method_name(agmx::theorem_method(*theorem))) +
                           ", not " + std::string(agmx::method_name(m)));
  agmx::SolverConfig config = make_config(o, m);
  config.record_lyapunov = true;
  const agmx::BuiltProblem prob = agmx::build_problem(make_spec(o));
  const agmx::Trace trace = agmx::solve(prob.objective, config, prob.x0);
  const agmx::ContractionReport rep = agmx::contraction_residuals(*theorem, trace, prob.objective);

  std::ostringstream text;
  if (o.format == "json") {
    text << agmx::contraction_json(rep).dump(2) << '\n';
  } else {
    agmx::write_contraction_csv(text, rep);
  }
  emit(o, text.str());
  if (!rep.within(o.rel_tol)) {
    std::cerr << "agmx: " << rep.theorem_tag << " violated at step " << rep.max_violation_step
              << " (excess " << agmx::format_number(rep.max_violation) << ", allowed "
              << agmx::format_number(o.rel_tol * rep.energy0) << ")\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_rates(const Options& o) {
  if (!o.kappa) throw agmx::UsageError("rates needs --kappa");
  const std::vector<Method> methods = require_methods(o.methods);
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "method,kappa,regime,rate\n";
  for (Method m : methods) {
    for (auto regime : {agmx::RateRegime::GENERAL, agmx::RateRegime::QUADRATIC_OR_ASYMPTOTIC}) {
      const char* tag = regime == agmx::RateRegime::GENERAL ? "general" : "asymptotic";
      const double r = agmx::theoretical_rate(m, *o.kappa, regime);
      csv << agmx::method_name(m) << ',' << agmx::format_number(*o.kappa) << ',' << tag << ','
          << agmx::format_number(r) << '\n';
      rows.push_back({{"method", agmx::method_name(m)}, {"kappa", *o.kappa}, {"regime", tag}, {"rate", r}});
    }
  }
  emit(o, o.format == "json" ? rows.dump(2) + "\n" : csv.str());
  return kExitOk;
}

void add_problem_flags(CLI::App* sub, Options& o) {
  sub->add_option("--problem", o.problem, "laplacian2d, piecewise or logistic")
      ->check(CLI::IsMember({"laplacian2d", "piecewise", "logistic"}));
  sub->add_option("--n", o.n, "laplacian2d interior grid size (default 39)");
  sub->add_option("--kappa", o.kappa, "laplacian2d: pick the grid whose condition number is closest");
  sub->add_option("--d", o.d, "dimension (piecewise 100, logistic 1000)");
  sub->add_option("--p", o.p, "piecewise: number of terms (default 5)");
  sub->add_option("--m", o.m, "logistic: number of samples (default 50)");
  sub->add_option("--mu", o.mu, "piecewise: strong convexity (default 1)");
  sub->add_option("--L", o.lipschitz, "piecewise: Lipschitz constant (default 1e4)");
  sub->add_option("--eps", o.eps, "piecewise: epsilon (default 1e-6)");
  sub->add_option("--lambda", o.lambda, "logistic: regularization (default 0.1)");
  sub->add_option("--seed", o.seed, "random seed (falls back to AGMX_SEED, then 42)");
  sub->add_option("--tol", o.tol, "relative gradient tolerance")->capture_default_str();
  sub->add_option("--max-iter", o.max_iter, "iteration cap")->capture_default_str();
  sub->add_option("--out", o.out, "output file (default: stdout)");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agmx: accelerated gradient methods and Lyapunov checks"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "run one method and write its trace");
  add_problem_flags(run, o);
  run->add_option("--method", o.method, "gd, nag, tm, hnag (alias hnagpp), hnag+, hnag_box")->capture_default_str();

  auto* cmp = app.add_subcommand("compare", "run several methods from the same start");
  add_problem_flags(cmp, o);
  cmp->add_option("--methods", o.methods, "comma-separated method list")->capture_default_str();

  auto* diag = app.add_subcommand("diagnose", "check a contraction or strong Lyapunov inequality");
  add_problem_flags(diag, o);
  diag->add_option("--theorem", o.theorem,
                   "THM_HNAG_FUNCVAL, THM_HNAG_PLUS, PROP_QUADRATIC, STRONG_HNAG, STRONG_HNAG_PLUS, STRONG_PARTIAL")
      ->capture_default_str();
  diag->add_option("--method", o.theorem_method, "method to run (must match the theorem)");
  diag->add_option("--mu-hat", o.mu_hat_fraction, "STRONG_PARTIAL shift as a fraction of mu")->capture_default_str();
  diag->add_option("--samples", o.samples, "states per strong Lyapunov sweep")->capture_default_str();
  diag->add_option("--rel-tol", o.rel_tol, "allowed violation relative to the initial energy")->capture_default_str();

  auto* rates = app.add_subcommand("rates", "list theoretical per-iteration rates");
  rates->add_option("--kappa", o.kappa, "condition number")->required();
  rates->add_option("--methods", o.methods, "comma-separated method list")->capture_default_str();
  rates->add_option("--out", o.out, "output file (default: stdout)");
  rates->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(o);
    if (*cmp) return cmd_compare(o);
    if (*diag) return cmd_diagnose(o);
    if (*rates) return cmd_rates(o);
  } catch (const agmx::DivergenceError& e) {
    std::cerr << "agmx: diverged: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const agmx::UsageError& e) {
    std::cerr << "agmx: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const agmx::InputError& e) {
    std::cerr << "agmx: " << e.what() << '\n';
    return kExitUsage;
  } catch (const agmx::ParameterError& e) {
    std::cerr << "agmx: " << e.what() << '\n';
    return kExitUsage;
  } catch (const agmx::Error& e) {
    std::cerr << "agmx: " << e.what() << '\n';
    return kExitNotConverged;
  }
  return kExitUsage;
}
