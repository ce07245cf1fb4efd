#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "agmx/analysis.hpp"
#include "agmx/lyapunov.hpp"
#include "agmx/solvers.hpp"

namespace agmx {

/// Round-trip decimal form; "nan" and "inf"/"-inf" for non-finite values.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kTraceHeader = "k,f_gap,grad_norm,x_err_sq,y_err_sq,E,E_shifted";
inline constexpr const char* kContractionHeader = "k,lhs,rhs,residual";
inline constexpr const char* kComparisonHeader = "method,kappa,iterations,runtime_s,measured_rate,theoretical_rate";

inline void write_trace_csv(std::ostream& os, const Trace& t) {
  os << kTraceHeader << '\n';
  for (const auto& r : t.records) {
    os << r.k << ',' << format_number(r.f_gap) << ',' << format_number(r.grad_norm) << ','
       << format_number(r.x_err_sq) << ',' << format_number(r.y_err_sq) << ',' << format_number(r.E) << ','
       << format_number(r.E_shifted) << '\n';
  }
}

inline void write_contraction_csv(std::ostream& os, const ContractionReport& rep) {
  os << kContractionHeader << '\n';
  for (std::size_t i = 0; i < rep.residuals.size(); ++i) {
    os << rep.steps[i] << ',' << format_number(rep.lhs[i]) << ',' << format_number(rep.rhs[i]) << ','
       << format_number(rep.residuals[i]) << '\n';
  }
}

inline void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  os << kComparisonHeader << '\n';
  for (const auto& r : rows) {
    os << method_name(r.method) << ',' << format_number(r.kappa) << ',' << r.iterations << ','
       << format_number(r.runtime_seconds) << ',' << format_number(r.measured_rate) << ','
       << format_number(r.theoretical_rate) << '\n';
  }
}

/// JSON has no NaN; non-finite numbers become null.
inline nlohmann::json json_number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json comparison_json(const std::vector<ComparisonRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"method", method_name(r.method)},
                   {"kappa", json_number(r.kappa)},
                   {"iterations", r.iterations},
                   {"runtime_s", json_number(r.runtime_seconds)},
                   {"measured_rate", json_number(r.measured_rate)},
                   {"theoretical_rate", json_number(r.theoretical_rate)},
                   {"status", r.status}});
  }
  return arr;
}

inline nlohmann::json contraction_json(const ContractionReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < rep.residuals.size(); ++i) {
    rows.push_back({{"k", rep.steps[i]},
                    {"lhs", json_number(rep.lhs[i])},
                    {"rhs", json_number(rep.rhs[i])},
                    {"residual", json_number(rep.residuals[i])}});
  }
  return {{"theorem", rep.theorem_tag},
          {"rate", json_number(rep.rate)},
          {"energy0", json_number(rep.energy0)},
          {"max_violation", json_number(rep.max_violation)},
          {"max_violation_step", rep.max_violation_step},
          {"steps", std::move(rows)}};
}

}  // namespace agmx
