#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "idt/constructions.hpp"
#include "idt/estimators.hpp"

namespace idt {

struct ConstructionSpec {
  std::string name;
  std::map<std::string, double> params;
  std::vector<int> sigma;
};

using ProblemSource = std::variant<ConstructionSpec, PiecewiseDistribution>;

enum class Regime { Optimal, KnownClass, UnknownFamily };

struct TrialConfig {
  ProblemSource problem = ConstructionSpec{"no-uncertainty", {}, {}};
  Agent agent = OptimalBayesAgent{0.5};
  double true_c = 0.5;
  Regime regime = Regime::Optimal;
  std::optional<ThresholdClass> known_class;  // KnownClass regime
  std::optional<ClassFamily> family;          // UnknownFamily regime
  std::size_t m = 1;
  std::size_t trials = 1;
  double eps = 0.05;    // target precision
  double delta = 0.1;   // failure budget
  std::uint64_t base_seed = 0;
};

/// Per-trial outcomes plus aggregates.  A trial that raises an estimator
/// error is counted as a failure and tallied by category, never fatal
/// unless every trial fails.
struct TrialReport {
  std::vector<double> abs_errors;       // NaN for errored trials
  std::vector<double> interval_widths;  // NaN for errored trials
  double failure_frequency = 0.0;       // P(|c_hat - c| > eps)
  double binomial_se = 0.0;
  double mean_abs_error = 0.0;
  double mean_interval_width = 0.0;
  std::map<std::string, std::size_t> error_counts;
  double wall_ms = 0.0;  // informational; excluded from serialized reports
};

/// Independent trials with seeds base_seed + index; trial t draws a fresh
/// log and runs the configured estimator.  Deterministic given the config;
/// trials may run on IDT_THREADS worker threads but aggregate in index
/// order.
TrialReport run_trials(const TrialConfig& config);

struct RateRow {
  std::size_t m = 0;
  double failure_frequency = 0.0;
  double mean_abs_error = 0.0;
  double mean_interval_width = 0.0;
};

/// One run_trials per sample size, seeds offset so no trial seed repeats
/// within the curve.
std::vector<RateRow> rate_curve(const TrialConfig& config,
                                const std::vector<std::size_t>& m_values);

std::string rate_curve_csv(const std::vector<RateRow>& rows);

PiecewiseDistribution resolve_problem(const ProblemSource& problem);

const char* to_string(Regime regime);
Regime regime_from_string(const std::string& name);

/// Library version stamp embedded in reports.
std::string version_string();

}  // namespace idt
