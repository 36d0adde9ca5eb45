#include "idt/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <thread>

namespace idt {

namespace {

int thread_count() {
  if (const char* env = std::getenv("IDT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct TrialOutcome {
  double abs_error = std::numeric_limits<double>::quiet_NaN();
  double width = std::numeric_limits<double>::quiet_NaN();
  std::string error_category;
};

const char* category_of(const Error& e) {
  if (dynamic_cast<const InconsistentLogError*>(&e)) return "inconsistent-log";
  if (dynamic_cast<const NoConsistentClassError*>(&e)) return "no-consistent-class";
  if (dynamic_cast<const NonMonotoneError*>(&e)) return "non-monotone";
  if (dynamic_cast<const EmptyLogError*>(&e)) return "empty-log";
  if (dynamic_cast<const OffSupportError*>(&e)) return "off-support";
  return "error";
}

}  // namespace

PiecewiseDistribution resolve_problem(const ProblemSource& problem) {
  if (const auto* dist = std::get_if<PiecewiseDistribution>(&problem)) return *dist;
  const auto& spec = std::get<ConstructionSpec>(problem);
  return make_construction(spec.name, spec.params, spec.sigma).distribution;
}

TrialReport run_trials(const TrialConfig& config) {
  if (config.trials < 1) throw ParameterRangeError("trial count must be at least 1");
  if (config.m < 1) throw ParameterRangeError("sample size must be at least 1");
  if (!(config.eps > 0.0 && config.eps < 1.0))
    throw ParameterRangeError("eps must lie in (0, 1)");
  if (!(config.delta > 0.0 && config.delta < 1.0))
    throw ParameterRangeError("delta must lie in (0, 1)");
  if (config.regime == Regime::KnownClass && !config.known_class)
    throw ParameterRangeError("known-class regime needs a class");
  if (config.regime == Regime::UnknownFamily && !config.family)
    throw ParameterRangeError("unknown-family regime needs a family");

  const auto t0 = std::chrono::steady_clock::now();
  const PiecewiseDistribution dist = resolve_problem(config.problem);

  // Shared read-only context: estimator setup is amortized across trials.
  std::optional<KnownClassEstimator> known;
  std::optional<UnknownFamilyEstimator> unknown;
  if (config.regime == Regime::KnownClass) known.emplace(dist, *config.known_class);
  if (config.regime == Regime::UnknownFamily) unknown.emplace(dist, *config.family);

  const std::size_t T = config.trials;
  std::vector<TrialOutcome> outcomes(T);

  const auto run_one = [&](std::size_t t) {
    TrialOutcome& out = outcomes[t];
    try {
      const DecisionLog log = generate_log(config.agent, dist, config.m, config.base_seed + t);
      EstimateResult r;
      switch (config.regime) {
        case Regime::Optimal: r = estimate_optimal(dist, log); break;
        case Regime::KnownClass: r = known->estimate(log); break;
        case Regime::UnknownFamily: r = unknown->estimate(log); break;
      }
      out.abs_error = std::abs(r.c_hat - config.true_c);
      out.width = r.hi - r.lo;
    } catch (const Error& e) {
      out.error_category = category_of(e);
    }
  };

  const int workers = std::min<int>(thread_count(), static_cast<int>(T));
  if (workers <= 1) {
    for (std::size_t t = 0; t < T; ++t) run_one(t);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < T; t += workers) run_one(t);
      });
    for (auto& th : pool) th.join();
  }

  TrialReport report;
  report.abs_errors.reserve(T);
  report.interval_widths.reserve(T);
  std::size_t failures = 0, ok = 0;
  double err_sum = 0.0, width_sum = 0.0;
  for (const TrialOutcome& out : outcomes) {
    report.abs_errors.push_back(out.abs_error);
    report.interval_widths.push_back(out.width);
    if (!out.error_category.empty()) {
      ++report.error_counts[out.error_category];
      ++failures;  // an errored trial cannot claim success
      continue;
    }
    ++ok;
    err_sum += out.abs_error;
    width_sum += out.width;
    if (out.abs_error > config.eps) ++failures;
  }
  if (ok == 0) throw Error("every trial failed with an estimator error");
  report.failure_frequency = static_cast<double>(failures) / T;
  report.binomial_se =
      std::sqrt(report.failure_frequency * (1.0 - report.failure_frequency) / T);
  report.mean_abs_error = err_sum / ok;
  report.mean_interval_width = width_sum / ok;
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return report;
}

std::vector<RateRow> rate_curve(const TrialConfig& config,
                                const std::vector<std::size_t>& m_values) {
  if (m_values.empty()) throw ParameterRangeError("rate curve needs at least one sample size");
  for (std::size_t i = 1; i < m_values.size(); ++i)
    if (m_values[i] <= m_values[i - 1])
      throw ParameterRangeError("sample sizes must be strictly ascending");

  std::vector<RateRow> rows;
  rows.reserve(m_values.size());
  TrialConfig local = config;
  for (std::size_t k = 0; k < m_values.size(); ++k) {
    local.m = m_values[k];
    local.base_seed = config.base_seed + k * config.trials;  // no seed reuse across rows
    const TrialReport r = run_trials(local);
    rows.push_back({m_values[k], r.failure_frequency, r.mean_abs_error, r.mean_interval_width});
  }
  return rows;
}

std::string rate_curve_csv(const std::vector<RateRow>& rows) {
  std::string out = "m,failure_frequency,mean_abs_error,mean_interval_width\n";
  char buf[160];
  for (const RateRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", r.m, r.failure_frequency,
                  r.mean_abs_error, r.mean_interval_width);
    out += buf;
  }
  return out;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::Optimal: return "optimal";
    case Regime::KnownClass: return "known-class";
    default: return "unknown-family";
  }
}

Regime regime_from_string(const std::string& name) {
  if (name == "optimal") return Regime::Optimal;
  if (name == "known-class") return Regime::KnownClass;
  if (name == "unknown-family") return Regime::UnknownFamily;
  throw ParseError("unknown regime '" + name + "'");
}

std::string version_string() { return "idt 0.1.0"; }

}  // namespace idt
