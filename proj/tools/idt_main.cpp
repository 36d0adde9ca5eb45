// Command line surface for the inverse-decision-theory library: simulate
// decision logs, estimate loss parameters, sweep sample-complexity curves,
// demonstrate the lower-bound constructions, and audit group calibration.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "idt/io.hpp"

namespace {

using namespace idt;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInconsistent = 3;
constexpr int kExitCheckFailed = 4;

// A problem source is either a path to a distribution JSON document or an
// inline construction spec "construction:<name>?key=value&key=value".
ProblemSource parse_problem(const std::string& text) {
  if (text.rfind("construction:", 0) == 0) {
    ConstructionSpec spec;
    std::string rest = text.substr(13);
    const auto qmark = rest.find('?');
    spec.name = rest.substr(0, qmark);
    if (qmark != std::string::npos) {
      std::string query = rest.substr(qmark + 1);
      std::size_t pos = 0;
      while (pos < query.size()) {
        const auto amp = query.find('&', pos);
        const std::string kv = query.substr(pos, amp == std::string::npos ? amp : amp - pos);
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError("bad construction parameter '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (key == "sigma") {
          spec.sigma.clear();
          std::size_t p = 0;
          while (p < value.size()) {
            const auto comma = value.find(',', p);
            spec.sigma.push_back(std::stoi(value.substr(p, comma - p)));
            if (comma == std::string::npos) break;
            p = comma + 1;
          }
        } else {
          spec.params[key] = std::stod(value);
        }
        if (amp == std::string::npos) break;
        pos = amp + 1;
      }
    }
    return spec;
  }
  return io::distribution_from_json(io::read_file(text));
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << "\n";
  } else {
    io::write_file(out_path, content);
  }
}

std::vector<std::size_t> parse_m_values(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    out.push_back(static_cast<std::size_t>(std::stoull(text.substr(pos, comma - pos))));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"inverse decision theory: simulation, estimation, and rate verification"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a decision log from an agent");
  std::string sim_problem, sim_agent, sim_out;
  std::size_t sim_m = 100;
  std::uint64_t sim_seed = 0;
  sim->add_option("--problem", sim_problem, "distribution JSON path or construction:<name>?...")
      ->required();
  sim->add_option("--agent", sim_agent, "agent JSON path")->required();
  sim->add_option("--m", sim_m, "number of records")->required();
  sim->add_option("--seed", sim_seed, "sampling seed");
  sim->add_option("--out", sim_out, "output JSONL path (stdout when omitted)");

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate the loss parameter from a log");
  std::string est_problem, est_log, est_regime = "optimal", est_class, est_family, est_out;
  est->add_option("--problem", est_problem, "distribution JSON path or construction:<name>?...")
      ->required();
  est->add_option("--log", est_log, "decision log JSONL path")->required();
  est->add_option("--regime", est_regime, "optimal | known-class | unknown-family");
  est->add_option("--class", est_class, "threshold class JSON (known-class regime)");
  est->add_option("--family", est_family, "class family JSON (unknown-family regime)");
  est->add_option("--out", est_out, "output JSON path");

  // verify-rate
  auto* rate = app.add_subcommand("verify-rate", "run Monte Carlo trials over sample sizes");
  std::string rate_config, rate_mvals, rate_out;
  double rate_max_failure = -1.0;
  rate->add_option("--config", rate_config, "trial config JSON path")->required();
  rate->add_option("--m-values", rate_mvals, "comma-separated sample sizes (default: config m)");
  rate->add_option("--out", rate_out, "output CSV path");
  rate->add_option("--max-failure", rate_max_failure,
                   "exit 4 if any row's failure frequency exceeds this bound");

  // lower-bound
  auto* lower = app.add_subcommand("lower-bound", "build and verify a named construction");
  std::string lower_name, lower_sigma, lower_out;
  double lb_eps = -1.0, lb_pc = -1.0, lb_slack = -1.0;
  int lb_d = -1;
  lower->add_option("name", lower_name, "construction name")->required();
  lower->add_option("--eps", lb_eps, "precision parameter");
  lower->add_option("--p-c", lb_pc, "density floor parameter");
  lower->add_option("--delta-slack", lb_slack, "excess-risk slack (near-optimal)");
  lower->add_option("--d", lb_d, "VC-dimension parameter (subopt-dim-lower)");
  lower->add_option("--sigma", lower_sigma, "comma-separated +1/-1 vector (subopt-dim-lower)");
  lower->add_option("--out", lower_out, "output JSON path");

  // audit-fairness
  auto* audit = app.add_subcommand("audit-fairness", "group-calibration audit of an attributed log");
  std::string audit_problem, audit_log, audit_out;
  double audit_eps = 1e-9;
  audit->add_option("--problem", audit_problem, "distribution JSON path or construction:<name>?...")
      ->required();
  audit->add_option("--log", audit_log, "attributed decision log JSONL path")->required();
  audit->add_option("--eps", audit_eps, "minimum witness mass for NotCalibrated");
  audit->add_option("--out", audit_out, "output JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*sim) {
      const PiecewiseDistribution dist = resolve_problem(parse_problem(sim_problem));
      const Agent agent = io::agent_from_json(io::read_file(sim_agent));
      const DecisionLog log = generate_log(agent, dist, sim_m, sim_seed);
      emit(sim_out, io::log_to_jsonl(log));
      return kExitOk;
    }

    if (*est) {
      const PiecewiseDistribution dist = resolve_problem(parse_problem(est_problem));
      const DecisionLog log = io::log_from_jsonl(io::read_file(est_log));
      if (!log.meta.distribution_digest.empty() &&
          log.meta.distribution_digest != dist.digest()) {
        std::cerr << "warning: log was generated against distribution "
                  << log.meta.distribution_digest << ", estimating against " << dist.digest()
                  << "\n";
      }
      const Regime regime = regime_from_string(est_regime);
      EstimateResult result;
      if (regime == Regime::Optimal) {
        result = estimate_optimal(dist, log);
      } else if (regime == Regime::KnownClass) {
        if (est_class.empty()) throw ParseError("--class is required for known-class");
        result = estimate_known_class(
            dist, io::threshold_class_from_json(io::read_file(est_class)), log);
      } else {
        if (est_family.empty()) throw ParseError("--family is required for unknown-family");
        result =
            estimate_unknown_family(dist, io::family_from_json(io::read_file(est_family)), log);
      }
      emit(est_out, io::estimate_to_json(result));
      return kExitOk;
    }

    if (*rate) {
      const TrialConfig config = io::trial_config_from_json(io::read_file(rate_config));
      const std::vector<std::size_t> ms =
          rate_mvals.empty() ? std::vector<std::size_t>{config.m} : parse_m_values(rate_mvals);
      const auto t0 = std::chrono::steady_clock::now();
      const std::vector<RateRow> rows = rate_curve(config, ms);
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      emit(rate_out, rate_curve_csv(rows));
      std::fprintf(stderr, "verify-rate: %zu rows x %zu trials in %.2fs\n", rows.size(),
                   config.trials, wall);
      if (rate_max_failure >= 0.0)
        for (const RateRow& row : rows)
          if (row.failure_frequency > rate_max_failure) {
            std::fprintf(stderr, "m=%zu failure frequency %.4f exceeds bound %.4f\n", row.m,
                         row.failure_frequency, rate_max_failure);
            return kExitCheckFailed;
          }
      return kExitOk;
    }

    if (*lower) {
      std::map<std::string, double> params;
      if (lb_eps > 0) params["eps"] = lb_eps;
      if (lb_pc > 0) params["p_c"] = lb_pc;
      if (lb_slack > 0) params["delta_slack"] = lb_slack;
      if (lb_d > 0) params["d"] = lb_d;
      std::vector<int> sigma;
      if (!lower_sigma.empty()) {
        std::size_t p = 0;
        while (p < lower_sigma.size()) {
          const auto comma = lower_sigma.find(',', p);
          sigma.push_back(std::stoi(lower_sigma.substr(p, comma - p)));
          if (comma == std::string::npos) break;
          p = comma + 1;
        }
      }
      const ConstructionBundle bundle = make_construction(lower_name, params, sigma);
      try {
        verify_bundle(bundle);
      } catch (const Error& e) {
        std::cerr << "bundle verification failed: " << e.what() << "\n";
        return kExitCheckFailed;
      }
      emit(lower_out, io::bundle_report_to_json(bundle));
      return kExitOk;
    }

    if (*audit) {
      const PiecewiseDistribution dist = resolve_problem(parse_problem(audit_problem));
      const DecisionLog log = io::log_from_jsonl(io::read_file(audit_log));
      const FairnessReport report = audit_fairness(dist, log, audit_eps);
      emit(audit_out, io::fairness_to_json(report));
      return kExitOk;
    }
  } catch (const InconsistentLogError& e) {
    std::cerr << "estimator inconsistency: " << e.what() << "\n";
    return kExitInconsistent;
  } catch (const NoConsistentClassError& e) {
    std::cerr << "estimator inconsistency: " << e.what() << "\n";
    return kExitInconsistent;
  } catch (const EmptyLogError& e) {
    std::cerr << "estimator inconsistency: " << e.what() << "\n";
    return kExitInconsistent;
  } catch (const MissingAttributeError& e) {
    std::cerr << "estimator inconsistency: " << e.what() << "\n";
    return kExitInconsistent;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
