#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idt/agents.hpp"

namespace idt {

/// A ready-to-run adversarial instance: distribution, candidate loss
/// parameters, the decision makers that realize them, the rules they play,
/// and every named constant echoed in `notes`.
struct ConstructionBundle {
  std::string name;
  PiecewiseDistribution distribution;
  std::vector<double> candidate_c;
  std::vector<Agent> agents;             // aligned with candidate_c
  std::vector<DecisionRule> stated_rules;  // aligned with candidate_c
  std::optional<ClassFamily> family;
  std::map<std::string, double> notes;
  double rule_rederivation_tol = 1e-8;
};

/// Optimal decision makers at c = 1/2 -+ eps over a distribution whose
/// posterior band (1/2 - 2 eps, 1/2 + 2 eps) carries density p_c; samples
/// land on the certain atoms with high probability, hiding c.
/// Requires 0 < eps < 1/4 and 0 < p_c <= 1/(8 eps).
ConstructionBundle optimal_lower(double eps, double p_c);

/// Two certain atoms: any pair of loss parameters produces identical logs.
ConstructionBundle no_uncertainty_instance();

/// Two parameters sharing one rule that is exactly optimal for the first
/// and delta-close to optimal for the second.  Requires delta_slack in
/// (0, 1] and eps in (0, 1/4).
ConstructionBundle near_optimal_counterexample(double delta_slack, double eps);

/// Two-class family whose optimal rules differ only on a band of mass
/// 20 p_c eps^2.  The linearly increasing density segment is realized as 64
/// uniform sub-segments (trapezoidal weights); `notes` records the
/// approximation error.  Requires 0 < eps <= 1/8, 0 < p_c <= 1/10.
ConstructionBundle suboptimal_lower(double eps, double p_c);

/// Sign-indexed family over n = d - 2 coordinate segments; the 2^n classes
/// are exposed lazily through sign_weighted_class rather than enumerated.
/// Requires d >= 6 with d = 2 mod 4, 0 < eps <= 1/(64 sqrt(d-2)),
/// 0 < p_c <= 1, sigma in {-1, +1}^(d-2).
ConstructionBundle suboptimal_dim_lower(int d, double eps, double p_c,
                                        const std::vector<int>& sigma);

/// Member accessor for the sign-indexed family of suboptimal_dim_lower.
ThresholdClass sign_weighted_class(int n, double eps, const std::vector<int>& sigma);

/// Two unit squares in opposite quadrants where thresholds on x1 and on x2
/// are indistinguishable although their loss parameters differ by 1/5; the
/// family is not MD-smooth for any alpha.  Requires eps in (0, 1/10).
ConstructionBundle md_unsmooth_instance(double eps);

/// Re-derives each stated rule via optimal_in_class and validates the
/// distribution; throws Error on mismatch beyond the bundle tolerance.
void verify_bundle(const ConstructionBundle& bundle);

/// CLI-facing factory: name in {optimal-lower, no-uncertainty, near-optimal,
/// subopt-lower, subopt-dim-lower, md-unsmooth}.
ConstructionBundle make_construction(const std::string& name,
                                     const std::map<std::string, double>& params,
                                     const std::vector<int>& sigma = {});

std::vector<std::string> construction_names();

}  // namespace idt
