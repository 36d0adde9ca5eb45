#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idt/agents.hpp"
#include "idt/hypothesis.hpp"

namespace idt {

struct ConsistentClassSummary {
  std::string id;
  double lo = 0.0;
  double hi = 1.0;
  double c_hat = 0.5;
};

struct EstimateDiagnostics {
  std::size_t m = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  bool consistency_verified = false;
  std::vector<ConsistentClassSummary> consistent_classes;  // unknown-family regime
  std::vector<std::string> notes;
};

/// The deterministic consistency interval (lo, hi] of loss parameters that
/// explain every observed decision, with the midpoint as the point estimate.
struct EstimateResult {
  double lo = 0.0;
  double hi = 1.0;
  double c_hat = 0.5;
  std::optional<std::string> selected_class_id;
  EstimateDiagnostics diagnostics;
};

/// Optimal-decision-maker regime: thresholds the true posterior.
EstimateResult estimate_optimal(const PiecewiseDistribution& dist, const DecisionLog& log);

/// Known-class regime: thresholds the induced posterior of the class.
/// The estimator form amortizes the monotonicity grid check and the induced
/// posterior map across many logs of the same problem.
class KnownClassEstimator {
public:
  KnownClassEstimator(const PiecewiseDistribution& dist, const ThresholdClass& cls);
  EstimateResult estimate(const DecisionLog& log) const;

private:
  const PiecewiseDistribution* dist_;
  ThresholdClass cls_;
  InducedPosteriorMap map_;
};

EstimateResult estimate_known_class(const PiecewiseDistribution& dist, const ThresholdClass& cls,
                                    const DecisionLog& log);

/// Unknown-family regime: tries every class in enumeration order, keeps the
/// consistent ones, and selects the least complex (feature subsets by
/// cardinality then lexicographic order, explicit families by list order).
class UnknownFamilyEstimator {
public:
  UnknownFamilyEstimator(const PiecewiseDistribution& dist, const ClassFamily& family);
  EstimateResult estimate(const DecisionLog& log) const;

private:
  struct Member {
    std::string id;
    std::optional<KnownClassEstimator> estimator;  // absent: failed monotone check
  };
  std::vector<Member> members_;
};

EstimateResult estimate_unknown_family(const PiecewiseDistribution& dist,
                                       const ClassFamily& family, const DecisionLog& log);

enum class FairnessVerdict { Calibrated, NotCalibrated, Inconclusive };

struct FairnessWitness {
  int group_a = 0;
  int group_b = 0;
  double mass = 0.0;  // P(q(X) strictly between the two group intervals)
};

struct FairnessReport {
  std::map<int, EstimateResult> per_group;
  FairnessVerdict verdict = FairnessVerdict::Inconclusive;
  std::optional<FairnessWitness> witness;
  // Threshold of the sufficiency score r(x) = q(x) + h(x) per group.
  std::map<int, double> sufficiency_threshold;
};

/// Splits an attributed log by group, estimates each group's loss parameter
/// in the optimal regime, and tests group calibration by interval overlap.
/// NotCalibrated requires a disjoint pair whose between-interval posterior
/// mass exceeds eps.
FairnessReport audit_fairness(const PiecewiseDistribution& dist, const DecisionLog& log,
                              double eps = 1e-9);

const char* to_string(FairnessVerdict verdict);

}  // namespace idt
