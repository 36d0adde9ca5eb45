#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "idt/distribution.hpp"

namespace idt {

/// Linear score f(x) = weights . x; the threshold supplies the offset.
struct AffineScore {
  std::vector<double> weights;
};

/// Score by the conditional probability P(Y = 1 | X_S = x_S), computed
/// against the distribution the rule is evaluated on.  Feature indices are
/// 1-based, matching the external descriptors.
struct SubsetPosteriorScore {
  std::vector<int> features;
};

using ScoreFunction = std::variant<AffineScore, SubsetPosteriorScore>;

struct ThresholdRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Monotone hypothesis class: { 1{f(x) >= b} | b in range }, unbounded when
/// no range is given.
struct ThresholdClass {
  ScoreFunction score;
  std::optional<ThresholdRange> range;
};

struct DecisionRule {
  ScoreFunction score;
  double threshold = 0.0;
};

struct ExplicitFamily {
  std::vector<std::pair<std::string, ThresholdClass>> classes;
};

/// All subset-posterior threshold classes over subsets of size 1..max_cardinality.
struct FeatureSubsetsFamily {
  int dimension = 0;
  int max_cardinality = 0;
};

using ClassFamily = std::variant<ExplicitFamily, FeatureSubsetsFamily>;

/// Conditional probability P(Y = 1 | X_S = v) computed exactly from the
/// piece geometry.  Atoms of the marginal dominate continuous contributions.
/// Throws OffSupportError when v misses every piece projection.
double conditional_class1_given_features(const PiecewiseDistribution& dist,
                                         std::span<const int> features,
                                         std::span<const double> values);

/// Conditional probability P(Y = 1 | w . X = s), same conventions.
double conditional_class1_given_affine(const PiecewiseDistribution& dist,
                                       std::span<const double> weights, double s);

/// Score value at a point (affine dot product or conditional probability).
double eval_score(const ScoreFunction& score, const PiecewiseDistribution& dist,
                  std::span<const double> x);

/// 1{f(x) >= b} with the >= convention.
int apply_rule(const DecisionRule& rule, const PiecewiseDistribution& dist,
               std::span<const double> x);

/// Sorted threshold values at which the rule's decision regions change
/// combinatorially: projections of piece endpoints and corners onto the
/// score axis.  Constant-score pieces contribute atoms ((score, mass) pairs).
struct ScoreBreakdown {
  std::vector<double> breakpoints;
  std::vector<std::pair<double, double>> atoms;
};
ScoreBreakdown score_breakdown(const PiecewiseDistribution& dist, const ScoreFunction& score);

bool same_score(const ScoreFunction& a, const ScoreFunction& b);

std::string describe_score(const ScoreFunction& score);

}  // namespace idt
