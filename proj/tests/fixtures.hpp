// Shared test distributions.
#pragma once

#include "idt/agents.hpp"

namespace fixtures {

using namespace idt;

/// q(x) = x on [0, 1].
inline PiecewiseDistribution uniform_unit_segment() {
  return PiecewiseDistribution(
      1, {Piece{Segment{{0.0}, {1.0}, 1.0}, 1.0, AffinePosterior{0.0, {1.0}}}});
}

/// Two parallel unit segments with q = x1; x2 in {0, 1} marks the group.
inline PiecewiseDistribution two_group_uniform() {
  return PiecewiseDistribution(
      2, {Piece{Segment{{0.0, 0.0}, {1.0, 0.0}, 1.0}, 0.5, AffinePosterior{0.0, {1.0, 0.0}}},
          Piece{Segment{{0.0, 1.0}, {1.0, 0.0}, 1.0}, 0.5, AffinePosterior{0.0, {1.0, 0.0}}}});
}

inline GroupWiseAgent two_group_agent(double c0, double c1) {
  GroupWiseAgent gw;
  gw.attribute = AttributeMap{{0.0, 1.0}, {0.5}};
  gw.groups = {LeafAgent{OptimalBayesAgent{c0}}, LeafAgent{OptimalBayesAgent{c1}}};
  return gw;
}

/// Four parallel segments along coordinate 2 of R^3 with q = x2: feature 2
/// Bayes-dominates, features 1 and 3 are pure segment markers.
inline PiecewiseDistribution product_segments3() {
  const double a1[] = {0.1, 0.35, 0.6, 0.85};
  const double a3[] = {0.2, 0.8, 0.4, 0.6};
  std::vector<Piece> pieces;
  for (int k = 0; k < 4; ++k) {
    pieces.push_back(Piece{Segment{{a1[k], 0.0, a3[k]}, {0.0, 1.0, 0.0}, 1.0}, 0.25,
                           AffinePosterior{0.0, {0.0, 1.0, 0.0}}});
  }
  return PiecewiseDistribution(3, std::move(pieces));
}

/// Decision log with explicit observations and decisions (no metadata).
inline DecisionLog make_log(const std::vector<std::vector<double>>& xs,
                            const std::vector<int>& ys) {
  DecisionLog log;
  for (std::size_t i = 0; i < xs.size(); ++i)
    log.records.push_back(SampleRecord{xs[i], ys[i], std::nullopt});
  log.meta.m = xs.size();
  return log;
}

}  // namespace fixtures
