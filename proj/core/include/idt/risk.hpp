#pragma once

#include "idt/distribution.hpp"
#include "idt/score.hpp"

namespace idt {

/// Exact expected loss E[l_c(h(X), Y)] of the threshold rule, computed in
/// closed form per piece (interval clipping on segments, halfplane clipping
/// on rectangles, exact affine integrals).
double risk(const PiecewiseDistribution& dist, double c, const DecisionRule& rule);

/// Exact expected loss under a full 2x2 cost matrix.
double risk(const PiecewiseDistribution& dist, const CostMatrix& cost, const DecisionRule& rule);

/// Exact P(h1(X) != h2(X)).
double disagreement_prob(const PiecewiseDistribution& dist, const DecisionRule& h1,
                         const DecisionRule& h2);

/// Mass and class-1 share of the score band { f(X) in [lo, hi) }.
struct BandStats {
  double mass = 0.0;
  double class1 = 0.0;  // P(Y = 1 | band), meaningful when mass > 0
};
BandStats score_band(const PiecewiseDistribution& dist, const ScoreFunction& score, double lo,
                     double hi);

/// P(f(X) >= b) and the class-1 mass above the threshold; the building
/// blocks of the piecewise-polynomial risk in b.
struct UpperMass {
  double mass = 0.0;  // P(f >= b)
  double q1 = 0.0;    // P(f >= b and Y = 1)
};
UpperMass upper_mass(const PiecewiseDistribution& dist, const DecisionRule& rule);

/// Ambient-space vertices of the rule's positive region within each piece
/// (interval endpoints on segments, clipped polygon corners on rectangles).
/// These are the geometric breakpoints of disagreement objectives.
std::vector<std::vector<double>> rule_region_vertices(const PiecewiseDistribution& dist,
                                                      const DecisionRule& rule);

}  // namespace idt
