#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "idt/risk.hpp"
#include "idt/score.hpp"

namespace idt {

/// Risk-minimizing threshold rule within the class for loss parameter c.
/// The analytic risk is piecewise polynomial in the threshold; the search
/// enumerates its breakpoints (projections of piece endpoints and corners
/// onto the score axis) and refines inside each smooth interval.  Ties
/// resolve toward the smallest threshold.
DecisionRule optimal_in_class(const PiecewiseDistribution& dist, const ThresholdClass& cls,
                              double c);

/// Induced posterior q_H(x): the loss parameter at which the class-optimal
/// decision at x flips, located by bisection over c (tolerance 1e-9, 60
/// iterations).  The endpoints follow the sup-with-0 / inf-with-1
/// conventions.  Throws NonMonotoneError when the flip is not unique on the
/// probe grid.
double induced_posterior(const PiecewiseDistribution& dist, const ThresholdClass& cls,
                         std::span<const double> x);

/// Reusable induced-posterior evaluator.  When the conditional P(Y=1 | f(X))
/// is monotone on a probe grid the flip point equals that conditional
/// saturated outside the threshold range; this gives estimators an O(1)
/// per-record evaluation.  Non-monotone classes fall back to the bisection.
class InducedPosteriorMap {
public:
  InducedPosteriorMap(const PiecewiseDistribution& dist, const ThresholdClass& cls);

  double score(std::span<const double> x) const;
  double at_score(double s) const;
  double at(std::span<const double> x) const { return at_score(score(x)); }

  bool monotone_fast_path() const noexcept { return monotone_; }
  double range_lo() const noexcept { return range_lo_; }
  double range_hi() const noexcept { return range_hi_; }

private:
  const PiecewiseDistribution* dist_;
  ThresholdClass cls_;
  double range_lo_;
  double range_hi_;
  bool monotone_;
};

struct MonotoneReport {
  bool monotone = false;
  bool vacuous = false;  // decisions never vary over the c grid
};

/// Grid check of Definition-style monotonicity: for c < c' the optimal
/// decisions must satisfy h_{c'}(x) <= h_c(x) at every probe point.
MonotoneReport check_monotone_report(const PiecewiseDistribution& dist, const ThresholdClass& cls,
                                     std::span<const double> c_grid,
                                     std::span<const std::vector<double>> x_grid);
bool check_monotone(const PiecewiseDistribution& dist, const ThresholdClass& cls,
                    std::span<const double> c_grid,
                    std::span<const std::vector<double>> x_grid);

/// Default probe grids for the monotonicity check: c in {0.1,...,0.9} and
/// the pieces' extreme points plus piece midpoints.
std::vector<double> default_c_grid();
std::vector<std::vector<double>> default_x_grid(const PiecewiseDistribution& dist);

/// MD(h, cls) = inf over thresholds of P(member(X) != h(X)), exact up to
/// the breakpoint refinement (1e-10).
double min_disagreement(const PiecewiseDistribution& dist, const DecisionRule& rule,
                        const ThresholdClass& cls);

struct MinDisagreement {
  double value = 0.0;
  double threshold = 0.0;  // the minimizing member's threshold
};
MinDisagreement min_disagreement_arg(const PiecewiseDistribution& dist, const DecisionRule& rule,
                                     const ThresholdClass& cls);

struct MdSmoothness {
  double alpha = 0.0;
  bool unbounded = false;
};

/// Smallest alpha on the grid such that
/// MD(h_{c'}, opt(F)) <= (1 + alpha |c' - c|) MD(h_c, opt(F)) for every
/// foreign class F and grid point c'.  Unbounded when some MD(h_c, .) = 0
/// while MD(h_{c'}, .) > 0.  opt(F) is probed on a loss-parameter grid of
/// `opt_grid` points; this is a certified grid estimate, not a proof.
MdSmoothness md_smoothness_alpha(const PiecewiseDistribution& dist, const ClassFamily& family,
                                 const std::string& home_class_id, double c,
                                 std::span<const double> c_grid, int opt_grid = 512);

/// VC upper bound ceil(1 + 2 s log2(n + 1)) for the union of subset-posterior
/// threshold classes with |S| <= s over n features.
int feature_subset_vc_bound(int n, int s);

/// Expand a family into (identifier, class) pairs.  Feature-subset families
/// enumerate subsets in lexicographic order by (cardinality, indices) and
/// are guarded to at most 10^6 classes.
std::vector<std::pair<std::string, ThresholdClass>> enumerate_family(const ClassFamily& family);

}  // namespace idt
