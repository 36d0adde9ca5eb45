#include "idt/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace idt {

namespace {

struct IntervalFold {
  double lo = 0.0;  // max posterior among negative decisions
  double hi = 1.0;  // min posterior among positive decisions
  std::size_t positives = 0;
  std::size_t negatives = 0;

  void add(double q, int yhat) {
    if (yhat == 1) {
      hi = std::min(hi, q);
      ++positives;
    } else {
      lo = std::max(lo, q);
      ++negatives;
    }
  }
  bool consistent() const { return lo < hi; }
};

double midpoint(double lo, double hi) {
  double mid = 0.5 * (lo + hi);
  // keep the estimate strictly inside (lo, hi] even when the interval is at
  // double resolution
  if (mid <= lo) mid = hi;
  return mid;
}

EstimateResult finish(const IntervalFold& fold, std::size_t m) {
  if (!fold.consistent())
    throw InconsistentLogError(
        "no loss parameter explains the log: a negative decision's posterior (" +
        std::to_string(fold.lo) + ") meets or exceeds a positive decision's (" +
        std::to_string(fold.hi) + ")");
  EstimateResult r;
  r.lo = fold.lo;
  r.hi = fold.hi;
  r.c_hat = midpoint(fold.lo, fold.hi);
  r.diagnostics.m = m;
  r.diagnostics.positives = fold.positives;
  r.diagnostics.negatives = fold.negatives;
  return r;
}

}  // namespace

EstimateResult estimate_optimal(const PiecewiseDistribution& dist, const DecisionLog& log) {
  if (log.records.empty()) throw EmptyLogError("cannot estimate from an empty log");
  IntervalFold fold;
  for (const SampleRecord& rec : log.records) fold.add(dist.posterior(rec.x), rec.yhat);
  EstimateResult r = finish(fold, log.records.size());
  bool ok = true;
  for (const SampleRecord& rec : log.records)
    if ((dist.posterior(rec.x) >= r.c_hat) != (rec.yhat == 1)) ok = false;
  r.diagnostics.consistency_verified = ok;
  return r;
}

KnownClassEstimator::KnownClassEstimator(const PiecewiseDistribution& dist,
                                         const ThresholdClass& cls)
    : dist_(&dist), cls_(cls), map_(dist, cls) {
  if (!check_monotone(dist, cls, default_c_grid(), default_x_grid(dist)))
    throw NonMonotoneError("class fails the monotonicity grid check");
}

EstimateResult KnownClassEstimator::estimate(const DecisionLog& log) const {
  if (log.records.empty()) throw EmptyLogError("cannot estimate from an empty log");
  const PiecewiseDistribution& dist = *dist_;
  const ThresholdClass& cls = cls_;
  const InducedPosteriorMap& map = map_;
  EstimateResult r;
  if (map.monotone_fast_path()) {
    // The induced posterior is nondecreasing in the score, so only the
    // extreme scores on each side of the decision matter.
    double smax_neg = -std::numeric_limits<double>::infinity();
    double smin_pos = std::numeric_limits<double>::infinity();
    IntervalFold fold;
    for (const SampleRecord& rec : log.records) {
      const double s = map.score(rec.x);
      if (rec.yhat == 1) {
        smin_pos = std::min(smin_pos, s);
        ++fold.positives;
      } else {
        smax_neg = std::max(smax_neg, s);
        ++fold.negatives;
      }
    }
    if (fold.negatives > 0) fold.lo = std::max(0.0, map.at_score(smax_neg));
    if (fold.positives > 0) fold.hi = std::min(1.0, map.at_score(smin_pos));
    r = finish(fold, log.records.size());
  } else {
    IntervalFold fold;
    for (const SampleRecord& rec : log.records) fold.add(map.at(rec.x), rec.yhat);
    r = finish(fold, log.records.size());
  }

  // Exact re-check: the class-optimal rule at the estimate must reproduce
  // every observed decision.
  const DecisionRule verify = optimal_in_class(dist, cls, r.c_hat);
  bool ok = true;
  for (const SampleRecord& rec : log.records)
    if (apply_rule(verify, dist, rec.x) != rec.yhat) ok = false;
  r.diagnostics.consistency_verified = ok;
  return r;
}

EstimateResult estimate_known_class(const PiecewiseDistribution& dist, const ThresholdClass& cls,
                                    const DecisionLog& log) {
  return KnownClassEstimator(dist, cls).estimate(log);
}

UnknownFamilyEstimator::UnknownFamilyEstimator(const PiecewiseDistribution& dist,
                                               const ClassFamily& family) {
  for (const auto& [id, cls] : enumerate_family(family)) {
    try {
      members_.push_back(Member{id, KnownClassEstimator(dist, cls)});
    } catch (const NonMonotoneError&) {
      members_.push_back(Member{id, std::nullopt});
    }
  }
}

EstimateResult UnknownFamilyEstimator::estimate(const DecisionLog& log) const {
  if (log.records.empty()) throw EmptyLogError("cannot estimate from an empty log");
  std::optional<EstimateResult> selected;
  std::vector<ConsistentClassSummary> consistent;
  std::vector<std::string> notes;
  for (const Member& member : members_) {
    if (!member.estimator) {
      notes.push_back("class " + member.id + " skipped: failed the monotonicity grid check");
      continue;
    }
    try {
      EstimateResult r = member.estimator->estimate(log);
      consistent.push_back({member.id, r.lo, r.hi, r.c_hat});
      if (!selected) {
        r.selected_class_id = member.id;
        selected = std::move(r);
      }
    } catch (const InconsistentLogError&) {
      continue;
    }
  }
  if (!selected)
    throw NoConsistentClassError("no class in the family explains the observed decisions");
  selected->diagnostics.consistent_classes = std::move(consistent);
  for (auto& n : notes) selected->diagnostics.notes.push_back(std::move(n));
  return *selected;
}

EstimateResult estimate_unknown_family(const PiecewiseDistribution& dist,
                                       const ClassFamily& family, const DecisionLog& log) {
  return UnknownFamilyEstimator(dist, family).estimate(log);
}

FairnessReport audit_fairness(const PiecewiseDistribution& dist, const DecisionLog& log,
                              double eps) {
  if (log.records.empty()) throw EmptyLogError("cannot audit an empty log");
  if (!(eps > 0.0)) throw ParameterRangeError("eps must be positive");

  std::map<int, DecisionLog> by_group;
  for (const SampleRecord& rec : log.records) {
    if (!rec.attribute)
      throw MissingAttributeError("fairness audit requires an attribute on every record");
    by_group[*rec.attribute].records.push_back(rec);
  }
  if (by_group.size() < 2)
    throw MissingAttributeError("fairness audit requires at least two observed groups");

  FairnessReport report;
  for (auto& [group, glog] : by_group) {
    glog.meta = log.meta;
    glog.meta.m = glog.records.size();
    EstimateResult r = estimate_optimal(dist, glog);
    report.sufficiency_threshold[group] = r.c_hat + 1.0;
    report.per_group.emplace(group, std::move(r));
  }

  bool all_overlap = true;
  std::optional<FairnessWitness> witness;
  for (auto a = report.per_group.begin(); a != report.per_group.end(); ++a) {
    for (auto b = std::next(a); b != report.per_group.end(); ++b) {
      const auto& ra = a->second;
      const auto& rb = b->second;
      // (lo, hi] intervals intersect iff max(lo) < min(hi)
      if (std::max(ra.lo, rb.lo) < std::min(ra.hi, rb.hi)) continue;
      all_overlap = false;
      const bool a_below = ra.hi <= rb.lo;
      const double gap_lo = a_below ? ra.hi : rb.hi;
      const double gap_hi = a_below ? rb.lo : ra.lo;
      const double mass = dist.posterior_interval_mass(gap_lo, gap_hi, true, true);
      if (mass > eps && !witness) {
        witness = FairnessWitness{a_below ? a->first : b->first,
                                  a_below ? b->first : a->first, mass};
      }
    }
  }
  if (all_overlap) {
    report.verdict = FairnessVerdict::Calibrated;
  } else if (witness) {
    report.verdict = FairnessVerdict::NotCalibrated;
    report.witness = witness;
  } else {
    report.verdict = FairnessVerdict::Inconclusive;
  }
  return report;
}

const char* to_string(FairnessVerdict verdict) {
  switch (verdict) {
    case FairnessVerdict::Calibrated: return "Calibrated";
    case FairnessVerdict::NotCalibrated: return "NotCalibrated";
    default: return "Inconclusive";
  }
}

}  // namespace idt
