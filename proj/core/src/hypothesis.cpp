#include "idt/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace idt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Solve a 4x4 linear system by Gaussian elimination with partial pivoting.
bool solve4(double a[4][5]) {
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) return false;
    if (piv != col)
      for (int k = 0; k < 5; ++k) std::swap(a[piv][k], a[col][k]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int k = col; k < 5; ++k) a[r][k] -= f * a[col][k];
    }
  }
  for (int r = 0; r < 4; ++r) a[r][4] /= a[r][r];
  return true;
}

// Minimize a piecewise-polynomial objective of degree <= 3 over [lo, hi].
// Knots are the smoothness breakpoints; atoms mark downward jump locations
// whose right limits need their own candidates.  Ties resolve to the
// smallest argument.
struct Minimized {
  double arg = 0.0;
  double value = kInf;
};

Minimized minimize_piecewise(const std::function<double(double)>& objective,
                             std::vector<double> knots, const std::vector<double>& atoms,
                             double lo, double hi) {
  if (!(lo <= hi)) std::swap(lo, hi);
  std::vector<double> pts{lo, hi};
  for (double k : knots)
    if (k > lo && k < hi) pts.push_back(k);
  for (double a : atoms) {
    const double just_after = std::nextafter(a, kInf);
    if (just_after > lo && just_after < hi) pts.push_back(just_after);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::vector<std::pair<double, double>> evals;  // (arg, value)
  const auto consider = [&](double b) {
    if (b < lo || b > hi) return;
    evals.emplace_back(b, objective(b));
  };

  for (double b : pts) consider(b);

  static constexpr double kNodes[4] = {0.12, 0.38, 0.62, 0.88};
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    const double width = b - a;
    if (width <= 1e-13 * (1.0 + std::abs(a))) continue;
    // Exact cubic reconstruction from four interior nodes, in centered
    // coordinates for conditioning.
    double zs[4], ys[4];
    for (int k = 0; k < 4; ++k) {
      const double bb = a + kNodes[k] * width;
      zs[k] = 2.0 * (bb - a) / width - 1.0;
      ys[k] = objective(bb);
      evals.emplace_back(bb, ys[k]);
    }
    double m[4][5];
    for (int r = 0; r < 4; ++r) {
      m[r][0] = 1.0;
      m[r][1] = zs[r];
      m[r][2] = zs[r] * zs[r];
      m[r][3] = zs[r] * zs[r] * zs[r];
      m[r][4] = ys[r];
    }
    if (!solve4(m)) continue;
    const double c1 = m[1][4], c2 = m[2][4], c3 = m[3][4];
    // Stationary points of c1 z + c2 z^2 + c3 z^3, i.e. roots of the
    // quadratic 3 c3 z^2 + 2 c2 z + c1.  The cubic coefficient is often pure
    // fit noise, so use the cancellation-free quadratic formula.
    const double A = 3.0 * c3, B = 2.0 * c2, C = c1;
    double roots[2];
    int nroots = 0;
    const double disc = B * B - 4.0 * A * C;
    if (std::abs(A) < 1e-300) {
      if (std::abs(B) > 1e-300) roots[nroots++] = -C / B;
    } else if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (B + (B >= 0.0 ? sq : -sq));
      roots[nroots++] = q / A;
      if (std::abs(q) > 1e-300) roots[nroots++] = C / q;
    }
    for (int k = 0; k < nroots; ++k) {
      if (roots[k] > -1.0 && roots[k] < 1.0) {
        consider(a + (roots[k] + 1.0) * 0.5 * width);
      }
    }
  }

  double vmin = kInf;
  for (const auto& [arg, value] : evals) vmin = std::min(vmin, value);
  const double tie = 1e-12 * (1.0 + std::abs(vmin));
  Minimized best;
  best.arg = kInf;
  for (const auto& [arg, value] : evals) {
    if (value <= vmin + tie && arg < best.arg) {
      best.arg = arg;
      best.value = value;
    }
  }
  return best;
}

struct EffectiveRange {
  double lo, hi;
};

EffectiveRange effective_range(const ThresholdClass& cls, const ScoreBreakdown& bd) {
  if (cls.range) {
    if (!(cls.range->lo <= cls.range->hi))
      throw ParameterRangeError("threshold range must satisfy lo <= hi");
    return {cls.range->lo, cls.range->hi};
  }
  if (bd.breakpoints.empty()) return {-1.0, 1.0};
  // Sentinels outside the score support realize all-ones / all-zeros rules.
  return {bd.breakpoints.front() - 1.0, bd.breakpoints.back() + 1.0};
}

}  // namespace

DecisionRule optimal_in_class(const PiecewiseDistribution& dist, const ThresholdClass& cls,
                              double c) {
  if (!(c > 0.0 && c < 1.0)) throw ParameterRangeError("loss parameter must lie in (0, 1)");
  if (std::holds_alternative<SubsetPosteriorScore>(cls.score)) {
    // Thresholding the conditional at c itself is Bayes optimal within the
    // class; the range only clamps.
    double b = c;
    if (cls.range) b = std::clamp(b, cls.range->lo, cls.range->hi);
    return DecisionRule{cls.score, b};
  }
  const ScoreBreakdown bd = score_breakdown(dist, cls.score);
  const EffectiveRange r = effective_range(cls, bd);
  if (r.lo == r.hi) return DecisionRule{cls.score, r.lo};
  std::vector<double> atoms;
  atoms.reserve(bd.atoms.size());
  for (const auto& [s, mass] : bd.atoms) atoms.push_back(s);
  const auto objective = [&](double b) { return risk(dist, c, DecisionRule{cls.score, b}); };
  const Minimized best = minimize_piecewise(objective, bd.breakpoints, atoms, r.lo, r.hi);
  return DecisionRule{cls.score, best.arg};
}

namespace {

// Decision of the class-optimal rule at score value s for loss parameter c.
int decision_at(const PiecewiseDistribution& dist, const ThresholdClass& cls, double s, double c) {
  return s >= optimal_in_class(dist, cls, c).threshold ? 1 : 0;
}

double bisect_flip(const PiecewiseDistribution& dist, const ThresholdClass& cls, double s) {
  constexpr double kEdge = 1e-9;
  // flip-uniqueness probe
  int prev = 2;
  for (int k = 0; k <= 10; ++k) {
    const double c = std::clamp(k / 10.0, kEdge, 1.0 - kEdge);
    const int d = decision_at(dist, cls, s, c);
    if (d > prev)
      throw NonMonotoneError("class-optimal decision rises in c; flip point is not unique");
    prev = d;
  }
  if (decision_at(dist, cls, s, kEdge) == 0) return 0.0;
  if (decision_at(dist, cls, s, 1.0 - kEdge) == 1) return 1.0;
  double lo = kEdge, hi = 1.0 - kEdge;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (decision_at(dist, cls, s, mid) == 1 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double induced_posterior(const PiecewiseDistribution& dist, const ThresholdClass& cls,
                         std::span<const double> x) {
  (void)dist.posterior(x);  // on-support precondition
  const double s = eval_score(cls.score, dist, x);
  return bisect_flip(dist, cls, s);
}

InducedPosteriorMap::InducedPosteriorMap(const PiecewiseDistribution& dist,
                                         const ThresholdClass& cls)
    : dist_(&dist), cls_(cls), range_lo_(-kInf), range_hi_(kInf), monotone_(false) {
  if (cls_.range) {
    range_lo_ = cls_.range->lo;
    range_hi_ = cls_.range->hi;
  }
  if (std::holds_alternative<SubsetPosteriorScore>(cls_.score)) {
    // Conditional given a feature subset is its own induced posterior.
    monotone_ = true;
    return;
  }
  // Probe the conditional along the score axis; a nondecreasing profile
  // makes the flip map equal to the conditional.
  const ScoreBreakdown bd = score_breakdown(dist, cls_.score);
  if (bd.breakpoints.empty()) return;
  std::vector<double> probes;
  for (std::size_t i = 0; i < bd.breakpoints.size(); ++i) {
    probes.push_back(bd.breakpoints[i]);
    if (i + 1 < bd.breakpoints.size())
      probes.push_back(0.5 * (bd.breakpoints[i] + bd.breakpoints[i + 1]));
  }
  const auto& weights = std::get<AffineScore>(cls_.score).weights;
  double prev = -kInf;
  bool ok = true;
  for (double s : probes) {
    if (s < range_lo_ || s > range_hi_) continue;
    double v;
    try {
      v = conditional_class1_given_affine(*dist_, weights, s);
    } catch (const OffSupportError&) {
      continue;  // gap between pieces
    }
    if (v < prev - 1e-9) {
      ok = false;
      break;
    }
    prev = std::max(prev, v);
  }
  monotone_ = ok;
}

double InducedPosteriorMap::score(std::span<const double> x) const {
  return eval_score(cls_.score, *dist_, x);
}

double InducedPosteriorMap::at_score(double s) const {
  if (monotone_) {
    if (s < range_lo_) return 0.0;
    if (s >= range_hi_) return 1.0;
    if (std::holds_alternative<SubsetPosteriorScore>(cls_.score))
      return std::clamp(s, 0.0, 1.0);
    const auto& weights = std::get<AffineScore>(cls_.score).weights;
    return std::clamp(conditional_class1_given_affine(*dist_, weights, s), 0.0, 1.0);
  }
  return bisect_flip(*dist_, cls_, s);
}

std::vector<double> default_c_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

std::vector<std::vector<double>> default_x_grid(const PiecewiseDistribution& dist) {
  std::vector<std::vector<double>> xs;
  for (const Piece& p : dist.pieces()) {
    if (p.weight <= 0.0) continue;
    auto pts = extreme_points(p);
    xs.insert(xs.end(), pts.begin(), pts.end());
    // midpoint of the piece
    if (const auto* seg = std::get_if<Segment>(&p.geometry)) {
      std::vector<double> mid = seg->base;
      for (std::size_t i = 0; i < mid.size(); ++i) mid[i] += 0.5 * seg->length * seg->direction[i];
      xs.push_back(std::move(mid));
    } else if (const auto* r = std::get_if<Rect>(&p.geometry)) {
      xs.push_back({0.5 * (r->lo[0] + r->hi[0]), 0.5 * (r->lo[1] + r->hi[1])});
    }
  }
  return xs;
}

MonotoneReport check_monotone_report(const PiecewiseDistribution& dist, const ThresholdClass& cls,
                                     std::span<const double> c_grid,
                                     std::span<const std::vector<double>> x_grid) {
  if (c_grid.empty() || x_grid.empty())
    throw ParameterRangeError("monotonicity check needs non-empty probe grids");
  std::vector<double> cs(c_grid.begin(), c_grid.end());
  std::sort(cs.begin(), cs.end());
  std::vector<DecisionRule> rules;
  rules.reserve(cs.size());
  for (double c : cs) rules.push_back(optimal_in_class(dist, cls, c));

  MonotoneReport report;
  report.monotone = true;
  report.vacuous = true;
  for (const auto& x : x_grid) {
    int prev = 2;
    int first = -1;
    for (const DecisionRule& rule : rules) {
      const int d = apply_rule(rule, dist, x);
      if (first < 0) first = d;
      if (d != first) report.vacuous = false;
      if (d > prev) report.monotone = false;
      prev = d;
    }
  }
  return report;
}

bool check_monotone(const PiecewiseDistribution& dist, const ThresholdClass& cls,
                    std::span<const double> c_grid,
                    std::span<const std::vector<double>> x_grid) {
  return check_monotone_report(dist, cls, c_grid, x_grid).monotone;
}

MinDisagreement min_disagreement_arg(const PiecewiseDistribution& dist, const DecisionRule& rule,
                                     const ThresholdClass& cls) {
  const ScoreBreakdown bd = score_breakdown(dist, cls.score);
  std::vector<double> knots = bd.breakpoints;
  for (const auto& v : rule_region_vertices(dist, rule))
    knots.push_back(eval_score(cls.score, dist, v));
  std::vector<double> atoms;
  for (const auto& [s, mass] : bd.atoms) atoms.push_back(s);
  const EffectiveRange r = effective_range(cls, bd);
  const auto objective = [&](double b) {
    return disagreement_prob(dist, rule, DecisionRule{cls.score, b});
  };
  if (r.lo == r.hi) return MinDisagreement{std::max(0.0, objective(r.lo)), r.lo};
  const Minimized best = minimize_piecewise(objective, knots, atoms, r.lo, r.hi);
  return MinDisagreement{std::max(0.0, best.value), best.arg};
}

double min_disagreement(const PiecewiseDistribution& dist, const DecisionRule& rule,
                        const ThresholdClass& cls) {
  return min_disagreement_arg(dist, rule, cls).value;
}

MdSmoothness md_smoothness_alpha(const PiecewiseDistribution& dist, const ClassFamily& family,
                                 const std::string& home_class_id, double c,
                                 std::span<const double> c_grid, int opt_grid) {
  const auto classes = enumerate_family(family);
  const ThresholdClass* home = nullptr;
  for (const auto& [id, cls] : classes)
    if (id == home_class_id) home = &cls;
  if (!home) throw ParameterRangeError("home class '" + home_class_id + "' not in family");

  const auto cgrid = default_c_grid();
  const auto xgrid = default_x_grid(dist);
  for (const auto& [id, cls] : classes) {
    if (std::holds_alternative<SubsetPosteriorScore>(cls.score)) continue;  // always monotone
    if (!check_monotone(dist, cls, cgrid, xgrid))
      throw NonMonotoneError("family member '" + id + "' fails the monotonicity grid check");
  }

  // Probe each foreign class's optimal subset on a loss-parameter grid.
  struct ForeignClass {
    const ThresholdClass* cls;
    std::vector<DecisionRule> opt_rules;
    InducedPosteriorMap map;
  };
  std::vector<ForeignClass> foreign;
  for (const auto& [id, cls] : classes) {
    if (id == home_class_id) continue;
    std::vector<DecisionRule> rules;
    double last = kInf;
    for (int k = 0; k < opt_grid; ++k) {
      const double cc = (k + 0.5) / opt_grid;
      DecisionRule rule = optimal_in_class(dist, cls, cc);
      if (rules.empty() || rule.threshold != last) {
        last = rule.threshold;
        rules.push_back(std::move(rule));
      }
    }
    foreign.push_back(ForeignClass{&cls, std::move(rules), InducedPosteriorMap(dist, cls)});
  }
  if (foreign.empty()) return MdSmoothness{0.0, false};

  // Infimum over the optimal subset: the c'' grid plus the member derived at
  // the loss parameter matched to the continuum disagreement minimizer, so
  // exact rule coincidences register as zero.
  const auto md_against = [&](const DecisionRule& h, const ForeignClass& f) {
    double best = kInf;
    for (const DecisionRule& o : f.opt_rules) best = std::min(best, disagreement_prob(dist, h, o));
    const MinDisagreement cont = min_disagreement_arg(dist, h, *f.cls);
    const double matched_c = std::clamp(f.map.at_score(cont.threshold), 1e-9, 1.0 - 1e-9);
    const DecisionRule member = optimal_in_class(dist, *f.cls, matched_c);
    best = std::min(best, disagreement_prob(dist, h, member));
    return best;
  };

  const DecisionRule h_home = optimal_in_class(dist, *home, c);
  std::vector<double> base;
  base.reserve(foreign.size());
  for (const auto& f : foreign) base.push_back(md_against(h_home, f));

  MdSmoothness result;
  for (double cp : c_grid) {
    if (!(cp > 0.0 && cp < 1.0) || std::abs(cp - c) < 1e-15) continue;
    const DecisionRule h = optimal_in_class(dist, *home, cp);
    for (std::size_t j = 0; j < foreign.size(); ++j) {
      const double md = md_against(h, foreign[j]);
      if (base[j] <= 1e-12) {
        if (md > 1e-9) {
          result.unbounded = true;
          return result;
        }
        continue;
      }
      if (md > base[j])
        result.alpha = std::max(result.alpha, (md / base[j] - 1.0) / std::abs(cp - c));
    }
  }
  return result;
}

int feature_subset_vc_bound(int n, int s) {
  if (n < 1 || s < 1 || s > n)
    throw ParameterRangeError("feature_subset_vc_bound requires 1 <= s <= n");
  const double v = 1.0 + 2.0 * s * std::log2(n + 1.0);
  return static_cast<int>(std::ceil(v - 1e-9));
}

std::vector<std::pair<std::string, ThresholdClass>> enumerate_family(const ClassFamily& family) {
  if (const auto* exp = std::get_if<ExplicitFamily>(&family)) {
    if (exp->classes.empty()) throw ParameterRangeError("explicit family must be non-empty");
    std::map<std::string, int> seen;
    for (const auto& [id, cls] : exp->classes)
      if (++seen[id] > 1) throw ParameterRangeError("duplicate class identifier '" + id + "'");
    return exp->classes;
  }
  const auto& fs = std::get<FeatureSubsetsFamily>(family);
  const int n = fs.dimension, s = fs.max_cardinality;
  if (n < 1 || s < 1 || s > n)
    throw ParameterRangeError("feature-subset family requires 1 <= s <= n");
  double count = 0.0, binom = 1.0;
  for (int k = 1; k <= s; ++k) {
    binom = binom * (n - k + 1) / k;
    count += binom;
    if (count > 1e6)
      throw FamilyTooLargeError("feature-subset family exceeds the 10^6 class guard");
  }

  std::vector<std::pair<std::string, ThresholdClass>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 1; k <= s; ++k) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i + 1;
    while (true) {
      std::string id = "{";
      for (int i = 0; i < k; ++i) {
        if (i) id += ",";
        id += std::to_string(idx[i]);
      }
      id += "}";
      out.emplace_back(std::move(id), ThresholdClass{SubsetPosteriorScore{idx}, std::nullopt});
      int i = k - 1;
      while (i >= 0 && idx[i] == n - (k - 1 - i)) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

}  // namespace idt
