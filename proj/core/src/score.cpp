#include "idt/score.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace idt {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double v = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) v += a[i] * b[i];
  return v;
}

// One piece's contribution to a conditional: the marginal dimension decides
// dominance (an atom of the marginal swamps continuous density, a line
// marginal swamps an area marginal).
struct FiberContribution {
  int marginal_dim;   // 0 = atom, 1 = per-length density, 2 = per-area density
  double density;     // atom mass when marginal_dim == 0
  double mean_q;      // mean posterior over the fiber
};

// Streaming combiner keeping only the lowest-dimension contributions.
struct FiberAccumulator {
  int best_dim = 3;
  double mass = 0.0, acc = 0.0, fallback = 0.0;
  int count = 0;

  void add(const FiberContribution& f) {
    if (f.marginal_dim > best_dim) return;
    if (f.marginal_dim < best_dim) {
      best_dim = f.marginal_dim;
      mass = acc = fallback = 0.0;
      count = 0;
    }
    mass += f.density;
    acc += f.density * f.mean_q;
    fallback += f.mean_q;
    ++count;
  }
  double value(const char* what) const {
    if (count == 0) throw OffSupportError(std::string(what) + ": value misses the support");
    if (mass <= 0.0) return std::clamp(fallback / count, 0.0, 1.0);
    return std::clamp(acc / mass, 0.0, 1.0);
  }
};

void check_features(const PiecewiseDistribution& dist, std::span<const int> features) {
  if (features.empty()) throw UnsupportedScoreError("feature subset must be non-empty");
  int prev = 0;
  for (int f : features) {
    if (f < 1 || f > dist.ambient_dimension())
      throw UnsupportedScoreError("feature index " + std::to_string(f) +
                                  " outside [1, " + std::to_string(dist.ambient_dimension()) + "]");
    if (f <= prev)
      throw UnsupportedScoreError("feature subset must be strictly ascending");
    prev = f;
  }
}

// Posterior along a segment is affine in the parameter t.
double segment_posterior_at(const Piece& p, const Segment& seg, double t) {
  const double q0 = p.posterior(seg.base);
  const double slope = dot(p.posterior.gradient, seg.direction);
  return std::clamp(q0 + slope * t, 0.0, 1.0);
}

// A fiber through the exact end of a piece carries half its density: this
// is the slab-limit (symmetric) version of the conditional, and keeps the
// conditional monotone across abutting uniform sub-segments.
double end_factor(double t, double lo, double hi) {
  return (std::abs(t - lo) <= kGeomTol || std::abs(t - hi) <= kGeomTol) ? 0.5 : 1.0;
}

std::optional<FiberContribution> subset_fiber(const Piece& p, std::span<const int> features,
                                              std::span<const double> v) {
  const auto posterior_clamped = [&](std::span<const double> x) {
    return std::clamp(p.posterior(x), 0.0, 1.0);
  };
  if (const auto* pm = std::get_if<PointMass>(&p.geometry)) {
    for (std::size_t i = 0; i < features.size(); ++i)
      if (std::abs(pm->location[features[i] - 1] - v[i]) > kGeomTol) return std::nullopt;
    return FiberContribution{0, p.weight, posterior_clamped(pm->location)};
  }
  if (const auto* seg = std::get_if<Segment>(&p.geometry)) {
    double dir_norm2 = 0.0;
    for (int f : features) dir_norm2 += seg->direction[f - 1] * seg->direction[f - 1];
    const double dir_norm = std::sqrt(dir_norm2);
    if (dir_norm <= kGeomTol) {
      for (std::size_t i = 0; i < features.size(); ++i)
        if (std::abs(seg->base[features[i] - 1] - v[i]) > kGeomTol) return std::nullopt;
      return FiberContribution{0, p.weight, segment_posterior_at(p, *seg, 0.5 * seg->length)};
    }
    // Solve (base + t dir)_S = v via the strongest component, then verify.
    std::size_t best = 0;
    for (std::size_t i = 1; i < features.size(); ++i)
      if (std::abs(seg->direction[features[i] - 1]) > std::abs(seg->direction[features[best] - 1]))
        best = i;
    const double t =
        (v[best] - seg->base[features[best] - 1]) / seg->direction[features[best] - 1];
    if (t < -kGeomTol || t > seg->length + kGeomTol) return std::nullopt;
    for (std::size_t i = 0; i < features.size(); ++i) {
      const double proj = seg->base[features[i] - 1] + t * seg->direction[features[i] - 1];
      if (std::abs(proj - v[i]) > kGeomTol) return std::nullopt;
    }
    const double tc = std::clamp(t, 0.0, seg->length);
    return FiberContribution{1, end_factor(tc, 0.0, seg->length) * p.weight /
                                    (seg->length * dir_norm),
                             segment_posterior_at(p, *seg, tc)};
  }
  const auto& r = std::get<Rect>(p.geometry);
  const double area = (r.hi[0] - r.lo[0]) * (r.hi[1] - r.lo[1]);
  if (features.size() == 2) {
    const std::array<double, 2> x{features[0] == 1 ? v[0] : v[1], features[0] == 1 ? v[1] : v[0]};
    if (x[0] < r.lo[0] - kGeomTol || x[0] > r.hi[0] + kGeomTol || x[1] < r.lo[1] - kGeomTol ||
        x[1] > r.hi[1] + kGeomTol)
      return std::nullopt;
    return FiberContribution{2, p.weight / area, posterior_clamped(x)};
  }
  const int axis = features[0] - 1;
  const int other = 1 - axis;
  if (v[0] < r.lo[axis] - kGeomTol || v[0] > r.hi[axis] + kGeomTol) return std::nullopt;
  std::array<double, 2> mid{};
  mid[axis] = std::clamp(v[0], r.lo[axis], r.hi[axis]);
  mid[other] = 0.5 * (r.lo[other] + r.hi[other]);
  return FiberContribution{1, end_factor(mid[axis], r.lo[axis], r.hi[axis]) * p.weight /
                                  (r.hi[axis] - r.lo[axis]),
                           posterior_clamped(mid)};
}

std::optional<FiberContribution> affine_fiber(const Piece& p, std::span<const double> w, double s) {
  const auto posterior_clamped = [&](std::span<const double> x) {
    return std::clamp(p.posterior(x), 0.0, 1.0);
  };
  if (const auto* pm = std::get_if<PointMass>(&p.geometry)) {
    if (std::abs(dot(w, pm->location) - s) > kGeomTol) return std::nullopt;
    return FiberContribution{0, p.weight, posterior_clamped(pm->location)};
  }
  if (const auto* seg = std::get_if<Segment>(&p.geometry)) {
    const double f0 = dot(w, seg->base);
    const double slope = dot(w, seg->direction);
    if (std::abs(slope) <= kGeomTol) {
      if (std::abs(f0 - s) > kGeomTol) return std::nullopt;
      return FiberContribution{0, p.weight, segment_posterior_at(p, *seg, 0.5 * seg->length)};
    }
    const double t = (s - f0) / slope;
    if (t < -kGeomTol || t > seg->length + kGeomTol) return std::nullopt;
    const double tc = std::clamp(t, 0.0, seg->length);
    return FiberContribution{1, end_factor(tc, 0.0, seg->length) * p.weight /
                                    (seg->length * std::abs(slope)),
                             segment_posterior_at(p, *seg, tc)};
  }
  const auto& r = std::get<Rect>(p.geometry);
  const double area = (r.hi[0] - r.lo[0]) * (r.hi[1] - r.lo[1]);
  const double g0 = w.size() > 0 ? w[0] : 0.0;
  const double g1 = w.size() > 1 ? w[1] : 0.0;
  const double gn = std::hypot(g0, g1);
  if (gn <= kGeomTol) {
    if (std::abs(0.0 - s) > kGeomTol) return std::nullopt;
    std::array<double, 2> mid{0.5 * (r.lo[0] + r.hi[0]), 0.5 * (r.lo[1] + r.hi[1])};
    return FiberContribution{0, p.weight, posterior_clamped(mid)};
  }
  // Chord of the level line {w.x = s} inside the rect: clip p0 + t u with
  // u perpendicular to w.
  const std::array<double, 2> p0{g0 * s / (gn * gn), g1 * s / (gn * gn)};
  const std::array<double, 2> u{-g1 / gn, g0 / gn};
  double t_lo = -1e300, t_hi = 1e300;
  for (int i = 0; i < 2; ++i) {
    if (std::abs(u[i]) <= 1e-15) {
      if (p0[i] < r.lo[i] - kGeomTol || p0[i] > r.hi[i] + kGeomTol) return std::nullopt;
      continue;
    }
    double ta = (r.lo[i] - p0[i]) / u[i];
    double tb = (r.hi[i] - p0[i]) / u[i];
    if (ta > tb) std::swap(ta, tb);
    t_lo = std::max(t_lo, ta);
    t_hi = std::min(t_hi, tb);
  }
  if (t_hi <= t_lo) return std::nullopt;
  const double chord = t_hi - t_lo;
  const double tm = 0.5 * (t_lo + t_hi);
  const std::array<double, 2> mid{p0[0] + tm * u[0], p0[1] + tm * u[1]};
  return FiberContribution{1, p.weight * chord / (area * gn), posterior_clamped(mid)};
}

}  // namespace

double conditional_class1_given_features(const PiecewiseDistribution& dist,
                                         std::span<const int> features,
                                         std::span<const double> values) {
  check_features(dist, features);
  if (features.size() != values.size())
    throw UnsupportedScoreError("feature/value length mismatch");
  FiberAccumulator acc;
  for (const Piece& p : dist.pieces()) {
    if (p.weight <= 0.0) continue;
    if (auto f = subset_fiber(p, features, values)) acc.add(*f);
  }
  return acc.value("conditional on features");
}

double conditional_class1_given_affine(const PiecewiseDistribution& dist,
                                       std::span<const double> weights, double s) {
  FiberAccumulator acc;
  for (const Piece& p : dist.pieces()) {
    if (p.weight <= 0.0) continue;
    if (auto f = affine_fiber(p, weights, s)) acc.add(*f);
  }
  return acc.value("conditional on score");
}

double eval_score(const ScoreFunction& score, const PiecewiseDistribution& dist,
                  std::span<const double> x) {
  if (const auto* aff = std::get_if<AffineScore>(&score)) return dot(aff->weights, x);
  const auto& sub = std::get<SubsetPosteriorScore>(score);
  double stack_values[8];
  std::vector<double> heap_values;
  std::span<double> v;
  if (sub.features.size() <= 8) {
    v = std::span<double>(stack_values, sub.features.size());
  } else {
    heap_values.resize(sub.features.size());
    v = heap_values;
  }
  for (std::size_t i = 0; i < sub.features.size(); ++i) v[i] = x[sub.features[i] - 1];
  return conditional_class1_given_features(dist, sub.features, v);
}

int apply_rule(const DecisionRule& rule, const PiecewiseDistribution& dist,
               std::span<const double> x) {
  return eval_score(rule.score, dist, x) >= rule.threshold ? 1 : 0;
}

ScoreBreakdown score_breakdown(const PiecewiseDistribution& dist, const ScoreFunction& score) {
  ScoreBreakdown out;
  const auto add_bp = [&](double s) { out.breakpoints.push_back(s); };
  const auto add_atom = [&](double s, double mass) {
    out.atoms.emplace_back(s, mass);
    out.breakpoints.push_back(s);
  };

  if (const auto* aff = std::get_if<AffineScore>(&score)) {
    for (const Piece& p : dist.pieces()) {
      if (const auto* pm = std::get_if<PointMass>(&p.geometry)) {
        add_atom(dot(aff->weights, pm->location), p.weight);
      } else if (const auto* seg = std::get_if<Segment>(&p.geometry)) {
        const double f0 = dot(aff->weights, seg->base);
        const double slope = dot(aff->weights, seg->direction);
        if (std::abs(slope) <= kGeomTol) {
          add_atom(f0, p.weight);
        } else {
          add_bp(f0);
          add_bp(f0 + slope * seg->length);
        }
      } else {
        const auto& r = std::get<Rect>(p.geometry);
        const double g0 = aff->weights.size() > 0 ? aff->weights[0] : 0.0;
        const double g1 = aff->weights.size() > 1 ? aff->weights[1] : 0.0;
        if (std::hypot(g0, g1) <= kGeomTol) {
          add_atom(0.0, p.weight);
        } else {
          add_bp(g0 * r.lo[0] + g1 * r.lo[1]);
          add_bp(g0 * r.hi[0] + g1 * r.lo[1]);
          add_bp(g0 * r.lo[0] + g1 * r.hi[1]);
          add_bp(g0 * r.hi[0] + g1 * r.hi[1]);
        }
      }
    }
  } else {
    const auto& sub = std::get<SubsetPosteriorScore>(score);
    check_features(dist, sub.features);
    for (const Piece& p : dist.pieces()) {
      if (p.weight <= 0.0) continue;
      std::vector<double> values;
      bool constant = true;
      if (const auto* seg = std::get_if<Segment>(&p.geometry)) {
        for (int f : sub.features)
          if (std::abs(seg->direction[f - 1]) > kGeomTol) constant = false;
      } else if (std::holds_alternative<Rect>(p.geometry)) {
        constant = false;
      }
      const auto cond_at = [&](std::span<const double> pt) {
        std::vector<double> v;
        for (int f : sub.features) v.push_back(pt[f - 1]);
        return conditional_class1_given_features(dist, sub.features, v);
      };
      if (constant) {
        const auto pts = extreme_points(p);
        add_atom(cond_at(pts.front()), p.weight);
      } else {
        for (const auto& pt : extreme_points(p)) add_bp(cond_at(pt));
      }
    }
  }

  std::sort(out.breakpoints.begin(), out.breakpoints.end());
  // merge near-duplicates
  std::vector<double> merged;
  for (double b : out.breakpoints) {
    if (merged.empty() || b - merged.back() > 1e-12 * (1.0 + std::abs(b))) merged.push_back(b);
  }
  out.breakpoints = std::move(merged);
  return out;
}

bool same_score(const ScoreFunction& a, const ScoreFunction& b) {
  if (a.index() != b.index()) return false;
  if (const auto* aa = std::get_if<AffineScore>(&a))
    return aa->weights == std::get<AffineScore>(b).weights;
  return std::get<SubsetPosteriorScore>(a).features == std::get<SubsetPosteriorScore>(b).features;
}

std::string describe_score(const ScoreFunction& score) {
  char buf[64];
  std::string out;
  if (const auto* aff = std::get_if<AffineScore>(&score)) {
    out = "affine[";
    for (std::size_t i = 0; i < aff->weights.size(); ++i) {
      if (i) out += ",";
      std::snprintf(buf, sizeof(buf), "%g", aff->weights[i]);
      out += buf;
    }
    out += "]";
  } else {
    const auto& sub = std::get<SubsetPosteriorScore>(score);
    out = "subset{";
    for (std::size_t i = 0; i < sub.features.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(sub.features[i]);
    }
    out += "}";
  }
  return out;
}

}  // namespace idt
