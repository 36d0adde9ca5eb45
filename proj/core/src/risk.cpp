#include "idt/risk.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <variant>
#include <vector>

namespace idt {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double v = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) v += a[i] * b[i];
  return v;
}

std::vector<double> point_on_segment(const Segment& seg, double t) {
  std::vector<double> x = seg.base;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += t * seg.direction[i];
  return x;
}

// Per-piece canonical form of a threshold rule's positive region.
struct SegC {
  double a = 0.0, b = -1.0;  // t-interval; empty when b < a
};
struct HalfC {
  std::array<double, 2> g{};  // g . x >= off
  double off = 0.0;
};
using PieceC = std::variant<bool, SegC, HalfC>;

using Polygon = std::vector<std::array<double, 2>>;

Polygon rect_polygon(const Rect& r) {
  return {{r.lo[0], r.lo[1]}, {r.hi[0], r.lo[1]}, {r.hi[0], r.hi[1]}, {r.lo[0], r.hi[1]}};
}

Polygon clip(const Polygon& poly, const HalfC& h) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cur = poly[i];
    const auto& nxt = poly[(i + 1) % n];
    const double dc = h.g[0] * cur[0] + h.g[1] * cur[1] - h.off;
    const double dn = h.g[0] * nxt[0] + h.g[1] * nxt[1] - h.off;
    if (dc >= 0) out.push_back(cur);
    if ((dc >= 0) != (dn >= 0)) {
      const double t = dc / (dc - dn);
      out.push_back({cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])});
    }
  }
  return out;
}

struct AreaCentroid {
  double area = 0.0;
  std::array<double, 2> centroid{};
};

AreaCentroid polygon_area_centroid(const Polygon& poly) {
  AreaCentroid ac;
  if (poly.size() < 3) return ac;
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    const double cross = p[0] * q[1] - q[0] * p[1];
    a2 += cross;
    cx += (p[0] + q[0]) * cross;
    cy += (p[1] + q[1]) * cross;
  }
  const double area = 0.5 * a2;
  if (std::abs(area) < 1e-300) return ac;
  ac.area = std::abs(area);
  ac.centroid = {cx / (3.0 * a2), cy / (3.0 * a2)};
  return ac;
}

// Monotone 1-D crossing of a (possibly discontinuous) nondecreasing or
// nonincreasing conditional; returns the boundary parameter of {g >= b}.
template <typename F>
SegC monotone_region(F&& g, double lo, double hi, double b, const char* what) {
  const double g_lo = g(lo);
  const double g_hi = g(hi);
  // probe for monotonicity
  double prev = g_lo;
  bool nondec = true, noninc = true;
  for (int i = 1; i <= 4; ++i) {
    const double v = g(lo + (hi - lo) * i / 4.0);
    if (v < prev - 1e-12) nondec = false;
    if (v > prev + 1e-12) noninc = false;
    prev = v;
  }
  if (!nondec && !noninc)
    throw UnsupportedScoreError(std::string(what) +
                                ": conditional is not monotone along the piece");
  const bool increasing = nondec;
  const double first = increasing ? g_lo : g_hi;
  const double last = increasing ? g_hi : g_lo;
  if (first >= b) return SegC{lo, hi};        // whole piece decides 1
  if (last < b) return SegC{0.0, -1.0};       // whole piece decides 0
  // Invariant: the decision flips somewhere in (a, c].
  double a = lo, c = hi;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (a + c);
    const bool flipped = increasing ? g(mid) >= b : g(mid) < b;
    (flipped ? c : a) = mid;
  }
  const double tau = 0.5 * (a + c);
  if (increasing) return SegC{tau, hi};
  return SegC{lo, tau};
}

PieceC rule_constraint(const PiecewiseDistribution& dist, const Piece& piece,
                       const DecisionRule& rule) {
  if (const auto* aff = std::get_if<AffineScore>(&rule.score)) {
    if (const auto* pm = std::get_if<PointMass>(&piece.geometry))
      return dot(aff->weights, pm->location) >= rule.threshold;
    if (const auto* seg = std::get_if<Segment>(&piece.geometry)) {
      const double f0 = dot(aff->weights, seg->base);
      const double slope = dot(aff->weights, seg->direction);
      if (std::abs(slope) <= kGeomTol) return f0 >= rule.threshold;
      const double tau = (rule.threshold - f0) / slope;
      if (slope > 0) {
        if (tau <= 0) return SegC{0.0, seg->length};
        if (tau > seg->length) return SegC{0.0, -1.0};
        return SegC{tau, seg->length};
      }
      if (tau >= seg->length) return SegC{0.0, seg->length};
      if (tau < 0) return SegC{0.0, -1.0};
      return SegC{0.0, tau};
    }
    const double g0 = aff->weights.size() > 0 ? aff->weights[0] : 0.0;
    const double g1 = aff->weights.size() > 1 ? aff->weights[1] : 0.0;
    if (std::hypot(g0, g1) <= kGeomTol) return 0.0 >= rule.threshold;
    return HalfC{{g0, g1}, rule.threshold};
  }

  const auto& sub = std::get<SubsetPosteriorScore>(rule.score);
  const auto cond_at = [&](std::span<const double> pt) {
    std::vector<double> v;
    v.reserve(sub.features.size());
    for (int f : sub.features) v.push_back(pt[f - 1]);
    return conditional_class1_given_features(dist, sub.features, v);
  };
  if (const auto* pm = std::get_if<PointMass>(&piece.geometry))
    return cond_at(pm->location) >= rule.threshold;
  if (const auto* seg = std::get_if<Segment>(&piece.geometry)) {
    bool constant = true;
    for (int f : sub.features)
      if (std::abs(seg->direction[f - 1]) > kGeomTol) constant = false;
    if (constant) return cond_at(seg->base) >= rule.threshold;
    const auto g = [&](double t) { return cond_at(point_on_segment(*seg, t)); };
    return monotone_region(g, 0.0, seg->length, rule.threshold, "subset rule on segment");
  }
  const auto& r = std::get<Rect>(piece.geometry);
  if (sub.features.size() == 2) {
    // Full conditioning must coincide with the piece's own posterior, which
    // holds when rectangles do not overlap; then the region is affine.
    const std::array<double, 2> mid{0.5 * (r.lo[0] + r.hi[0]), 0.5 * (r.lo[1] + r.hi[1])};
    const double own = std::clamp(piece.posterior(mid), 0.0, 1.0);
    if (std::abs(cond_at(mid) - own) > 1e-12)
      throw UnsupportedScoreError("subset rule on overlapping rectangles is unsupported");
    const auto& grad = piece.posterior.gradient;
    if (std::hypot(grad[0], grad[1]) <= kGeomTol) return own >= rule.threshold;
    return HalfC{{grad[0], grad[1]}, rule.threshold - piece.posterior.intercept};
  }
  const int axis = sub.features[0] - 1;
  const auto g = [&](double v) {
    std::array<double, 2> pt{};
    pt[axis] = v;
    pt[1 - axis] = 0.5 * (r.lo[1 - axis] + r.hi[1 - axis]);
    return cond_at(pt);
  };
  const SegC reg = monotone_region(g, r.lo[axis], r.hi[axis], rule.threshold,
                                   "subset rule on rectangle");
  if (reg.b < reg.a) return false;
  if (reg.a <= r.lo[axis] && reg.b >= r.hi[axis]) return true;
  HalfC h{};
  if (reg.a > r.lo[axis]) {
    h.g[axis] = 1.0;
    h.off = reg.a;
  } else {
    h.g[axis] = -1.0;
    h.off = -reg.b;
  }
  return h;
}

struct MassQ {
  double mass = 0.0;  // probability mass of the region
  double q1 = 0.0;    // class-1 mass of the region
};

MassQ region_mass_q(const Piece& piece, std::span<const PieceC> constraints) {
  const auto post = [&](std::span<const double> x) {
    return std::clamp(piece.posterior(x), 0.0, 1.0);
  };
  if (const auto* pm = std::get_if<PointMass>(&piece.geometry)) {
    for (const PieceC& c : constraints)
      if (!std::get<bool>(c)) return MassQ{};
    return MassQ{piece.weight, piece.weight * post(pm->location)};
  }
  if (const auto* seg = std::get_if<Segment>(&piece.geometry)) {
    double a = 0.0, b = seg->length;
    for (const PieceC& c : constraints) {
      if (const auto* flag = std::get_if<bool>(&c)) {
        if (!*flag) return MassQ{};
        continue;
      }
      const auto& sc = std::get<SegC>(c);
      a = std::max(a, sc.a);
      b = std::min(b, sc.b);
    }
    if (b <= a) return MassQ{};
    const double frac = (b - a) / seg->length;
    const double qa = post(point_on_segment(*seg, a));
    const double qb = post(point_on_segment(*seg, b));
    return MassQ{piece.weight * frac, piece.weight * frac * 0.5 * (qa + qb)};
  }
  const auto& r = std::get<Rect>(piece.geometry);
  Polygon poly = rect_polygon(r);
  for (const PieceC& c : constraints) {
    if (const auto* flag = std::get_if<bool>(&c)) {
      if (!*flag) return MassQ{};
      continue;
    }
    poly = clip(poly, std::get<HalfC>(c));
    if (poly.size() < 3) return MassQ{};
  }
  const AreaCentroid ac = polygon_area_centroid(poly);
  if (ac.area <= 0.0) return MassQ{};
  const double total_area = (r.hi[0] - r.lo[0]) * (r.hi[1] - r.lo[1]);
  const double frac = ac.area / total_area;
  return MassQ{piece.weight * frac, piece.weight * frac * post(ac.centroid)};
}

}  // namespace

double risk(const PiecewiseDistribution& dist, double c, const DecisionRule& rule) {
  if (!(c > 0.0 && c < 1.0)) throw ParameterRangeError("loss parameter must lie in (0, 1)");
  double total = 0.0;
  for (const Piece& p : dist.pieces()) {
    if (p.weight <= 0.0) continue;
    const PieceC pc = rule_constraint(dist, p, rule);
    const MassQ pos = region_mass_q(p, std::span<const PieceC>(&pc, 1));
    const double q1_total = p.weight * piece_mean_posterior(p);
    total += c * (pos.mass - pos.q1) + (1.0 - c) * (q1_total - pos.q1);
  }
  return std::max(0.0, total);
}

double risk(const PiecewiseDistribution& dist, const CostMatrix& cost, const DecisionRule& rule) {
  cost.validate();
  double total = 0.0;
  for (const Piece& p : dist.pieces()) {
    if (p.weight <= 0.0) continue;
    const PieceC pc = rule_constraint(dist, p, rule);
    const MassQ pos = region_mass_q(p, std::span<const PieceC>(&pc, 1));
    const double q1_total = p.weight * piece_mean_posterior(p);
    const double p11 = pos.q1;
    const double p10 = pos.mass - pos.q1;
    const double p01 = q1_total - pos.q1;
    const double p00 = (p.weight - pos.mass) - p01;
    total += cost.c00 * p00 + cost.c10 * p10 + cost.c01 * p01 + cost.c11 * p11;
  }
  return total;
}

double disagreement_prob(const PiecewiseDistribution& dist, const DecisionRule& h1,
                         const DecisionRule& h2) {
  double total = 0.0;
  for (const Piece& p : dist.pieces()) {
    if (p.weight <= 0.0) continue;
    const PieceC c1 = rule_constraint(dist, p, h1);
    const PieceC c2 = rule_constraint(dist, p, h2);
    const MassQ a = region_mass_q(p, std::span<const PieceC>(&c1, 1));
    const MassQ b = region_mass_q(p, std::span<const PieceC>(&c2, 1));
    const std::array<PieceC, 2> both{c1, c2};
    const MassQ ab = region_mass_q(p, both);
    total += a.mass + b.mass - 2.0 * ab.mass;
  }
  return std::clamp(total, 0.0, 1.0);
}

UpperMass upper_mass(const PiecewiseDistribution& dist, const DecisionRule& rule) {
  UpperMass um;
  for (const Piece& p : dist.pieces()) {
    if (p.weight <= 0.0) continue;
    const PieceC pc = rule_constraint(dist, p, rule);
    const MassQ pos = region_mass_q(p, std::span<const PieceC>(&pc, 1));
    um.mass += pos.mass;
    um.q1 += pos.q1;
  }
  return um;
}

std::vector<std::vector<double>> rule_region_vertices(const PiecewiseDistribution& dist,
                                                      const DecisionRule& rule) {
  std::vector<std::vector<double>> out;
  for (const Piece& p : dist.pieces()) {
    if (p.weight <= 0.0) continue;
    const PieceC pc = rule_constraint(dist, p, rule);
    if (std::holds_alternative<bool>(pc)) continue;
    if (const auto* sc = std::get_if<SegC>(&pc)) {
      if (sc->b <= sc->a) continue;
      const auto& seg = std::get<Segment>(p.geometry);
      out.push_back(point_on_segment(seg, sc->a));
      out.push_back(point_on_segment(seg, sc->b));
    } else {
      const auto& r = std::get<Rect>(p.geometry);
      Polygon poly = clip(rect_polygon(r), std::get<HalfC>(pc));
      for (const auto& v : poly) out.push_back({v[0], v[1]});
    }
  }
  return out;
}

BandStats score_band(const PiecewiseDistribution& dist, const ScoreFunction& score, double lo,
                     double hi) {
  const UpperMass above_lo = upper_mass(dist, DecisionRule{score, lo});
  const UpperMass above_hi = upper_mass(dist, DecisionRule{score, hi});
  BandStats band;
  band.mass = std::max(0.0, above_lo.mass - above_hi.mass);
  const double q1 = above_lo.q1 - above_hi.q1;
  band.class1 = band.mass > 0.0 ? std::clamp(q1 / band.mass, 0.0, 1.0) : 0.0;
  return band;
}

}  // namespace idt
