#include "idt/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "idt/rng.hpp"

namespace idt {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double v = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) v += a[i] * b[i];
  return v;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void append_real(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g;", v);
  out += buf;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::vector<std::vector<double>> extreme_points(const Piece& piece) {
  std::vector<std::vector<double>> pts;
  if (const auto* pm = std::get_if<PointMass>(&piece.geometry)) {
    pts.push_back(pm->location);
  } else if (const auto* seg = std::get_if<Segment>(&piece.geometry)) {
    pts.push_back(seg->base);
    std::vector<double> end = seg->base;
    for (std::size_t i = 0; i < end.size(); ++i) end[i] += seg->length * seg->direction[i];
    pts.push_back(std::move(end));
  } else {
    const auto& r = std::get<Rect>(piece.geometry);
    pts.push_back({r.lo[0], r.lo[1]});
    pts.push_back({r.hi[0], r.lo[1]});
    pts.push_back({r.lo[0], r.hi[1]});
    pts.push_back({r.hi[0], r.hi[1]});
  }
  return pts;
}

double piece_measure(const Piece& piece) {
  if (std::holds_alternative<PointMass>(piece.geometry)) return 1.0;
  if (const auto* seg = std::get_if<Segment>(&piece.geometry)) return seg->length;
  const auto& r = std::get<Rect>(piece.geometry);
  return (r.hi[0] - r.lo[0]) * (r.hi[1] - r.lo[1]);
}

double piece_mean_posterior(const Piece& piece) {
  // Affine integrand: the mean sits at the centroid.
  if (const auto* pm = std::get_if<PointMass>(&piece.geometry)) {
    return piece.posterior(pm->location);
  }
  if (const auto* seg = std::get_if<Segment>(&piece.geometry)) {
    std::vector<double> mid = seg->base;
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] += 0.5 * seg->length * seg->direction[i];
    return piece.posterior(mid);
  }
  const auto& r = std::get<Rect>(piece.geometry);
  const std::array<double, 2> mid{0.5 * (r.lo[0] + r.hi[0]), 0.5 * (r.lo[1] + r.hi[1])};
  return piece.posterior(mid);
}

PiecewiseDistribution::PiecewiseDistribution(int ambient_dimension, std::vector<Piece> pieces)
    : dim_(ambient_dimension), pieces_(std::move(pieces)) {
  if (dim_ < 1) throw GeometryError("ambient dimension must be positive");
  if (pieces_.empty()) throw GeometryError("distribution needs at least one piece");

  double total = 0.0;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    Piece& p = pieces_[k];
    const std::string tag = "piece " + std::to_string(k) + ": ";
    if (!(p.weight >= 0.0)) throw GeometryError(tag + "negative weight");
    if (p.posterior.gradient.size() != static_cast<std::size_t>(dim_))
      throw GeometryError(tag + "posterior gradient length != ambient dimension");

    if (const auto* pm = std::get_if<PointMass>(&p.geometry)) {
      if (pm->location.size() != static_cast<std::size_t>(dim_))
        throw GeometryError(tag + "point location dimension mismatch");
    } else if (auto* seg = std::get_if<Segment>(&p.geometry)) {
      if (seg->base.size() != static_cast<std::size_t>(dim_) ||
          seg->direction.size() != static_cast<std::size_t>(dim_))
        throw GeometryError(tag + "segment dimension mismatch");
      if (!(seg->length > 0.0)) throw GeometryError(tag + "segment length must be positive");
      const double n = norm2(seg->direction);
      if (std::abs(n - 1.0) > kGeomTol)
        throw GeometryError(tag + "segment direction must have unit norm");
      for (double& d : seg->direction) d /= n;
    } else {
      const auto& r = std::get<Rect>(p.geometry);
      if (dim_ != 2) throw GeometryError(tag + "rectangles require a 2-D ambient space");
      if (!(r.lo[0] < r.hi[0] && r.lo[1] < r.hi[1]))
        throw GeometryError(tag + "rectangle corners must satisfy lo < hi componentwise");
    }

    for (const auto& pt : extreme_points(p)) {
      const double q = p.posterior(pt);
      if (q < -kProbTol || q > 1.0 + kProbTol)
        throw PosteriorRangeError(tag + "posterior leaves [0, 1] at an extreme point (value " +
                                  std::to_string(q) + ")");
    }
    total += p.weight;
  }
  if (std::abs(total - 1.0) > kProbTol)
    throw WeightSumError("piece weights sum to " + std::to_string(total) + ", expected 1");

  cumulative_weight_.resize(pieces_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    acc += pieces_[k].weight;
    cumulative_weight_[k] = acc;
  }
  cumulative_weight_.back() = 1.0;
}

PiecewiseDistribution build_distribution(int ambient_dimension, std::vector<Piece> pieces) {
  return PiecewiseDistribution(ambient_dimension, std::move(pieces));
}

namespace {

// Containment test; for segments also reports the parameter t of the
// projection onto the segment.
bool piece_contains(const Piece& piece, std::span<const double> x, double* t_out) {
  if (const auto* pm = std::get_if<PointMass>(&piece.geometry)) {
    for (std::size_t i = 0; i < pm->location.size(); ++i)
      if (std::abs(pm->location[i] - x[i]) > kGeomTol) return false;
    return true;
  }
  if (const auto* seg = std::get_if<Segment>(&piece.geometry)) {
    double t = 0.0;
    for (std::size_t i = 0; i < seg->base.size(); ++i)
      t += (x[i] - seg->base[i]) * seg->direction[i];
    if (t < -kGeomTol || t > seg->length + kGeomTol) return false;
    t = std::clamp(t, 0.0, seg->length);
    for (std::size_t i = 0; i < seg->base.size(); ++i) {
      const double proj = seg->base[i] + t * seg->direction[i];
      if (std::abs(proj - x[i]) > kGeomTol) return false;
    }
    if (t_out) *t_out = t;
    return true;
  }
  const auto& r = std::get<Rect>(piece.geometry);
  return x[0] >= r.lo[0] - kGeomTol && x[0] <= r.hi[0] + kGeomTol &&
         x[1] >= r.lo[1] - kGeomTol && x[1] <= r.hi[1] + kGeomTol;
}

}  // namespace

double PiecewiseDistribution::posterior(std::span<const double> x) const {
  double weight_sum = 0.0;
  double value_sum = 0.0;
  int hits = 0;
  double unweighted = 0.0;
  for (const Piece& p : pieces_) {
    if (!piece_contains(p, x, nullptr)) continue;
    ++hits;
    const double q = std::clamp(p.posterior(x), 0.0, 1.0);
    weight_sum += p.weight;
    value_sum += p.weight * q;
    unweighted += q;
  }
  if (hits == 0) throw OffSupportError("point is not on the support of any piece");
  if (weight_sum <= 0.0) return std::clamp(unweighted / hits, 0.0, 1.0);
  return std::clamp(value_sum / weight_sum, 0.0, 1.0);
}

std::vector<double> PiecewiseDistribution::sample_x(std::uint64_t seed, std::uint64_t index) const {
  const PhiloxRng rng(seed);
  const double u = rng.uniform(index, 0);
  const std::size_t k =
      std::upper_bound(cumulative_weight_.begin(), cumulative_weight_.end(), u) -
      cumulative_weight_.begin();
  const Piece& p = pieces_[std::min(k, pieces_.size() - 1)];

  std::vector<double> x;
  if (const auto* pm = std::get_if<PointMass>(&p.geometry)) {
    x = pm->location;
  } else if (const auto* seg = std::get_if<Segment>(&p.geometry)) {
    const double t = rng.uniform(index, 1) * seg->length;
    x = seg->base;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += t * seg->direction[i];
  } else {
    const auto& r = std::get<Rect>(p.geometry);
    x = {r.lo[0] + rng.uniform(index, 1) * (r.hi[0] - r.lo[0]),
         r.lo[1] + rng.uniform(index, 2) * (r.hi[1] - r.lo[1])};
  }
  return x;
}

std::vector<LabeledSample> PiecewiseDistribution::sample(std::uint64_t seed, std::size_t m) const {
  if (m < 1) throw ParameterRangeError("sample size must be at least 1");
  const PhiloxRng rng(seed);
  std::vector<LabeledSample> out;
  out.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    LabeledSample s;
    s.x = sample_x(seed, i);
    const double q = posterior(s.x);
    s.y = rng.uniform(i, 3) < q ? 1 : 0;
    out.push_back(std::move(s));
  }
  return out;
}

bool PiecewiseDistribution::has_uncertainty() const {
  for (const Piece& p : pieces_) {
    if (p.weight <= 0.0) continue;
    double qmin = 1.0, qmax = 0.0;
    for (const auto& pt : extreme_points(p)) {
      const double q = p.posterior(pt);
      qmin = std::min(qmin, q);
      qmax = std::max(qmax, q);
    }
    const bool all_zero = qmax <= kProbTol;
    const bool all_one = qmin >= 1.0 - kProbTol;
    if (!all_zero && !all_one) return true;
  }
  return false;
}

double PiecewiseDistribution::posterior_interval_mass(double lo, double hi, bool lo_open,
                                                      bool hi_open) const {
  if (!(lo <= hi)) return 0.0;
  double mass = 0.0;
  for (const Piece& p : pieces_) {
    if (p.weight <= 0.0) continue;
    if (const auto* pm = std::get_if<PointMass>(&p.geometry)) {
      const double q = p.posterior(pm->location);
      const bool above_lo = lo_open ? q > lo : q >= lo;
      const bool below_hi = hi_open ? q < hi : q <= hi;
      if (above_lo && below_hi) mass += p.weight;
    } else if (const auto* seg = std::get_if<Segment>(&p.geometry)) {
      // q(t) affine; endpoint openness is measure-zero unless q is constant.
      const double q0 = p.posterior(seg->base);
      std::vector<double> end = seg->base;
      for (std::size_t i = 0; i < end.size(); ++i) end[i] += seg->length * seg->direction[i];
      const double q1 = p.posterior(end);
      const double slope = (q1 - q0) / seg->length;
      if (std::abs(slope) * seg->length <= kProbTol) {
        const bool above_lo = lo_open ? q0 > lo : q0 >= lo;
        const bool below_hi = hi_open ? q0 < hi : q0 <= hi;
        if (above_lo && below_hi) mass += p.weight;
      } else {
        double ta = (lo - q0) / slope;
        double tb = (hi - q0) / slope;
        if (ta > tb) std::swap(ta, tb);
        ta = std::clamp(ta, 0.0, seg->length);
        tb = std::clamp(tb, 0.0, seg->length);
        mass += p.weight * (tb - ta) / seg->length;
      }
    } else {
      const auto& r = std::get<Rect>(p.geometry);
      const auto& g = p.posterior.gradient;
      const double gn = std::hypot(g[0], g[1]);
      if (gn * std::max(r.hi[0] - r.lo[0], r.hi[1] - r.lo[1]) <= kProbTol) {
        const double q = piece_mean_posterior(p);
        const bool above_lo = lo_open ? q > lo : q >= lo;
        const bool below_hi = hi_open ? q < hi : q <= hi;
        if (above_lo && below_hi) mass += p.weight;
      } else {
        // Area of {q(x) <= level} inside the rect, integrating the clamped
        // y-extent along x.  The extent is piecewise affine with kinks where
        // the level line crosses y = lo or y = hi, so trapezoids between the
        // collected x-breakpoints are exact.
        const auto band_area = [&](double level) {
          const double h = r.hi[1] - r.lo[1];
          const double a = p.posterior.intercept;
          if (std::abs(g[1]) <= kProbTol * gn) {
            const double xb = (level - a) / g[0];
            const double span = g[0] > 0 ? std::clamp(xb, r.lo[0], r.hi[0]) - r.lo[0]
                                         : r.hi[0] - std::clamp(xb, r.lo[0], r.hi[0]);
            return span * h;
          }
          std::vector<double> xs = {r.lo[0], r.hi[0]};
          for (double ybound : {r.lo[1], r.hi[1]}) {
            if (std::abs(g[0]) > 0) {
              const double xc = (level - a - g[1] * ybound) / g[0];
              if (xc > r.lo[0] && xc < r.hi[0]) xs.push_back(xc);
            }
          }
          std::sort(xs.begin(), xs.end());
          const auto extent = [&](double xx) {
            const double yb = (level - a - g[0] * xx) / g[1];
            if (g[1] > 0) return std::clamp(yb, r.lo[1], r.hi[1]) - r.lo[1];
            return r.hi[1] - std::clamp(yb, r.lo[1], r.hi[1]);
          };
          double area = 0.0;
          for (std::size_t i = 0; i + 1 < xs.size(); ++i)
            if (xs[i + 1] > xs[i])
              area += 0.5 * (extent(xs[i]) + extent(xs[i + 1])) * (xs[i + 1] - xs[i]);
          return area;
        };
        const double area_total = (r.hi[0] - r.lo[0]) * (r.hi[1] - r.lo[1]);
        const double below_hi_area = band_area(hi);
        const double below_lo_area = band_area(lo);
        mass += p.weight * std::max(0.0, below_hi_area - below_lo_area) / area_total;
      }
    }
  }
  return mass;
}

DensityFloor PiecewiseDistribution::density_floor(double c, double eps) const {
  if (!(eps > 0.0)) throw ParameterRangeError("eps must be positive");
  if (!(c > 0.0 && c < 1.0)) throw ParameterRangeError("c must lie in (0, 1)");
  DensityFloor f;
  f.above = posterior_interval_mass(c, c + eps, /*lo_open=*/true, /*hi_open=*/false);
  f.below = posterior_interval_mass(c - eps, c, /*lo_open=*/false, /*hi_open=*/true);
  return f;
}

double PiecewiseDistribution::class1_mass() const {
  double m = 0.0;
  for (const Piece& p : pieces_) m += p.weight * piece_mean_posterior(p);
  return m;
}

std::string PiecewiseDistribution::digest() const {
  std::string blob;
  blob += "dim=" + std::to_string(dim_) + ";";
  for (const Piece& p : pieces_) {
    if (const auto* pm = std::get_if<PointMass>(&p.geometry)) {
      blob += "P:";
      for (double v : pm->location) append_real(blob, v);
    } else if (const auto* seg = std::get_if<Segment>(&p.geometry)) {
      blob += "S:";
      for (double v : seg->base) append_real(blob, v);
      for (double v : seg->direction) append_real(blob, v);
      append_real(blob, seg->length);
    } else {
      const auto& r = std::get<Rect>(p.geometry);
      blob += "R:";
      append_real(blob, r.lo[0]);
      append_real(blob, r.lo[1]);
      append_real(blob, r.hi[0]);
      append_real(blob, r.hi[1]);
    }
    append_real(blob, p.weight);
    append_real(blob, p.posterior.intercept);
    for (double v : p.posterior.gradient) append_real(blob, v);
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(blob)));
  return buf;
}

DecisionProblem::DecisionProblem(PiecewiseDistribution dist, double c)
    : distribution(std::move(dist)), loss_parameter(c) {
  if (!(c > 0.0 && c < 1.0))
    throw ParameterRangeError("loss parameter must lie in the open interval (0, 1)");
}

void CostMatrix::validate() const {
  if (!(c00 < c10) || !(c11 < c01))
    throw DegenerateCostError("cost matrix must reward correct decisions: C00 < C10 and C11 < C01");
}

CostNormalization normalize_cost_matrix(const CostMatrix& cost) {
  cost.validate();
  CostNormalization n;
  n.a = cost.c10 + cost.c01 - cost.c00 - cost.c11;
  n.c = (cost.c10 - cost.c00) / n.a;
  return n;
}

CostNormalization normalize_cost_matrix(const CostMatrix& cost, const PiecewiseDistribution& dist) {
  CostNormalization n = normalize_cost_matrix(cost);
  const double p1 = dist.class1_mass();
  n.b = (1.0 - p1) * cost.c00 + p1 * cost.c11;
  return n;
}

}  // namespace idt
