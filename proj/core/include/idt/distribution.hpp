#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idt/errors.hpp"

namespace idt {

// Geometric tolerance for on-support checks and fiber solves.
inline constexpr double kGeomTol = 1e-9;
// Tolerance for probability identities (weight sums, posterior range).
inline constexpr double kProbTol = 1e-12;

/// Affine map x -> intercept + gradient . x, used as a per-piece posterior
/// P(Y = 1 | X = x).  Validity (range [0,1] on the piece) is checked at
/// distribution build time against the piece's extreme points.
struct AffinePosterior {
  double intercept = 0.0;
  std::vector<double> gradient;

  double operator()(std::span<const double> x) const {
    double v = intercept;
    const std::size_t n = gradient.size() < x.size() ? gradient.size() : x.size();
    for (std::size_t i = 0; i < n; ++i) v += gradient[i] * x[i];
    return v;
  }
};

struct PointMass {
  std::vector<double> location;
};

/// Line segment base + t * direction for t in [0, length]; direction has
/// unit Euclidean norm.  Mass is uniform along the segment.
struct Segment {
  std::vector<double> base;
  std::vector<double> direction;
  double length = 0.0;
};

/// Axis-aligned rectangle in a 2-D ambient space, uniform mass.
struct Rect {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
};

using PieceGeometry = std::variant<PointMass, Segment, Rect>;

struct Piece {
  PieceGeometry geometry;
  double weight = 0.0;
  AffinePosterior posterior;
};

/// Corners / endpoints / location of a piece, where affine posteriors take
/// their extreme values.
std::vector<std::vector<double>> extreme_points(const Piece& piece);

/// Geometric measure of the piece support (1 for a point mass, length for a
/// segment, area for a rectangle).
double piece_measure(const Piece& piece);

/// Mean of the affine posterior over the piece.
double piece_mean_posterior(const Piece& piece);

struct LabeledSample {
  std::vector<double> x;
  int y = 0;
};

struct DensityFloor {
  double above = 0.0;  // P(q(X) in (c, c + eps])
  double below = 0.0;  // P(q(X) in [c - eps, c))
};

/// Finite mixture of point masses, segments and rectangles carrying affine
/// posteriors.  Immutable after construction; all queries are const and
/// thread-safe.
class PiecewiseDistribution {
public:
  /// Validates every invariant eagerly: weights sum to 1 within 1e-12,
  /// geometry lives in the stated dimension, posteriors stay in [0,1] at
  /// all extreme points.
  PiecewiseDistribution(int ambient_dimension, std::vector<Piece> pieces);

  int ambient_dimension() const noexcept { return dim_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }

  /// P(Y = 1 | X = x) for x on the support (tolerance 1e-9).  Overlapping
  /// pieces resolve by weight-weighted averaging.  Throws OffSupportError.
  double posterior(std::span<const double> x) const;

  /// m i.i.d. draws, deterministic in seed (counter-based generator).
  std::vector<LabeledSample> sample(std::uint64_t seed, std::size_t m) const;

  /// Draw only the observation for record `index` of the stream `seed`.
  std::vector<double> sample_x(std::uint64_t seed, std::uint64_t index) const;

  /// False iff every positive-weight piece has posterior identically 0 or 1.
  bool has_uncertainty() const;

  /// Exact mass of q(X) on the two one-sided eps-bands around c.
  DensityFloor density_floor(double c, double eps) const;

  /// Exact P(q(X) in I) for an interval with open/closed endpoints.
  double posterior_interval_mass(double lo, double hi, bool lo_open, bool hi_open) const;

  /// P(Y = 1).
  double class1_mass() const;

  /// Stable content hash of the canonical serialization.
  std::string digest() const;

private:
  int dim_;
  std::vector<Piece> pieces_;
  std::vector<double> cumulative_weight_;
};

/// Validating factory; identical to the constructor.
PiecewiseDistribution build_distribution(int ambient_dimension, std::vector<Piece> pieces);

/// A distribution paired with the decision maker's hidden loss parameter.
struct DecisionProblem {
  PiecewiseDistribution distribution;
  double loss_parameter;

  DecisionProblem(PiecewiseDistribution dist, double c);
};

/// 2x2 cost matrix, entries[yhat][y].  Requires C00 < C10 and C11 < C01.
struct CostMatrix {
  double c00 = 0.0, c01 = 1.0, c10 = 1.0, c11 = 0.0;

  void validate() const;
  double at(int yhat, int y) const {
    return yhat == 0 ? (y == 0 ? c00 : c01) : (y == 0 ? c10 : c11);
  }
};

struct CostNormalization {
  double c = 0.0;                 // normalized false-positive cost
  double a = 0.0;                 // positive scale
  std::optional<double> b;        // offset; depends on P(Y=0), P(Y=1)
};

/// Reduce a cost matrix to its one-parameter normal form.  The offset b is
/// distribution dependent and only returned when a distribution is supplied.
CostNormalization normalize_cost_matrix(const CostMatrix& cost);
CostNormalization normalize_cost_matrix(const CostMatrix& cost, const PiecewiseDistribution& dist);

}  // namespace idt
