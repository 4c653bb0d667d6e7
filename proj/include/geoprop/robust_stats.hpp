#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "geoprop/geodesy.hpp"

namespace geoprop {

/// Points with strictly positive, finite weights (unit weight by default).
class WeightedPointSet {
 public:
  WeightedPointSet() = default;
  explicit WeightedPointSet(std::vector<GeoPoint> points);
  WeightedPointSet(std::vector<GeoPoint> points, std::vector<double> weights);

  void add(const GeoPoint& p, double weight = 1.0);

  std::span<const GeoPoint> points() const noexcept { return points_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

 private:
  std::vector<GeoPoint> points_;
  std::vector<double> weights_;
};

struct RobustSummary {
  GeoPoint center;
  double dispersion_km = 0.0;
  std::size_t n = 0;
  bool refined = false;
};

// Relative slack within which two medoid objectives count as tied.
inline constexpr double kMedoidTieTolerance = 1e-9;

/// Weighted sum of geodesic distances from x to every point, in meters.
double l1_objective(const WeightedPointSet& s, const GeoPoint& x);

/// Weighted geodesic l1 median.
///
/// Without refinement this is the medoid: the input point with the smallest
/// weighted sum of distances to all others. Near-ties (within
/// kMedoidTieTolerance relative) go to the lexicographically smallest
/// (lat, lon), so the answer does not depend on input order.
///
/// With refinement, Weiszfeld iterations run in a tangent plane centered on
/// the medoid and a step is kept only if it lowers the true geodesic
/// objective. Stops when a step is under 1 m or after 100 iterations.
GeoPoint l1_median(const WeightedPointSet& s, bool refine = false);

/// Median over the points of their distance to center, in km. Weights are
/// ignored. An even count takes the lower-middle order statistic.
double mad_dispersion(const WeightedPointSet& s, const GeoPoint& center);

RobustSummary summarize(const WeightedPointSet& s, bool refine = false);

/// Lower-middle median of a non-empty sample (reorders the input).
double lower_median(std::vector<double>& values);

}  // namespace geoprop
