#include "geoprop/robust_stats.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "geoprop/error.hpp"

namespace geoprop {

namespace {

constexpr int kMaxWeiszfeldIterations = 100;
constexpr double kWeiszfeldStepM = 1.0;
// 1e-9 degree of arc along the equator; closer than this an iterate is
// treated as sitting on a data point.
constexpr double kCoincidentM = 1e-9 * 111319.49079327357;

struct WeightedPoint {
  GeoPoint point;
  double weight;
};

void require_valid_weight(double w) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw Error(ErrorCode::kInvalidConfig, "point weights must be positive and finite");
  }
}

// Sorted by coordinate with duplicates merged, so every later step sees the
// same sequence whatever the input order was.
std::vector<WeightedPoint> canonical_points(const WeightedPointSet& s) {
  std::vector<WeightedPoint> pts;
  pts.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) pts.push_back({s.points()[i], s.weights()[i]});
  std::sort(pts.begin(), pts.end(), [](const WeightedPoint& a, const WeightedPoint& b) {
    if (a.point != b.point) return a.point < b.point;
    return a.weight < b.weight;
  });
  std::vector<WeightedPoint> merged;
  for (const auto& p : pts) {
    if (!merged.empty() && merged.back().point == p.point) {
      merged.back().weight += p.weight;
    } else {
      merged.push_back(p);
    }
  }
  return merged;
}

double objective_m(const std::vector<WeightedPoint>& pts, const GeoPoint& x) {
  double sum = 0.0;
  for (const auto& p : pts) sum += p.weight * vincenty_distance(x, p.point);
  return sum;
}

std::size_t medoid_index(const std::vector<WeightedPoint>& pts, std::vector<double>& objective) {
  const std::size_t m = pts.size();
  objective.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = vincenty_distance(pts[i].point, pts[j].point);
      objective[i] += pts[j].weight * d;
      objective[j] += pts[i].weight * d;
    }
  }
  const double best = *std::min_element(objective.begin(), objective.end());
  const double limit = best + kMedoidTieTolerance * best;
  // pts is in lexicographic order, so the first near-minimizer is the
  // tie-break winner.
  for (std::size_t i = 0; i < m; ++i) {
    if (objective[i] <= limit) return i;
  }
  return 0;
}

// Vardi-Zhang modified Weiszfeld in the tangent plane at the medoid.
GeoPoint refine_from(const std::vector<WeightedPoint>& pts, const GeoPoint& start, double start_objective) {
  const TangentPlane plane(start);
  std::vector<std::pair<double, double>> xy;
  xy.reserve(pts.size());
  for (const auto& p : pts) xy.push_back(plane.forward(p.point));

  double x = 0.0, y = 0.0;
  GeoPoint best = start;
  double best_objective = start_objective;
  for (int iter = 0; iter < kMaxWeiszfeldIterations; ++iter) {
    double num_x = 0.0, num_y = 0.0, den = 0.0;
    double pull_x = 0.0, pull_y = 0.0, coincident_weight = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double dx = xy[j].first - x, dy = xy[j].second - y;
      const double d = std::hypot(dx, dy);
      if (d < kCoincidentM) {
        coincident_weight += pts[j].weight;
        continue;
      }
      const double w = pts[j].weight / d;
      num_x += w * xy[j].first;
      num_y += w * xy[j].second;
      den += w;
      pull_x += w * dx;
      pull_y += w * dy;
    }
    if (den == 0.0) break;
    double next_x = num_x / den, next_y = num_y / den;
    if (coincident_weight > 0.0) {
      const double pull = std::hypot(pull_x, pull_y);
      if (pull <= coincident_weight) break;  // the data point is optimal
      const double keep = coincident_weight / pull;
      next_x = (1.0 - keep) * next_x + keep * x;
      next_y = (1.0 - keep) * next_y + keep * y;
    }
    const double step = std::hypot(next_x - x, next_y - y);
    const GeoPoint candidate = plane.inverse(next_x, next_y);
    const double candidate_objective = objective_m(pts, candidate);
    if (!(candidate_objective < best_objective)) break;
    best = candidate;
    best_objective = candidate_objective;
    x = next_x;
    y = next_y;
    if (step < kWeiszfeldStepM) break;
  }
  return best;
}

std::pair<GeoPoint, bool> median_impl(const WeightedPointSet& s, bool refine) {
  if (s.empty()) throw Error(ErrorCode::kEmptySet, "l1 median of an empty point set");
  const auto pts = canonical_points(s);
  if (pts.size() == 1) return {pts.front().point, false};
  std::vector<double> objective;
  const std::size_t k = medoid_index(pts, objective);
  if (!refine) return {pts[k].point, false};
  return {refine_from(pts, pts[k].point, objective[k]), true};
}

}  // namespace

WeightedPointSet::WeightedPointSet(std::vector<GeoPoint> points)
    : points_(std::move(points)), weights_(points_.size(), 1.0) {}

WeightedPointSet::WeightedPointSet(std::vector<GeoPoint> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.size() != weights_.size()) {
    throw Error(ErrorCode::kInvalidConfig, "points and weights differ in length");
  }
  for (double w : weights_) require_valid_weight(w);
}

void WeightedPointSet::add(const GeoPoint& p, double weight) {
  require_valid_weight(weight);
  points_.push_back(p);
  weights_.push_back(weight);
}

double l1_objective(const WeightedPointSet& s, const GeoPoint& x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) sum += s.weights()[i] * vincenty_distance(x, s.points()[i]);
  return sum;
}

GeoPoint l1_median(const WeightedPointSet& s, bool refine) { return median_impl(s, refine).first; }

double lower_median(std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "median of an empty sample");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

double mad_dispersion(const WeightedPointSet& s, const GeoPoint& center) {
  if (s.empty()) throw Error(ErrorCode::kEmptySet, "dispersion of an empty point set");
  std::vector<double> km;
  km.reserve(s.size());
  for (const auto& p : s.points()) km.push_back(vincenty_km(p, center));
  return lower_median(km);
}

RobustSummary summarize(const WeightedPointSet& s, bool refine) {
  const auto [center, refined] = median_impl(s, refine);
  return {center, mad_dispersion(s, center), s.size(), refined};
}

}  // namespace geoprop
