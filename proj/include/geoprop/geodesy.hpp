#pragma once

#include <compare>
#include <utility>

namespace geoprop {

// WGS-84 ellipsoid.
inline constexpr double kWgs84SemiMajorM = 6378137.0;
inline constexpr double kWgs84Flattening = 1.0 / 298.257223563;
inline constexpr double kWgs84SemiMinorM = kWgs84SemiMajorM * (1.0 - kWgs84Flattening);
// IUGG mean radius, used by the spherical formulas.
inline constexpr double kMeanEarthRadiusM = 6371008.8;

/// A WGS-84 latitude/longitude in decimal degrees.
///
/// Construction validates latitude to [-90, 90] and wraps longitude into
/// [-180, 180); +180 becomes -180. At either pole the longitude is
/// meaningless and is set to 0, so equal positions compare equal.
class GeoPoint {
 public:
  constexpr GeoPoint() = default;
  GeoPoint(double lat_deg, double lon_deg);

  double lat() const noexcept { return lat_; }
  double lon() const noexcept { return lon_; }

  friend auto operator<=>(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

enum class NonConvergencePolicy {
  kFallbackHaversine,  // return the spherical distance and flag it
  kStrict,             // throw Error(kNonConvergence)
};

struct GeodesicLength {
  double meters = 0.0;
  bool fallback = false;  // true when Vincenty failed and haversine was used
  int iterations = 0;
};

/// Inverse geodesic problem on WGS-84 by Vincenty's iteration
/// (|dLambda| < 1e-12 rad, at most 200 iterations).
GeodesicLength vincenty_inverse(const GeoPoint& a, const GeoPoint& b,
                                NonConvergencePolicy policy = NonConvergencePolicy::kFallbackHaversine);

/// Meters; near-antipodal pairs that fail to converge fall back to haversine.
double vincenty_distance(const GeoPoint& a, const GeoPoint& b);

/// Great-circle distance on the mean-radius sphere, in meters.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

inline double vincenty_km(const GeoPoint& a, const GeoPoint& b) {
  return vincenty_distance(a, b) / 1000.0;
}

/// Spherical azimuthal-equidistant projection about a fixed center. Distances
/// and bearings from the center are preserved; x points east, y north, both
/// in meters.
class TangentPlane {
 public:
  explicit TangentPlane(const GeoPoint& center);

  std::pair<double, double> forward(const GeoPoint& p) const;
  GeoPoint inverse(double x, double y) const;

  const GeoPoint& center() const noexcept { return center_; }

 private:
  GeoPoint center_;
  double sin_lat_;
  double cos_lat_;
};

}  // namespace geoprop
