#include "geoprop/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "geoprop/error.hpp"

namespace geoprop {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kLambdaTolerance = 1e-12;
constexpr int kMaxVincentyIterations = 200;

double wrap_longitude(double lon) {
  double x = std::fmod(lon + 180.0, 360.0);
  if (x < 0.0) x += 360.0;
  double wrapped = x - 180.0;
  if (wrapped >= 180.0) wrapped -= 360.0;
  return wrapped;
}

double wrap_radians(double x) {
  x = std::remainder(x, 2.0 * std::numbers::pi);
  return x;
}

}  // namespace

GeoPoint::GeoPoint(double lat_deg, double lon_deg) {
  if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg)) {
    throw Error(ErrorCode::kInvalidGeoPoint, "coordinates must be finite");
  }
  if (lat_deg < -90.0 || lat_deg > 90.0) {
    throw Error(ErrorCode::kInvalidGeoPoint,
                fmt::format("latitude {} outside [-90, 90]", lat_deg));
  }
  lat_ = lat_deg;
  lon_ = (std::abs(lat_deg) == 90.0) ? 0.0 : wrap_longitude(lon_deg);
  if (lon_ == 0.0) lon_ = 0.0;  // drop negative zero
  if (lat_ == 0.0) lat_ = 0.0;
}

GeodesicLength vincenty_inverse(const GeoPoint& p, const GeoPoint& q,
                                NonConvergencePolicy policy) {
  if (p == q) return {0.0, false, 0};
  // Evaluate in a canonical order so d(a, b) and d(b, a) are bit-identical.
  const GeoPoint& a = std::min(p, q);
  const GeoPoint& b = std::max(p, q);

  const double f = kWgs84Flattening;
  const double semi_minor = kWgs84SemiMinorM;

  const double u1 = std::atan((1.0 - f) * std::tan(a.lat() * kDegToRad));
  const double u2 = std::atan((1.0 - f) * std::tan(b.lat() * kDegToRad));
  const double sin_u1 = std::sin(u1), cos_u1 = std::cos(u1);
  const double sin_u2 = std::sin(u2), cos_u2 = std::cos(u2);
  const double big_l = wrap_radians((b.lon() - a.lon()) * kDegToRad);

  double lambda = big_l;
  double sin_sigma = 0.0, cos_sigma = 1.0, sigma = 0.0;
  double cos_sq_alpha = 1.0, cos_2sigma_m = 0.0;
  bool converged = false;
  int iteration = 0;
  while (iteration < kMaxVincentyIterations) {
    ++iteration;
    const double sin_lambda = std::sin(lambda), cos_lambda = std::cos(lambda);
    const double t1 = cos_u2 * sin_lambda;
    const double t2 = cos_u1 * sin_u2 - sin_u1 * cos_u2 * cos_lambda;
    sin_sigma = std::sqrt(t1 * t1 + t2 * t2);
    if (sin_sigma == 0.0) {
      return {0.0, false, iteration};  // coincident
    }
    cos_sigma = sin_u1 * sin_u2 + cos_u1 * cos_u2 * cos_lambda;
    sigma = std::atan2(sin_sigma, cos_sigma);
    const double sin_alpha = cos_u1 * cos_u2 * sin_lambda / sin_sigma;
    cos_sq_alpha = 1.0 - sin_alpha * sin_alpha;
    // Equatorial lines have cos^2(alpha) == 0; the term vanishes there.
    cos_2sigma_m = cos_sq_alpha != 0.0 ? cos_sigma - 2.0 * sin_u1 * sin_u2 / cos_sq_alpha : 0.0;
    const double c = f / 16.0 * cos_sq_alpha * (4.0 + f * (4.0 - 3.0 * cos_sq_alpha));
    const double next = big_l + (1.0 - c) * f * sin_alpha *
                                    (sigma + c * sin_sigma *
                                                 (cos_2sigma_m + c * cos_sigma *
                                                                     (-1.0 + 2.0 * cos_2sigma_m * cos_2sigma_m)));
    if (std::abs(next) > std::numbers::pi || !std::isfinite(next)) {
      break;  // antipodal divergence
    }
    const double delta = std::abs(next - lambda);
    lambda = next;
    if (delta < kLambdaTolerance) {
      converged = true;
      break;
    }
  }

  if (!converged) {
    if (policy == NonConvergencePolicy::kStrict) {
      throw Error(ErrorCode::kNonConvergence,
                  fmt::format("Vincenty inverse did not converge for ({}, {}) - ({}, {})",
                              a.lat(), a.lon(), b.lat(), b.lon()));
    }
    return {haversine_distance(a, b), true, iteration};
  }

  const double u_sq = cos_sq_alpha * (kWgs84SemiMajorM * kWgs84SemiMajorM - semi_minor * semi_minor) /
                      (semi_minor * semi_minor);
  const double big_a = 1.0 + u_sq / 16384.0 * (4096.0 + u_sq * (-768.0 + u_sq * (320.0 - 175.0 * u_sq)));
  const double big_b = u_sq / 1024.0 * (256.0 + u_sq * (-128.0 + u_sq * (74.0 - 47.0 * u_sq)));
  const double c2m2 = cos_2sigma_m * cos_2sigma_m;
  const double delta_sigma =
      big_b * sin_sigma *
      (cos_2sigma_m + big_b / 4.0 *
                          (cos_sigma * (-1.0 + 2.0 * c2m2) -
                           big_b / 6.0 * cos_2sigma_m * (-3.0 + 4.0 * sin_sigma * sin_sigma) *
                               (-3.0 + 4.0 * c2m2)));
  return {semi_minor * big_a * (sigma - delta_sigma), false, iteration};
}

double vincenty_distance(const GeoPoint& a, const GeoPoint& b) {
  return vincenty_inverse(a, b).meters;
}

double haversine_distance(const GeoPoint& p, const GeoPoint& q) {
  if (p == q) return 0.0;
  const GeoPoint& a = std::min(p, q);
  const GeoPoint& b = std::max(p, q);
  const double lat1 = a.lat() * kDegToRad, lat2 = b.lat() * kDegToRad;
  const double s_dlat = std::sin((lat2 - lat1) / 2.0);
  const double s_dlon = std::sin((b.lon() - a.lon()) * kDegToRad / 2.0);
  double h = s_dlat * s_dlat + std::cos(lat1) * std::cos(lat2) * s_dlon * s_dlon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kMeanEarthRadiusM * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
}

TangentPlane::TangentPlane(const GeoPoint& center)
    : center_(center),
      sin_lat_(std::sin(center.lat() * kDegToRad)),
      cos_lat_(std::cos(center.lat() * kDegToRad)) {}

std::pair<double, double> TangentPlane::forward(const GeoPoint& p) const {
  const double lat = p.lat() * kDegToRad;
  const double dlon = (p.lon() - center_.lon()) * kDegToRad;
  const double s_dlat = std::sin((lat - center_.lat() * kDegToRad) / 2.0);
  const double s_dlon = std::sin(dlon / 2.0);
  double h = s_dlat * s_dlat + cos_lat_ * std::cos(lat) * s_dlon * s_dlon;
  h = std::clamp(h, 0.0, 1.0);
  const double angle = 2.0 * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
  const double azimuth = std::atan2(std::sin(dlon) * std::cos(lat),
                                    cos_lat_ * std::sin(lat) - sin_lat_ * std::cos(lat) * std::cos(dlon));
  const double rho = kMeanEarthRadiusM * angle;
  return {rho * std::sin(azimuth), rho * std::cos(azimuth)};
}

GeoPoint TangentPlane::inverse(double x, double y) const {
  const double rho = std::hypot(x, y);
  if (rho == 0.0) return center_;
  const double angle = rho / kMeanEarthRadiusM;
  const double azimuth = std::atan2(x, y);
  const double sin_c = std::sin(angle), cos_c = std::cos(angle);
  const double sin_lat = std::clamp(sin_lat_ * cos_c + cos_lat_ * sin_c * std::cos(azimuth), -1.0, 1.0);
  const double lat = std::asin(sin_lat);
  const double lon = center_.lon() * kDegToRad +
                     std::atan2(std::sin(azimuth) * sin_c * cos_lat_, cos_c - sin_lat_ * sin_lat);
  return GeoPoint(lat * kRadToDeg, lon * kRadToDeg);
}

}  // namespace geoprop
