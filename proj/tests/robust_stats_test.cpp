#include "geoprop/robust_stats.hpp"

#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "geoprop/error.hpp"
#include "support/synthetic.hpp"

namespace geoprop {
namespace {

using testing::equator_offset;
using testing::random_point;
using testing::random_point_near;

// Exhaustive objective evaluation over the set's own elements with the
// documented tie rule.
GeoPoint brute_force_medoid(const std::vector<GeoPoint>& pts, const std::vector<double>& w) {
  std::vector<double> obj(pts.size(), 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) obj[i] += w[j] * vincenty_distance(pts[i], pts[j]);
  }
  const double best = *std::min_element(obj.begin(), obj.end());
  std::optional<GeoPoint> winner;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (obj[i] <= best * (1.0 + 1e-9) && (!winner || pts[i] < *winner)) winner = pts[i];
  }
  return *winner;
}

double brute_force_mad(const std::vector<GeoPoint>& pts, const GeoPoint& c) {
  std::vector<double> d;
  for (const auto& p : pts) d.push_back(vincenty_distance(p, c) / 1000.0);
  std::sort(d.begin(), d.end());
  return d[(d.size() - 1) / 2];
}

std::vector<GeoPoint> cluster(std::mt19937_64& rng, std::size_t n, double radius_km) {
  const GeoPoint c(std::uniform_real_distribution<double>(-60, 60)(rng),
                   std::uniform_real_distribution<double>(-180, 180)(rng));
  std::vector<GeoPoint> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(random_point_near(rng, c, radius_km));
  return pts;
}

TEST(L1Median, SingleAndCoincidentPoints) {
  const GeoPoint p(48.85, 2.35);
  EXPECT_EQ(l1_median(WeightedPointSet({p})), p);
  EXPECT_EQ(l1_median(WeightedPointSet({p, p, p})), p);
  EXPECT_EQ(l1_median(WeightedPointSet({p, p, p}), true), p);
}

TEST(L1Median, SevenRandomPointsMatchExhaustiveSearch) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 7; ++i) pts.push_back(random_point(rng));
    const std::vector<double> w(7, 1.0);
    EXPECT_EQ(l1_median(WeightedPointSet(pts)), brute_force_medoid(pts, w));
  }
}

TEST(L1Median, WeightedMedoidMatchesExhaustiveSearch) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> weight(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto pts = cluster(rng, 1 + trial % 10, 300.0);
    std::vector<double> w;
    for (std::size_t i = 0; i < pts.size(); ++i) w.push_back(weight(rng));
    EXPECT_EQ(l1_median(WeightedPointSet(pts, w)), brute_force_medoid(pts, w));
  }
}

TEST(L1Median, HeavyWeightWins) {
  const GeoPoint a(0, 0), b(0, 1), c(0, 2);
  EXPECT_EQ(l1_median(WeightedPointSet({a, b, c})), b);
  EXPECT_EQ(l1_median(WeightedPointSet({a, b, c}, {10.0, 1.0, 1.0})), a);
}

TEST(L1Median, TiesGoToSmallestLatLon) {
  // Two points: both have the same objective.
  const GeoPoint a(10, 20), b(-5, 30);
  EXPECT_EQ(l1_median(WeightedPointSet({a, b})), b);
  EXPECT_EQ(l1_median(WeightedPointSet({b, a})), b);
}

TEST(L1Median, PermutationInvariant) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    auto pts = cluster(rng, 9, 50.0);
    pts.push_back(pts[2]);
    const GeoPoint m = l1_median(WeightedPointSet(pts));
    const GeoPoint r = l1_median(WeightedPointSet(pts), true);
    std::shuffle(pts.begin(), pts.end(), rng);
    EXPECT_EQ(l1_median(WeightedPointSet(pts)), m);
    EXPECT_EQ(l1_median(WeightedPointSet(pts), true), r);
  }
}

TEST(L1Median, RefinementNeverIncreasesObjective) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    auto pts = cluster(rng, 2 + trial % 9, trial % 2 ? 20.0 : 2000.0);
    const WeightedPointSet s(pts);
    const double medoid = l1_objective(s, l1_median(s, false));
    const double refined = l1_objective(s, l1_median(s, true));
    EXPECT_LE(refined, medoid * (1.0 + 1e-9));
  }
}

TEST(L1Median, RefinementFindsInteriorFermatPoint) {
  // Equilateral-ish triangle: the continuous optimum is strictly inside.
  const GeoPoint a(0, 0), b(0, 0.1), c(0.0866, 0.05);
  const WeightedPointSet s({a, b, c});
  const RobustSummary refined = summarize(s, true);
  EXPECT_TRUE(refined.refined);
  EXPECT_LT(l1_objective(s, refined.center), 0.95 * l1_objective(s, l1_median(s)));
}

TEST(L1Median, RobustToOneFarOutlier) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = cluster(rng, 9, 10.0);
    const GeoPoint before = l1_median(WeightedPointSet(pts));
    GeoPoint outlier = random_point(rng);
    while (vincenty_distance(outlier, before) < 5000e3) outlier = random_point(rng);
    pts.push_back(outlier);
    EXPECT_LE(vincenty_km(l1_median(WeightedPointSet(pts)), before), 10.0);
  }
}

TEST(L1Median, EmptySetAndBadWeights) {
  try {
    l1_median(WeightedPointSet{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySet);
  }
  WeightedPointSet s;
  EXPECT_THROW(s.add(GeoPoint(0, 0), 0.0), Error);
  EXPECT_THROW(s.add(GeoPoint(0, 0), -1.0), Error);
  EXPECT_THROW(WeightedPointSet({GeoPoint(0, 0)}, {1.0, 2.0}), Error);
}

TEST(MadDispersion, CoincidentIsZero) {
  const GeoPoint p(1, 2);
  EXPECT_EQ(mad_dispersion(WeightedPointSet({p, p, p}), p), 0.0);
}

TEST(MadDispersion, OddCountTakesMiddle) {
  const WeightedPointSet s({equator_offset(0, 9), equator_offset(0, 1), equator_offset(0, 5)});
  EXPECT_NEAR(mad_dispersion(s, GeoPoint(0, 0)), 5.0, 1e-9);
}

TEST(MadDispersion, EvenCountTakesLowerMiddle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = cluster(rng, 10, 500.0);
    const GeoPoint c = random_point(rng);
    EXPECT_EQ(mad_dispersion(WeightedPointSet(pts), c), brute_force_mad(pts, c));
  }
}

TEST(MadDispersion, IgnoresWeights) {
  const std::vector<GeoPoint> pts{equator_offset(0, 1), equator_offset(0, 5), equator_offset(0, 9)};
  EXPECT_EQ(mad_dispersion(WeightedPointSet(pts, {100.0, 1.0, 1.0}), GeoPoint(0, 0)),
            mad_dispersion(WeightedPointSet(pts), GeoPoint(0, 0)));
}

// A latitude shift rescales east-west distances by about tan(lat) * dlat, so
// the 0.1% bound only holds at low latitudes; longitude shifts are exact
// rotations and hold everywhere.
TEST(MadDispersion, TranslationConsistent) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> shift(-0.1, 0.1), low_lat(-20, 20), any_lat(-70, 70), lon(-180, 180);
  const auto check = [&](double lat0, double dlat, double dlon, double tolerance) {
    const GeoPoint c0(lat0, lon(rng));
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 9; ++i) pts.push_back(random_point_near(rng, c0, 200.0));
    std::vector<GeoPoint> moved;
    for (const auto& p : pts) moved.emplace_back(p.lat() + dlat, p.lon() + dlon);
    const GeoPoint c = l1_median(WeightedPointSet(pts));
    const GeoPoint cm(c.lat() + dlat, c.lon() + dlon);
    const double d0 = mad_dispersion(WeightedPointSet(pts), c);
    const double d1 = mad_dispersion(WeightedPointSet(moved), cm);
    EXPECT_LT(std::abs(d1 - d0), tolerance * d0) << lat0 << " " << dlat << " " << dlon;
  };
  for (int trial = 0; trial < 50; ++trial) check(low_lat(rng), shift(rng), shift(rng), 1e-3);
  for (int trial = 0; trial < 50; ++trial) check(any_lat(rng), 0.0, shift(rng), 1e-9);
}

TEST(Summarize, ComposesMedianAndDispersion) {
  const GeoPoint p(5, 5);
  const RobustSummary one = summarize(WeightedPointSet({p}));
  EXPECT_EQ(one.center, p);
  EXPECT_EQ(one.dispersion_km, 0.0);
  EXPECT_EQ(one.n, 1u);
  const RobustSummary three = summarize(WeightedPointSet({p, p, p}));
  EXPECT_EQ(three.n, 3u);
  EXPECT_EQ(three.dispersion_km, 0.0);

  std::mt19937_64 rng(41);
  const auto pts = cluster(rng, 9, 100.0);
  const RobustSummary s = summarize(WeightedPointSet(pts));
  const GeoPoint c = brute_force_medoid(pts, std::vector<double>(9, 1.0));
  EXPECT_EQ(s.center, c);
  EXPECT_EQ(s.dispersion_km, brute_force_mad(pts, c));
  EXPECT_EQ(s.n, 9u);
  EXPECT_FALSE(s.refined);
}

TEST(LowerMedian, EvenAndOdd) {
  std::vector<double> even{4, 1, 3, 2};
  EXPECT_EQ(lower_median(even), 2.0);
  std::vector<double> odd{9, 1, 5};
  EXPECT_EQ(lower_median(odd), 5.0);
  std::vector<double> empty;
  EXPECT_THROW(lower_median(empty), Error);
}

}  // namespace
}  // namespace geoprop
