#include "geoprop/propagation.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <gtest/gtest.h>

#include "geoprop/error.hpp"
#include "geoprop/robust_stats.hpp"
#include "support/synthetic.hpp"

namespace geoprop {
namespace {

using testing::equator_offset;
using testing::random_point_near;
using testing::user_name;
using EdgeList = std::vector<std::tuple<UserId, UserId, std::uint64_t>>;

GroundTruthLabel gps(const std::string& user, const GeoPoint& p) {
  return {user, p, LabelSource::kGpsMedian, std::nullopt};
}

// Straightforward sequential Jacobi sweep over a map-based state, written
// without any of the solver's internals.
std::map<UserId, GeoPoint> reference_solve(const SocialGraph& g, const LabelSet& labels, const SolverConfig& c) {
  std::map<UserId, GeoPoint> state;
  for (const auto& u : g.users()) {
    if (labels.contains(u)) state.emplace(u, labels.at(u).location);
  }
  for (int k = 1; k <= c.max_iterations; ++k) {
    std::map<UserId, GeoPoint> next = state;
    std::size_t moved = 0;
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
      const UserId& u = g.user(v);
      if (labels.contains(u)) continue;
      WeightedPointSet s;
      for (const auto& n : g.neighbors(v)) {
        const auto it = state.find(g.user(n.vertex));
        if (it != state.end()) s.add(it->second, static_cast<double>(n.weight));
      }
      if (s.empty()) continue;
      const GeoPoint m = l1_median(s, c.refine_median);
      if (mad_dispersion(s, m) > c.gamma_km) continue;
      const auto old = state.find(u);
      if (old == state.end() || vincenty_km(old->second, m) > c.movement_epsilon_km) ++moved;
      next[u] = m;
    }
    state.swap(next);
    if (moved == 0 || static_cast<double>(moved) / static_cast<double>(state.size()) < c.min_moved_fraction) break;
  }
  return state;
}

TEST(Solve, StarTakesMedoidOfLeaves) {
  EdgeList edges;
  LabelSet labels;
  std::vector<GeoPoint> leaves;
  for (int i = 0; i < 5; ++i) {
    const GeoPoint p = equator_offset(10.0, 2.0 * i);
    leaves.push_back(p);
    edges.emplace_back("hub", user_name(i), 1);
    labels[user_name(i)] = gps(user_name(i), p);
  }
  const SolveResult r = solve(SocialGraph::from_edges(edges), labels, {});
  const auto& hub = r.estimates.at("hub");
  EXPECT_EQ(hub.location, leaves[2]);
  EXPECT_EQ(hub.provenance, Provenance::kInferred);
  EXPECT_NEAR(hub.neighbor_dispersion_km, 2.0, 1e-6);
  EXPECT_EQ(hub.iteration_assigned, 1);
}

TEST(Solve, DispersionGateBlocksScatteredFriends) {
  EdgeList edges;
  LabelSet labels;
  for (int i = 0; i < 5; ++i) {
    edges.emplace_back("hub", user_name(i), 1);
    labels[user_name(i)] = gps(user_name(i), equator_offset(0.0, 500.0 * i));  // spans 2,000 km
  }
  const SocialGraph g = SocialGraph::from_edges(edges);
  SolverConfig tight;
  tight.gamma_km = 100;
  EXPECT_FALSE(solve(g, labels, tight).estimates.contains("hub"));
  SolverConfig loose;
  loose.gamma_km = 5000;
  EXPECT_TRUE(solve(g, labels, loose).estimates.contains("hub"));
}

TEST(Solve, PathPropagatesOneHopPerIteration) {
  const EdgeList edges{{"a", "b", 1}, {"b", "c", 1}, {"c", "d", 1}, {"d", "e", 1}};
  LabelSet labels;
  labels["a"] = gps("a", GeoPoint(45, 7));
  SolverConfig c;
  c.max_iterations = 3;
  const SolveResult r = solve(SocialGraph::from_edges(edges), labels, c);
  EXPECT_EQ(r.estimates.at("b").iteration_assigned, 1);
  EXPECT_EQ(r.estimates.at("c").iteration_assigned, 2);
  EXPECT_EQ(r.estimates.at("d").iteration_assigned, 3);
  EXPECT_FALSE(r.estimates.contains("e"));
  EXPECT_EQ(r.estimates.at("d").location, GeoPoint(45, 7));
  EXPECT_EQ(r.report.iterations_run, 3);
}

TEST(Solve, MatchesSequentialReference) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    testing::SyntheticOptions opt;
    opt.users = 400;
    opt.cities = 4;
    opt.friend_radius_km = trial % 2 ? 10.0 : 400.0;
    opt.seed = 100 + trial;
    const auto world = testing::make_clustered_world(opt);
    SolverConfig c;
    c.gamma_km = trial % 3 == 0 ? 20.0 : 100.0;
    c.refine_median = trial % 4 == 1;
    const SolveResult r = solve(world.graph, world.labels, c);
    const auto ref = reference_solve(world.graph, world.labels, c);
    std::size_t in_graph = 0;
    for (const auto& [u, e] : r.estimates) {
      if (!world.graph.find(u)) continue;
      ++in_graph;
      ASSERT_TRUE(ref.contains(u));
      EXPECT_EQ(ref.at(u), e.location);
    }
    EXPECT_EQ(in_graph, ref.size());
  }
}

TEST(Solve, DeterministicAcrossThreadCounts) {
  testing::SyntheticOptions opt;
  opt.users = 2000;
  opt.cities = 10;
  const auto world = testing::make_clustered_world(opt);
  SolverConfig c;
  c.threads = 1;
  const std::string one = format_estimates(solve(world.graph, world.labels, c).estimates);
  for (unsigned t : {2u, 3u, 8u}) {
    c.threads = t;
    const SolveResult r = solve(world.graph, world.labels, c);
    EXPECT_EQ(format_estimates(r.estimates), one) << t << " threads";
  }
}

TEST(Solve, LabelsAreNeverMoved) {
  testing::SyntheticOptions opt;
  opt.users = 1000;
  opt.cities = 5;
  opt.friend_radius_km = 300;
  const auto world = testing::make_clustered_world(opt);
  SolverConfig c;
  c.gamma_km = 1000;
  const SolveResult r = solve(world.graph, world.labels, c);
  for (const auto& [u, l] : world.labels) {
    const auto& e = r.estimates.at(u);
    EXPECT_EQ(e.location, l.location);
    EXPECT_EQ(e.provenance, Provenance::kGroundTruth);
    EXPECT_EQ(e.iteration_assigned, 0);
  }
}

TEST(Solve, CoverageNeverShrinks) {
  testing::SyntheticOptions opt;
  opt.users = 1500;
  opt.cities = 6;
  opt.labeled_fraction = 0.02;
  const auto world = testing::make_clustered_world(opt);
  SolverConfig c;
  c.max_iterations = 10;
  c.min_moved_fraction = 0.0;
  const SolveResult r = solve(world.graph, world.labels, c);
  for (std::size_t i = 1; i < r.report.iterations.size(); ++i) {
    EXPECT_GE(r.report.iterations[i].located_count, r.report.iterations[i - 1].located_count);
  }
}

TEST(Solve, SingleNeighborIsCopied) {
  const EdgeList edges{{"a", "b", 7}};
  LabelSet labels;
  labels["a"] = gps("a", GeoPoint(-12.5, 130.8));
  const SolveResult r = solve(SocialGraph::from_edges(edges), labels, {});
  EXPECT_EQ(r.estimates.at("b").location, GeoPoint(-12.5, 130.8));
  EXPECT_EQ(r.estimates.at("b").neighbor_dispersion_km, 0.0);
}

TEST(Solve, StopsWhenNothingMoves) {
  const EdgeList edges{{"a", "b", 1}};
  LabelSet labels;
  labels["a"] = gps("a", GeoPoint(0, 0));
  SolverConfig c;
  c.max_iterations = 50;
  c.min_moved_fraction = 0.0;
  const SolveResult r = solve(SocialGraph::from_edges(edges), labels, c);
  EXPECT_EQ(r.report.iterations_run, 2);
  EXPECT_EQ(r.report.iterations.back().moved_count, 0u);
}

TEST(Solve, PassesThroughLabelsOutsideGraph) {
  const EdgeList edges{{"a", "b", 1}};
  LabelSet labels;
  labels["a"] = gps("a", GeoPoint(0, 0));
  labels["lonely"] = gps("lonely", GeoPoint(1, 1));
  const SolveResult r = solve(SocialGraph::from_edges(edges), labels, {});
  EXPECT_EQ(r.estimates.at("lonely").provenance, Provenance::kGroundTruth);
  EXPECT_EQ(r.estimates.size(), 3u);
}

TEST(Solve, ErrorCases) {
  const EdgeList edges{{"a", "b", 1}};
  const SocialGraph g = SocialGraph::from_edges(edges);
  try {
    solve(SocialGraph{}, {}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyGraph);
  }
  std::vector<SolverConfig> bad(5);
  bad[0].gamma_km = 0;
  bad[1].max_iterations = 0;
  bad[2].movement_epsilon_km = -1;
  bad[3].min_moved_fraction = 1.5;
  bad[4].threads = 0;
  for (const auto& c : bad) {
    try {
      solve(g, {}, c);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    }
  }
}

TEST(Objective, HandExamples) {
  const EdgeList edges{{"a", "b", 2}, {"b", "c", 3}};
  const SocialGraph g = SocialGraph::from_edges(edges);
  EstimateMap est;
  est["a"] = {"a", GeoPoint(0, 0), Provenance::kGroundTruth, 0, 0};
  est["b"] = {"b", equator_offset(0, 10), Provenance::kInferred, 0, 1};
  EXPECT_NEAR(objective(g, est), 20.0, 1e-6);  // c has no estimate
  est["c"] = {"c", equator_offset(0, 10), Provenance::kInferred, 0, 1};
  EXPECT_NEAR(objective(g, est), 20.0, 1e-6);
  est["c"].location = equator_offset(0, 15);
  EXPECT_NEAR(objective(g, est), 35.0, 1e-6);
}

TEST(Objective, MatchesEdgeListSum) {
  std::mt19937_64 rng(59);
  std::uniform_int_distribution<int> who(0, 29), w(1, 9);
  EdgeList edges;
  std::set<std::pair<int, int>> seen;
  while (edges.size() < 60) {
    int a = who(rng), b = who(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) continue;
    edges.emplace_back(user_name(a), user_name(b), w(rng));
  }
  EstimateMap est;
  const GeoPoint c(20, 20);
  for (int i = 0; i < 30; ++i) {
    if (i % 7 == 3) continue;
    est[user_name(i)] = {user_name(i), random_point_near(rng, c, 800), Provenance::kInferred, 0, 1};
  }
  double expected = 0.0;
  for (const auto& [a, b, weight] : edges) {
    if (est.contains(a) && est.contains(b)) {
      expected += static_cast<double>(weight) * vincenty_distance(est.at(a).location, est.at(b).location) / 1000.0;
    }
  }
  EXPECT_NEAR(objective(SocialGraph::from_edges(edges), est), expected, 1e-9 * expected);
}

TEST(Estimates, RoundTripAndReport) {
  const EdgeList edges{{"a", "b", 1}, {"b", "c", 1}};
  LabelSet labels;
  labels["a"] = gps("a", GeoPoint(10.25, -3.5));
  const SolveResult r = solve(SocialGraph::from_edges(edges), labels, {});
  const std::string text = format_estimates(r.estimates);
  std::istringstream in(text);
  EXPECT_EQ(format_estimates(read_locations(in, tsv::ParseMode::kStrict)), text);
  const std::string csv = format_report_csv(r.report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iteration,located_count,moved_count,objective_km");
}

}  // namespace
}  // namespace geoprop
