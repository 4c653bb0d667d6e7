#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoprop/geodesy.hpp"
#include "geoprop/social_graph.hpp"

namespace geoprop {

enum class Provenance { kGroundTruth, kInferred };

const char* to_string(Provenance p);

struct LocationEstimate {
  UserId user;
  GeoPoint location;
  Provenance provenance = Provenance::kInferred;
  double neighbor_dispersion_km = 0.0;
  int iteration_assigned = 0;  // 0 for ground truth
};

using EstimateMap = std::map<UserId, LocationEstimate, std::less<>>;

struct SolverConfig {
  double gamma_km = 100.0;
  int max_iterations = 5;
  double movement_epsilon_km = 1.0;
  double min_moved_fraction = 0.001;
  bool refine_median = false;
  unsigned threads = 1;

  /// Throws Error(kInvalidConfig).
  void validate() const;
};

struct IterationStats {
  int iteration = 0;
  std::size_t located_count = 0;
  std::size_t moved_count = 0;  // estimates new this iteration or moved > epsilon
  double moved_km = 0.0;
  double objective_km = 0.0;
};

struct SolverReport {
  int iterations_run = 0;
  std::vector<IterationStats> iterations;
};

struct SolveResult {
  EstimateMap estimates;
  SolverReport report;
};

/// Dispersion-gated parallel coordinate descent on graph total variation.
///
/// Every iteration reads only the previous iteration's state. An unlabeled
/// user with located neighbors takes the weighted l1 median of their
/// locations, provided the neighbors' MAD about that median is within
/// gamma_km; otherwise the user keeps whatever estimate it had. Labeled
/// users never move. Labels for users outside the graph are passed through.
SolveResult solve(const SocialGraph& graph, const LabelSet& labels, const SolverConfig& config);

/// Sum of w_ij * d(f_i, f_j) in km over edges whose endpoints both have
/// estimates.
double objective(const SocialGraph& graph, const EstimateMap& estimates);

/// user<TAB>lat<TAB>lon<TAB>provenance<TAB>dispersion_km<TAB>iteration
std::string format_estimates(const EstimateMap& estimates);

/// Reads estimate rows; label rows (user, lat, lon, source[, last_seen]) are
/// also accepted and become ground-truth estimates.
EstimateMap read_locations(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics = nullptr);

/// iteration,located_count,moved_count,objective_km
std::string format_report_csv(const SolverReport& report);

}  // namespace geoprop
