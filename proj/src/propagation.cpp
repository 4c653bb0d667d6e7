#include "geoprop/propagation.hpp"

#include <cmath>
#include <exception>
#include <istream>
#include <thread>

#include <fmt/format.h>

#include "geoprop/error.hpp"
#include "geoprop/robust_stats.hpp"

namespace geoprop {

namespace {

struct Slot {
  bool located = false;
  GeoPoint location;
  Provenance provenance = Provenance::kInferred;
  double dispersion_km = 0.0;
  int iteration = 0;
};

// One Jacobi update of vertex v from the previous state.
void update_vertex(const SocialGraph& graph, const std::vector<Slot>& prev, VertexIndex v, int iteration,
                   const SolverConfig& config, Slot& out) {
  WeightedPointSet neighbors;
  for (const auto& n : graph.neighbors(v)) {
    const Slot& s = prev[n.vertex];
    if (s.located) neighbors.add(s.location, static_cast<double>(n.weight));
  }
  if (neighbors.empty()) return;
  const GeoPoint median = l1_median(neighbors, config.refine_median);
  const double dispersion = mad_dispersion(neighbors, median);
  if (dispersion > config.gamma_km) return;  // no update on f_i
  const Slot& before = prev[v];
  out.located = true;
  out.provenance = Provenance::kInferred;
  out.dispersion_km = dispersion;
  out.iteration = (before.located && before.location == median) ? before.iteration : iteration;
  out.location = median;
}

void run_parallel(std::size_t count, unsigned threads, const auto& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(count, t * chunk);
      const std::size_t end = std::min(count, begin + chunk);
      workers.emplace_back([&, t, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double slot_objective(const SocialGraph& graph, const std::vector<Slot>& slots) {
  double total = 0.0;
  for (const auto& e : graph.edges()) {
    const Slot& a = slots[e.u];
    const Slot& b = slots[e.v];
    if (a.located && b.located) total += static_cast<double>(e.weight) * vincenty_km(a.location, b.location);
  }
  return total;
}

}  // namespace

const char* to_string(Provenance p) { return p == Provenance::kGroundTruth ? "GROUND_TRUTH" : "INFERRED"; }

void SolverConfig::validate() const {
  if (!(gamma_km > 0.0) || !std::isfinite(gamma_km)) {
    throw Error(ErrorCode::kInvalidConfig, "gamma_km must be positive");
  }
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidConfig, "max_iterations must be at least 1");
  if (!(movement_epsilon_km >= 0.0) || !std::isfinite(movement_epsilon_km)) {
    throw Error(ErrorCode::kInvalidConfig, "movement_epsilon_km must be non-negative");
  }
  if (!(min_moved_fraction >= 0.0 && min_moved_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "min_moved_fraction must lie in [0, 1]");
  }
  if (threads < 1) throw Error(ErrorCode::kInvalidConfig, "threads must be at least 1");
}

SolveResult solve(const SocialGraph& graph, const LabelSet& labels, const SolverConfig& config) {
  config.validate();
  if (graph.empty()) throw Error(ErrorCode::kEmptyGraph, "the social graph has no vertices");

  const std::size_t n = graph.vertex_count();
  std::vector<Slot> prev(n);
  std::vector<VertexIndex> unlabeled;
  for (VertexIndex v = 0; v < n; ++v) {
    const auto it = labels.find(graph.user(v));
    if (it != labels.end()) {
      prev[v] = {true, it->second.location, Provenance::kGroundTruth, 0.0, 0};
    } else {
      unlabeled.push_back(v);
    }
  }

  SolveResult result;
  std::vector<Slot> next;
  for (int k = 1; k <= config.max_iterations; ++k) {
    next = prev;
    run_parallel(unlabeled.size(), config.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const VertexIndex v = unlabeled[i];
        update_vertex(graph, prev, v, k, config, next[v]);
      }
    });

    IterationStats stats;
    stats.iteration = k;
    for (VertexIndex v = 0; v < n; ++v) {
      if (!next[v].located) continue;
      ++stats.located_count;
      if (next[v].provenance == Provenance::kGroundTruth) continue;
      if (!prev[v].located) {
        ++stats.moved_count;
        continue;
      }
      const double moved = vincenty_km(prev[v].location, next[v].location);
      stats.moved_km += moved;
      if (moved > config.movement_epsilon_km) ++stats.moved_count;
    }
    stats.objective_km = slot_objective(graph, next);
    prev.swap(next);
    result.report.iterations.push_back(stats);
    result.report.iterations_run = k;

    const double moved_fraction =
        stats.located_count == 0 ? 0.0 : static_cast<double>(stats.moved_count) / static_cast<double>(stats.located_count);
    if (moved_fraction < config.min_moved_fraction || stats.moved_count == 0) break;
  }

  for (VertexIndex v = 0; v < n; ++v) {
    const Slot& s = prev[v];
    if (!s.located) continue;
    result.estimates.emplace(graph.user(v),
                             LocationEstimate{graph.user(v), s.location, s.provenance, s.dispersion_km, s.iteration});
  }
  for (const auto& [user, label] : labels) {
    result.estimates.try_emplace(user, LocationEstimate{user, label.location, Provenance::kGroundTruth, 0.0, 0});
  }
  return result;
}

double objective(const SocialGraph& graph, const EstimateMap& estimates) {
  double total = 0.0;
  for (const auto& e : graph.edges()) {
    const auto a = estimates.find(graph.user(e.u));
    const auto b = estimates.find(graph.user(e.v));
    if (a == estimates.end() || b == estimates.end()) continue;
    total += static_cast<double>(e.weight) * vincenty_km(a->second.location, b->second.location);
  }
  return total;
}

std::string format_estimates(const EstimateMap& estimates) {
  std::string out = "# user\tlat\tlon\tprovenance\tdispersion_km\titeration\n";
  for (const auto& [user, e] : estimates) {
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", user, tsv::format_degrees(e.location.lat()),
                       tsv::format_degrees(e.location.lon()), to_string(e.provenance),
                       tsv::format_km(e.neighbor_dispersion_km), e.iteration_assigned);
  }
  return out;
}

EstimateMap read_locations(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics) {
  EstimateMap out;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if (f.empty() || f[0].empty() || f.size() < 4) {
      rows.reject("location rows need at least user, lat, lon, provenance/source");
      continue;
    }
    const auto point = tsv::parse_point(f[1], f[2]);
    if (!point) {
      rows.reject("invalid coordinates");
      continue;
    }
    LocationEstimate e{std::string(f[0]), *point, Provenance::kGroundTruth, 0.0, 0};
    if (f.size() == 6 && (f[3] == "GROUND_TRUTH" || f[3] == "INFERRED")) {
      const auto dispersion = tsv::parse_double(f[4]);
      const auto iteration = tsv::parse_uint(f[5]);
      if (!dispersion || *dispersion < 0.0 || !iteration) {
        rows.reject("invalid dispersion or iteration");
        continue;
      }
      e.provenance = f[3] == "GROUND_TRUTH" ? Provenance::kGroundTruth : Provenance::kInferred;
      e.neighbor_dispersion_km = *dispersion;
      e.iteration_assigned = static_cast<int>(*iteration);
    } else if ((f.size() == 4 || f.size() == 5) && parse_label_source(f[3])) {
      // label row
    } else {
      rows.reject("unrecognized location row layout");
      continue;
    }
    if (out.contains(e.user)) {
      rows.reject(fmt::format("second location for user {}", e.user));
      continue;
    }
    out.emplace(e.user, std::move(e));
    rows.accept();
  }
  return out;
}

std::string format_report_csv(const SolverReport& report) {
  std::string out = "iteration,located_count,moved_count,objective_km\n";
  for (const auto& it : report.iterations) {
    out += fmt::format("{},{},{},{}\n", it.iteration, it.located_count, it.moved_count, tsv::format_km(it.objective_km));
  }
  return out;
}

}  // namespace geoprop
