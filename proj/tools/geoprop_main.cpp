// geoprop: batch pipeline over flat files.
//
//   graph-build     mentions TSV        -> reciprocated graph TSV
//   labels-build    GPS/profile TSVs    -> ground-truth label TSV
//   locate          graph + labels      -> location estimates + per-iteration report
//   geotag          shares + locations  -> per-URL geotag results
//   toponyms        observations        -> unambiguous toponym set
//   toponym-geotag  texts + toponyms    -> reference locations for single-toponym texts
//   links           profiles            -> (user, external account) pairs
//   eval            cv | cdf | coverage | characteristic | records
//
// Every output file gets a <out>.manifest.json next to it.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "geoprop/doc_geotag.hpp"
#include "geoprop/error.hpp"
#include "geoprop/eval_harness.hpp"
#include "geoprop/propagation.hpp"
#include "geoprop/social_graph.hpp"
#include "geoprop/text.hpp"
#include "geoprop/toponym_gazetteer.hpp"
#include "geoprop/tsv.hpp"

namespace {

using namespace geoprop;
using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

tsv::Timestamp now() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

tsv::ParseMode mode_for(bool strict) { return strict ? tsv::ParseMode::kStrict : tsv::ParseMode::kLenient; }

template <typename Reader>
auto read_input(const std::string& path, bool strict, const char* what, Reader reader) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open {} file {}", what, path));
  tsv::ParseDiagnostics diagnostics;
  auto value = reader(in, mode_for(strict), &diagnostics);
  if (!diagnostics.issues.empty()) {
    std::cerr << fmt::format("warning: {} file {}: skipped {} malformed row(s)\n", what, path,
                             diagnostics.issues.size());
    for (std::size_t i = 0; i < std::min<std::size_t>(diagnostics.issues.size(), 5); ++i) {
      std::cerr << "  " << diagnostics.issues[i].message << '\n';
    }
  }
  return value;
}

struct Manifest {
  explicit Manifest(std::string name) : subcommand(std::move(name)) {}

  std::string subcommand;
  json parameters = json::object();
  json inputs = json::object();
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
  tsv::Timestamp started = now();

  void write() const {
    json j;
    j["subcommand"] = subcommand;
    j["version"] = kVersion;
    j["parameters"] = parameters;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["started_at"] = tsv::format_iso8601(started);
    j["finished_at"] = tsv::format_iso8601(now());
    for (const auto& out : outputs) tsv::write_file_atomic(out + ".manifest.json", j.dump(2) + "\n");
  }
};

unsigned resolve_threads(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("GEOPROP_THREADS")) {
    const auto v = tsv::parse_uint(env);
    if (!v || *v == 0) throw UsageError(fmt::format("GEOPROP_THREADS must be a positive integer, got '{}'", env));
    return static_cast<unsigned>(*v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct SolverFlags {
  double gamma_km = 100.0;
  int iterations = 5;
  double movement_epsilon_km = 1.0;
  double min_moved_fraction = 0.001;
  bool refine = false;
  int threads = 0;

  void attach(CLI::App* app) {
    app->add_option("--gamma-km", gamma_km, "Maximum neighbor dispersion for an update (km)")->capture_default_str();
    app->add_option("--iterations", iterations, "Maximum solver iterations")->capture_default_str();
    app->add_option("--movement-epsilon-km", movement_epsilon_km, "An estimate moving more than this counts as moved")
        ->capture_default_str();
    app->add_option("--min-moved-fraction", min_moved_fraction, "Stop once fewer estimates than this fraction move")
        ->capture_default_str();
    app->add_flag("--refine", refine, "Refine medoids with tangent-plane Weiszfeld iterations");
    app->add_option("--threads", threads, "Worker threads (default: $GEOPROP_THREADS, else all cores)");
  }

  SolverConfig config() const {
    SolverConfig c;
    c.gamma_km = gamma_km;
    c.max_iterations = iterations;
    c.movement_epsilon_km = movement_epsilon_km;
    c.min_moved_fraction = min_moved_fraction;
    c.refine_median = refine;
    c.threads = resolve_threads(threads);
    return c;
  }

  static json describe(const SolverConfig& c) {
    return {{"gamma_km", c.gamma_km},
            {"max_iterations", c.max_iterations},
            {"movement_epsilon_km", c.movement_epsilon_km},
            {"min_moved_fraction", c.min_moved_fraction},
            {"refine_median", c.refine_median},
            {"threads", c.threads}};
  }
};

std::vector<double> thresholds_from(const std::vector<double>& explicit_grid, double lo, double hi, std::size_t count) {
  if (!explicit_grid.empty()) return explicit_grid;
  return log_grid(lo, hi, count);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social-graph user geolocation and document geotagging."};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::function<void()> action;

  // graph-build
  std::string mentions_path, graph_out;
  bool graph_strict = false;
  auto* graph_cmd = app.add_subcommand("graph-build", "Build the reciprocated mention graph.");
  graph_cmd->footer(
      "Input  (--mentions): src<TAB>dst<TAB>count, '#' comments ignored.\n"
      "Output (--out):      u<TAB>v<TAB>weight, weight = min of the two directed totals.");
  graph_cmd->add_option("--mentions", mentions_path, "Mention TSV")->required()->check(CLI::ExistingFile);
  graph_cmd->add_option("--out", graph_out, "Graph TSV to write")->required();
  graph_cmd->add_flag("--strict", graph_strict, "Fail on the first malformed row");
  graph_cmd->callback([&] {
    action = [&] {
      Manifest m{"graph-build"};
      m.parameters = {{"strict", graph_strict}};
      m.inputs = {{"mentions", mentions_path}};
      const auto records = read_input(mentions_path, graph_strict, "mentions", read_mentions);
      const SocialGraph graph = build_graph(records);
      tsv::write_file_atomic(graph_out, format_graph(graph));
      m.outputs = {graph_out};
      m.write();
      std::cout << fmt::format("vertices\t{}\nedges\t{}\n", graph.vertex_count(), graph.edge_count());
    };
  });

  // labels-build
  std::string gps_path, profiles_path, gazetteer_path, cutoff_text, labels_out;
  bool labels_strict = false;
  auto* labels_cmd = app.add_subcommand("labels-build", "Build ground-truth labels from GPS and self-reports.");
  labels_cmd->footer(
      "--gps:       user<TAB>lat<TAB>lon, one row per observation; label = medoid.\n"
      "--profiles:  user<TAB>location-text[<TAB>last_seen_iso8601]; exact gazetteer match.\n"
      "--gazetteer: name<TAB>lat<TAB>lon[<TAB>population].\n"
      "Output:      user<TAB>lat<TAB>lon<TAB>GPS_MEDIAN|SELF_REPORT[<TAB>last_seen]. GPS wins conflicts.");
  labels_cmd->add_option("--gps", gps_path, "GPS observation TSV")->check(CLI::ExistingFile);
  labels_cmd->add_option("--profiles", profiles_path, "Profile TSV")->check(CLI::ExistingFile);
  labels_cmd->add_option("--gazetteer", gazetteer_path, "Gazetteer TSV (required with --profiles)")
      ->check(CLI::ExistingFile);
  labels_cmd->add_option("--last-seen-cutoff", cutoff_text, "Drop self-reports last seen before this ISO-8601 time");
  labels_cmd->add_option("--out", labels_out, "Label TSV to write")->required();
  labels_cmd->add_flag("--strict", labels_strict, "Fail on the first malformed row");
  labels_cmd->callback([&] {
    action = [&] {
      if (gps_path.empty() && profiles_path.empty()) throw UsageError("give at least one of --gps or --profiles");
      if (!profiles_path.empty() && gazetteer_path.empty()) throw UsageError("--profiles requires --gazetteer");
      SelfReportOptions options;
      if (!cutoff_text.empty()) {
        options.last_seen_cutoff = tsv::parse_iso8601(cutoff_text);
        if (!options.last_seen_cutoff) throw UsageError(fmt::format("invalid --last-seen-cutoff '{}'", cutoff_text));
      }
      Manifest m{"labels-build"};
      m.parameters = {{"last_seen_cutoff", cutoff_text.empty() ? json(nullptr)
                                                               : json(tsv::format_iso8601(*options.last_seen_cutoff))},
                      {"strict", labels_strict}};
      m.inputs = {{"gps", gps_path}, {"profiles", profiles_path}, {"gazetteer", gazetteer_path}};

      LabelSet gps_labels, self_labels;
      if (!gps_path.empty()) {
        const auto gps = read_input(gps_path, labels_strict, "GPS", read_gps);
        gps_labels = gps_ground_truth(gps);
      }
      SelfReportStats stats;
      if (!profiles_path.empty()) {
        const auto gazetteer = read_input(gazetteer_path, labels_strict, "gazetteer", read_gazetteer);
        const auto profiles = read_input(profiles_path, labels_strict, "profiles", read_profiles);
        self_labels = self_report_ground_truth(profiles, gazetteer, options, &stats);
      }
      const LabelSet merged = merge_labels(gps_labels, self_labels);
      tsv::write_file_atomic(labels_out, format_labels(merged));
      m.outputs = {labels_out};
      m.write();
      std::cout << fmt::format(
          "gps_labels\t{}\nself_report_labels\t{}\nmerged_labels\t{}\nambiguous_names\t{}\nstale_profiles\t{}\n",
          gps_labels.size(), self_labels.size(), merged.size(), stats.ambiguous, stats.stale);
    };
  });

  // locate
  std::string locate_graph, locate_labels, locate_out, locate_report;
  SolverFlags locate_flags;
  bool locate_strict = false;
  auto* locate_cmd = app.add_subcommand("locate", "Infer locations for unlabeled users.");
  locate_cmd->footer(
      "--graph:  u<TAB>v<TAB>weight.   --labels: user<TAB>lat<TAB>lon<TAB>source[<TAB>last_seen].\n"
      "--out:    user<TAB>lat<TAB>lon<TAB>GROUND_TRUTH|INFERRED<TAB>dispersion_km<TAB>iteration.\n"
      "--report: CSV iteration,located_count,moved_count,objective_km.");
  locate_cmd->add_option("--graph", locate_graph, "Graph TSV")->required()->check(CLI::ExistingFile);
  locate_cmd->add_option("--labels", locate_labels, "Label TSV")->required()->check(CLI::ExistingFile);
  locate_cmd->add_option("--out", locate_out, "Estimate TSV to write")->required();
  locate_cmd->add_option("--report", locate_report, "Per-iteration CSV to write");
  locate_cmd->add_flag("--strict", locate_strict, "Fail on the first malformed row");
  locate_flags.attach(locate_cmd);
  locate_cmd->callback([&] {
    action = [&] {
      const SolverConfig config = locate_flags.config();
      config.validate();
      Manifest m{"locate"};
      m.parameters = SolverFlags::describe(config);
      m.parameters["strict"] = locate_strict;
      m.inputs = {{"graph", locate_graph}, {"labels", locate_labels}};
      const auto graph = read_input(locate_graph, locate_strict, "graph", read_graph);
      const auto labels = read_input(locate_labels, locate_strict, "labels", read_labels);
      const SolveResult result = solve(graph, labels, config);
      tsv::write_file_atomic(locate_out, format_estimates(result.estimates));
      m.outputs = {locate_out};
      if (!locate_report.empty()) {
        tsv::write_file_atomic(locate_report, format_report_csv(result.report));
        m.outputs.push_back(locate_report);
      }
      m.write();
      const auto& last = result.report.iterations.back();
      std::cout << fmt::format("iterations\t{}\nlocated\t{}\nobjective_km\t{}\n", result.report.iterations_run,
                               last.located_count, tsv::format_km(last.objective_km));
    };
  });

  // geotag
  std::string shares_path, locations_path, geotag_out, url_pattern;
  std::size_t geotag_min_users = 3;
  std::optional<double> max_dispersion;
  bool geotag_refine = false, geotag_strict = false;
  auto* geotag_cmd = app.add_subcommand("geotag", "Geotag URLs from the locations of their sharers.");
  geotag_cmd->footer(
      "--shares:    url<TAB>user[<TAB>timestamp].\n"
      "--locations: estimate TSV from `locate` or a label TSV.\n"
      "--out:       url<TAB>status<TAB>lat<TAB>lon<TAB>dispersion_km<TAB>n_users\n"
      "             (lat/lon/dispersion empty for REJECTED_TOO_FEW_USERS).");
  geotag_cmd->add_option("--shares", shares_path, "Share TSV")->required()->check(CLI::ExistingFile);
  geotag_cmd->add_option("--locations", locations_path, "User locations")->required()->check(CLI::ExistingFile);
  geotag_cmd->add_option("--min-users", geotag_min_users, "Minimum distinct located sharers")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  geotag_cmd->add_option("--max-dispersion-km", max_dispersion, "Reject URLs whose sharer dispersion exceeds this");
  geotag_cmd->add_option("--url-pattern", url_pattern, "Keep only URLs matching this regex (search semantics)");
  geotag_cmd->add_flag("--refine", geotag_refine, "Refine medoids with tangent-plane Weiszfeld iterations");
  geotag_cmd->add_flag("--strict", geotag_strict, "Fail on the first malformed row");
  geotag_cmd->callback([&] {
    action = [&] {
      if (max_dispersion && !(*max_dispersion >= 0.0)) throw UsageError("--max-dispersion-km must be non-negative");
      std::optional<std::regex> pattern;
      if (!url_pattern.empty()) pattern = compile_url_pattern(url_pattern);
      Manifest m{"geotag"};
      m.parameters = {{"min_users", geotag_min_users},
                      {"max_dispersion_km", max_dispersion ? json(*max_dispersion) : json(nullptr)},
                      {"url_pattern", url_pattern.empty() ? json(nullptr) : json(url_pattern)},
                      {"refine_median", geotag_refine},
                      {"strict", geotag_strict}};
      m.inputs = {{"shares", shares_path}, {"locations", locations_path}};
      ShareReadStats share_stats;
      auto shares = read_input(shares_path, geotag_strict, "shares",
                               [&](std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* d) {
                                 return read_shares(in, mode, d, &share_stats);
                               });
      if (pattern) shares = filter_by_pattern(shares, *pattern);
      const auto locations = read_input(locations_path, geotag_strict, "locations", read_locations);
      const auto results = geotag_documents(shares, locations, {geotag_min_users, max_dispersion, geotag_refine});
      tsv::write_file_atomic(geotag_out, format_geotag_results(results));
      m.outputs = {geotag_out};
      m.write();
      std::size_t tagged = 0;
      for (const auto& r : results) tagged += r.status == GeotagStatus::kGeotagged;
      std::cout << fmt::format("urls\t{}\ngeotagged\t{}\nunparsable_urls\t{}\n", results.size(), tagged,
                               share_stats.unparsable_urls);
    };
  });
  geotag_cmd->add_option("--out", geotag_out, "Result TSV to write")->required();

  // toponyms
  std::string observations_path, topo_gazetteer, toponyms_out;
  ToponymFilter filter;
  bool topo_strict = false;
  auto* topo_cmd = app.add_subcommand("toponyms", "Build the unambiguous toponym set.");
  topo_cmd->footer(
      "--observations: user<TAB>profile-location-text<TAB>gps_lat<TAB>gps_lon.\n"
      "--gazetteer:    name<TAB>lat<TAB>lon[<TAB>population].\n"
      "--out:          name<TAB>lat<TAB>lon<TAB>n_users<TAB>median_km.");
  topo_cmd->add_option("--observations", observations_path, "Observation TSV")->required()->check(CLI::ExistingFile);
  topo_cmd->add_option("--gazetteer", topo_gazetteer, "Gazetteer TSV")->required()->check(CLI::ExistingFile);
  topo_cmd->add_option("--min-users", filter.min_users, "Minimum distinct users")->capture_default_str();
  topo_cmd->add_option("--max-median-km", filter.max_median_km, "Maximum median GPS discrepancy")
      ->capture_default_str();
  topo_cmd->add_option("--min-chars", filter.min_chars, "Minimum name length in characters")->capture_default_str();
  topo_cmd->add_option("--out", toponyms_out, "Toponym TSV to write")->required();
  topo_cmd->add_flag("--strict", topo_strict, "Fail on the first malformed row");
  topo_cmd->callback([&] {
    action = [&] {
      Manifest m{"toponyms"};
      m.parameters = {{"min_users", filter.min_users},
                      {"max_median_km", filter.max_median_km},
                      {"min_chars", filter.min_chars},
                      {"strict", topo_strict}};
      m.inputs = {{"observations", observations_path}, {"gazetteer", topo_gazetteer}};
      const auto gazetteer = read_input(topo_gazetteer, topo_strict, "gazetteer", read_gazetteer);
      const auto observations = read_input(observations_path, topo_strict, "observations", read_observations);
      const ToponymBuild build = build_unambiguous(observations, gazetteer, filter);
      tsv::write_file_atomic(toponyms_out, format_toponym_set(build));
      m.outputs = {toponyms_out};
      m.write();
      std::cout << fmt::format("candidates\t{}\nretained\t{}\n", build.candidates.size(), build.toponyms.size());
    };
  });

  // toponym-geotag
  std::string texts_path, tg_toponyms, tg_out;
  bool tg_strict = false;
  auto* tg_cmd = app.add_subcommand("toponym-geotag", "Locate texts that mention exactly one unambiguous toponym.");
  tg_cmd->footer(
      "--texts:    id<TAB>text.\n"
      "--toponyms: output of `toponyms`.\n"
      "--out:      id<TAB>lat<TAB>lon (a reference file for `eval records`).");
  tg_cmd->add_option("--texts", texts_path, "Text TSV")->required()->check(CLI::ExistingFile);
  tg_cmd->add_option("--toponyms", tg_toponyms, "Toponym TSV")->required()->check(CLI::ExistingFile);
  tg_cmd->add_option("--out", tg_out, "Reference TSV to write")->required();
  tg_cmd->add_flag("--strict", tg_strict, "Fail on the first malformed row");
  tg_cmd->callback([&] {
    action = [&] {
      Manifest m{"toponym-geotag"};
      m.parameters = {{"strict", tg_strict}};
      m.inputs = {{"texts", texts_path}, {"toponyms", tg_toponyms}};
      const auto toponyms = read_input(tg_toponyms, tg_strict, "toponyms", read_toponym_set);
      std::ifstream in(texts_path, std::ios::binary);
      if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open {}", texts_path));
      tsv::ParseDiagnostics diagnostics;
      tsv::RowReader rows(in, mode_for(tg_strict), &diagnostics);
      std::string out = "# id\tlat\tlon\n";
      std::size_t single = 0, multiple = 0, none = 0;
      while (rows.next()) {
        const auto f = rows.fields();
        if (f.size() != 2 || f[0].empty()) {
          rows.reject("text rows need id, text");
          continue;
        }
        rows.accept();
        const ToponymMatch match = geotag_by_toponym(text::unescape_field(f[1]), toponyms);
        if (match.status == ToponymMatchStatus::kSingle) {
          ++single;
          out += fmt::format("{}\t{}\t{}\n", f[0], tsv::format_degrees(match.location->lat()),
                             tsv::format_degrees(match.location->lon()));
        } else if (match.status == ToponymMatchStatus::kMultiple) {
          ++multiple;
        } else {
          ++none;
        }
      }
      tsv::write_file_atomic(tg_out, out);
      m.outputs = {tg_out};
      m.write();
      std::cout << fmt::format("single\t{}\nmultiple\t{}\nnone\t{}\n", single, multiple, none);
    };
  });

  // links
  std::string links_profiles, links_out;
  std::vector<std::string> link_patterns;
  bool links_strict = false;
  auto* links_cmd = app.add_subcommand("links", "Extract external account links from profile text.");
  links_cmd->footer(
      "--profiles: user<TAB>text[<TAB>last_seen].\n"
      "--out:      user<TAB>account. The first capture group, if any, is the account.");
  links_cmd->add_option("--profiles", links_profiles, "Profile TSV")->required()->check(CLI::ExistingFile);
  links_cmd->add_option("--pattern", link_patterns, "Account regex (repeatable; default: Tumblr blog URLs)");
  links_cmd->add_option("--out", links_out, "Link TSV to write")->required();
  links_cmd->add_flag("--strict", links_strict, "Fail on the first malformed row");
  links_cmd->callback([&] {
    action = [&] {
      if (link_patterns.empty()) link_patterns.emplace_back(kTumblrProfilePattern);
      std::vector<LinkPattern> compiled;
      for (const auto& p : link_patterns) compiled.emplace_back(p);
      Manifest m{"links"};
      m.parameters = {{"patterns", link_patterns}, {"strict", links_strict}};
      m.inputs = {{"profiles", links_profiles}};
      const auto profiles = read_input(links_profiles, links_strict, "profiles", read_profiles);
      const auto links = extract_profile_links(profiles, compiled);
      std::string out = "# user\taccount\n";
      for (const auto& l : links) out += fmt::format("{}\t{}\n", l.user, text::escape_field(l.account));
      tsv::write_file_atomic(links_out, out);
      m.outputs = {links_out};
      m.write();
      std::cout << fmt::format("links\t{}\n", links.size());
    };
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and coverage evaluation; all outputs are CSV.");
  eval_cmd->require_subcommand(1);

  std::string cv_graph, cv_labels, cv_out, cv_records_out;
  SolverFlags cv_flags;
  double holdout = 0.10;
  std::uint64_t seed = 0;
  bool cv_strict = false;
  auto* cv_cmd = eval_cmd->add_subcommand("cv", "Leave-many-out cross-validation of the solver.");
  cv_cmd->footer(
      "--out:         CSV median_km,mean_km,stddev_km,located_fraction,n_holdout,n_located.\n"
      "--records-out: held-out users as id<TAB>pred_lat<TAB>pred_lon<TAB>ref_lat<TAB>ref_lon<TAB>dispersion_km"
      "<TAB>discrepancy_km.");
  cv_cmd->add_option("--graph", cv_graph, "Graph TSV")->required()->check(CLI::ExistingFile);
  cv_cmd->add_option("--labels", cv_labels, "Label TSV")->required()->check(CLI::ExistingFile);
  cv_cmd->add_option("--holdout", holdout, "Fraction of labels to hide")->capture_default_str();
  cv_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  cv_cmd->add_option("--out", cv_out, "Summary CSV to write")->required();
  cv_cmd->add_option("--records-out", cv_records_out, "Per-user discrepancy records to write");
  cv_cmd->add_flag("--strict", cv_strict, "Fail on the first malformed row");
  cv_flags.attach(cv_cmd);
  cv_cmd->callback([&] {
    action = [&] {
      const SolverConfig config = cv_flags.config();
      config.validate();
      Manifest m{"eval cv"};
      m.parameters = SolverFlags::describe(config);
      m.parameters["holdout_fraction"] = holdout;
      m.parameters["strict"] = cv_strict;
      m.seed = seed;
      m.inputs = {{"graph", cv_graph}, {"labels", cv_labels}};
      const auto graph = read_input(cv_graph, cv_strict, "graph", read_graph);
      const auto labels = read_input(cv_labels, cv_strict, "labels", read_labels);
      const auto summary = cross_validate(graph, labels, config, holdout, seed);
      tsv::write_file_atomic(cv_out, format_cv_csv(summary));
      m.outputs = {cv_out};
      if (!cv_records_out.empty()) {
        tsv::write_file_atomic(cv_records_out, format_records(summary.records));
        m.outputs.push_back(cv_records_out);
      }
      m.write();
      std::cout << format_cv_csv(summary);
    };
  });

  std::string records_path, curve_out;
  std::vector<double> grid;
  double grid_lo = 1.0, grid_hi = 20000.0;
  std::size_t grid_count = 50;
  bool curve_strict = false;
  const auto add_curve_options = [&](CLI::App* cmd) {
    cmd->add_option("--records", records_path, "Discrepancy record TSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", curve_out, "CSV to write")->required();
    cmd->add_flag("--strict", curve_strict, "Fail on the first malformed row");
    cmd->footer(
        "--records: id<TAB>pred_lat<TAB>pred_lon<TAB>ref_lat<TAB>ref_lon<TAB>dispersion_km[<TAB>discrepancy_km].");
  };
  const auto add_grid_options = [&](CLI::App* cmd) {
    cmd->add_option("--thresholds", grid, "Explicit km thresholds (overrides the log grid)")->delimiter(',');
    cmd->add_option("--grid-lo-km", grid_lo, "Smallest log-grid threshold")->capture_default_str();
    cmd->add_option("--grid-hi-km", grid_hi, "Largest log-grid threshold")->capture_default_str();
    cmd->add_option("--grid-count", grid_count, "Number of log-grid thresholds")->capture_default_str();
  };
  const auto curve_action = [&](const char* name, auto compute) {
    return [&, name, compute] {
      action = [&, name, compute] {
        Manifest m{std::string("eval ") + name};
        m.inputs = {{"records", records_path}};
        const auto records = read_input(records_path, curve_strict, "records", read_records);
        const auto thresholds = thresholds_from(grid, grid_lo, grid_hi, grid_count);
        m.parameters = {{"thresholds", thresholds}, {"strict", curve_strict}};
        tsv::write_file_atomic(curve_out, compute(records, thresholds));
        m.outputs = {curve_out};
        m.write();
      };
    };
  };

  auto* cdf_cmd = eval_cmd->add_subcommand("cdf", "Empirical CDF of discrepancies: threshold_km,fraction.");
  add_curve_options(cdf_cmd);
  add_grid_options(cdf_cmd);
  cdf_cmd->callback(curve_action("cdf", [](const std::vector<DiscrepancyRecord>& r, const std::vector<double>& t) {
    return format_cdf_csv(discrepancy_cdf(r, t));
  }));

  auto* coverage_cmd = eval_cmd->add_subcommand(
      "coverage", "Coverage vs. dispersion threshold: threshold_km,coverage_fraction,n,median_km,mean_km.");
  add_curve_options(coverage_cmd);
  add_grid_options(coverage_cmd);
  coverage_cmd->callback(
      curve_action("coverage", [](const std::vector<DiscrepancyRecord>& r, const std::vector<double>& t) {
        return format_coverage_csv(coverage_curve(r, t));
      }));

  auto* char_cmd = eval_cmd->add_subcommand(
      "characteristic", "Mean error vs. coverage over every dispersion value: threshold_km,mean_km,coverage_fraction.");
  add_curve_options(char_cmd);
  char_cmd->callback(
      curve_action("characteristic", [](const std::vector<DiscrepancyRecord>& r, const std::vector<double>&) {
        return format_characteristic_csv(error_characteristic(r));
      }));

  std::string join_results, join_reference, join_out;
  bool join_strict = false;
  auto* join_cmd = eval_cmd->add_subcommand("records", "Join geotag results with reference locations.");
  join_cmd->footer(
      "--results:   output of `geotag`.\n"
      "--reference: url<TAB>lat<TAB>lon.\n"
      "--out:       id<TAB>pred_lat<TAB>pred_lon<TAB>ref_lat<TAB>ref_lon<TAB>dispersion_km<TAB>discrepancy_km.");
  join_cmd->add_option("--results", join_results, "Geotag result TSV")->required()->check(CLI::ExistingFile);
  join_cmd->add_option("--reference", join_reference, "Reference TSV")->required()->check(CLI::ExistingFile);
  join_cmd->add_option("--out", join_out, "Record TSV to write")->required();
  join_cmd->add_flag("--strict", join_strict, "Fail on the first malformed row");
  join_cmd->callback([&] {
    action = [&] {
      Manifest m{"eval records"};
      m.parameters = {{"strict", join_strict}};
      m.inputs = {{"results", join_results}, {"reference", join_reference}};
      const auto results = read_input(join_results, join_strict, "results", read_geotag_results);
      const auto reference = read_input(join_reference, join_strict, "reference", read_reference);
      const auto records = join_records(results, reference);
      tsv::write_file_atomic(join_out, format_records(records));
      m.outputs = {join_out};
      m.write();
      std::cout << fmt::format("records\t{}\n", records.size());
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::kInvalidConfig:
      case ErrorCode::kInvalidPattern:
      case ErrorCode::kMalformedRecord:
      case ErrorCode::kInsufficientLabels:
        return kExitUsage;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
