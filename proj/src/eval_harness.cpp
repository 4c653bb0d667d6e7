#include "geoprop/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <random>

#include <fmt/format.h>

#include "geoprop/error.hpp"
#include "geoprop/robust_stats.hpp"

namespace geoprop {

namespace {

void require_records(std::span<const DiscrepancyRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "no discrepancy records");
}

std::string opt_km(const std::optional<double>& v) { return v ? tsv::format_km(*v) : std::string(); }

std::string fraction(double f) { return fmt::format("{:.6f}", f); }

}  // namespace

DiscrepancyRecord make_record(std::string id, const GeoPoint& predicted, const GeoPoint& reference,
                              double dispersion_km) {
  return {std::move(id), predicted, reference, vincenty_distance(predicted, reference) / 1000.0, dispersion_km};
}

ErrorSummary summarize_errors(std::span<const double> km) {
  if (km.empty()) throw Error(ErrorCode::kEmptyInput, "no errors to summarize");
  ErrorSummary s;
  s.n = km.size();
  double sum = 0.0;
  for (double v : km) sum += v;
  s.mean_km = sum / static_cast<double>(km.size());
  double sq = 0.0;
  for (double v : km) sq += (v - s.mean_km) * (v - s.mean_km);
  s.stddev_km = std::sqrt(sq / static_cast<double>(km.size()));
  std::vector<double> copy(km.begin(), km.end());
  s.median_km = lower_median(copy);
  return s;
}

CrossValidationSummary cross_validate(const SocialGraph& graph, const LabelSet& labels, const SolverConfig& config,
                                      double holdout_fraction, std::uint64_t seed) {
  if (!(holdout_fraction >= 0.0 && holdout_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "holdout_fraction must lie in [0, 1]");
  }
  std::vector<UserId> candidates;
  for (const auto& [user, _] : labels) {
    if (graph.find(user)) candidates.push_back(user);
  }
  const auto holdout_count =
      static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(candidates.size())));
  if (holdout_count == 0) {
    throw Error(ErrorCode::kInsufficientLabels,
                fmt::format("holdout of {} over {} labeled graph users is empty", holdout_fraction, candidates.size()));
  }

  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(holdout_count);
  std::sort(candidates.begin(), candidates.end());

  LabelSet training = labels;
  for (const auto& user : candidates) training.erase(user);
  const SolveResult solved = solve(graph, training, config);

  CrossValidationSummary summary;
  summary.n_holdout = holdout_count;
  std::vector<double> errors;
  for (const auto& user : candidates) {
    const auto it = solved.estimates.find(user);
    if (it == solved.estimates.end()) continue;
    summary.records.push_back(
        make_record(user, it->second.location, labels.at(user).location, it->second.neighbor_dispersion_km));
    errors.push_back(summary.records.back().discrepancy_km);
  }
  summary.n_located = errors.size();
  summary.located_fraction = static_cast<double>(summary.n_located) / static_cast<double>(holdout_count);
  if (!errors.empty()) summary.errors = summarize_errors(errors);
  return summary;
}

std::vector<CdfPoint> discrepancy_cdf(std::span<const DiscrepancyRecord> records, std::span<const double> grid) {
  require_records(records);
  std::vector<double> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(r.discrepancy_km);
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  out.reserve(grid.size());
  for (double t : grid) {
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    out.push_back({t, static_cast<double>(count) / static_cast<double>(sorted.size())});
  }
  return out;
}

std::vector<CurvePoint> coverage_curve(std::span<const DiscrepancyRecord> records, std::span<const double> thresholds) {
  require_records(records);
  std::vector<CurvePoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    std::vector<double> kept;
    for (const auto& r : records) {
      if (r.dispersion_km <= t) kept.push_back(r.discrepancy_km);
    }
    CurvePoint p;
    p.threshold_km = t;
    p.n = kept.size();
    p.coverage_fraction = static_cast<double>(kept.size()) / static_cast<double>(records.size());
    if (!kept.empty()) {
      const ErrorSummary s = summarize_errors(kept);
      p.median_km = s.median_km;
      p.mean_km = s.mean_km;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<CharacteristicPoint> error_characteristic(std::span<const DiscrepancyRecord> records) {
  require_records(records);
  std::vector<std::pair<double, double>> by_dispersion;  // (dispersion, discrepancy)
  by_dispersion.reserve(records.size());
  for (const auto& r : records) by_dispersion.emplace_back(r.dispersion_km, r.discrepancy_km);
  std::sort(by_dispersion.begin(), by_dispersion.end());

  std::vector<CharacteristicPoint> out;
  double sum = 0.0;
  for (std::size_t i = 0; i < by_dispersion.size(); ++i) {
    sum += by_dispersion[i].second;
    const bool last_of_value = i + 1 == by_dispersion.size() || by_dispersion[i + 1].first != by_dispersion[i].first;
    if (!last_of_value) continue;
    const double kept = static_cast<double>(i + 1);
    out.push_back({by_dispersion[i].first, sum / kept, kept / static_cast<double>(by_dispersion.size())});
  }
  return out;
}

std::vector<double> log_grid(double lo_km, double hi_km, std::size_t count) {
  if (!(lo_km > 0.0) || !(hi_km >= lo_km) || count == 0) {
    throw Error(ErrorCode::kInvalidConfig, "log grid needs 0 < lo <= hi and count >= 1");
  }
  if (count == 1) return {lo_km};
  std::vector<double> grid(count);
  const double step = (std::log(hi_km) - std::log(lo_km)) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = std::exp(std::log(lo_km) + step * static_cast<double>(i));
  grid.front() = lo_km;
  grid.back() = hi_km;
  return grid;
}

std::vector<DiscrepancyRecord> join_records(std::span<const GeotagResult> results, const EstimateMap& reference) {
  std::vector<DiscrepancyRecord> out;
  for (const auto& r : results) {
    if (!r.location || !r.dispersion_km) continue;
    const auto it = reference.find(r.url);
    if (it == reference.end()) continue;
    out.push_back(make_record(r.url, *r.location, it->second.location, *r.dispersion_km));
  }
  return out;
}

std::string format_records(std::span<const DiscrepancyRecord> records) {
  std::string out = "# id\tpred_lat\tpred_lon\tref_lat\tref_lon\tdispersion_km\tdiscrepancy_km\n";
  for (const auto& r : records) {
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", r.id, tsv::format_degrees(r.predicted.lat()),
                       tsv::format_degrees(r.predicted.lon()), tsv::format_degrees(r.reference.lat()),
                       tsv::format_degrees(r.reference.lon()), tsv::format_km(r.dispersion_km),
                       tsv::format_km(r.discrepancy_km));
  }
  return out;
}

std::vector<DiscrepancyRecord> read_records(std::istream& in, tsv::ParseMode mode,
                                            tsv::ParseDiagnostics* diagnostics) {
  std::vector<DiscrepancyRecord> out;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if ((f.size() != 6 && f.size() != 7) || f[0].empty()) {
      rows.reject("record rows need id, pred_lat, pred_lon, ref_lat, ref_lon, dispersion_km");
      continue;
    }
    const auto predicted = tsv::parse_point(f[1], f[2]);
    const auto reference = tsv::parse_point(f[3], f[4]);
    const auto dispersion = tsv::parse_double(f[5]);
    if (!predicted || !reference || !dispersion || *dispersion < 0.0) {
      rows.reject("invalid record values");
      continue;
    }
    out.push_back(make_record(std::string(f[0]), *predicted, *reference, *dispersion));
    rows.accept();
  }
  return out;
}

EstimateMap read_reference(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics) {
  EstimateMap out;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if (f.size() != 3 || f[0].empty()) {
      rows.reject("reference rows need id, lat, lon");
      continue;
    }
    const auto point = tsv::parse_point(f[1], f[2]);
    if (!point) {
      rows.reject("invalid coordinates");
      continue;
    }
    std::string id(f[0]);
    if (f[0].find("://") != std::string_view::npos) {
      if (auto canonical = canonicalize_url(f[0])) id = std::move(*canonical);
    }
    if (out.contains(id)) {
      rows.reject(fmt::format("second reference for {}", id));
      continue;
    }
    out.emplace(id, LocationEstimate{id, *point, Provenance::kGroundTruth, 0.0, 0});
    rows.accept();
  }
  return out;
}

std::string format_cv_csv(const CrossValidationSummary& s) {
  std::string out = "median_km,mean_km,stddev_km,located_fraction,n_holdout,n_located\n";
  if (s.errors) {
    out += fmt::format("{},{},{},", tsv::format_km(s.errors->median_km), tsv::format_km(s.errors->mean_km),
                       tsv::format_km(s.errors->stddev_km));
  } else {
    out += ",,,";
  }
  out += fmt::format("{},{},{}\n", fraction(s.located_fraction), s.n_holdout, s.n_located);
  return out;
}

std::string format_cdf_csv(std::span<const CdfPoint> points) {
  std::string out = "threshold_km,fraction\n";
  for (const auto& p : points) out += fmt::format("{},{}\n", p.threshold_km, fraction(p.fraction));
  return out;
}

std::string format_coverage_csv(std::span<const CurvePoint> points) {
  std::string out = "threshold_km,coverage_fraction,n,median_km,mean_km\n";
  for (const auto& p : points) {
    out += fmt::format("{},{},{},{},{}\n", p.threshold_km, fraction(p.coverage_fraction), p.n, opt_km(p.median_km),
                       opt_km(p.mean_km));
  }
  return out;
}

std::string format_characteristic_csv(std::span<const CharacteristicPoint> points) {
  std::string out = "threshold_km,mean_km,coverage_fraction\n";
  for (const auto& p : points) {
    out += fmt::format("{},{},{}\n", tsv::format_km(p.threshold_km), tsv::format_km(p.mean_km),
                       fraction(p.coverage_fraction));
  }
  return out;
}

}  // namespace geoprop
