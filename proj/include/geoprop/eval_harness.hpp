#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoprop/doc_geotag.hpp"
#include "geoprop/geodesy.hpp"
#include "geoprop/propagation.hpp"
#include "geoprop/social_graph.hpp"

namespace geoprop {

struct DiscrepancyRecord {
  std::string id;
  GeoPoint predicted;
  GeoPoint reference;
  double discrepancy_km = 0.0;
  double dispersion_km = 0.0;
};

/// Fills discrepancy_km from the geodesic distance between the two points.
DiscrepancyRecord make_record(std::string id, const GeoPoint& predicted, const GeoPoint& reference,
                              double dispersion_km);

struct ErrorSummary {
  std::size_t n = 0;
  double median_km = 0.0;  // lower-middle for even n
  double mean_km = 0.0;
  double stddev_km = 0.0;  // population
};

/// Throws Error(kEmptyInput) for an empty sample.
ErrorSummary summarize_errors(std::span<const double> km);

struct CrossValidationSummary {
  std::size_t n_holdout = 0;
  std::size_t n_located = 0;
  double located_fraction = 0.0;
  std::optional<ErrorSummary> errors;  // unset when no held-out user was located
  std::vector<DiscrepancyRecord> records;
};

/// Hides round(holdout_fraction * |L|) labels chosen uniformly without
/// replacement (seeded) from the labeled users that are graph vertices,
/// solves, and measures the error on held-out users that got an estimate.
CrossValidationSummary cross_validate(const SocialGraph& graph, const LabelSet& labels, const SolverConfig& config,
                                      double holdout_fraction, std::uint64_t seed);

struct CdfPoint {
  double threshold_km = 0.0;
  double fraction = 0.0;
};

std::vector<CdfPoint> discrepancy_cdf(std::span<const DiscrepancyRecord> records, std::span<const double> grid);

struct CurvePoint {
  double threshold_km = 0.0;
  double coverage_fraction = 0.0;
  std::optional<double> median_km;
  std::optional<double> mean_km;
  std::size_t n = 0;
};

/// For each threshold, the records with dispersion <= threshold and their
/// discrepancy statistics.
std::vector<CurvePoint> coverage_curve(std::span<const DiscrepancyRecord> records, std::span<const double> thresholds);

struct CharacteristicPoint {
  double threshold_km = 0.0;
  double mean_km = 0.0;
  double coverage_fraction = 0.0;
};

/// Mean error against coverage as the dispersion threshold sweeps every
/// distinct dispersion value in ascending order.
std::vector<CharacteristicPoint> error_characteristic(std::span<const DiscrepancyRecord> records);

/// Log-spaced thresholds, `count` of them, both ends included.
std::vector<double> log_grid(double lo_km = 1.0, double hi_km = 20000.0, std::size_t count = 50);

/// Records for every result that carries a location and whose URL has a
/// reference location.
std::vector<DiscrepancyRecord> join_records(std::span<const GeotagResult> results, const EstimateMap& reference);

/// id<TAB>pred_lat<TAB>pred_lon<TAB>ref_lat<TAB>ref_lon<TAB>dispersion_km[<TAB>discrepancy_km]
/// The discrepancy column is written for convenience and recomputed on read.
std::string format_records(std::span<const DiscrepancyRecord> records);
std::vector<DiscrepancyRecord> read_records(std::istream& in, tsv::ParseMode mode,
                                            tsv::ParseDiagnostics* diagnostics = nullptr);

/// Reference TSV: id<TAB>lat<TAB>lon.
EstimateMap read_reference(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics = nullptr);

std::string format_cv_csv(const CrossValidationSummary& s);
std::string format_cdf_csv(std::span<const CdfPoint> points);
std::string format_coverage_csv(std::span<const CurvePoint> points);
std::string format_characteristic_csv(std::span<const CharacteristicPoint> points);

}  // namespace geoprop
