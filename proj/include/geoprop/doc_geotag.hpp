#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoprop/geodesy.hpp"
#include "geoprop/propagation.hpp"
#include "geoprop/social_graph.hpp"

namespace geoprop {

struct ShareEvent {
  std::string url;
  UserId user;
  std::optional<std::string> timestamp;  // informational only
};

enum class GeotagStatus { kGeotagged, kRejectedTooFewUsers, kRejectedDispersion };

const char* to_string(GeotagStatus s);

struct GeotagResult {
  std::string url;
  GeotagStatus status = GeotagStatus::kRejectedTooFewUsers;
  std::optional<GeoPoint> location;      // unset for too-few-users
  std::optional<double> dispersion_km;   // unset for too-few-users
  std::size_t distinct_located_users = 0;
};

struct GeotagPolicy {
  std::size_t min_users = 3;
  std::optional<double> max_dispersion_km;
  bool refine_median = false;
};

/// Lowercases scheme and host, drops the fragment, and drops a lone "/"
/// path; the query string is kept verbatim. Returns nullopt when there is
/// no "scheme://host" prefix or the string contains whitespace or control
/// characters.
std::optional<std::string> canonicalize_url(std::string_view raw);

struct ShareReadStats {
  std::size_t unparsable_urls = 0;
};

/// Share TSV: url<TAB>user[<TAB>timestamp]. URLs are canonicalized on read;
/// events whose URL cannot be parsed are skipped and counted.
std::vector<ShareEvent> read_shares(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics = nullptr,
                                    ShareReadStats* stats = nullptr);

/// Compiles a URL filter; throws Error(kInvalidPattern).
std::regex compile_url_pattern(std::string_view pattern);

/// Events whose canonical URL contains a match for the pattern.
std::vector<ShareEvent> filter_by_pattern(std::span<const ShareEvent> shares, const std::regex& pattern);

/// One result per distinct canonical URL, sorted by URL. Each distinct
/// located sharer contributes one point; unlocated sharers are ignored.
std::vector<GeotagResult> geotag_documents(std::span<const ShareEvent> shares, const EstimateMap& locations,
                                           const GeotagPolicy& policy = {});

/// url<TAB>status<TAB>lat<TAB>lon<TAB>dispersion_km<TAB>n_users
std::string format_geotag_results(std::span<const GeotagResult> results);
std::vector<GeotagResult> read_geotag_results(std::istream& in, tsv::ParseMode mode,
                                              tsv::ParseDiagnostics* diagnostics = nullptr);

}  // namespace geoprop
