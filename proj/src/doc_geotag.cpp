#include "geoprop/doc_geotag.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "geoprop/error.hpp"
#include "geoprop/robust_stats.hpp"
#include "geoprop/text.hpp"

namespace geoprop {

namespace {

char lower_ascii(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lowered(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower_ascii);
  return out;
}

bool is_scheme_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '+' || c == '-' ||
         c == '.';
}

}  // namespace

const char* to_string(GeotagStatus s) {
  switch (s) {
    case GeotagStatus::kGeotagged: return "GEOTAGGED";
    case GeotagStatus::kRejectedTooFewUsers: return "REJECTED_TOO_FEW_USERS";
    case GeotagStatus::kRejectedDispersion: return "REJECTED_DISPERSION";
  }
  return "UNKNOWN";
}

std::optional<std::string> canonicalize_url(std::string_view raw) {
  const std::string_view url = text::trim_ascii(raw);
  for (unsigned char c : url) {
    if (c <= 0x20 || c == 0x7f) return std::nullopt;
  }
  const auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  const std::string_view scheme = url.substr(0, sep);
  const bool alpha_start = (scheme[0] >= 'a' && scheme[0] <= 'z') || (scheme[0] >= 'A' && scheme[0] <= 'Z');
  if (!alpha_start || !std::all_of(scheme.begin(), scheme.end(), is_scheme_char)) return std::nullopt;

  std::string_view rest = url.substr(sep + 3);
  if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
  const auto authority_end = rest.find_first_of("/?");
  const std::string_view authority = rest.substr(0, authority_end);
  if (authority.empty()) return std::nullopt;
  std::string_view tail = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

  std::string host;
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    if (at + 1 == authority.size()) return std::nullopt;
    host = std::string(authority.substr(0, at + 1)) + lowered(authority.substr(at + 1));
  } else {
    host = lowered(authority);
  }

  const auto query_start = tail.find('?');
  std::string_view path = tail.substr(0, query_start);
  const std::string_view query = query_start == std::string_view::npos ? std::string_view{} : tail.substr(query_start);
  if (path == "/") path = {};

  std::string out = lowered(scheme);
  out += "://";
  out += host;
  out += path;
  out += query;
  return out;
}

std::vector<ShareEvent> read_shares(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics,
                                    ShareReadStats* stats) {
  std::vector<ShareEvent> out;
  ShareReadStats local;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if ((f.size() != 2 && f.size() != 3) || f[1].empty()) {
      rows.reject("share rows need url, user[, timestamp]");
      continue;
    }
    auto url = canonicalize_url(f[0]);
    if (!url) {
      ++local.unparsable_urls;
      continue;
    }
    ShareEvent e{std::move(*url), std::string(f[1]), std::nullopt};
    if (f.size() == 3 && !f[2].empty()) e.timestamp = std::string(f[2]);
    out.push_back(std::move(e));
    rows.accept();
  }
  if (stats) *stats = local;
  return out;
}

std::regex compile_url_pattern(std::string_view pattern) {
  try {
    return std::regex(std::string(pattern), std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::kInvalidPattern, fmt::format("invalid URL pattern '{}': {}", pattern, e.what()));
  }
}

std::vector<ShareEvent> filter_by_pattern(std::span<const ShareEvent> shares, const std::regex& pattern) {
  std::vector<ShareEvent> out;
  for (const auto& s : shares) {
    if (std::regex_search(s.url, pattern)) out.push_back(s);
  }
  return out;
}

std::vector<GeotagResult> geotag_documents(std::span<const ShareEvent> shares, const EstimateMap& locations,
                                           const GeotagPolicy& policy) {
  std::map<std::string_view, std::set<std::string_view>> sharers;
  for (const auto& s : shares) sharers[s.url].insert(s.user);

  std::vector<GeotagResult> out;
  out.reserve(sharers.size());
  for (const auto& [url, users] : sharers) {
    WeightedPointSet located;
    for (const auto user : users) {
      const auto it = locations.find(user);
      if (it != locations.end()) located.add(it->second.location);
    }
    GeotagResult r;
    r.url = std::string(url);
    r.distinct_located_users = located.size();
    if (located.size() < std::max<std::size_t>(policy.min_users, 1)) {
      r.status = GeotagStatus::kRejectedTooFewUsers;
    } else {
      const RobustSummary summary = summarize(located, policy.refine_median);
      r.location = summary.center;
      r.dispersion_km = summary.dispersion_km;
      const bool too_dispersed = policy.max_dispersion_km && summary.dispersion_km > *policy.max_dispersion_km;
      r.status = too_dispersed ? GeotagStatus::kRejectedDispersion : GeotagStatus::kGeotagged;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_geotag_results(std::span<const GeotagResult> results) {
  std::string out = "# url\tstatus\tlat\tlon\tdispersion_km\tn_users\n";
  for (const auto& r : results) {
    if (r.location && r.dispersion_km) {
      out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", r.url, to_string(r.status), tsv::format_degrees(r.location->lat()),
                         tsv::format_degrees(r.location->lon()), tsv::format_km(*r.dispersion_km),
                         r.distinct_located_users);
    } else {
      out += fmt::format("{}\t{}\t\t\t\t{}\n", r.url, to_string(r.status), r.distinct_located_users);
    }
  }
  return out;
}

std::vector<GeotagResult> read_geotag_results(std::istream& in, tsv::ParseMode mode,
                                              tsv::ParseDiagnostics* diagnostics) {
  std::vector<GeotagResult> out;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if (f.size() != 6 || f[0].empty()) {
      rows.reject("result rows need url, status, lat, lon, dispersion_km, n_users");
      continue;
    }
    GeotagResult r;
    r.url = std::string(f[0]);
    if (f[1] == "GEOTAGGED") {
      r.status = GeotagStatus::kGeotagged;
    } else if (f[1] == "REJECTED_TOO_FEW_USERS") {
      r.status = GeotagStatus::kRejectedTooFewUsers;
    } else if (f[1] == "REJECTED_DISPERSION") {
      r.status = GeotagStatus::kRejectedDispersion;
    } else {
      rows.reject(fmt::format("unknown status '{}'", f[1]));
      continue;
    }
    const auto n = tsv::parse_uint(f[5]);
    if (!n) {
      rows.reject("invalid n_users");
      continue;
    }
    r.distinct_located_users = *n;
    if (!f[2].empty() || !f[3].empty() || !f[4].empty()) {
      const auto point = tsv::parse_point(f[2], f[3]);
      const auto dispersion = tsv::parse_double(f[4]);
      if (!point || !dispersion) {
        rows.reject("invalid location or dispersion");
        continue;
      }
      r.location = *point;
      r.dispersion_km = *dispersion;
    }
    out.push_back(std::move(r));
    rows.accept();
  }
  return out;
}

}  // namespace geoprop
