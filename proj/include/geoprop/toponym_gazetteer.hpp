#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geoprop/geodesy.hpp"
#include "geoprop/tsv.hpp"

namespace geoprop {

struct GazetteerEntry {
  std::string name;
  GeoPoint location;
  std::optional<std::int64_t> population;
};

/// Place names to coordinates. Names are stored under their match key
/// (ASCII-trimmed, NFC), and one name may carry several entries.
class Gazetteer {
 public:
  void add(GazetteerEntry entry);

  /// All entries whose key equals match_key(name); empty when unknown.
  std::span<const GazetteerEntry> lookup(std::string_view name) const;

  /// The location for a name when every entry for it agrees.
  std::optional<GeoPoint> unique_location(std::string_view name) const;

  /// Most populous entry; ties and missing populations go to the smallest
  /// coordinate.
  std::optional<GeoPoint> primary_location(std::string_view name) const;

  std::size_t entry_count() const noexcept { return entries_; }
  std::size_t name_count() const noexcept { return by_name_.size(); }
  std::vector<std::string> names() const;

 private:
  std::unordered_map<std::string, std::vector<GazetteerEntry>> by_name_;
  std::size_t entries_ = 0;
};

/// Gazetteer TSV: name<TAB>lat<TAB>lon[<TAB>population].
Gazetteer read_gazetteer(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics = nullptr);

/// One GPS-tagged post whose author lists `profile_text` as their location.
struct ToponymObservation {
  std::string user;
  std::string profile_text;
  GeoPoint gps;
};

/// Observation TSV: user<TAB>profile-text<TAB>lat<TAB>lon.
std::vector<ToponymObservation> read_observations(std::istream& in, tsv::ParseMode mode,
                                                  tsv::ParseDiagnostics* diagnostics = nullptr);

struct ToponymFilter {
  std::size_t min_users = 5;
  double max_median_km = 50.0;
  std::size_t min_chars = 5;
};

struct ToponymStats {
  std::string name;
  GeoPoint gazetteer_location;
  std::size_t n_users = 0;
  double median_gps_discrepancy_km = 0.0;
  bool retained = false;
};

class UnambiguousToponymSet {
 public:
  void insert(std::string name, const GeoPoint& location);
  std::optional<GeoPoint> find(std::string_view name) const;

  const std::map<std::string, GeoPoint, std::less<>>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t max_name_bytes() const noexcept { return max_name_bytes_; }

 private:
  std::map<std::string, GeoPoint, std::less<>> entries_;
  std::size_t max_name_bytes_ = 0;
};

struct ToponymBuild {
  UnambiguousToponymSet toponyms;
  std::vector<ToponymStats> candidates;  // every matched name, sorted by name
};

/// Keeps a gazetteer name when it is matched by at least min_users distinct
/// users, the median distance from their GPS points to the gazetteer
/// location is at most max_median_km, and the name has at least min_chars
/// Unicode scalars.
ToponymBuild build_unambiguous(std::span<const ToponymObservation> observations, const Gazetteer& gazetteer,
                               const ToponymFilter& filter = {});

enum class ToponymMatchStatus { kNone, kSingle, kMultiple };

struct ToponymMatch {
  ToponymMatchStatus status = ToponymMatchStatus::kNone;
  std::optional<GeoPoint> location;
  std::vector<std::string> names;  // distinct matched names, sorted
};

/// Case-sensitive search for toponyms bounded by non-word characters. A
/// match lying entirely inside a longer match is not counted. Text naming
/// more than one distinct toponym gets no location.
ToponymMatch geotag_by_toponym(std::string_view text, const UnambiguousToponymSet& toponyms);

/// name<TAB>lat<TAB>lon<TAB>n_users<TAB>median_km for every retained name.
std::string format_toponym_set(const ToponymBuild& build);

/// Reads the toponym-set TSV back (statistics columns are ignored).
UnambiguousToponymSet read_toponym_set(std::istream& in, tsv::ParseMode mode,
                                       tsv::ParseDiagnostics* diagnostics = nullptr);

}  // namespace geoprop
