#include "geoprop/toponym_gazetteer.hpp"

#include <algorithm>
#include <istream>
#include <set>

#include <fmt/format.h>

#include "geoprop/error.hpp"
#include "geoprop/robust_stats.hpp"
#include "geoprop/text.hpp"

namespace geoprop {

void Gazetteer::add(GazetteerEntry entry) {
  entry.name = text::match_key(entry.name);
  if (entry.name.empty()) throw Error(ErrorCode::kMalformedRecord, "gazetteer name is empty");
  auto& bucket = by_name_[entry.name];
  bucket.push_back(std::move(entry));
  ++entries_;
}

std::span<const GazetteerEntry> Gazetteer::lookup(std::string_view name) const {
  const auto it = by_name_.find(text::match_key(name));
  if (it == by_name_.end()) return {};
  return it->second;
}

std::optional<GeoPoint> Gazetteer::unique_location(std::string_view name) const {
  const auto entries = lookup(name);
  if (entries.empty()) return std::nullopt;
  for (const auto& e : entries) {
    if (e.location != entries.front().location) return std::nullopt;
  }
  return entries.front().location;
}

std::optional<GeoPoint> Gazetteer::primary_location(std::string_view name) const {
  const auto entries = lookup(name);
  if (entries.empty()) return std::nullopt;
  const auto better = [](const GazetteerEntry& a, const GazetteerEntry& b) {
    const auto pa = a.population.value_or(-1), pb = b.population.value_or(-1);
    if (pa != pb) return pa > pb;
    return a.location < b.location;
  };
  return std::min_element(entries.begin(), entries.end(), better)->location;
}

std::vector<std::string> Gazetteer::names() const {
  std::vector<std::string> out;
  out.reserve(by_name_.size());
  for (const auto& [name, _] : by_name_) out.push_back(name);
  std::sort(out.begin(), out.end());
  return out;
}

Gazetteer read_gazetteer(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics) {
  Gazetteer gazetteer;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if (f.size() != 3 && f.size() != 4) {
      rows.reject("gazetteer rows need name, lat, lon[, population]");
      continue;
    }
    const auto point = tsv::parse_point(f[1], f[2]);
    if (!point) {
      rows.reject("invalid coordinates");
      continue;
    }
    std::optional<std::int64_t> population;
    if (f.size() == 4 && !f[3].empty()) {
      const auto p = tsv::parse_uint(f[3]);
      if (!p) {
        rows.reject("invalid population");
        continue;
      }
      population = static_cast<std::int64_t>(*p);
    }
    const std::string name = text::unescape_field(f[0]);
    if (text::match_key(name).empty()) {
      rows.reject("empty name");
      continue;
    }
    gazetteer.add({name, *point, population});
    rows.accept();
  }
  return gazetteer;
}

std::vector<ToponymObservation> read_observations(std::istream& in, tsv::ParseMode mode,
                                                  tsv::ParseDiagnostics* diagnostics) {
  std::vector<ToponymObservation> out;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if (f.size() != 4 || f[0].empty()) {
      rows.reject("observation rows need user, profile text, lat, lon");
      continue;
    }
    const auto point = tsv::parse_point(f[2], f[3]);
    if (!point) {
      rows.reject("invalid coordinates");
      continue;
    }
    out.push_back({std::string(f[0]), text::unescape_field(f[1]), *point});
    rows.accept();
  }
  return out;
}

void UnambiguousToponymSet::insert(std::string name, const GeoPoint& location) {
  max_name_bytes_ = std::max(max_name_bytes_, name.size());
  entries_.insert_or_assign(std::move(name), location);
}

std::optional<GeoPoint> UnambiguousToponymSet::find(std::string_view name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

ToponymBuild build_unambiguous(std::span<const ToponymObservation> observations, const Gazetteer& gazetteer,
                               const ToponymFilter& filter) {
  struct Accumulator {
    GeoPoint location;
    std::set<std::string> users;
    std::vector<double> discrepancies_km;
  };
  std::map<std::string, Accumulator> by_name;
  for (const auto& obs : observations) {
    std::string key = text::match_key(obs.profile_text);
    if (key.empty()) continue;
    const auto location = gazetteer.primary_location(key);
    if (!location) continue;
    auto [it, inserted] = by_name.try_emplace(std::move(key));
    if (inserted) it->second.location = *location;
    it->second.users.insert(obs.user);
    it->second.discrepancies_km.push_back(vincenty_km(obs.gps, *location));
  }

  ToponymBuild build;
  build.candidates.reserve(by_name.size());
  for (auto& [name, acc] : by_name) {
    ToponymStats stats;
    stats.name = name;
    stats.gazetteer_location = acc.location;
    stats.n_users = acc.users.size();
    stats.median_gps_discrepancy_km = lower_median(acc.discrepancies_km);
    stats.retained = stats.n_users >= filter.min_users &&
                     stats.median_gps_discrepancy_km <= filter.max_median_km &&
                     text::scalar_count(name) >= filter.min_chars;
    if (stats.retained) build.toponyms.insert(name, acc.location);
    build.candidates.push_back(std::move(stats));
  }
  return build;
}

namespace {

bool is_word_byte(unsigned char c) {
  return c >= 0x80 || c == '_' || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool boundary_at(std::string_view text, std::size_t pos) {
  if (pos == 0 || pos == text.size()) return true;
  return is_word_byte(static_cast<unsigned char>(text[pos - 1])) != is_word_byte(static_cast<unsigned char>(text[pos]));
}

struct Span {
  std::size_t begin;
  std::size_t end;
  std::string_view name;
};

}  // namespace

ToponymMatch geotag_by_toponym(std::string_view text, const UnambiguousToponymSet& toponyms) {
  std::vector<Span> spans;
  const std::size_t max_len = toponyms.max_name_bytes();
  for (std::size_t begin = 0; begin < text.size(); ++begin) {
    if (!boundary_at(text, begin)) continue;
    const std::size_t longest = std::min(max_len, text.size() - begin);
    for (std::size_t len = 1; len <= longest; ++len) {
      if (!boundary_at(text, begin + len)) continue;
      const auto candidate = text.substr(begin, len);
      const auto it = toponyms.entries().find(candidate);
      if (it != toponyms.entries().end()) spans.push_back({begin, begin + len, it->first});
    }
  }

  std::set<std::string_view> names;
  for (const auto& s : spans) {
    const bool inside_longer = std::any_of(spans.begin(), spans.end(), [&](const Span& o) {
      return o.begin <= s.begin && s.end <= o.end && (o.end - o.begin) > (s.end - s.begin);
    });
    if (!inside_longer) names.insert(s.name);
  }

  ToponymMatch match;
  for (const auto n : names) match.names.emplace_back(n);
  if (names.empty()) {
    match.status = ToponymMatchStatus::kNone;
  } else if (names.size() == 1) {
    match.status = ToponymMatchStatus::kSingle;
    match.location = toponyms.find(*names.begin());
  } else {
    match.status = ToponymMatchStatus::kMultiple;
  }
  return match;
}

std::string format_toponym_set(const ToponymBuild& build) {
  std::string out = "# name\tlat\tlon\tn_users\tmedian_km\n";
  for (const auto& c : build.candidates) {
    if (!c.retained) continue;
    out += fmt::format("{}\t{}\t{}\t{}\t{}\n", text::escape_field(c.name), tsv::format_degrees(c.gazetteer_location.lat()),
                       tsv::format_degrees(c.gazetteer_location.lon()), c.n_users,
                       tsv::format_km(c.median_gps_discrepancy_km));
  }
  return out;
}

UnambiguousToponymSet read_toponym_set(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics) {
  UnambiguousToponymSet set;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if (f.size() < 3) {
      rows.reject("toponym rows need name, lat, lon");
      continue;
    }
    const auto point = tsv::parse_point(f[1], f[2]);
    if (!point || f[0].empty()) {
      rows.reject("invalid toponym row");
      continue;
    }
    set.insert(text::match_key(text::unescape_field(f[0])), *point);
    rows.accept();
  }
  return set;
}

}  // namespace geoprop
