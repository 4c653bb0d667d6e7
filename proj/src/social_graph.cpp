#include "geoprop/social_graph.hpp"

#include <algorithm>
#include <istream>
#include <set>

#include <fmt/format.h>

#include "geoprop/error.hpp"
#include "geoprop/robust_stats.hpp"
#include "geoprop/text.hpp"

namespace geoprop {

SocialGraph SocialGraph::from_edges(std::span<const std::tuple<UserId, UserId, std::uint64_t>> edges) {
  SocialGraph g;
  for (const auto& [a, b, w] : edges) {
    if (a == b) throw Error(ErrorCode::kMalformedRecord, fmt::format("self-loop on {}", a));
    if (w == 0) throw Error(ErrorCode::kMalformedRecord, fmt::format("zero weight on {} - {}", a, b));
    g.users_.push_back(a);
    g.users_.push_back(b);
  }
  std::sort(g.users_.begin(), g.users_.end());
  g.users_.erase(std::unique(g.users_.begin(), g.users_.end()), g.users_.end());
  g.index_.reserve(g.users_.size());
  for (std::size_t i = 0; i < g.users_.size(); ++i) g.index_.emplace(g.users_[i], static_cast<VertexIndex>(i));

  g.edges_.reserve(edges.size());
  for (const auto& [a, b, w] : edges) {
    VertexIndex u = g.index_.at(a), v = g.index_.at(b);
    if (u > v) std::swap(u, v);
    g.edges_.push_back({u, v, w});
  }
  std::sort(g.edges_.begin(), g.edges_.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.u, x.v) < std::tie(y.u, y.v); });
  for (std::size_t i = 1; i < g.edges_.size(); ++i) {
    if (g.edges_[i].u == g.edges_[i - 1].u && g.edges_[i].v == g.edges_[i - 1].v) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("duplicate edge {} - {}", g.users_[g.edges_[i].u],
                                                           g.users_[g.edges_[i].v]));
    }
  }

  std::vector<std::size_t> degree(g.users_.size(), 0);
  for (const auto& e : g.edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  g.offsets_.assign(g.users_.size() + 1, 0);
  for (std::size_t i = 0; i < degree.size(); ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
  g.adjacency_.resize(g.offsets_.back());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& e : g.edges_) {
    g.adjacency_[cursor[e.u]++] = {e.v, e.weight};
    g.adjacency_[cursor[e.v]++] = {e.u, e.weight};
  }
  for (std::size_t i = 0; i < g.users_.size(); ++i) {
    std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
              g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]),
              [](const Neighbor& x, const Neighbor& y) { return x.vertex < y.vertex; });
  }
  return g;
}

std::optional<VertexIndex> SocialGraph::find(std::string_view user) const {
  const auto it = index_.find(std::string(user));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const Neighbor> SocialGraph::neighbors(VertexIndex v) const {
  return std::span<const Neighbor>(adjacency_).subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
}

SocialGraph build_graph(std::span<const MentionRecord> records) {
  std::unordered_map<std::string_view, std::uint32_t> ids;
  std::vector<std::string_view> names;
  const auto intern = [&](std::string_view s) {
    const auto [it, inserted] = ids.try_emplace(s, static_cast<std::uint32_t>(names.size()));
    if (inserted) names.push_back(s);
    return it->second;
  };
  std::unordered_map<std::uint64_t, std::uint64_t> directed;
  for (const auto& r : records) {
    if (r.src == r.dst || r.count == 0) continue;
    const std::uint64_t key = (std::uint64_t{intern(r.src)} << 32) | intern(r.dst);
    directed[key] += r.count;
  }

  std::vector<std::tuple<UserId, UserId, std::uint64_t>> edges;
  for (const auto& [key, forward] : directed) {
    const auto a = static_cast<std::uint32_t>(key >> 32);
    const auto b = static_cast<std::uint32_t>(key & 0xffffffffu);
    if (a > b) continue;  // each pair is handled from its smaller intern id
    const auto back = directed.find((std::uint64_t{b} << 32) | a);
    if (back == directed.end()) continue;
    edges.emplace_back(std::string(names[a]), std::string(names[b]), std::min(forward, back->second));
  }
  return SocialGraph::from_edges(edges);
}

std::vector<MentionRecord> read_mentions(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics) {
  std::vector<MentionRecord> out;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if (f.size() != 3) {
      rows.reject(fmt::format("expected 3 fields, found {}", f.size()));
      continue;
    }
    if (f[0].empty() || f[1].empty()) {
      rows.reject("empty user id");
      continue;
    }
    const auto count = tsv::parse_uint(f[2]);
    if (!count || *count == 0) {
      rows.reject(fmt::format("count must be a positive integer, got '{}'", f[2]));
      continue;
    }
    rows.accept();
    if (f[0] == f[1]) continue;
    out.push_back({std::string(f[0]), std::string(f[1]), *count});
  }
  return out;
}

std::string format_graph(const SocialGraph& graph) {
  std::string out = "# u\tv\tweight\n";
  for (const auto& e : graph.edges()) {
    out += fmt::format("{}\t{}\t{}\n", graph.user(e.u), graph.user(e.v), e.weight);
  }
  return out;
}

SocialGraph read_graph(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics) {
  std::vector<std::tuple<UserId, UserId, std::uint64_t>> edges;
  std::set<std::pair<std::string, std::string>> seen;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if (f.size() != 3 || f[0].empty() || f[1].empty()) {
      rows.reject("graph rows need u, v, weight");
      continue;
    }
    const auto weight = tsv::parse_uint(f[2]);
    if (!weight || *weight == 0) {
      rows.reject("edge weight must be a positive integer");
      continue;
    }
    if (f[0] == f[1]) {
      rows.reject("self-loop");
      continue;
    }
    std::pair<std::string, std::string> pair{f[0], f[1]};
    if (pair.second < pair.first) std::swap(pair.first, pair.second);
    if (!seen.insert(pair).second) {
      rows.reject("duplicate edge");
      continue;
    }
    edges.emplace_back(pair.first, pair.second, *weight);
    rows.accept();
  }
  return SocialGraph::from_edges(edges);
}

const char* to_string(LabelSource source) {
  return source == LabelSource::kGpsMedian ? "GPS_MEDIAN" : "SELF_REPORT";
}

std::optional<LabelSource> parse_label_source(std::string_view s) {
  if (s == "GPS_MEDIAN") return LabelSource::kGpsMedian;
  if (s == "SELF_REPORT") return LabelSource::kSelfReport;
  return std::nullopt;
}

LabelSet gps_ground_truth(std::span<const GpsObservation> observations) {
  std::map<UserId, WeightedPointSet, std::less<>> by_user;
  for (const auto& obs : observations) by_user[obs.user].add(obs.location);
  LabelSet labels;
  for (const auto& [user, points] : by_user) {
    labels.emplace(user, GroundTruthLabel{user, l1_median(points, false), LabelSource::kGpsMedian, std::nullopt});
  }
  return labels;
}

std::vector<GpsObservation> read_gps(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics) {
  std::vector<GpsObservation> out;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if (f.size() != 3 || f[0].empty()) {
      rows.reject("GPS rows need user, lat, lon");
      continue;
    }
    const auto point = tsv::parse_point(f[1], f[2]);
    if (!point) {
      rows.reject("invalid coordinates");
      continue;
    }
    out.push_back({std::string(f[0]), *point});
    rows.accept();
  }
  return out;
}

std::vector<Profile> read_profiles(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics) {
  std::vector<Profile> out;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if ((f.size() != 2 && f.size() != 3) || f[0].empty()) {
      rows.reject("profile rows need user, text[, last_seen]");
      continue;
    }
    Profile p{std::string(f[0]), text::unescape_field(f[1]), std::nullopt};
    if (f.size() == 3 && !f[2].empty()) {
      p.last_seen = tsv::parse_iso8601(f[2]);
      if (!p.last_seen) {
        rows.reject(fmt::format("invalid last_seen timestamp '{}'", f[2]));
        continue;
      }
    }
    out.push_back(std::move(p));
    rows.accept();
  }
  return out;
}

LabelSet self_report_ground_truth(std::span<const Profile> profiles, const Gazetteer& gazetteer,
                                  const SelfReportOptions& options, SelfReportStats* stats) {
  SelfReportStats local;
  LabelSet labels;
  const auto newer = [](const GroundTruthLabel& cand, const GroundTruthLabel& cur) {
    if (cand.last_seen != cur.last_seen) return cand.last_seen > cur.last_seen;
    return cand.location < cur.location;
  };
  for (const auto& p : profiles) {
    if (options.last_seen_cutoff && p.last_seen && *p.last_seen < *options.last_seen_cutoff) {
      ++local.stale;
      continue;
    }
    if (gazetteer.lookup(p.location_text).empty()) {
      ++local.unmatched;
      continue;
    }
    const auto location = gazetteer.unique_location(p.location_text);
    if (!location) {
      ++local.ambiguous;
      continue;
    }
    ++local.matched;
    GroundTruthLabel label{p.user, *location, LabelSource::kSelfReport, p.last_seen};
    const auto it = labels.find(p.user);
    if (it == labels.end()) {
      labels.emplace(p.user, std::move(label));
    } else if (newer(label, it->second)) {
      it->second = std::move(label);
    }
  }
  if (stats) *stats = local;
  return labels;
}

LabelSet merge_labels(const LabelSet& gps, const LabelSet& self_report) {
  LabelSet out = gps;
  for (const auto& [user, label] : self_report) out.try_emplace(user, label);
  return out;
}

std::string format_labels(const LabelSet& labels) {
  std::string out = "# user\tlat\tlon\tsource\tlast_seen\n";
  for (const auto& [user, label] : labels) {
    out += fmt::format("{}\t{}\t{}\t{}", user, tsv::format_degrees(label.location.lat()),
                       tsv::format_degrees(label.location.lon()), to_string(label.source));
    if (label.last_seen) out += "\t" + tsv::format_iso8601(*label.last_seen);
    out += '\n';
  }
  return out;
}

LabelSet read_labels(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics) {
  LabelSet labels;
  tsv::RowReader rows(in, mode, diagnostics);
  while (rows.next()) {
    const auto f = rows.fields();
    if ((f.size() != 4 && f.size() != 5) || f[0].empty()) {
      rows.reject("label rows need user, lat, lon, source[, last_seen]");
      continue;
    }
    const auto point = tsv::parse_point(f[1], f[2]);
    const auto source = parse_label_source(f[3]);
    if (!point || !source) {
      rows.reject("invalid coordinates or source");
      continue;
    }
    GroundTruthLabel label{std::string(f[0]), *point, *source, std::nullopt};
    if (f.size() == 5 && !f[4].empty()) {
      label.last_seen = tsv::parse_iso8601(f[4]);
      if (!label.last_seen) {
        rows.reject("invalid last_seen timestamp");
        continue;
      }
    }
    if (labels.contains(label.user)) {
      rows.reject(fmt::format("second label for user {}", label.user));
      continue;
    }
    labels.emplace(label.user, std::move(label));
    rows.accept();
  }
  return labels;
}

VertexPartition partition(const SocialGraph& graph, const LabelSet& labels) {
  VertexPartition p;
  for (VertexIndex v = 0; v < graph.vertex_count(); ++v) {
    (labels.contains(graph.user(v)) ? p.labeled : p.unlabeled).push_back(v);
  }
  return p;
}

LinkPattern::LinkPattern(std::string_view regex) : source_(regex) {
  try {
    regex_ = std::regex(source_, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::kInvalidPattern, fmt::format("invalid pattern '{}': {}", source_, e.what()));
  }
}

std::vector<ProfileLink> extract_profile_links(std::span<const Profile> profiles,
                                               std::span<const LinkPattern> patterns) {
  std::vector<ProfileLink> out;
  for (const auto& p : profiles) {
    std::vector<std::string> seen;
    for (const auto& pattern : patterns) {
      const bool grouped = pattern.regex().mark_count() > 0;
      for (auto it = std::sregex_iterator(p.location_text.begin(), p.location_text.end(), pattern.regex());
           it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        std::string account = (grouped && m[1].matched) ? m[1].str() : m[0].str();
        if (account.empty() || std::find(seen.begin(), seen.end(), account) != seen.end()) continue;
        seen.push_back(account);
        out.push_back({p.user, std::move(account)});
      }
    }
  }
  return out;
}

}  // namespace geoprop
