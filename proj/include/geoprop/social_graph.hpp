#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "geoprop/geodesy.hpp"
#include "geoprop/toponym_gazetteer.hpp"
#include "geoprop/tsv.hpp"

namespace geoprop {

using UserId = std::string;
using VertexIndex = std::uint32_t;

/// A pre-aggregated directed mention count src -> dst.
struct MentionRecord {
  UserId src;
  UserId dst;
  std::uint64_t count = 1;
};

struct Neighbor {
  VertexIndex vertex;
  std::uint64_t weight;
};

struct Edge {
  VertexIndex u;  // u < v
  VertexIndex v;
  std::uint64_t weight;
};

/// Undirected, weighted, reciprocated mention graph. Immutable once built;
/// vertices are the users incident to at least one edge, indexed in
/// lexicographic order of their IDs.
class SocialGraph {
 public:
  SocialGraph() = default;

  /// Builds from undirected edges. Duplicate unordered pairs are an error.
  static SocialGraph from_edges(std::span<const std::tuple<UserId, UserId, std::uint64_t>> edges);

  std::size_t vertex_count() const noexcept { return users_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return users_.empty(); }

  const UserId& user(VertexIndex v) const { return users_[v]; }
  std::span<const UserId> users() const noexcept { return users_; }
  std::optional<VertexIndex> find(std::string_view user) const;

  std::span<const Neighbor> neighbors(VertexIndex v) const;
  /// Each unordered edge once, sorted by (u, v).
  std::span<const Edge> edges() const noexcept { return edges_; }

 private:
  std::vector<UserId> users_;
  std::unordered_map<UserId, VertexIndex> index_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<Edge> edges_;
};

/// Sums duplicate directed records, drops self-mentions, and keeps a pair
/// only when both directions appear, weighted by the smaller directed total.
SocialGraph build_graph(std::span<const MentionRecord> records);

/// Mention TSV: src<TAB>dst<TAB>count. Self-mentions are dropped silently;
/// bad field counts and non-positive counts are malformed.
std::vector<MentionRecord> read_mentions(std::istream& in, tsv::ParseMode mode,
                                         tsv::ParseDiagnostics* diagnostics = nullptr);

/// Graph TSV: u<TAB>v<TAB>weight, one row per undirected edge.
std::string format_graph(const SocialGraph& graph);
SocialGraph read_graph(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics = nullptr);

enum class LabelSource { kGpsMedian, kSelfReport };

const char* to_string(LabelSource source);
std::optional<LabelSource> parse_label_source(std::string_view s);

struct GroundTruthLabel {
  UserId user;
  GeoPoint location;
  LabelSource source = LabelSource::kGpsMedian;
  std::optional<tsv::Timestamp> last_seen;
};

/// At most one label per user, iterated in user order.
using LabelSet = std::map<UserId, GroundTruthLabel, std::less<>>;

struct GpsObservation {
  UserId user;
  GeoPoint location;
};

/// Each user's label is the medoid of their GPS points.
LabelSet gps_ground_truth(std::span<const GpsObservation> observations);

/// GPS TSV: user<TAB>lat<TAB>lon.
std::vector<GpsObservation> read_gps(std::istream& in, tsv::ParseMode mode,
                                     tsv::ParseDiagnostics* diagnostics = nullptr);

struct Profile {
  UserId user;
  std::string location_text;  // unescaped
  std::optional<tsv::Timestamp> last_seen;
};

/// Profile TSV: user<TAB>free-text[<TAB>last_seen_iso8601]; "\t" escapes a
/// tab inside the text.
std::vector<Profile> read_profiles(std::istream& in, tsv::ParseMode mode,
                                   tsv::ParseDiagnostics* diagnostics = nullptr);

struct SelfReportOptions {
  /// Profiles last seen before this instant are ignored. Profiles without a
  /// timestamp are kept.
  std::optional<tsv::Timestamp> last_seen_cutoff;
};

struct SelfReportStats {
  std::size_t matched = 0;
  std::size_t unmatched = 0;
  std::size_t ambiguous = 0;  // name resolves to several coordinates
  std::size_t stale = 0;
};

/// Labels a user whose profile location text, trimmed and NFC-normalized,
/// equals a gazetteer name with a single location. When one user has
/// several matching profiles the most recently seen one wins.
LabelSet self_report_ground_truth(std::span<const Profile> profiles, const Gazetteer& gazetteer,
                                  const SelfReportOptions& options = {}, SelfReportStats* stats = nullptr);

/// Union of both sets; GPS wins for users present in both.
LabelSet merge_labels(const LabelSet& gps, const LabelSet& self_report);

/// Label TSV: user<TAB>lat<TAB>lon<TAB>source[<TAB>last_seen_iso8601].
std::string format_labels(const LabelSet& labels);
LabelSet read_labels(std::istream& in, tsv::ParseMode mode, tsv::ParseDiagnostics* diagnostics = nullptr);

/// The split V = L + U of the graph's vertices.
struct VertexPartition {
  std::vector<VertexIndex> labeled;
  std::vector<VertexIndex> unlabeled;
};

VertexPartition partition(const SocialGraph& graph, const LabelSet& labels);

/// A compiled profile-link pattern. When the regex has a capture group the
/// first group is the account string, otherwise the whole match.
class LinkPattern {
 public:
  explicit LinkPattern(std::string_view regex);
  const std::string& source() const noexcept { return source_; }
  const std::regex& regex() const noexcept { return regex_; }

 private:
  std::string source_;
  std::regex regex_;
};

/// Tumblr blog URLs in profile text, yielding "<name>.tumblr.com". The bare
/// www.tumblr.com site is not an account.
inline constexpr std::string_view kTumblrProfilePattern =
    R"(https?://(?:www\.)?((?!www\.)[A-Za-z0-9_-]+\.tumblr\.com))";

struct ProfileLink {
  UserId user;
  std::string account;
  friend bool operator==(const ProfileLink&, const ProfileLink&) = default;
};

/// Every (user, account) match of every pattern, in input order; repeated
/// identical pairs from one profile are reported once.
std::vector<ProfileLink> extract_profile_links(std::span<const Profile> profiles,
                                               std::span<const LinkPattern> patterns);

}  // namespace geoprop
