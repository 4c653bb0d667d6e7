#include "geoprop/doc_geotag.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "geoprop/error.hpp"
#include "support/synthetic.hpp"

namespace geoprop {
namespace {

using testing::equator_offset;
using testing::user_name;

TEST(CanonicalizeUrl, Examples) {
  const std::vector<std::pair<std::string, std::optional<std::string>>> table{
      {"HTTP://Example.COM/Path", "http://example.com/Path"},
      {"http://example.com/", "http://example.com"},
      {"http://example.com", "http://example.com"},
      {"http://example.com/a#frag", "http://example.com/a"},
      {"http://example.com/?q=1", "http://example.com?q=1"},
      {"http://example.com/a?B=C#x", "http://example.com/a?B=C"},
      {"https://USER@Host.Org:8080/x/", "https://USER@host.org:8080/x/"},
      {"  http://padded.com/p  ", "http://padded.com/p"},
      {"http://example.com//", "http://example.com//"},
      {"example.com/path", std::nullopt},
      {"http//example.com", std::nullopt},
      {"://example.com", std::nullopt},
      {"http://", std::nullopt},
      {"http:///path", std::nullopt},
      {"http://exa mple.com", std::nullopt},
      {"http://example.com/\x01", std::nullopt},
      {"1http://example.com", std::nullopt},
      {"", std::nullopt},
      {"svn+ssh://Host/repo", "svn+ssh://host/repo"},
      {"http://example.com#top", "http://example.com"},
      {"http://example.com/#top", "http://example.com"},
      {"http://example.com?x", "http://example.com?x"},
      {"HTTPS://WWW.NYT.COM/2014/06/11/US/Story.html", "https://www.nyt.com/2014/06/11/US/Story.html"},
      {"http://user:pw@", std::nullopt},
      {"http://[::1]:80/", "http://[::1]:80"},
  };
  for (const auto& [in, expected] : table) EXPECT_EQ(canonicalize_url(in), expected) << in;
}

TEST(CanonicalizeUrl, Idempotent) {
  std::mt19937_64 rng(61);
  const std::string alphabet = "aZ09-._~:/?#[]@!$&'()*+,;=% ";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 30);
  const std::vector<std::string> schemes{"http://", "HTTPS://", "ftp://", "", "x:"};
  int parsed = 0;
  for (int i = 0; i < 5000; ++i) {
    std::string url = schemes[i % schemes.size()];
    for (std::size_t k = len(rng); k > 0; --k) url += alphabet[pick(rng)];
    const auto once = canonicalize_url(url);
    if (!once) continue;
    ++parsed;
    EXPECT_EQ(canonicalize_url(*once), once) << url;
  }
  EXPECT_GT(parsed, 500);
}

TEST(FilterByPattern, MatchesSearchOracle) {
  std::vector<ShareEvent> shares;
  const std::vector<std::string> urls{"http://www.nytimes.com/2014/a", "http://nytimes.com/b", "http://cnn.com/c",
                                      "http://www.nytimes.co/d", "http://blog.example.com/nytimes.com"};
  for (int i = 0; i < 50; ++i) shares.push_back({urls[i % urls.size()], user_name(i), std::nullopt});
  const std::string pattern = R"(^https?://(www\.)?nytimes\.com/)";
  const std::regex oracle(pattern);
  std::vector<ShareEvent> expected;
  std::copy_if(shares.begin(), shares.end(), std::back_inserter(expected),
               [&](const ShareEvent& s) { return std::regex_search(s.url, oracle); });
  const auto got = filter_by_pattern(shares, compile_url_pattern(pattern));
  ASSERT_EQ(got.size(), expected.size());
  EXPECT_EQ(got.size(), 20u);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i].url, expected[i].url);
  EXPECT_EQ(filter_by_pattern(shares, compile_url_pattern("nytimes")).size(), 40u);
}

TEST(CompileUrlPattern, RejectsInvalid) {
  try {
    compile_url_pattern("(*bad");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidPattern);
  }
}

EstimateMap located(std::size_t n, double spacing_km) {
  EstimateMap m;
  for (std::size_t i = 0; i < n; ++i) {
    m[user_name(i)] = {user_name(i), equator_offset(0, spacing_km * i), Provenance::kInferred, 0, 1};
  }
  return m;
}

TEST(GeotagDocuments, PolicyTable) {
  const EstimateMap loc = located(10, 1.0);
  struct Case {
    std::vector<std::string> sharers;
    GeotagStatus status;
    std::size_t n;
  };
  const std::vector<Case> cases{
      {{}, GeotagStatus::kRejectedTooFewUsers, 0},
      {{"u000000"}, GeotagStatus::kRejectedTooFewUsers, 1},
      {{"u000000", "u000001"}, GeotagStatus::kRejectedTooFewUsers, 2},
      {{"u000000", "u000000", "u000000"}, GeotagStatus::kRejectedTooFewUsers, 1},
      {{"u000000", "u000001", "ghost1", "ghost2"}, GeotagStatus::kRejectedTooFewUsers, 2},
      {{"u000000", "u000001", "u000002"}, GeotagStatus::kGeotagged, 3},
      {{"u000000", "u000001", "u000002", "u000002", "ghost"}, GeotagStatus::kGeotagged, 3},
      {{"u000003", "u000004", "u000005", "u000006"}, GeotagStatus::kGeotagged, 4},
  };
  std::vector<ShareEvent> shares;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::string url = "http://doc.example/" + std::to_string(i);
    for (const auto& u : cases[i].sharers) shares.push_back({url, u, std::nullopt});
    if (cases[i].sharers.empty()) shares.push_back({url, "ghost", std::nullopt});
  }
  const auto results = geotag_documents(shares, loc);
  ASSERT_EQ(results.size(), cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& r = results[i];
    EXPECT_EQ(r.url, "http://doc.example/" + std::to_string(i));
    EXPECT_EQ(r.status, cases[i].status) << i;
    EXPECT_EQ(r.distinct_located_users, cases[i].n) << i;
    EXPECT_EQ(r.location.has_value(), cases[i].status == GeotagStatus::kGeotagged);
  }
  EXPECT_EQ(results[5].location, loc.at("u000001").location);
  EXPECT_NEAR(*results[5].dispersion_km, 1.0, 1e-6);
}

TEST(GeotagDocuments, DispersionThreshold) {
  const EstimateMap loc = located(5, 100.0);
  std::vector<ShareEvent> shares;
  for (int i = 0; i < 5; ++i) shares.push_back({"http://a.example", user_name(i), std::nullopt});
  GeotagPolicy p;
  p.max_dispersion_km = 99.0;
  auto r = geotag_documents(shares, loc, p);
  EXPECT_EQ(r[0].status, GeotagStatus::kRejectedDispersion);
  EXPECT_TRUE(r[0].location);
  p.max_dispersion_km = 101.0;
  r = geotag_documents(shares, loc, p);
  EXPECT_EQ(r[0].status, GeotagStatus::kGeotagged);
}

TEST(GeotagDocuments, OrderInvariantAndThresholdMonotone) {
  std::mt19937_64 rng(67);
  EstimateMap loc;
  for (int i = 0; i < 60; ++i) {
    loc[user_name(i)] = {user_name(i), testing::random_point_near(rng, GeoPoint(30, 30), 3000), Provenance::kInferred,
                         0, 1};
  }
  std::uniform_int_distribution<int> doc(0, 19), user(0, 79);
  std::vector<ShareEvent> shares;
  for (int i = 0; i < 400; ++i) {
    shares.push_back({"http://d.example/" + std::to_string(doc(rng)), user_name(user(rng)), std::nullopt});
  }
  const std::string base = format_geotag_results(geotag_documents(shares, loc));
  std::shuffle(shares.begin(), shares.end(), rng);
  EXPECT_EQ(format_geotag_results(geotag_documents(shares, loc)), base);

  std::size_t prev = 0;
  for (double t : {10.0, 100.0, 500.0, 1000.0, 2000.0, 5000.0}) {
    GeotagPolicy p;
    p.max_dispersion_km = t;
    const auto r = geotag_documents(shares, loc, p);
    const auto n = static_cast<std::size_t>(std::count_if(
        r.begin(), r.end(), [](const GeotagResult& x) { return x.status == GeotagStatus::kGeotagged; }));
    EXPECT_GE(n, prev);
    prev = n;
  }
}

TEST(GeotagResults, RoundTrip) {
  const EstimateMap loc = located(4, 3.0);
  const std::vector<ShareEvent> shares{{"http://a.example", "u000000", std::nullopt},
                                       {"http://a.example", "u000001", std::nullopt},
                                       {"http://a.example", "u000002", std::nullopt},
                                       {"http://b.example", "u000003", std::nullopt}};
  const std::string text = format_geotag_results(geotag_documents(shares, loc));
  std::istringstream in(text);
  EXPECT_EQ(format_geotag_results(read_geotag_results(in, tsv::ParseMode::kStrict)), text);
}

TEST(ReadShares, CanonicalizesAndCountsBadUrls) {
  std::istringstream in("HTTP://X.com/\tu1\t2014-01-01T00:00:00Z\nnot a url\tu2\nhttp://x.com\tu3\nonly-one-field\n");
  tsv::ParseDiagnostics diag;
  ShareReadStats stats;
  const auto shares = read_shares(in, tsv::ParseMode::kLenient, &diag, &stats);
  ASSERT_EQ(shares.size(), 2u);
  EXPECT_EQ(shares[0].url, "http://x.com");
  EXPECT_EQ(shares[1].url, "http://x.com");
  EXPECT_EQ(stats.unparsable_urls, 1u);
  EXPECT_EQ(diag.issues.size(), 1u);
}

}  // namespace
}  // namespace geoprop
