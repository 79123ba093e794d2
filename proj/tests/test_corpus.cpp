#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <unistd.h>

#include "test_util.hpp"
#include "verilens/corpus.hpp"

using namespace verilens;
using verilens::testing::TempDir;
using verilens::testing::write_file;

namespace {

Timestamp ts(const char* s) { return *parse_timestamp(s); }

CorpusDates dates() {
  return {ts("2018-07-18T00:00:00Z"), {ts("2017-06-01T00:00:00Z"), ts("2018-05-31T23:59:59Z")}};
}

const char* kProfileU1 =
    R"({"user_id":"u1","verified":true,"followers_count":100,"friends_count":10,"statuses_count":5,"listed_count":2,"created_at":"2015-01-01T00:00:00Z","lang":"en"})";

std::string profile_line(const std::string& id, bool verified, int followers) {
  return R"({"user_id":")" + id + R"(","verified":)" + (verified ? "true" : "false") +
         R"(,"followers_count":)" + std::to_string(followers) +
         R"(,"friends_count":1,"statuses_count":1,"listed_count":0,"created_at":"2016-01-01T00:00:00Z","lang":"en"})";
}

// Random but valid corpus for round-trip and ordering properties.
Corpus random_corpus(std::uint64_t seed) {
  Rng rng(seed);
  Corpus c;
  c.snapshot_date = dates().snapshot;
  c.window = dates().window;
  const std::size_t n = 5 + rng.index(10);
  const auto t0 = c.window.start;
  const auto span = seconds_between(c.window.start, c.window.end);
  for (std::size_t u = 0; u < n; ++u) {
    UserProfile p;
    p.user_id = "user" + std::to_string(u);
    p.verified = rng.uniform() < 0.5;
    p.followers_count = static_cast<std::int64_t>(rng.index(100000));
    p.friends_count = static_cast<std::int64_t>(rng.index(5000));
    p.statuses_count = static_cast<std::int64_t>(rng.index(50000));
    p.listed_count = static_cast<std::int64_t>(rng.index(300));
    p.created_at = t0 - std::chrono::seconds(static_cast<std::int64_t>(rng.index(100000000)));
    p.lang = "en";
    c.profiles[p.user_id] = p;
    if (rng.uniform() < 0.8) {
      auto& v = c.tweets[p.user_id];
      const std::size_t k = 1 + rng.index(6);
      for (std::size_t i = 0; i < k; ++i) {
        TweetRecord t;
        t.user_id = p.user_id;
        t.tweet_id = p.user_id + "_" + std::to_string(i);
        t.created_at = t0 + std::chrono::seconds(static_cast<std::int64_t>(rng.index(static_cast<std::size_t>(span))));
        t.text = "hello \"world\" #tag" + std::to_string(i) + " \xC3\xA9t\xC3\xA9 @friend";
        t.is_retweet = rng.uniform() < 0.3;
        t.hashtags = {"tag" + std::to_string(i)};
        t.mentions = {"friend"};
        if (rng.uniform() < 0.5) t.urls = {"https://example.com/" + std::to_string(i)};
        v.push_back(t);
      }
      sort_tweets(v);
    }
    if (rng.uniform() < 0.9) {
      StatTimeSeries s;
      s.user_id = p.user_id;
      std::int64_t st = 0;
      for (int w = 0; w < 10; ++w) {
        st += static_cast<std::int64_t>(rng.index(20));
        s.points.push_back({t0 + std::chrono::days{7 * w}, static_cast<std::int64_t>(rng.index(1000)),
                            static_cast<std::int64_t>(rng.index(1000)), st});
      }
      c.series[p.user_id] = s;
    }
    if (rng.uniform() < 0.7) {
      ExternalScores e;
      e.user_id = p.user_id;
      e.liwc_analytic = rng.uniform(0, 100);
      e.liwc_clout = rng.uniform(0, 100);
      e.liwc_authentic = 100.0;
      e.liwc_tone = rng.uniform(0, 100) / 3.0;
      e.cap_score = rng.uniform();
      e.network_score = rng.uniform();
      e.content_score = 0.1;
      e.temporal_score = 1.0;
      c.external[p.user_id] = e;
    }
  }
  return c;
}

CorpusPaths paths_in(const TempDir& d) {
  return {d.file("profiles.jsonl"), d.file("tweets.jsonl"), d.file("timeseries.jsonl"),
          d.file("external_scores.jsonl")};
}

void shuffle_lines(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  Rng rng(seed);
  rng.shuffle(lines);
  std::ostringstream out;
  for (auto& l : lines) out << l << '\n';
  write_file(path, out.str());
}

}  // namespace

TEST(LoadProfiles, DirectFieldMapping) {
  TempDir d("profiles");
  write_file(d.file("p.jsonl"), std::string(kProfileU1) + "\n");
  const auto r = load_profiles(d.file("p.jsonl"), dates().snapshot);
  ASSERT_EQ(r.records.size(), 1u);
  const auto& p = r.records.at("u1");
  EXPECT_TRUE(p.verified);
  EXPECT_EQ(p.followers_count, 100);
  EXPECT_EQ(p.friends_count, 10);
  EXPECT_EQ(p.statuses_count, 5);
  EXPECT_EQ(p.listed_count, 2);
  EXPECT_EQ(p.created_at, ts("2015-01-01T00:00:00Z"));
  EXPECT_EQ(p.lang, "en");
}

TEST(LoadProfiles, EmptyFileGivesEmptyMap) {
  TempDir d("profiles");
  write_file(d.file("p.jsonl"), "");
  const auto r = load_profiles(d.file("p.jsonl"), dates().snapshot);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.report.total_lines, 0u);
}

TEST(LoadProfiles, DuplicateKeyIsError) {
  TempDir d("profiles");
  write_file(d.file("p.jsonl"), std::string(kProfileU1) + "\n" + kProfileU1 + "\n");
  EXPECT_THROW(load_profiles(d.file("p.jsonl"), dates().snapshot), DataError);
}

TEST(LoadProfiles, CreatedAfterSnapshotIsError) {
  TempDir d("profiles");
  write_file(d.file("p.jsonl"),
             R"({"user_id":"u1","verified":true,"followers_count":1,"friends_count":1,"statuses_count":1,"listed_count":0,"created_at":"2019-01-01T00:00:00Z","lang":"en"})"
             "\n");
  EXPECT_THROW(load_profiles(d.file("p.jsonl"), dates().snapshot), DataError);
}

TEST(LoadProfiles, MalformedLinesCountedNotFatal) {
  TempDir d("profiles");
  write_file(d.file("p.jsonl"), std::string(kProfileU1) + "\n{not json\n\n" +
                                    R"({"user_id":"u2","verified":"yes"})" + "\n" +
                                    profile_line("u3", false, -5) + "\n[1,2]\n");
  const auto r = load_profiles(d.file("p.jsonl"), dates().snapshot);
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.report.total_lines, 5u);
  EXPECT_EQ(r.report.malformed, 4u);
  EXPECT_EQ(r.report.retained + r.report.dropped + r.report.malformed, r.report.total_lines);
}

TEST(LoadProfiles, MissingFileIsIoError) {
  EXPECT_THROW(load_profiles("/nonexistent/profiles.jsonl", dates().snapshot), IoError);
}

TEST(LoadTweets, WindowFiltering) {
  TempDir d("tweets");
  write_file(d.file("t.jsonl"),
             R"({"user_id":"u1","tweet_id":"a","created_at":"2017-07-01T00:00:00Z","text":"inside"})" "\n"
             R"({"user_id":"u1","tweet_id":"b","created_at":"2017-05-31T23:59:59Z","text":"before"})" "\n"
             R"({"user_id":"u1","tweet_id":"c","created_at":"2018-06-01T00:00:00Z","text":"after"})" "\n");
  const auto r = load_tweets(d.file("t.jsonl"), dates().window);
  ASSERT_EQ(r.records.at("u1").size(), 1u);
  EXPECT_EQ(r.records.at("u1")[0].tweet_id, "a");
  EXPECT_EQ(r.report.dropped, 2u);
  EXPECT_EQ(r.report.retained, 1u);
}

TEST(LoadTweets, EntitiesParsedWhenAbsent) {
  TempDir d("tweets");
  write_file(d.file("t.jsonl"),
             R"({"user_id":"u1","tweet_id":"a","created_at":"2017-07-01T00:00:00Z","text":"RT @bob: hi #news http://x.y"})"
             "\n");
  const auto r = load_tweets(d.file("t.jsonl"), dates().window);
  const auto& t = r.records.at("u1").at(0);
  EXPECT_TRUE(t.is_retweet);
  EXPECT_EQ(t.mentions, std::vector<std::string>{"bob"});
  EXPECT_EQ(t.hashtags, std::vector<std::string>{"news"});
  EXPECT_EQ(t.urls, std::vector<std::string>{"http://x.y"});
}

TEST(LoadTweets, ExplicitFieldsWinAndEmptyEntitiesRejected) {
  TempDir d("tweets");
  write_file(d.file("t.jsonl"),
             R"({"user_id":"u1","tweet_id":"a","created_at":"2017-07-01T00:00:00Z","text":"RT @bob: x","is_retweet":false,"hashtags":[],"mentions":[],"urls":[]})" "\n"
             R"({"user_id":"u1","tweet_id":"b","created_at":"2017-07-02T00:00:00Z","text":"y","hashtags":[""]})" "\n");
  const auto r = load_tweets(d.file("t.jsonl"), dates().window);
  ASSERT_EQ(r.records.at("u1").size(), 1u);
  EXPECT_FALSE(r.records.at("u1")[0].is_retweet);
  EXPECT_TRUE(r.records.at("u1")[0].mentions.empty());
  EXPECT_EQ(r.report.malformed, 1u);
}

TEST(LoadTweets, PerUserListsTimeOrdered) {
  TempDir d("tweets");
  write_file(d.file("t.jsonl"),
             R"({"user_id":"u1","tweet_id":"late","created_at":"2018-01-01T00:00:00Z","text":"b"})" "\n"
             R"({"user_id":"u1","tweet_id":"early","created_at":"2017-07-01T00:00:00Z","text":"a"})" "\n");
  const auto r = load_tweets(d.file("t.jsonl"), dates().window);
  EXPECT_EQ(r.records.at("u1")[0].tweet_id, "early");
}

TEST(LoadSeries, InvariantsEnforced) {
  TempDir d("series");
  write_file(d.file("s.jsonl"),
             R"({"user_id":"u1","points":[{"timestamp":"2017-07-01T00:00:00Z","followers":1,"friends":1,"statuses":5},{"timestamp":"2017-07-02T00:00:00Z","followers":2,"friends":1,"statuses":6}]})" "\n"
             R"({"user_id":"u2","points":[{"timestamp":"2017-07-02T00:00:00Z","followers":1,"friends":1,"statuses":5},{"timestamp":"2017-07-01T00:00:00Z","followers":2,"friends":1,"statuses":6}]})" "\n"
             R"({"user_id":"u3","points":[{"timestamp":"2017-07-01T00:00:00Z","followers":1,"friends":1,"statuses":5},{"timestamp":"2017-07-02T00:00:00Z","followers":2,"friends":1,"statuses":4}]})" "\n");
  const auto r = load_series(d.file("s.jsonl"));
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.report.malformed, 2u);
}

TEST(LoadExternal, RangesEnforced) {
  TempDir d("ext");
  write_file(d.file("e.jsonl"),
             R"({"user_id":"u1","liwc_analytic":10,"liwc_clout":20,"liwc_authentic":30,"liwc_tone":40,"cap_score":0.1,"network_score":0.2,"content_score":0.3,"temporal_score":0.4})" "\n"
             R"({"user_id":"u2","liwc_analytic":101,"liwc_clout":20,"liwc_authentic":30,"liwc_tone":40,"cap_score":0.1,"network_score":0.2,"content_score":0.3,"temporal_score":0.4})" "\n"
             R"({"user_id":"u3","liwc_analytic":1,"liwc_clout":20,"liwc_authentic":30,"liwc_tone":40,"cap_score":1.5,"network_score":0.2,"content_score":0.3,"temporal_score":0.4})" "\n");
  const auto r = load_external(d.file("e.jsonl"));
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_DOUBLE_EQ(r.records.at("u1").liwc_tone, 40.0);
  EXPECT_EQ(r.report.malformed, 2u);
}

TEST(AssembleCorpus, SingleUser) {
  TempDir d("assemble");
  auto p = paths_in(d);
  write_file(p.profiles, std::string(kProfileU1) + "\n");
  write_file(p.tweets, R"({"user_id":"u1","tweet_id":"a","created_at":"2017-07-01T00:00:00Z","text":"hi"})" "\n");
  write_file(p.series, R"({"user_id":"u1","points":[{"timestamp":"2017-07-01T00:00:00Z","followers":1,"friends":1,"statuses":5}]})" "\n");
  write_file(p.external, "");
  const auto a = load_corpus(p, dates());
  EXPECT_EQ(a.corpus.profiles.size(), 1u);
  EXPECT_EQ(a.report.users, 1u);
  EXPECT_EQ(a.report.missing_external, std::vector<std::string>{"u1"});
  EXPECT_TRUE(a.report.users_without_tweets.empty());
}

TEST(AssembleCorpus, ReferentialIntegrityNamesUser) {
  TempDir d("assemble");
  auto p = paths_in(d);
  write_file(p.profiles, std::string(kProfileU1) + "\n");
  write_file(p.tweets, R"({"user_id":"u9","tweet_id":"a","created_at":"2017-07-01T00:00:00Z","text":"hi"})" "\n");
  write_file(p.series, "");
  write_file(p.external, "");
  try {
    load_corpus(p, dates());
    FAIL() << "expected referential integrity error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("u9"), std::string::npos);
  }
}

TEST(AssembleCorpus, UsersWithoutTweetsRetained) {
  TempDir d("assemble");
  auto p = paths_in(d);
  write_file(p.profiles, std::string(kProfileU1) + "\n" + profile_line("u2", false, 99) + "\n");
  write_file(p.tweets, "");
  write_file(p.series, "");
  write_file(p.external, "");
  const auto a = load_corpus(p, dates());
  EXPECT_EQ(a.corpus.profiles.size(), 2u);
  EXPECT_EQ(a.report.users_without_tweets.size(), 2u);
  // u2's 99 followers are within 2% of u1's 100.
  EXPECT_DOUBLE_EQ(a.report.follower_pairing_fraction, 1.0);
}

TEST(AssembleCorpus, WindowOrderingChecked) {
  Loaded<std::map<std::string, UserProfile>> p;
  Loaded<std::map<std::string, std::vector<TweetRecord>>> t;
  Loaded<std::map<std::string, StatTimeSeries>> s;
  Loaded<std::map<std::string, ExternalScores>> e;
  CorpusDates bad = dates();
  std::swap(bad.window.start, bad.window.end);
  EXPECT_THROW(assemble_corpus(p, t, s, e, bad), DataError);
  CorpusDates late = dates();
  late.window.end = late.snapshot + std::chrono::days{1};
  EXPECT_THROW(assemble_corpus(p, t, s, e, late), DataError);
}

TEST(CorpusProperties, RoundTripIsIdentity) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Corpus c = random_corpus(seed);
    TempDir d("roundtrip");
    const auto p = paths_in(d);
    write_corpus(c, p);
    const auto back = load_corpus(p, dates());
    EXPECT_TRUE(back.corpus == c) << "seed " << seed;
  }
}

TEST(CorpusProperties, LoadIsOrderInsensitive) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Corpus c = random_corpus(seed);
    TempDir d("order");
    const auto p = paths_in(d);
    write_corpus(c, p);
    for (const auto* f : {&p.profiles, &p.tweets, &p.series, &p.external}) shuffle_lines(*f, seed * 31);
    EXPECT_TRUE(load_corpus(p, dates()).corpus == c) << "seed " << seed;
  }
}

TEST(CorpusProperties, CountersSumPerFile) {
  TempDir d("counters");
  auto p = paths_in(d);
  const Corpus c = random_corpus(3);
  write_corpus(c, p);
  // Append junk and out-of-window lines.
  std::ofstream(p.tweets, std::ios::app)
      << "garbage\n"
      << R"({"user_id":"user0","tweet_id":"z","created_at":"2010-01-01T00:00:00Z","text":"old"})" "\n";
  std::ofstream(p.external, std::ios::app) << "{\"user_id\":5}\n";
  const auto a = load_corpus(p, dates());
  for (const auto* r : {&a.report.profiles, &a.report.tweets, &a.report.series, &a.report.external})
    EXPECT_EQ(r->retained + r->dropped + r->malformed, r->total_lines) << r->file;
  EXPECT_EQ(a.report.tweets.dropped, 1u);
  EXPECT_EQ(a.report.tweets.malformed, 1u);
  EXPECT_EQ(a.report.external.malformed, 1u);
  const auto j = a.report.to_json();
  EXPECT_EQ(j["files"].size(), 4u);
  EXPECT_EQ(j["users"].get<std::size_t>(), c.profiles.size());
}

TEST(Timestamps, ParseAndFormat) {
  EXPECT_EQ(format_timestamp(ts("2017-06-01T12:34:56Z")), "2017-06-01T12:34:56Z");
  EXPECT_EQ(ts("2017-06-01T12:00:00+02:00"), ts("2017-06-01T10:00:00Z"));
  EXPECT_EQ(ts("2017-06-01T12:00:00.250Z"), ts("2017-06-01T12:00:00Z"));
  EXPECT_EQ(ts("2017-06-01"), ts("2017-06-01T00:00:00Z"));
  EXPECT_FALSE(parse_timestamp("2017-02-30T00:00:00Z"));
  EXPECT_FALSE(parse_timestamp("2017-06-01T00:00:00"));
  EXPECT_FALSE(parse_timestamp("yesterday"));
}
