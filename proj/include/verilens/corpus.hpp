#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "verilens/core.hpp"
#include "verilens/text.hpp"
#include "verilens/timeutil.hpp"

namespace verilens {

using json = nlohmann::json;

struct UserProfile {
  std::string user_id;
  bool verified = false;
  std::int64_t followers_count = 0;
  std::int64_t friends_count = 0;
  std::int64_t statuses_count = 0;
  std::int64_t listed_count = 0;
  Timestamp created_at{};
  std::string lang;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

struct TweetRecord {
  std::string user_id;
  std::string tweet_id;
  Timestamp created_at{};
  std::string text;
  bool is_retweet = false;
  std::vector<std::string> hashtags;
  std::vector<std::string> mentions;
  std::vector<std::string> urls;

  friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

struct StatPoint {
  Timestamp time{};
  std::int64_t followers = 0;
  std::int64_t friends = 0;
  std::int64_t statuses = 0;

  friend bool operator==(const StatPoint&, const StatPoint&) = default;
};

struct StatTimeSeries {
  std::string user_id;
  std::vector<StatPoint> points;  // strictly increasing in time

  friend bool operator==(const StatTimeSeries&, const StatTimeSeries&) = default;
};

struct ExternalScores {
  std::string user_id;
  double liwc_analytic = 0.0;  // [0,100]
  double liwc_clout = 0.0;
  double liwc_authentic = 0.0;
  double liwc_tone = 0.0;
  double cap_score = 0.0;  // [0,1]
  double network_score = 0.0;
  double content_score = 0.0;
  double temporal_score = 0.0;

  friend bool operator==(const ExternalScores&, const ExternalScores&) = default;
};

struct CollectionWindow {
  Timestamp start{};
  Timestamp end{};
  bool contains(Timestamp t) const { return t >= start && t <= end; }
  friend bool operator==(const CollectionWindow&, const CollectionWindow&) = default;
};

struct CorpusDates {
  Timestamp snapshot{};
  CollectionWindow window;
};

struct Corpus {
  Timestamp snapshot_date{};
  CollectionWindow window;
  std::map<std::string, UserProfile> profiles;
  std::map<std::string, std::vector<TweetRecord>> tweets;
  std::map<std::string, StatTimeSeries> series;
  std::map<std::string, ExternalScores> external;

  const std::vector<TweetRecord>& tweets_of(const std::string& user) const {
    static const std::vector<TweetRecord> kNone;
    auto it = tweets.find(user);
    return it == tweets.end() ? kNone : it->second;
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Per-file ingestion counters. Invariant: retained + dropped + malformed == total_lines.
struct FileReport {
  std::string file;
  std::size_t total_lines = 0;  // non-blank lines
  std::size_t retained = 0;
  std::size_t dropped = 0;
  std::size_t malformed = 0;
  std::vector<std::string> messages;  // first few malformed-line diagnostics

  void note_malformed(std::size_t line, const std::string& why) {
    ++malformed;
    if (messages.size() < 20) messages.push_back("line " + std::to_string(line) + ": " + why);
  }
};

inline void to_json(json& j, const FileReport& r) {
  j = json{{"file", r.file},           {"total_lines", r.total_lines}, {"retained", r.retained},
           {"dropped", r.dropped},     {"malformed", r.malformed},     {"messages", r.messages}};
}

struct IngestionReport {
  FileReport profiles, tweets, series, external;
  std::size_t users = 0;
  std::size_t verified_users = 0;
  std::size_t tweets_retained = 0;
  std::vector<std::string> users_without_tweets;
  std::vector<std::string> users_without_series;
  std::vector<std::string> missing_external;
  // Share of non-verified users whose follower count is within 2% of some
  // verified user's follower count. Reported, not enforced.
  double follower_pairing_fraction = 0.0;

  json to_json() const {
    return json{{"files", {profiles, tweets, series, external}},
                {"users", users},
                {"verified_users", verified_users},
                {"tweets", tweets_retained},
                {"users_without_tweets", users_without_tweets},
                {"users_without_series", users_without_series},
                {"missing_external", missing_external},
                {"follower_pairing_fraction", follower_pairing_fraction}};
  }
};

template <typename T>
struct Loaded {
  T records;
  FileReport report;
};

namespace detail {

struct LineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const json& field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw LineError(std::string("missing field '") + name + "'");
  return *it;
}

inline std::string get_string(const json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_string()) throw LineError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

inline std::int64_t get_count(const json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_number_integer()) throw LineError(std::string("field '") + name + "' must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < 0) throw LineError(std::string("field '") + name + "' must be non-negative");
  return x;
}

inline bool get_bool(const json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_boolean()) throw LineError(std::string("field '") + name + "' must be a boolean");
  return v.get<bool>();
}

inline double get_score(const json& obj, const char* name, double lo, double hi) {
  const auto& v = field(obj, name);
  if (!v.is_number()) throw LineError(std::string("field '") + name + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < lo || x > hi)
    throw LineError(std::string("field '") + name + "' outside [" + std::to_string(lo) + "," +
                    std::to_string(hi) + "]");
  return x;
}

inline Timestamp get_time(const json& obj, const char* name) {
  auto s = get_string(obj, name);
  auto t = parse_timestamp(s);
  if (!t) throw LineError(std::string("field '") + name + "' is not an ISO-8601 UTC timestamp");
  return *t;
}

inline std::vector<std::string> get_entity_list(const json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_array()) throw LineError(std::string("field '") + name + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string() || e.get_ref<const std::string&>().empty())
      throw LineError(std::string("field '") + name + "' must hold non-empty strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

// Calls fn(parsed_object, line_no) for every non-blank line; JSON and schema
// failures are counted as malformed.
template <typename Fn>
FileReport for_each_jsonl(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  FileReport rep;
  rep.file = std::filesystem::path(path).filename().string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](char c) { return is_space(c); })) continue;
    ++rep.total_lines;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error&) {
      rep.note_malformed(line_no, "invalid JSON");
      continue;
    }
    if (!obj.is_object()) {
      rep.note_malformed(line_no, "expected a JSON object");
      continue;
    }
    try {
      fn(obj, line_no, rep);
    } catch (const LineError& e) {
      rep.note_malformed(line_no, e.what());
    }
  }
  if (in.bad()) throw IoError("read failure on " + path);
  return rep;
}

}  // namespace detail

// One profile per line. Duplicate ids and accounts created after the snapshot abort the load.
inline Loaded<std::map<std::string, UserProfile>> load_profiles(const std::string& path, Timestamp snapshot_date) {
  Loaded<std::map<std::string, UserProfile>> out;
  out.report = detail::for_each_jsonl(path, [&](const json& o, std::size_t line, FileReport& rep) {
    UserProfile p;
    p.user_id = detail::get_string(o, "user_id");
    if (p.user_id.empty()) throw detail::LineError("empty user_id");
    p.verified = detail::get_bool(o, "verified");
    p.followers_count = detail::get_count(o, "followers_count");
    p.friends_count = detail::get_count(o, "friends_count");
    p.statuses_count = detail::get_count(o, "statuses_count");
    p.listed_count = detail::get_count(o, "listed_count");
    p.created_at = detail::get_time(o, "created_at");
    p.lang = detail::get_string(o, "lang");
    if (p.created_at > snapshot_date)
      throw DataError(path + ":" + std::to_string(line) + ": user '" + p.user_id +
                      "' created after the snapshot date");
    if (out.records.contains(p.user_id))
      throw DataError(path + ":" + std::to_string(line) + ": duplicate user_id '" + p.user_id + "'");
    out.records.emplace(p.user_id, std::move(p));
    ++rep.retained;
  });
  return out;
}

inline void sort_tweets(std::vector<TweetRecord>& v) {
  std::sort(v.begin(), v.end(), [](const TweetRecord& a, const TweetRecord& b) {
    if (a.created_at != b.created_at) return a.created_at < b.created_at;
    if (a.tweet_id != b.tweet_id) return a.tweet_id < b.tweet_id;
    return a.text < b.text;
  });
}

// Tweets outside the window are dropped and counted. Missing entity fields are
// filled in by the entity grammar; a missing is_retweet is inferred from the text.
inline Loaded<std::map<std::string, std::vector<TweetRecord>>> load_tweets(const std::string& path,
                                                                          CollectionWindow window) {
  Loaded<std::map<std::string, std::vector<TweetRecord>>> out;
  out.report = detail::for_each_jsonl(path, [&](const json& o, std::size_t, FileReport& rep) {
    TweetRecord t;
    t.user_id = detail::get_string(o, "user_id");
    if (t.user_id.empty()) throw detail::LineError("empty user_id");
    t.tweet_id = detail::get_string(o, "tweet_id");
    t.created_at = detail::get_time(o, "created_at");
    t.text = detail::get_string(o, "text");
    const bool has_entities = o.contains("hashtags") || o.contains("mentions") || o.contains("urls");
    Entities parsed;
    if (!has_entities || !o.contains("is_retweet")) parsed = extract_entities(t.text);
    t.is_retweet = o.contains("is_retweet") ? detail::get_bool(o, "is_retweet") : parsed.is_retweet;
    if (has_entities) {
      t.hashtags = o.contains("hashtags") ? detail::get_entity_list(o, "hashtags") : std::vector<std::string>{};
      t.mentions = o.contains("mentions") ? detail::get_entity_list(o, "mentions") : std::vector<std::string>{};
      t.urls = o.contains("urls") ? detail::get_entity_list(o, "urls") : std::vector<std::string>{};
    } else {
      t.hashtags = std::move(parsed.hashtags);
      t.mentions = std::move(parsed.mentions);
      t.urls = std::move(parsed.urls);
    }
    if (!window.contains(t.created_at)) {
      ++rep.dropped;
      return;
    }
    out.records[t.user_id].push_back(std::move(t));
    ++rep.retained;
  });
  for (auto& [_, v] : out.records) sort_tweets(v);
  return out;
}

inline Loaded<std::map<std::string, StatTimeSeries>> load_series(const std::string& path) {
  Loaded<std::map<std::string, StatTimeSeries>> out;
  out.report = detail::for_each_jsonl(path, [&](const json& o, std::size_t line, FileReport& rep) {
    StatTimeSeries s;
    s.user_id = detail::get_string(o, "user_id");
    if (s.user_id.empty()) throw detail::LineError("empty user_id");
    const auto& pts = detail::field(o, "points");
    if (!pts.is_array()) throw detail::LineError("field 'points' must be an array");
    for (const auto& p : pts) {
      if (!p.is_object()) throw detail::LineError("points must be objects");
      StatPoint sp;
      sp.time = detail::get_time(p, "timestamp");
      sp.followers = detail::get_count(p, "followers");
      sp.friends = detail::get_count(p, "friends");
      sp.statuses = detail::get_count(p, "statuses");
      if (!s.points.empty()) {
        if (sp.time <= s.points.back().time) throw detail::LineError("timestamps must be strictly increasing");
        if (sp.statuses < s.points.back().statuses) throw detail::LineError("statuses must be non-decreasing");
      }
      s.points.push_back(sp);
    }
    if (out.records.contains(s.user_id))
      throw DataError(path + ":" + std::to_string(line) + ": duplicate user_id '" + s.user_id + "'");
    out.records.emplace(s.user_id, std::move(s));
    ++rep.retained;
  });
  return out;
}

inline Loaded<std::map<std::string, ExternalScores>> load_external(const std::string& path) {
  Loaded<std::map<std::string, ExternalScores>> out;
  out.report = detail::for_each_jsonl(path, [&](const json& o, std::size_t line, FileReport& rep) {
    ExternalScores e;
    e.user_id = detail::get_string(o, "user_id");
    if (e.user_id.empty()) throw detail::LineError("empty user_id");
    e.liwc_analytic = detail::get_score(o, "liwc_analytic", 0, 100);
    e.liwc_clout = detail::get_score(o, "liwc_clout", 0, 100);
    e.liwc_authentic = detail::get_score(o, "liwc_authentic", 0, 100);
    e.liwc_tone = detail::get_score(o, "liwc_tone", 0, 100);
    e.cap_score = detail::get_score(o, "cap_score", 0, 1);
    e.network_score = detail::get_score(o, "network_score", 0, 1);
    e.content_score = detail::get_score(o, "content_score", 0, 1);
    e.temporal_score = detail::get_score(o, "temporal_score", 0, 1);
    if (out.records.contains(e.user_id))
      throw DataError(path + ":" + std::to_string(line) + ": duplicate user_id '" + e.user_id + "'");
    out.records.emplace(e.user_id, e);
    ++rep.retained;
  });
  return out;
}

inline double follower_pairing_fraction(const std::map<std::string, UserProfile>& profiles) {
  std::vector<double> verified;
  std::vector<double> other;
  for (const auto& [_, p] : profiles)
    (p.verified ? verified : other).push_back(static_cast<double>(p.followers_count));
  if (verified.empty() || other.empty()) return 0.0;
  std::sort(verified.begin(), verified.end());
  std::size_t paired = 0;
  for (double f : other) {
    // |f - v| <= 0.02 v  <=>  f / 1.02 <= v <= f / 0.98
    auto it = std::lower_bound(verified.begin(), verified.end(), f / 1.02);
    if (it != verified.end() && *it <= f / 0.98) ++paired;
  }
  return static_cast<double>(paired) / static_cast<double>(other.size());
}

struct AssembledCorpus {
  Corpus corpus;
  IngestionReport report;
};

// Enforces referential integrity (every keyed record belongs to a profile) and
// the date ordering window_start < window_end <= snapshot.
inline AssembledCorpus assemble_corpus(Loaded<std::map<std::string, UserProfile>> profiles,
                                       Loaded<std::map<std::string, std::vector<TweetRecord>>> tweets,
                                       Loaded<std::map<std::string, StatTimeSeries>> series,
                                       Loaded<std::map<std::string, ExternalScores>> external,
                                       const CorpusDates& dates) {
  if (!(dates.window.start < dates.window.end))
    throw DataError("collection window start must precede its end");
  if (dates.window.end > dates.snapshot) throw DataError("collection window must end on or before the snapshot");

  auto check_keys = [&](const auto& m, const char* what) {
    for (const auto& [id, _] : m)
      if (!profiles.records.contains(id))
        throw DataError(std::string("referential integrity: ") + what + " reference unknown user '" + id + "'");
  };
  check_keys(tweets.records, "tweets");
  check_keys(series.records, "time series");
  check_keys(external.records, "external scores");
  for (const auto& [id, p] : profiles.records)
    if (p.created_at > dates.snapshot)
      throw DataError("user '" + id + "' created after the snapshot date");

  AssembledCorpus out;
  auto& c = out.corpus;
  c.snapshot_date = dates.snapshot;
  c.window = dates.window;
  auto& r = out.report;
  r.users = profiles.records.size();
  for (const auto& [id, p] : profiles.records) {
    if (p.verified) ++r.verified_users;
    if (!tweets.records.contains(id)) r.users_without_tweets.push_back(id);
    if (!series.records.contains(id)) r.users_without_series.push_back(id);
    if (!external.records.contains(id)) r.missing_external.push_back(id);
  }
  r.follower_pairing_fraction = follower_pairing_fraction(profiles.records);
  r.tweets_retained = tweets.report.retained;
  r.profiles = std::move(profiles.report);
  r.tweets = std::move(tweets.report);
  r.series = std::move(series.report);
  r.external = std::move(external.report);
  c.profiles = std::move(profiles.records);
  c.tweets = std::move(tweets.records);
  c.series = std::move(series.records);
  c.external = std::move(external.records);
  return out;
}

struct CorpusPaths {
  std::string profiles;
  std::string tweets;
  std::string series;
  std::string external;
};

inline AssembledCorpus load_corpus(const CorpusPaths& paths, const CorpusDates& dates) {
  auto p = load_profiles(paths.profiles, dates.snapshot);
  auto t = load_tweets(paths.tweets, dates.window);
  auto s = load_series(paths.series);
  auto e = load_external(paths.external);
  return assemble_corpus(std::move(p), std::move(t), std::move(s), std::move(e), dates);
}

// ---------------------------------------------------------------------------
// Writers. Output uses the loader schemas, so write followed by load reproduces
// the corpus field-for-field.

inline json to_json(const UserProfile& p) {
  return json{{"user_id", p.user_id},
              {"verified", p.verified},
              {"followers_count", p.followers_count},
              {"friends_count", p.friends_count},
              {"statuses_count", p.statuses_count},
              {"listed_count", p.listed_count},
              {"created_at", format_timestamp(p.created_at)},
              {"lang", p.lang}};
}

inline json to_json(const TweetRecord& t) {
  return json{{"user_id", t.user_id},   {"tweet_id", t.tweet_id},      {"created_at", format_timestamp(t.created_at)},
              {"text", t.text},         {"is_retweet", t.is_retweet}, {"hashtags", t.hashtags},
              {"mentions", t.mentions}, {"urls", t.urls}};
}

inline json to_json(const StatTimeSeries& s) {
  json pts = json::array();
  for (const auto& p : s.points)
    pts.push_back(json{{"timestamp", format_timestamp(p.time)},
                       {"followers", p.followers},
                       {"friends", p.friends},
                       {"statuses", p.statuses}});
  return json{{"user_id", s.user_id}, {"points", std::move(pts)}};
}

inline json to_json(const ExternalScores& e) {
  return json{{"user_id", e.user_id},
              {"liwc_analytic", e.liwc_analytic},
              {"liwc_clout", e.liwc_clout},
              {"liwc_authentic", e.liwc_authentic},
              {"liwc_tone", e.liwc_tone},
              {"cap_score", e.cap_score},
              {"network_score", e.network_score},
              {"content_score", e.content_score},
              {"temporal_score", e.temporal_score}};
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

}  // namespace detail

inline void write_corpus(const Corpus& c, const CorpusPaths& paths) {
  {
    auto out = detail::open_out(paths.profiles);
    for (const auto& [_, p] : c.profiles) out << to_json(p).dump() << '\n';
  }
  {
    auto out = detail::open_out(paths.tweets);
    for (const auto& [_, v] : c.tweets)
      for (const auto& t : v) out << to_json(t).dump() << '\n';
  }
  {
    auto out = detail::open_out(paths.series);
    for (const auto& [_, s] : c.series) out << to_json(s).dump() << '\n';
  }
  {
    auto out = detail::open_out(paths.external);
    for (const auto& [_, e] : c.external) out << to_json(e).dump() << '\n';
  }
}

}  // namespace verilens
