#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "verilens/corpus.hpp"
#include "verilens/text.hpp"

namespace verilens {

enum class FeatureFamily : std::uint8_t { Metadata, Content, Temporal, External, Topic };

inline constexpr std::array<std::string_view, 5> kFamilyNames = {"metadata", "content", "temporal", "external",
                                                                 "topic"};

struct FeatureSpec {
  std::string name;
  FeatureFamily family;
  double default_value = 0.0;
  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

// Column names per family, in registry order.
inline const std::vector<std::string>& metadata_feature_names() {
  static const std::vector<std::string> n = {"followers_count", "friends_count", "statuses_count", "listed_count",
                                             "account_age_days"};
  return n;
}

inline const std::vector<std::string>& content_feature_names() {
  static const std::vector<std::string> n = [] {
    std::vector<std::string> v;
    for (auto t : kPosTagNames) v.push_back("pos_count_" + std::string(t));
    for (auto t : kPosTagNames) v.push_back("pos_freq_" + std::string(t));
    for (const char* s : {"avg_words_per_sentence", "avg_words_per_tweet", "char_entropy", "long_word_count",
                          "long_word_proportion", "sentiment_positive", "sentiment_negative",
                          "sentiment_neutral", "sentiment_compound", "hashtag_freq", "retweet_freq",
                          "mention_freq", "url_freq", "hashtag_count", "retweet_count", "mention_count",
                          "url_count"})
      v.emplace_back(s);
    return v;
  }();
  return n;
}

inline const std::vector<std::string>& temporal_feature_names() {
  static const std::vector<std::string> n = {
      "avg_followers",     "avg_friends",       "avg_statuses",      "followers_gain_3m",
      "friends_gain_3m",   "statuses_gain_3m",  "followers_gain_1m", "friends_gain_1m",
      "statuses_gain_1m",  "avg_status_interval_days"};
  return n;
}

inline const std::vector<std::string>& external_feature_names() {
  static const std::vector<std::string> n = {"liwc_analytic", "liwc_clout",    "liwc_authentic", "liwc_tone",
                                             "cap_score",     "network_score", "content_score",  "temporal_score"};
  return n;
}

inline std::string topic_feature_name(std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "topic_%03zu", t);
  return buf;
}

// Ordered, named feature layout shared by every vector produced in a run.
class FeatureRegistry {
 public:
  FeatureRegistry() = default;
  explicit FeatureRegistry(std::vector<FeatureSpec> specs) : specs_(std::move(specs)) {
    for (std::size_t i = 0; i < specs_.size(); ++i)
      if (!index_.emplace(specs_[i].name, i).second) throw DataError("duplicate feature name " + specs_[i].name);
  }

  // Metadata, content, temporal and external blocks, plus `topic_count` topic columns.
  static FeatureRegistry standard(std::size_t topic_count = 0) {
    std::vector<FeatureSpec> s;
    for (const auto& n : metadata_feature_names()) s.push_back({n, FeatureFamily::Metadata, 0.0});
    for (const auto& n : content_feature_names())
      s.push_back({n, FeatureFamily::Content, n == "sentiment_neutral" ? 1.0 : 0.0});
    for (const auto& n : temporal_feature_names()) s.push_back({n, FeatureFamily::Temporal, 0.0});
    for (const auto& n : external_feature_names()) s.push_back({n, FeatureFamily::External, 0.0});
    for (std::size_t t = 0; t < topic_count; ++t)
      s.push_back({topic_feature_name(t), FeatureFamily::Topic, topic_count ? 1.0 / static_cast<double>(topic_count) : 0.0});
    return FeatureRegistry(std::move(s));
  }

  std::size_t size() const { return specs_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return specs_[i]; }
  const std::vector<FeatureSpec>& specs() const { return specs_; }

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index_of(const std::string& name) const {
    auto i = find(name);
    if (!i) throw DataError("unknown feature " + name);
    return *i;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (const auto& s : specs_) n.push_back(s.name);
    return n;
  }

  std::vector<std::size_t> family_columns(FeatureFamily f) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < specs_.size(); ++i)
      if (specs_[i].family == f) idx.push_back(i);
    return idx;
  }

  std::size_t topic_count() const { return family_columns(FeatureFamily::Topic).size(); }

  friend bool operator==(const FeatureRegistry& a, const FeatureRegistry& b) { return a.specs_ == b.specs_; }

 private:
  std::vector<FeatureSpec> specs_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct FeatureVector {
  std::string user_id;
  std::vector<double> values;
  bool label = false;
  std::vector<bool> missing_mask;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// ---------------------------------------------------------------------------
// Metadata

inline std::array<double, 5> metadata_features(const UserProfile& p, Timestamp snapshot) {
  const auto age_s = seconds_between(p.created_at, snapshot);
  const auto age_days = age_s >= 0 ? age_s / kSecondsPerDay : -((-age_s + kSecondsPerDay - 1) / kSecondsPerDay);
  return {static_cast<double>(p.followers_count), static_cast<double>(p.friends_count),
          static_cast<double>(p.statuses_count), static_cast<double>(p.listed_count),
          static_cast<double>(age_days)};
}

// ---------------------------------------------------------------------------
// Content

inline constexpr std::size_t kLongWordLetters = 6;  // long means strictly more letters than this

// Length-weighted user sentiment. Per-tweet scores are weighted by word count;
// users without words are fully neutral.
inline SentimentScore sentiment_scores(const std::vector<TweetRecord>& tweets, const SentimentLexicon& lex) {
  SentimentScore user{0.0, 0.0, 1.0, 0.0, 0.0};
  double weight = 0.0, pos = 0.0, neg = 0.0, neu = 0.0, comp = 0.0;
  for (const auto& t : tweets) {
    const auto tok = tokenize(t.text);
    if (tok.words.empty()) continue;
    const auto s = lex.score(tok.words);
    const double w = static_cast<double>(tok.words.size());
    weight += w;
    pos += w * s.positive;
    neg += w * s.negative;
    neu += w * s.neutral;
    comp += w * s.compound;
  }
  if (weight == 0.0) return user;
  user.positive = pos / weight;
  user.negative = neg / weight;
  user.neutral = neu / weight;
  user.compound = comp / weight;
  return user;
}

struct ContentFeatures {
  std::vector<double> values;  // aligned to content_feature_names()
  bool missing = false;
};

inline ContentFeatures content_features(const std::vector<TweetRecord>& tweets, const PosLexicon& pos_lex,
                                        const SentimentLexicon& sent_lex) {
  ContentFeatures out;
  const auto& names = content_feature_names();
  out.values.assign(names.size(), 0.0);
  if (tweets.empty()) {
    out.values[2 * kPosTagCount + 7] = 1.0;  // sentiment_neutral default
    out.missing = true;
    return out;
  }
  std::array<double, kPosTagCount> pos_counts{};
  double words = 0.0, sentences = 0.0, long_words = 0.0;
  double hashtags = 0.0, retweets = 0.0, mentions = 0.0, urls = 0.0;
  std::string all_text;
  for (const auto& t : tweets) {
    const auto tok = tokenize(t.text);
    for (const auto& w : tok.words) {
      pos_counts[static_cast<std::size_t>(pos_lex.tag(w))] += 1.0;
      if (letter_count(w) > kLongWordLetters) long_words += 1.0;
    }
    words += static_cast<double>(tok.words.size());
    sentences += static_cast<double>(tok.sentences);
    hashtags += static_cast<double>(t.hashtags.size());
    mentions += static_cast<double>(t.mentions.size());
    urls += static_cast<double>(t.urls.size());
    retweets += t.is_retweet ? 1.0 : 0.0;
    all_text += t.text;
  }
  const double n = static_cast<double>(tweets.size());
  auto& v = out.values;
  std::size_t i = 0;
  for (std::size_t k = 0; k < kPosTagCount; ++k) v[i++] = pos_counts[k];
  for (std::size_t k = 0; k < kPosTagCount; ++k) v[i++] = words > 0 ? pos_counts[k] / words : 0.0;
  v[i++] = sentences > 0 ? words / sentences : 0.0;
  v[i++] = words / n;
  v[i++] = char_entropy(all_text);
  v[i++] = long_words;
  v[i++] = words > 0 ? long_words / words : 0.0;
  const auto s = sentiment_scores(tweets, sent_lex);
  v[i++] = s.positive;
  v[i++] = s.negative;
  v[i++] = s.neutral;
  v[i++] = s.compound;
  v[i++] = hashtags / n;
  v[i++] = retweets / n;
  v[i++] = mentions / n;
  v[i++] = urls / n;
  v[i++] = hashtags;
  v[i++] = retweets;
  v[i++] = mentions;
  v[i++] = urls;
  return out;
}

// ---------------------------------------------------------------------------
// Temporal

namespace detail {

// Last observation carried forward; times before the first point take the first value.
inline const StatPoint& locf(const std::vector<StatPoint>& pts, Timestamp t) {
  auto it = std::upper_bound(pts.begin(), pts.end(), t, [](Timestamp x, const StatPoint& p) { return x < p.time; });
  if (it == pts.begin()) return pts.front();
  return *(it - 1);
}

// Time-weighted mean of the step function over [a, b].
template <typename Get>
double step_average(const std::vector<StatPoint>& pts, Timestamp a, Timestamp b, Get get) {
  const double span = static_cast<double>(seconds_between(a, b));
  if (span <= 0) return static_cast<double>(get(locf(pts, b)));
  double acc = 0.0;
  Timestamp cur = a;
  double val = static_cast<double>(get(locf(pts, a)));
  for (const auto& p : pts) {
    if (p.time <= a) continue;
    if (p.time >= b) break;
    acc += val * static_cast<double>(seconds_between(cur, p.time));
    cur = p.time;
    val = static_cast<double>(get(p));
  }
  acc += val * static_cast<double>(seconds_between(cur, b));
  return acc / span;
}

inline double gain_proportion(double v_end, double v_before) {
  const double p = (v_end - v_before) / std::max(v_end, 1.0);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

struct TemporalFeatures {
  std::array<double, 10> values{};
  bool missing = false;
};

inline TemporalFeatures temporal_features(const StatTimeSeries* series, CollectionWindow window) {
  TemporalFeatures out;
  if (series == nullptr || series->points.empty()) {
    out.missing = true;
    return out;
  }
  const auto& pts = series->points;
  auto followers = [](const StatPoint& p) { return p.followers; };
  auto friends = [](const StatPoint& p) { return p.friends; };
  auto statuses = [](const StatPoint& p) { return p.statuses; };
  auto& v = out.values;
  v[0] = detail::step_average(pts, window.start, window.end, followers);
  v[1] = detail::step_average(pts, window.start, window.end, friends);
  v[2] = detail::step_average(pts, window.start, window.end, statuses);
  const auto& end = detail::locf(pts, window.end);
  std::size_t i = 3;
  for (int days : {90, 30}) {
    const auto& before = detail::locf(pts, window.end - std::chrono::days{days});
    v[i++] = detail::gain_proportion(static_cast<double>(end.followers), static_cast<double>(before.followers));
    v[i++] = detail::gain_proportion(static_cast<double>(end.friends), static_cast<double>(before.friends));
    v[i++] = detail::gain_proportion(static_cast<double>(end.statuses), static_cast<double>(before.statuses));
  }
  const double authored =
      std::max<double>(0.0, static_cast<double>(end.statuses - detail::locf(pts, window.start).statuses));
  v[9] = days_between(window.start, window.end) / std::max(authored, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

struct FeatureContext {
  const PosLexicon* pos = &PosLexicon::builtin();
  const SentimentLexicon* sentiment = &SentimentLexicon::builtin();
};

// Per-user topic mixtures; users absent or flagged get a uniform vector and a mask bit.
struct TopicDistributions {
  std::size_t topic_count = 0;
  std::map<std::string, std::vector<double>> theta;
  std::set<std::string> flagged;
};

inline std::array<double, 8> external_values(const ExternalScores& e) {
  return {e.liwc_analytic, e.liwc_clout,    e.liwc_authentic, e.liwc_tone,
          e.cap_score,     e.network_score, e.content_score,  e.temporal_score};
}

// Median of each external score over training users that have scores.
inline std::array<double, 8> external_medians(const Corpus& corpus, const std::set<std::string>& training_users) {
  std::array<std::vector<double>, 8> cols;
  for (const auto& id : training_users) {
    auto it = corpus.external.find(id);
    if (it == corpus.external.end()) continue;
    const auto v = external_values(it->second);
    for (std::size_t k = 0; k < 8; ++k) cols[k].push_back(v[k]);
  }
  std::array<double, 8> med{};
  for (std::size_t k = 0; k < 8; ++k) med[k] = median(cols[k]);
  return med;
}

inline FeatureVector user_features(const Corpus& corpus, const UserProfile& profile, const FeatureRegistry& registry,
                                   const FeatureContext& ctx, const std::array<double, 8>& ext_medians,
                                   const TopicDistributions* topics) {
  const std::size_t base = metadata_feature_names().size() + content_feature_names().size() +
                           temporal_feature_names().size() + external_feature_names().size();
  const std::size_t topic_cols = topics ? topics->topic_count : 0;
  if (registry.size() != base + topic_cols)
    throw DataError("registry/value length mismatch: registry has " + std::to_string(registry.size()) +
                    " columns, features provide " + std::to_string(base + topic_cols));
  FeatureVector fv;
  fv.user_id = profile.user_id;
  fv.label = profile.verified;
  fv.values.reserve(registry.size());
  fv.missing_mask.assign(registry.size(), false);

  auto push_block = [&](auto&& block, bool missing) {
    for (double x : block) {
      if (missing) fv.missing_mask[fv.values.size()] = true;
      fv.values.push_back(x);
    }
  };
  push_block(metadata_features(profile, corpus.snapshot_date), false);
  auto content = content_features(corpus.tweets_of(profile.user_id), *ctx.pos, *ctx.sentiment);
  push_block(content.values, content.missing);
  auto sit = corpus.series.find(profile.user_id);
  auto temporal = temporal_features(sit == corpus.series.end() ? nullptr : &sit->second, corpus.window);
  push_block(temporal.values, temporal.missing);
  if (auto eit = corpus.external.find(profile.user_id); eit != corpus.external.end())
    push_block(external_values(eit->second), false);
  else
    push_block(ext_medians, true);
  if (topics) {
    auto tit = topics->theta.find(profile.user_id);
    const bool missing = tit == topics->theta.end() || topics->flagged.contains(profile.user_id);
    if (!missing && tit->second.size() != topic_cols) throw DataError("registry/value length mismatch in topics");
    if (missing)
      push_block(std::vector<double>(topic_cols, 1.0 / static_cast<double>(topic_cols)), true);
    else
      push_block(tit->second, false);
  }
  return fv;
}

// One vector per profile, ordered by user id. External-score gaps are filled
// with medians over `training_users` and masked.
inline std::vector<FeatureVector> assemble_features(const Corpus& corpus, const FeatureRegistry& registry,
                                                    const std::set<std::string>& training_users,
                                                    const TopicDistributions* topics = nullptr,
                                                    const FeatureContext& ctx = {}, unsigned threads = 1) {
  const auto med = external_medians(corpus, training_users);
  std::vector<const UserProfile*> users;
  for (const auto& [_, p] : corpus.profiles) users.push_back(&p);
  std::vector<FeatureVector> out(users.size());
  parallel_for(users.size(), threads,
               [&](std::size_t i) { out[i] = user_features(corpus, *users[i], registry, ctx, med, topics); });
  return out;
}

// ---------------------------------------------------------------------------
// CSV emission: user_id,label,<registry columns>,mask_<family>... The mask
// columns flag families whose values were imputed or defaulted.

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline constexpr std::array<FeatureFamily, 4> kMaskedFamilies = {FeatureFamily::Content, FeatureFamily::Temporal,
                                                                 FeatureFamily::External, FeatureFamily::Topic};

inline void write_feature_csv(std::ostream& out, const FeatureRegistry& registry,
                              const std::vector<FeatureVector>& vectors) {
  out << "user_id,label";
  for (const auto& s : registry.specs()) out << ',' << s.name;
  for (auto f : kMaskedFamilies) out << ",mask_" << kFamilyNames[static_cast<std::size_t>(f)];
  out << '\n';
  for (const auto& v : vectors) {
    if (v.values.size() != registry.size()) throw DataError("feature vector does not match registry");
    out << v.user_id << ',' << (v.label ? 1 : 0);
    for (double x : v.values) out << ',' << format_double(x);
    for (auto f : kMaskedFamilies) {
      bool m = false;
      for (std::size_t i = 0; i < registry.size(); ++i)
        if (registry[i].family == f && v.missing_mask[i]) m = true;
      out << ',' << (m ? 1 : 0);
    }
    out << '\n';
  }
}

inline void write_feature_csv(const std::string& path, const FeatureRegistry& registry,
                              const std::vector<FeatureVector>& vectors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  write_feature_csv(out, registry, vectors);
}

inline FeatureFamily family_of(const std::string& name) {
  if (name.starts_with("topic_")) return FeatureFamily::Topic;
  static const FeatureRegistry kStd = FeatureRegistry::standard();
  if (auto i = kStd.find(name)) return kStd[*i].family;
  return FeatureFamily::External;
}

struct FeatureTable {
  FeatureRegistry registry;
  std::vector<FeatureVector> vectors;
};

inline FeatureTable read_feature_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty feature file");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "user_id" || header[1] != "label")
    throw DataError(path + ": header must start with user_id,label");
  std::size_t n_mask = 0;
  while (n_mask < header.size() && header[header.size() - 1 - n_mask].starts_with("mask_")) ++n_mask;
  std::vector<FeatureSpec> specs;
  for (std::size_t i = 2; i + n_mask < header.size(); ++i) {
    const auto fam = family_of(header[i]);
    double def = fam == FeatureFamily::Topic ? 0.0 : (header[i] == "sentiment_neutral" ? 1.0 : 0.0);
    specs.push_back({header[i], fam, def});
  }
  std::size_t topics = 0;
  for (auto& s : specs)
    if (s.family == FeatureFamily::Topic) ++topics;
  for (auto& s : specs)
    if (s.family == FeatureFamily::Topic) s.default_value = 1.0 / static_cast<double>(topics);
  FeatureTable table{FeatureRegistry(specs), {}};
  std::vector<FeatureFamily> mask_fams;
  for (std::size_t i = header.size() - n_mask; i < header.size(); ++i) {
    const auto name = header[i].substr(5);
    auto it = std::find(kFamilyNames.begin(), kFamilyNames.end(), name);
    if (it == kFamilyNames.end()) throw DataError(path + ": unknown mask column " + header[i]);
    mask_fams.push_back(static_cast<FeatureFamily>(it - kFamilyNames.begin()));
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " cells");
    FeatureVector v;
    v.user_id = cells[0];
    v.label = cells[1] == "1";
    for (std::size_t i = 2; i + n_mask < cells.size(); ++i) v.values.push_back(std::stod(cells[i]));
    v.missing_mask.assign(specs.size(), false);
    for (std::size_t m = 0; m < n_mask; ++m) {
      if (cells[header.size() - n_mask + m] != "1") continue;
      for (std::size_t i = 0; i < specs.size(); ++i)
        if (specs[i].family == mask_fams[m]) v.missing_mask[i] = true;
    }
    table.vectors.push_back(std::move(v));
  }
  return table;
}

}  // namespace verilens
