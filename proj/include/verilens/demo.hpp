#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "verilens/core.hpp"
#include "verilens/corpus.hpp"
#include "verilens/text.hpp"
#include "verilens/timeutil.hpp"

namespace verilens {

// Synthetic corpus with class-conditional shifts: verified users have heavier
// listed/follower tails, higher clout, lower automation scores, slightly more
// links and hashtags, and favour the first half of the planted topics.
struct DemoConfig {
  std::size_t users = 2000;
  double verified_fraction = 0.57;
  double separation = 1.0;  // 0 makes the classes indistinguishable
  std::size_t topics = 10;
  std::size_t words_per_topic = 40;
  std::size_t mean_tweets = 20;
  std::uint64_t seed = 1;
  std::string snapshot = "2020-01-01";
  std::string window_start = "2019-01-01";
  std::string window_end = "2019-12-31T23:59:59Z";
};

namespace detail {

// Distinct pronounceable words: three consonant-vowel syllables.
inline std::string demo_word(std::size_t i) {
  static constexpr std::string_view kC = "bdfgklmnprstvz", kV = "aeiou";
  std::string w;
  for (int s = 0; s < 3; ++s) {
    const std::size_t syl = i % (kC.size() * kV.size());
    i /= kC.size() * kV.size();
    w += kC[syl / kV.size()];
    w += kV[syl % kV.size()];
  }
  return w;
}

inline std::int64_t lognormal_count(Rng& rng, double mu, double sigma) {
  return static_cast<std::int64_t>(std::llround(std::exp(rng.normal(mu, sigma))));
}

}  // namespace detail

inline Corpus generate_demo_corpus(const DemoConfig& cfg) {
  if (cfg.users < 4) throw ConfigError("demo: need at least 4 users");
  if (!(cfg.verified_fraction > 0.0 && cfg.verified_fraction < 1.0))
    throw ConfigError("demo: verified fraction must lie in (0,1)");
  if (cfg.topics < 1) throw ConfigError("demo: need at least one topic");
  Corpus c;
  c.snapshot_date = require_timestamp(cfg.snapshot, "snapshot");
  c.window = {require_timestamp(cfg.window_start, "window start"), require_timestamp(cfg.window_end, "window end")};
  const auto window_seconds = seconds_between(c.window.start, c.window.end);

  static const std::vector<std::string> kFiller = {"the", "and", "to", "of", "is", "in", "it", "for", "this", "with"};
  static const std::vector<std::string> kPositive = {"good", "great", "love", "happy", "amazing", "thanks"};
  static const std::vector<std::string> kNegative = {"bad", "sad", "hate", "terrible", "angry", "awful"};
  std::vector<std::vector<std::string>> topic_words(cfg.topics);
  for (std::size_t t = 0; t < cfg.topics; ++t)
    for (std::size_t w = 0; w < cfg.words_per_topic; ++w)
      topic_words[t].push_back(detail::demo_word(t * cfg.words_per_topic + w + 1000));

  // Exact verified count, randomly placed.
  const auto n_verified = static_cast<std::size_t>(std::llround(cfg.verified_fraction * static_cast<double>(cfg.users)));
  std::vector<int> labels(cfg.users, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_verified), 1);
  Rng label_rng(derive_seed(cfg.seed, 0));
  label_rng.shuffle(labels);

  for (std::size_t i = 0; i < cfg.users; ++i) {
    Rng rng(derive_seed(cfg.seed, i + 1));
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "user%05zu", i);
    const std::string id = idbuf;
    const double q = labels[i] ? cfg.separation : 0.0;

    UserProfile p;
    p.user_id = id;
    p.verified = labels[i] == 1;
    const double s = std::min(1.0, cfg.separation);
    p.followers_count = detail::lognormal_count(rng, 6.0 + 1.5 * q, 1.5);
    p.friends_count = detail::lognormal_count(rng, 5.5 - 0.2 * q, 1.0);
    p.listed_count = detail::lognormal_count(rng, 1.0 + 1.4 * q, 1.3);
    // Verified activity sits in a band between two non-verified segments, so no
    // single threshold on it separates the classes. A third segment follows back
    // its verified-like audience.
    const double segment = p.verified || s <= 0.0 ? 1.0 : rng.uniform() / s;
    const bool automated = segment >= 0.3 && segment < 0.7;
    if (p.verified) {
      p.statuses_count = detail::lognormal_count(rng, 7.5 + q, 1.0 - 0.4 * s);
    } else if (automated) {
      p.statuses_count = detail::lognormal_count(rng, 7.5 + 2.5 * cfg.separation, 0.5);
    } else {
      p.statuses_count = detail::lognormal_count(rng, 7.5 - 0.3 * cfg.separation, 1.0 - 0.2 * s);
    }
    if (segment < 0.3) {
      p.followers_count = detail::lognormal_count(rng, 6.0 + 1.5 * cfg.separation, 1.5);
      p.friends_count = std::llround(static_cast<double>(p.followers_count) * rng.uniform(0.9, 1.1));
    }
    const auto age_days = static_cast<std::int64_t>(200.0 + rng.uniform(0.0, 3000.0) + 200.0 * q);
    p.created_at = c.snapshot_date - std::chrono::days{age_days};
    p.lang = "en";
    c.profiles[id] = p;

    if (rng.uniform() < 0.95) {
      auto pct = [&](double mean, double sd) { return std::clamp(rng.normal(mean, sd), 0.0, 100.0); };
      ExternalScores e;
      e.user_id = id;
      e.liwc_analytic = pct(55.0 + 5.0 * q, 15.0);
      e.liwc_clout = pct(40.0 + 15.0 * q, 15.0);
      e.liwc_authentic = pct(50.0 - 5.0 * q, 20.0);
      e.liwc_tone = pct(55.0, 20.0);
      e.cap_score = sigmoid(rng.normal(-1.0 - 0.6 * q, 1.0));
      e.network_score = sigmoid(rng.normal(-0.5 - 0.5 * q, 1.0));
      e.content_score = sigmoid(rng.normal(-0.5 - 0.5 * q, 1.0));
      e.temporal_score = sigmoid(rng.normal(-0.5 - 0.5 * q, 1.0));
      c.external[id] = e;
    }

    // Monthly observations from three months before the window to its end.
    if (rng.uniform() < 0.9) {
      StatTimeSeries s;
      s.user_id = id;
      const double growth = std::exp(rng.normal(-3.5 + 0.6 * q, 0.7));
      const double per_month = std::max(1.0, static_cast<double>(p.statuses_count) / (static_cast<double>(age_days) / 30.0));
      const int months = 15;
      for (int m = 0; m <= months; ++m) {
        StatPoint pt;
        pt.time = c.window.end - std::chrono::days{30 * (months - m)};
        const double back = static_cast<double>(months - m);
        pt.followers = std::llround(static_cast<double>(p.followers_count) / std::pow(1.0 + growth, back));
        pt.friends = std::max<std::int64_t>(0, p.friends_count + static_cast<std::int64_t>(rng.normal(0.0, 3.0)) * (months - m));
        pt.statuses = std::max<std::int64_t>(0, p.statuses_count - std::llround(per_month * back));
        s.points.push_back(pt);
      }
      c.series[id] = s;
    }

    if (rng.uniform() < 0.03) continue;  // profile without tweets
    std::vector<double> shape(cfg.topics);
    for (std::size_t t = 0; t < cfg.topics; ++t) shape[t] = 0.3 * (t < (cfg.topics + 1) / 2 ? 1.0 + q : 1.0);
    std::vector<double> theta(cfg.topics);
    double total = 0.0;
    for (std::size_t t = 0; t < cfg.topics; ++t) total += theta[t] = rng.gamma(shape[t]);
    const std::size_t n_tweets = 1 + rng.index(2 * cfg.mean_tweets);
    std::vector<TweetRecord> tweets;
    for (std::size_t k = 0; k < n_tweets; ++k) {
      TweetRecord t;
      t.user_id = id;
      t.tweet_id = id + "_" + std::to_string(k);
      t.created_at = c.window.start + std::chrono::seconds{static_cast<std::int64_t>(rng.uniform() * static_cast<double>(window_seconds))};
      std::string text;
      if (rng.uniform() < 0.3 - 0.03 * q) text += "RT @user" + std::to_string(rng.index(cfg.users)) + ": ";
      const auto& words = topic_words[rng.categorical(theta, total)];
      const std::size_t n_words = 6 + rng.index(7);
      for (std::size_t w = 0; w < n_words; ++w) {
        const double u = rng.uniform();
        if (u < 0.7) {
          text += words[rng.index(words.size())];
        } else if (u < 0.9) {
          text += kFiller[rng.index(kFiller.size())];
        } else {
          const auto& pool = rng.uniform() < 0.5 + 0.05 * q ? kPositive : kNegative;
          text += pool[rng.index(pool.size())];
        }
        text += (w + 1) % 6 == 0 ? ". " : " ";
      }
      if (rng.uniform() < 0.2 + 0.05 * q) text += "#" + words[rng.index(words.size())] + " ";
      if (rng.uniform() < 0.3) text += "@friend" + std::to_string(rng.index(50)) + " ";
      if (rng.uniform() < 0.15 + 0.05 * q) {
        char url[48];
        std::snprintf(url, sizeof url, "https://ex.co/%08llx", static_cast<unsigned long long>(rng.next() & 0xffffffffULL));
        text += url;
      }
      while (!text.empty() && text.back() == ' ') text.pop_back();
      const auto ent = extract_entities(text);
      t.text = text;
      t.is_retweet = ent.is_retweet;
      t.hashtags = ent.hashtags;
      t.mentions = ent.mentions;
      t.urls = ent.urls;
      tweets.push_back(std::move(t));
    }
    std::sort(tweets.begin(), tweets.end(), [](const TweetRecord& a, const TweetRecord& b) {
      return a.created_at != b.created_at ? a.created_at < b.created_at : a.tweet_id < b.tweet_id;
    });
    c.tweets[id] = std::move(tweets);
  }
  return c;
}

}  // namespace verilens
