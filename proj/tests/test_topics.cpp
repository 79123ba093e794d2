#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "planted.hpp"
#include "test_util.hpp"
#include "verilens/topics.hpp"

using namespace verilens;

namespace {

Corpus tweets_corpus(const std::map<std::string, std::vector<std::string>>& texts) {
  Corpus c;
  for (const auto& [user, list] : texts) {
    c.profiles[user].user_id = user;
    int i = 0;
    for (const auto& t : list) {
      TweetRecord r;
      r.user_id = user;
      r.tweet_id = user + "_" + std::to_string(i++);
      r.text = t;
      c.tweets[user].push_back(r);
    }
  }
  return c;
}

VocabConfig unfiltered() {
  static const StopwordList none = StopwordList::none();
  return {1, &none};
}

double row_sum(std::span<const double> r) { return std::accumulate(r.begin(), r.end(), 0.0); }

}  // namespace

TEST(UserDocs, AggregatesTweetsIntoOneBag) {
  const auto tc = build_user_docs(tweets_corpus({{"u1", {"a b", "b c"}}}), unfiltered());
  ASSERT_EQ(tc.vocabulary, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(tc.docs.size(), 1u);
  const auto& d = tc.docs[0];
  EXPECT_EQ(d.total, 4u);
  EXPECT_EQ(d.counts, (std::vector<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}, {1, 2}, {2, 1}}));
  EXPECT_EQ(d.segments.size(), 2u);
  EXPECT_TRUE(d.flagged);
}

TEST(UserDocs, MinDocumentFrequencyAndStopwords) {
  const auto c = tweets_corpus({{"u1", {"the rare shared"}}, {"u2", {"the shared"}}});
  static const StopwordList stop = StopwordList::parse("the\n");
  const auto tc = build_user_docs(c, {2, &stop});
  EXPECT_EQ(tc.vocabulary, std::vector<std::string>{"shared"});
  EXPECT_EQ(tc.docs[0].total, 1u);
}

TEST(UserDocs, EntitiesAndUrlsExcluded) {
  const auto tc = build_user_docs(tweets_corpus({{"u1", {"RT @bob: Hello #world https://x.co/a there"}}}), unfiltered());
  EXPECT_EQ(tc.vocabulary, (std::vector<std::string>{"hello", "there"}));
}

TEST(UserDocs, TweetOrderIrrelevant) {
  const auto a = build_user_docs(tweets_corpus({{"u1", {"x y z", "y q", "z z w"}}}), unfiltered());
  const auto b = build_user_docs(tweets_corpus({{"u1", {"z z w", "x y z", "y q"}}}), unfiltered());
  EXPECT_EQ(a.docs, b.docs);
}

TEST(UserDocs, EmptyVocabularyRejected) {
  EXPECT_THROW(build_user_docs(tweets_corpus({{"u1", {"the and"}}})), DataError);
}

TEST(UserDocs, UsersWithoutTweetsAreEmptyAndFlagged) {
  auto c = tweets_corpus({{"u1", {"alpha beta gamma"}}});
  c.profiles["u2"].user_id = "u2";
  const auto tc = build_user_docs(c, unfiltered());
  ASSERT_EQ(tc.docs.size(), 2u);
  EXPECT_EQ(tc.docs[1].total, 0u);
  EXPECT_TRUE(tc.docs[1].flagged);
}

TEST(Lda, RecoversTwoDisjointTopics) {
  const auto docs = planted::lda_corpus(2, 25, 100, 80, 0.5, 11);
  LdaConfig cfg;
  cfg.iterations = 200;
  cfg.seed = 3;
  const auto m = lda_gibbs(docs, planted::vocabulary(50), 2, cfg);
  EXPECT_GE(planted::best_matched_purity(m, 25, 10), 0.9);
}

TEST(Lda, SingleTopicIsSmoothedWordFrequency) {
  const auto docs = planted::lda_corpus(3, 10, 20, 30, 1.0, 5);
  LdaConfig cfg;
  cfg.iterations = 8;
  const auto m = lda_gibbs(docs, planted::vocabulary(30), 1, cfg);
  std::vector<double> freq(30, 0.0);
  double n = 0;
  for (const auto& d : docs)
    for (auto [w, c] : d.counts) {
      freq[w] += c;
      n += c;
    }
  for (std::size_t w = 0; w < 30; ++w) EXPECT_NEAR(m.phi(0, w), (freq[w] + cfg.beta) / (n + 30 * cfg.beta), 1e-12);
  for (std::size_t d = 0; d < docs.size(); ++d) EXPECT_DOUBLE_EQ(m.theta(d, 0), 1.0);
}

TEST(Lda, LikelihoodTrendsUpward) {
  const auto docs = planted::lda_corpus(5, 20, 80, 60, 0.2, 21);
  LdaConfig cfg;
  cfg.iterations = 300;
  cfg.seed = 2;
  const auto m = lda_gibbs(docs, planted::vocabulary(100), 5, cfg);
  ASSERT_EQ(m.trace.size(), 30u);
  // Means over consecutive 50-sweep windows (5 trace points each).
  std::vector<double> windows;
  for (std::size_t i = 0; i + 5 <= m.trace.size(); i += 5) {
    double s = 0.0;
    for (std::size_t j = i; j < i + 5; ++j) s += m.trace[j].per_token;
    windows.push_back(s / 5.0);
  }
  for (std::size_t i = 1; i < windows.size(); ++i) EXPECT_GE(windows[i], windows[i - 1] - 2e-3) << "window " << i;
  EXPECT_GT(windows.back(), m.trace.front().per_token);
}

TEST(Lda, RowsAreStochastic) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto docs = planted::lda_corpus(4, 15, 30, 40, 0.3, seed);
    LdaConfig cfg;
    cfg.iterations = 20 + seed;
    cfg.seed = seed;
    const auto m = lda_gibbs(docs, planted::vocabulary(60), 2 + seed, cfg);
    for (std::size_t t = 0; t < m.topics; ++t) EXPECT_NEAR(row_sum(m.phi.row(t)), 1.0, 1e-9);
    for (std::size_t d = 0; d < docs.size(); ++d) EXPECT_NEAR(row_sum(m.theta.row(d)), 1.0, 1e-9);
  }
}

TEST(Lda, CountsConsistentAfterEverySweep) {
  const auto docs = planted::lda_corpus(3, 12, 25, 35, 0.5, 8);
  LdaConfig cfg;
  cfg.iterations = 40;
  std::size_t checked = 0;
  lda_gibbs(docs, planted::vocabulary(36), 4, cfg, [&](const LdaSampler& s) {
    EXPECT_TRUE(s.counts_consistent()) << "sweep " << s.sweeps();
    ++checked;
  });
  EXPECT_EQ(checked, 40u);
}

TEST(Lda, DeterministicForSeed) {
  const auto docs = planted::lda_corpus(3, 12, 25, 35, 0.5, 8);
  const auto vocab = planted::vocabulary(36);
  LdaConfig cfg;
  cfg.iterations = 30;
  cfg.seed = 77;
  const auto a = lda_gibbs(docs, vocab, 3, cfg), b = lda_gibbs(docs, vocab, 3, cfg);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.phi, b.phi);
  cfg.seed = 78;
  EXPECT_NE(lda_gibbs(docs, vocab, 3, cfg).z, a.z);
}

TEST(Lda, AlphaModes) {
  LdaConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.alpha_for(100), 0.5);
  cfg.alpha_mode = parse_alpha_mode("T/50");
  EXPECT_DOUBLE_EQ(cfg.alpha_for(100), 2.0);
  cfg.alpha_mode = AlphaMode::Fixed;
  cfg.alpha = 0.3;
  EXPECT_DOUBLE_EQ(cfg.alpha_for(7), 0.3);
  EXPECT_THROW(parse_alpha_mode("auto"), ConfigError);
}

TEST(SelectT, PicksPlantedTenTopics) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto docs = planted::lda_corpus(10, 30, 200, 100, 0.1, seed);
    LdaConfig cfg;
    cfg.iterations = 200;
    cfg.seed = seed;
    const auto sel = select_topic_count(docs, planted::vocabulary(300), {2, 10, 50}, cfg);
    EXPECT_EQ(sel.chosen, 10u) << "seed " << seed;
    ASSERT_EQ(sel.log_likelihood.size(), 3u);
  }
}

TEST(SelectT, SingleCandidate) {
  const auto docs = planted::lda_corpus(2, 10, 10, 20, 1.0, 1);
  LdaConfig cfg;
  cfg.iterations = 10;
  const auto sel = select_topic_count(docs, planted::vocabulary(20), {100}, cfg);
  EXPECT_EQ(sel.chosen, 100u);
  EXPECT_EQ(sel.log_likelihood.size(), 1u);
  EXPECT_TRUE(std::isfinite(sel.log_likelihood[0]));
}

TEST(SelectT, ThreadIndependent) {
  const auto docs = planted::lda_corpus(3, 10, 20, 30, 0.5, 4);
  const auto vocab = planted::vocabulary(30);
  LdaConfig cfg;
  cfg.iterations = 20;
  const auto a = select_topic_count(docs, vocab, {2, 3, 4}, cfg, 1);
  const auto b = select_topic_count(docs, vocab, {4, 2, 3}, cfg, 3);
  EXPECT_EQ(a.log_likelihood, b.log_likelihood);
  EXPECT_EQ(a.chosen, b.chosen);
}

TEST(TopicFeatures, TrainingDocsMatchTheta) {
  const auto docs = planted::lda_corpus(3, 10, 20, 30, 0.5, 4);
  LdaConfig cfg;
  cfg.iterations = 20;
  const auto m = lda_gibbs(docs, planted::vocabulary(30), 3, cfg);
  const auto tf = topic_features(m, docs);
  EXPECT_EQ(tf.topic_count, 3u);
  EXPECT_TRUE(tf.flagged.empty());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& v = tf.theta.at(docs[d].user_id);
    ASSERT_EQ(v.size(), 3u);
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(v[t], m.theta(d, t));
  }
}

TEST(TopicFeatures, FoldInPureTopicUser) {
  const auto docs = planted::lda_corpus(2, 25, 100, 80, 0.5, 11);
  LdaConfig cfg;
  cfg.iterations = 200;
  cfg.seed = 3;
  // A small prior, so 48 tokens can carry the mixture past 0.9.
  cfg.alpha_mode = AlphaMode::Fixed;
  cfg.alpha = 0.5;
  const auto m = lda_gibbs(docs, planted::vocabulary(50), 2, cfg);
  // New user whose words all come from planted topic 1.
  std::vector<std::vector<std::uint32_t>> segs(6);
  Rng rng(9);
  for (auto& s : segs)
    for (int i = 0; i < 8; ++i) s.push_back(static_cast<std::uint32_t>(25 + rng.index(25)));
  const auto fresh = planted::from_segments("new_user", segs);
  const auto tf = topic_features(m, {fresh}, 5);
  const auto& v = tf.theta.at("new_user");
  EXPECT_NEAR(row_sum(v), 1.0, 1e-9);
  EXPECT_GE(std::max(v[0], v[1]), 0.9);
  // The dominant topic is the one whose top words live in planted topic 1.
  const std::size_t dom = v[0] > v[1] ? 0 : 1;
  EXPECT_GE(m.top_words(dom, 1)[0], 25u);
  EXPECT_EQ(topic_features(m, {fresh}, 5).theta.at("new_user"), v);
}

TEST(TopicFeatures, EmptyUserIsUniformAndFlagged) {
  const auto docs = planted::lda_corpus(2, 10, 10, 20, 1.0, 1);
  LdaConfig cfg;
  cfg.iterations = 10;
  const auto m = lda_gibbs(docs, planted::vocabulary(20), 4, cfg);
  UserDocument empty;
  empty.user_id = "ghost";
  const auto tf = topic_features(m, {empty});
  EXPECT_EQ(tf.theta.at("ghost"), std::vector<double>(4, 0.25));
  EXPECT_TRUE(tf.flagged.contains("ghost"));
}

TEST(Span, SingleTokenTypeGivesOne) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto doc = planted::from_segments("same", std::vector<std::vector<std::uint32_t>>(30, {7, 7, 7}));
    SpanConfig cfg;
    cfg.seed = seed;
    const auto e = topical_span(doc, 1000, cfg);
    EXPECT_EQ(e.span, 1u);
    EXPECT_FALSE(e.low_confidence);
    EXPECT_EQ(e.table_trace.size(), cfg.iterations);
  }
}

TEST(Span, FivePlantedComponents) {
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto doc = planted::mixture_document(5, 20, 500, seed);
    ASSERT_EQ(doc.total, 500u);
    SpanConfig cfg;
    cfg.seed = seed;
    const auto e = topical_span(doc, 1000, cfg);
    within += (e.span >= 4 && e.span <= 6) ? 1 : 0;
  }
  EXPECT_GE(within, 40);
}

TEST(Span, ShortDocumentIsLowConfidence) {
  const auto doc = planted::from_segments("short", {{1, 2, 3}, {4, 5}});
  const auto e = topical_span(doc, 10, {});
  EXPECT_EQ(e.span, 1u);
  EXPECT_TRUE(e.low_confidence);
  EXPECT_TRUE(e.table_trace.empty());
}

TEST(Span, DeterministicAndThreadIndependent) {
  std::vector<UserDocument> docs;
  for (std::uint64_t s = 1; s <= 6; ++s) docs.push_back(planted::mixture_document(3, 10, 120, s));
  SpanConfig cfg;
  cfg.iterations = 40;
  const auto a = topical_spans(docs, 100, cfg, 1), b = topical_spans(docs, 100, cfg, 3);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    EXPECT_EQ(a[i].table_trace, b[i].table_trace);
    EXPECT_GE(a[i].span, 1u);
  }
}

TEST(TopicArtifacts, VocabularyRoundTripAndTopWords) {
  verilens::testing::TempDir dir("topics");
  const auto vocab = planted::vocabulary(20);
  write_vocabulary(dir.file("vocab.txt"), vocab);
  EXPECT_EQ(read_vocabulary(dir.file("vocab.txt")), vocab);
  const auto docs = planted::lda_corpus(2, 10, 10, 20, 1.0, 1);
  LdaConfig cfg;
  cfg.iterations = 10;
  const auto m = lda_gibbs(docs, vocab, 2, cfg);
  const auto j = top_words_json(m, 3);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["words"].size(), 3u);
  EXPECT_GE(j[0]["words"][0]["probability"].get<double>(), j[0]["words"][1]["probability"].get<double>());
}
