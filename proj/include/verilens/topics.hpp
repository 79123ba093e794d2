#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>
#include "verilens/core.hpp"
#include "verilens/corpus.hpp"
#include "verilens/featurize.hpp"
#include "verilens/text.hpp"

namespace verilens {

// Documents with fewer tokens than this get a span of 1 and a low-confidence flag.
inline constexpr std::size_t kMinSpanTokens = 10;

struct VocabConfig {
  std::size_t min_doc_frequency = 5;
  const StopwordList* stopwords = &StopwordList::builtin();
};

// One document per user: the bag of words over all of their tweets. Segments
// keep the per-tweet grouping (sorted ids, sorted segments) for the span estimator.
struct UserDocument {
  std::string user_id;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> counts;  // (word id, count), ascending ids
  std::size_t total = 0;
  std::vector<std::vector<std::uint32_t>> segments;
  bool flagged = false;  // total < kMinSpanTokens

  std::vector<std::uint32_t> tokens() const {
    std::vector<std::uint32_t> out;
    out.reserve(total);
    for (auto [w, c] : counts) out.insert(out.end(), c, w);
    return out;
  }

  friend bool operator==(const UserDocument&, const UserDocument&) = default;
};

struct TopicCorpus {
  std::vector<std::string> vocabulary;  // sorted
  std::vector<UserDocument> docs;       // sorted by user id
};

namespace detail {

inline std::vector<std::string> content_words(const std::string& text, const StopwordList& stop) {
  auto words = tokenize(text).words;
  std::erase_if(words, [&](const std::string& w) { return stop.contains(w); });
  return words;
}

}  // namespace detail

// Tokens with document frequency >= min_doc_frequency among `users`, excluding stopwords.
inline std::vector<std::string> build_vocabulary(const Corpus& corpus, const std::set<std::string>& users,
                                                 const VocabConfig& cfg = {}) {
  std::map<std::string, std::size_t> df;
  for (const auto& id : users) {
    std::set<std::string> seen;
    for (const auto& t : corpus.tweets_of(id))
      for (auto& w : detail::content_words(t.text, *cfg.stopwords)) seen.insert(std::move(w));
    for (const auto& w : seen) ++df[w];
  }
  std::vector<std::string> vocab;
  for (const auto& [w, n] : df)
    if (n >= cfg.min_doc_frequency) vocab.push_back(w);
  if (vocab.empty()) throw DataError("topics: empty vocabulary (min document frequency " +
                                     std::to_string(cfg.min_doc_frequency) + ")");
  return vocab;
}

inline UserDocument make_document(const std::string& user_id, const std::vector<TweetRecord>& tweets,
                                  const std::unordered_map<std::string, std::uint32_t>& index,
                                  const StopwordList& stop) {
  UserDocument doc;
  doc.user_id = user_id;
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& t : tweets) {
    std::vector<std::uint32_t> seg;
    for (const auto& w : detail::content_words(t.text, stop)) {
      auto it = index.find(w);
      if (it == index.end()) continue;
      seg.push_back(it->second);
      ++counts[it->second];
    }
    if (seg.empty()) continue;
    std::sort(seg.begin(), seg.end());
    doc.total += seg.size();
    doc.segments.push_back(std::move(seg));
  }
  std::sort(doc.segments.begin(), doc.segments.end());
  doc.counts.assign(counts.begin(), counts.end());
  doc.flagged = doc.total < kMinSpanTokens;
  return doc;
}

inline std::unordered_map<std::string, std::uint32_t> vocabulary_index(const std::vector<std::string>& vocab) {
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], static_cast<std::uint32_t>(i));
  return index;
}

// Documents for `users` (every profile when null) over a vocabulary fitted on `vocab_users`
// (the same set when null).
inline TopicCorpus build_user_docs(const Corpus& corpus, const VocabConfig& cfg = {},
                                   const std::set<std::string>* users = nullptr,
                                   const std::set<std::string>* vocab_users = nullptr) {
  std::set<std::string> all;
  if (!users) {
    for (const auto& [id, _] : corpus.profiles) all.insert(id);
    users = &all;
  }
  TopicCorpus out;
  out.vocabulary = build_vocabulary(corpus, vocab_users ? *vocab_users : *users, cfg);
  const auto index = vocabulary_index(out.vocabulary);
  for (const auto& id : *users) out.docs.push_back(make_document(id, corpus.tweets_of(id), index, *cfg.stopwords));
  return out;
}

// ---------------------------------------------------------------------------
// Collapsed Gibbs LDA

// fifty_over_t keeps the total prior mass T*alpha fixed at 50.
enum class AlphaMode { FiftyOverT, TOverFifty, Fixed };

inline AlphaMode parse_alpha_mode(const std::string& s) {
  if (s == "50/T" || s == "fifty_over_t") return AlphaMode::FiftyOverT;
  if (s == "T/50" || s == "t_over_fifty") return AlphaMode::TOverFifty;
  if (s == "fixed") return AlphaMode::Fixed;
  throw ConfigError("unknown alpha mode '" + s + "' (expected 50/T, T/50 or fixed)");
}

inline std::string alpha_mode_name(AlphaMode m) {
  switch (m) {
    case AlphaMode::FiftyOverT: return "50/T";
    case AlphaMode::TOverFifty: return "T/50";
    case AlphaMode::Fixed: return "fixed";
  }
  return "?";
}

struct LdaConfig {
  AlphaMode alpha_mode = AlphaMode::FiftyOverT;
  double alpha = 0.1;  // used when alpha_mode == Fixed
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;

  double alpha_for(std::size_t topics) const {
    const double t = static_cast<double>(topics);
    switch (alpha_mode) {
      case AlphaMode::FiftyOverT: return 50.0 / t;
      case AlphaMode::TOverFifty: return t / 50.0;
      case AlphaMode::Fixed: return alpha;
    }
    return alpha;
  }
};

struct LikelihoodPoint {
  std::size_t sweep = 0;
  double per_token = 0.0;
};

struct TopicModel {
  std::size_t topics = 0;
  double alpha = 0.0, beta = 0.0;
  std::vector<std::string> vocabulary;
  std::vector<std::string> doc_ids;
  Matrix phi;    // topics x vocabulary
  Matrix theta;  // docs x topics
  std::vector<std::uint32_t> z;  // token topics, documents concatenated in token order
  std::size_t iterations = 0;
  std::vector<LikelihoodPoint> trace;
  double log_likelihood = 0.0;  // per token, averaged over the final-quarter trace

  std::vector<std::size_t> top_words(std::size_t topic, std::size_t n) const {
    std::vector<std::size_t> idx(phi.cols());
    std::iota(idx.begin(), idx.end(), 0);
    n = std::min(n, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        return phi(topic, a) != phi(topic, b) ? phi(topic, a) > phi(topic, b) : a < b;
                      });
    idx.resize(n);
    return idx;
  }
};

class LdaSampler {
 public:
  LdaSampler(const std::vector<UserDocument>& docs, std::size_t vocab_size, std::size_t topics, double alpha,
             double beta, std::uint64_t seed)
      : V_(vocab_size), T_(topics), alpha_(alpha), beta_(beta), rng_(seed) {
    if (topics == 0) throw ConfigError("lda: topic count must be positive");
    if (docs.empty()) throw DataError("lda: no documents");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("lda: alpha and beta must be positive");
    offsets_.push_back(0);
    for (const auto& d : docs) {
      for (auto [w, c] : d.counts) {
        if (w >= V_) throw DataError("lda: word id out of range in document " + d.user_id);
        words_.insert(words_.end(), c, w);
      }
      offsets_.push_back(words_.size());
    }
    if (words_.empty()) throw DataError("lda: all documents are empty");
    z_.resize(words_.size());
    ndt_.assign(docs.size() * T_, 0);
    ntw_.assign(T_ * V_, 0);
    nt_.assign(T_, 0);
    for (std::size_t d = 0; d + 1 < offsets_.size(); ++d)
      for (std::size_t i = offsets_[d]; i < offsets_[d + 1]; ++i) {
        const auto t = static_cast<std::uint32_t>(rng_.index(T_));
        z_[i] = t;
        ++ndt_[d * T_ + t];
        ++ntw_[t * V_ + words_[i]];
        ++nt_[t];
      }
    prob_.resize(T_);
  }

  void sweep() {
    const double vbeta = static_cast<double>(V_) * beta_;
    for (std::size_t d = 0; d + 1 < offsets_.size(); ++d) {
      std::uint32_t* nd = &ndt_[d * T_];
      for (std::size_t i = offsets_[d]; i < offsets_[d + 1]; ++i) {
        const std::uint32_t w = words_[i];
        std::uint32_t t = z_[i];
        --nd[t];
        --ntw_[t * V_ + w];
        --nt_[t];
        double total = 0.0;
        for (std::size_t k = 0; k < T_; ++k) {
          const double p = (nd[k] + alpha_) * (ntw_[k * V_ + w] + beta_) / (nt_[k] + vbeta);
          prob_[k] = p;
          total += p;
        }
        t = static_cast<std::uint32_t>(rng_.categorical(prob_, total));
        z_[i] = t;
        ++nd[t];
        ++ntw_[t * V_ + w];
        ++nt_[t];
      }
    }
    ++sweeps_;
  }

  // Sum over topics of doc counts equals doc length; topic-word counts sum to topic totals,
  // which equal the summed doc-topic counts.
  bool counts_consistent() const {
    std::vector<std::uint64_t> from_docs(T_, 0);
    for (std::size_t d = 0; d + 1 < offsets_.size(); ++d) {
      std::uint64_t s = 0;
      for (std::size_t t = 0; t < T_; ++t) {
        s += ndt_[d * T_ + t];
        from_docs[t] += ndt_[d * T_ + t];
      }
      if (s != offsets_[d + 1] - offsets_[d]) return false;
    }
    for (std::size_t t = 0; t < T_; ++t) {
      std::uint64_t s = 0;
      for (std::size_t w = 0; w < V_; ++w) s += ntw_[t * V_ + w];
      if (s != nt_[t] || s != from_docs[t]) return false;
    }
    std::vector<std::uint32_t> ndt(ndt_.size(), 0), ntw(ntw_.size(), 0);
    for (std::size_t d = 0; d + 1 < offsets_.size(); ++d)
      for (std::size_t i = offsets_[d]; i < offsets_[d + 1]; ++i) {
        ++ndt[d * T_ + z_[i]];
        ++ntw[z_[i] * V_ + words_[i]];
      }
    return ndt == ndt_ && ntw == ntw_;
  }

  // log p(w | z), topic-word distributions integrated out.
  double log_word_likelihood() const {
    const double vbeta = static_cast<double>(V_) * beta_;
    double ll = static_cast<double>(T_) * (std::lgamma(vbeta) - static_cast<double>(V_) * std::lgamma(beta_));
    const double lg_beta = std::lgamma(beta_);
    for (std::size_t t = 0; t < T_; ++t) {
      for (std::size_t w = 0; w < V_; ++w) {
        const auto n = ntw_[t * V_ + w];
        ll += n ? std::lgamma(n + beta_) : lg_beta;
      }
      ll -= std::lgamma(nt_[t] + vbeta);
    }
    return ll;
  }

  // log p(z), document-topic distributions integrated out.
  double log_assignment_prior() const {
    const double talpha = static_cast<double>(T_) * alpha_;
    const std::size_t D = offsets_.size() - 1;
    double ll = static_cast<double>(D) * (std::lgamma(talpha) - static_cast<double>(T_) * std::lgamma(alpha_));
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t t = 0; t < T_; ++t) ll += std::lgamma(ndt_[d * T_ + t] + alpha_);
      ll -= std::lgamma(static_cast<double>(offsets_[d + 1] - offsets_[d]) + talpha);
    }
    return ll;
  }

  // Joint log p(w, z) per token.
  double log_likelihood_per_token() const {
    return (log_word_likelihood() + log_assignment_prior()) / static_cast<double>(words_.size());
  }

  void accumulate_estimates(Matrix& phi, Matrix& theta) const {
    const double vbeta = static_cast<double>(V_) * beta_, talpha = static_cast<double>(T_) * alpha_;
    for (std::size_t t = 0; t < T_; ++t)
      for (std::size_t w = 0; w < V_; ++w) phi(t, w) += (ntw_[t * V_ + w] + beta_) / (nt_[t] + vbeta);
    for (std::size_t d = 0; d + 1 < offsets_.size(); ++d) {
      const double len = static_cast<double>(offsets_[d + 1] - offsets_[d]);
      for (std::size_t t = 0; t < T_; ++t) theta(d, t) += (ndt_[d * T_ + t] + alpha_) / (len + talpha);
    }
  }

  std::size_t documents() const { return offsets_.size() - 1; }
  std::size_t tokens() const { return words_.size(); }
  std::size_t sweeps() const { return sweeps_; }
  const std::vector<std::uint32_t>& assignments() const { return z_; }
  std::uint32_t doc_topic(std::size_t d, std::size_t t) const { return ndt_[d * T_ + t]; }
  std::uint32_t topic_word(std::size_t t, std::size_t w) const { return ntw_[t * V_ + w]; }
  std::uint32_t topic_total(std::size_t t) const { return nt_[t]; }

 private:
  std::size_t V_, T_;
  double alpha_, beta_;
  Rng rng_;
  std::vector<std::uint32_t> words_, z_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> ndt_, ntw_, nt_;
  std::vector<double> prob_;
  std::size_t sweeps_ = 0;
};

namespace detail {

inline void normalize_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double s = std::accumulate(row.begin(), row.end(), 0.0);
    for (auto& v : row) v /= s;
  }
}

}  // namespace detail

inline constexpr std::size_t kLikelihoodEvery = 10;

// Runs `iterations` sweeps; phi/theta are averaged over the final quarter of sweeps.
// `on_sweep` (optional) sees the sampler after each sweep.
template <typename OnSweep>
TopicModel lda_gibbs(const std::vector<UserDocument>& docs, const std::vector<std::string>& vocabulary,
                     std::size_t topics, const LdaConfig& cfg, OnSweep&& on_sweep) {
  if (topics < 1) throw ConfigError("lda: topic count must be positive");
  if (cfg.iterations < 1) throw ConfigError("lda: iterations must be positive");
  TopicModel m;
  m.topics = topics;
  m.alpha = cfg.alpha_for(topics);
  m.beta = cfg.beta;
  m.vocabulary = vocabulary;
  for (const auto& d : docs) m.doc_ids.push_back(d.user_id);
  m.iterations = cfg.iterations;
  LdaSampler s(docs, vocabulary.size(), topics, m.alpha, m.beta, cfg.seed);
  m.phi = Matrix(topics, vocabulary.size());
  m.theta = Matrix(docs.size(), topics);
  const std::size_t average_from = cfg.iterations - std::max<std::size_t>(1, cfg.iterations / 4);
  std::size_t samples = 0;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    s.sweep();
    on_sweep(s);
    if (s.sweeps() % kLikelihoodEvery == 0 || it + 1 == cfg.iterations)
      m.trace.push_back({s.sweeps(), s.log_likelihood_per_token()});
    if (it >= average_from) {
      s.accumulate_estimates(m.phi, m.theta);
      ++samples;
    }
  }
  detail::normalize_rows(m.phi);
  detail::normalize_rows(m.theta);
  m.z = s.assignments();
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : m.trace)
    if (p.sweep > average_from) {
      sum += p.per_token;
      ++n;
    }
  m.log_likelihood = n ? sum / static_cast<double>(n) : m.trace.back().per_token;
  return m;
}

inline TopicModel lda_gibbs(const std::vector<UserDocument>& docs, const std::vector<std::string>& vocabulary,
                            std::size_t topics, const LdaConfig& cfg) {
  return lda_gibbs(docs, vocabulary, topics, cfg, [](const LdaSampler&) {});
}

struct TopicSelection {
  std::size_t chosen = 0;
  std::vector<std::size_t> candidates;
  std::vector<double> log_likelihood;  // per token, aligned with candidates
  std::vector<TopicModel> models;

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < candidates.size(); ++i)
      rows.push_back({{"topics", candidates[i]},
                      {"alpha", models[i].alpha},
                      {"log_likelihood_per_token", log_likelihood[i]}});
    return {{"chosen", chosen}, {"candidates", rows}};
  }
};

// Fits each candidate (seeded by its topic count) and keeps the highest per-token
// log-likelihood; ties go to the smaller count.
inline TopicSelection select_topic_count(const std::vector<UserDocument>& docs,
                                         const std::vector<std::string>& vocabulary,
                                         std::vector<std::size_t> candidates, const LdaConfig& cfg,
                                         unsigned threads = 1) {
  if (candidates.empty()) throw ConfigError("topics: no candidate topic counts");
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  TopicSelection out;
  out.candidates = candidates;
  out.models.resize(candidates.size());
  parallel_for(candidates.size(), threads, [&](std::size_t i) {
    LdaConfig c = cfg;
    c.seed = derive_seed(cfg.seed, candidates[i]);
    out.models[i] = lda_gibbs(docs, vocabulary, candidates[i], c);
  });
  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.log_likelihood.push_back(out.models[i].log_likelihood);
    if (out.models[i].log_likelihood > out.models[best].log_likelihood) best = i;
  }
  out.chosen = candidates[best];
  return out;
}

// ---------------------------------------------------------------------------
// Per-user topic vectors

inline constexpr std::size_t kFoldInSweeps = 50;

// Theta for a document outside the training set: Gibbs with phi held fixed,
// averaged over the second half of the sweeps.
inline std::vector<double> fold_in(const TopicModel& m, const UserDocument& doc, std::uint64_t seed) {
  const std::size_t T = m.topics;
  const auto tokens = doc.tokens();
  if (tokens.empty()) return std::vector<double>(T, 1.0 / static_cast<double>(T));
  Rng rng(derive_seed(seed, stable_hash(doc.user_id)));
  std::vector<std::uint32_t> z(tokens.size()), nd(T, 0);
  for (auto& t : z) ++nd[t = static_cast<std::uint32_t>(rng.index(T))];
  std::vector<double> prob(T), acc(T, 0.0);
  const double denom = static_cast<double>(tokens.size()) + static_cast<double>(T) * m.alpha;
  for (std::size_t sweep = 0; sweep < kFoldInSweeps; ++sweep) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i] >= m.phi.cols()) throw DataError("fold-in: word id out of range for " + doc.user_id);
      --nd[z[i]];
      double total = 0.0;
      for (std::size_t t = 0; t < T; ++t) total += prob[t] = (nd[t] + m.alpha) * m.phi(t, tokens[i]);
      z[i] = static_cast<std::uint32_t>(rng.categorical(prob, total));
      ++nd[z[i]];
    }
    if (sweep >= kFoldInSweeps / 2)
      for (std::size_t t = 0; t < T; ++t) acc[t] += (nd[t] + m.alpha) / denom;
  }
  const double s = std::accumulate(acc.begin(), acc.end(), 0.0);
  for (auto& v : acc) v /= s;
  return acc;
}

// Training documents get their theta row; others are folded in. Empty documents
// get a uniform vector and are listed in `flagged`.
inline TopicDistributions topic_features(const TopicModel& m, const std::vector<UserDocument>& docs,
                                         std::uint64_t seed = 0, unsigned threads = 1) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < m.doc_ids.size(); ++i) row_of.emplace(m.doc_ids[i], i);
  std::vector<std::vector<double>> rows(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) {
    const auto& d = docs[i];
    auto it = row_of.find(d.user_id);
    if (d.total > 0 && it != row_of.end()) {
      const auto r = m.theta.row(it->second);
      rows[i].assign(r.begin(), r.end());
    } else {
      rows[i] = fold_in(m, d, seed);
    }
  });
  TopicDistributions out;
  out.topic_count = m.topics;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].total == 0) out.flagged.insert(docs[i].user_id);
    out.theta[docs[i].user_id] = std::move(rows[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Topical span: collapsed Gibbs for a Dirichlet-process mixture of unigrams.
// Each tweet is seated at one table; a table is a unigram distribution with a
// symmetric Dirichlet(beta) prior over the vocabulary.

struct SpanConfig {
  double beta = 0.01;
  double concentration = 1.0;
  std::size_t iterations = 200;
  std::size_t initial_tables = 20;
  std::uint64_t seed = 0;
};

struct SpanEstimate {
  std::string user_id;
  std::size_t span = 1;
  bool low_confidence = false;
  std::size_t tokens = 0;
  std::vector<std::size_t> table_trace;  // occupied tables after each sweep
};

inline SpanEstimate topical_span(const UserDocument& doc, std::size_t vocab_size, const SpanConfig& cfg) {
  SpanEstimate est;
  est.user_id = doc.user_id;
  est.tokens = doc.total;
  if (doc.total < kMinSpanTokens) {
    est.low_confidence = true;
    return est;
  }
  if (!(cfg.beta > 0.0) || !(cfg.concentration > 0.0)) throw ConfigError("span: beta and concentration must be positive");
  if (cfg.iterations < 2) throw ConfigError("span: at least 2 iterations required");

  // Local word ids keep table counts dense.
  std::map<std::uint32_t, std::uint32_t> local;
  for (auto [w, _] : doc.counts) local.emplace(w, static_cast<std::uint32_t>(local.size()));
  const std::size_t L = local.size(), S = doc.segments.size();
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> segs(S);  // (local id, count)
  std::vector<std::size_t> seg_len(S);
  for (std::size_t s = 0; s < S; ++s) {
    std::map<std::uint32_t, std::uint32_t> c;
    for (auto w : doc.segments[s]) {
      if (w >= vocab_size) throw DataError("span: word id out of range for " + doc.user_id);
      ++c[local.at(w)];
    }
    segs[s].assign(c.begin(), c.end());
    seg_len[s] = doc.segments[s].size();
  }

  const double beta = cfg.beta, vbeta = static_cast<double>(vocab_size) * beta;
  // Tables are slots; an empty slot is recycled before a new one is opened.
  std::vector<std::vector<std::uint32_t>> nkw;
  std::vector<std::size_t> nk, mk;  // tokens, segments per table
  std::vector<std::size_t> seat(S);
  Rng rng(derive_seed(cfg.seed, stable_hash(doc.user_id)));
  const std::size_t k0 = std::min(S, std::max<std::size_t>(1, cfg.initial_tables));
  nkw.assign(k0, std::vector<std::uint32_t>(L, 0));
  nk.assign(k0, 0);
  mk.assign(k0, 0);
  auto add = [&](std::size_t s, std::size_t k, int sign) {
    for (auto [w, c] : segs[s]) nkw[k][w] = static_cast<std::uint32_t>(static_cast<int>(nkw[k][w]) + sign * static_cast<int>(c));
    nk[k] = static_cast<std::size_t>(static_cast<long>(nk[k]) + sign * static_cast<long>(seg_len[s]));
    mk[k] = static_cast<std::size_t>(static_cast<long>(mk[k]) + sign);
  };
  for (std::size_t s = 0; s < S; ++s) add(s, seat[s] = rng.index(k0), +1);

  // log of the sequential predictive probability of segment s at a table with counts n.
  auto log_pred = [&](std::size_t s, const std::vector<std::uint32_t>* n, std::size_t total) {
    double lp = 0.0;
    for (auto [w, c] : segs[s]) {
      const double base = (n ? (*n)[w] : 0) + beta;
      lp += std::lgamma(base + c) - std::lgamma(base);
    }
    const double tb = static_cast<double>(total) + vbeta;
    lp -= std::lgamma(tb + static_cast<double>(seg_len[s])) - std::lgamma(tb);
    return lp;
  };

  std::vector<double> logw, w;
  std::vector<std::size_t> option;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t s = 0; s < S; ++s) {
      add(s, seat[s], -1);
      logw.clear();
      option.clear();
      std::size_t empty = nk.size();
      for (std::size_t k = 0; k < nk.size(); ++k) {
        if (mk[k] == 0) {
          if (empty == nk.size()) empty = k;
          continue;
        }
        logw.push_back(std::log(static_cast<double>(mk[k])) + log_pred(s, &nkw[k], nk[k]));
        option.push_back(k);
      }
      logw.push_back(std::log(cfg.concentration) + log_pred(s, nullptr, 0));
      option.push_back(empty);
      const double mx = *std::max_element(logw.begin(), logw.end());
      w.resize(logw.size());
      double total = 0.0;
      for (std::size_t i = 0; i < logw.size(); ++i) total += w[i] = std::exp(logw[i] - mx);
      std::size_t k = option[rng.categorical(w, total)];
      if (k == nk.size()) {
        nkw.emplace_back(L, 0);
        nk.push_back(0);
        mk.push_back(0);
      }
      add(s, seat[s] = k, +1);
    }
    est.table_trace.push_back(static_cast<std::size_t>(std::count_if(mk.begin(), mk.end(), [](std::size_t m) { return m > 0; })));
  }
  std::map<std::size_t, std::size_t> freq;
  for (std::size_t i = cfg.iterations / 2; i < cfg.iterations; ++i) ++freq[est.table_trace[i]];
  std::size_t best = 0;
  for (auto [k, n] : freq)
    if (n > best) {
      best = n;
      est.span = k;
    }
  return est;
}

inline std::vector<SpanEstimate> topical_spans(const std::vector<UserDocument>& docs, std::size_t vocab_size,
                                               const SpanConfig& cfg, unsigned threads = 1) {
  std::vector<SpanEstimate> out(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) { out[i] = topical_span(docs[i], vocab_size, cfg); });
  return out;
}

// ---------------------------------------------------------------------------
// Artifacts

inline void write_matrix_csv(const std::string& path, const std::vector<std::string>& header,
                             const std::vector<std::string>& row_names, const std::string& row_label,
                             const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << row_label;
  for (const auto& h : header) out << ',' << h;
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << row_names[r];
    for (double v : m.row(r)) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

inline void write_vocabulary(const std::string& path, const std::vector<std::string>& vocab) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& w : vocab) out << w << '\n';
}

inline std::vector<std::string> read_vocabulary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::vector<std::string> vocab;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) vocab.push_back(line);
  if (vocab.empty()) throw DataError(path + ": empty vocabulary");
  return vocab;
}

inline nlohmann::json top_words_json(const TopicModel& m, std::size_t n = 10) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t t = 0; t < m.topics; ++t) {
    nlohmann::json words = nlohmann::json::array();
    for (auto w : m.top_words(t, n)) words.push_back({{"word", m.vocabulary[w]}, {"probability", m.phi(t, w)}});
    out.push_back({{"topic", topic_feature_name(t)}, {"words", words}});
  }
  return out;
}

inline void write_spans_csv(const std::string& path, const std::vector<SpanEstimate>& spans) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "user_id,span,tokens,low_confidence\n";
  for (const auto& s : spans) out << s.user_id << ',' << s.span << ',' << s.tokens << ',' << (s.low_confidence ? 1 : 0) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace verilens
