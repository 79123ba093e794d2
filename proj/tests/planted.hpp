#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "verilens/topics.hpp"

// Synthetic documents with known topic structure. Topic k owns word ids
// [k*words, (k+1)*words); every segment (tweet) draws from a single topic.
namespace planted {

using namespace verilens;

inline std::string doc_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u%05zu", i % 100000);
  return buf;
}

inline UserDocument from_segments(std::string id, std::vector<std::vector<std::uint32_t>> segs) {
  UserDocument d;
  d.user_id = std::move(id);
  std::map<std::uint32_t, std::uint32_t> c;
  for (auto& s : segs) {
    std::sort(s.begin(), s.end());
    for (auto w : s) ++c[w];
    d.total += s.size();
  }
  std::sort(segs.begin(), segs.end());
  d.segments = std::move(segs);
  d.counts.assign(c.begin(), c.end());
  d.flagged = d.total < kMinSpanTokens;
  return d;
}

// `docs` documents of `tokens` tokens; mixtures drawn from Dirichlet(mix), tweets of 5..15 tokens.
inline std::vector<UserDocument> lda_corpus(std::size_t topics, std::size_t words, std::size_t docs,
                                            std::size_t tokens, double mix, std::uint64_t seed,
                                            std::vector<std::vector<double>>* theta = nullptr) {
  Rng rng(seed);
  std::vector<UserDocument> out;
  for (std::size_t d = 0; d < docs; ++d) {
    const auto th = rng.dirichlet(topics, mix);
    if (theta) theta->push_back(th);
    std::vector<std::vector<std::uint32_t>> segs;
    std::size_t n = 0;
    while (n < tokens) {
      const std::size_t k = rng.categorical(th, 1.0);
      const std::size_t len = std::min<std::size_t>(5 + rng.index(11), tokens - n);
      std::vector<std::uint32_t> seg;
      for (std::size_t i = 0; i < len; ++i) seg.push_back(static_cast<std::uint32_t>(k * words + rng.index(words)));
      segs.push_back(std::move(seg));
      n += len;
    }
    out.push_back(from_segments(doc_id(d), std::move(segs)));
  }
  return out;
}

// One user's text: tweets drawn uniformly from `components` disjoint unigram components.
inline UserDocument mixture_document(std::size_t components, std::size_t words, std::size_t tokens,
                                     std::uint64_t seed) {
  auto docs = lda_corpus(components, words, 1, tokens, 1e9, seed);
  docs[0].user_id = doc_id(seed);
  return docs[0];
}

inline std::vector<std::string> vocabulary(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "w%04zu", i % 10000);
    v.push_back(buf);
  }
  return v;
}

// Fraction of each learned topic's top-n words inside the planted topic it is matched to,
// maximised over one-to-one matchings (exhaustive; small topic counts only).
inline double best_matched_purity(const TopicModel& m, std::size_t words, std::size_t n) {
  const std::size_t T = m.topics;
  std::vector<std::vector<double>> overlap(T, std::vector<double>(T, 0.0));
  for (std::size_t t = 0; t < T; ++t)
    for (auto w : m.top_words(t, n)) overlap[t][w / words] += 1.0 / static_cast<double>(n);
  std::vector<std::size_t> perm(T);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double worst = 1.0;
    for (std::size_t t = 0; t < T; ++t) worst = std::min(worst, overlap[t][perm[t]]);
    best = std::max(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace planted
