#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "verilens/core.hpp"
#include "verilens/lexicon_data.hpp"

namespace verilens {

// ---------------------------------------------------------------------------
// Entity grammar
//
//   hashtag  '#' followed by one or more word characters [A-Za-z0-9_]
//   mention  '@' followed by one or more word characters
//   url      a whitespace-delimited token starting with http:// or https://
//   retweet  text starting with "RT @"

struct Entities {
  std::vector<std::string> hashtags;
  std::vector<std::string> mentions;
  std::vector<std::string> urls;
  bool is_retweet = false;
};

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_entity_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Letters, digits, apostrophes. Bytes of multi-byte UTF-8 sequences count as letters.
inline bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '\'' || u >= 0x80;
}

inline bool starts_with_url(std::string_view tok) {
  return tok.starts_with("http://") || tok.starts_with("https://");
}

// Splits on ASCII whitespace, returning views into `text`.
inline std::vector<std::string_view> whitespace_tokens(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

// Length of the entity starting at tok[pos] ('#' or '@' plus word chars), 0 if none.
inline std::size_t entity_length(std::string_view tok, std::size_t pos) {
  if (tok[pos] != '#' && tok[pos] != '@') return 0;
  std::size_t j = pos + 1;
  while (j < tok.size() && is_entity_char(tok[j])) ++j;
  return j - pos > 1 ? j - pos : 0;
}

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace detail

inline bool looks_like_retweet(std::string_view text) { return text.starts_with("RT @"); }

inline Entities extract_entities(std::string_view text) {
  Entities e;
  e.is_retweet = looks_like_retweet(text);
  for (auto tok : detail::whitespace_tokens(text)) {
    if (detail::starts_with_url(tok)) {
      e.urls.emplace_back(tok);
      continue;
    }
    for (std::size_t i = 0; i < tok.size();) {
      const std::size_t len = detail::entity_length(tok, i);
      if (len == 0) {
        ++i;
        continue;
      }
      auto& dst = tok[i] == '#' ? e.hashtags : e.mentions;
      dst.emplace_back(tok.substr(i + 1, len - 1));
      i += len;
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Tokenizer

struct TokenizedText {
  std::vector<std::string> words;
  std::size_t sentences = 0;
};

// Words are maximal runs of letters/digits/apostrophes, lowercased, with
// entities, URLs and a leading retweet marker removed. Sentences are
// word-bearing segments separated by runs of '.', '!' or '?'; any non-blank
// text has at least one sentence.
inline TokenizedText tokenize(std::string_view text) {
  TokenizedText out;
  bool any_content = false;
  bool sentence_has_word = false;
  std::string word;

  auto flush_word = [&] {
    std::size_t b = 0, e = word.size();
    while (b < e && word[b] == '\'') ++b;
    while (e > b && word[e - 1] == '\'') --e;
    if (e > b) {
      out.words.emplace_back(word.substr(b, e - b));
      sentence_has_word = true;
    }
    word.clear();
  };
  auto end_sentence = [&] {
    flush_word();
    if (sentence_has_word) ++out.sentences;
    sentence_has_word = false;
  };

  auto tokens = detail::whitespace_tokens(text);
  std::size_t first = 0;
  if (looks_like_retweet(text) && !tokens.empty()) first = 1;  // drop "RT"
  for (std::size_t t = first; t < tokens.size(); ++t) {
    const auto tok = tokens[t];
    any_content = true;
    if (detail::starts_with_url(tok)) {
      flush_word();
      continue;
    }
    for (std::size_t i = 0; i < tok.size();) {
      if (const std::size_t len = detail::entity_length(tok, i)) {
        flush_word();
        i += len;
        continue;
      }
      const char c = tok[i];
      if (c == '.' || c == '!' || c == '?') {
        end_sentence();
      } else if (detail::is_word_char(c)) {
        word.push_back(detail::ascii_lower(c));
      } else {
        flush_word();
      }
      ++i;
    }
    flush_word();
  }
  end_sentence();
  if (any_content && out.sentences == 0) out.sentences = 1;
  return out;
}

// Number of letters in a word: UTF-8 code points that are not digits or apostrophes.
inline std::size_t letter_count(std::string_view word) {
  std::size_t n = 0;
  for (char c : word) {
    const auto u = static_cast<unsigned char>(c);
    if ((u & 0xC0) == 0x80) continue;  // continuation byte
    if (c == '\'' || (c >= '0' && c <= '9')) continue;
    ++n;
  }
  return n;
}

// Decodes UTF-8 into code points; invalid bytes map to distinct private symbols.
inline std::vector<std::uint32_t> code_points(std::string_view s) {
  std::vector<std::uint32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    std::uint32_t cp = b;
    if (b >= 0xF0 && b < 0xF8) {
      len = 4;
      cp = b & 0x07;
    } else if (b >= 0xE0) {
      len = 3;
      cp = b & 0x0F;
    } else if (b >= 0xC0) {
      len = 2;
      cp = b & 0x1F;
    } else if (b >= 0x80) {
      len = 0;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + k]);
      if ((c & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (c & 0x3F);
    }
    if (!ok) {
      out.push_back(0x110000u + b);
      ++i;
    } else {
      out.push_back(cp);
      i += len;
    }
  }
  return out;
}

// Shannon entropy in bits of the code-point distribution.
inline double char_entropy(std::string_view s) {
  const auto cps = code_points(s);
  if (cps.empty()) return 0.0;
  std::unordered_map<std::uint32_t, std::size_t> counts;
  for (auto c : cps) ++counts[c];
  // Accumulate in a fixed order so the result does not depend on hashing.
  std::vector<std::size_t> c;
  c.reserve(counts.size());
  for (auto& [_, n] : counts) c.push_back(n);
  std::sort(c.begin(), c.end());
  const double total = static_cast<double>(cps.size());
  double h = 0.0;
  for (auto n : c) {
    const double p = static_cast<double>(n) / total;
    h -= p * std::log2(p);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Part-of-speech tagging: closed-class lexicon, suffix rules, noun default.

enum class PosTag : std::uint8_t {
  Noun,
  PersonalPronoun,
  ImpersonalPronoun,
  Adjective,
  Adverb,
  Verb,
  AuxiliaryVerb,
  Preposition,
  Article,
};

inline constexpr std::size_t kPosTagCount = 9;

inline constexpr std::array<std::string_view, kPosTagCount> kPosTagNames = {
    "noun",   "personal_pronoun", "impersonal_pronoun", "adjective", "adverb",
    "verb",   "auxiliary_verb",   "preposition",        "article"};

inline std::optional<PosTag> parse_pos_tag(std::string_view name) {
  for (std::size_t i = 0; i < kPosTagCount; ++i)
    if (kPosTagNames[i] == name) return static_cast<PosTag>(i);
  return std::nullopt;
}

namespace detail {

template <typename Fn>
void for_each_tsv_row(std::string_view content, std::string_view source, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": expected token<TAB>value");
    fn(line.substr(0, tab), line.substr(tab + 1), line_no);
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

class PosLexicon {
 public:
  static PosLexicon parse(std::string_view tsv, std::string_view source = "<pos lexicon>") {
    PosLexicon lex;
    detail::for_each_tsv_row(tsv, source, [&](std::string_view tok, std::string_view tag, std::size_t line) {
      auto t = parse_pos_tag(tag);
      if (!t)
        throw DataError(std::string(source) + ":" + std::to_string(line) + ": unknown tag '" +
                        std::string(tag) + "'");
      lex.tags_[std::string(tok)] = *t;
    });
    return lex;
  }
  static PosLexicon load(const std::string& path) { return parse(detail::read_text_file(path), path); }
  static const PosLexicon& builtin() {
    static const PosLexicon lex = parse(lexicon_data::kPosTsv, "<builtin pos>");
    return lex;
  }

  PosTag tag(const std::string& word) const {
    if (auto it = tags_.find(word); it != tags_.end()) return it->second;
    auto suffix = [&](std::string_view s) {
      return word.size() >= s.size() + 3 && std::string_view(word).ends_with(s);
    };
    if (suffix("ly")) return PosTag::Adverb;
    if (suffix("ing") || suffix("ed")) return PosTag::Verb;
    if (suffix("ous") || suffix("ful")) return PosTag::Adjective;
    return PosTag::Noun;
  }

  std::size_t size() const { return tags_.size(); }
  const std::map<std::string, PosTag>& entries() const { return tags_; }

 private:
  std::map<std::string, PosTag> tags_;
};

// ---------------------------------------------------------------------------
// Sentiment scoring with a valence lexicon and two modifier rules: a pending
// negation scales the next lexicon token by kNegationScale, and a pending
// intensifier adds ±kBoost in the direction of its valence.

struct SentimentScore {
  double positive = 0.0;
  double negative = 0.0;
  double neutral = 1.0;
  double compound = 0.0;
  double valence_sum = 0.0;
};

inline constexpr double kValenceBound = 4.0;
inline constexpr double kNegationScale = -0.74;
inline constexpr double kBoost = 0.293;
inline constexpr double kCompoundAlpha = 15.0;

// Rounding would reach +-1 once |s| passes about 1e8; the clamp keeps the interval open.
inline double normalize_compound(double s) {
  constexpr double kOpen = 1.0 - 0x1p-53;
  return std::clamp(s / std::hypot(s, std::sqrt(kCompoundAlpha)), -kOpen, kOpen);
}

class SentimentLexicon {
 public:
  static SentimentLexicon parse(std::string_view tsv, std::string_view source = "<sentiment lexicon>") {
    SentimentLexicon lex;
    detail::for_each_tsv_row(tsv, source, [&](std::string_view tok, std::string_view val, std::size_t line) {
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(std::string(val), &used);
        if (used != val.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw DataError(std::string(source) + ":" + std::to_string(line) + ": bad valence '" +
                        std::string(val) + "'");
      }
      if (!std::isfinite(v) || std::abs(v) > kValenceBound)
        throw DataError(std::string(source) + ":" + std::to_string(line) + ": valence out of [-4,4]");
      lex.valence_[std::string(tok)] = v;
    });
    return lex;
  }
  static SentimentLexicon load(const std::string& path) {
    return parse(detail::read_text_file(path), path);
  }
  static const SentimentLexicon& builtin() {
    static const SentimentLexicon lex = parse(lexicon_data::kSentimentTsv, "<builtin sentiment>");
    return lex;
  }

  std::optional<double> valence(const std::string& w) const {
    if (auto it = valence_.find(w); it != valence_.end()) return it->second;
    return std::nullopt;
  }

  static bool is_negation(std::string_view w) {
    static const std::unordered_set<std::string_view> kNeg = {
        "not", "no", "never", "nor", "neither", "without", "cannot", "nothing", "nobody", "none"};
    return kNeg.contains(w) || w.ends_with("n't");
  }

  // +kBoost for boosters, -kBoost for dampeners, 0 otherwise.
  static double intensifier(std::string_view w) {
    static const std::unordered_set<std::string_view> kUp = {
        "very",       "really", "extremely", "so",     "absolutely", "incredibly", "totally",
        "completely", "super",  "highly",    "truly",  "most",       "especially", "hugely"};
    static const std::unordered_set<std::string_view> kDown = {
        "slightly", "somewhat", "barely", "hardly", "kinda", "marginally", "partly", "little"};
    if (kUp.contains(w)) return kBoost;
    if (kDown.contains(w)) return -kBoost;
    return 0.0;
  }

  SentimentScore score(const std::vector<std::string>& words) const {
    SentimentScore s;
    if (words.empty()) return s;
    double pos_sum = 0.0, neg_sum = 0.0;
    std::size_t neutral = 0;
    bool negate = false;
    double boost = 0.0;
    for (const auto& w : words) {
      if (is_negation(w)) {
        negate = !negate;
        ++neutral;
        continue;
      }
      if (const double b = intensifier(w); b != 0.0) {
        boost += b;
        ++neutral;
        continue;
      }
      auto v = valence(w);
      if (!v) {
        ++neutral;
        continue;
      }
      double adj = *v;
      if (boost != 0.0 && adj != 0.0) adj += (adj > 0 ? boost : -boost);
      if (negate) adj *= kNegationScale;
      negate = false;
      boost = 0.0;
      s.valence_sum += adj;
      if (adj > 0)
        pos_sum += adj + 1.0;
      else if (adj < 0)
        neg_sum += adj - 1.0;
      else
        ++neutral;
    }
    const double total = pos_sum + std::abs(neg_sum) + static_cast<double>(neutral);
    s.positive = pos_sum / total;
    s.negative = std::abs(neg_sum) / total;
    s.neutral = static_cast<double>(neutral) / total;
    s.compound = normalize_compound(s.valence_sum);
    return s;
  }

  std::size_t size() const { return valence_.size(); }
  const std::map<std::string, double>& entries() const { return valence_; }

 private:
  std::map<std::string, double> valence_;
};

// ---------------------------------------------------------------------------

class StopwordList {
 public:
  static StopwordList parse(std::string_view text) {
    StopwordList s;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      while (!line.empty() && detail::is_space(line.back())) line.remove_suffix(1);
      while (!line.empty() && detail::is_space(line.front())) line.remove_prefix(1);
      if (!line.empty() && line.front() != '#') s.words_.emplace(line);
    }
    return s;
  }
  static StopwordList load(const std::string& path) { return parse(detail::read_text_file(path)); }
  static const StopwordList& builtin() {
    static const StopwordList s = parse(lexicon_data::kStopwords);
    return s;
  }
  static StopwordList none() { return {}; }

  bool contains(const std::string& w) const { return words_.contains(w); }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

}  // namespace verilens
