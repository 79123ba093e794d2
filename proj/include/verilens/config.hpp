#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include "toml.hpp"
#include "verilens/core.hpp"
#include "verilens/digest.hpp"
#include "verilens/timeutil.hpp"
#include "verilens/topics.hpp"

namespace verilens {

// ---------------------------------------------------------------------------
// Schema. Every key is "section.name" (or "section.sub.name" for nested TOML
// tables) and maps to the environment variable VERILENS_SECTION_NAME.

enum class KeyKind { Integer, Real, Text, Boolean, IntegerList, TextList, Path, Date };

struct KeySpec {
  std::string key;
  KeyKind kind;
  nlohmann::json fallback;  // null: required
  bool semantic = true;     // participates in the config hash
  std::string help;
};

inline const std::vector<KeySpec>& config_schema() {
  using J = nlohmann::json;
  static const std::vector<KeySpec> s = {
      {"input.profiles", KeyKind::Path, nullptr, false, "profiles JSONL"},
      {"input.tweets", KeyKind::Path, nullptr, false, "tweets JSONL"},
      {"input.timeseries", KeyKind::Path, nullptr, false, "account statistics time series JSONL"},
      {"input.external", KeyKind::Path, nullptr, false, "external scores JSONL"},
      {"input.stopwords", KeyKind::Path, "", false, "stopword list (empty: built-in English list)"},
      {"input.sentiment_lexicon", KeyKind::Path, "", false, "token<TAB>valence file (empty: built-in)"},
      {"input.pos_lexicon", KeyKind::Path, "", false, "token<TAB>tag file (empty: built-in)"},
      {"input.snapshot", KeyKind::Date, nullptr, true, "profile snapshot date"},
      {"input.window_start", KeyKind::Date, nullptr, true, "tweet collection window start"},
      {"input.window_end", KeyKind::Date, nullptr, true, "tweet collection window end"},
      {"run.seed", KeyKind::Integer, nullptr, true, "global seed"},
      {"run.output_dir", KeyKind::Path, "out", false, "artifact directory"},
      {"run.threads", KeyKind::Integer, 1, false, "worker thread cap"},
      {"run.test_fraction", KeyKind::Real, 0.2, true, "held-out test share (stratified)"},
      {"run.valid_fraction", KeyKind::Real, 0.1, true, "share of training users kept for early stopping"},
      {"rebalance.methods", KeyKind::TextList, J::array({"none", "adasyn", "smotetomek"}), true,
       "training batches to build (none, adasyn, smotetomek)"},
      {"rebalance.primary", KeyKind::Text, "adasyn", true, "batch used by importance, select, cluster and score"},
      {"rebalance.k", KeyKind::Integer, 5, true, "nearest neighbours for synthesis"},
      {"rebalance.beta", KeyKind::Real, 1.0, true, "desired balance level in (0,1]"},
      {"model.threshold", KeyKind::Real, 0.5, true, "probability threshold for point metrics"},
      {"model.gbdt.max_depth", KeyKind::Integer, 6, true, "tree depth"},
      {"model.gbdt.eta", KeyKind::Real, 0.2, true, "learning rate"},
      {"model.gbdt.n_rounds", KeyKind::Integer, 200, true, "boosting rounds"},
      {"model.gbdt.min_child_weight", KeyKind::Real, 1.0, true, "minimum hessian per leaf"},
      {"model.gbdt.lambda", KeyKind::Real, 1.0, true, "leaf L2 penalty"},
      {"model.gbdt.early_stopping_rounds", KeyKind::Integer, 20, true, "patience on the validation fold (0: off)"},
      {"model.gbdt.max_bins", KeyKind::Integer, 256, true, "histogram bins per feature"},
      {"model.topic_only.max_depth", KeyKind::Integer, 5, true, "tree depth of the topic-only classifier"},
      {"model.topic_only.eta", KeyKind::Real, 0.3, true, "learning rate of the topic-only classifier"},
      {"model.logistic.l2", KeyKind::Real, 1e-4, true, "weight penalty"},
      {"model.logistic.max_epochs", KeyKind::Integer, 5000, true, "optimizer iterations"},
      {"model.logistic.tolerance", KeyKind::Real, 1e-6, true, "gradient-norm stopping tolerance"},
      {"importance.n_repeats", KeyKind::Integer, 100, true, "hyperparameter-varied retrains"},
      {"importance.n_rounds", KeyKind::Integer, 100, true, "boosting rounds per retrain"},
      {"select.n_iter", KeyKind::Integer, 100, true, "shadow-feature iterations"},
      {"select.alpha", KeyKind::Real, 0.05, true, "two-sided binomial test level"},
      {"select.n_rounds", KeyKind::Integer, 100, true, "boosting rounds per iteration"},
      {"select.subsample", KeyKind::Real, 0.5, true, "row fraction per tree in each iteration"},
      {"select.colsample", KeyKind::Real, 0.5, true, "feature fraction per tree in each iteration"},
      {"topics.enabled", KeyKind::Boolean, true, true, "fit topics and append topic features"},
      {"topics.count", KeyKind::Integer, 0, true, "fixed topic count (0: choose among candidates)"},
      {"topics.candidates", KeyKind::IntegerList, J::array({30, 50, 100, 150, 300}), true, "topic counts to compare"},
      // 50/T keeps the summed document-topic prior constant; T/50 and fixed are selectable.
      {"topics.alpha_mode", KeyKind::Text, "50/T", true, "50/T, T/50 or fixed"},
      {"topics.alpha", KeyKind::Real, 0.1, true, "alpha when alpha_mode = fixed"},
      {"topics.beta", KeyKind::Real, 0.01, true, "topic-word prior"},
      {"topics.iterations", KeyKind::Integer, 1000, true, "Gibbs sweeps"},
      {"topics.min_doc_frequency", KeyKind::Integer, 5, true, "vocabulary document-frequency floor"},
      {"span.beta", KeyKind::Real, 0.01, true, "table unigram prior"},
      {"span.concentration", KeyKind::Real, 1.0, true, "new-table concentration"},
      {"span.iterations", KeyKind::Integer, 200, true, "Gibbs sweeps per user"},
      {"cluster.k", KeyKind::Integer, 8, true, "clusters"},
      {"cluster.restarts", KeyKind::Integer, 10, true, "seeded K-Means++ restarts"},
      {"cluster.top_features", KeyKind::Integer, 30, true, "features by mean importance rank"},
      {"cluster.normalization", KeyKind::Text, "zscore", true, "zscore or unit"},
      {"cluster.candidates", KeyKind::IntegerList, J::array({2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}), true,
       "k values for the inertia curve (empty: skip)"},
  };
  return s;
}

inline const KeySpec* find_key(const std::string& key) {
  for (const auto& k : config_schema())
    if (k.key == key) return &k;
  return nullptr;
}

inline std::string env_name(const std::string& key) {
  std::string out = "VERILENS_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

namespace detail {

inline std::string trim(std::string s) {
  auto sp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && sp(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && sp(static_cast<unsigned char>(s[b]))) ++b;
  return s.substr(b);
}

inline std::optional<std::int64_t> parse_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoll(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

inline std::optional<double> parse_real(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

// Text form used by the environment and --set: lists are comma separated,
// optionally in brackets.
inline std::optional<nlohmann::json> parse_text_value(const KeySpec& spec, std::string raw) {
  raw = trim(raw);
  switch (spec.kind) {
    case KeyKind::Integer:
      if (auto v = parse_int(raw)) return nlohmann::json(*v);
      return std::nullopt;
    case KeyKind::Real:
      if (auto v = parse_real(raw)) return nlohmann::json(*v);
      return std::nullopt;
    case KeyKind::Boolean:
      if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return nlohmann::json(true);
      if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return nlohmann::json(false);
      return std::nullopt;
    case KeyKind::Text:
    case KeyKind::Path:
    case KeyKind::Date:
      return nlohmann::json(raw);
    case KeyKind::IntegerList:
    case KeyKind::TextList: {
      if (raw.size() >= 2 && raw.front() == '[' && raw.back() == ']') raw = raw.substr(1, raw.size() - 2);
      nlohmann::json arr = nlohmann::json::array();
      if (trim(raw).empty()) return arr;
      std::size_t pos = 0;
      while (pos <= raw.size()) {
        auto end = raw.find(',', pos);
        if (end == std::string::npos) end = raw.size();
        auto item = trim(raw.substr(pos, end - pos));
        if (item.size() >= 2 && (item.front() == '"' || item.front() == '\'') && item.back() == item.front())
          item = item.substr(1, item.size() - 2);
        if (spec.kind == KeyKind::IntegerList) {
          auto v = parse_int(item);
          if (!v) return std::nullopt;
          arr.push_back(*v);
        } else {
          arr.push_back(item);
        }
        pos = end + 1;
      }
      return arr;
    }
  }
  return std::nullopt;
}

inline std::optional<nlohmann::json> from_toml(const KeySpec& spec, const toml::node& node) {
  switch (spec.kind) {
    case KeyKind::Integer:
      if (auto v = node.value_exact<std::int64_t>()) return nlohmann::json(*v);
      return std::nullopt;
    case KeyKind::Real:
      if (auto v = node.value<double>()) return nlohmann::json(*v);
      return std::nullopt;
    case KeyKind::Boolean:
      if (auto v = node.value_exact<bool>()) return nlohmann::json(*v);
      return std::nullopt;
    case KeyKind::Text:
    case KeyKind::Path:
    case KeyKind::Date:
      if (auto v = node.value_exact<std::string>()) return nlohmann::json(*v);
      if (const auto* d = node.as_date()) {
        std::ostringstream os;
        os << d->get();
        return nlohmann::json(os.str());
      }
      if (const auto* dt = node.as_date_time()) {
        std::ostringstream os;
        os << dt->get();
        return nlohmann::json(os.str());
      }
      return std::nullopt;
    case KeyKind::IntegerList:
    case KeyKind::TextList: {
      const auto* arr = node.as_array();
      if (!arr) return std::nullopt;
      nlohmann::json out = nlohmann::json::array();
      for (const auto& el : *arr) {
        if (spec.kind == KeyKind::IntegerList) {
          auto v = el.value_exact<std::int64_t>();
          if (!v) return std::nullopt;
          out.push_back(*v);
        } else {
          auto v = el.value_exact<std::string>();
          if (!v) return std::nullopt;
          out.push_back(*v);
        }
      }
      return out;
    }
  }
  return std::nullopt;
}

inline const char* kind_name(KeyKind k) {
  switch (k) {
    case KeyKind::Integer: return "an integer";
    case KeyKind::Real: return "a number";
    case KeyKind::Text: return "a string";
    case KeyKind::Boolean: return "a boolean";
    case KeyKind::IntegerList: return "a list of integers";
    case KeyKind::TextList: return "a list of strings";
    case KeyKind::Path: return "a path";
    case KeyKind::Date: return "an ISO-8601 date";
  }
  return "?";
}

}  // namespace detail

// Where configuration values come from, lowest precedence first.
struct ConfigSources {
  std::optional<std::string> file;
  std::map<std::string, std::string> environment;              // VERILENS_* variables
  std::vector<std::pair<std::string, std::string>> overrides;  // key, value from flags
  bool require_inputs = true;                                  // referenced input files must exist
};

// Thrown with every problem found, one per line.
struct ConfigErrors : ConfigError {
  std::vector<std::string> problems;
  explicit ConfigErrors(std::vector<std::string> p) : ConfigError(join(p)), problems(std::move(p)) {}
  static std::string join(const std::vector<std::string>& p) {
    std::string s = "invalid configuration:";
    for (const auto& x : p) s += "\n  - " + x;
    return s;
  }
};

class RunConfig {
 public:
  // Merges defaults, file, environment and overrides; relative paths from the
  // file resolve against its directory, others against the working directory.
  static RunConfig resolve(const ConfigSources& src) {
    RunConfig c;
    std::vector<std::string> problems;
    for (const auto& k : config_schema())
      if (!k.fallback.is_null()) c.set(k, k.fallback, "default", {});

    if (src.file) {
      const std::filesystem::path file = *src.file;
      try {
        const auto tbl = toml::parse_file(file.string());
        c.absorb_toml(tbl, "", file.parent_path(), *src.file, problems);
      } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << *src.file << ": " << e.description() << " (line " << e.source().begin.line << ")";
        throw ConfigErrors({os.str()});
      }
    }
    for (const auto& [name, value] : src.environment) {
      const KeySpec* spec = nullptr;
      for (const auto& k : config_schema())
        if (env_name(k.key) == name) spec = &k;
      if (!spec) {
        problems.push_back("unknown environment variable " + name);
        continue;
      }
      c.set_text(*spec, value, "env " + name, std::filesystem::current_path(), problems);
    }
    for (const auto& [key, value] : src.overrides) {
      const KeySpec* spec = find_key(key);
      if (!spec) {
        problems.push_back("unknown configuration key '" + key + "'");
        continue;
      }
      c.set_text(*spec, value, "flag", std::filesystem::current_path(), problems);
    }
    for (const auto& k : config_schema())
      if (!c.values_.contains(k.key))
        problems.push_back(k.key + " is required (set it in the config file, " + env_name(k.key) + ", or --set " +
                           k.key + "=...)");
    if (problems.empty()) c.check(problems);
    if (src.require_inputs) {
      const auto missing = c.missing_inputs();
      problems.insert(problems.end(), missing.begin(), missing.end());
    }
    if (!problems.empty()) throw ConfigErrors(problems);
    return c;
  }

  // Existence of referenced input files; kept apart so non-reading commands can skip it.
  std::vector<std::string> missing_inputs() const {
    std::vector<std::string> out;
    for (const char* k : {"input.profiles", "input.tweets", "input.timeseries", "input.external", "input.stopwords",
                          "input.sentiment_lexicon", "input.pos_lexicon"})
      if (values_.contains(k) && !text(k).empty() && !std::filesystem::is_regular_file(text(k)))
        out.push_back(std::string(k) + ": no such file " + text(k));
    return out;
  }

  const nlohmann::json& value(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("configuration key '" + key + "' not set");
    return it->second;
  }
  std::int64_t integer(const std::string& key) const { return value(key).get<std::int64_t>(); }
  std::size_t count(const std::string& key) const { return static_cast<std::size_t>(integer(key)); }
  double real(const std::string& key) const { return value(key).get<double>(); }
  bool flag(const std::string& key) const { return value(key).get<bool>(); }
  std::string text(const std::string& key) const { return value(key).get<std::string>(); }
  std::vector<std::size_t> counts(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& v : value(key)) out.push_back(static_cast<std::size_t>(v.get<std::int64_t>()));
    return out;
  }
  std::vector<std::string> texts(const std::string& key) const { return value(key).get<std::vector<std::string>>(); }
  Timestamp date(const std::string& key) const { return require_timestamp(text(key), key); }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("run.seed")); }
  unsigned threads() const { return static_cast<unsigned>(integer("run.threads")); }
  const std::string& origin(const std::string& key) const { return origins_.at(key); }

  void set_override(const std::string& key, const std::string& raw) {
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError("unknown configuration key '" + key + "'");
    std::vector<std::string> problems;
    set_text(*spec, raw, "flag", std::filesystem::current_path(), problems);
    if (problems.empty()) check(problems);
    if (!problems.empty()) throw ConfigErrors(problems);
  }

  // Canonical JSON of the semantic keys; dates are normalised so equivalent
  // spellings hash alike.
  nlohmann::json semantic_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& k : config_schema()) {
      if (!k.semantic) continue;
      const auto& v = value(k.key);
      j[k.key] = k.kind == KeyKind::Date ? nlohmann::json(format_timestamp(date(k.key))) : v;
    }
    return j;
  }
  std::string hash() const { return sha256_hex(semantic_json().dump()); }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }

 private:
  std::map<std::string, nlohmann::json> values_;
  std::map<std::string, std::string> origins_;

  void set(const KeySpec& spec, nlohmann::json v, const std::string& origin, const std::filesystem::path& base) {
    if (spec.kind == KeyKind::Path && !v.get<std::string>().empty()) {
      std::filesystem::path p = v.get<std::string>();
      if (p.is_relative() && !base.empty()) p = base / p;
      v = p.lexically_normal().string();
    }
    values_[spec.key] = std::move(v);
    origins_[spec.key] = origin;
  }

  void set_text(const KeySpec& spec, const std::string& raw, const std::string& origin,
                const std::filesystem::path& base, std::vector<std::string>& problems) {
    auto v = detail::parse_text_value(spec, raw);
    if (!v) {
      problems.push_back(origin + ": " + spec.key + " must be " + detail::kind_name(spec.kind) + ", got '" + raw + "'");
      return;
    }
    set(spec, std::move(*v), origin, base);
  }

  void absorb_toml(const toml::table& tbl, const std::string& prefix, const std::filesystem::path& base,
                   const std::string& file, std::vector<std::string>& problems) {
    for (const auto& [k, node] : tbl) {
      const std::string key = prefix.empty() ? std::string(k.str()) : prefix + "." + std::string(k.str());
      if (const auto* sub = node.as_table()) {
        absorb_toml(*sub, key, base, file, problems);
        continue;
      }
      const KeySpec* spec = find_key(key);
      if (!spec) {
        problems.push_back(file + ": unknown key '" + key + "'");
        continue;
      }
      auto v = detail::from_toml(*spec, node);
      if (!v) {
        problems.push_back(file + ": " + key + " must be " + detail::kind_name(spec->kind));
        continue;
      }
      set(*spec, std::move(*v), file, base);
    }
  }

  void check(std::vector<std::string>& problems) const {
    auto need = [&](bool ok, const std::string& msg) {
      if (!ok) problems.push_back(msg);
    };
    std::map<std::string, Timestamp> dates;
    for (const auto& k : config_schema())
      if (k.kind == KeyKind::Date) {
        if (auto t = parse_timestamp(text(k.key)))
          dates[k.key] = *t;
        else
          problems.push_back(k.key + ": invalid date '" + text(k.key) + "'");
      }
    if (dates.size() == 3) {
      need(dates["input.window_start"] < dates["input.window_end"], "input.window_start must precede input.window_end");
      need(dates["input.window_end"] <= dates["input.snapshot"], "input.window_end must not follow input.snapshot");
    }
    need(integer("run.seed") >= 0, "run.seed must be non-negative");
    need(integer("run.threads") >= 1, "run.threads must be at least 1");
    need(real("run.test_fraction") > 0.0 && real("run.test_fraction") < 1.0, "run.test_fraction must lie in (0,1)");
    need(real("run.valid_fraction") >= 0.0 && real("run.valid_fraction") < 1.0, "run.valid_fraction must lie in [0,1)");
    const auto methods = texts("rebalance.methods");
    static const std::set<std::string> kMethods = {"none", "adasyn", "smotetomek"};
    need(!methods.empty(), "rebalance.methods must not be empty");
    for (const auto& m : methods) need(kMethods.contains(m), "rebalance.methods: unknown method '" + m + "'");
    need(std::set<std::string>(methods.begin(), methods.end()).size() == methods.size(), "rebalance.methods has duplicates");
    need(kMethods.contains(text("rebalance.primary")), "rebalance.primary: unknown method '" + text("rebalance.primary") + "'");
    need(integer("rebalance.k") >= 1, "rebalance.k must be at least 1");
    need(real("rebalance.beta") > 0.0 && real("rebalance.beta") <= 1.0, "rebalance.beta must lie in (0,1]");
    need(real("model.threshold") > 0.0 && real("model.threshold") < 1.0, "model.threshold must lie in (0,1)");
    need(integer("model.gbdt.max_depth") >= 1, "model.gbdt.max_depth must be at least 1");
    need(real("model.gbdt.eta") > 0.0, "model.gbdt.eta must be positive");
    need(integer("model.gbdt.n_rounds") >= 1, "model.gbdt.n_rounds must be at least 1");
    need(real("model.gbdt.min_child_weight") >= 0.0, "model.gbdt.min_child_weight must be non-negative");
    need(real("model.gbdt.lambda") >= 0.0, "model.gbdt.lambda must be non-negative");
    need(integer("model.gbdt.early_stopping_rounds") >= 0, "model.gbdt.early_stopping_rounds must be non-negative");
    need(integer("model.gbdt.max_bins") >= 2 && integer("model.gbdt.max_bins") <= 65535,
         "model.gbdt.max_bins must lie in [2,65535]");
    need(real("model.logistic.l2") >= 0.0, "model.logistic.l2 must be non-negative");
    need(integer("model.logistic.max_epochs") >= 1, "model.logistic.max_epochs must be at least 1");
    need(real("model.logistic.tolerance") > 0.0, "model.logistic.tolerance must be positive");
    need(integer("importance.n_repeats") >= 1, "importance.n_repeats must be at least 1");
    need(integer("importance.n_rounds") >= 1, "importance.n_rounds must be at least 1");
    need(integer("select.n_iter") >= 5, "select.n_iter must be at least 5");
    need(real("select.alpha") > 0.0 && real("select.alpha") < 1.0, "select.alpha must lie in (0,1)");
    need(integer("select.n_rounds") >= 1, "select.n_rounds must be at least 1");
    for (const char* k : {"select.subsample", "select.colsample"})
      need(real(k) > 0.0 && real(k) <= 1.0, std::string(k) + " must lie in (0,1]");
    need(integer("topics.count") >= 0, "topics.count must be non-negative");
    if (integer("topics.count") == 0) need(!value("topics.candidates").empty(), "topics.candidates must not be empty");
    for (const auto& t : value("topics.candidates")) need(t.get<std::int64_t>() >= 1, "topics.candidates must be positive");
    try {
      (void)parse_alpha_mode(text("topics.alpha_mode"));
    } catch (const ConfigError& e) {
      problems.push_back(std::string("topics.alpha_mode: ") + e.what());
    }
    need(integer("model.topic_only.max_depth") >= 1, "model.topic_only.max_depth must be at least 1");
    need(real("model.topic_only.eta") > 0.0, "model.topic_only.eta must be positive");
    need(real("topics.alpha") > 0.0, "topics.alpha must be positive");
    need(real("topics.beta") > 0.0, "topics.beta must be positive");
    need(integer("topics.iterations") >= 1, "topics.iterations must be at least 1");
    need(integer("topics.min_doc_frequency") >= 1, "topics.min_doc_frequency must be at least 1");
    need(real("span.beta") > 0.0, "span.beta must be positive");
    need(real("span.concentration") > 0.0, "span.concentration must be positive");
    need(integer("span.iterations") >= 2, "span.iterations must be at least 2");
    need(integer("cluster.k") >= 1, "cluster.k must be at least 1");
    need(integer("cluster.restarts") >= 1, "cluster.restarts must be at least 1");
    need(integer("cluster.top_features") >= 1, "cluster.top_features must be at least 1");
    need(text("cluster.normalization") == "zscore" || text("cluster.normalization") == "unit",
         "cluster.normalization must be zscore or unit");
    const auto ks = value("cluster.candidates");
    if (!ks.empty()) {
      bool ascending = ks.size() >= 3;
      for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i].get<std::int64_t>() < 1) ascending = false;
        if (i > 0 && ks[i].get<std::int64_t>() <= ks[i - 1].get<std::int64_t>()) ascending = false;
      }
      need(ascending, "cluster.candidates must be empty or at least three strictly ascending positive values");
    }
  }

};

// Collects VERILENS_* variables from an environ-style array.
inline std::map<std::string, std::string> verilens_environment(char** envp) {
  std::map<std::string, std::string> out;
  for (char** e = envp; e && *e; ++e) {
    std::string_view kv = *e;
    if (!kv.starts_with("VERILENS_")) continue;
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return out;
}

}  // namespace verilens
