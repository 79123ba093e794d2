#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "verilens/cluster.hpp"
#include "verilens/config.hpp"
#include "verilens/corpus.hpp"
#include "verilens/dataset.hpp"
#include "verilens/digest.hpp"
#include "verilens/featurize.hpp"
#include "verilens/gbdt.hpp"
#include "verilens/importance.hpp"
#include "verilens/logistic.hpp"
#include "verilens/metrics.hpp"
#include "verilens/rebalance.hpp"
#include "verilens/topics.hpp"

namespace verilens {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> s = {"validate", "featurize", "topics", "rebalance", "train", "evaluate",
                                             "importance", "select", "cluster", "span", "score", "report"};
  return s;
}

namespace detail {

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + p.string());
}

inline nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

inline std::uint64_t stage_seed(std::uint64_t seed, std::string_view purpose) {
  return derive_seed(seed, stable_hash(purpose));
}

}  // namespace detail

// Runs pipeline stages against one output directory. Each stage reads earlier
// artifacts from that directory and writes only its own, plus
// manifests/<stage>.json with digests of what it read and wrote.
class Pipeline {
 public:
  using Log = std::function<void(const std::string&)>;

  explicit Pipeline(RunConfig cfg, Log log = {}) : cfg_(std::move(cfg)), log_(std::move(log)) {
    out_ = cfg_.text("run.output_dir");
  }

  const std::filesystem::path& output_dir() const { return out_; }
  const RunConfig& config() const { return cfg_; }

  void run(const std::string& stage) {
    static const std::map<std::string, void (Pipeline::*)()> kStages = {
        {"validate", &Pipeline::validate}, {"featurize", &Pipeline::featurize},  {"topics", &Pipeline::topics},
        {"rebalance", &Pipeline::rebalance}, {"train", &Pipeline::train},        {"evaluate", &Pipeline::evaluate},
        {"importance", &Pipeline::importance}, {"select", &Pipeline::select},    {"cluster", &Pipeline::cluster},
        {"span", &Pipeline::span},           {"score", &Pipeline::score},        {"report", &Pipeline::report}};
    auto it = kStages.find(stage);
    if (it == kStages.end()) throw ConfigError("unknown stage '" + stage + "'");
    std::filesystem::create_directories(out_ / "manifests");
    reads_.clear();
    writes_.clear();
    note("[" + stage + "] start");
    const auto t0 = std::chrono::steady_clock::now();
    (this->*(it->second))();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json m = {{"stage", stage},
                        {"version", kVersion},
                        {"config_hash", cfg_.hash()},
                        {"wall_time_seconds", secs},
                        {"inputs", digests(reads_)},
                        {"outputs", digests(writes_)}};
    detail::write_json(out_ / "manifests" / (stage + ".json"), m);
    note("[" + stage + "] done in " + std::to_string(secs) + " s");
  }

  // Every stage in order, then manifest.json summarizing all of them.
  void run_all() {
    for (const auto& s : pipeline_stages()) run(s);
    nlohmann::json stages = nlohmann::json::object();
    for (const auto& s : pipeline_stages()) {
      auto m = detail::read_json(out_ / "manifests" / (s + ".json"));
      stages[s] = {{"wall_time_seconds", m.at("wall_time_seconds")}, {"outputs", m.at("outputs")}};
    }
    detail::write_json(out_ / "manifest.json", {{"version", kVersion},
                                                 {"config_hash", cfg_.hash()},
                                                 {"config", cfg_.semantic_json()},
                                                 {"stages", stages}});
  }

  // Recomputes every output digest listed in a stage manifest; returns the mismatching names.
  std::vector<std::string> verify_manifest(const std::string& stage) const {
    const auto m = detail::read_json(out_ / "manifests" / (stage + ".json"));
    std::vector<std::string> bad;
    for (const auto& [name, digest] : m.at("outputs").items()) {
      const auto p = out_ / name;
      if (!std::filesystem::exists(p) || sha256_file(p.string()) != digest.get<std::string>()) bad.push_back(name);
    }
    return bad;
  }

 private:
  RunConfig cfg_;
  Log log_;
  std::filesystem::path out_;
  std::set<std::string> reads_, writes_;

  void note(const std::string& s) const {
    if (log_) log_(s);
  }

  nlohmann::json digests(const std::set<std::string>& names) const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& n : names) {
      if (n.starts_with("input:")) {
        j[n] = sha256_file(cfg_.text(n.substr(6)));
      } else {
        j[n] = sha256_file((out_ / n).string());
      }
    }
    return j;
  }

  // Artifact path for reading; a missing file names the stage that writes it.
  std::string need(const std::string& name, const std::string& producer) {
    const auto p = out_ / name;
    if (!std::filesystem::is_regular_file(p)) throw MissingArtifact(name, producer);
    reads_.insert(name);
    return p.string();
  }

  std::string produce(const std::string& name) {
    const auto p = out_ / name;
    std::filesystem::create_directories(p.parent_path());
    writes_.insert(name);
    return p.string();
  }

  std::uint64_t seed_for(std::string_view purpose) const { return detail::stage_seed(cfg_.seed(), purpose); }

  std::vector<std::string> methods() const {
    auto m = cfg_.texts("rebalance.methods");
    if (std::find(m.begin(), m.end(), cfg_.text("rebalance.primary")) == m.end()) m.push_back(cfg_.text("rebalance.primary"));
    return m;
  }

  // --- inputs --------------------------------------------------------------

  AssembledCorpus load_inputs() {
    CorpusPaths paths{cfg_.text("input.profiles"), cfg_.text("input.tweets"), cfg_.text("input.timeseries"),
                      cfg_.text("input.external")};
    for (const char* k : {"input.profiles", "input.tweets", "input.timeseries", "input.external"})
      reads_.insert(std::string("input:") + k);
    CorpusDates dates{cfg_.date("input.snapshot"),
                      {cfg_.date("input.window_start"), cfg_.date("input.window_end")}};
    return load_corpus(paths, dates);
  }

  StopwordList stopwords() {
    if (cfg_.text("input.stopwords").empty()) return StopwordList::builtin();
    reads_.insert("input:input.stopwords");
    return StopwordList::load(cfg_.text("input.stopwords"));
  }

  struct Lexicons {
    PosLexicon pos;
    SentimentLexicon sentiment;
  };

  Lexicons lexicons() {
    Lexicons l{PosLexicon::builtin(), SentimentLexicon::builtin()};
    if (!cfg_.text("input.pos_lexicon").empty()) {
      reads_.insert("input:input.pos_lexicon");
      l.pos = PosLexicon::load(cfg_.text("input.pos_lexicon"));
    }
    if (!cfg_.text("input.sentiment_lexicon").empty()) {
      reads_.insert("input:input.sentiment_lexicon");
      l.sentiment = SentimentLexicon::load(cfg_.text("input.sentiment_lexicon"));
    }
    return l;
  }

  struct SplitTable {
    std::vector<std::string> users;  // sorted
    std::map<std::string, int> label;
    std::set<std::string> train, test;
  };

  SplitTable read_split() {
    const auto path = need("split.csv", "featurize");
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::getline(in, line);
    if (line != "user_id,label,split") throw DataError(path + ": unexpected header");
    SplitTable s;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto c = split_csv_line(line);
      if (c.size() != 3) throw DataError(path + ": ragged row");
      s.users.push_back(c[0]);
      s.label[c[0]] = c[1] == "1";
      (c[2] == "test" ? s.test : s.train).insert(c[0]);
    }
    return s;
  }

  // Base features joined with topic features when topics are enabled.
  FeatureTable joined_features() {
    auto base = read_feature_csv(need("features.csv", "featurize"));
    if (!cfg_.flag("topics.enabled")) return base;
    const auto topic = read_feature_csv(need("topic_features.csv", "topics"));
    std::map<std::string, const FeatureVector*> by_user;
    for (const auto& v : topic.vectors) by_user[v.user_id] = &v;
    auto specs = base.registry.specs();
    for (const auto& s : topic.registry.specs()) specs.push_back(s);
    FeatureTable out{FeatureRegistry(specs), {}};
    for (auto& v : base.vectors) {
      auto it = by_user.find(v.user_id);
      if (it == by_user.end()) throw DataError("topic_features.csv has no row for " + v.user_id + "; rerun topics");
      v.values.insert(v.values.end(), it->second->values.begin(), it->second->values.end());
      v.missing_mask.insert(v.missing_mask.end(), it->second->missing_mask.begin(), it->second->missing_mask.end());
      out.vectors.push_back(std::move(v));
    }
    return out;
  }

  GbdtConfig gbdt_config() const {
    GbdtConfig c;
    c.max_depth = cfg_.count("model.gbdt.max_depth");
    c.eta = cfg_.real("model.gbdt.eta");
    c.n_rounds = cfg_.count("model.gbdt.n_rounds");
    c.min_child_weight = cfg_.real("model.gbdt.min_child_weight");
    c.lambda = cfg_.real("model.gbdt.lambda");
    c.early_stopping_rounds = cfg_.count("model.gbdt.early_stopping_rounds");
    c.max_bins = cfg_.count("model.gbdt.max_bins");
    c.seed = seed_for("gbdt");
    c.threads = cfg_.threads();
    return c;
  }

  LogisticConfig logistic_config() const {
    LogisticConfig c;
    c.l2 = cfg_.real("model.logistic.l2");
    c.max_epochs = cfg_.count("model.logistic.max_epochs");
    c.tolerance = cfg_.real("model.logistic.tolerance");
    return c;
  }

  GbdtConfig scan_booster(const std::string& rounds_key) const {
    GbdtConfig c = default_scan_booster();
    c.n_rounds = cfg_.count(rounds_key);
    c.max_depth = cfg_.count("model.gbdt.max_depth");
    c.eta = cfg_.real("model.gbdt.eta");
    c.lambda = cfg_.real("model.gbdt.lambda");
    c.max_bins = cfg_.count("model.gbdt.max_bins");
    return c;
  }

  static std::vector<std::size_t> topic_columns(const LabeledDataset& ds) {
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < ds.feature_names.size(); ++i)
      if (ds.feature_names[i].starts_with("topic_")) cols.push_back(i);
    return cols;
  }

  // --- stages ----------------------------------------------------------------

  void validate() {
    const auto a = load_inputs();
    detail::write_json(produce("ingestion_report.json"), a.report.to_json());
    note("  " + std::to_string(a.report.users) + " users, " + std::to_string(a.report.verified_users) + " verified, " +
         std::to_string(a.report.tweets_retained) + " tweets");
  }

  void featurize() {
    const auto corpus = load_inputs().corpus;
    std::vector<std::string> users;
    std::vector<int> labels;
    for (const auto& [id, p] : corpus.profiles) {
      users.push_back(id);
      labels.push_back(p.verified ? 1 : 0);
    }
    const auto split = stratified_split(labels, cfg_.real("run.test_fraction"), seed_for("split"));
    std::set<std::string> train;
    for (auto i : split.train) train.insert(users[i]);
    {
      std::ofstream out(produce("split.csv"), std::ios::binary | std::ios::trunc);
      out << "user_id,label,split\n";
      for (std::size_t i = 0; i < users.size(); ++i)
        out << users[i] << ',' << labels[i] << ',' << (train.contains(users[i]) ? "train" : "test") << '\n';
      if (!out) throw IoError("failed writing split.csv");
    }
    const auto lex = lexicons();
    const FeatureContext ctx{&lex.pos, &lex.sentiment};
    const auto vectors = assemble_features(corpus, FeatureRegistry::standard(), train, nullptr, ctx, cfg_.threads());
    write_feature_csv(produce("features.csv"), FeatureRegistry::standard(), vectors);
    note("  " + std::to_string(vectors.size()) + " feature vectors, " + std::to_string(train.size()) + " training users");
  }

  void topics() {
    const auto split = read_split();
    const auto corpus = load_inputs().corpus;
    const auto stop = stopwords();
    VocabConfig vc{cfg_.count("topics.min_doc_frequency"), &stop};
    const std::set<std::string> all(split.users.begin(), split.users.end());
    const auto tc = build_user_docs(corpus, vc, &all, &split.train);
    write_vocabulary(produce("vocabulary.txt"), tc.vocabulary);
    note("  vocabulary of " + std::to_string(tc.vocabulary.size()) + " words");
    if (!cfg_.flag("topics.enabled")) {
      detail::write_json(produce("topic_selection.json"), {{"enabled", false}});
      return;
    }
    std::vector<UserDocument> train_docs;
    for (const auto& d : tc.docs)
      if (split.train.contains(d.user_id) && d.total > 0) train_docs.push_back(d);
    if (train_docs.empty()) throw DataError("topics: no training user has in-vocabulary tokens");

    LdaConfig lc;
    lc.alpha_mode = parse_alpha_mode(cfg_.text("topics.alpha_mode"));
    lc.alpha = cfg_.real("topics.alpha");
    lc.beta = cfg_.real("topics.beta");
    lc.iterations = cfg_.count("topics.iterations");
    lc.seed = seed_for("topics");
    auto candidates = cfg_.counts("topics.candidates");
    if (cfg_.integer("topics.count") > 0) candidates = {cfg_.count("topics.count")};
    auto sel = select_topic_count(train_docs, tc.vocabulary, candidates, lc, cfg_.threads());
    const auto chosen = std::find(sel.candidates.begin(), sel.candidates.end(), sel.chosen) - sel.candidates.begin();
    const TopicModel& model = sel.models[static_cast<std::size_t>(chosen)];
    note("  chose T=" + std::to_string(model.topics) + " (log-likelihood per token " +
         std::to_string(model.log_likelihood) + ")");

    auto selection = sel.to_json();
    selection["enabled"] = true;
    selection["alpha_mode"] = cfg_.text("topics.alpha_mode");
    selection["beta"] = lc.beta;
    selection["iterations"] = lc.iterations;
    selection["training_documents"] = train_docs.size();
    nlohmann::json traces = nlohmann::json::object();
    for (const auto& m : sel.models) {
      nlohmann::json t = nlohmann::json::array();
      for (const auto& p : m.trace) t.push_back({p.sweep, p.per_token});
      traces[std::to_string(m.topics)] = t;
    }
    selection["likelihood_trace"] = traces;
    detail::write_json(produce("topic_selection.json"), selection);

    std::vector<std::string> topic_names, word_header = model.vocabulary;
    for (std::size_t t = 0; t < model.topics; ++t) topic_names.push_back(topic_feature_name(t));
    write_matrix_csv(produce("phi.csv"), word_header, topic_names, "topic", model.phi);
    write_matrix_csv(produce("theta.csv"), topic_names, model.doc_ids, "user_id", model.theta);
    detail::write_json(produce("topics_top_words.json"), top_words_json(model, 10));

    const auto dist = topic_features(model, tc.docs, seed_for("fold-in"), cfg_.threads());
    std::vector<FeatureSpec> specs;
    for (std::size_t t = 0; t < model.topics; ++t)
      specs.push_back({topic_names[t], FeatureFamily::Topic, 1.0 / static_cast<double>(model.topics)});
    const FeatureRegistry reg(specs);
    std::vector<FeatureVector> rows;
    for (const auto& d : tc.docs) {
      FeatureVector v;
      v.user_id = d.user_id;
      v.label = split.label.at(d.user_id) == 1;
      v.values = dist.theta.at(d.user_id);
      v.missing_mask.assign(model.topics, dist.flagged.contains(d.user_id));
      rows.push_back(std::move(v));
    }
    write_feature_csv(produce("topic_features.csv"), reg, rows);
  }

  void rebalance() {
    const auto split = read_split();
    const auto table = joined_features();
    const auto all = to_dataset(table.registry, table.vectors);
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (!split.label.contains(all.row_ids[i])) throw DataError("split.csv has no row for " + all.row_ids[i]);
      (split.test.contains(all.row_ids[i]) ? test_rows : train_rows).push_back(i);
    }
    const auto train_all = all.subset(train_rows);
    std::vector<std::size_t> fit_rows, valid_rows;
    if (cfg_.real("run.valid_fraction") > 0.0) {
      const auto carve = stratified_split(train_all.y, cfg_.real("run.valid_fraction"), seed_for("valid"));
      fit_rows = carve.train;
      valid_rows = carve.test;
    } else {
      fit_rows.resize(train_all.size());
      std::iota(fit_rows.begin(), fit_rows.end(), 0);
    }
    const auto fit = train_all.subset(fit_rows);
    write_dataset_csv(produce("valid.csv"), train_all.subset(valid_rows));
    write_dataset_csv(produce("test.csv"), all.subset(test_rows));

    nlohmann::json report = {{"train_rows", fit.size()},
                             {"valid_rows", valid_rows.size()},
                             {"test_rows", test_rows.size()},
                             {"primary", cfg_.text("rebalance.primary")},
                             {"batches", nlohmann::json::array()}};
    for (const auto& m : methods()) {
      ResampleConfig rc{cfg_.count("rebalance.k"), cfg_.real("rebalance.beta"), seed_for("rebalance:" + m),
                        cfg_.threads()};
      ResampleResult r;
      if (m == "adasyn") {
        r = adasyn(fit, rc);
      } else if (m == "smotetomek") {
        r = smote_tomek(fit, rc);
      } else {
        r.data = fit;
        r.method = "none";
      }
      write_dataset_csv(produce("train_" + m + ".csv"), r.data);
      report["batches"].push_back(r.report());
      note("  " + m + ": " + std::to_string(r.data.count(1)) + " positive / " + std::to_string(r.data.count(0)) +
           " negative rows");
    }
    detail::write_json(produce("rebalance_report.json"), report);
  }

  void train() {
    const auto valid = read_dataset_csv(need("valid.csv", "rebalance"));
    const LabeledDataset* vp = valid.size() > 0 ? &valid : nullptr;
    auto fit_pair = [&](const LabeledDataset& train, const LabeledDataset* v, GbdtConfig gc, const std::string& tag) {
      const auto g = train_gbdt(train, gc, v);
      detail::write_json(produce("models/gbdt_" + tag + ".json"), g.to_json());
      const auto l = train_logistic(train, logistic_config());
      detail::write_json(produce("models/logistic_" + tag + ".json"), l.to_json());
      note("  " + tag + ": " + std::to_string(g.trees.size()) + " trees, logistic " + std::to_string(l.epochs) +
           " epochs");
    };
    for (const auto& m : methods()) fit_pair(read_dataset_csv(need("train_" + m + ".csv", "rebalance")), vp, gbdt_config(), m);
    if (cfg_.flag("topics.enabled")) {
      const auto primary = read_dataset_csv(need("train_" + cfg_.text("rebalance.primary") + ".csv", "rebalance"));
      const auto cols = topic_columns(primary);
      if (cols.empty()) throw DataError("primary training batch has no topic columns; rerun rebalance");
      GbdtConfig gc = gbdt_config();
      gc.max_depth = cfg_.count("model.topic_only.max_depth");
      gc.eta = cfg_.real("model.topic_only.eta");
      const auto tv = valid.select_features(cols);
      fit_pair(primary.select_features(cols), vp ? &tv : nullptr, gc, "topics");
    }
  }

  void evaluate() {
    const auto test = read_dataset_csv(need("test.csv", "rebalance"));
    const double thr = cfg_.real("model.threshold");
    nlohmann::json metrics = {{"threshold", thr}, {"test_rows", test.size()}, {"batches", nlohmann::json::object()}};
    std::vector<std::pair<std::string, std::vector<double>>> columns;
    auto score_pair = [&](const std::string& tag, const LabeledDataset& ds) {
      const auto g = BoostedTreesModel::from_json(detail::read_json(need("models/gbdt_" + tag + ".json", "train")));
      const auto l = LogisticModel::from_json(detail::read_json(need("models/logistic_" + tag + ".json", "train")));
      const auto gs = predict_all(g, ds.X), ls = predict_all(l, ds.X);
      columns.emplace_back("gbdt_" + tag, gs);
      columns.emplace_back("logistic_" + tag, ls);
      return nlohmann::json{{"gbdt", evaluate_scores(gs, ds.y, thr).to_json()},
                            {"logistic", evaluate_scores(ls, ds.y, thr).to_json()}};
    };
    for (const auto& m : methods()) {
      metrics["batches"][m] = score_pair(m, test);
      note("  " + m + ": gbdt AUC " + std::to_string(metrics["batches"][m]["gbdt"]["ROC AUC Score"].get<double>()) +
           ", logistic AUC " + std::to_string(metrics["batches"][m]["logistic"]["ROC AUC Score"].get<double>()));
    }
    if (cfg_.flag("topics.enabled")) metrics["topic_only"] = score_pair("topics", test.select_features(topic_columns(test)));
    detail::write_json(produce("metrics.json"), metrics);
    std::ofstream out(produce("predictions.csv"), std::ios::binary | std::ios::trunc);
    out << "user_id,label";
    for (const auto& [name, _] : columns) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < test.size(); ++r) {
      out << test.row_ids[r] << ',' << test.y[r];
      for (const auto& [_, v] : columns) out << ',' << format_double(v[r]);
      out << '\n';
    }
    if (!out) throw IoError("failed writing predictions.csv");
  }

  LabeledDataset primary_train() {
    return read_dataset_csv(need("train_" + cfg_.text("rebalance.primary") + ".csv", "rebalance"));
  }

  void importance() {
    const auto ds = primary_train();
    ImportanceConfig ic;
    ic.n_repeats = cfg_.count("importance.n_repeats");
    ic.booster = scan_booster("importance.n_rounds");
    ic.seed = seed_for("importance");
    ic.threads = cfg_.threads();
    const auto rep = gini_importance(ds, ic);
    std::ofstream out(produce("importance.csv"), std::ios::binary | std::ios::trunc);
    out << "feature,mean_importance,mean_rank,top1_fraction\n";
    for (const auto& f : rep.ranked)
      out << f.feature << ',' << format_double(f.mean_importance) << ',' << format_double(f.mean_rank) << ','
          << format_double(f.top1_fraction) << '\n';
    if (!out) throw IoError("failed writing importance.csv");
    nlohmann::json draws = nlohmann::json::array();
    for (std::size_t r = 0; r < rep.draws.size(); ++r)
      draws.push_back({{"colsample", rep.draws[r].colsample},
                       {"subsample", rep.draws[r].subsample},
                       {"min_child_weight", rep.draws[r].min_child_weight},
                       {"top_feature", ds.feature_names[rep.top_feature[r]]}});
    detail::write_json(produce("importance.json"),
                       {{"batch", cfg_.text("rebalance.primary")}, {"n_repeats", ic.n_repeats}, {"repeats", draws}});
    note("  top feature: " + rep.ranked.front().feature);
  }

  void select() {
    const auto ds = primary_train();
    SelectionConfig sc;
    sc.n_iter = cfg_.count("select.n_iter");
    sc.alpha = cfg_.real("select.alpha");
    sc.booster = scan_booster("select.n_rounds");
    sc.booster.subsample = cfg_.real("select.subsample");
    sc.booster.colsample = cfg_.real("select.colsample");
    sc.seed = seed_for("select");
    sc.threads = cfg_.threads();
    const auto v = all_relevant_select(ds, sc);
    std::ofstream out(produce("selection.csv"), std::ios::binary | std::ios::trunc);
    out << "feature,mean_importance,mean_rank,status,hits,p_upper,p_lower\n";
    for (const auto& f : v.features)
      out << f.feature << ',' << format_double(f.mean_importance) << ',' << format_double(f.mean_rank) << ','
          << verdict_name(f.status) << ',' << f.hits << ',' << format_double(f.p_upper) << ','
          << format_double(f.p_lower) << '\n';
    if (!out) throw IoError("failed writing selection.csv");
    std::size_t confirmed_topics = 0, topics = 0;
    for (const auto& f : v.features)
      if (f.feature.starts_with("topic_")) {
        ++topics;
        if (f.status == Verdict::Confirmed) ++confirmed_topics;
      }
    detail::write_json(produce("selection.json"), {{"n_iter", v.n_iter},
                                                   {"alpha", v.alpha},
                                                   {"confirmed", v.with_status(Verdict::Confirmed)},
                                                   {"tentative", v.with_status(Verdict::Tentative)},
                                                   {"rejected", v.with_status(Verdict::Rejected)},
                                                   {"topic_features", topics},
                                                   {"confirmed_topic_features", confirmed_topics}});
    note("  " + std::to_string(v.with_status(Verdict::Confirmed).size()) + " confirmed of " +
         std::to_string(v.features.size()));
  }

  std::vector<std::string> top_features_by_rank(std::size_t n) {
    const auto path = need("importance.csv", "importance");
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<double, std::string>> rows;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto c = split_csv_line(line);
      if (c.size() != 4) throw DataError(path + ": ragged row");
      rows.emplace_back(std::stod(c[2]), c[0]);
    }
    std::sort(rows.begin(), rows.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(n, rows.size()); ++i) out.push_back(rows[i].second);
    return out;
  }

  void cluster() {
    const auto split = read_split();
    const auto table = joined_features();
    const auto ds = to_dataset(table.registry, table.vectors);
    const auto model = BoostedTreesModel::from_json(
        detail::read_json(need("models/gbdt_" + cfg_.text("rebalance.primary") + ".json", "train")));
    const auto names = top_features_by_rank(cfg_.count("cluster.top_features"));
    std::vector<std::size_t> cols;
    for (const auto& n : names) {
      auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), n);
      if (it == ds.feature_names.end()) throw DataError("importance.csv names unknown feature " + n + "; rerun importance");
      cols.push_back(static_cast<std::size_t>(it - ds.feature_names.begin()));
    }
    const Matrix raw = ds.X.select_cols(cols);
    const Matrix X = cfg_.text("cluster.normalization") == "unit" ? unit_norm_rows(Standardizer::fit(raw).apply(raw))
                                                                  : Standardizer::fit(raw).apply(raw);
    nlohmann::json curve_json = nullptr;
    const auto ks = cfg_.counts("cluster.candidates");
    if (!ks.empty()) {
      const auto curve = choose_k(X, ks, cfg_.count("cluster.restarts"), seed_for("k-curve"), cfg_.threads());
      curve_json = curve.to_json();
      note("  inertia knee at k=" + std::to_string(curve.recommended) + (curve.clear_knee ? "" : " (no clear knee)"));
    }
    detail::write_json(produce("k_curve.json"), {{"configured_k", cfg_.count("cluster.k")}, {"curve", curve_json}});
    KMeansConfig kc;
    kc.k = cfg_.count("cluster.k");
    kc.restarts = cfg_.count("cluster.restarts");
    kc.seed = seed_for("cluster");
    kc.threads = cfg_.threads();
    const auto res = kmeans(X, kc);
    std::vector<ClusterMember> members;
    for (std::size_t i = 0; i < ds.size(); ++i)
      members.push_back({ds.row_ids[i], res.assignment[i], ds.y[i], model.predict_proba(ds.X.row(i)),
                         split.test.contains(ds.row_ids[i])});
    const auto profiles = characterize(kc.k, members, raw);
    const auto proj = pca2d(X);
    {
      std::ofstream out(produce("clusters.csv"), std::ios::binary | std::ios::trunc);
      out << "user_id,cluster\n";
      for (std::size_t i = 0; i < ds.size(); ++i) out << ds.row_ids[i] << ',' << res.assignment[i] << '\n';
      if (!out) throw IoError("failed writing clusters.csv");
    }
    {
      std::ofstream out(produce("pca2d.csv"), std::ios::binary | std::ios::trunc);
      out << "user_id,pc1,pc2,cluster,label,probability\n";
      for (std::size_t i = 0; i < ds.size(); ++i)
        out << ds.row_ids[i] << ',' << format_double(proj.coords(i, 0)) << ',' << format_double(proj.coords(i, 1))
            << ',' << res.assignment[i] << ',' << ds.y[i] << ',' << format_double(members[i].probability) << '\n';
      if (!out) throw IoError("failed writing pca2d.csv");
    }
    nlohmann::json pj = nlohmann::json::array();
    for (const auto& p : profiles) pj.push_back(p.to_json(names));
    detail::write_json(produce("cluster_profiles.json"), {{"k", kc.k},
                                                          {"features", names},
                                                          {"normalization", cfg_.text("cluster.normalization")},
                                                          {"inertia", res.inertia},
                                                          {"explained_ratio", proj.explained_ratio},
                                                          {"clusters", pj}});
  }

  void span() {
    const auto split = read_split();
    const auto vocab = read_vocabulary(need("vocabulary.txt", "topics"));
    const auto corpus = load_inputs().corpus;
    const auto stop = stopwords();
    const auto index = vocabulary_index(vocab);
    std::vector<UserDocument> docs;
    for (const auto& id : split.users) docs.push_back(make_document(id, corpus.tweets_of(id), index, stop));
    SpanConfig sc;
    sc.beta = cfg_.real("span.beta");
    sc.concentration = cfg_.real("span.concentration");
    sc.iterations = cfg_.count("span.iterations");
    sc.seed = seed_for("span");
    const auto spans = topical_spans(docs, vocab.size(), sc, cfg_.threads());
    write_spans_csv(produce("span.csv"), spans);
    std::map<int, std::map<std::size_t, std::size_t>> hist;
    std::map<int, double> sum;
    std::map<int, std::size_t> n, low;
    for (const auto& s : spans) {
      const int y = split.label.at(s.user_id);
      if (s.low_confidence) {
        ++low[y];
        continue;
      }
      ++hist[y][s.span];
      sum[y] += static_cast<double>(s.span);
      ++n[y];
    }
    nlohmann::json classes = nlohmann::json::object();
    for (int y : {0, 1}) {
      nlohmann::json h = nlohmann::json::object();
      for (const auto& [k, c] : hist[y]) h[std::to_string(k)] = c;
      classes[y ? "verified" : "non_verified"] = {{"users", n[y]},
                                                  {"low_confidence", low[y]},
                                                  {"mean_span", n[y] ? sum[y] / static_cast<double>(n[y]) : 0.0},
                                                  {"histogram", h}};
    }
    detail::write_json(produce("span_summary.json"), classes);
  }

  void score() {
    const auto split = read_split();
    const auto table = joined_features();
    const auto ds = to_dataset(table.registry, table.vectors);
    const auto model = BoostedTreesModel::from_json(
        detail::read_json(need("models/gbdt_" + cfg_.text("rebalance.primary") + ".json", "train")));
    std::ofstream out(produce("scores.csv"), std::ios::binary | std::ios::trunc);
    out << "user_id,label,split,probability\n";
    for (std::size_t i = 0; i < ds.size(); ++i)
      out << ds.row_ids[i] << ',' << ds.y[i] << ',' << (split.test.contains(ds.row_ids[i]) ? "test" : "train") << ','
          << format_double(model.predict_proba(ds.X.row(i))) << '\n';
    if (!out) throw IoError("failed writing scores.csv");
  }

  void report() {
    const auto metrics = detail::read_json(need("metrics.json", "evaluate"));
    const auto clusters = detail::read_json(need("cluster_profiles.json", "cluster"));
    static const std::vector<std::string> kCols = {"Precision", "Recall", "F1-Score", "Accuracy", "ROC AUC Score"};
    auto metric_row = [&](std::ostream& out, const nlohmann::json& m) {
      for (const auto& c : kCols) out << ',' << format_double(m.at(c).get<double>());
      out << ',' << format_double(m.at("macro").at("Precision").get<double>()) << ','
          << format_double(m.at("macro").at("Recall").get<double>()) << ','
          << format_double(m.at("weighted").at("Precision").get<double>()) << ','
          << format_double(m.at("weighted").at("Recall").get<double>()) << '\n';
    };
    const char* kHeader = "Precision,Recall,F1-Score,Accuracy,ROC AUC Score,macro_precision,macro_recall,weighted_precision,weighted_recall\n";
    {
      std::ofstream out(produce("table2.csv"), std::ios::binary | std::ios::trunc);
      out << "rebalance,model," << kHeader;
      for (const auto& [batch, models] : metrics.at("batches").items())
        for (const char* model : {"logistic", "gbdt"}) {
          out << batch << ',' << model;
          metric_row(out, models.at(model));
        }
    }
    {
      std::ofstream out(produce("table3.csv"), std::ios::binary | std::ios::trunc);
      out << "cluster,population,verified_fraction,held_out,Accuracy,ROC AUC Score\n";
      for (const auto& c : clusters.at("clusters")) {
        out << c.at("cluster").get<std::size_t>() << ',' << c.at("population").get<std::size_t>() << ','
            << format_double(c.at("verified_fraction").get<double>()) << ',' << c.at("held_out").get<std::size_t>();
        for (const char* k : {"Accuracy", "ROC AUC Score"})
          out << ',' << (c.at(k).is_null() ? std::string("NA") : format_double(c.at(k).get<double>()));
        out << '\n';
      }
    }
    nlohmann::json bundle = {{"config_hash", cfg_.hash()},
                             {"primary", cfg_.text("rebalance.primary")},
                             {"table2", metrics.at("batches")},
                             {"table3", clusters.at("clusters")}};
    if (metrics.contains("topic_only")) {
      std::ofstream out(produce("table4.csv"), std::ios::binary | std::ios::trunc);
      out << "model," << kHeader;
      for (const char* model : {"logistic", "gbdt"}) {
        out << model;
        metric_row(out, metrics.at("topic_only").at(model));
      }
      bundle["table4"] = metrics.at("topic_only");
    }
    for (const auto& [name, producer] : std::vector<std::pair<std::string, std::string>>{
             {"topic_selection.json", "topics"}, {"selection.json", "select"}, {"span_summary.json", "span"}})
      if (std::filesystem::exists(out_ / name)) bundle[name.substr(0, name.size() - 5)] = detail::read_json(need(name, producer));
    detail::write_json(produce("report.json"), bundle);
  }
};

}  // namespace verilens
