#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "verilens/config.hpp"
#include "verilens/demo.hpp"
#include "verilens/pipeline.hpp"

extern char** environ;

namespace {

using namespace verilens;

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::int64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::string> rebalance;
  std::optional<int> k;
  std::optional<double> beta;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "TOML configuration file");
  cmd->add_option("--set", f.sets, "override a configuration key (key=value), repeatable");
  cmd->add_option("--seed", f.seed, "global seed (run.seed)");
  cmd->add_option("-o,--out", f.out, "output directory (run.output_dir)");
  cmd->add_option("-j,--threads", f.threads, "worker thread cap (run.threads)");
  cmd->add_option("--rebalance", f.rebalance, "primary training batch: none, adasyn or smotetomek");
  cmd->add_option("--k", f.k, "resampler nearest neighbours (rebalance.k)");
  cmd->add_option("--beta", f.beta, "resampler balance level (rebalance.beta)");
}

RunConfig resolve(const CommonFlags& f) {
  ConfigSources src;
  if (!f.config.empty()) {
    if (!std::filesystem::is_regular_file(f.config)) throw ConfigError("config file not found: " + f.config);
    src.file = f.config;
  }
  src.environment = verilens_environment(environ);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
    src.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) src.overrides.emplace_back("run.seed", std::to_string(*f.seed));
  if (f.out) src.overrides.emplace_back("run.output_dir", *f.out);
  if (f.threads) src.overrides.emplace_back("run.threads", std::to_string(*f.threads));
  if (f.rebalance) src.overrides.emplace_back("rebalance.primary", *f.rebalance);
  if (f.k) src.overrides.emplace_back("rebalance.k", std::to_string(*f.k));
  if (f.beta) src.overrides.emplace_back("rebalance.beta", format_double(*f.beta));
  return RunConfig::resolve(src);
}

struct DemoFlags {
  std::string out = "demo";
  DemoConfig cfg;
};

std::string demo_toml(const DemoConfig& d) {
  std::ostringstream os;
  os << "# Demo corpus written by `verilens generate-demo`.\n"
     << "[input]\n"
     << "profiles = \"profiles.jsonl\"\n"
     << "tweets = \"tweets.jsonl\"\n"
     << "timeseries = \"timeseries.jsonl\"\n"
     << "external = \"external_scores.jsonl\"\n"
     << "snapshot = \"" << d.snapshot << "\"\n"
     << "window_start = \"" << d.window_start << "\"\n"
     << "window_end = \"" << d.window_end << "\"\n\n"
     << "[run]\n"
     << "seed = " << d.seed << "\n"
     << "output_dir = \"out\"\n\n"
     << "[topics]\n"
     << "candidates = [5, " << d.topics << ", " << 2 * d.topics << "]\n"
     << "iterations = 200\n"
     << "min_doc_frequency = 5\n";
  return os.str();
}

int generate_demo(const DemoFlags& f) {
  const auto corpus = generate_demo_corpus(f.cfg);
  const std::filesystem::path dir = f.out;
  std::filesystem::create_directories(dir);
  write_corpus(corpus, {(dir / "profiles.jsonl").string(), (dir / "tweets.jsonl").string(),
                        (dir / "timeseries.jsonl").string(), (dir / "external_scores.jsonl").string()});
  std::ofstream toml(dir / "verilens.toml", std::ios::binary | std::ios::trunc);
  toml << demo_toml(f.cfg);
  if (!toml) throw IoError("cannot write " + (dir / "verilens.toml").string());
  std::cerr << "wrote " << f.cfg.users << " users to " << dir.string() << "; run: verilens all --config "
            << (dir / "verilens.toml").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verilens: verification-status analysis pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonFlags common;
  std::vector<std::pair<CLI::App*, std::string>> stage_cmds;
  static const std::map<std::string, std::string> kHelp = {
      {"validate", "load and check the four input files; write ingestion_report.json"},
      {"featurize", "train/test split and base feature matrix"},
      {"topics", "vocabulary, LDA topic model and per-user topic features"},
      {"rebalance", "validation fold and resampled training batches"},
      {"train", "boosted trees and logistic models per batch, plus topic-only models"},
      {"evaluate", "held-out metrics and predictions"},
      {"importance", "gain importance over hyperparameter-varied retrains"},
      {"select", "all-relevant selection against shadow features"},
      {"cluster", "K-Means++ over the top-ranked features with per-cluster profiles"},
      {"span", "per-user topical span"},
      {"score", "per-user verification probability"},
      {"report", "classification, cluster and topic-only tables"},
      {"all", "every stage in order, plus manifest.json"}};
  for (const auto& s : pipeline_stages()) {
    auto* cmd = app.add_subcommand(s, kHelp.at(s));
    add_common(cmd, common);
    stage_cmds.emplace_back(cmd, s);
  }
  auto* all = app.add_subcommand("all", kHelp.at("all"));
  add_common(all, common);
  stage_cmds.emplace_back(all, "all");

  DemoFlags demo;
  auto* gen = app.add_subcommand("generate-demo", "write a synthetic corpus and a matching config file");
  gen->add_option("-o,--out", demo.out, "directory for the corpus")->capture_default_str();
  gen->add_option("--users", demo.cfg.users, "number of users")->capture_default_str();
  gen->add_option("--verified-fraction", demo.cfg.verified_fraction, "share of verified users")->capture_default_str();
  gen->add_option("--separation", demo.cfg.separation, "class-conditional feature shift (0: none)")->capture_default_str();
  gen->add_option("--topics", demo.cfg.topics, "planted topic count")->capture_default_str();
  gen->add_option("--seed", demo.cfg.seed, "generator seed")->capture_default_str();

  bool print_config = false;
  for (auto& [cmd, _] : stage_cmds) cmd->add_flag("--print-config", print_config, "print the resolved configuration and its hash, then exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (gen->parsed()) return generate_demo(demo);
    for (auto& [cmd, stage] : stage_cmds) {
      if (!cmd->parsed()) continue;
      auto cfg = resolve(common);
      if (print_config) {
        std::cout << nlohmann::json{{"config", cfg.to_json()}, {"config_hash", cfg.hash()}}.dump(2) << '\n';
        return 0;
      }
      Pipeline p(std::move(cfg), [](const std::string& s) { std::cerr << s << '\n'; });
      if (stage == "all")
        p.run_all();
      else
        p.run(stage);
      return 0;
    }
  } catch (const MissingArtifact& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}
