// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   verilens_acceptance [--cli PATH] [--work DIR] [criterion ...]
//
// Criteria 1 and 10 drive the built command-line tool on a 2000-user demo
// corpus; the others call the library directly against independent oracles.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "planted.hpp"
#include "test_util.hpp"
#include "verilens/cluster.hpp"
#include "verilens/demo.hpp"
#include "verilens/featurize.hpp"
#include "verilens/gbdt.hpp"
#include "verilens/importance.hpp"
#include "verilens/logistic.hpp"
#include "verilens/metrics.hpp"
#include "verilens/rebalance.hpp"
#include "verilens/text.hpp"
#include "verilens/topics.hpp"

using namespace verilens;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

std::string ratio(std::size_t hits, std::size_t of) { return std::to_string(hits) + "/" + std::to_string(of); }

// ---------------------------------------------------------------------------
// Independent oracles

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      den += 1.0;
      num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  return num / den;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
  return d;
}

std::set<std::pair<std::size_t, std::size_t>> brute_tomek(const Matrix& X, const std::vector<int>& y) {
  const std::size_t n = X.rows();
  std::vector<std::size_t> nn(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && squared_distance(X.row(i), X.row(j)) < best) {
        best = squared_distance(X.row(i), X.row(j));
        nn[i] = j;
      }
  }
  std::set<std::pair<std::size_t, std::size_t>> links;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (nn[i] == j && nn[j] == i && y[i] != y[j]) links.emplace(i, j);
  return links;
}

// Smallest distance from p to any segment joining two rows labelled `label`.
double min_segment_distance(const LabeledDataset& ds, int label, std::span<const double> p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.y[i] != label) continue;
    const auto a = ds.X.row(i);
    for (std::size_t j = i + 1; j < ds.size(); ++j) {
      if (ds.y[j] != label) continue;
      const auto b = ds.X.row(j);
      double ab2 = 0.0, apab = 0.0;
      for (std::size_t c = 0; c < p.size(); ++c) {
        ab2 += (b[c] - a[c]) * (b[c] - a[c]);
        apab += (p[c] - a[c]) * (b[c] - a[c]);
      }
      const double t = ab2 > 0.0 ? std::clamp(apab / ab2, 0.0, 1.0) : 0.0;
      double d = 0.0;
      for (std::size_t c = 0; c < p.size(); ++c) {
        const double q = a[c] + t * (b[c] - a[c]);
        d += (p[c] - q) * (p[c] - q);
      }
      best = std::min(best, std::sqrt(d));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Synthetic data

LabeledDataset empty_dataset(std::size_t d) {
  LabeledDataset ds;
  for (std::size_t f = 0; f < d; ++f) ds.feature_names.push_back("f" + std::to_string(f));
  ds.X = Matrix(0, d);
  return ds;
}

// Label drawn from sigmoid(strength * f0); every other column is independent noise.
LabeledDataset planted_signal(std::size_t n, std::size_t d, double strength, std::uint64_t seed) {
  Rng rng(seed);
  auto ds = empty_dataset(d);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = rng.normal();
    ds.push(row, rng.uniform() < sigmoid(strength * row[0]) ? 1 : 0, Provenance::Original, "r" + std::to_string(i));
  }
  return ds;
}

LabeledDataset two_gaussians(std::size_t n_major, std::size_t n_minor, std::size_t d, double shift, std::uint64_t seed) {
  Rng rng(seed);
  auto ds = empty_dataset(d);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n_major + n_minor; ++i) {
    const int label = i < n_major ? 0 : 1;
    for (auto& v : row) v = rng.normal() + (label ? shift : 0.0);
    ds.push(row, label, Provenance::Original, "r" + std::to_string(i));
  }
  return ds;
}

Matrix gaussian_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(0, d);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = rng.normal();
    X.append_row(row);
  }
  return X;
}

// ---------------------------------------------------------------------------
// End-to-end runs through the command-line tool

struct DemoRuns {
  fs::path corpus, run_a, run_b;
  int status_a = -1, status_b = -1;
  double seconds_a = 0.0;
  std::string error;
};

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string shell_quote(const fs::path& p) { return "'" + p.string() + "'"; }

DemoRuns run_demo(const std::string& cli, const fs::path& work) {
  DemoRuns r;
  r.corpus = work / "demo";
  r.run_a = work / "run_a";
  r.run_b = work / "run_b";
  fs::remove_all(r.run_a);
  fs::remove_all(r.run_b);
  const auto log = work / "cli.log";
  if (shell(shell_quote(cli) + " generate-demo --users 2000 -o " + shell_quote(r.corpus) + " 2>" + shell_quote(log)) != 0) {
    r.error = "generate-demo failed, see " + log.string();
    return r;
  }
  const auto config = shell_quote(r.corpus / "verilens.toml");
  const auto t0 = std::chrono::steady_clock::now();
  r.status_a = shell(shell_quote(cli) + " all -j 1 --config " + config + " -o " + shell_quote(r.run_a) + " 2>>" + shell_quote(log));
  r.seconds_a = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.status_b = shell(shell_quote(cli) + " all -j 1 --config " + config + " -o " + shell_quote(r.run_b) + " 2>>" + shell_quote(log));
  if (r.status_a != 0 || r.status_b != 0) r.error = "`all` failed, see " + log.string();
  return r;
}

// ---------------------------------------------------------------------------
// Criteria

Outcome separability(const DemoRuns& runs) {
  Outcome o;
  if (runs.status_a != 0) {
    o.require(false, runs.error.empty() ? "`all` did not run" : runs.error);
    return o;
  }
  std::ifstream in(runs.run_a / "metrics.json");
  const auto metrics = nlohmann::json::parse(in);
  std::ifstream cfg_in(runs.run_a / "manifest.json");
  const auto primary = nlohmann::json::parse(cfg_in).at("config").at("rebalance.primary").get<std::string>();
  const auto& batch = metrics.at("batches").at(primary);
  const double gbdt = batch.at("gbdt").at("ROC AUC Score").get<double>();
  const double lr = batch.at("logistic").at("ROC AUC Score").get<double>();
  o.require(gbdt >= 0.95, "GBDT held-out AUC " + fmt(gbdt) + " >= 0.95 (" + primary + " batch)");
  o.require(gbdt >= lr, "GBDT AUC >= logistic AUC " + fmt(lr));
  o.require(runs.seconds_a < 300.0, "single-threaded `all` took " + fmt(runs.seconds_a, 1) + " s < 300 s");
  return o;
}

Outcome auc_oracle() {
  Outcome o;
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.index(120);
    std::vector<double> s(n);
    std::vector<int> y(n);
    const bool coarse = t % 4 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse ? static_cast<double>(rng.index(4)) : rng.normal();
      y[i] = rng.uniform() < 0.35 ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    worst = std::max(worst, std::abs(roc_auc(s, y) - pairwise_auc(s, y)));
  }
  o.require(worst <= 1e-9, "max |roc_auc - pairwise| over 200 sets = " + sci(worst));
  return o;
}

Outcome resamplers() {
  Outcome o;
  std::size_t gap_ok = 0, segment_bad = 0, synthetic = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ds = two_gaussians(160, 20 + 2 * seed, 3, 1.2, seed);
    const auto r = adasyn(ds, {.k = 5, .beta = 1.0, .seed = seed});
    const long gap = std::labs(static_cast<long>(r.data.count(0)) - static_cast<long>(r.data.count(1)));
    gap_ok += gap <= static_cast<long>(ds.count(1)) ? 1 : 0;
    for (std::size_t i = 0; i < r.data.size(); ++i) {
      if (r.data.provenance[i] != Provenance::Synthetic) continue;
      ++synthetic;
      segment_bad += min_segment_distance(ds, 1, r.data.X.row(i)) <= 1e-9 && r.data.y[i] == 1 ? 0 : 1;
    }
  }
  o.require(gap_ok == 20, "ADASYN beta=1 class gap within minority size: " + ratio(gap_ok, 20) + " datasets");
  o.require(synthetic > 0 && segment_bad == 0,
            "ADASYN synthetic points on minority segments: " + ratio(synthetic - segment_bad, synthetic));

  std::size_t tomek_ok = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(1000 + seed);
    Matrix X(0, 2);
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
      X.append_row(std::vector<double>{rng.uniform(), rng.uniform()});
      y.push_back(rng.uniform() < 0.4 ? 1 : 0);
    }
    const auto got = tomek_links(X, y);
    const std::set<std::pair<std::size_t, std::size_t>> got_set(got.begin(), got.end());
    tomek_ok += got_set.size() == got.size() && got_set == brute_tomek(X, y) ? 1 : 0;
  }
  o.require(tomek_ok == 50, "Tomek links equal brute force: " + ratio(tomek_ok, 50) + " datasets");

  std::size_t kept_ok = 0, st_segment_bad = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ds = two_gaussians(120, 40, 2, 0.7, 50 + seed);
    const auto r = smote_tomek(ds, {.k = 5, .beta = 1.0, .seed = seed});
    const std::set<std::string> kept(r.data.row_ids.begin(), r.data.row_ids.end());
    bool all_kept = true;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.y[i] == 1 && !kept.contains(ds.row_ids[i])) all_kept = false;
    kept_ok += all_kept ? 1 : 0;
    for (std::size_t i = 0; i < r.data.size(); ++i)
      if (r.data.provenance[i] == Provenance::Synthetic && min_segment_distance(ds, 1, r.data.X.row(i)) > 1e-9)
        ++st_segment_bad;
  }
  o.require(kept_ok == 20, "SMOTETomek keeps every minority original: " + ratio(kept_ok, 20) + " datasets");
  o.require(st_segment_bad == 0, "SMOTETomek synthetic points on minority segments");
  return o;
}

Outcome models() {
  Outcome o;
  const auto ds = planted_signal(300, 5, 2.0, 11);
  const Matrix Z = Standardizer::fit(ds.X).apply(ds.X);
  Rng rng(99);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    std::vector<double> p(6);
    for (auto& v : p) v = rng.normal(0.0, 2.0);
    const double l2 = 0.02 * t;
    const auto an = logistic_objective(Z, ds.y, p, l2);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto a = p, b = p;
      const double h = 1e-5;
      a[i] += h;
      b[i] -= h;
      const double fd = (logistic_objective(Z, ds.y, a, l2).loss - logistic_objective(Z, ds.y, b, l2).loss) / (2 * h);
      diff += (fd - an.gradient[i]) * (fd - an.gradient[i]);
      norm += an.gradient[i] * an.gradient[i];
    }
    worst = std::max(worst, std::sqrt(diff / norm));
  }
  o.require(worst <= 1e-5, "logistic gradient vs central differences, worst relative error " + sci(worst));

  std::size_t increases = 0, rounds = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GbdtConfig cfg;
    cfg.n_rounds = 80;
    cfg.early_stopping_rounds = 0;
    cfg.seed = seed;
    const auto m = train_gbdt(planted_signal(500, 6, 1.5, 100 + seed), cfg);
    for (std::size_t r = 1; r < m.train_loss.size(); ++r, ++rounds)
      increases += m.train_loss[r] > m.train_loss[r - 1] ? 1 : 0;
  }
  o.require(rounds > 0 && increases == 0, "GBDT training loss non-increasing over " + std::to_string(rounds) + " rounds");

  auto x = empty_dataset(2);
  for (int rep = 0; rep < 100; ++rep)
    for (int a : {0, 1})
      for (int b : {0, 1}) x.push(std::vector<double>{double(a), double(b)}, a ^ b, Provenance::Original, "x");
  GbdtConfig cfg;
  cfg.max_depth = 2;
  cfg.n_rounds = 20;
  const double g = evaluate(train_gbdt(x, cfg), x).accuracy;
  const double l = evaluate(train_logistic(x), x).accuracy;
  o.require(g == 1.0, "GBDT XOR accuracy " + fmt(g));
  o.require(l <= 0.55, "logistic XOR accuracy " + fmt(l) + " <= 0.55");
  return o;
}

Outcome importance_and_selection() {
  Outcome o;
  ImportanceConfig icfg;
  icfg.n_repeats = 100;
  icfg.booster.n_rounds = 30;
  icfg.seed = 3;
  const auto rep = gini_importance(planted_signal(1000, 10, 3.0, 12), icfg);
  const auto first = static_cast<std::size_t>(std::count(rep.top_feature.begin(), rep.top_feature.end(), 0u));
  o.require(first >= 95, "planted feature ranked first in " + ratio(first, 100) + " retrains");

  constexpr std::size_t kRuns = 10;
  SelectionConfig scfg;
  scfg.n_iter = 100;
  scfg.alpha = 0.05;
  scfg.booster.n_rounds = 30;

  std::size_t copy_confirmed = 0;
  for (std::uint64_t seed = 1; seed <= kRuns; ++seed) {
    Rng rng(500 + seed);
    auto ds = empty_dataset(4);
    for (int i = 0; i < 2000; ++i) {
      const int y = rng.uniform() < 0.5 ? 1 : 0;
      ds.push(std::vector<double>{double(y), rng.normal(), rng.normal(), rng.normal()}, y, Provenance::Original, "r");
    }
    scfg.seed = seed;
    copy_confirmed += all_relevant_select(ds, scfg).features[0].status == Verdict::Confirmed ? 1 : 0;
  }
  o.require(copy_confirmed == kRuns, "label copy confirmed in " + ratio(copy_confirmed, kRuns) + " runs");

  // A run counts only if every noise column is rejected.
  constexpr std::size_t kNoiseRuns = 20;
  std::size_t clean = 0, noise_rejected = 0;
  for (std::uint64_t seed = 1; seed <= kNoiseRuns; ++seed) {
    scfg.seed = seed;
    const auto v = all_relevant_select(planted_signal(2000, 5, 1.5, 700 + seed), scfg);
    std::size_t rejected = 0;
    for (std::size_t f = 1; f < 5; ++f) rejected += v.features[f].status == Verdict::Rejected ? 1 : 0;
    noise_rejected += rejected;
    clean += rejected == 4 ? 1 : 0;
  }
  o.require(clean * 10 >= kNoiseRuns * 9, "all four noise columns rejected in " + ratio(clean, kNoiseRuns) +
                                               " runs (" + ratio(noise_rejected, 4 * kNoiseRuns) + " noise verdicts)");
  return o;
}

Outcome clustering() {
  Outcome o;
  std::size_t monotone = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    const std::size_t n = 20 + rng.index(200), d = 1 + rng.index(6), k = 2 + rng.index(9);
    const auto X = gaussian_rows(n, d, 31 * seed);
    Matrix init(0, d);
    for (std::size_t i = 0; i < k; ++i) init.append_row(X.row(i));
    const auto r = lloyd(X, init);
    bool ok = !r.inertia_trace.empty();
    for (std::size_t t = 1; t < r.inertia_trace.size(); ++t) ok = ok && r.inertia_trace[t] <= r.inertia_trace[t - 1];
    monotone += ok ? 1 : 0;
  }
  o.require(monotone == 100, "Lloyd inertia non-increasing on " + ratio(monotone, 100) + " instances");

  std::vector<std::size_t> ks;
  for (std::size_t k = 2; k <= 12; ++k) ks.push_back(k);
  std::size_t eights = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    // Eight unit-variance blobs at 6 * e_b in eight dimensions.
    Rng rng(40 + seed);
    Matrix X(0, 8);
    std::vector<double> row(8);
    for (std::size_t b = 0; b < 8; ++b)
      for (int i = 0; i < 60; ++i) {
        for (std::size_t c = 0; c < 8; ++c) row[c] = rng.normal() + (c == b ? 6.0 : 0.0);
        X.append_row(row);
      }
    eights += choose_k(X, ks, 10, seed).recommended == 8 ? 1 : 0;
  }
  o.require(eights >= 9, "knee rule recommends k=8 in " + ratio(eights, 10) + " seeds");
  return o;
}

Outcome topics() {
  Outcome o;
  {
    LdaConfig cfg;
    cfg.iterations = 200;
    cfg.seed = 3;
    const auto m = lda_gibbs(planted::lda_corpus(2, 25, 100, 80, 0.5, 11), planted::vocabulary(50), 2, cfg);
    const double purity = planted::best_matched_purity(m, 25, 10);
    o.require(purity >= 0.9, "two-topic purity " + fmt(purity, 3) + " >= 0.9");
  }
  std::size_t tens = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    LdaConfig cfg;
    cfg.iterations = 200;
    cfg.seed = seed;
    const auto sel = select_topic_count(planted::lda_corpus(10, 30, 200, 100, 0.1, 20 + seed), planted::vocabulary(300),
                                        {2, 10, 50}, cfg);
    tens += sel.chosen == 10 ? 1 : 0;
  }
  o.require(tens == 3, "select_T picks 10 from {2,10,50}: " + ratio(tens, 3) + " corpora");

  double worst_row = 0.0;
  std::size_t sweeps = 0, inconsistent = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto docs = planted::lda_corpus(4, 15, 40, 50, 0.3, 60 + seed);
    LdaConfig cfg;
    cfg.iterations = 30;
    cfg.seed = seed;
    const auto m = lda_gibbs(docs, planted::vocabulary(60), 1 + 2 * seed, cfg, [&](const LdaSampler& s) {
      ++sweeps;
      inconsistent += s.counts_consistent() ? 0 : 1;
    });
    for (std::size_t t = 0; t < m.topics; ++t) {
      const auto r = m.phi.row(t);
      worst_row = std::max(worst_row, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
    }
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const auto r = m.theta.row(d);
      worst_row = std::max(worst_row, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
    }
  }
  o.require(worst_row <= 1e-9, "phi/theta rows sum to 1, worst deviation " + sci(worst_row));
  o.require(sweeps > 0 && inconsistent == 0, "count invariants hold after " + ratio(sweeps - inconsistent, sweeps) + " sweeps");
  return o;
}

Outcome span() {
  Outcome o;
  std::size_t within = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SpanConfig cfg;
    cfg.seed = seed;
    const auto e = topical_span(planted::mixture_document(5, 20, 500, 100 + seed), 1000, cfg);
    within += e.span >= 4 && e.span <= 6 ? 1 : 0;
  }
  o.require(within >= 40, "five-component span within 5 +/- 1 in " + ratio(within, 50) + " runs");
  std::size_t ones = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SpanConfig cfg;
    cfg.seed = seed;
    const auto doc = planted::from_segments("same", std::vector<std::vector<std::uint32_t>>(40, {3, 3, 3, 3}));
    ones += topical_span(doc, 1000, cfg).span == 1 ? 1 : 0;
  }
  o.require(ones == 20, "single-token-type span is 1 in " + ratio(ones, 20) + " runs");
  return o;
}

Outcome features() {
  Outcome o;
  double worst_entropy = 0.0;
  for (int k = 1; k <= 90; ++k) {
    std::string s;
    for (int rep = 0; rep < 2 + k % 3; ++rep)
      for (int i = 0; i < k; ++i) s.push_back(static_cast<char>(33 + i));
    worst_entropy = std::max(worst_entropy, std::abs(char_entropy(s) - std::log2(static_cast<double>(k))));
  }
  o.require(worst_entropy <= 1e-9, "entropy of uniform k-symbol strings, worst error " + sci(worst_entropy));

  DemoConfig dc;
  dc.users = 120;
  dc.mean_tweets = 10;
  dc.seed = 17;
  const auto corpus = generate_demo_corpus(dc);
  const auto& lex = SentimentLexicon::builtin();
  double worst_triple = 0.0;
  bool compound_open = true;
  std::size_t tweets = 0;
  for (const auto& [_, list] : corpus.tweets)
    for (const auto& t : list) {
      const auto s = lex.score(tokenize(t.text).words);
      worst_triple = std::max(worst_triple, std::abs(s.positive + s.negative + s.neutral - 1.0));
      compound_open = compound_open && s.compound > -1.0 && s.compound < 1.0;
      if (s.valence_sum == 0.0) compound_open = compound_open && s.compound == 0.0;
      ++tweets;
    }
  for (double x : {-1e300, -1e9, -1e3, -15.0, -1.0, -1e-6, 1e-6, 1.0, 15.0, 1e3, 1e9, 1e300}) {
    const double c = normalize_compound(x);
    compound_open = compound_open && c > -1.0 && c < 1.0 && (c < 0.0) == (x < 0.0);
  }
  o.require(worst_triple <= 1e-9, "sentiment triple sums to 1 over " + std::to_string(tweets) + " tweets, worst error " +
                                      sci(worst_triple));
  o.require(compound_open && normalize_compound(0.0) == 0.0, "compound inside (-1, 1) and 0 at zero valence");

  std::set<std::string> users;
  for (const auto& [id, _] : corpus.profiles) users.insert(id);
  auto erased = corpus;
  for (auto& [_, p] : erased.profiles) p.verified = false;
  const auto reg = FeatureRegistry::standard();
  const auto a = assemble_features(corpus, reg, users), b = assemble_features(erased, reg, users);
  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i)
    same = a[i].values.size() == b[i].values.size() &&
           std::memcmp(a[i].values.data(), b[i].values.data(), a[i].values.size() * sizeof(double)) == 0 &&
           a[i].missing_mask == b[i].missing_mask;
  o.require(same, "features bit-identical after label erasure (" + std::to_string(a.size()) + " users)");
  return o;
}

Outcome determinism(const DemoRuns& runs) {
  Outcome o;
  if (runs.status_a != 0 || runs.status_b != 0) {
    o.require(false, runs.error.empty() ? "`all` did not run" : runs.error);
    return o;
  }
  // Manifests carry wall-clock times, so only data artifacts are compared.
  auto listing = [](const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), root).string();
      if (!rel.starts_with("manifest")) files[rel] = verilens::testing::read_file(e.path().string());
    }
    return files;
  };
  const auto a = listing(runs.run_a), b = listing(runs.run_b);
  std::size_t identical = 0;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it != b.end() && it->second == bytes)
      ++identical;
    else
      o.notes.push_back("differs: " + name);
  }
  o.require(a.size() == b.size() && identical == a.size(),
            "byte-identical data artifacts: " + ratio(identical, a.size()));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verilens acceptance suite"};
  std::string cli = VERILENS_CLI_PATH;
  std::string work;
  std::vector<int> only;
  app.add_option("--cli", cli, "path to the verilens executable")->capture_default_str();
  app.add_option("--work", work, "scratch directory for the end-to-end runs (kept afterwards)");
  app.add_option("criteria", only, "criterion numbers to run (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };

  std::optional<verilens::testing::TempDir> scratch;
  fs::path work_dir;
  if (work.empty()) {
    scratch.emplace("acceptance");
    work_dir = scratch->path();
  } else {
    work_dir = fs::absolute(work);
    fs::create_directories(work_dir);
  }
  DemoRuns runs;
  if (wanted(1) || wanted(10)) runs = run_demo(cli, work_dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"end-to-end separability on the 2000-user demo", [&] { return separability(runs); }},
      {"ROC AUC equals the pairwise oracle", auc_oracle},
      {"resampler correctness", resamplers},
      {"model correctness", models},
      {"importance ranking and all-relevant selection", importance_and_selection},
      {"clustering", clustering},
      {"topic model", topics},
      {"topical span", span},
      {"feature extraction", features},
      {"determinism of two `all` runs", [&] { return determinism(runs); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!wanted(n)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << n << ". " << criteria[i].first << " (" << fmt(secs, 1) << " s)\n";
    for (const auto& note : o.notes) std::cout << "        " << note << '\n';
    std::cout.flush();
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << '\n';
  return failed == 0 ? 0 : 1;
}
