#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "verilens/core.hpp"
#include "verilens/dataset.hpp"

namespace verilens {

struct GbdtConfig {
  std::size_t max_depth = 6;
  double eta = 0.2;
  std::size_t n_rounds = 200;
  double min_child_weight = 1.0;
  double lambda = 1.0;          // L2 on leaf weights
  double min_split_loss = 0.0;  // splits with gain >= this are taken
  double subsample = 1.0;       // row fraction per round
  double colsample = 1.0;       // feature fraction per tree
  std::size_t early_stopping_rounds = 20;
  std::size_t max_bins = 256;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  nlohmann::json to_json() const {
    return {{"max_depth", max_depth},         {"eta", eta},
            {"n_rounds", n_rounds},           {"min_child_weight", min_child_weight},
            {"lambda", lambda},               {"min_split_loss", min_split_loss},
            {"subsample", subsample},         {"colsample", colsample},
            {"early_stopping_rounds", early_stopping_rounds}, {"max_bins", max_bins},
            {"seed", seed}};
  }

  static GbdtConfig from_json(const nlohmann::json& j) {
    GbdtConfig c;
    c.max_depth = j.at("max_depth").get<std::size_t>();
    c.eta = j.at("eta").get<double>();
    c.n_rounds = j.at("n_rounds").get<std::size_t>();
    c.min_child_weight = j.at("min_child_weight").get<double>();
    c.lambda = j.at("lambda").get<double>();
    c.min_split_loss = j.at("min_split_loss").get<double>();
    c.subsample = j.at("subsample").get<double>();
    c.colsample = j.at("colsample").get<double>();
    c.early_stopping_rounds = j.at("early_stopping_rounds").get<std::size_t>();
    c.max_bins = j.at("max_bins").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // row goes left iff x[feature] < threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf weight before eta
  double gain = 0.0;
  double cover = 0.0;  // hessian sum

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
      i = static_cast<std::size_t>(row[static_cast<std::size_t>(nodes[i].feature)] < nodes[i].threshold
                                       ? nodes[i].left
                                       : nodes[i].right);
    return nodes[i].value;
  }

  std::size_t depth(std::size_t i = 0) const {
    if (nodes[i].is_leaf()) return 0;
    return 1 + std::max(depth(static_cast<std::size_t>(nodes[i].left)), depth(static_cast<std::size_t>(nodes[i].right)));
  }

  nlohmann::json to_json(std::size_t i = 0) const {
    const auto& n = nodes[i];
    if (n.is_leaf()) return {{"leaf", n.value}, {"cover", n.cover}};
    return {{"split", n.feature},
            {"threshold", n.threshold},
            {"gain", n.gain},
            {"cover", n.cover},
            {"left", to_json(static_cast<std::size_t>(n.left))},
            {"right", to_json(static_cast<std::size_t>(n.right))}};
  }

  static RegressionTree from_json(const nlohmann::json& j) {
    RegressionTree t;
    t.add(j);
    return t;
  }

 private:
  std::int32_t add(const nlohmann::json& j) {
    const auto idx = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    TreeNode n;
    n.cover = j.at("cover").get<double>();
    if (j.contains("leaf")) {
      n.value = j.at("leaf").get<double>();
    } else {
      n.feature = j.at("split").get<int>();
      n.threshold = j.at("threshold").get<double>();
      n.gain = j.at("gain").get<double>();
      n.left = add(j.at("left"));
      n.right = add(j.at("right"));
    }
    nodes[static_cast<std::size_t>(idx)] = n;
    return idx;
  }
};

struct BoostedTreesModel {
  std::vector<std::string> feature_names;
  double base_score = 0.0;  // margin before any tree
  double eta = 0.2;
  GbdtConfig config;
  std::vector<RegressionTree> trees;
  std::vector<double> gain;        // total split gain per feature
  std::vector<double> train_loss;  // mean log-loss after each kept round
  std::vector<double> valid_loss;
  std::size_t best_round = 0;
  std::vector<std::string> warnings;

  double margin(std::span<const double> row) const {
    if (row.size() != feature_names.size())
      throw DataError("gbdt: expected " + std::to_string(feature_names.size()) + " features, got " +
                      std::to_string(row.size()));
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(row);
    return base_score + eta * s;
  }

  double predict_proba(std::span<const double> row) const { return sigmoid(margin(row)); }

  // Gain importance normalized to sum 1 (all zero when no split was made).
  std::vector<double> importance() const {
    std::vector<double> out = gain;
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (total > 0.0)
      for (auto& v : out) v /= total;
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json jt = nlohmann::json::array();
    for (const auto& t : trees) jt.push_back(t.to_json());
    return {{"format", "verilens.gbdt"},
            {"version", 1},
            {"feature_names", feature_names},
            {"base_score", base_score},
            {"eta", eta},
            {"config", config.to_json()},
            {"gain", gain},
            {"importance", importance()},
            {"train_loss", train_loss},
            {"valid_loss", valid_loss},
            {"best_round", best_round},
            {"warnings", warnings},
            {"trees", jt}};
  }

  static BoostedTreesModel from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "verilens.gbdt" || j.value("version", 0) != 1)
      throw DataError("not a version 1 boosted-trees model file");
    BoostedTreesModel m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.base_score = j.at("base_score").get<double>();
    m.eta = j.at("eta").get<double>();
    m.config = GbdtConfig::from_json(j.at("config"));
    m.gain = j.at("gain").get<std::vector<double>>();
    m.train_loss = j.at("train_loss").get<std::vector<double>>();
    m.valid_loss = j.at("valid_loss").get<std::vector<double>>();
    m.best_round = j.at("best_round").get<std::size_t>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& t : j.at("trees")) m.trees.push_back(RegressionTree::from_json(t));
    return m;
  }
};

namespace detail {

// Per-feature quantile binning. Features with at most max_bins distinct values
// get one bin per value, so split search over them is exact.
struct BinnedMatrix {
  std::size_t rows = 0;
  std::vector<std::vector<std::uint16_t>> codes;  // codes[f][r]
  std::vector<std::vector<double>> cuts;          // cuts[f][b]: split value between bins b and b+1

  std::size_t bins(std::size_t f) const { return cuts[f].size() + 1; }
};

inline double split_point(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid > a ? mid : b;
}

inline BinnedMatrix bin_matrix(const Matrix& X, std::size_t max_bins, unsigned threads) {
  if (max_bins < 2 || max_bins > 65535) throw ConfigError("max_bins must lie in [2, 65535]");
  BinnedMatrix bm;
  bm.rows = X.rows();
  const std::size_t d = X.cols(), n = X.rows();
  bm.codes.resize(d);
  bm.cuts.resize(d);
  parallel_for(d, threads, [&](std::size_t f) {
    std::vector<double> col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = X(r, f);
    std::vector<double> sorted = col;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> uniq = sorted;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<double> upper;  // largest value in each bin
    if (uniq.size() <= max_bins) {
      upper = uniq;
    } else {
      for (std::size_t j = 1; j <= max_bins; ++j) {
        const std::size_t pos = (j * n + max_bins - 1) / max_bins - 1;
        const double v = sorted[std::min(pos, n - 1)];
        if (upper.empty() || v > upper.back()) upper.push_back(v);
      }
      if (upper.back() < uniq.back()) upper.push_back(uniq.back());
    }
    auto& cuts = bm.cuts[f];
    for (std::size_t b = 0; b + 1 < upper.size(); ++b) {
      const double next = *std::upper_bound(uniq.begin(), uniq.end(), upper[b]);
      cuts.push_back(split_point(upper[b], next));
    }
    auto& codes = bm.codes[f];
    codes.resize(n);
    for (std::size_t r = 0; r < n; ++r)
      codes[r] = static_cast<std::uint16_t>(std::upper_bound(cuts.begin(), cuts.end(), col[r]) - cuts.begin());
  });
  return bm;
}

inline double log_loss(std::span<const double> margins, std::span<const int> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double m = margins[i];
    s += std::max(m, 0.0) + std::log1p(std::exp(-std::abs(m))) - static_cast<double>(y[i]) * m;
  }
  return s / static_cast<double>(margins.size());
}

struct SplitChoice {
  bool valid = false;
  double gain = -std::numeric_limits<double>::infinity();
  std::size_t feature = 0;
  std::size_t bin = 0;  // rows with code <= bin go left
};

class TreeBuilder {
 public:
  TreeBuilder(const BinnedMatrix& bm, const std::vector<double>& grad, const std::vector<double>& hess,
              const std::vector<std::size_t>& features, const GbdtConfig& cfg, std::vector<double>& gain_acc)
      : bm_(bm), g_(grad), h_(hess), features_(features), cfg_(cfg), gain_acc_(gain_acc) {}

  RegressionTree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  double score(double G, double H) const { return G * G / (H + cfg_.lambda); }

  std::int32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    const auto idx = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double G = 0.0, H = 0.0;
    for (auto r : rows) {
      G += g_[r];
      H += h_[r];
    }
    TreeNode node;
    node.cover = H;
    node.value = -G / (H + cfg_.lambda);
    const SplitChoice best = depth < cfg_.max_depth && rows.size() >= 2 ? find_split(rows, G, H) : SplitChoice{};
    if (best.valid && best.gain >= cfg_.min_split_loss) {
      std::vector<std::size_t> left, right;
      const auto& codes = bm_.codes[best.feature];
      for (auto r : rows) (codes[r] <= best.bin ? left : right).push_back(r);
      rows.clear();
      rows.shrink_to_fit();
      node.feature = static_cast<int>(best.feature);
      node.threshold = bm_.cuts[best.feature][best.bin];
      node.gain = best.gain;
      gain_acc_[best.feature] += best.gain;
      node.left = grow(std::move(left), depth + 1);
      node.right = grow(std::move(right), depth + 1);
    }
    tree_.nodes[static_cast<std::size_t>(idx)] = node;
    return idx;
  }

  SplitChoice find_split(const std::vector<std::size_t>& rows, double G, double H) const {
    std::vector<SplitChoice> per_feature(features_.size());
    const double parent = score(G, H);
    parallel_for(features_.size(), cfg_.threads, [&](std::size_t fi) {
      const std::size_t f = features_[fi];
      const std::size_t nb = bm_.bins(f);
      if (nb < 2) return;
      std::vector<double> hg(nb, 0.0), hh(nb, 0.0);
      std::vector<std::size_t> hc(nb, 0);
      const auto& codes = bm_.codes[f];
      for (auto r : rows) {
        hg[codes[r]] += g_[r];
        hh[codes[r]] += h_[r];
        ++hc[codes[r]];
      }
      SplitChoice best;
      double GL = 0.0, HL = 0.0;
      std::size_t CL = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        GL += hg[b];
        HL += hh[b];
        CL += hc[b];
        if (CL == 0 || CL == rows.size()) continue;
        const double GR = G - GL, HR = H - HL;
        if (HL < cfg_.min_child_weight || HR < cfg_.min_child_weight) continue;
        const double gain = 0.5 * (score(GL, HL) + score(GR, HR) - parent);
        if (!best.valid || gain > best.gain) best = {true, gain, f, b};
      }
      per_feature[fi] = best;
    });
    SplitChoice best;
    for (const auto& c : per_feature)
      if (c.valid && (!best.valid || c.gain > best.gain)) best = c;
    return best;
  }

  const BinnedMatrix& bm_;
  const std::vector<double>& g_;
  const std::vector<double>& h_;
  const std::vector<std::size_t>& features_;
  const GbdtConfig& cfg_;
  std::vector<double>& gain_acc_;
  RegressionTree tree_;
};

inline std::vector<std::size_t> sample_indices(std::size_t n, double fraction, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (fraction >= 1.0) return idx;
  const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
  rng.shuffle(idx);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

// Stagewise boosting of regression trees on the logistic loss with
// second-order split gain. With `valid`, training stops once the validation
// loss has not improved for early_stopping_rounds rounds and the model is
// truncated to the best round.
inline BoostedTreesModel train_gbdt(const LabeledDataset& ds, const GbdtConfig& cfg = {},
                                    const LabeledDataset* valid = nullptr) {
  if (ds.size() == 0) throw DataError("gbdt: empty training set");
  if (!ds.both_classes()) throw DataError("gbdt: training data must contain both classes");
  if (cfg.eta < 0.0) throw ConfigError("gbdt: eta must be non-negative");
  if (!(cfg.subsample > 0.0 && cfg.subsample <= 1.0) || !(cfg.colsample > 0.0 && cfg.colsample <= 1.0))
    throw ConfigError("gbdt: subsample and colsample must lie in (0,1]");
  if (cfg.lambda < 0.0 || cfg.min_child_weight < 0.0) throw ConfigError("gbdt: lambda and min_child_weight must be >= 0");
  for (double v : ds.X.data())
    if (!std::isfinite(v)) throw DataError("gbdt: non-finite feature value");
  if (valid && valid->dims() != ds.dims()) throw DataError("gbdt: validation width mismatch");

  const std::size_t n = ds.size(), d = ds.dims();
  BoostedTreesModel model;
  model.feature_names = ds.feature_names;
  model.config = cfg;
  model.eta = cfg.eta;
  model.gain.assign(d, 0.0);
  const double rate = static_cast<double>(ds.count(1)) / static_cast<double>(n);
  model.base_score = logit(rate);

  const auto bm = detail::bin_matrix(ds.X, cfg.max_bins, cfg.threads);
  bool any_split_possible = false;
  for (std::size_t f = 0; f < d; ++f) any_split_possible |= bm.bins(f) > 1;
  if (!any_split_possible)
    model.warnings.push_back("no valid split at root: every feature is constant, trees are single leaves");

  std::vector<double> margin(n, model.base_score), grad(n), hess(n);
  const bool early = valid != nullptr && valid->size() > 0 && cfg.early_stopping_rounds > 0;
  std::vector<double> vmargin;
  if (early) vmargin.assign(valid->size(), model.base_score);
  double best_valid = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> gain_history;

  for (std::size_t round = 0; round < cfg.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = p - static_cast<double>(ds.y[i]);
      hess[i] = p * (1.0 - p);
    }
    Rng rng(derive_seed(cfg.seed, round));
    auto rows = detail::sample_indices(n, cfg.subsample, rng);
    const auto features = detail::sample_indices(d, cfg.colsample, rng);
    detail::TreeBuilder builder(bm, grad, hess, features, cfg, model.gain);
    model.trees.push_back(builder.build(std::move(rows)));
    const auto& tree = model.trees.back();
    for (std::size_t i = 0; i < n; ++i) margin[i] += cfg.eta * tree.predict(ds.X.row(i));
    model.train_loss.push_back(detail::log_loss(margin, ds.y));
    if (!early) continue;
    gain_history.push_back(model.gain);
    for (std::size_t i = 0; i < valid->size(); ++i) vmargin[i] += cfg.eta * tree.predict(valid->X.row(i));
    model.valid_loss.push_back(detail::log_loss(vmargin, valid->y));
    if (model.valid_loss.back() < best_valid) {
      best_valid = model.valid_loss.back();
      model.best_round = round;
    } else if (round - model.best_round >= cfg.early_stopping_rounds) {
      break;
    }
  }
  if (early) {
    const std::size_t keep = model.best_round + 1;
    model.trees.resize(keep);
    model.train_loss.resize(keep);
    model.gain = gain_history[model.best_round];
  } else if (!model.trees.empty()) {
    model.best_round = model.trees.size() - 1;
  }
  return model;
}

}  // namespace verilens
