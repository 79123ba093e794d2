#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "verilens/gbdt.hpp"

namespace verilens {

// Hyperparameter values drawn uniformly per retrain.
struct HyperGrid {
  std::vector<double> colsample = {0.5, 0.75, 1.0};
  std::vector<double> subsample = {0.6, 0.8, 1.0};
  std::vector<double> min_child_weight = {1.0, 3.0, 5.0};
};

inline GbdtConfig default_scan_booster() {
  GbdtConfig c;
  c.n_rounds = 100;
  c.early_stopping_rounds = 0;
  return c;
}

struct ImportanceConfig {
  std::size_t n_repeats = 100;
  HyperGrid grid;
  GbdtConfig booster = default_scan_booster();
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct FeatureImportance {
  std::string feature;
  double mean_importance = 0.0;
  double mean_rank = 0.0;
  double top1_fraction = 0.0;  // share of repeats where this feature had the largest importance
};

struct ImportanceReport {
  std::vector<FeatureImportance> ranked;  // by mean importance, descending
  std::vector<std::vector<double>> per_repeat;
  std::vector<std::size_t> top_feature;  // argmax per repeat, lowest index on ties
  std::vector<GbdtConfig> draws;
};

// Average ranks, 1 = largest value; ties share their mean rank.
inline std::vector<double> descending_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

// Retrains the boosted model n_repeats times with hyperparameters drawn from
// the grid and averages the normalized gain importances.
inline ImportanceReport gini_importance(const LabeledDataset& ds, const ImportanceConfig& cfg) {
  if (cfg.grid.colsample.empty() || cfg.grid.subsample.empty() || cfg.grid.min_child_weight.empty())
    throw ConfigError("importance: hyperparameter grid has an empty axis");
  if (cfg.n_repeats == 0) throw ConfigError("importance: n_repeats must be positive");
  const std::size_t d = ds.dims();
  ImportanceReport rep;
  rep.per_repeat.resize(cfg.n_repeats);
  rep.draws.resize(cfg.n_repeats);
  for (std::size_t r = 0; r < cfg.n_repeats; ++r) {
    Rng rng(derive_seed(cfg.seed, r));
    GbdtConfig c = cfg.booster;
    c.colsample = cfg.grid.colsample[rng.index(cfg.grid.colsample.size())];
    c.subsample = cfg.grid.subsample[rng.index(cfg.grid.subsample.size())];
    c.min_child_weight = cfg.grid.min_child_weight[rng.index(cfg.grid.min_child_weight.size())];
    c.seed = rng.next();
    c.threads = 1;
    rep.draws[r] = c;
  }
  parallel_for(cfg.n_repeats, cfg.threads,
               [&](std::size_t r) { rep.per_repeat[r] = train_gbdt(ds, rep.draws[r]).importance(); });
  std::vector<FeatureImportance> out(d);
  for (std::size_t f = 0; f < d; ++f) out[f].feature = ds.feature_names[f];
  for (const auto& imp : rep.per_repeat) {
    const auto ranks = descending_ranks(imp);
    const auto top = static_cast<std::size_t>(std::max_element(imp.begin(), imp.end()) - imp.begin());
    rep.top_feature.push_back(top);
    for (std::size_t f = 0; f < d; ++f) {
      out[f].mean_importance += imp[f];
      out[f].mean_rank += ranks[f];
    }
    out[top].top1_fraction += 1.0;
  }
  const double n = static_cast<double>(cfg.n_repeats);
  for (auto& fi : out) {
    fi.mean_importance /= n;
    fi.mean_rank /= n;
    fi.top1_fraction /= n;
  }
  std::stable_sort(out.begin(), out.end(), [](const FeatureImportance& a, const FeatureImportance& b) {
    return a.mean_importance > b.mean_importance;
  });
  rep.ranked = std::move(out);
  return rep;
}

// ---------------------------------------------------------------------------
// All-relevant selection against shuffled shadow features.

enum class Verdict { Confirmed, Tentative, Rejected };

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Confirmed: return "confirmed";
    case Verdict::Tentative: return "tentative";
    case Verdict::Rejected: return "rejected";
  }
  return "tentative";
}

inline GbdtConfig default_selection_booster() {
  GbdtConfig c = default_scan_booster();
  c.subsample = 0.5;
  c.colsample = 0.5;
  return c;
}

struct SelectionConfig {
  std::size_t n_iter = 100;
  double alpha = 0.05;
  GbdtConfig booster = default_selection_booster();
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct FeatureVerdict {
  std::string feature;
  std::size_t hits = 0;
  Verdict status = Verdict::Tentative;
  double mean_importance = 0.0;
  double mean_rank = 0.0;  // among real features
  double p_upper = 1.0;    // P(X >= hits), X ~ Binomial(n_iter, 1/2)
  double p_lower = 1.0;    // P(X <= hits)
};

struct SelectionVerdict {
  std::size_t n_iter = 0;
  double alpha = 0.05;
  std::vector<FeatureVerdict> features;  // input column order

  std::vector<std::string> with_status(Verdict v) const {
    std::vector<std::string> out;
    for (const auto& f : features)
      if (f.status == v) out.push_back(f.feature);
    return out;
  }
};

// Tail probabilities of Binomial(n, 1/2).
inline double binomial_upper_tail(std::size_t n, std::size_t k) {
  if (k == 0) return 1.0;
  double s = 0.0;
  const double ln2n = static_cast<double>(n) * std::log(2.0);
  for (std::size_t i = k; i <= n; ++i) {
    const double lc = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                      std::lgamma(static_cast<double>(n - i) + 1.0);
    s += std::exp(lc - ln2n);
  }
  return std::min(1.0, s);
}

inline double binomial_lower_tail(std::size_t n, std::size_t k) { return binomial_upper_tail(n, n - k); }

// Each iteration appends an independently shuffled copy of every column,
// trains the boosted model, and scores a hit for each real feature whose
// importance is strictly above the best shadow. Hits are tested two-sided
// against Binomial(n_iter, 1/2) with alpha/2 per tail.
inline SelectionVerdict all_relevant_select(const LabeledDataset& ds, const SelectionConfig& cfg) {
  if (cfg.n_iter < 5) throw ConfigError("selection: n_iter must be at least 5");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("selection: alpha must lie in (0,1)");
  const std::size_t d = ds.dims(), n = ds.size();
  if (d == 0) throw DataError("selection: no features");
  std::vector<std::vector<double>> imps(cfg.n_iter);
  parallel_for(cfg.n_iter, cfg.threads, [&](std::size_t it) {
    Rng rng(derive_seed(cfg.seed, it));
    LabeledDataset aug;
    aug.feature_names = ds.feature_names;
    for (std::size_t f = 0; f < d; ++f) aug.feature_names.push_back("shadow_" + ds.feature_names[f]);
    aug.y = ds.y;
    aug.X = Matrix(n, 2 * d);
    std::vector<std::size_t> perm(n);
    for (std::size_t f = 0; f < d; ++f) {
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      for (std::size_t r = 0; r < n; ++r) {
        aug.X(r, f) = ds.X(r, f);
        aug.X(r, d + f) = ds.X(perm[r], f);
      }
    }
    GbdtConfig c = cfg.booster;
    c.seed = rng.next();
    c.threads = 1;
    imps[it] = train_gbdt(aug, c).importance();
  });
  SelectionVerdict out;
  out.n_iter = cfg.n_iter;
  out.alpha = cfg.alpha;
  out.features.resize(d);
  for (std::size_t f = 0; f < d; ++f) out.features[f].feature = ds.feature_names[f];
  for (const auto& imp : imps) {
    const double shadow_max = *std::max_element(imp.begin() + static_cast<std::ptrdiff_t>(d), imp.end());
    const std::vector<double> real(imp.begin(), imp.begin() + static_cast<std::ptrdiff_t>(d));
    const auto ranks = descending_ranks(real);
    for (std::size_t f = 0; f < d; ++f) {
      if (imp[f] > shadow_max) ++out.features[f].hits;
      out.features[f].mean_importance += imp[f];
      out.features[f].mean_rank += ranks[f];
    }
  }
  for (auto& fv : out.features) {
    fv.mean_importance /= static_cast<double>(cfg.n_iter);
    fv.mean_rank /= static_cast<double>(cfg.n_iter);
    fv.p_upper = binomial_upper_tail(cfg.n_iter, fv.hits);
    fv.p_lower = binomial_lower_tail(cfg.n_iter, fv.hits);
    if (fv.p_upper <= cfg.alpha / 2.0) fv.status = Verdict::Confirmed;
    else if (fv.p_lower <= cfg.alpha / 2.0) fv.status = Verdict::Rejected;
    else fv.status = Verdict::Tentative;
  }
  return out;
}

}  // namespace verilens
