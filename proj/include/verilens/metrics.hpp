#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>
#include "verilens/core.hpp"
#include "verilens/dataset.hpp"

namespace verilens {

// Rank-based ROC AUC (Mann-Whitney U), tied scores share their mid-rank.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("roc_auc: scores/labels length mismatch");
  const std::size_t n = scores.size();
  std::size_t pos = 0;
  for (int l : labels) pos += l == 1 ? 1 : 0;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw DataError("roc_auc needs both classes");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels[idx[k]] == 1) rank_sum += mid;
    i = j + 1;
  }
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalMetrics {
  double precision = 0.0;  // positive class
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double roc_auc = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  ClassMetrics macro;
  ClassMetrics weighted;

  std::size_t total() const { return tp + fp + tn + fn; }

  nlohmann::json to_json() const {
    return {{"Precision", precision},
            {"Recall", recall},
            {"F1-Score", f1},
            {"Accuracy", accuracy},
            {"ROC AUC Score", roc_auc},
            {"confusion", {{"tp", tp}, {"fp", fp}, {"tn", tn}, {"fn", fn}}},
            {"macro", {{"Precision", macro.precision}, {"Recall", macro.recall}, {"F1-Score", macro.f1}}},
            {"weighted",
             {{"Precision", weighted.precision}, {"Recall", weighted.recall}, {"F1-Score", weighted.f1}}}};
  }
};

namespace detail {

inline double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

inline ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.precision = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  m.recall = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  m.f1 = safe_ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  m.support = tp + fn;
  return m;
}

}  // namespace detail

// Point metrics at `threshold` (score >= threshold predicts positive) plus AUC.
inline EvalMetrics evaluate_scores(std::span<const double> scores, std::span<const int> labels,
                                   double threshold = 0.5) {
  if (scores.empty()) throw DataError("evaluate: empty test split");
  if (scores.size() != labels.size()) throw DataError("evaluate: scores/labels length mismatch");
  EvalMetrics m;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool truth = labels[i] == 1;
    if (pred && truth) ++m.tp;
    else if (pred) ++m.fp;
    else if (truth) ++m.fn;
    else ++m.tn;
  }
  const auto pos = detail::class_metrics(m.tp, m.fp, m.fn);
  const auto neg = detail::class_metrics(m.tn, m.fn, m.fp);
  m.precision = pos.precision;
  m.recall = pos.recall;
  m.f1 = pos.f1;
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
  m.roc_auc = roc_auc(scores, labels);
  m.macro = {(pos.precision + neg.precision) / 2.0, (pos.recall + neg.recall) / 2.0, (pos.f1 + neg.f1) / 2.0,
             m.total()};
  const double wp = static_cast<double>(pos.support), wn = static_cast<double>(neg.support), w = wp + wn;
  m.weighted = {(wp * pos.precision + wn * neg.precision) / w, (wp * pos.recall + wn * neg.recall) / w,
                (wp * pos.f1 + wn * neg.f1) / w, m.total()};
  return m;
}

template <typename Model>
std::vector<double> predict_all(const Model& model, const Matrix& X) {
  std::vector<double> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = model.predict_proba(X.row(r));
  return out;
}

template <typename Model>
EvalMetrics evaluate(const Model& model, const LabeledDataset& test, double threshold = 0.5) {
  if (test.size() == 0) throw DataError("evaluate: empty test split");
  const auto scores = predict_all(model, test.X);
  return evaluate_scores(scores, test.y, threshold);
}

}  // namespace verilens
