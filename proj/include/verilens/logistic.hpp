#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "verilens/core.hpp"
#include "verilens/dataset.hpp"

namespace verilens {

struct LogisticConfig {
  double l2 = 1e-4;             // penalty on weights, intercept unpenalized
  double learning_rate = 1.0;   // initial step on the scaled gradient; backtracking adapts it
  std::size_t max_epochs = 5000;
  double tolerance = 1e-6;      // stop when the gradient norm falls below this
};

struct LogisticModel {
  std::vector<std::string> feature_names;
  std::vector<double> weights;  // in standardized units
  double intercept = 0.0;
  Standardizer standardizer;
  LogisticConfig config;
  std::size_t epochs = 0;
  double final_loss = 0.0;
  double gradient_norm = 0.0;
  bool degenerate = false;  // single-class training data

  double margin(std::span<const double> row) const {
    if (row.size() != weights.size())
      throw DataError("logistic: expected " + std::to_string(weights.size()) + " features, got " +
                      std::to_string(row.size()));
    double m = intercept;
    for (std::size_t c = 0; c < row.size(); ++c)
      m += weights[c] * (row[c] - standardizer.mean[c]) / standardizer.scale[c];
    return m;
  }

  double predict_proba(std::span<const double> row) const { return sigmoid(margin(row)); }

  nlohmann::json to_json() const {
    return {{"format", "verilens.logistic"},
            {"version", 1},
            {"feature_names", feature_names},
            {"weights", weights},
            {"intercept", intercept},
            {"standardizer", standardizer.to_json()},
            {"config",
             {{"l2", config.l2},
              {"learning_rate", config.learning_rate},
              {"max_epochs", config.max_epochs},
              {"tolerance", config.tolerance}}},
            {"epochs", epochs},
            {"final_loss", final_loss},
            {"gradient_norm", gradient_norm},
            {"degenerate", degenerate}};
  }

  static LogisticModel from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "verilens.logistic" || j.value("version", 0) != 1)
      throw DataError("not a version 1 logistic model file");
    LogisticModel m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.standardizer = Standardizer::from_json(j.at("standardizer"));
    const auto& c = j.at("config");
    m.config = {c.at("l2").get<double>(), c.at("learning_rate").get<double>(), c.at("max_epochs").get<std::size_t>(),
                c.at("tolerance").get<double>()};
    m.epochs = j.at("epochs").get<std::size_t>();
    m.final_loss = j.at("final_loss").get<double>();
    m.gradient_norm = j.at("gradient_norm").get<double>();
    m.degenerate = j.at("degenerate").get<bool>();
    return m;
  }
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // d weights followed by the intercept
};

// Mean log-loss plus (l2/2)*|w|^2 over design matrix Z; params = [w..., b].
inline LossAndGradient logistic_objective(const Matrix& Z, std::span<const int> y, std::span<const double> params,
                                          double l2) {
  const std::size_t n = Z.rows(), d = Z.cols();
  LossAndGradient out;
  out.gradient.assign(d + 1, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto z = Z.row(r);
    double m = params[d];
    for (std::size_t c = 0; c < d; ++c) m += params[c] * z[c];
    const double softplus = std::max(m, 0.0) + std::log1p(std::exp(-std::abs(m)));
    out.loss += softplus - static_cast<double>(y[r]) * m;
    const double resid = sigmoid(m) - static_cast<double>(y[r]);
    for (std::size_t c = 0; c < d; ++c) out.gradient[c] += resid * z[c];
    out.gradient[d] += resid;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss *= inv_n;
  for (auto& g : out.gradient) g *= inv_n;
  for (std::size_t c = 0; c < d; ++c) {
    out.loss += 0.5 * l2 * params[c] * params[c];
    out.gradient[c] += l2 * params[c];
  }
  return out;
}

inline LogisticModel train_logistic(const LabeledDataset& ds, const LogisticConfig& cfg = {}) {
  if (ds.size() == 0) throw DataError("logistic: empty training set");
  LogisticModel model;
  model.feature_names = ds.feature_names;
  model.config = cfg;
  model.standardizer = Standardizer::fit(ds.X);
  const std::size_t d = ds.dims();
  model.weights.assign(d, 0.0);
  if (!ds.both_classes()) {
    const double rate = static_cast<double>(ds.count(1)) / static_cast<double>(ds.size());
    model.intercept = logit(std::clamp(rate, 1e-6, 1.0 - 1e-6));
    model.degenerate = true;
    return model;
  }
  const Matrix Z = model.standardizer.apply(ds.X);
  // Per-coordinate step scale 1/(1/4 + penalty), 1/4 bounding the log-loss curvature.
  std::vector<double> precond(d + 1, 1.0 / 0.25);
  for (std::size_t i = 0; i < d; ++i) precond[i] = 1.0 / (0.25 + cfg.l2);
  std::vector<double> params(d + 1, 0.0), trial(d + 1);
  auto cur = logistic_objective(Z, ds.y, params, cfg.l2);
  double step = cfg.learning_rate;
  auto norm2 = [](const std::vector<double>& g) {
    double s = 0.0;
    for (double x : g) s += x * x;
    return s;
  };
  std::size_t epoch = 0;
  for (; epoch < cfg.max_epochs; ++epoch) {
    if (!std::isfinite(cur.loss)) throw DataError("logistic: non-finite loss; check feature scaling");
    if (std::sqrt(norm2(cur.gradient)) < cfg.tolerance) break;
    double decrease = 0.0;
    for (std::size_t i = 0; i <= d; ++i) decrease += cur.gradient[i] * precond[i] * cur.gradient[i];
    LossAndGradient next;
    for (;;) {
      for (std::size_t i = 0; i <= d; ++i) trial[i] = params[i] - step * precond[i] * cur.gradient[i];
      next = logistic_objective(Z, ds.y, trial, cfg.l2);
      if (next.loss <= cur.loss - 0.5 * step * decrease || step < 1e-12) break;
      step *= 0.5;
    }
    if (next.loss > cur.loss) break;  // no descent possible at machine precision
    params = trial;
    cur = std::move(next);
    step = std::min(step * 2.0, 1e4);
  }
  if (!std::isfinite(cur.loss)) throw DataError("logistic: non-finite loss; check feature scaling");
  std::copy(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(d), model.weights.begin());
  model.intercept = params[d];
  model.epochs = epoch;
  model.final_loss = cur.loss;
  model.gradient_norm = std::sqrt(norm2(cur.gradient));
  return model;
}

}  // namespace verilens
