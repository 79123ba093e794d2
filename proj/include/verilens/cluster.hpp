#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "verilens/core.hpp"
#include "verilens/metrics.hpp"

namespace verilens {

struct ClusteringResult {
  std::size_t k = 0;
  Matrix centroids;
  std::vector<std::size_t> assignment;
  double inertia = 0.0;
  std::vector<std::size_t> populations;
  std::vector<double> inertia_trace;  // after every assignment step, then the final value
  std::size_t iterations = 0;
};

inline std::size_t distinct_rows(const Matrix& X) {
  std::vector<std::vector<double>> rows;
  rows.reserve(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) rows.emplace_back(X.row(r).begin(), X.row(r).end());
  std::sort(rows.begin(), rows.end());
  return static_cast<std::size_t>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

// K-Means++ seeding: first centroid uniform, later ones drawn with
// probability proportional to squared distance to the nearest chosen centroid.
inline Matrix kmeanspp_init(const Matrix& X, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ConfigError("kmeans: k must be positive");
  if (k > distinct_rows(X))
    throw ConfigError("kmeans: k=" + std::to_string(k) + " exceeds the number of distinct points");
  Rng rng(seed);
  const std::size_t n = X.rows();
  Matrix C(0, X.cols());
  C.append_row(X.row(rng.index(n)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(X.row(i), C.row(0));
  while (C.rows() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    const std::size_t pick = rng.categorical(d2, total);
    C.append_row(X.row(pick));
    const auto c = C.row(C.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(X.row(i), c));
  }
  return C;
}

namespace detail {

// Nearest centroid per point (lowest index on ties); returns total inertia.
inline double assign_points(const Matrix& X, const Matrix& C, std::vector<std::size_t>& assignment,
                            std::vector<double>& dist, unsigned threads) {
  parallel_for(X.rows(), threads, [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < C.rows(); ++c) {
      const double d = squared_distance(X.row(i), C.row(c));
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    assignment[i] = arg;
    dist[i] = best;
  });
  double total = 0.0;
  for (double d : dist) total += d;
  return total;
}

// Centroid means in row order. Empty clusters are re-seeded at the point
// farthest from its own centroid.
inline void update_centroids(const Matrix& X, Matrix& C, const std::vector<std::size_t>& assignment,
                             std::vector<double>& dist) {
  const std::size_t k = C.rows(), m = X.cols();
  std::vector<double> sums(k * m, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto c = assignment[i];
    ++counts[c];
    for (std::size_t j = 0; j < m; ++j) sums[c * m + j] += X(i, j);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
      for (std::size_t j = 0; j < m; ++j) C(c, j) = X(far, j);
      dist[far] = 0.0;
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) C(c, j) = sums[c * m + j] / static_cast<double>(counts[c]);
  }
}

}  // namespace detail

inline ClusteringResult lloyd(const Matrix& X, Matrix centroids, double tol = 1e-6, std::size_t max_iter = 300,
                              unsigned threads = 1) {
  ClusteringResult res;
  res.k = centroids.rows();
  const std::size_t n = X.rows();
  std::vector<std::size_t> assignment(n, 0);
  std::vector<double> dist(n, 0.0);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double inertia = detail::assign_points(X, centroids, assignment, dist, threads);
    res.inertia_trace.push_back(inertia);
    res.iterations = it + 1;
    const Matrix before = centroids;
    detail::update_centroids(X, centroids, assignment, dist);
    const bool fixpoint = centroids == before;
    const bool small = it > 0 && res.inertia_trace[it - 1] - inertia < tol;
    if (fixpoint || small) break;
  }
  // Final inertia against the updated centroids of the final assignment.
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) inertia += squared_distance(X.row(i), centroids.row(assignment[i]));
  res.inertia_trace.push_back(inertia);
  res.inertia = inertia;
  res.centroids = std::move(centroids);
  res.assignment = std::move(assignment);
  res.populations.assign(res.k, 0);
  for (auto a : res.assignment) ++res.populations[a];
  return res;
}

struct KMeansConfig {
  std::size_t k = 8;
  std::size_t restarts = 10;
  double tol = 1e-6;
  std::size_t max_iter = 300;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// Relabels clusters in order of first appearance over rows.
inline void canonical_labels(ClusteringResult& r) {
  std::vector<std::size_t> map(r.k, r.k);
  std::size_t next = 0;
  for (auto a : r.assignment)
    if (map[a] == r.k) map[a] = next++;
  for (std::size_t c = 0; c < r.k; ++c)
    if (map[c] == r.k) map[c] = next++;
  Matrix C(r.k, r.centroids.cols());
  std::vector<std::size_t> pop(r.k);
  for (std::size_t c = 0; c < r.k; ++c) {
    for (std::size_t j = 0; j < C.cols(); ++j) C(map[c], j) = r.centroids(c, j);
    pop[map[c]] = r.populations[c];
  }
  for (auto& a : r.assignment) a = map[a];
  r.centroids = std::move(C);
  r.populations = std::move(pop);
}

// Best of `restarts` seeded K-Means++ / Lloyd runs by final inertia.
inline ClusteringResult kmeans(const Matrix& X, const KMeansConfig& cfg) {
  if (cfg.restarts == 0) throw ConfigError("kmeans: restarts must be positive");
  std::optional<ClusteringResult> best;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    auto init = kmeanspp_init(X, cfg.k, derive_seed(cfg.seed, r));
    auto res = lloyd(X, std::move(init), cfg.tol, cfg.max_iter, cfg.threads);
    if (!best || res.inertia < best->inertia) best = std::move(res);
  }
  canonical_labels(*best);
  return *best;
}

inline double total_sum_of_squares(const Matrix& X) {
  std::vector<double> mu(X.cols(), 0.0);
  for (std::size_t r = 0; r < X.rows(); ++r)
    for (std::size_t c = 0; c < X.cols(); ++c) mu[c] += X(r, c);
  for (auto& v : mu) v /= static_cast<double>(std::max<std::size_t>(X.rows(), 1));
  double s = 0.0;
  for (std::size_t r = 0; r < X.rows(); ++r) s += squared_distance(X.row(r), mu);
  return s;
}

struct KCurve {
  std::vector<std::size_t> ks;
  std::vector<double> inertia;
  std::vector<double> variance_explained;
  std::vector<double> knee_score;  // second difference, 0 at the ends
  std::size_t recommended = 0;
  double knee_strength = 0.0;  // best second difference over total sum of squares
  bool clear_knee = false;

  nlohmann::json to_json() const {
    return {{"k", ks},
            {"inertia", inertia},
            {"variance_explained", variance_explained},
            {"knee_score", knee_score},
            {"recommended_k", recommended},
            {"knee_strength", knee_strength},
            {"clear_knee", clear_knee}};
  }
};

inline constexpr double kClearKneeStrength = 0.05;

// Inertia curve over candidate ks; the recommendation maximizes the second
// difference I(k-1) - 2 I(k) + I(k+1).
inline KCurve choose_k(const Matrix& X, const std::vector<std::size_t>& ks, std::size_t restarts = 10,
                       std::uint64_t seed = 0, unsigned threads = 1) {
  if (ks.size() < 3) throw ConfigError("choose_k needs at least three candidate ks");
  if (!std::is_sorted(ks.begin(), ks.end()) || std::adjacent_find(ks.begin(), ks.end()) != ks.end())
    throw ConfigError("choose_k candidates must be strictly ascending");
  KCurve curve;
  curve.ks = ks;
  const double tss = total_sum_of_squares(X);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    KMeansConfig cfg;
    cfg.k = ks[i];
    cfg.restarts = restarts;
    cfg.seed = derive_seed(seed, ks[i]);
    cfg.threads = threads;
    const auto r = kmeans(X, cfg);
    curve.inertia.push_back(r.inertia);
    curve.variance_explained.push_back(tss > 0 ? 1.0 - r.inertia / tss : 1.0);
  }
  curve.knee_score.assign(ks.size(), 0.0);
  std::size_t best = 1;
  for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
    curve.knee_score[i] = curve.inertia[i - 1] - 2.0 * curve.inertia[i] + curve.inertia[i + 1];
    if (curve.knee_score[i] > curve.knee_score[best]) best = i;
  }
  curve.recommended = ks[best];
  curve.knee_strength = tss > 0 ? curve.knee_score[best] / tss : 0.0;
  curve.clear_knee = curve.knee_strength >= kClearKneeStrength;
  return curve;
}

// Row-wise z-scoring is done by Standardizer; this is the unit-norm alternative.
inline Matrix unit_norm_rows(const Matrix& X) {
  Matrix out = X;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double s = 0.0;
    for (double v : out.row(r)) s += v * v;
    s = std::sqrt(s);
    if (s > 0)
      for (double& v : out.row(r)) v /= s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Profiles

inline constexpr std::size_t kMinHeldOutForMetrics = 10;

struct ClusterProfile {
  std::size_t cluster = 0;
  std::size_t population = 0;
  std::vector<double> feature_mean;
  std::vector<double> feature_median;
  double verified_fraction = 0.0;
  std::vector<double> probability_deciles;  // 0th, 10th, ..., 100th percentile
  std::size_t held_out = 0;
  bool metrics_suppressed = true;
  std::optional<double> accuracy;
  std::optional<double> roc_auc;

  nlohmann::json to_json(const std::vector<std::string>& feature_names) const {
    nlohmann::json means = nlohmann::json::object(), medians = nlohmann::json::object();
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
      means[feature_names[f]] = feature_mean[f];
      medians[feature_names[f]] = feature_median[f];
    }
    return {{"cluster", cluster},
            {"population", population},
            {"verified_fraction", verified_fraction},
            {"probability_deciles", probability_deciles},
            {"held_out", held_out},
            {"metrics_suppressed", metrics_suppressed},
            {"Accuracy", accuracy ? nlohmann::json(*accuracy) : nlohmann::json(nullptr)},
            {"ROC AUC Score", roc_auc ? nlohmann::json(*roc_auc) : nlohmann::json(nullptr)},
            {"feature_mean", means},
            {"feature_median", medians}};
  }
};

struct ClusterMember {
  std::string user_id;
  std::size_t cluster = 0;
  int label = 0;
  double probability = 0.0;
  bool held_out = false;
};

// Per-cluster summaries. `features` rows align with `members`; members are
// visited in user-id order so results do not depend on input order.
inline std::vector<ClusterProfile> characterize(std::size_t k, const std::vector<ClusterMember>& members,
                                                const Matrix& features) {
  if (features.rows() != members.size()) throw DataError("characterize: feature rows do not match members");
  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return members[a].user_id < members[b].user_id; });
  std::vector<std::vector<std::size_t>> by_cluster(k);
  for (auto i : order) {
    if (members[i].cluster >= k) throw DataError("characterize: cluster id out of range");
    by_cluster[members[i].cluster].push_back(i);
  }
  std::vector<ClusterProfile> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    auto& p = out[c];
    const auto& rows = by_cluster[c];
    p.cluster = c;
    p.population = rows.size();
    p.feature_mean.assign(features.cols(), 0.0);
    p.feature_median.assign(features.cols(), 0.0);
    if (rows.empty()) continue;
    for (std::size_t f = 0; f < features.cols(); ++f) {
      std::vector<double> col;
      for (auto i : rows) col.push_back(features(i, f));
      p.feature_mean[f] = mean(col);
      p.feature_median[f] = median(col);
    }
    std::vector<double> probs, held_scores;
    std::vector<int> held_labels;
    std::size_t verified = 0;
    for (auto i : rows) {
      verified += members[i].label == 1 ? 1 : 0;
      probs.push_back(members[i].probability);
      if (members[i].held_out) {
        held_scores.push_back(members[i].probability);
        held_labels.push_back(members[i].label);
      }
    }
    p.verified_fraction = static_cast<double>(verified) / static_cast<double>(rows.size());
    for (int q = 0; q <= 10; ++q) p.probability_deciles.push_back(quantile(probs, q / 10.0));
    p.held_out = held_scores.size();
    if (p.held_out >= kMinHeldOutForMetrics) {
      p.metrics_suppressed = false;
      std::size_t ok = 0;
      for (std::size_t i = 0; i < held_scores.size(); ++i) ok += (held_scores[i] >= 0.5) == (held_labels[i] == 1);
      p.accuracy = static_cast<double>(ok) / static_cast<double>(held_scores.size());
      const bool both = std::count(held_labels.begin(), held_labels.end(), 1) > 0 &&
                        std::count(held_labels.begin(), held_labels.end(), 0) > 0;
      if (both) p.roc_auc = roc_auc(held_scores, held_labels);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// 2-D principal component projection. Each axis is signed so that its
// largest-magnitude loading is positive.

struct Projection2D {
  Matrix coords;  // n x 2
  std::array<double, 2> explained_ratio{};
};

inline Projection2D pca2d(const Matrix& X) {
  const auto n = static_cast<Eigen::Index>(X.rows()), m = static_cast<Eigen::Index>(X.cols());
  Projection2D out;
  out.coords = Matrix(X.rows(), 2);
  if (n == 0 || m == 0) return out;
  Eigen::MatrixXd A(n, m);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < m; ++c) A(r, c) = X(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  const Eigen::RowVectorXd mu = A.colwise().mean();
  A.rowwise() -= mu;
  const Eigen::MatrixXd cov = (A.transpose() * A) / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double total = es.eigenvalues().sum();
  for (int axis = 0; axis < 2; ++axis) {
    if (axis >= m) break;
    const Eigen::Index idx = m - 1 - axis;  // eigenvalues ascending
    Eigen::VectorXd v = es.eigenvectors().col(idx);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    const Eigen::VectorXd proj = A * v;
    for (Eigen::Index r = 0; r < n; ++r) out.coords(static_cast<std::size_t>(r), static_cast<std::size_t>(axis)) = proj(r);
    out.explained_ratio[static_cast<std::size_t>(axis)] = total > 0 ? std::max(0.0, es.eigenvalues()(idx)) / total : 0.0;
  }
  return out;
}

}  // namespace verilens
