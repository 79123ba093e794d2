#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include "verilens/dataset.hpp"

namespace verilens {

struct ResampleConfig {
  std::size_t k = 5;
  double beta = 1.0;  // desired balance level in (0,1]
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// Exact k nearest neighbours by Euclidean distance. The query row is never its
// own neighbour; equal distances go to the lower row index. With
// `same_class_only`, candidates share the query's label.
inline std::vector<std::vector<std::size_t>> knn(const Matrix& X, std::span<const int> y,
                                                 std::span<const std::size_t> queries, std::size_t k,
                                                 bool same_class_only, unsigned threads = 1) {
  const std::size_t n = X.rows();
  for (auto q : queries) {
    std::size_t eligible = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != q && (!same_class_only || y[j] == y[q])) ++eligible;
    if (k == 0 || k > eligible)
      throw ConfigError("knn: k=" + std::to_string(k) + " but only " + std::to_string(eligible) +
                        " eligible neighbours");
  }
  std::vector<std::vector<std::size_t>> out(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t qi) {
    const std::size_t q = queries[qi];
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n);
    const auto qrow = X.row(q);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == q || (same_class_only && y[j] != y[q])) continue;
      cand.emplace_back(squared_distance(qrow, X.row(j)), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    auto& nb = out[qi];
    for (std::size_t i = 0; i < k; ++i) nb.push_back(cand[i].second);
  });
  return out;
}

namespace detail {

// Permutation of rows sorted lexicographically by content, then label, then index.
inline std::vector<std::size_t> canonical_order(const Matrix& X, std::span<const int> y) {
  std::vector<std::size_t> idx(X.rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    auto ra = X.row(a), rb = X.row(b);
    for (std::size_t c = 0; c < ra.size(); ++c)
      if (ra[c] != rb[c]) return ra[c] < rb[c];
    return y[a] < y[b];
  });
  return idx;
}

inline int minority_label(const LabeledDataset& ds) { return ds.count(1) <= ds.count(0) ? 1 : 0; }

inline std::string synthetic_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synthetic_%06zu", i);
  return buf;
}

}  // namespace detail

// SMOTE generation. Base rows are taken round-robin in canonical (content)
// order; each base row owns a random stream derived from `seed` and its
// canonical rank. Synthetic row = x_i + u * (x_z - x_i), u ~ U[0,1), x_z one of
// the k nearest minority neighbours of x_i under `metric` (raw Euclidean if null).
inline Matrix smote_sample(const Matrix& minority, std::size_t k, std::size_t n_needed, std::uint64_t seed,
                           const Standardizer* metric = nullptr, unsigned threads = 1) {
  const std::size_t m = minority.rows();
  if (m <= k) throw ConfigError("SMOTE needs more than k=" + std::to_string(k) + " minority rows, got " + std::to_string(m));
  Matrix out(0, minority.cols());
  if (n_needed == 0) return out;
  const std::vector<int> same(m, 1);
  const auto order = detail::canonical_order(minority, same);
  const Matrix canon = minority.select_rows(order);
  const Matrix space = metric ? metric->apply(canon) : canon;
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  const auto nb = knn(space, same, all, k, true, threads);
  std::vector<Rng> streams;
  streams.reserve(m);
  for (std::size_t i = 0; i < m; ++i) streams.emplace_back(derive_seed(seed, i));
  std::vector<double> row(minority.cols());
  for (std::size_t j = 0; j < n_needed; ++j) {
    const std::size_t i = j % m;
    auto& rng = streams[i];
    const std::size_t z = nb[i][rng.index(k)];
    const double lam = rng.uniform();
    auto xi = canon.row(i), xz = canon.row(z);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = xi[c] + lam * (xz[c] - xi[c]);
    out.append_row(row);
  }
  return out;
}

struct AdasynAllocation {
  int minority = 1;
  std::size_t target = 0;               // G
  std::vector<std::size_t> minority_rows;  // dataset rows, canonical order
  std::vector<std::size_t> majority_neighbors;  // Delta_i
  std::vector<double> weights;          // r-hat_i, sums to 1
  std::vector<std::size_t> counts;      // g_i
  bool uniform_fallback = false;
};

struct ResampleResult {
  LabeledDataset data;
  std::string method;
  std::size_t synthetic = 0;
  std::size_t removed = 0;
  std::size_t target = 0;
  std::vector<std::string> removed_rows;
  std::vector<std::pair<std::size_t, std::size_t>> links;

  nlohmann::json report() const {
    return {{"method", method},
            {"rows", data.size()},
            {"positives", data.count(1)},
            {"negatives", data.count(0)},
            {"synthetic", synthetic},
            {"synthetic_target", target},
            {"removed", removed}};
  }
};

// ADASYN weights: r_i = (majority among the k nearest of any class) / k,
// normalised; g_i = round(r-hat_i * G) with G = (m_l - m_s) * beta.
inline AdasynAllocation adasyn_allocation(const LabeledDataset& ds, const ResampleConfig& cfg) {
  ds.require_resamplable();
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) throw ConfigError("beta must lie in (0,1]");
  AdasynAllocation a;
  a.minority = detail::minority_label(ds);
  const std::size_t ms = ds.count(a.minority), ml = ds.count(1 - a.minority);
  if (cfg.k == 0 || cfg.k >= ms)
    throw ConfigError("ADASYN needs k < minority count (k=" + std::to_string(cfg.k) + ", minority=" +
                      std::to_string(ms) + ")");
  a.target = static_cast<std::size_t>(std::llround(static_cast<double>(ml - ms) * cfg.beta));
  const auto metric = Standardizer::fit(ds.X);
  const auto order = detail::canonical_order(ds.X, ds.y);
  const Matrix Z = metric.apply(ds.X.select_rows(order));
  std::vector<int> yc;
  for (auto i : order) yc.push_back(ds.y[i]);
  std::vector<std::size_t> queries;
  for (std::size_t i = 0; i < order.size(); ++i)
    if (yc[i] == a.minority) queries.push_back(i);
  const auto nb = knn(Z, yc, queries, cfg.k, false, cfg.threads);
  double total = 0.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    std::size_t maj = 0;
    for (auto j : nb[q])
      if (yc[j] != a.minority) ++maj;
    a.minority_rows.push_back(order[queries[q]]);
    a.majority_neighbors.push_back(maj);
    a.weights.push_back(static_cast<double>(maj) / static_cast<double>(cfg.k));
    total += a.weights.back();
  }
  if (total == 0.0) {
    a.uniform_fallback = true;
    for (auto& w : a.weights) w = 1.0 / static_cast<double>(a.weights.size());
  } else {
    for (auto& w : a.weights) w /= total;
  }
  for (double w : a.weights)
    a.counts.push_back(static_cast<std::size_t>(std::llround(w * static_cast<double>(a.target))));
  return a;
}

inline ResampleResult adasyn(const LabeledDataset& ds, const ResampleConfig& cfg) {
  const auto alloc = adasyn_allocation(ds, cfg);
  ResampleResult res;
  res.method = "adasyn";
  res.data = ds;
  res.target = alloc.target;
  const auto metric = Standardizer::fit(ds.X);
  const Matrix minority = ds.X.select_rows(alloc.minority_rows);  // already canonical
  const Matrix Zm = metric.apply(minority);
  const std::vector<int> same(minority.rows(), 1);
  std::vector<std::size_t> all(minority.rows());
  std::iota(all.begin(), all.end(), 0);
  const auto nb = knn(Zm, same, all, cfg.k, true, cfg.threads);
  std::vector<double> row(ds.dims());
  for (std::size_t i = 0; i < minority.rows(); ++i) {
    Rng rng(derive_seed(cfg.seed, i));
    auto xi = minority.row(i);
    for (std::size_t g = 0; g < alloc.counts[i]; ++g) {
      const std::size_t z = nb[i][rng.index(cfg.k)];
      const double lam = rng.uniform();
      auto xz = minority.row(z);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = xi[c] + lam * (xz[c] - xi[c]);
      res.data.push(row, alloc.minority, Provenance::Synthetic, detail::synthetic_id(res.synthetic++));
    }
  }
  return res;
}

// Cross-class mutual nearest neighbours (exact 1-NN, lower index on ties),
// reported once as (i, j) with i < j.
inline std::vector<std::pair<std::size_t, std::size_t>> tomek_links(const Matrix& X, std::span<const int> y,
                                                                    unsigned threads = 1) {
  const std::size_t n = X.rows();
  if (n < 2) return {};
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const auto nb = knn(X, y, all, 1, false, threads);
  std::vector<std::pair<std::size_t, std::size_t>> links;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = nb[i][0];
    if (i < j && nb[j][0] == i && y[i] != y[j]) links.emplace_back(i, j);
  }
  return links;
}

// Tomek links in the standardized space of the dataset itself.
inline std::vector<std::pair<std::size_t, std::size_t>> tomek_links(const LabeledDataset& ds, unsigned threads = 1) {
  ds.require_resamplable();
  const auto metric = Standardizer::fit(ds.X);
  return tomek_links(metric.apply(ds.X), ds.y, threads);
}

// SMOTE to full balance, then one pass removing the majority member of every
// Tomek link in the augmented set. Distances use the input's standardization.
inline ResampleResult smote_tomek(const LabeledDataset& ds, const ResampleConfig& cfg) {
  ds.require_resamplable();
  const auto metric = Standardizer::fit(ds.X);
  const int minority = detail::minority_label(ds);
  const std::size_t ms = ds.count(minority), ml = ds.count(1 - minority);
  std::vector<std::size_t> min_rows;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.y[i] == minority) min_rows.push_back(i);
  ResampleResult res;
  res.method = "smotetomek";
  res.target = ml - ms;
  LabeledDataset aug = ds;
  const Matrix synth = smote_sample(ds.X.select_rows(min_rows), cfg.k, ml - ms, cfg.seed, &metric, cfg.threads);
  for (std::size_t r = 0; r < synth.rows(); ++r)
    aug.push(synth.row(r), minority, Provenance::Synthetic, detail::synthetic_id(res.synthetic++));
  res.links = tomek_links(metric.apply(aug.X), aug.y, cfg.threads);
  std::vector<bool> drop(aug.size(), false);
  for (auto [i, j] : res.links) drop[aug.y[i] == minority ? j : i] = true;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < aug.size(); ++i) {
    if (drop[i]) {
      res.removed_rows.push_back(aug.row_ids[i]);
      ++res.removed;
    } else {
      keep.push_back(i);
    }
  }
  res.data = aug.subset(keep);
  return res;
}

}  // namespace verilens
