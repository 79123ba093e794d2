#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "verilens/core.hpp"
#include "verilens/featurize.hpp"

namespace verilens {

enum class Provenance : std::uint8_t { Original, Synthetic };

// Labeled design matrix. Labels are 0/1; synthetic rows come from resampling.
struct LabeledDataset {
  std::vector<std::string> feature_names;
  Matrix X;
  std::vector<int> y;
  std::vector<Provenance> provenance;
  std::vector<std::string> row_ids;

  std::size_t size() const { return X.rows(); }
  std::size_t dims() const { return X.cols(); }

  std::size_t count(int label) const {
    return static_cast<std::size_t>(std::count(y.begin(), y.end(), label));
  }

  bool both_classes() const { return count(0) > 0 && count(1) > 0; }

  void require_resamplable() const {
    if (size() < 2 || !both_classes()) throw DataError("resampling needs at least two rows and both classes");
    for (double v : X.data())
      if (!std::isfinite(v)) throw DataError("dataset contains non-finite values");
  }

  void push(std::span<const double> row, int label, Provenance p, std::string id) {
    if (X.rows() == 0 && X.cols() == 0 && row.size() == 0) throw DataError("empty feature row");
    X.append_row(row);
    y.push_back(label);
    provenance.push_back(p);
    row_ids.push_back(std::move(id));
  }

  LabeledDataset subset(std::span<const std::size_t> idx) const {
    LabeledDataset out;
    out.feature_names = feature_names;
    out.X = X.select_rows(idx);
    for (auto i : idx) {
      out.y.push_back(y[i]);
      out.provenance.push_back(provenance[i]);
      out.row_ids.push_back(row_ids[i]);
    }
    return out;
  }

  LabeledDataset select_features(std::span<const std::size_t> cols) const {
    LabeledDataset out = *this;
    out.X = X.select_cols(cols);
    out.feature_names.clear();
    for (auto c : cols) out.feature_names.push_back(feature_names[c]);
    return out;
  }
};

inline LabeledDataset to_dataset(const FeatureRegistry& registry, const std::vector<FeatureVector>& vectors) {
  LabeledDataset ds;
  ds.feature_names = registry.names();
  ds.X = Matrix(0, registry.size());
  for (const auto& v : vectors) ds.push(v.values, v.label ? 1 : 0, Provenance::Original, v.user_id);
  return ds;
}

// Zero-mean, unit-variance scaling. Constant columns keep scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Matrix& X) {
    Standardizer s;
    const std::size_t n = X.rows(), d = X.cols();
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    if (n == 0) return s;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) s.mean[c] += X(r, c);
    for (auto& m : s.mean) m /= static_cast<double>(n);
    std::vector<double> var(d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        const double z = X(r, c) - s.mean[c];
        var[c] += z * z;
      }
    for (std::size_t c = 0; c < d; ++c) {
      const double sd = std::sqrt(var[c] / static_cast<double>(n));
      s.scale[c] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
  }

  void apply_row(std::span<double> row) const {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / scale[c];
  }

  Matrix apply(const Matrix& X) const {
    if (X.cols() != mean.size()) throw DataError("standardizer width mismatch");
    Matrix out = X;
    for (std::size_t r = 0; r < out.rows(); ++r) apply_row(out.row(r));
    return out;
  }

  std::vector<double> apply(std::span<const double> row) const {
    std::vector<double> out(row.begin(), row.end());
    apply_row(out);
    return out;
  }

  void invert_row(std::span<double> row) const {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = row[c] * scale[c] + mean[c];
  }

  nlohmann::json to_json() const { return {{"mean", mean}, {"scale", scale}}; }
  static Standardizer from_json(const nlohmann::json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.scale = j.at("scale").get<std::vector<double>>();
    return s;
  }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per-class shuffle, then the first round(fraction * class size) rows of each class go to test.
inline SplitIndices stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) throw ConfigError("test fraction must lie in [0,1)");
  SplitIndices out;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
    rng.shuffle(idx);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    out.test.insert(out.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

// CSV: row_id,label,<features>,provenance
inline void write_dataset_csv(const std::string& path, const LabeledDataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "row_id,label";
  for (const auto& n : ds.feature_names) out << ',' << n;
  out << ",provenance\n";
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out << ds.row_ids[r] << ',' << ds.y[r];
    for (double v : ds.X.row(r)) out << ',' << format_double(v);
    out << ',' << (ds.provenance[r] == Provenance::Original ? "original" : "synthetic") << '\n';
  }
}

inline LabeledDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty dataset file");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "row_id" || header[1] != "label" || header.back() != "provenance")
    throw DataError(path + ": unexpected dataset header");
  LabeledDataset ds;
  ds.feature_names.assign(header.begin() + 2, header.end() - 1);
  ds.X = Matrix(0, ds.feature_names.size());
  std::vector<double> row(ds.feature_names.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw DataError(path + ": ragged row");
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = std::stod(cells[i + 2]);
    ds.push(row, std::stoi(cells[1]), cells.back() == "synthetic" ? Provenance::Synthetic : Provenance::Original,
            cells[0]);
  }
  return ds;
}

}  // namespace verilens
