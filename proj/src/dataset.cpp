#include "graftforest/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "graftforest/error.hpp"
#include "graftforest/random.hpp"

namespace graftforest {

RowMatrix::RowMatrix(std::size_t rows, std::size_t cols) : cols_(cols), values_(rows * cols, 0.0) {}

RowMatrix::RowMatrix(std::size_t cols, std::vector<double> values) : cols_(cols), values_(std::move(values)) {
  if (cols_ == 0 && !values_.empty()) throw InputError("RowMatrix: zero columns with nonempty storage");
  if (cols_ != 0 && values_.size() % cols_ != 0) throw InputError("RowMatrix: storage is not a multiple of the column count");
}

void RowMatrix::append_row(std::span<const double> row) {
  if (cols_ == 0) cols_ = row.size();
  if (row.size() != cols_) throw InputError("RowMatrix: row of length " + std::to_string(row.size()) + ", expected " + std::to_string(cols_));
  values_.insert(values_.end(), row.begin(), row.end());
}

Dataset::Dataset(RowMatrix features, std::vector<double> targets, std::vector<std::string> feature_names)
    : features_(std::move(features)), targets_(std::move(targets)), feature_names_(std::move(feature_names)) {
  if (features_.cols() == 0) throw InputError("Dataset: need at least one feature");
  if (features_.rows() == 0) throw InputError("Dataset: need at least one row");
  if (features_.rows() != targets_.size()) {
    throw InputError("Dataset: " + std::to_string(features_.rows()) + " feature rows but " + std::to_string(targets_.size()) + " targets");
  }
  if (!feature_names_.empty() && feature_names_.size() != features_.cols()) {
    throw InputError("Dataset: feature name count does not match feature count");
  }
  for (double v : features_.values()) {
    if (!std::isfinite(v)) throw InputError("Dataset: non-finite feature value");
  }
  for (double v : targets_) {
    if (!std::isfinite(v)) throw InputError("Dataset: non-finite target value");
  }
}

bool Dataset::in_unit_cube() const {
  return std::all_of(features_.values().begin(), features_.values().end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  RowMatrix features(rows.size(), n_features());
  std::vector<double> targets(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= this->rows()) throw InputError("Dataset::subset: row index out of range");
    std::copy_n(row(rows[k]).begin(), n_features(), features.row(k).begin());
    targets[k] = targets_[rows[k]];
  }
  return Dataset(std::move(features), std::move(targets), feature_names_);
}

Dataset Dataset::with_targets(std::vector<double> targets) const {
  return Dataset(features_, std::move(targets), feature_names_);
}

MinMaxScaler MinMaxScaler::fit(const RowMatrix& features) {
  MinMaxScaler scaler;
  const std::size_t p = features.cols();
  scaler.lower.assign(p, 0.0);
  scaler.upper.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double lo = features(0, j);
    double hi = lo;
    for (std::size_t i = 1; i < features.rows(); ++i) {
      lo = std::min(lo, features(i, j));
      hi = std::max(hi, features(i, j));
    }
    scaler.lower[j] = lo;
    scaler.upper[j] = hi;
  }
  return scaler;
}

std::vector<double> MinMaxScaler::apply(std::span<const double> x) const {
  if (x.size() != lower.size()) throw InputError("MinMaxScaler: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double range = upper[j] - lower[j];
    out[j] = range > 0.0 ? (x[j] - lower[j]) / range : 0.0;
  }
  return out;
}

RowMatrix MinMaxScaler::apply(const RowMatrix& points) const {
  RowMatrix out(points.rows(), points.cols());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto scaled = apply(points.row(i));
    std::copy(scaled.begin(), scaled.end(), out.row(i).begin());
  }
  return out;
}

std::vector<double> MinMaxScaler::invert(std::span<const double> x) const {
  if (x.size() != lower.size()) throw InputError("MinMaxScaler: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = lower[j] + x[j] * (upper[j] - lower[j]);
  return out;
}

const char* to_string(ResampleMode mode) {
  return mode == ResampleMode::with_replacement ? "with_replacement" : "without_replacement";
}

ResampleMode parse_resample_mode(std::string_view text) {
  if (text == "with_replacement" || text == "with" || text == "bootstrap") return ResampleMode::with_replacement;
  if (text == "without_replacement" || text == "without" || text == "subsample") return ResampleMode::without_replacement;
  throw ConfigError("unknown resample mode '" + std::string(text) + "'");
}

std::vector<SampleCount> ResamplePlan::support() const {
  std::vector<SampleCount> out;
  for (std::size_t i = 0; i < multiplicities.size(); ++i) {
    if (multiplicities[i] > 0) out.push_back({static_cast<std::uint32_t>(i), multiplicities[i]});
  }
  return out;
}

ResamplePlan draw_resample(std::size_t n, std::size_t resample_size, ResampleMode mode, std::uint64_t seed) {
  if (n == 0) throw ConfigError("draw_resample: empty dataset");
  if (resample_size == 0) throw ConfigError("draw_resample: resample size a_n must be positive");
  if (resample_size > n) {
    throw ConfigError("draw_resample: a_n = " + std::to_string(resample_size) + " exceeds n = " + std::to_string(n));
  }
  ResamplePlan plan;
  plan.size = resample_size;
  plan.mode = mode;
  plan.multiplicities.assign(n, 0);
  Rng rng(seed);
  if (mode == ResampleMode::with_replacement) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t k = 0; k < resample_size; ++k) ++plan.multiplicities[pick(rng)];
  } else {
    // Partial Fisher-Yates: the first a_n slots hold the selection.
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0U);
    for (std::size_t k = 0; k < resample_size; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(order[k], order[pick(rng)]);
      plan.multiplicities[order[k]] = 1;
    }
  }
  return plan;
}

ResamplePlan full_resample(std::size_t n) {
  ResamplePlan plan;
  plan.size = n;
  plan.mode = ResampleMode::without_replacement;
  plan.multiplicities.assign(n, 1);
  return plan;
}

std::size_t default_resample_size(std::size_t n) { return (10 * n + 12) / 13; }

TrainTestSplit train_test_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("train_test_split: test fraction must lie in (0,1)");
  const auto test_size = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  TrainTestSplit split;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_size));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(test_size), order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

}  // namespace graftforest
