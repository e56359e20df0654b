#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace graftforest {

/// Dense row-major matrix of reals. Used for feature matrices, meshes and probes.
class RowMatrix {
 public:
  RowMatrix() = default;
  RowMatrix(std::size_t rows, std::size_t cols);
  RowMatrix(std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return cols_ == 0 ? 0 : values_.size() / cols_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

  void append_row(std::span<const double> row);
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// The training sample: n points in p dimensions with real targets.
class Dataset {
 public:
  Dataset(RowMatrix features, std::vector<double> targets, std::vector<std::string> feature_names = {});

  std::size_t rows() const { return features_.rows(); }
  std::size_t n_features() const { return features_.cols(); }

  double x(std::size_t i, std::size_t j) const { return features_(i, j); }
  std::span<const double> row(std::size_t i) const { return features_.row(i); }
  double y(std::size_t i) const { return targets_[i]; }

  const RowMatrix& features() const { return features_; }
  const std::vector<double>& targets() const { return targets_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  /// True when every feature value lies in [0,1].
  bool in_unit_cube() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset with_targets(std::vector<double> targets) const;

 private:
  RowMatrix features_;
  std::vector<double> targets_;
  std::vector<std::string> feature_names_;
};

/// Per-feature min-max map onto [0,1]. Constant columns map to 0.
struct MinMaxScaler {
  std::vector<double> lower;
  std::vector<double> upper;

  static MinMaxScaler fit(const RowMatrix& features);
  std::vector<double> apply(std::span<const double> x) const;
  RowMatrix apply(const RowMatrix& points) const;
  std::vector<double> invert(std::span<const double> x) const;
};

/// Sample index together with its resampling multiplicity s_i.
struct SampleCount {
  std::uint32_t index = 0;
  std::uint32_t count = 0;

  friend bool operator==(const SampleCount&, const SampleCount&) = default;
};

enum class ResampleMode { with_replacement, without_replacement };

const char* to_string(ResampleMode mode);
ResampleMode parse_resample_mode(std::string_view text);

/// Multiplicities of one tree's resample. Sums to `size` (a_n).
struct ResamplePlan {
  std::vector<std::uint32_t> multiplicities;
  std::size_t size = 0;
  ResampleMode mode = ResampleMode::without_replacement;

  /// Indices with s_i > 0, in ascending order.
  std::vector<SampleCount> support() const;
};

/// Draws a_n of n samples. Deterministic given seed.
ResamplePlan draw_resample(std::size_t n, std::size_t resample_size, ResampleMode mode, std::uint64_t seed);

/// Plan with s_i = 1 for every sample.
ResamplePlan full_resample(std::size_t n);

/// a_n = ceil(n / 1.3), computed in integers.
std::size_t default_resample_size(std::size_t n);

/// Splits [0, n) into a training and a test index set; |test| = round(n * test_fraction).
struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
TrainTestSplit train_test_split(std::size_t n, double test_fraction, std::uint64_t seed);

}  // namespace graftforest
