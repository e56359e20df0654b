#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graftforest/dataset.hpp"

namespace graftforest {

enum class LeafRegressorKind { constant, nadaraya_watson, kernel_ridge };

const char* to_string(LeafRegressorKind kind);
/// Registry lookup by name: "constant", "nadaraya_watson", "kernel_ridge".
LeafRegressorKind parse_leaf_regressor_kind(std::string_view name);

/// Either a fixed bandwidth h, or the rate rule h = scale * n^(-1/(4+beta)).
struct BandwidthRule {
  std::optional<double> fixed;
  double scale = 1.0;
  double beta = 1.0;

  static BandwidthRule fixed_at(double h) { return BandwidthRule{h, 1.0, 1.0}; }
  double resolve(std::size_t n) const;
};

/// Name plus hyperparameters of the regressor fitted on each CART leaf.
struct LeafRegressorSpec {
  LeafRegressorKind kind = LeafRegressorKind::constant;
  BandwidthRule bandwidth;
  double ridge = 1e-3;
};

double gaussian_kernel(std::span<const double> a, std::span<const double> b, double bandwidth);

/// Immutable fitted estimator over a leaf's (feature-masked) sample.
class FittedLeafRegressor {
 public:
  LeafRegressorKind kind() const { return kind_; }
  std::size_t dims() const { return points_.cols(); }
  double bandwidth() const { return bandwidth_; }
  double ridge() const { return ridge_; }
  double fallback_mean() const { return fallback_mean_; }
  /// True when the fit failed (singular system) and predictions use the mean.
  bool fell_back() const { return fell_back_; }
  const std::string& warning() const { return warning_; }

  const RowMatrix& points() const { return points_; }
  const std::vector<double>& targets() const { return targets_; }
  const std::vector<double>& coefficients() const { return coefficients_; }

  /// x is given in the masked coordinates the regressor was fitted on.
  double predict(std::span<const double> x) const;

  struct Parts {
    LeafRegressorKind kind = LeafRegressorKind::constant;
    RowMatrix points;
    std::vector<double> targets;
    double bandwidth = 1.0;
    double ridge = 0.0;
    std::vector<double> coefficients;
    double fallback_mean = 0.0;
    bool fell_back = false;
    std::string warning;
  };
  static FittedLeafRegressor restore(Parts parts);

  friend FittedLeafRegressor fit_constant(RowMatrix points, std::vector<double> targets);
  friend FittedLeafRegressor fit_nadaraya_watson(RowMatrix points, std::vector<double> targets, const BandwidthRule& rule);
  friend FittedLeafRegressor fit_kernel_ridge(RowMatrix points, std::vector<double> targets, double bandwidth, double ridge);

 private:
  FittedLeafRegressor() = default;

  LeafRegressorKind kind_ = LeafRegressorKind::constant;
  RowMatrix points_;
  std::vector<double> targets_;
  double bandwidth_ = 1.0;
  double ridge_ = 0.0;
  std::vector<double> coefficients_;
  double fallback_mean_ = 0.0;
  bool fell_back_ = false;
  std::string warning_;
};

FittedLeafRegressor fit_constant(RowMatrix points, std::vector<double> targets);

/// Gaussian-kernel local average.
FittedLeafRegressor fit_nadaraya_watson(RowMatrix points, std::vector<double> targets, const BandwidthRule& rule);

/// Solves (K + ridge I) c = y with the Gaussian kernel; predicts k(x) . c.
/// A numerically singular system falls back to the target mean.
FittedLeafRegressor fit_kernel_ridge(RowMatrix points, std::vector<double> targets, double bandwidth, double ridge);

FittedLeafRegressor fit_leaf_regressor(const LeafRegressorSpec& spec, RowMatrix points, std::vector<double> targets);

}  // namespace graftforest
