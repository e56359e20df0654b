#include "graftforest/leaf_regressors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "graftforest/error.hpp"

namespace graftforest {

namespace {

constexpr double kMinReciprocalCondition = 1e-13;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    sum += d * d;
  }
  return sum;
}

double mean_of(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

void check_sample(const RowMatrix& points, const std::vector<double>& targets) {
  if (targets.empty()) throw InputError("leaf regressor: need at least one training point");
  if (points.rows() != targets.size()) throw InputError("leaf regressor: point and target counts differ");
}

}  // namespace

const char* to_string(LeafRegressorKind kind) {
  switch (kind) {
    case LeafRegressorKind::constant: return "constant";
    case LeafRegressorKind::nadaraya_watson: return "nadaraya_watson";
    case LeafRegressorKind::kernel_ridge: return "kernel_ridge";
  }
  return "unknown";
}

LeafRegressorKind parse_leaf_regressor_kind(std::string_view name) {
  if (name == "constant") return LeafRegressorKind::constant;
  if (name == "nadaraya_watson") return LeafRegressorKind::nadaraya_watson;
  if (name == "kernel_ridge") return LeafRegressorKind::kernel_ridge;
  throw ConfigError("unknown leaf regressor '" + std::string(name) + "'");
}

double BandwidthRule::resolve(std::size_t n) const {
  const double h = fixed ? *fixed : scale * std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), -1.0 / (4.0 + beta));
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("bandwidth must be a positive finite number");
  return h;
}

double gaussian_kernel(std::span<const double> a, std::span<const double> b, double bandwidth) {
  return std::exp(-squared_distance(a, b) / (2.0 * bandwidth * bandwidth));
}

double FittedLeafRegressor::predict(std::span<const double> x) const {
  if (x.size() != dims()) throw InputError("leaf regressor: query has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(dims()));
  if (fell_back_ || kind_ == LeafRegressorKind::constant) return fallback_mean_;

  const std::size_t n = targets_.size();
  if (kind_ == LeafRegressorKind::nadaraya_watson) {
    // Shift by the nearest squared distance so the weights never all underflow.
    std::vector<double> dist(n);
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = squared_distance(points_.row(i), x);
      nearest = std::min(nearest, dist[i]);
    }
    const double scale = 2.0 * bandwidth_ * bandwidth_;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::exp(-(dist[i] - nearest) / scale);
      num += w * targets_[i];
      den += w;
    }
    return num / den;
  }

  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) value += coefficients_[i] * gaussian_kernel(points_.row(i), x, bandwidth_);
  return value;
}

FittedLeafRegressor FittedLeafRegressor::restore(Parts parts) {
  check_sample(parts.points, parts.targets);
  FittedLeafRegressor out;
  out.kind_ = parts.kind;
  out.points_ = std::move(parts.points);
  out.targets_ = std::move(parts.targets);
  out.bandwidth_ = parts.bandwidth;
  out.ridge_ = parts.ridge;
  out.coefficients_ = std::move(parts.coefficients);
  out.fallback_mean_ = parts.fallback_mean;
  out.fell_back_ = parts.fell_back;
  out.warning_ = std::move(parts.warning);
  if (out.kind_ == LeafRegressorKind::kernel_ridge && !out.fell_back_ && out.coefficients_.size() != out.targets_.size()) {
    throw InputError("kernel ridge regressor: coefficient count does not match training points");
  }
  return out;
}

FittedLeafRegressor fit_constant(RowMatrix points, std::vector<double> targets) {
  check_sample(points, targets);
  FittedLeafRegressor out;
  out.kind_ = LeafRegressorKind::constant;
  out.fallback_mean_ = mean_of(targets);
  out.points_ = std::move(points);
  out.targets_ = std::move(targets);
  return out;
}

FittedLeafRegressor fit_nadaraya_watson(RowMatrix points, std::vector<double> targets, const BandwidthRule& rule) {
  check_sample(points, targets);
  FittedLeafRegressor out;
  out.kind_ = LeafRegressorKind::nadaraya_watson;
  out.bandwidth_ = rule.resolve(targets.size());
  out.fallback_mean_ = mean_of(targets);
  out.points_ = std::move(points);
  out.targets_ = std::move(targets);
  return out;
}

FittedLeafRegressor fit_kernel_ridge(RowMatrix points, std::vector<double> targets, double bandwidth, double ridge) {
  check_sample(points, targets);
  if (!(bandwidth > 0.0)) throw ConfigError("kernel ridge: bandwidth must be positive");
  if (!(ridge >= 0.0)) throw ConfigError("kernel ridge: ridge penalty must be non-negative");
  FittedLeafRegressor out;
  out.kind_ = LeafRegressorKind::kernel_ridge;
  out.bandwidth_ = bandwidth;
  out.ridge_ = ridge;
  out.fallback_mean_ = mean_of(targets);

  const auto n = static_cast<Eigen::Index>(targets.size());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    gram(i, i) = 1.0 + ridge;
    for (Eigen::Index k = 0; k < i; ++k) {
      const double v = gaussian_kernel(points.row(static_cast<std::size_t>(i)), points.row(static_cast<std::size_t>(k)), bandwidth);
      gram(i, k) = v;
      gram(k, i) = v;
    }
  }
  const Eigen::Map<const Eigen::VectorXd> rhs(targets.data(), n);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  bool ok = llt.info() == Eigen::Success && llt.rcond() > kMinReciprocalCondition;
  if (ok) {
    const Eigen::VectorXd solution = llt.solve(rhs);
    ok = solution.allFinite();
    if (ok) out.coefficients_.assign(solution.data(), solution.data() + n);
  }
  if (!ok) {
    out.fell_back_ = true;
    out.warning_ = "kernel ridge system is numerically singular; predicting the leaf mean";
  }
  out.points_ = std::move(points);
  out.targets_ = std::move(targets);
  return out;
}

FittedLeafRegressor fit_leaf_regressor(const LeafRegressorSpec& spec, RowMatrix points, std::vector<double> targets) {
  switch (spec.kind) {
    case LeafRegressorKind::constant:
      return fit_constant(std::move(points), std::move(targets));
    case LeafRegressorKind::nadaraya_watson:
      return fit_nadaraya_watson(std::move(points), std::move(targets), spec.bandwidth);
    case LeafRegressorKind::kernel_ridge: {
      const double h = spec.bandwidth.resolve(targets.size());
      return fit_kernel_ridge(std::move(points), std::move(targets), h, spec.ridge);
    }
  }
  throw InvariantViolation("fit_leaf_regressor: unhandled regressor kind");
}

}  // namespace graftforest
