#include "graftforest/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "graftforest/error.hpp"
#include "graftforest/leaf_regressors.hpp"
#include "graftforest/random.hpp"

namespace graftforest {

double mesh_l2_error(const Predictor& predictor, const Cef& truth, const RowMatrix& mesh) {
  std::vector<double> predictions(mesh.rows());
  for (std::size_t i = 0; i < mesh.rows(); ++i) predictions[i] = predictor(mesh.row(i));
  return mesh_l2_error(predictions, truth, mesh);
}

double mesh_l2_error(std::span<const double> predictions, const Cef& truth, const RowMatrix& mesh) {
  if (mesh.rows() == 0) throw InputError("mesh_l2_error: empty mesh");
  if (predictions.size() != mesh.rows()) throw InputError("mesh_l2_error: one prediction per mesh point is required");
  double sum = 0.0;
  for (std::size_t i = 0; i < mesh.rows(); ++i) {
    const double d = predictions[i] - truth(mesh.row(i));
    sum += d * d;
  }
  return sum / static_cast<double>(mesh.rows());
}

double forest_mesh_error(const ForestModel& forest, const Cef& truth, const RowMatrix& mesh, unsigned threads) {
  return mesh_l2_error(predict_forest(forest, mesh, threads), truth, mesh);
}

double test_error(const Predictor& predictor, const Dataset& data, std::span<const std::size_t> test) {
  if (test.empty()) throw InputError("test_error: empty test set");
  double sum = 0.0;
  for (std::size_t i : test) {
    if (i >= data.rows()) throw InputError("test_error: index " + std::to_string(i) + " out of range");
    const double d = data.y(i) - predictor(data.row(i));
    sum += d * d;
  }
  return sum / static_cast<double>(test.size());
}

double CVResult::best_value(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InputError("CVResult: no parameter named '" + name + "'");
  return best_params()[static_cast<std::size_t>(it - names.begin())];
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (folds > n) {
    throw ConfigError(std::to_string(folds) + "-fold cross-validation on " + std::to_string(n) +
                      " rows leaves a validation fold empty");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t begin = k * n / folds;
    const std::size_t end = (k + 1) * n / folds;
    out[k].assign(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(out[k].begin(), out[k].end());
  }
  return out;
}

std::vector<std::vector<double>> grid_candidates(const std::vector<ParamDimension>& space) {
  std::vector<std::vector<double>> out{{}};
  for (const ParamDimension& dim : space) {
    if (dim.values.empty()) throw ConfigError("search dimension '" + dim.name + "' has no values");
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out) {
      for (double v : dim.values) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    }
    out = std::move(next);
  }
  return out;
}

CVResult random_search_cv(const Dataset& data, const CVPlan& plan, const FoldTrainer& trainer) {
  if (plan.space.empty()) throw ConfigError("cross-validation search space is empty");
  auto candidates = grid_candidates(plan.space);
  if (plan.budget > 0 && plan.budget < candidates.size()) {
    std::vector<std::size_t> pick(candidates.size());
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    Rng rng(derive_seed(plan.seed, 0x5EA2C4ULL));
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(plan.budget);
    std::sort(pick.begin(), pick.end());
    std::vector<std::vector<double>> sampled;
    for (std::size_t i : pick) sampled.push_back(candidates[i]);
    candidates = std::move(sampled);
  }

  const auto folds = make_folds(data.rows(), plan.folds, derive_seed(plan.seed, 0xF01DULL));
  std::vector<Dataset> train_sets;
  std::vector<RowMatrix> validation_sets;
  for (const auto& fold : folds) {
    std::vector<bool> held(data.rows(), false);
    for (std::size_t i : fold) held[i] = true;
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (!held[i]) train.push_back(i);
    }
    train_sets.push_back(data.subset(train));
    RowMatrix validation(0, data.n_features());
    for (std::size_t i : fold) validation.append_row(data.row(i));
    validation_sets.push_back(std::move(validation));
  }

  CVResult result;
  for (const ParamDimension& dim : plan.space) result.names.push_back(dim.name);
  for (const auto& params : candidates) {
    CVRow row;
    row.params = params;
    for (std::size_t k = 0; k < folds.size(); ++k) {
      const auto predictions = trainer(train_sets[k], validation_sets[k], params);
      if (predictions.size() != folds[k].size()) throw InvariantViolation("CV trainer returned the wrong number of predictions");
      double sum = 0.0;
      for (std::size_t r = 0; r < folds[k].size(); ++r) {
        const double d = predictions[r] - data.y(folds[k][r]);
        sum += d * d;
      }
      row.fold_mse.push_back(sum / static_cast<double>(folds[k].size()));
    }
    row.mean_mse = std::accumulate(row.fold_mse.begin(), row.fold_mse.end(), 0.0) / static_cast<double>(row.fold_mse.size());
    result.table.push_back(std::move(row));
  }
  for (std::size_t c = 1; c < result.table.size(); ++c) {
    const CVRow& challenger = result.table[c];
    const CVRow& best = result.table[result.best];
    if (challenger.mean_mse < best.mean_mse ||
        (challenger.mean_mse == best.mean_mse && challenger.params < best.params)) {
      result.best = c;
    }
  }
  return result;
}

GrowthConfig apply_params(const GrowthConfig& base, const std::vector<std::string>& names, std::span<const double> values) {
  if (names.size() != values.size()) throw InputError("apply_params: names and values differ in length");
  GrowthConfig out = base;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const std::string& name = names[k];
    const double v = values[k];
    if (name == "leaf_size") {
      out.leaf_size = static_cast<std::size_t>(std::llround(v));
    } else if (name == "alpha") {
      out.alpha = v;
    } else if (name == "bandwidth") {
      out.leaf_regressor.bandwidth = BandwidthRule::fixed_at(v);
    } else if (name == "bandwidth_scale") {
      out.leaf_regressor.bandwidth.fixed.reset();
      out.leaf_regressor.bandwidth.scale = v;
    } else if (name == "ridge") {
      out.leaf_regressor.ridge = v;
    } else if (name == "mtry") {
      out.mtry = static_cast<std::size_t>(std::llround(v));
    } else {
      throw ConfigError("unknown forest hyperparameter '" + name + "'");
    }
  }
  return out;
}

FoldTrainer forest_fold_trainer(const GrowthConfig& base, const std::vector<std::string>& names, std::size_t full_n,
                                unsigned threads) {
  return [base, names, full_n, threads](const Dataset& train, const RowMatrix& validation, std::span<const double> params) {
    GrowthConfig config = apply_params(base, names, params);
    if (config.resample_size) {
      const double scaled = static_cast<double>(*config.resample_size) * static_cast<double>(train.rows()) /
                            static_cast<double>(full_n);
      config.resample_size = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(scaled)), 1, train.rows());
    }
    const ForestModel forest = train_forest(train, config, TrainOptions{threads});
    return predict_forest(forest, validation, threads);
  };
}

Predictor fit_plain_kernel_ridge(const Dataset& data, double bandwidth, double ridge) {
  auto model = std::make_shared<FittedLeafRegressor>(
      fit_kernel_ridge(data.features(), data.targets(), bandwidth, ridge));
  return [model](std::span<const double> x) { return model->predict(x); };
}

FoldTrainer kernel_ridge_fold_trainer(const std::vector<std::string>& names) {
  return [names](const Dataset& train, const RowMatrix& validation, std::span<const double> params) {
    double bandwidth = 1.0;
    double ridge = 1e-3;
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k] == "bandwidth") {
        bandwidth = params[k];
      } else if (names[k] == "ridge") {
        ridge = params[k];
      } else {
        throw ConfigError("unknown kernel ridge hyperparameter '" + names[k] + "'");
      }
    }
    const Predictor predictor = fit_plain_kernel_ridge(train, bandwidth, ridge);
    std::vector<double> out(validation.rows());
    for (std::size_t i = 0; i < validation.rows(); ++i) out[i] = predictor(validation.row(i));
    return out;
  };
}

SideLengthStats side_length_stats(const ForestModel& forest, const RowMatrix& probes) {
  const std::size_t p = forest.n_features();
  if (probes.cols() != p) throw InputError("side_length_stats: probe dimension mismatch");
  if (probes.rows() == 0) throw InputError("side_length_stats: no probes");
  std::vector<double> sum(p, 0.0);
  std::vector<double> sum_sq(p, 0.0);
  std::vector<double> sum_sq_sq(p, 0.0);
  const double trees = static_cast<double>(forest.trees().size());
  std::vector<double> probe_l(p);
  std::vector<double> probe_l2(p);
  for (std::size_t i = 0; i < probes.rows(); ++i) {
    std::fill(probe_l.begin(), probe_l.end(), 0.0);
    std::fill(probe_l2.begin(), probe_l2.end(), 0.0);
    for (const TreeModel& tree : forest.trees()) {
      Hyperrectangle box = Hyperrectangle::unit(p);
      tree.narrow_to_leaf(probes.row(i), box);
      for (std::size_t j = 0; j < p; ++j) {
        const double side = box.side(j);
        probe_l[j] += side / trees;
        probe_l2[j] += side * side / trees;
      }
    }
    for (std::size_t j = 0; j < p; ++j) {
      sum[j] += probe_l[j];
      sum_sq[j] += probe_l2[j];
      sum_sq_sq[j] += probe_l2[j] * probe_l2[j];
    }
  }
  const double n = static_cast<double>(probes.rows());
  SideLengthStats out;
  out.probes = probes.rows();
  for (std::size_t j = 0; j < p; ++j) {
    const double mean_sq = sum_sq[j] / n;
    out.mean.push_back(sum[j] / n);
    out.mean_sq.push_back(mean_sq);
    const double variance = n > 1 ? std::max(0.0, (sum_sq_sq[j] - n * mean_sq * mean_sq) / (n - 1.0)) : 0.0;
    out.se_sq.push_back(std::sqrt(variance / n));
  }
  return out;
}

double side_length_bound(std::size_t p, double alpha) {
  if (p == 0) throw InputError("side_length_bound: p must be positive");
  if (!(alpha >= 1.0)) throw InputError("side_length_bound: alpha must be >= 1");
  const double halvings = std::floor(std::log2(alpha) + 1e-12);
  return std::pow(1.0 - 5.0 / (8.0 * static_cast<double>(p)), halvings);
}

}  // namespace graftforest
