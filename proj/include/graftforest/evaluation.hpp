#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "graftforest/dataset.hpp"
#include "graftforest/forest.hpp"
#include "graftforest/synthetic.hpp"

namespace graftforest {

using Predictor = std::function<double(std::span<const double>)>;

/// Mean of (prediction(x) - m(x))^2 over the mesh.
double mesh_l2_error(const Predictor& predictor, const Cef& truth, const RowMatrix& mesh);
double mesh_l2_error(std::span<const double> predictions, const Cef& truth, const RowMatrix& mesh);
/// Batched forest version of mesh_l2_error.
double forest_mesh_error(const ForestModel& forest, const Cef& truth, const RowMatrix& mesh, unsigned threads = 0);

/// Mean squared error of `predictor` over rows `test` of `data`.
double test_error(const Predictor& predictor, const Dataset& data, std::span<const std::size_t> test);

/// One searchable hyperparameter and its discrete candidate values.
struct ParamDimension {
  std::string name;
  std::vector<double> values;
};

struct CVPlan {
  std::size_t folds = 50;
  std::vector<ParamDimension> space;
  /// Maximum candidates evaluated; 0 means the whole grid. Grids larger than the
  /// budget are sampled uniformly without replacement.
  std::size_t budget = 0;
  std::uint64_t seed = 0;
};

/// Trains on `train` and returns predictions for the rows of `validation`. The
/// validation targets are never visible to the trainer.
using FoldTrainer = std::function<std::vector<double>(const Dataset& train, const RowMatrix& validation,
                                                      std::span<const double> params)>;

struct CVRow {
  std::vector<double> params;
  std::vector<double> fold_mse;
  double mean_mse = 0.0;
};

struct CVResult {
  std::vector<std::string> names;
  std::vector<CVRow> table;
  std::size_t best = 0;

  const std::vector<double>& best_params() const { return table.at(best).params; }
  double best_value(const std::string& name) const;
};

/// Shuffled partition of [0, n) into `folds` near-equal validation slices.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds, std::uint64_t seed);

/// Every combination of the space, first dimension varying slowest.
std::vector<std::vector<double>> grid_candidates(const std::vector<ParamDimension>& space);

/// K-fold CV over the candidates; the argmin of mean validation MSE wins, ties
/// going to the lexicographically smallest parameter vector.
CVResult random_search_cv(const Dataset& data, const CVPlan& plan, const FoldTrainer& trainer);

/// Copies `base` with the named parameters overridden. Recognized names:
/// leaf_size, alpha, bandwidth, bandwidth_scale, ridge, mtry.
GrowthConfig apply_params(const GrowthConfig& base, const std::vector<std::string>& names, std::span<const double> values);

/// Forest trainer for CV. An explicit a_n is rescaled to each fold's training
/// size in proportion to `full_n`; otherwise the default ceil(n/1.3) rule applies per fold.
FoldTrainer forest_fold_trainer(const GrowthConfig& base, const std::vector<std::string>& names, std::size_t full_n,
                                unsigned threads = 0);

/// Plain kernel ridge on the whole training set; parameters bandwidth and ridge.
FoldTrainer kernel_ridge_fold_trainer(const std::vector<std::string>& names);

/// Kernel ridge on all rows of `data` with a fixed bandwidth.
Predictor fit_plain_kernel_ridge(const Dataset& data, double bandwidth, double ridge);

/// Per-feature leaf side lengths l_j of the final cell containing each probe.
struct SideLengthStats {
  std::vector<double> mean;
  std::vector<double> mean_sq;
  /// Standard error of mean_sq over probes (per-probe averages over trees).
  std::vector<double> se_sq;
  std::size_t probes = 0;
};

SideLengthStats side_length_stats(const ForestModel& forest, const RowMatrix& probes);

/// Upper bound (1 - 5/(8p))^floor(log2 alpha) on E[l_j^2] for grafted trees.
double side_length_bound(std::size_t p, double alpha);

}  // namespace graftforest
