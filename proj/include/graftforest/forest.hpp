#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graftforest/dataset.hpp"
#include "graftforest/leaf_regressors.hpp"
#include "graftforest/tree.hpp"

namespace graftforest {

enum class Algorithm { cart, centered, grafted, grafted_general };

const char* to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

/// Everything needed to regrow a forest bit-for-bit from the same dataset.
struct GrowthConfig {
  Algorithm algorithm = Algorithm::cart;
  /// M
  std::size_t n_trees = 100;
  /// a_n; unset means ceil(n / 1.3).
  std::optional<std::size_t> resample_size;
  /// Unset means with replacement for CART and without replacement otherwise.
  std::optional<ResampleMode> resample_mode;
  /// q_n
  std::size_t leaf_size = 1;
  /// alpha_n (grafted algorithms only)
  double alpha = 1.0;
  /// nu; unset means all features.
  std::optional<std::size_t> mtry;
  /// k_n for centered trees.
  std::optional<std::size_t> max_depth;
  std::uint64_t seed = 0;
  LeafRegressorSpec leaf_regressor;
  bool restrict_scion_features = false;
};

/// Fills every unset field for a dataset of `n` rows and `p` features and validates the result.
GrowthConfig resolve_config(const GrowthConfig& config, std::size_t n, std::size_t p);

struct TrainOptions {
  /// Parallel tree-training width; 0 means default_thread_count().
  unsigned threads = 0;
};

/// Immutable trained ensemble. Safe for concurrent prediction.
class ForestModel {
 public:
  ForestModel(GrowthConfig config, std::vector<TreeModel> trees, std::vector<std::uint64_t> tree_seeds,
              std::size_t n_features, std::size_t n_train, std::optional<MinMaxScaler> scaler = std::nullopt,
              std::vector<std::string> feature_names = {});

  const GrowthConfig& config() const { return config_; }
  const std::vector<TreeModel>& trees() const { return trees_; }
  const std::vector<std::uint64_t>& tree_seeds() const { return tree_seeds_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t n_train() const { return n_train_; }
  const std::optional<MinMaxScaler>& scaler() const { return scaler_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  /// Applies the stored ingestion transform (if any) to a raw input point.
  std::vector<double> to_model_space(std::span<const double> x) const;

  ForestModel with_scaler(MinMaxScaler scaler, std::vector<std::string> feature_names) const;

 private:
  GrowthConfig config_;
  std::vector<TreeModel> trees_;
  std::vector<std::uint64_t> tree_seeds_;
  std::size_t n_features_;
  std::size_t n_train_;
  std::optional<MinMaxScaler> scaler_;
  std::vector<std::string> feature_names_;
};

/// Seed of tree `index` under master seed `master`.
std::uint64_t tree_seed(std::uint64_t master, std::size_t index);

/// The resample tree `index` uses (resolved config required).
ResamplePlan tree_resample(const GrowthConfig& resolved, std::size_t n, std::size_t index);

/// Grows tree `index` of the forest described by a resolved config.
TreeModel grow_tree(const Dataset& data, const GrowthConfig& resolved, std::size_t index);

ForestModel train_forest(const Dataset& data, const GrowthConfig& config, const TrainOptions& options = {});

/// Mean of the per-tree predictions at x.
double predict_forest(const ForestModel& forest, std::span<const double> x);
std::vector<double> predict_forest(const ForestModel& forest, const RowMatrix& points, unsigned threads = 0);

/// Local-averaging weights W_i(x), averaged over trees. Length n_train.
/// Throws UnsupportedOperation for forests whose leaves hold fitted regressors.
std::vector<double> forest_weights(const ForestModel& forest, std::span<const double> x);

/// 1 if the forest prediction exceeds 1/2, else 0.
int classify(const ForestModel& forest, std::span<const double> x);

}  // namespace graftforest
