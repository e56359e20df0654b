#include "graftforest/forest.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "graftforest/cart.hpp"
#include "graftforest/centered.hpp"
#include "graftforest/error.hpp"
#include "graftforest/grafting.hpp"
#include "graftforest/parallel.hpp"
#include "graftforest/random.hpp"

namespace graftforest {

unsigned default_thread_count() {
  if (const char* env = std::getenv("GRAFTFOREST_THREADS")) {
    const long value = std::strtol(env, nullptr, 10);
    if (value > 0) return static_cast<unsigned>(value);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::cart: return "cart";
    case Algorithm::centered: return "centered";
    case Algorithm::grafted: return "grafted";
    case Algorithm::grafted_general: return "grafted_general";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "cart") return Algorithm::cart;
  if (name == "centered") return Algorithm::centered;
  if (name == "grafted") return Algorithm::grafted;
  if (name == "grafted_general") return Algorithm::grafted_general;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

GrowthConfig resolve_config(const GrowthConfig& config, std::size_t n, std::size_t p) {
  GrowthConfig out = config;
  if (out.n_trees == 0) throw ConfigError("the forest needs at least one tree");
  if (out.leaf_size == 0) throw ConfigError("q_n must be at least 1");
  if (!(out.alpha >= 1.0) || !std::isfinite(out.alpha)) throw ConfigError("alpha_n must be a finite number >= 1");
  if (!out.resample_size) out.resample_size = default_resample_size(n);
  if (*out.resample_size == 0 || *out.resample_size > n) {
    throw ConfigError("a_n = " + std::to_string(*out.resample_size) + " must lie in [1, n = " + std::to_string(n) + "]");
  }
  if (!out.resample_mode) {
    out.resample_mode = out.algorithm == Algorithm::cart ? ResampleMode::with_replacement : ResampleMode::without_replacement;
  }
  if (!out.mtry) out.mtry = p;
  if (*out.mtry == 0 || *out.mtry > p) throw ConfigError("mtry must lie in [1, p = " + std::to_string(p) + "]");
  return out;
}

ForestModel::ForestModel(GrowthConfig config, std::vector<TreeModel> trees, std::vector<std::uint64_t> tree_seeds,
                         std::size_t n_features, std::size_t n_train, std::optional<MinMaxScaler> scaler,
                         std::vector<std::string> feature_names)
    : config_(std::move(config)),
      trees_(std::move(trees)),
      tree_seeds_(std::move(tree_seeds)),
      n_features_(n_features),
      n_train_(n_train),
      scaler_(std::move(scaler)),
      feature_names_(std::move(feature_names)) {
  if (trees_.empty()) throw InputError("ForestModel: a forest needs at least one tree");
  if (tree_seeds_.size() != trees_.size()) throw InputError("ForestModel: one seed per tree is required");
  for (const TreeModel& tree : trees_) {
    if (tree.n_features() != n_features_) throw InputError("ForestModel: trees disagree on the feature count");
  }
  if (scaler_ && scaler_->lower.size() != n_features_) throw InputError("ForestModel: scaler dimension mismatch");
  if (!feature_names_.empty() && feature_names_.size() != n_features_) throw InputError("ForestModel: feature name count mismatch");
}

std::vector<double> ForestModel::to_model_space(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw InputError("point has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(n_features_));
  }
  if (scaler_) return scaler_->apply(x);
  return {x.begin(), x.end()};
}

ForestModel ForestModel::with_scaler(MinMaxScaler scaler, std::vector<std::string> feature_names) const {
  return ForestModel(config_, trees_, tree_seeds_, n_features_, n_train_, std::move(scaler), std::move(feature_names));
}

std::uint64_t tree_seed(std::uint64_t master, std::size_t index) { return derive_seed(master, static_cast<std::uint64_t>(index)); }

ResamplePlan tree_resample(const GrowthConfig& resolved, std::size_t n, std::size_t index) {
  const std::uint64_t seed = tree_seed(resolved.seed, index);
  return draw_resample(n, resolved.resample_size.value(), resolved.resample_mode.value(), derive_seed(seed, SeedStream::resample));
}

TreeModel grow_tree(const Dataset& data, const GrowthConfig& resolved, std::size_t index) {
  const std::uint64_t seed = tree_seed(resolved.seed, index);
  const ResamplePlan plan = tree_resample(resolved, data.rows(), index);
  const std::uint64_t cart_seed = derive_seed(seed, SeedStream::cart);
  const std::uint64_t scion_seed = derive_seed(seed, SeedStream::scion);

  GraftParams graft;
  graft.leaf_size = resolved.leaf_size;
  graft.alpha = resolved.alpha;
  graft.mtry = resolved.mtry.value();
  graft.restrict_to_cart_features = resolved.restrict_scion_features;

  switch (resolved.algorithm) {
    case Algorithm::cart:
      return grow_cart(data, plan, CartParams{resolved.leaf_size, resolved.mtry.value()}, cart_seed);
    case Algorithm::centered: {
      CenteredParams params;
      params.min_leaf = resolved.leaf_size;
      params.depth_cap = resolved.max_depth;
      // Same stream a single scion on a root-only CART would use.
      return grow_centered(data, plan, params, scion_seed_for_leaf(scion_seed, 0));
    }
    case Algorithm::grafted:
      return grow_grafted(data, plan, graft, cart_seed, scion_seed);
    case Algorithm::grafted_general:
      return grow_grafted_general(data, plan, graft, resolved.leaf_regressor, cart_seed);
  }
  throw InvariantViolation("grow_tree: unhandled algorithm");
}

ForestModel train_forest(const Dataset& data, const GrowthConfig& config, const TrainOptions& options) {
  const GrowthConfig resolved = resolve_config(config, data.rows(), data.n_features());
  std::vector<std::optional<TreeModel>> grown(resolved.n_trees);
  parallel_for(resolved.n_trees, options.threads, [&](std::size_t i) { grown[i].emplace(grow_tree(data, resolved, i)); });

  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> seeds;
  trees.reserve(grown.size());
  for (std::size_t i = 0; i < grown.size(); ++i) {
    trees.push_back(std::move(*grown[i]));
    seeds.push_back(tree_seed(resolved.seed, i));
  }
  return ForestModel(resolved, std::move(trees), std::move(seeds), data.n_features(), data.rows(), std::nullopt,
                     data.feature_names());
}

double predict_forest(const ForestModel& forest, std::span<const double> x) {
  const std::vector<double> point = forest.to_model_space(x);
  // Streaming mean: M identical trees reproduce the single-tree value exactly.
  double mean = 0.0;
  double count = 0.0;
  for (const TreeModel& tree : forest.trees()) {
    count += 1.0;
    mean += (predict_tree(tree, point) - mean) / count;
  }
  return mean;
}

std::vector<double> predict_forest(const ForestModel& forest, const RowMatrix& points, unsigned threads) {
  std::vector<double> out(points.rows());
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (points.rows() + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(points.rows(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) out[i] = predict_forest(forest, points.row(i));
  });
  return out;
}

std::vector<double> forest_weights(const ForestModel& forest, std::span<const double> x) {
  const std::vector<double> point = forest.to_model_space(x);
  std::vector<double> weights(forest.n_train(), 0.0);
  const double tree_share = 1.0 / static_cast<double>(forest.trees().size());
  for (const TreeModel& tree : forest.trees()) {
    const Leaf& leaf = tree.final_leaf_at(point);
    if (!std::holds_alternative<ConstantLeaf>(leaf.payload)) {
      throw UnsupportedOperation("forest_weights: leaves with fitted regressors have no local-averaging form");
    }
    const double total = static_cast<double>(leaf.sample_count());
    if (total == 0.0) throw InvariantViolation("forest_weights: empty leaf");
    for (const SampleCount& s : leaf.samples) {
      if (s.index >= weights.size()) throw InvariantViolation("forest_weights: leaf sample index out of range");
      weights[s.index] += tree_share * (s.count / total);
    }
  }
  return weights;
}

int classify(const ForestModel& forest, std::span<const double> x) { return predict_forest(forest, x) > 0.5 ? 1 : 0; }

}  // namespace graftforest
