#include "graftforest/grafting.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "graftforest/cart.hpp"
#include "graftforest/centered.hpp"
#include "graftforest/error.hpp"
#include "graftforest/random.hpp"

namespace graftforest {

namespace {

void check_params(const GraftParams& params) {
  if (params.leaf_size == 0) throw ConfigError("q_n must be at least 1");
  if (!(params.alpha >= 1.0) || !std::isfinite(params.alpha)) throw ConfigError("alpha_n must be a finite number >= 1");
}

TreeModel grow_cart_phase(const Dataset& data, const ResamplePlan& plan, const GraftParams& params, std::uint64_t cart_seed) {
  check_params(params);
  CartParams cart;
  cart.min_leaf = cart_phase_leaf_size(params.leaf_size, params.alpha);
  cart.mtry = params.mtry;
  return grow_cart(data, plan, cart, cart_seed);
}

std::vector<std::size_t> eligible_features(const TreeModel& cart, std::size_t p, bool restrict) {
  if (restrict) {
    auto selected = cart_selected_features(cart);
    if (!selected.empty()) return selected;
  }
  std::vector<std::size_t> all(p);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

}  // namespace

std::size_t cart_phase_leaf_size(std::size_t leaf_size, double alpha) {
  const double product = alpha * static_cast<double>(leaf_size);
  const double nearest = std::round(product);
  if (std::abs(product - nearest) <= 1e-9 * std::max(1.0, product)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(product));
}

std::uint64_t scion_seed_for_leaf(std::uint64_t scion_seed, std::size_t leaf_ordinal) {
  return derive_seed(scion_seed, static_cast<std::uint64_t>(leaf_ordinal));
}

TreeModel grow_grafted(const Dataset& data, const ResamplePlan& plan, const GraftParams& params,
                       std::uint64_t cart_seed, std::uint64_t scion_seed) {
  TreeModel cart = grow_cart_phase(data, plan, params, cart_seed);
  CenteredParams scion_params;
  scion_params.min_leaf = params.leaf_size;
  scion_params.features = eligible_features(cart, data.n_features(), params.restrict_to_cart_features);

  std::vector<Leaf> leaves;
  leaves.reserve(cart.leaves().size());
  for (std::size_t k = 0; k < cart.leaves().size(); ++k) {
    const Leaf& host = cart.leaves()[k];
    auto scion = std::make_shared<const TreeModel>(
        grow_centered(data, host.samples, scion_params, scion_seed_for_leaf(scion_seed, k)));
    leaves.push_back(Leaf{ScionLeaf{std::move(scion)}, host.samples});
  }
  return TreeModel(data.n_features(), cart.nodes(), std::move(leaves));
}

TreeModel grow_grafted_general(const Dataset& data, const ResamplePlan& plan, const GraftParams& params,
                               const LeafRegressorSpec& regressor, std::uint64_t cart_seed) {
  TreeModel cart = grow_cart_phase(data, plan, params, cart_seed);
  if (regressor.kind == LeafRegressorKind::constant) return cart;

  const auto features = eligible_features(cart, data.n_features(), params.restrict_to_cart_features);
  std::vector<Leaf> leaves;
  leaves.reserve(cart.leaves().size());
  for (const Leaf& host : cart.leaves()) {
    RowMatrix points(0, features.size());
    std::vector<double> targets;
    std::vector<double> masked(features.size());
    for (const SampleCount& s : host.samples) {
      for (std::size_t k = 0; k < features.size(); ++k) masked[k] = data.x(s.index, features[k]);
      for (std::uint32_t rep = 0; rep < s.count; ++rep) {
        points.append_row(masked);
        targets.push_back(data.y(s.index));
      }
    }
    leaves.push_back(Leaf{RegressorLeaf{fit_leaf_regressor(regressor, std::move(points), std::move(targets)), features},
                          host.samples});
  }
  return TreeModel(data.n_features(), cart.nodes(), std::move(leaves));
}

std::vector<std::size_t> cart_selected_features(const TreeModel& tree) {
  std::vector<std::size_t> out;
  for (const TreeNode& node : tree.nodes()) {
    if (!node.is_leaf()) out.push_back(node.split.feature);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace graftforest
