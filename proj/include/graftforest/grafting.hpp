#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "graftforest/dataset.hpp"
#include "graftforest/leaf_regressors.hpp"
#include "graftforest/tree.hpp"

namespace graftforest {

struct GraftParams {
  /// q_n: minimum leaf size of the final (scion) leaves.
  std::size_t leaf_size = 1;
  /// alpha_n >= 1: the CART phase stops at leaves of ceil(alpha_n * q_n).
  double alpha = 1.0;
  /// Candidate features per CART split; 0 means all.
  std::size_t mtry = 0;
  /// Grow scions (or fit leaf regressors) only on features the CART phase split on.
  bool restrict_to_cart_features = false;
};

/// ceil(alpha * q), robust to alpha * q landing a hair above an integer.
std::size_t cart_phase_leaf_size(std::size_t leaf_size, double alpha);

/// Seed of the scion grown on the CART leaf with table index `leaf_ordinal`.
std::uint64_t scion_seed_for_leaf(std::uint64_t scion_seed, std::size_t leaf_ordinal);

/// Shallow CART followed by a centered scion on every CART leaf.
TreeModel grow_grafted(const Dataset& data, const ResamplePlan& plan, const GraftParams& params,
                       std::uint64_t cart_seed, std::uint64_t scion_seed);

/// Shallow CART followed by a fitted regressor on every CART leaf. The
/// "constant" regressor yields ordinary constant-mean leaves.
TreeModel grow_grafted_general(const Dataset& data, const ResamplePlan& plan, const GraftParams& params,
                               const LeafRegressorSpec& regressor, std::uint64_t cart_seed);

/// Sorted set of features used by the tree's own (CART-phase) splits.
std::vector<std::size_t> cart_selected_features(const TreeModel& tree);

}  // namespace graftforest
