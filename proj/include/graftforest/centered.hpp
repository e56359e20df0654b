#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "graftforest/dataset.hpp"
#include "graftforest/tree.hpp"

namespace graftforest {

/// Middle order statistic (odd count) or the midpoint of the two middle order
/// statistics (even count). Empty when fewer than two distinct values exist.
std::optional<double> sample_median(std::span<const double> values);

struct CenteredParams {
  /// Both children of a committed split hold at least this many resampled points.
  std::size_t min_leaf = 1;
  /// Maximum depth k_n; nodes at this depth become leaves.
  std::optional<std::size_t> depth_cap;
  /// Features eligible for the uniform draw. Unset means all features.
  std::optional<std::vector<std::size_t>> features;
};

/// Centered (median) tree: at each node a feature is drawn uniformly from the
/// eligible set and the node is split at the sample median along it. Points equal
/// to the median go left; a split that leaves a child below min_leaf ends the branch.
TreeModel grow_centered(const Dataset& data, std::vector<SampleCount> root, const CenteredParams& params,
                        std::uint64_t seed);
TreeModel grow_centered(const Dataset& data, const ResamplePlan& plan, const CenteredParams& params, std::uint64_t seed);

/// floor((log n + c1) / (log 2 - log(1 - 3/(4p)))), clamped at zero.
std::size_t recommended_depth(std::size_t p, std::size_t n, double c1 = 0.0);

}  // namespace graftforest
