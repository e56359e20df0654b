#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "graftforest/dataset.hpp"
#include "graftforest/random.hpp"
#include "graftforest/tree.hpp"

namespace graftforest {

/// The resampled points of one node. Counts and means are multiplicity-weighted.
struct NodeSample {
  std::vector<SampleCount> members;
  double count = 0.0;
  double mean = 0.0;

  static NodeSample from(const Dataset& data, std::vector<SampleCount> members);
};

struct GainEvaluation {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
  double left_count = 0.0;
  double right_count = 0.0;
  double left_mean = 0.0;
  double right_mean = 0.0;
};

/// Midpoint of a < b that is guaranteed to satisfy a <= z < b.
double split_midpoint(double a, double b);

/// Midpoints between consecutive distinct values of the node along `feature`.
std::vector<double> candidate_thresholds(const Dataset& data, const NodeSample& node, std::size_t feature);

/// Impurity gain of splitting at (feature, threshold), product form
/// N_L N_R / N^2 * (mean_L - mean_R)^2. Throws InputError if a child is empty.
GainEvaluation impurity_gain(const Dataset& data, const NodeSample& node, std::size_t feature, double threshold);

/// Same gain via the within-node variance decrease. Kept as an independent
/// route for checking the product form.
double variance_decrease_gain(const Dataset& data, const NodeSample& node, std::size_t feature, double threshold);

/// Arg-max of the gain over `features` x candidate thresholds among splits whose
/// children both hold at least `min_leaf` resampled points. Ties go to the lower
/// feature index, then the lower threshold. Empty when nothing is legal or the
/// node is pure.
std::optional<GainEvaluation> best_split(const Dataset& data, const NodeSample& node,
                                         std::span<const std::size_t> features, std::size_t min_leaf = 1);

/// mtry features drawn uniformly without replacement, returned sorted.
std::vector<std::size_t> draw_feature_subset(std::size_t p, std::size_t mtry, Rng& rng);

struct CartParams {
  /// Both children of a committed split hold at least this many resampled points.
  std::size_t min_leaf = 1;
  /// Candidate features per split; 0 means all.
  std::size_t mtry = 0;
};

TreeModel grow_cart(const Dataset& data, const ResamplePlan& plan, const CartParams& params, std::uint64_t seed);
TreeModel grow_cart(const Dataset& data, std::vector<SampleCount> root, const CartParams& params, std::uint64_t seed);

bool is_pure(const Dataset& data, std::span<const SampleCount> members);

}  // namespace graftforest
