#include "graftforest/centered.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graftforest/cart.hpp"
#include "graftforest/error.hpp"
#include "graftforest/random.hpp"

namespace graftforest {

namespace {

// Median of a scratch buffer; reorders it.
std::optional<double> median_in_place(std::vector<double>& values) {
  if (values.size() < 2) return std::nullopt;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return std::nullopt;
  const std::size_t n = values.size();
  const auto upper_mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), upper_mid, values.end());
  const double upper = *upper_mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), upper_mid);
  return std::midpoint(lower, upper);
}

class CenteredGrower {
 public:
  CenteredGrower(const Dataset& data, const CenteredParams& params, std::uint64_t seed)
      : data_(data), params_(params), rng_(seed), builder_(data.n_features()) {
    if (params.min_leaf == 0) throw ConfigError("minimum leaf size must be at least 1");
    if (params.features) {
      features_ = *params.features;
      if (features_.empty()) throw ConfigError("grow_centered: the eligible feature set is empty");
      for (std::size_t j : features_) {
        if (j >= data.n_features()) throw ConfigError("grow_centered: eligible feature out of range");
      }
    } else {
      features_.resize(data.n_features());
      std::iota(features_.begin(), features_.end(), std::size_t{0});
    }
  }

  TreeModel run(std::vector<SampleCount> root) && {
    if (root.empty()) throw InputError("grow_centered: empty node sample");
    grow(builder_.reserve(), std::move(root), 0);
    return std::move(builder_).finish();
  }

 private:
  void grow(std::int32_t node, std::vector<SampleCount> members, std::size_t depth) {
    const std::size_t count = total_count(members);
    const bool depth_reached = params_.depth_cap && depth >= *params_.depth_cap;
    if (depth_reached || count < 2 * params_.min_leaf || members.size() < 2 || is_pure(data_, members)) {
      make_leaf(node, std::move(members));
      return;
    }
    std::uniform_int_distribution<std::size_t> pick(0, features_.size() - 1);
    const std::size_t feature = features_[pick(rng_)];

    scratch_.clear();
    for (const SampleCount& s : members) scratch_.insert(scratch_.end(), s.count, data_.x(s.index, feature));
    const auto median = median_in_place(scratch_);
    if (!median) {
      make_leaf(node, std::move(members));
      return;
    }
    const SplitRecord split{feature, *median};
    std::vector<SampleCount> left;
    std::vector<SampleCount> right;
    for (const SampleCount& s : members) (split.goes_left(data_.row(s.index)) ? left : right).push_back(s);
    if (total_count(left) < params_.min_leaf || total_count(right) < params_.min_leaf) {
      make_leaf(node, std::move(members));
      return;
    }
    members.clear();
    members.shrink_to_fit();
    const std::int32_t left_id = builder_.reserve();
    const std::int32_t right_id = builder_.reserve();
    builder_.make_split(node, split, left_id, right_id);
    grow(left_id, std::move(left), depth + 1);
    grow(right_id, std::move(right), depth + 1);
  }

  void make_leaf(std::int32_t node, std::vector<SampleCount> members) {
    const double mean = weighted_mean(data_, members);
    builder_.make_leaf(node, Leaf{ConstantLeaf{mean}, std::move(members)});
  }

  const Dataset& data_;
  CenteredParams params_;
  std::vector<std::size_t> features_;
  Rng rng_;
  TreeBuilder builder_;
  std::vector<double> scratch_;
};

}  // namespace

std::optional<double> sample_median(std::span<const double> values) {
  std::vector<double> copy(values.begin(), values.end());
  return median_in_place(copy);
}

TreeModel grow_centered(const Dataset& data, std::vector<SampleCount> root, const CenteredParams& params,
                        std::uint64_t seed) {
  return CenteredGrower(data, params, seed).run(std::move(root));
}

TreeModel grow_centered(const Dataset& data, const ResamplePlan& plan, const CenteredParams& params, std::uint64_t seed) {
  if (plan.multiplicities.size() != data.rows()) throw InputError("grow_centered: resample plan does not match the dataset");
  return grow_centered(data, plan.support(), params, seed);
}

std::size_t recommended_depth(std::size_t p, std::size_t n, double c1) {
  if (p == 0 || n == 0) throw InputError("recommended_depth: p and n must be positive");
  const double pd = static_cast<double>(p);
  const double depth = (std::log(static_cast<double>(n)) + c1) / (std::log(2.0) - std::log(1.0 - 3.0 / (4.0 * pd)));
  return depth <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(depth));
}

}  // namespace graftforest
