#include "graftforest/cart.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "graftforest/error.hpp"

namespace graftforest {

namespace {

struct SortedEntry {
  double value;
  double target;
  double count;
};

// Streaming (count, mean) accumulator.
struct RunningMean {
  double count = 0.0;
  double mean = 0.0;

  void add(double y, double w) {
    count += w;
    mean += (y - mean) * (w / count);
  }
};

double product_gain(double left_count, double left_mean, double right_count, double right_mean) {
  const double total = left_count + right_count;
  const double diff = left_mean - right_mean;
  return (left_count * right_count) / (total * total) * diff * diff;
}

void sorted_entries(const Dataset& data, std::span<const SampleCount> members, std::size_t feature,
                    std::vector<SortedEntry>& out) {
  out.clear();
  out.reserve(members.size());
  for (const SampleCount& s : members) {
    out.push_back({data.x(s.index, feature), data.y(s.index), static_cast<double>(s.count)});
  }
  std::sort(out.begin(), out.end(), [](const SortedEntry& a, const SortedEntry& b) { return a.value < b.value; });
}

void check_feature(const Dataset& data, std::size_t feature) {
  if (feature >= data.n_features()) throw InputError("feature index " + std::to_string(feature) + " out of range");
}

class CartGrower {
 public:
  CartGrower(const Dataset& data, const CartParams& params, std::uint64_t seed)
      : data_(data), params_(params), rng_(seed), builder_(data.n_features()) {
    mtry_ = params.mtry == 0 ? data.n_features() : params.mtry;
    if (mtry_ > data.n_features()) throw ConfigError("mtry exceeds the number of features");
    if (params.min_leaf == 0) throw ConfigError("minimum leaf size must be at least 1");
  }

  TreeModel run(std::vector<SampleCount> root) && {
    if (root.empty()) throw InputError("grow_cart: empty resample");
    grow(builder_.reserve(), std::move(root));
    return std::move(builder_).finish();
  }

 private:
  void grow(std::int32_t node, std::vector<SampleCount> members) {
    const std::size_t count = total_count(members);
    if (count < 2 * params_.min_leaf || members.size() < 2 || is_pure(data_, members)) {
      make_leaf(node, std::move(members));
      return;
    }
    const auto features = draw_feature_subset(data_.n_features(), mtry_, rng_);
    NodeSample sample = NodeSample::from(data_, std::move(members));
    const auto best = best_split(data_, sample, features, params_.min_leaf);
    if (!best) {
      make_leaf(node, std::move(sample.members));
      return;
    }
    const SplitRecord split{best->feature, best->threshold};
    std::vector<SampleCount> left;
    std::vector<SampleCount> right;
    for (const SampleCount& s : sample.members) {
      (split.goes_left(data_.row(s.index)) ? left : right).push_back(s);
    }
    sample.members.clear();
    sample.members.shrink_to_fit();
    const std::int32_t left_id = builder_.reserve();
    const std::int32_t right_id = builder_.reserve();
    builder_.make_split(node, split, left_id, right_id);
    grow(left_id, std::move(left));
    grow(right_id, std::move(right));
  }

  void make_leaf(std::int32_t node, std::vector<SampleCount> members) {
    const double mean = weighted_mean(data_, members);
    builder_.make_leaf(node, Leaf{ConstantLeaf{mean}, std::move(members)});
  }

  const Dataset& data_;
  CartParams params_;
  std::size_t mtry_ = 0;
  Rng rng_;
  TreeBuilder builder_;
};

}  // namespace

NodeSample NodeSample::from(const Dataset& data, std::vector<SampleCount> members) {
  NodeSample node;
  RunningMean acc;
  for (const SampleCount& s : members) acc.add(data.y(s.index), s.count);
  node.members = std::move(members);
  node.count = acc.count;
  node.mean = acc.mean;
  return node;
}

double split_midpoint(double a, double b) {
  // Adjacent doubles can round the midpoint up to b.
  const double mid = std::midpoint(a, b);
  return mid < b ? mid : a;
}

std::vector<double> candidate_thresholds(const Dataset& data, const NodeSample& node, std::size_t feature) {
  check_feature(data, feature);
  std::vector<double> values;
  values.reserve(node.members.size());
  for (const SampleCount& s : node.members) values.push_back(data.x(s.index, feature));
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> out;
  for (std::size_t k = 1; k < values.size(); ++k) out.push_back(split_midpoint(values[k - 1], values[k]));
  return out;
}

GainEvaluation impurity_gain(const Dataset& data, const NodeSample& node, std::size_t feature, double threshold) {
  check_feature(data, feature);
  RunningMean left;
  RunningMean right;
  for (const SampleCount& s : node.members) {
    (data.x(s.index, feature) <= threshold ? left : right).add(data.y(s.index), s.count);
  }
  if (left.count == 0.0 || right.count == 0.0) {
    throw InputError("impurity_gain: split at " + std::to_string(threshold) + " leaves a child empty");
  }
  return GainEvaluation{feature,      threshold,   product_gain(left.count, left.mean, right.count, right.mean),
                        left.count,   right.count, left.mean,
                        right.mean};
}

double variance_decrease_gain(const Dataset& data, const NodeSample& node, std::size_t feature, double threshold) {
  check_feature(data, feature);
  double n = 0.0, n_left = 0.0, n_right = 0.0;
  double sum = 0.0, sum_left = 0.0, sum_right = 0.0;
  for (const SampleCount& s : node.members) {
    const double y = data.y(s.index);
    n += s.count;
    sum += s.count * y;
    if (data.x(s.index, feature) <= threshold) {
      n_left += s.count;
      sum_left += s.count * y;
    } else {
      n_right += s.count;
      sum_right += s.count * y;
    }
  }
  if (n_left == 0.0 || n_right == 0.0) throw InputError("variance_decrease_gain: empty child");
  const double mean = sum / n, mean_left = sum_left / n_left, mean_right = sum_right / n_right;
  double sse = 0.0, sse_left = 0.0, sse_right = 0.0;
  for (const SampleCount& s : node.members) {
    const double y = data.y(s.index);
    sse += s.count * (y - mean) * (y - mean);
    if (data.x(s.index, feature) <= threshold) {
      sse_left += s.count * (y - mean_left) * (y - mean_left);
    } else {
      sse_right += s.count * (y - mean_right) * (y - mean_right);
    }
  }
  return sse / n - (n_left / n) * (sse_left / n_left) - (n_right / n) * (sse_right / n_right);
}

std::optional<GainEvaluation> best_split(const Dataset& data, const NodeSample& node,
                                         std::span<const std::size_t> features, std::size_t min_leaf) {
  if (node.members.size() < 2 || is_pure(data, node.members)) return std::nullopt;
  const auto min_count = static_cast<double>(std::max<std::size_t>(min_leaf, 1));

  std::vector<std::size_t> order(features.begin(), features.end());
  std::sort(order.begin(), order.end());

  std::optional<GainEvaluation> best;
  std::vector<SortedEntry> entries;
  std::vector<RunningMean> suffix;
  for (std::size_t feature : order) {
    check_feature(data, feature);
    sorted_entries(data, node.members, feature, entries);
    const std::size_t m = entries.size();
    suffix.assign(m + 1, RunningMean{});
    for (std::size_t k = m; k-- > 0;) {
      suffix[k] = suffix[k + 1];
      suffix[k].add(entries[k].target, entries[k].count);
    }
    RunningMean prefix;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      prefix.add(entries[k].target, entries[k].count);
      if (entries[k].value == entries[k + 1].value) continue;
      const RunningMean& rest = suffix[k + 1];
      if (prefix.count < min_count || rest.count < min_count) continue;
      const double gain = product_gain(prefix.count, prefix.mean, rest.count, rest.mean);
      if (!best || gain > best->gain) {
        best = GainEvaluation{feature,      split_midpoint(entries[k].value, entries[k + 1].value),
                              gain,         prefix.count,
                              rest.count,   prefix.mean,
                              rest.mean};
      }
    }
  }
  return best;
}

std::vector<std::size_t> draw_feature_subset(std::size_t p, std::size_t mtry, Rng& rng) {
  if (mtry == 0 || mtry > p) throw ConfigError("mtry must lie in [1, p]");
  std::vector<std::size_t> all(p);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (mtry == p) return all;
  for (std::size_t k = 0; k < mtry; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, p - 1);
    std::swap(all[k], all[pick(rng)]);
  }
  all.resize(mtry);
  std::sort(all.begin(), all.end());
  return all;
}

bool is_pure(const Dataset& data, std::span<const SampleCount> members) {
  if (members.empty()) return true;
  const double first = data.y(members.front().index);
  return std::all_of(members.begin(), members.end(), [&](const SampleCount& s) { return data.y(s.index) == first; });
}

TreeModel grow_cart(const Dataset& data, const ResamplePlan& plan, const CartParams& params, std::uint64_t seed) {
  if (plan.multiplicities.size() != data.rows()) throw InputError("grow_cart: resample plan does not match the dataset");
  return grow_cart(data, plan.support(), params, seed);
}

TreeModel grow_cart(const Dataset& data, std::vector<SampleCount> root, const CartParams& params, std::uint64_t seed) {
  return CartGrower(data, params, seed).run(std::move(root));
}

}  // namespace graftforest
