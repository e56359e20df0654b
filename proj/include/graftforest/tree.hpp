#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "graftforest/dataset.hpp"
#include "graftforest/leaf_regressors.hpp"

namespace graftforest {

/// Axis-aligned split. Points with x[feature] <= threshold go left.
struct SplitRecord {
  std::size_t feature = 0;
  double threshold = 0.0;

  bool goes_left(std::span<const double> x) const { return x[feature] <= threshold; }
  friend bool operator==(const SplitRecord&, const SplitRecord&) = default;
};

struct Hyperrectangle {
  std::vector<double> lower;
  std::vector<double> upper;

  static Hyperrectangle unit(std::size_t p);
  std::size_t dims() const { return lower.size(); }
  double side(std::size_t j) const { return upper[j] - lower[j]; }
  double volume() const;
};

class TreeModel;

struct ConstantLeaf {
  double value = 0.0;
};

/// A centered subtree grafted onto a CART leaf.
struct ScionLeaf {
  std::shared_ptr<const TreeModel> subtree;
};

/// A fitted regressor using only `features` (the selected-feature mask, as indices).
struct RegressorLeaf {
  FittedLeafRegressor model;
  std::vector<std::size_t> features;

  std::vector<bool> mask(std::size_t p) const;
};

using LeafPayload = std::variant<ConstantLeaf, ScionLeaf, RegressorLeaf>;

struct Leaf {
  LeafPayload payload;
  /// Resampled training points in the leaf, with multiplicity.
  std::vector<SampleCount> samples;

  std::size_t sample_count() const;
};

struct TreeNode {
  SplitRecord split;
  std::int32_t left = -1;
  std::int32_t right = -1;
  /// Index into the leaf table, or -1 for internal nodes.
  std::int32_t leaf = -1;

  bool is_leaf() const { return leaf >= 0; }
};

/// Immutable binary partition tree. Node 0 is the root.
class TreeModel {
 public:
  TreeModel(std::size_t n_features, std::vector<TreeNode> nodes, std::vector<Leaf> leaves);

  std::size_t n_features() const { return n_features_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<Leaf>& leaves() const { return leaves_; }

  /// Leaf table index of the cell containing x (this tree only; scions are not entered).
  std::size_t leaf_index(std::span<const double> x) const;
  const Leaf& leaf_at(std::span<const double> x) const { return leaves_[leaf_index(x)]; }

  /// Deepest constant-mean leaf reached by x, descending into scions.
  const Leaf& final_leaf_at(std::span<const double> x) const;

  /// Narrows `box` to the final cell containing x, descending into scions.
  void narrow_to_leaf(std::span<const double> x, Hyperrectangle& box) const;

  std::size_t depth() const;

 private:
  std::size_t n_features_;
  std::vector<TreeNode> nodes_;
  std::vector<Leaf> leaves_;
};

double predict_tree(const TreeModel& tree, std::span<const double> x);

double predict_leaf(const LeafPayload& payload, std::span<const double> x);

/// Box of every leaf in table order, starting from `root`.
std::vector<Hyperrectangle> leaf_boxes(const TreeModel& tree, const Hyperrectangle& root);

/// Incremental construction used by the growers.
class TreeBuilder {
 public:
  explicit TreeBuilder(std::size_t n_features) : n_features_(n_features) {}

  /// Reserves a node slot to be filled with make_leaf or make_split.
  std::int32_t reserve();
  void make_leaf(std::int32_t node, Leaf leaf);
  void make_split(std::int32_t node, SplitRecord split, std::int32_t left, std::int32_t right);

  std::vector<Leaf>& leaves() { return leaves_; }
  TreeModel finish() &&;

 private:
  std::size_t n_features_;
  std::vector<TreeNode> nodes_;
  std::vector<Leaf> leaves_;
};

/// Multiplicity-weighted mean of the targets of `samples`.
double weighted_mean(const Dataset& data, std::span<const SampleCount> samples);
std::size_t total_count(std::span<const SampleCount> samples);

}  // namespace graftforest
