#include "graftforest/tree.hpp"

#include <algorithm>
#include <string>

#include "graftforest/error.hpp"

namespace graftforest {

Hyperrectangle Hyperrectangle::unit(std::size_t p) {
  return Hyperrectangle{std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)};
}

double Hyperrectangle::volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < dims(); ++j) v *= side(j);
  return v;
}

std::vector<bool> RegressorLeaf::mask(std::size_t p) const {
  std::vector<bool> out(p, false);
  for (std::size_t j : features) out.at(j) = true;
  return out;
}

std::size_t Leaf::sample_count() const { return total_count(samples); }

TreeModel::TreeModel(std::size_t n_features, std::vector<TreeNode> nodes, std::vector<Leaf> leaves)
    : n_features_(n_features), nodes_(std::move(nodes)), leaves_(std::move(leaves)) {
  if (nodes_.empty()) throw InputError("TreeModel: a tree needs a root node");
  const auto node_count = static_cast<std::int32_t>(nodes_.size());
  const auto leaf_count = static_cast<std::int32_t>(leaves_.size());
  for (std::int32_t i = 0; i < node_count; ++i) {
    const TreeNode& node = nodes_[static_cast<std::size_t>(i)];
    if (node.is_leaf()) {
      if (node.leaf >= leaf_count) throw InputError("TreeModel: leaf index out of range");
    } else {
      // Children must follow their parent, which also rules out cycles.
      if (node.left <= i || node.right <= i || node.left >= node_count || node.right >= node_count) {
        throw InputError("TreeModel: child index out of range");
      }
      if (node.split.feature >= n_features_) throw InputError("TreeModel: split feature out of range");
    }
  }
  for (const Leaf& leaf : leaves_) {
    if (const auto* scion = std::get_if<ScionLeaf>(&leaf.payload)) {
      if (!scion->subtree) throw InputError("TreeModel: scion leaf without subtree");
      if (scion->subtree->n_features() != n_features_) throw InputError("TreeModel: scion dimension mismatch");
    }
  }
}

std::size_t TreeModel::leaf_index(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw InputError("predict: point has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(n_features_));
  }
  std::size_t node = 0;
  while (!nodes_[node].is_leaf()) {
    const TreeNode& n = nodes_[node];
    node = static_cast<std::size_t>(n.split.goes_left(x) ? n.left : n.right);
  }
  return static_cast<std::size_t>(nodes_[node].leaf);
}

const Leaf& TreeModel::final_leaf_at(std::span<const double> x) const {
  const Leaf& leaf = leaf_at(x);
  if (const auto* scion = std::get_if<ScionLeaf>(&leaf.payload)) return scion->subtree->final_leaf_at(x);
  return leaf;
}

void TreeModel::narrow_to_leaf(std::span<const double> x, Hyperrectangle& box) const {
  if (x.size() != n_features_ || box.dims() != n_features_) throw InputError("narrow_to_leaf: dimension mismatch");
  std::size_t node = 0;
  while (!nodes_[node].is_leaf()) {
    const TreeNode& n = nodes_[node];
    if (n.split.goes_left(x)) {
      box.upper[n.split.feature] = std::min(box.upper[n.split.feature], n.split.threshold);
      node = static_cast<std::size_t>(n.left);
    } else {
      box.lower[n.split.feature] = std::max(box.lower[n.split.feature], n.split.threshold);
      node = static_cast<std::size_t>(n.right);
    }
  }
  const Leaf& leaf = leaves_[static_cast<std::size_t>(nodes_[node].leaf)];
  if (const auto* scion = std::get_if<ScionLeaf>(&leaf.payload)) scion->subtree->narrow_to_leaf(x, box);
}

std::size_t TreeModel::depth() const {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t deepest = 0;
  // Children always have larger indices than their parent.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    deepest = std::max(deepest, depth[i]);
    if (!n.is_leaf()) {
      depth[static_cast<std::size_t>(n.left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(n.right)] = depth[i] + 1;
    }
  }
  return deepest;
}

double predict_leaf(const LeafPayload& payload, std::span<const double> x) {
  if (const auto* c = std::get_if<ConstantLeaf>(&payload)) return c->value;
  if (const auto* s = std::get_if<ScionLeaf>(&payload)) return predict_tree(*s->subtree, x);
  const auto& r = std::get<RegressorLeaf>(payload);
  std::vector<double> masked(r.features.size());
  for (std::size_t k = 0; k < r.features.size(); ++k) masked[k] = x[r.features[k]];
  return r.model.predict(masked);
}

double predict_tree(const TreeModel& tree, std::span<const double> x) {
  return predict_leaf(tree.leaf_at(x).payload, x);
}

std::vector<Hyperrectangle> leaf_boxes(const TreeModel& tree, const Hyperrectangle& root) {
  std::vector<Hyperrectangle> boxes(tree.leaves().size());
  std::vector<std::pair<std::size_t, Hyperrectangle>> stack{{0, root}};
  while (!stack.empty()) {
    auto [node, box] = std::move(stack.back());
    stack.pop_back();
    const TreeNode& n = tree.nodes()[node];
    if (n.is_leaf()) {
      boxes[static_cast<std::size_t>(n.leaf)] = std::move(box);
      continue;
    }
    Hyperrectangle left = box;
    left.upper[n.split.feature] = n.split.threshold;
    box.lower[n.split.feature] = n.split.threshold;
    stack.emplace_back(static_cast<std::size_t>(n.right), std::move(box));
    stack.emplace_back(static_cast<std::size_t>(n.left), std::move(left));
  }
  return boxes;
}

std::int32_t TreeBuilder::reserve() {
  nodes_.emplace_back();
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

void TreeBuilder::make_leaf(std::int32_t node, Leaf leaf) {
  nodes_[static_cast<std::size_t>(node)].leaf = static_cast<std::int32_t>(leaves_.size());
  leaves_.push_back(std::move(leaf));
}

void TreeBuilder::make_split(std::int32_t node, SplitRecord split, std::int32_t left, std::int32_t right) {
  TreeNode& n = nodes_[static_cast<std::size_t>(node)];
  n.split = split;
  n.left = left;
  n.right = right;
}

TreeModel TreeBuilder::finish() && { return TreeModel(n_features_, std::move(nodes_), std::move(leaves_)); }

double weighted_mean(const Dataset& data, std::span<const SampleCount> samples) {
  // Streaming update keeps the mean exact for constant targets.
  double mean = 0.0;
  double count = 0.0;
  for (const SampleCount& s : samples) {
    count += s.count;
    mean += (data.y(s.index) - mean) * (s.count / count);
  }
  if (count == 0.0) throw InvariantViolation("weighted_mean: empty leaf sample");
  return mean;
}

std::size_t total_count(std::span<const SampleCount> samples) {
  std::size_t total = 0;
  for (const SampleCount& s : samples) total += s.count;
  return total;
}

}  // namespace graftforest
