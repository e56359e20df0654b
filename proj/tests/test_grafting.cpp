#include <doctest.h>

#include <cmath>

#include "graftforest/cart.hpp"
#include "graftforest/centered.hpp"
#include "graftforest/error.hpp"
#include "graftforest/grafting.hpp"
#include "graftforest/random.hpp"
#include "graftforest/synthetic.hpp"
#include "oracles.hpp"

using namespace graftforest;

namespace {

GraftParams graft(std::size_t q, double alpha, bool restrict = false) {
  GraftParams g;
  g.leaf_size = q;
  g.alpha = alpha;
  g.restrict_to_cart_features = restrict;
  return g;
}

void expect_same_predictions(const TreeModel& a, const TreeModel& b, std::size_t p, std::uint64_t seed) {
  const RowMatrix probes = oracle::uniform_points(1000, p, seed);
  for (std::size_t k = 0; k < probes.rows(); ++k) REQUIRE(predict_tree(a, probes.row(k)) == predict_tree(b, probes.row(k)));
}

}  // namespace

TEST_SUITE("grafting") {

TEST_CASE("alpha = 1 reduces to CART with leaf size q_n") {
  const Dataset data = oracle::uniform_dataset(400, 3, 1);
  for (std::size_t q : {1, 4, 9}) {
    const ResamplePlan plan = draw_resample(400, 300, ResampleMode::without_replacement, q);
    const TreeModel cart = grow_cart(data, plan, CartParams{q, 0}, 77);
    const TreeModel grafted = grow_grafted(data, plan, graft(q, 1.0), 77, 88);
    expect_same_predictions(cart, grafted, 3, 5);
  }
}

TEST_CASE("alpha_n q_n above a_n reduces to a centered tree") {
  const Dataset data = oracle::uniform_dataset(400, 3, 2);
  const ResamplePlan plan = draw_resample(400, 300, ResampleMode::without_replacement, 4);
  const TreeModel grafted = grow_grafted(data, plan, graft(5, 61.0), 77, 88);
  CHECK(cart_selected_features(grafted).empty());
  const TreeModel centered = grow_centered(data, plan, CenteredParams{5, {}, {}}, scion_seed_for_leaf(88, 0));
  expect_same_predictions(centered, grafted, 3, 6);
}

TEST_CASE("structural audit of the leaf-size chain") {
  const Dataset data = oracle::uniform_dataset(200, 2, 3);
  const TreeModel tree = grow_grafted(data, full_resample(200), graft(5, 4.0), 10, 20);
  CHECK(tree.leaves().size() > 1);
  for (const Leaf& host : tree.leaves()) {
    CHECK(host.sample_count() >= 20);
    const auto* scion = std::get_if<ScionLeaf>(&host.payload);
    REQUIRE(scion != nullptr);
    std::size_t covered = 0;
    for (const Leaf& leaf : scion->subtree->leaves()) {
      CHECK(leaf.sample_count() >= 5);
      // Scions end the CART phase: nothing below them is another scion.
      CHECK(std::holds_alternative<ConstantLeaf>(leaf.payload));
      covered += leaf.sample_count();
    }
    CHECK(covered == host.sample_count());
  }
}

TEST_CASE("non-integer alpha rounds the CART leaf size up") {
  CHECK(cart_phase_leaf_size(5, 4.0) == 20);
  CHECK(cart_phase_leaf_size(3, 1.5) == 5);
  CHECK(cart_phase_leaf_size(3, 10.0 / 3.0) == 10);
  CHECK(cart_phase_leaf_size(10, 1.01) == 11);
  const Dataset data = oracle::uniform_dataset(20, 1, 3);
  CHECK_THROWS_AS(grow_grafted(data, full_resample(20), graft(2, 0.9), 1, 2), ConfigError);
}

TEST_CASE("a constant leaf regressor is CART with leaf size alpha_n q_n") {
  const Dataset data = oracle::uniform_dataset(300, 3, 4);
  const ResamplePlan plan = draw_resample(300, 230, ResampleMode::without_replacement, 1);
  const TreeModel cart = grow_cart(data, plan, CartParams{12, 0}, 5);
  const TreeModel general = grow_grafted_general(data, plan, graft(3, 4.0), LeafRegressorSpec{}, 5);
  expect_same_predictions(cart, general, 3, 7);
}

TEST_CASE("a single-leaf CART with Nadaraya-Watson is plain Nadaraya-Watson") {
  const Dataset data = oracle::uniform_dataset(60, 2, 5);
  const ResamplePlan plan = draw_resample(60, 40, ResampleMode::without_replacement, 2);
  LeafRegressorSpec spec;
  spec.kind = LeafRegressorKind::nadaraya_watson;
  spec.bandwidth = BandwidthRule::fixed_at(0.15);
  const TreeModel tree = grow_grafted_general(data, plan, graft(10, 5.0), spec, 3);
  REQUIRE(tree.nodes().size() == 1);

  RowMatrix points(0, 2);
  std::vector<double> y;
  for (const auto& s : plan.support()) {
    points.append_row(data.row(s.index));
    y.push_back(data.y(s.index));
  }
  const RowMatrix probes = oracle::uniform_points(50, 2, 9);
  for (std::size_t k = 0; k < probes.rows(); ++k) {
    CHECK(predict_tree(tree, probes.row(k)) ==
          doctest::Approx(oracle::nadaraya_watson(points, y, 0.15, probes.row(k))).epsilon(1e-12));
  }
}

TEST_CASE("restricted leaf regressors only see CART-selected features") {
  const SyntheticModel model = cef_catalog("sparse").with_dimension(52);
  const Dataset data = sample_model(model, 1000, 12);
  LeafRegressorSpec spec;
  spec.kind = LeafRegressorKind::kernel_ridge;
  spec.bandwidth = BandwidthRule::fixed_at(0.2);
  spec.ridge = 1e-2;
  const ResamplePlan plan = draw_resample(1000, 770, ResampleMode::without_replacement, 1);
  const TreeModel tree = grow_grafted_general(data, plan, graft(10, 10.0, true), spec, 2);
  const auto selected = cart_selected_features(tree);
  REQUIRE_FALSE(selected.empty());
  for (const Leaf& leaf : tree.leaves()) {
    const auto& r = std::get<RegressorLeaf>(leaf.payload);
    CHECK(r.features == selected);
    CHECK(r.model.dims() == selected.size());
  }
}

TEST_CASE("restricted scions split only on CART-selected features") {
  const SyntheticModel model = cef_catalog("sparse").with_dimension(20);
  const Dataset data = sample_model(model, 1000, 13);
  const ResamplePlan plan = draw_resample(1000, 770, ResampleMode::without_replacement, 1);
  const TreeModel tree = grow_grafted(data, plan, graft(10, 10.0, true), 2, 3);
  const auto selected = cart_selected_features(tree);
  for (const Leaf& host : tree.leaves()) {
    const auto& scion = std::get<ScionLeaf>(host.payload).subtree;
    for (const TreeNode& n : scion->nodes()) {
      if (!n.is_leaf()) CHECK(std::binary_search(selected.begin(), selected.end(), n.split.feature));
    }
  }
}

TEST_CASE("cart_selected_features") {
  const Dataset data(RowMatrix(1, {0.1, 0.9}), {0, 1});
  const TreeModel root = grow_cart(data, full_resample(2), CartParams{2, 0}, 1);
  CHECK(cart_selected_features(root).empty());

  std::vector<TreeNode> nodes(3);
  nodes[0].split = SplitRecord{3, 0.5};
  nodes[0].left = 1;
  nodes[0].right = 2;
  nodes[1].leaf = 0;
  nodes[2].leaf = 1;
  const TreeModel stump(5, nodes, {Leaf{ConstantLeaf{0.0}, {{0, 1}}}, Leaf{ConstantLeaf{1.0}, {{1, 1}}}});
  CHECK(cart_selected_features(stump) == std::vector<std::size_t>{3});
}

TEST_CASE("the CART phase finds the relevant features of the sparse model") {
  const SyntheticModel model = cef_catalog("sparse").with_dimension(10);
  const Dataset data = sample_model(model, 1000, 14);
  int found = 0;
  constexpr int kTrees = 100;
  for (int t = 0; t < kTrees; ++t) {
    const ResamplePlan plan = draw_resample(1000, 770, ResampleMode::without_replacement, derive_seed(t, 1));
    const TreeModel tree = grow_grafted(data, plan, graft(10, 10.0), derive_seed(t, 2), derive_seed(t, 3));
    const auto s = cart_selected_features(tree);
    if (std::binary_search(s.begin(), s.end(), 0) && std::binary_search(s.begin(), s.end(), 1)) ++found;
  }
  CHECK(found >= 90);
}

}
