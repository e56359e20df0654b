#include <doctest.h>

#include <cmath>
#include <memory>

#include "graftforest/cart.hpp"
#include "graftforest/error.hpp"
#include "graftforest/forest.hpp"
#include "graftforest/serialization.hpp"
#include "graftforest/tree.hpp"
#include "oracles.hpp"

using namespace graftforest;

namespace {

TreeModel stump(double threshold, double left_value, double right_value, std::size_t p = 2) {
  std::vector<TreeNode> nodes(3);
  nodes[0].split = SplitRecord{0, threshold};
  nodes[0].left = 1;
  nodes[0].right = 2;
  nodes[1].leaf = 0;
  nodes[2].leaf = 1;
  std::vector<Leaf> leaves{Leaf{ConstantLeaf{left_value}, {{0, 1}}}, Leaf{ConstantLeaf{right_value}, {{1, 1}}}};
  return TreeModel(p, std::move(nodes), std::move(leaves));
}

TreeModel root_leaf(double value, std::vector<SampleCount> samples, std::size_t p = 1) {
  std::vector<TreeNode> nodes(1);
  nodes[0].leaf = 0;
  return TreeModel(p, std::move(nodes), {Leaf{ConstantLeaf{value}, std::move(samples)}});
}

GrowthConfig config(Algorithm a, std::size_t trees, std::size_t q, std::uint64_t seed, double alpha = 1.0) {
  GrowthConfig c;
  c.algorithm = a;
  c.n_trees = trees;
  c.leaf_size = q;
  c.alpha = alpha;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("core_model") {

TEST_CASE("root leaf predicts the mean of its sample") {
  const Dataset data(RowMatrix(1, {0.3, 0.7}), {2.0, 4.0});
  const TreeModel tree = grow_cart(data, full_resample(2), CartParams{2, 0}, 1);
  REQUIRE(tree.leaves().size() == 1);
  const std::vector<double> x{0.9};
  CHECK(predict_tree(tree, x) == 3.0);
}

TEST_CASE("routing sends boundary points left") {
  const TreeModel tree = stump(0.5, 0.0, 1.0);
  CHECK(predict_tree(tree, std::vector<double>{0.2, 0.9}) == 0.0);
  CHECK(predict_tree(tree, std::vector<double>{0.5, 0.9}) == 0.0);
  CHECK(predict_tree(tree, std::vector<double>{0.51, 0.0}) == 1.0);
}

TEST_CASE("dimension mismatch is an input error") {
  const TreeModel tree = stump(0.5, 0.0, 1.0);
  CHECK_THROWS_AS(predict_tree(tree, std::vector<double>{0.2}), InputError);
}

TEST_CASE("CART predictions at training points equal their leaf means") {
  const Dataset data = oracle::uniform_dataset(8, 2, 77);
  const ResamplePlan plan = draw_resample(8, 8, ResampleMode::with_replacement, 5);
  const TreeModel tree = grow_cart(data, plan, CartParams{2, 0}, 11);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const Leaf& leaf = oracle::walk(tree, data.row(i));
    double sum = 0.0;
    double count = 0.0;
    for (const SampleCount& s : leaf.samples) {
      sum += s.count * data.y(s.index);
      count += s.count;
    }
    CHECK(predict_tree(tree, data.row(i)) == doctest::Approx(sum / count).epsilon(1e-14));
  }
}

TEST_CASE("forest of identical trees reproduces the single tree") {
  const TreeModel tree = stump(0.4, 0.1234567, 0.7654321);
  std::vector<TreeModel> trees(7, tree);
  const ForestModel forest(GrowthConfig{}, trees, std::vector<std::uint64_t>(7, 0), 2, 2);
  for (double x0 : {0.1, 0.4, 0.8}) {
    const std::vector<double> x{x0, 0.5};
    CHECK(predict_forest(forest, x) == predict_tree(tree, x));
  }
}

TEST_CASE("two trees predicting 0 and 1 average to 1/2") {
  const ForestModel forest(GrowthConfig{}, {root_leaf(0.0, {{0, 1}}), root_leaf(1.0, {{1, 1}})}, {1, 2}, 1, 2);
  CHECK(predict_forest(forest, std::vector<double>{0.3}) == 0.5);
  CHECK(classify(forest, std::vector<double>{0.3}) == 0);
}

TEST_CASE("classification threshold") {
  const ForestModel high(GrowthConfig{}, {root_leaf(0.75, {{0, 1}})}, {0}, 1, 1);
  CHECK(classify(high, std::vector<double>{0.5}) == 1);
  const Dataset zeros(RowMatrix(1, {0.1, 0.5, 0.9}), {0.0, 0.0, 0.0});
  const ForestModel forest = train_forest(zeros, config(Algorithm::cart, 5, 1, 3));
  for (double x : {0.0, 0.3, 1.0}) CHECK(classify(forest, std::vector<double>{x}) == 0);
}

TEST_CASE("weights of a single leaf follow multiplicities") {
  const ForestModel even(GrowthConfig{}, {root_leaf(0.0, {{0, 1}, {2, 1}})}, {0}, 1, 3);
  auto w = forest_weights(even, std::vector<double>{0.5});
  CHECK(w[0] == 0.5);
  CHECK(w[1] == 0.0);
  CHECK(w[2] == 0.5);

  const ForestModel boot(GrowthConfig{}, {root_leaf(0.0, {{0, 2}, {1, 1}})}, {0}, 1, 2);
  w = forest_weights(boot, std::vector<double>{0.5});
  CHECK(w[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("weights normalize and reproduce predictions for every constant-mean algorithm") {
  const Dataset data = oracle::uniform_dataset(300, 3, 21);
  const RowMatrix probes = oracle::uniform_points(100, 3, 99);
  for (Algorithm a : {Algorithm::cart, Algorithm::centered, Algorithm::grafted}) {
    CAPTURE(to_string(a));
    const ForestModel forest = train_forest(data, config(a, 10, 3, 8, 4.0));
    for (std::size_t k = 0; k < probes.rows(); ++k) {
      const auto w = forest_weights(forest, probes.row(k));
      const auto expected = oracle::forest_weights(forest, probes.row(k));
      double sum = 0.0;
      double avg = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(w[i] >= 0.0);
        CHECK(std::abs(w[i] - expected[i]) <= 1e-12);
        sum += w[i];
        avg += w[i] * data.y(i);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-10);
      CHECK(std::abs(avg - predict_forest(forest, probes.row(k))) <= 1e-10);
    }
  }
}

TEST_CASE("weights are unsupported for regressor leaves") {
  const Dataset data = oracle::uniform_dataset(100, 2, 4);
  GrowthConfig c = config(Algorithm::grafted_general, 2, 5, 1, 4.0);
  c.leaf_regressor.kind = LeafRegressorKind::nadaraya_watson;
  c.leaf_regressor.bandwidth = BandwidthRule::fixed_at(0.2);
  const ForestModel forest = train_forest(data, c);
  CHECK_THROWS_AS(forest_weights(forest, std::vector<double>{0.5, 0.5}), UnsupportedOperation);
}

TEST_CASE("constant-mean predictions stay within the resampled target range") {
  const Dataset data = oracle::uniform_dataset(200, 2, 31, 1.0);
  const double lo = *std::min_element(data.targets().begin(), data.targets().end());
  const double hi = *std::max_element(data.targets().begin(), data.targets().end());
  const RowMatrix probes = oracle::uniform_points(200, 2, 32);
  for (Algorithm a : {Algorithm::cart, Algorithm::centered, Algorithm::grafted}) {
    const ForestModel forest = train_forest(data, config(a, 10, 2, 3, 3.0));
    for (double v : predict_forest(forest, probes)) {
      CHECK(v >= lo);
      CHECK(v <= hi);
    }
  }
}

TEST_CASE("leaf boxes tile the unit cube and each point lies in exactly one") {
  const Dataset data = oracle::uniform_dataset(400, 3, 41);
  const ResamplePlan plan = draw_resample(400, 300, ResampleMode::without_replacement, 3);
  const TreeModel tree = grow_cart(data, plan, CartParams{4, 2}, 9);
  const auto boxes = leaf_boxes(tree, Hyperrectangle::unit(3));
  double volume = 0.0;
  for (const auto& b : boxes) volume += b.volume();
  CHECK(volume == doctest::Approx(1.0).epsilon(1e-12));

  const RowMatrix probes = oracle::uniform_points(500, 3, 42);
  for (std::size_t k = 0; k < probes.rows(); ++k) {
    const auto x = probes.row(k);
    std::size_t hits = 0;
    std::size_t hit = 0;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      bool inside = true;
      for (std::size_t j = 0; j < 3; ++j) {
        const bool at_origin = boxes[b].lower[j] == 0.0 && x[j] == 0.0;
        inside = inside && (x[j] > boxes[b].lower[j] || at_origin) && x[j] <= boxes[b].upper[j];
      }
      if (inside) {
        ++hits;
        hit = b;
      }
    }
    CHECK(hits == 1);
    CHECK(hit == tree.leaf_index(x));
  }
}

TEST_CASE("identical inputs yield identical forests") {
  const Dataset data = oracle::uniform_dataset(150, 3, 51);
  for (Algorithm a : {Algorithm::cart, Algorithm::centered, Algorithm::grafted}) {
    const GrowthConfig c = config(a, 6, 2, 1234, 4.0);
    const ForestModel one = train_forest(data, c, TrainOptions{1});
    const ForestModel two = train_forest(data, c, TrainOptions{3});
    CHECK(serialize_model(one) == serialize_model(two));
  }
}

TEST_CASE("resampling") {
  SUBCASE("a_n = n without replacement keeps every point once") {
    const ResamplePlan plan = draw_resample(50, 50, ResampleMode::without_replacement, 7);
    for (auto s : plan.multiplicities) CHECK(s == 1);
  }
  SUBCASE("n=4, a_n=2 without replacement picks two points") {
    const ResamplePlan plan = draw_resample(4, 2, ResampleMode::without_replacement, 7);
    std::size_t ones = 0;
    for (auto s : plan.multiplicities) {
      CHECK(s <= 1);
      ones += s;
    }
    CHECK(ones == 2);
    CHECK(plan.support().size() == 2);
  }
  SUBCASE("bootstrap leaves out about 1/e of the points") {
    std::size_t zeros = 0;
    constexpr std::size_t kDraws = 10'000;
    for (std::size_t d = 0; d < kDraws; ++d) {
      const ResamplePlan plan = draw_resample(1000, 1000, ResampleMode::with_replacement, d);
      zeros += plan.multiplicities[d % 1000] == 0 ? 1 : 0;
    }
    CHECK(std::abs(static_cast<double>(zeros) / kDraws - std::exp(-1.0)) <= 0.02);
  }
  SUBCASE("multiplicities sum to a_n and draws are deterministic") {
    const ResamplePlan a = draw_resample(100, 77, ResampleMode::with_replacement, 3);
    const ResamplePlan b = draw_resample(100, 77, ResampleMode::with_replacement, 3);
    std::size_t total = 0;
    for (auto s : a.multiplicities) total += s;
    CHECK(total == 77);
    CHECK(a.multiplicities == b.multiplicities);
  }
  SUBCASE("a_n above n without replacement is a config error") {
    CHECK_THROWS_AS(draw_resample(5, 6, ResampleMode::without_replacement, 1), ConfigError);
  }
  SUBCASE("default a_n") {
    CHECK(default_resample_size(1000) == 770);
    CHECK(default_resample_size(13) == 10);
    CHECK(default_resample_size(500) == 385);
  }
}

TEST_CASE("config resolution") {
  const GrowthConfig cart = resolve_config(config(Algorithm::cart, 1, 1, 0), 130, 4);
  CHECK(*cart.resample_size == 100);
  CHECK(*cart.resample_mode == ResampleMode::with_replacement);
  CHECK(*cart.mtry == 4);
  const GrowthConfig grafted = resolve_config(config(Algorithm::grafted, 1, 1, 0, 2.0), 130, 4);
  CHECK(*grafted.resample_mode == ResampleMode::without_replacement);
  CHECK_THROWS_AS(resolve_config(config(Algorithm::grafted, 1, 1, 0, 0.5), 10, 1), ConfigError);
  GrowthConfig bad = config(Algorithm::cart, 1, 1, 0);
  bad.mtry = 5;
  CHECK_THROWS_AS(resolve_config(bad, 10, 4), ConfigError);
  CHECK_THROWS_AS(parse_algorithm("forest"), ConfigError);
}

}
