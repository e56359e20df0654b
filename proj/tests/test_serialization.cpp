#include <doctest.h>

#include "graftforest/error.hpp"
#include "graftforest/forest.hpp"
#include "graftforest/serialization.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace graftforest;

namespace {

void check_round_trip(const ForestModel& forest) {
  const std::string text = serialize_model(forest);
  const ForestModel back = deserialize_model(text);
  CHECK(serialize_model(back) == text);
  CHECK(back.tree_seeds() == forest.tree_seeds());
  CHECK(back.n_train() == forest.n_train());
  const RowMatrix probes = oracle::uniform_points(200, forest.n_features(), 77);
  for (std::size_t k = 0; k < probes.rows(); ++k) {
    REQUIRE(predict_forest(back, probes.row(k)) == predict_forest(forest, probes.row(k)));
  }
}

GrowthConfig config_for(Algorithm a) {
  GrowthConfig c;
  c.algorithm = a;
  c.n_trees = 4;
  c.leaf_size = 3;
  c.alpha = 4.0;
  c.seed = 21;
  return c;
}

}  // namespace

TEST_SUITE("serialization") {

TEST_CASE("round trip for every algorithm") {
  const Dataset data = oracle::uniform_dataset(150, 3, 1);
  for (Algorithm a : {Algorithm::cart, Algorithm::centered, Algorithm::grafted, Algorithm::grafted_general}) {
    CAPTURE(to_string(a));
    check_round_trip(train_forest(data, config_for(a)));
  }
}

TEST_CASE("round trip for fitted leaf regressors") {
  const Dataset data = oracle::uniform_dataset(150, 3, 2);
  for (LeafRegressorKind kind : {LeafRegressorKind::nadaraya_watson, LeafRegressorKind::kernel_ridge}) {
    GrowthConfig c = config_for(Algorithm::grafted_general);
    c.leaf_regressor.kind = kind;
    c.leaf_regressor.bandwidth = BandwidthRule::fixed_at(0.3);
    c.leaf_regressor.ridge = 1e-2;
    for (bool restrict : {false, true}) {
      c.restrict_scion_features = restrict;
      check_round_trip(train_forest(data, c));
    }
  }
}

TEST_CASE("round trip keeps the scaler and feature names") {
  const Dataset data = oracle::uniform_dataset(80, 2, 3);
  const MinMaxScaler scaler{{-1.0, 10.0}, {3.0, 1.0 / 3.0 + 10.0}};
  const ForestModel forest = train_forest(data, config_for(Algorithm::cart)).with_scaler(scaler, {"a", "b"});
  const ForestModel back = deserialize_model(serialize_model(forest));
  REQUIRE(back.scaler());
  CHECK(back.scaler()->lower == scaler.lower);
  CHECK(back.scaler()->upper == scaler.upper);
  CHECK(back.feature_names() == std::vector<std::string>{"a", "b"});
  check_round_trip(forest);
}

TEST_CASE("files round trip") {
  testutil::TempDir dir;
  const Dataset data = oracle::uniform_dataset(60, 2, 4);
  const ForestModel forest = train_forest(data, config_for(Algorithm::grafted));
  save_model(forest, dir / "m.json");
  CHECK(serialize_model(load_model(dir / "m.json")) == serialize_model(forest));
  CHECK_THROWS_AS(load_model(dir / "missing.json"), DataError);
}

TEST_CASE("malformed documents are rejected") {
  const Dataset data = oracle::uniform_dataset(30, 2, 5);
  std::string text = serialize_model(train_forest(data, config_for(Algorithm::cart)));
  const std::string key = "\"version\":1";
  const auto at = text.find(key);
  REQUIRE(at != std::string::npos);
  text.replace(at, key.size(), "\"version\":99");
  CHECK_THROWS_AS(deserialize_model(text), DataError);
  CHECK_THROWS_AS(deserialize_model("not json"), DataError);
  CHECK_THROWS_AS(deserialize_model("{}"), DataError);
  CHECK_THROWS_AS(deserialize_model("[1,2,3]"), DataError);
}

}
