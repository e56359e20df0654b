#include "graftforest/serialization.hpp"

#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "graftforest/error.hpp"

namespace graftforest {

namespace {

using nlohmann::json;

json bandwidth_to_json(const BandwidthRule& rule) {
  json out = {{"scale", rule.scale}, {"beta", rule.beta}};
  out["fixed"] = rule.fixed ? json(*rule.fixed) : json(nullptr);
  return out;
}

BandwidthRule bandwidth_from_json(const json& in) {
  BandwidthRule rule;
  rule.scale = in.at("scale").get<double>();
  rule.beta = in.at("beta").get<double>();
  if (!in.at("fixed").is_null()) rule.fixed = in.at("fixed").get<double>();
  return rule;
}

template <class T>
json optional_to_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

template <class T>
std::optional<T> optional_from_json(const json& in) {
  if (in.is_null()) return std::nullopt;
  return in.get<T>();
}

json config_to_json(const GrowthConfig& c) {
  return {
      {"algorithm", to_string(c.algorithm)},
      {"n_trees", c.n_trees},
      {"resample_size", optional_to_json(c.resample_size)},
      {"resample_mode", c.resample_mode ? json(to_string(*c.resample_mode)) : json(nullptr)},
      {"leaf_size", c.leaf_size},
      {"alpha", c.alpha},
      {"mtry", optional_to_json(c.mtry)},
      {"max_depth", optional_to_json(c.max_depth)},
      {"seed", c.seed},
      {"leaf_regressor",
       {{"kind", to_string(c.leaf_regressor.kind)},
        {"bandwidth", bandwidth_to_json(c.leaf_regressor.bandwidth)},
        {"ridge", c.leaf_regressor.ridge}}},
      {"restrict_scion_features", c.restrict_scion_features},
  };
}

GrowthConfig config_from_json(const json& in) {
  GrowthConfig c;
  c.algorithm = parse_algorithm(in.at("algorithm").get<std::string>());
  c.n_trees = in.at("n_trees").get<std::size_t>();
  c.resample_size = optional_from_json<std::size_t>(in.at("resample_size"));
  if (!in.at("resample_mode").is_null()) c.resample_mode = parse_resample_mode(in.at("resample_mode").get<std::string>());
  c.leaf_size = in.at("leaf_size").get<std::size_t>();
  c.alpha = in.at("alpha").get<double>();
  c.mtry = optional_from_json<std::size_t>(in.at("mtry"));
  c.max_depth = optional_from_json<std::size_t>(in.at("max_depth"));
  c.seed = in.at("seed").get<std::uint64_t>();
  const json& reg = in.at("leaf_regressor");
  c.leaf_regressor.kind = parse_leaf_regressor_kind(reg.at("kind").get<std::string>());
  c.leaf_regressor.bandwidth = bandwidth_from_json(reg.at("bandwidth"));
  c.leaf_regressor.ridge = reg.at("ridge").get<double>();
  c.restrict_scion_features = in.at("restrict_scion_features").get<bool>();
  return c;
}

json regressor_to_json(const FittedLeafRegressor& r) {
  return {
      {"kind", to_string(r.kind())},
      {"dims", r.dims()},
      {"points", r.points().values()},
      {"targets", r.targets()},
      {"bandwidth", r.bandwidth()},
      {"ridge", r.ridge()},
      {"coefficients", r.coefficients()},
      {"fallback_mean", r.fallback_mean()},
      {"fell_back", r.fell_back()},
      {"warning", r.warning()},
  };
}

FittedLeafRegressor regressor_from_json(const json& in) {
  FittedLeafRegressor::Parts parts;
  parts.kind = parse_leaf_regressor_kind(in.at("kind").get<std::string>());
  parts.points = RowMatrix(in.at("dims").get<std::size_t>(), in.at("points").get<std::vector<double>>());
  parts.targets = in.at("targets").get<std::vector<double>>();
  parts.bandwidth = in.at("bandwidth").get<double>();
  parts.ridge = in.at("ridge").get<double>();
  parts.coefficients = in.at("coefficients").get<std::vector<double>>();
  parts.fallback_mean = in.at("fallback_mean").get<double>();
  parts.fell_back = in.at("fell_back").get<bool>();
  parts.warning = in.at("warning").get<std::string>();
  return FittedLeafRegressor::restore(std::move(parts));
}

json tree_to_json(const TreeModel& tree);

json leaf_to_json(const Leaf& leaf) {
  json samples = json::array();
  for (const SampleCount& s : leaf.samples) samples.push_back({s.index, s.count});
  json payload = std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantLeaf>) {
          return {{"type", "constant"}, {"value", p.value}};
        } else if constexpr (std::is_same_v<T, ScionLeaf>) {
          return {{"type", "scion"}, {"tree", tree_to_json(*p.subtree)}};
        } else {
          return {{"type", "regressor"}, {"features", p.features}, {"model", regressor_to_json(p.model)}};
        }
      },
      leaf.payload);
  return {{"samples", std::move(samples)}, {"payload", std::move(payload)}};
}

json tree_to_json(const TreeModel& tree) {
  json nodes = json::array();
  for (const TreeNode& node : tree.nodes()) {
    if (node.is_leaf()) {
      nodes.push_back({{"leaf", node.leaf}});
    } else {
      nodes.push_back({{"feature", node.split.feature},
                       {"threshold", node.split.threshold},
                       {"left", node.left},
                       {"right", node.right}});
    }
  }
  json leaves = json::array();
  for (const Leaf& leaf : tree.leaves()) leaves.push_back(leaf_to_json(leaf));
  return {{"n_features", tree.n_features()}, {"nodes", std::move(nodes)}, {"leaves", std::move(leaves)}};
}

TreeModel tree_from_json(const json& in);

Leaf leaf_from_json(const json& in) {
  Leaf leaf;
  for (const json& s : in.at("samples")) {
    leaf.samples.push_back(SampleCount{s.at(0).get<std::uint32_t>(), s.at(1).get<std::uint32_t>()});
  }
  const json& payload = in.at("payload");
  const std::string type = payload.at("type").get<std::string>();
  if (type == "constant") {
    leaf.payload = ConstantLeaf{payload.at("value").get<double>()};
  } else if (type == "scion") {
    leaf.payload = ScionLeaf{std::make_shared<const TreeModel>(tree_from_json(payload.at("tree")))};
  } else if (type == "regressor") {
    leaf.payload = RegressorLeaf{regressor_from_json(payload.at("model")), payload.at("features").get<std::vector<std::size_t>>()};
  } else {
    throw DataError("model file: unknown leaf payload type '" + type + "'");
  }
  return leaf;
}

TreeModel tree_from_json(const json& in) {
  std::vector<TreeNode> nodes;
  for (const json& n : in.at("nodes")) {
    TreeNode node;
    if (n.contains("leaf")) {
      node.leaf = n.at("leaf").get<std::int32_t>();
    } else {
      node.split = SplitRecord{n.at("feature").get<std::size_t>(), n.at("threshold").get<double>()};
      node.left = n.at("left").get<std::int32_t>();
      node.right = n.at("right").get<std::int32_t>();
    }
    nodes.push_back(node);
  }
  std::vector<Leaf> leaves;
  for (const json& l : in.at("leaves")) leaves.push_back(leaf_from_json(l));
  return TreeModel(in.at("n_features").get<std::size_t>(), std::move(nodes), std::move(leaves));
}

}  // namespace

std::string serialize_model(const ForestModel& forest, int indent) {
  json doc;
  doc["format"] = "graftforest-model";
  doc["version"] = kModelSchemaVersion;
  doc["config"] = config_to_json(forest.config());
  doc["n_features"] = forest.n_features();
  doc["n_train"] = forest.n_train();
  doc["feature_names"] = forest.feature_names();
  if (forest.scaler()) {
    doc["scaler"] = {{"lower", forest.scaler()->lower}, {"upper", forest.scaler()->upper}};
  } else {
    doc["scaler"] = nullptr;
  }
  doc["tree_seeds"] = forest.tree_seeds();
  json trees = json::array();
  for (const TreeModel& tree : forest.trees()) trees.push_back(tree_to_json(tree));
  doc["trees"] = std::move(trees);
  return doc.dump(indent);
}

ForestModel deserialize_model(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("format", std::string{}) != "graftforest-model") throw DataError("not a graftforest model document");
    const int version = doc.at("version").get<int>();
    if (version != kModelSchemaVersion) {
      throw DataError("unsupported model schema version " + std::to_string(version) + " (expected " +
                      std::to_string(kModelSchemaVersion) + ")");
    }
    std::optional<MinMaxScaler> scaler;
    if (!doc.at("scaler").is_null()) {
      scaler = MinMaxScaler{doc.at("scaler").at("lower").get<std::vector<double>>(),
                            doc.at("scaler").at("upper").get<std::vector<double>>()};
    }
    std::vector<TreeModel> trees;
    for (const json& t : doc.at("trees")) trees.push_back(tree_from_json(t));
    return ForestModel(config_from_json(doc.at("config")), std::move(trees),
                       doc.at("tree_seeds").get<std::vector<std::uint64_t>>(), doc.at("n_features").get<std::size_t>(),
                       doc.at("n_train").get<std::size_t>(), std::move(scaler),
                       doc.at("feature_names").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const InputError& e) {
    throw DataError(std::string("inconsistent model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("inconsistent model file: ") + e.what());
  }
}

void save_model(const ForestModel& forest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << serialize_model(forest) << '\n';
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

}  // namespace graftforest
