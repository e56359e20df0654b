#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "graftforest/csv.hpp"
#include "graftforest/forest.hpp"
#include "graftforest/serialization.hpp"
#include "graftforest/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace graftforest;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return Outcome{code, out.str(), err.str()};
}

std::vector<double> read_predictions(const std::filesystem::path& path) {
  const CsvTable t = read_csv_file(path);
  REQUIRE(t.header == std::vector<std::string>{"prediction"});
  std::vector<double> out;
  for (const auto& row : t.rows) out.push_back(std::stod(row[0]));
  return out;
}

/// Ten points on a line with targets 0.1 * i.
void write_toy(const std::filesystem::path& path) {
  std::string text = "x1,x2,y\n";
  for (int i = 0; i < 10; ++i) {
    text += format_double((i + 0.5) / 10.0) + ',' + format_double(1.0 - (i + 0.5) / 10.0) + ',' + format_double(0.1 * i) + '\n';
  }
  testutil::write_text(path, text);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("train writes a model with the requested trees") {
  testutil::TempDir dir;
  write_toy(dir / "toy.csv");
  const Outcome o = run_cli({"train", "--data", (dir / "toy.csv").string(), "--trees", "1", "--qn", "5", "--seed", "3",
                             "--out", (dir / "m.json").string()});
  REQUIRE(o.code == cli::kExitOk);
  CHECK(o.out.find("trained 1 cart trees on 10 rows x 2 features") != std::string::npos);
  const ForestModel m = load_model(dir / "m.json");
  CHECK(m.trees().size() == 1);
  CHECK(m.config().leaf_size == 5);
  CHECK(m.config().seed == 3);
}

TEST_CASE("usage errors") {
  const Outcome missing = run_cli({"train", "--out", "m.json"});
  CHECK(missing.code == cli::kExitUsage);
  CHECK((missing.err + missing.out).find("--data") != std::string::npos);
  CHECK(run_cli({}).code == cli::kExitUsage);
  CHECK(run_cli({"bogus"}).code == cli::kExitUsage);
  CHECK(run_cli({"--version"}).code == cli::kExitOk);

  testutil::TempDir dir;
  write_toy(dir / "toy.csv");
  CHECK(run_cli({"train", "--data", (dir / "toy.csv").string(), "--algorithm", "oak", "--out", (dir / "m.json").string()})
            .code == cli::kExitUsage);
  CHECK(run_cli({"train", "--data", (dir / "toy.csv").string(), "--algorithm", "grafted", "--alpha", "0.5", "--out",
                 (dir / "m.json").string()})
            .code == cli::kExitUsage);
  CHECK(run_cli({"experiment", "--preset", "fig99", "--out", dir.path().string()}).code == cli::kExitUsage);
}

TEST_CASE("data errors exit with the data code") {
  testutil::TempDir dir;
  testutil::write_text(dir / "bad.csv", "x,y\n0.1,1\nabc,2\n");
  const Outcome bad = run_cli({"train", "--data", (dir / "bad.csv").string(), "--out", (dir / "m.json").string()});
  CHECK(bad.code == cli::kExitData);
  CHECK(bad.err.find("row 2") != std::string::npos);
  CHECK(run_cli({"train", "--data", (dir / "none.csv").string(), "--out", (dir / "m.json").string()}).code ==
        cli::kExitData);
  CHECK(run_cli({"predict", "--model", (dir / "none.json").string(), "--data", (dir / "bad.csv").string()}).code ==
        cli::kExitData);
}

TEST_CASE("grafted with alpha 1 predicts like CART") {
  testutil::TempDir dir;
  const Dataset data = oracle::uniform_dataset(300, 3, 1);
  write_dataset_csv(dir / "train.csv", data, "y");
  write_matrix_csv(dir / "probe.csv", {"x1", "x2", "x3"}, oracle::uniform_points(100, 3, 2));
  for (const char* algorithm : {"cart", "grafted"}) {
    REQUIRE(run_cli({"train", "--data", (dir / "train.csv").string(), "--algorithm", algorithm, "--alpha", "1", "--qn", "4",
                     "--trees", "10", "--seed", "9", "--resample", "without_replacement", "--out",
                     (dir / (std::string(algorithm) + ".json")).string()})
                .code == cli::kExitOk);
    REQUIRE(run_cli({"predict", "--model", (dir / (std::string(algorithm) + ".json")).string(), "--data",
                     (dir / "probe.csv").string(), "--out", (dir / (std::string(algorithm) + ".csv")).string()})
                .code == cli::kExitOk);
  }
  CHECK(read_predictions(dir / "cart.csv") == read_predictions(dir / "grafted.csv"));
}

TEST_CASE("a root-only forest predicts a constant column") {
  testutil::TempDir dir;
  write_toy(dir / "toy.csv");
  REQUIRE(run_cli({"train", "--data", (dir / "toy.csv").string(), "--qn", "10", "--an", "10", "--resample",
                   "without_replacement", "--trees", "3", "--seed", "1", "--out", (dir / "m.json").string()})
              .code == cli::kExitOk);
  const Outcome o = run_cli({"predict", "--model", (dir / "m.json").string(), "--data", (dir / "toy.csv").string()});
  REQUIRE(o.code == cli::kExitOk);
  std::istringstream lines(o.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "prediction");
  int count = 0;
  while (std::getline(lines, line)) {
    CHECK(std::stod(line) == doctest::Approx(0.45).epsilon(1e-14));
    ++count;
  }
  CHECK(count == 10);
}

TEST_CASE("classification thresholds at one half") {
  testutil::TempDir dir;
  std::string text = "x,y\n";
  for (int i = 0; i < 10; ++i) text += format_double((i + 0.5) / 10.0) + ',' + (i < 5 ? "0.4" : "0.6") + '\n';
  testutil::write_text(dir / "c.csv", text);
  REQUIRE(run_cli({"train", "--data", (dir / "c.csv").string(), "--qn", "5", "--an", "10", "--resample",
                   "without_replacement", "--trees", "2", "--seed", "1", "--out", (dir / "m.json").string()})
              .code == cli::kExitOk);
  const Outcome o = run_cli({"predict", "--model", (dir / "m.json").string(), "--data", (dir / "c.csv").string(),
                             "--classify"});
  REQUIRE(o.code == cli::kExitOk);
  CHECK(o.out == "prediction\n0\n0\n0\n0\n0\n1\n1\n1\n1\n1\n");
}

TEST_CASE("train and predict round trip with normalization") {
  testutil::TempDir dir;
  RowMatrix raw(0, 2);
  std::vector<double> y;
  const RowMatrix u = oracle::uniform_points(120, 2, 4);
  for (std::size_t i = 0; i < u.rows(); ++i) {
    raw.append_row(std::vector<double>{10.0 + 5.0 * u(i, 0), -3.0 * u(i, 1)});
    y.push_back(std::sin(4.0 * u(i, 0)) + u(i, 1));
  }
  write_dataset_csv(dir / "raw.csv", Dataset(raw, y, {"a", "b"}), "y");
  write_matrix_csv(dir / "probe.csv", {"a", "b"}, raw);
  REQUIRE(run_cli({"train", "--data", (dir / "raw.csv").string(), "--normalize", "--algorithm", "grafted", "--qn", "3",
                   "--alpha", "4", "--trees", "6", "--seed", "2", "--out", (dir / "m.json").string(), "--threads", "2"})
              .code == cli::kExitOk);
  REQUIRE(run_cli({"predict", "--model", (dir / "m.json").string(), "--data", (dir / "probe.csv").string(), "--out",
                   (dir / "p.csv").string()})
              .code == cli::kExitOk);
  const auto predicted = read_predictions(dir / "p.csv");

  const LoadedData loaded = load_csv(dir / "raw.csv", "y", true);
  GrowthConfig c;
  c.algorithm = Algorithm::grafted;
  c.leaf_size = 3;
  c.alpha = 4;
  c.n_trees = 6;
  c.seed = 2;
  const ForestModel forest = train_forest(loaded.data, c);
  REQUIRE(predicted.size() == raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    CHECK(std::abs(predicted[i] - predict_forest(forest, loaded.scaler->apply(raw.row(i)))) <= 1e-12);
  }
}

TEST_CASE("config files supply flags and the command line wins") {
  testutil::TempDir dir;
  write_toy(dir / "toy.csv");
  testutil::write_text(dir / "run.cfg", "# training defaults\ntrees = 2\nqn = 3\n\nseed = 5\nnormalize = true\n");
  CHECK(cli::expand_config_file((dir / "run.cfg").string()) ==
        std::vector<std::string>{"--trees", "2", "--qn", "3", "--seed", "5", "--normalize"});
  REQUIRE(run_cli({"train", "--config", (dir / "run.cfg").string(), "--data", (dir / "toy.csv").string(), "--trees", "4",
                   "--out", (dir / "m.json").string()})
              .code == cli::kExitOk);
  const ForestModel m = load_model(dir / "m.json");
  CHECK(m.trees().size() == 4);
  CHECK(m.config().leaf_size == 3);
  CHECK(m.config().seed == 5);
  CHECK(m.scaler());
}

TEST_CASE("cross-validation command") {
  testutil::TempDir dir;
  write_dataset_csv(dir / "d.csv", oracle::uniform_dataset(80, 2, 6), "y");
  const Outcome o = run_cli({"cv", "--data", (dir / "d.csv").string(), "--algorithm", "grafted", "--trees", "3", "--seed",
                             "1", "--folds", "3", "--q-grid", "2,5", "--alpha-grid", "1,2", "--out",
                             (dir / "cv.csv").string()});
  REQUIRE(o.code == cli::kExitOk);
  CHECK(o.out.find("evaluated 4 candidates with 3-fold CV") != std::string::npos);
  CHECK(read_csv_file(dir / "cv.csv").rows.size() == 4);
  CHECK(run_cli({"cv", "--data", (dir / "d.csv").string(), "--q-grid", "2,x"}).code == cli::kExitUsage);
}

TEST_CASE("experiments are reproducible from the command line") {
  testutil::TempDir a;
  testutil::TempDir b;
  const std::vector<std::string> common{"experiment", "--preset", "sparsity", "--p-grid", "2,3", "--n", "150", "--trees",
                                        "3", "--mesh-resolution", "8", "--seed", "4", "--threads", "1"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"--out", a.path().string()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"--out", b.path().string()});
  const Outcome oa = run_cli(args_a);
  REQUIRE(oa.code == cli::kExitOk);
  REQUIRE(run_cli(args_b).code == cli::kExitOk);
  CHECK(oa.out.find("6 result rows") != std::string::npos);
  CHECK(testutil::without_timestamp(testutil::read_text(a / "sparsity.csv")) ==
        testutil::without_timestamp(testutil::read_text(b / "sparsity.csv")));
  CHECK(run_cli({"experiment", "--preset", "fig6", "--max-trees", "10", "--out", a.path().string()}).code ==
        cli::kExitUsage);
  CHECK(run_cli({"experiment", "--out", a.path().string()}).code == cli::kExitUsage);
}

}
