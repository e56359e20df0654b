#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "graftforest/csv.hpp"
#include "graftforest/error.hpp"
#include "graftforest/evaluation.hpp"
#include "graftforest/experiment.hpp"
#include "graftforest/forest.hpp"
#include "graftforest/random.hpp"
#include "graftforest/serialization.hpp"

namespace graftforest::cli {

namespace {

template <class T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::istringstream cell(item);
    T value{};
    if (!(cell >> value) || !(cell >> std::ws).eof()) {
      throw ConfigError(std::string(flag) + ": cannot parse '" + item + "' in list '" + text + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) throw ConfigError(std::string(flag) + ": empty list");
  return out;
}

std::uint64_t fresh_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

struct GrowthFlags {
  std::string algorithm = "cart";
  std::size_t trees = 100;
  std::optional<std::size_t> an;
  std::string resample;
  std::size_t qn = 1;
  double alpha = 1.0;
  std::optional<std::size_t> mtry;
  std::optional<std::size_t> max_depth;
  std::string leaf_regressor = "constant";
  std::optional<double> bandwidth;
  double bandwidth_scale = 1.0;
  double bandwidth_beta = 1.0;
  double ridge = 1e-3;
  bool restrict_features = false;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App& app) {
    app.add_option("--algorithm", algorithm, "cart | centered | grafted | grafted_general")->capture_default_str();
    app.add_option("--trees", trees, "Number of trees M")->capture_default_str();
    app.add_option("--an", an, "Resample size a_n (default ceil(n/1.3))");
    app.add_option("--resample", resample, "with_replacement | without_replacement (default per algorithm)");
    app.add_option("--qn", qn, "Minimum leaf size q_n")->capture_default_str();
    app.add_option("--alpha", alpha, "CART-phase inflation alpha_n >= 1 (grafted algorithms)")->capture_default_str();
    app.add_option("--mtry", mtry, "Candidate features per CART split (default p)");
    app.add_option("--max-depth", max_depth, "Depth cap k_n for centered trees");
    app.add_option("--leaf-regressor", leaf_regressor, "constant | nadaraya_watson | kernel_ridge")->capture_default_str();
    app.add_option("--bandwidth", bandwidth, "Fixed leaf-regressor bandwidth h");
    app.add_option("--bandwidth-scale", bandwidth_scale, "c in h = c n^(-1/(4+beta))")->capture_default_str();
    app.add_option("--bandwidth-beta", bandwidth_beta, "beta in h = c n^(-1/(4+beta))")->capture_default_str();
    app.add_option("--ridge", ridge, "Kernel ridge penalty")->capture_default_str();
    app.add_flag("--restrict-features", restrict_features, "Fit scions/leaf regressors on CART-selected features only");
    app.add_option("--seed", seed, "Master seed (generated and printed when absent)");
  }

  GrowthConfig config(std::ostream& out) const {
    GrowthConfig c;
    c.algorithm = parse_algorithm(algorithm);
    c.n_trees = trees;
    c.resample_size = an;
    if (!resample.empty()) c.resample_mode = parse_resample_mode(resample);
    c.leaf_size = qn;
    c.alpha = alpha;
    c.mtry = mtry;
    c.max_depth = max_depth;
    c.leaf_regressor.kind = parse_leaf_regressor_kind(leaf_regressor);
    c.leaf_regressor.bandwidth.scale = bandwidth_scale;
    c.leaf_regressor.bandwidth.beta = bandwidth_beta;
    c.leaf_regressor.bandwidth.fixed = bandwidth;
    c.leaf_regressor.ridge = ridge;
    c.restrict_scion_features = restrict_features;
    if (c.leaf_regressor.kind != LeafRegressorKind::constant && c.algorithm != Algorithm::grafted_general) {
      throw ConfigError("--leaf-regressor requires --algorithm grafted_general");
    }
    if (seed) {
      c.seed = *seed;
    } else {
      c.seed = fresh_seed();
      out << "seed: " << c.seed << " (generated)\n";
    }
    return c;
  }
};

struct DataFlags {
  std::string path;
  std::string target;
  bool normalize = false;

  void add_to(CLI::App& app, bool required) {
    auto* opt = app.add_option("--data", path, "Training CSV with a header row");
    if (required) opt->required();
    app.add_option("--target", target, "Target column (default: last column)");
    app.add_flag("--normalize", normalize, "Min-max rescale features to [0,1]; the transform is stored in the model");
  }

  LoadedData load() const {
    const CsvTable table = read_csv_file(path);
    const std::string column = target.empty() ? table.header.back() : target;
    return dataset_from_table(table, column, normalize, path);
  }
};

double mean_final_leaf_size(const ForestModel& forest) {
  double total = 0.0;
  double leaves = 0.0;
  const auto visit = [&](const auto& self, const TreeModel& tree) -> void {
    for (const Leaf& leaf : tree.leaves()) {
      if (const auto* scion = std::get_if<ScionLeaf>(&leaf.payload)) {
        self(self, *scion->subtree);
      } else {
        total += static_cast<double>(leaf.sample_count());
        leaves += 1.0;
      }
    }
  };
  for (const TreeModel& tree : forest.trees()) visit(visit, tree);
  return leaves > 0.0 ? total / leaves : 0.0;
}

int cmd_train(const DataFlags& data_flags, const GrowthFlags& growth, const std::string& model_out, unsigned threads,
              std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const LoadedData loaded = data_flags.load();
  const GrowthConfig config = growth.config(out);
  ForestModel forest = train_forest(loaded.data, config, TrainOptions{threads});
  if (loaded.scaler) forest = forest.with_scaler(*loaded.scaler, loaded.data.feature_names());
  save_model(forest, model_out);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << "trained " << forest.trees().size() << " " << to_string(forest.config().algorithm) << " trees on "
      << loaded.data.rows() << " rows x " << loaded.data.n_features() << " features (target "
      << loaded.target_name << ")\n";
  out << "seed: " << forest.config().seed << "\n";
  out << "mean leaf size: " << format_double(mean_final_leaf_size(forest)) << "\n";
  out << "elapsed seconds: " << format_double(elapsed) << "\n";
  out << "model written to " << model_out << "\n";
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& input, const std::string& output, bool classify_flag,
                unsigned threads, std::ostream& out) {
  const ForestModel forest = load_model(model_path);
  const RowMatrix points = load_feature_csv(input, forest.feature_names(), forest.n_features());
  const std::vector<double> predictions = predict_forest(forest, points, threads);
  std::string text = "prediction\n";
  for (double v : predictions) {
    text += classify_flag ? std::string(v > 0.5 ? "1" : "0") : format_double(v);
    text += '\n';
  }
  if (output.empty() || output == "-") {
    out << text;
  } else {
    std::ofstream file(output, std::ios::binary);
    if (!file) throw DataError("cannot open '" + output + "' for writing");
    file << text;
  }
  return kExitOk;
}

struct CvFlags {
  std::size_t folds = 5;
  std::size_t budget = 0;
  std::string q_grid = "1,2,3,5,8,10,15,20";
  std::string alpha_grid = "1,2,4,8,16,32";
  std::string out;
};

int cmd_cv(const DataFlags& data_flags, const GrowthFlags& growth, const CvFlags& flags, unsigned threads,
           std::ostream& out) {
  const LoadedData loaded = data_flags.load();
  const GrowthConfig config = growth.config(out);
  CVPlan plan;
  plan.folds = flags.folds;
  plan.budget = flags.budget;
  plan.seed = derive_seed(config.seed, 0xC5ULL);
  plan.space.push_back({"leaf_size", parse_list<double>(flags.q_grid, "--q-grid")});
  if (config.algorithm == Algorithm::grafted || config.algorithm == Algorithm::grafted_general) {
    plan.space.push_back({"alpha", parse_list<double>(flags.alpha_grid, "--alpha-grid")});
  }
  std::vector<std::string> names;
  for (const auto& d : plan.space) names.push_back(d.name);
  const CVResult cv = random_search_cv(loaded.data, plan, forest_fold_trainer(config, names, loaded.data.rows(), threads));

  std::string table;
  for (const auto& n : names) table += n + ',';
  table += "mean_mse\n";
  for (const CVRow& row : cv.table) {
    for (double v : row.params) table += format_double(v) + ',';
    table += format_double(row.mean_mse) + '\n';
  }
  if (!flags.out.empty()) {
    std::ofstream file(flags.out, std::ios::binary);
    if (!file) throw DataError("cannot open '" + flags.out + "' for writing");
    file << table;
  }
  out << "evaluated " << cv.table.size() << " candidates with " << plan.folds << "-fold CV\n";
  out << "best:";
  for (std::size_t k = 0; k < names.size(); ++k) out << ' ' << names[k] << '=' << format_double(cv.best_params()[k]);
  out << " mean_mse=" << format_double(cv.table[cv.best].mean_mse) << '\n';
  return kExitOk;
}

struct ExperimentFlags {
  std::string preset;
  std::string spec;
  std::string out = "results";
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string n_grid;
  std::string p_grid;
  std::string alpha_grid;
  std::optional<std::size_t> n;
  std::optional<std::size_t> trees;
  std::optional<std::size_t> cv_folds;
  std::optional<std::size_t> cv_budget;
  std::optional<std::size_t> cv_trees;
  bool no_cv = false;
  std::optional<std::size_t> mesh_resolution;
  std::optional<std::size_t> max_trees;
  std::string data;
  std::string name;
};

int cmd_experiment(const ExperimentFlags& f, unsigned threads, std::ostream& out) {
  if (f.preset.empty() == f.spec.empty()) throw ConfigError("give exactly one of --preset or --spec");
  ExperimentSpec spec = f.preset.empty() ? load_experiment_spec(f.spec) : experiment_preset(f.preset);
  if (!f.name.empty()) spec.name = f.name;
  if (!f.seeds.empty()) {
    spec.seeds = parse_list<std::uint64_t>(f.seeds, "--seeds");
  } else if (f.seed) {
    spec.seeds = {*f.seed};
  } else if (f.spec.empty()) {
    spec.seeds = {fresh_seed()};
    spec.seed_generated = true;
    out << "seed: " << spec.seeds.front() << " (generated)\n";
  }
  if (!f.n_grid.empty()) spec.n_grid = parse_list<std::size_t>(f.n_grid, "--n-grid");
  if (!f.p_grid.empty()) spec.p_grid = parse_list<std::size_t>(f.p_grid, "--p-grid");
  if (!f.alpha_grid.empty()) spec.alpha_grid = parse_list<double>(f.alpha_grid, "--alpha-grid");
  if (f.n) spec.n = *f.n;
  if (f.trees) spec.n_trees = *f.trees;
  if (f.cv_folds) spec.cv.folds = *f.cv_folds;
  if (f.cv_budget) spec.cv.budget = *f.cv_budget;
  if (f.cv_trees) spec.cv.trees = *f.cv_trees;
  if (f.no_cv) spec.cross_validate = false;
  if (f.mesh_resolution) spec.mesh_resolution = *f.mesh_resolution;
  if (f.max_trees) spec.max_trees = *f.max_trees;
  if (!f.data.empty()) spec.data_path = f.data;
  spec.threads = threads;

  const ExperimentResult result = run_experiment(spec, f.out);
  out << "experiment " << spec.name << " (" << to_string(spec.kind) << "): " << result.rows.size() << " result rows\n";
  for (const ResultRow& r : result.rows) {
    out << "  " << r.model << ' ' << r.algorithm << " n=" << r.n << " p=" << r.p << " seed=" << r.seed
        << " error=" << format_double(r.error) << '\n';
  }
  for (const auto& file : result.files) out << "wrote " << file.string() << '\n';
  return kExitOk;
}

// Inserts the expansion of every --config file right after the subcommand name so
// that flags given on the command line (later) take precedence.
std::vector<std::string> with_config_expanded(const std::vector<std::string>& args) {
  std::vector<std::string> expanded;
  std::vector<std::string> rest;
  std::vector<std::string> config_args;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config" && i + 1 < args.size()) {
      const auto more = expand_config_file(args[i + 1]);
      config_args.insert(config_args.end(), more.begin(), more.end());
      ++i;
    } else if (a.rfind("--config=", 0) == 0) {
      const auto more = expand_config_file(a.substr(9));
      config_args.insert(config_args.end(), more.begin(), more.end());
    } else {
      rest.push_back(a);
    }
  }
  if (config_args.empty()) return args;
  if (rest.empty() || rest.front().rfind("-", 0) == 0) throw ConfigError("--config must follow a subcommand");
  expanded.push_back(rest.front());
  expanded.insert(expanded.end(), config_args.begin(), config_args.end());
  expanded.insert(expanded.end(), rest.begin() + 1, rest.end());
  return expanded;
}

}  // namespace

std::vector<std::string> expand_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  std::size_t number = 0;
  const auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (key.empty() || key == "config") throw ConfigError(path + ":" + std::to_string(number) + ": invalid key");
    if (value == "true") {
      out.push_back("--" + key);
    } else if (value != "false") {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  return out;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regression forests: CART, centered, grafted and generalized grafted trees", "graftforest"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", std::string(kVersion));

  unsigned threads = 0;
  std::string config_path;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Parallel tree-training width (default GRAFTFOREST_THREADS or all cores)");
    sub->add_option("--config", config_path, "File of 'key = value' lines mirroring the flags");
  };

  DataFlags train_data;
  GrowthFlags train_growth;
  std::string model_out;
  auto* train = app.add_subcommand("train", "Train a forest and write the model JSON");
  train_data.add_to(*train, true);
  train_growth.add_to(*train);
  train->add_option("--out", model_out, "Model file to write")->required();
  add_common(train);

  std::string model_path;
  std::string predict_input;
  std::string predict_output;
  bool classify_flag = false;
  auto* predict = app.add_subcommand("predict", "Predict every row of a CSV with a saved model");
  predict->add_option("--model", model_path, "Model JSON written by train")->required();
  predict->add_option("--data", predict_input, "CSV with the model's feature columns")->required();
  predict->add_option("--out", predict_output, "Predictions CSV (default stdout)");
  predict->add_flag("--classify", classify_flag, "Emit 1 when the prediction exceeds 1/2, else 0");
  add_common(predict);

  DataFlags cv_data;
  GrowthFlags cv_growth;
  CvFlags cv_flags;
  auto* cv = app.add_subcommand("cv", "Cross-validate q_n (and alpha_n for grafted forests)");
  cv_data.add_to(*cv, true);
  cv_growth.add_to(*cv);
  cv->add_option("--folds", cv_flags.folds, "Number of folds")->capture_default_str();
  cv->add_option("--budget", cv_flags.budget, "Maximum candidates (0 = whole grid)")->capture_default_str();
  cv->add_option("--q-grid", cv_flags.q_grid, "Comma-separated q_n candidates")->capture_default_str();
  cv->add_option("--alpha-grid", cv_flags.alpha_grid, "Comma-separated alpha_n candidates")->capture_default_str();
  cv->add_option("--out", cv_flags.out, "CV table CSV");
  add_common(cv);

  ExperimentFlags exp;
  auto* experiment = app.add_subcommand("experiment", "Run a named protocol or a JSON experiment spec");
  experiment->add_option("--preset", exp.preset, "boston, fig2..fig10, sparsity, kernel_sparsity, biau");
  experiment->add_option("--spec", exp.spec, "JSON experiment spec");
  experiment->add_option("--out", exp.out, "Output directory")->capture_default_str();
  experiment->add_option("--name", exp.name, "Override the experiment (and output file) name");
  experiment->add_option("--seed", exp.seed, "Single master seed (generated and recorded when absent)");
  experiment->add_option("--seeds", exp.seeds, "Comma-separated master seeds");
  experiment->add_option("--n-grid", exp.n_grid, "Comma-separated sample sizes (error_vs_n)");
  experiment->add_option("--p-grid", exp.p_grid, "Comma-separated dimensions (sparsity sweeps)");
  experiment->add_option("--alpha-grid", exp.alpha_grid, "Comma-separated alpha_n values (alpha sweep)");
  experiment->add_option("--n", exp.n, "Sample size of fixed-n experiments");
  experiment->add_option("--trees", exp.trees, "Trees per forest M");
  experiment->add_option("--cv-folds", exp.cv_folds, "Cross-validation folds");
  experiment->add_option("--cv-budget", exp.cv_budget, "Cross-validation candidate budget (0 = whole grid)");
  experiment->add_option("--cv-trees", exp.cv_trees, "Trees per cross-validation forest");
  experiment->add_flag("--no-cv", exp.no_cv, "Use the fixed parameters instead of cross-validating");
  experiment->add_option("--mesh-resolution", exp.mesh_resolution, "Mesh points per axis");
  experiment->add_option("--max-trees", exp.max_trees, "Resource guard on the total trees grown");
  experiment->add_option("--data", exp.data, "Boston Housing CSV (boston preset)");
  add_common(experiment);

  try {
    std::vector<std::string> args = with_config_expanded(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_data, train_growth, model_out, threads, out);
    if (*predict) return cmd_predict(model_path, predict_input, predict_output, classify_flag, threads, out);
    if (*cv) return cmd_cv(cv_data, cv_growth, cv_flags, threads, out);
    if (*experiment) return cmd_experiment(exp, threads, out);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const InvariantViolation& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace graftforest::cli
