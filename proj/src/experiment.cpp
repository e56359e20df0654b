#include "graftforest/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "graftforest/csv.hpp"
#include "graftforest/error.hpp"
#include "graftforest/evaluation.hpp"
#include "graftforest/forest.hpp"
#include "graftforest/random.hpp"
#include "graftforest/svg_chart.hpp"
#include "graftforest/synthetic.hpp"

namespace graftforest {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::size_t candidate_count(std::size_t grid, const CVSettings& cv) {
  return cv.budget > 0 ? std::min(grid, cv.budget) : grid;
}

/// Runs one experiment; rows are appended in a fixed loop order.
class Runner {
 public:
  explicit Runner(const ExperimentSpec& spec) : spec_(spec) {}

  ExperimentResult run() {
    switch (spec_.kind) {
      case ExperimentKind::error_vs_n: error_vs_n(); break;
      case ExperimentKind::alpha_sweep: alpha_sweep(); break;
      case ExperimentKind::sparsity_sweep: sparsity_sweep(false); break;
      case ExperimentKind::kernel_sparsity_sweep: sparsity_sweep(true); break;
      case ExperimentKind::boston: boston(); break;
      case ExperimentKind::biau_contours: biau(); break;
    }
    return std::move(result_);
  }

 private:
  GrowthConfig base(Algorithm algorithm, std::uint64_t seed) const {
    GrowthConfig c;
    c.algorithm = algorithm;
    c.n_trees = spec_.n_trees;
    c.resample_size = spec_.resample_size;
    c.resample_mode = spec_.resample_mode;
    c.mtry = spec_.mtry;
    c.seed = seed;
    return c;
  }

  CVPlan plan(std::vector<ParamDimension> space, std::uint64_t seed) const {
    CVPlan p;
    p.folds = spec_.cv.folds;
    p.budget = spec_.cv.budget;
    p.seed = seed;
    p.space = std::move(space);
    return p;
  }

  /// Cross-validates `names` for a forest config and returns the config with the winners applied.
  GrowthConfig tune_forest(const Dataset& data, const GrowthConfig& config, std::vector<ParamDimension> space,
                           std::uint64_t seed) const {
    std::vector<std::string> names;
    for (const auto& d : space) names.push_back(d.name);
    GrowthConfig cv_config = config;
    if (spec_.cv.trees > 0) cv_config.n_trees = spec_.cv.trees;
    const CVResult cv = random_search_cv(data, plan(std::move(space), seed),
                                         forest_fold_trainer(cv_config, names, data.rows(), spec_.threads));
    return apply_params(config, names, cv.best_params());
  }

  ForestModel train(const Dataset& data, const GrowthConfig& config) const {
    return train_forest(data, config, TrainOptions{spec_.threads});
  }

  ResultRow row(const std::string& model, const std::string& algorithm, std::size_t n, std::size_t p,
                std::uint64_t seed) const {
    ResultRow r;
    r.experiment = spec_.name;
    r.model = model;
    r.algorithm = algorithm;
    r.n = n;
    r.p = p;
    r.seed = seed;
    return r;
  }

  void push_forest_row(ResultRow r, const GrowthConfig& config, double error, Clock::time_point start) {
    r.leaf_size = static_cast<double>(config.leaf_size);
    if (config.algorithm == Algorithm::grafted || config.algorithm == Algorithm::grafted_general) r.alpha = config.alpha;
    if (config.algorithm == Algorithm::grafted_general && config.leaf_regressor.kind != LeafRegressorKind::constant) {
      if (config.leaf_regressor.bandwidth.fixed) r.bandwidth = *config.leaf_regressor.bandwidth.fixed;
      r.ridge = config.leaf_regressor.ridge;
    }
    r.error = error;
    r.seconds = seconds_since(start);
    result_.rows.push_back(std::move(r));
  }

  RowMatrix cube_mesh(std::size_t p) const {
    MeshSpec mesh;
    mesh.p = p;
    mesh.resolution = spec_.mesh_resolution;
    mesh.count = spec_.mesh_count;
    return build_mesh(mesh);
  }

  void error_vs_n() {
    for (const std::string& name : spec_.models) {
      const SyntheticModel model = cef_catalog(name);
      const RowMatrix mesh = cube_mesh(model.p);
      for (std::uint64_t seed : spec_.seeds) {
        for (std::size_t n : spec_.n_grid) {
          const RunSeeds s = run_seeds(seed, name, n);
          const Dataset data = sample_model(model, n, s.data);

          auto start = Clock::now();
          GrowthConfig grafted = base(Algorithm::grafted, s.forest);
          grafted.leaf_size = spec_.leaf_size;
          grafted.alpha = spec_.alpha;
          if (spec_.cross_validate) {
            grafted = tune_forest(data, grafted, {{"leaf_size", spec_.cv.leaf_sizes}, {"alpha", spec_.cv.alphas}}, s.cv);
          }
          push_forest_row(row(name, "grafted", n, model.p, seed), grafted,
                          forest_mesh_error(train(data, grafted), model.cef, mesh, spec_.threads), start);

          start = Clock::now();
          GrowthConfig cart = base(Algorithm::cart, s.forest);
          cart.leaf_size = spec_.cart_leaf_size;
          if (spec_.cross_validate) cart = tune_forest(data, cart, {{"leaf_size", spec_.cv.leaf_sizes}}, s.cv);
          push_forest_row(row(name, "cart", n, model.p, seed), cart,
                          forest_mesh_error(train(data, cart), model.cef, mesh, spec_.threads), start);
        }
      }
    }
  }

  void alpha_sweep() {
    for (const std::string& name : spec_.models) {
      const SyntheticModel model = cef_catalog(name);
      const RowMatrix mesh = cube_mesh(model.p);
      for (std::uint64_t seed : spec_.seeds) {
        const RunSeeds s = run_seeds(seed, name, spec_.n);
        const Dataset data = sample_model(model, spec_.n, s.data);
        for (double alpha : spec_.alpha_grid) {
          const auto start = Clock::now();
          GrowthConfig config = base(Algorithm::grafted, s.forest);
          config.leaf_size = spec_.leaf_size;
          config.alpha = alpha;
          push_forest_row(row(name, "grafted", spec_.n, model.p, seed), config,
                          forest_mesh_error(train(data, config), model.cef, mesh, spec_.threads), start);
        }
      }
    }
  }

  void sparsity_sweep(bool kernel) {
    const std::string name = spec_.models.empty() ? "sparse" : spec_.models.front();
    const SyntheticModel sparse = cef_catalog(name);
    for (std::uint64_t seed : spec_.seeds) {
      for (std::size_t p : spec_.p_grid) {
        const SyntheticModel model = sparse.with_dimension(p);
        const RunSeeds s = run_seeds(seed, name, p);
        const Dataset data = sample_model(model, spec_.n, s.data);
        MeshSpec mesh_spec;
        mesh_spec.p = p;
        mesh_spec.resolution = spec_.mesh_resolution;
        mesh_spec.grid_dims = model.relevant;
        const RowMatrix mesh = build_mesh(mesh_spec);

        auto start = Clock::now();
        GrowthConfig cart = base(Algorithm::cart, s.forest);
        cart.leaf_size = spec_.cart_leaf_size;
        push_forest_row(row(name, "cart", spec_.n, p, seed), cart,
                        forest_mesh_error(train(data, cart), model.cef, mesh, spec_.threads), start);

        if (!kernel) {
          start = Clock::now();
          GrowthConfig grafted = base(Algorithm::grafted, s.forest);
          grafted.leaf_size = spec_.leaf_size;
          grafted.alpha = spec_.alpha;
          grafted.restrict_scion_features = true;
          push_forest_row(row(name, "grafted", spec_.n, p, seed), grafted,
                          forest_mesh_error(train(data, grafted), model.cef, mesh, spec_.threads), start);

          start = Clock::now();
          GrowthConfig centered = base(Algorithm::centered, s.forest);
          centered.leaf_size = spec_.leaf_size;
          push_forest_row(row(name, "centered", spec_.n, p, seed), centered,
                          forest_mesh_error(train(data, centered), model.cef, mesh, spec_.threads), start);
          continue;
        }

        const std::vector<ParamDimension> kernel_space{{"bandwidth", spec_.cv.bandwidths}, {"ridge", spec_.cv.ridges}};
        start = Clock::now();
        GrowthConfig grafted = base(Algorithm::grafted_general, s.forest);
        grafted.leaf_size = spec_.leaf_size;
        grafted.alpha = spec_.alpha;
        grafted.restrict_scion_features = true;
        grafted.leaf_regressor.kind = LeafRegressorKind::kernel_ridge;
        grafted.leaf_regressor.bandwidth = BandwidthRule::fixed_at(spec_.bandwidth);
        grafted.leaf_regressor.ridge = spec_.ridge;
        if (spec_.cross_validate) grafted = tune_forest(data, grafted, kernel_space, s.cv);
        push_forest_row(row(name, "grafted_kernel_ridge", spec_.n, p, seed), grafted,
                        forest_mesh_error(train(data, grafted), model.cef, mesh, spec_.threads), start);

        start = Clock::now();
        double bandwidth = spec_.bandwidth;
        double ridge = spec_.ridge;
        if (spec_.cross_validate) {
          const CVResult cv = random_search_cv(data, plan(kernel_space, s.cv), kernel_ridge_fold_trainer({"bandwidth", "ridge"}));
          bandwidth = cv.best_value("bandwidth");
          ridge = cv.best_value("ridge");
        }
        ResultRow r = row(name, "kernel_ridge", spec_.n, p, seed);
        r.bandwidth = bandwidth;
        r.ridge = ridge;
        r.error = mesh_l2_error(fit_plain_kernel_ridge(data, bandwidth, ridge), model.cef, mesh);
        r.seconds = seconds_since(start);
        result_.rows.push_back(std::move(r));
      }
    }
  }

  void boston() {
    if (spec_.data_path.empty()) throw ConfigError("the boston experiment needs a data path (the Boston Housing CSV)");
    const LoadedData loaded = load_csv(spec_.data_path, "MEDV", true);
    validate_boston_profile(loaded);
    const Dataset& all = loaded.data;
    for (std::uint64_t seed : spec_.seeds) {
      const RunSeeds s = run_seeds(seed, "boston", all.rows());
      const TrainTestSplit split = train_test_split(all.rows(), spec_.test_fraction, s.data);
      const Dataset train_set = all.subset(split.train);
      const auto evaluate = [&](const GrowthConfig& config) {
        const ForestModel forest = train(train_set, config);
        return test_error([&](std::span<const double> x) { return predict_forest(forest, x); }, all, split.test);
      };

      auto start = Clock::now();
      GrowthConfig cart = base(Algorithm::cart, s.forest);
      cart.leaf_size = spec_.cart_leaf_size;
      if (spec_.cross_validate) cart = tune_forest(train_set, cart, {{"leaf_size", spec_.cv.leaf_sizes}}, s.cv);
      push_forest_row(row("boston", "cart", train_set.rows(), all.n_features(), seed), cart, evaluate(cart), start);

      start = Clock::now();
      GrowthConfig grafted = base(Algorithm::grafted, s.forest);
      grafted.leaf_size = spec_.leaf_size;
      grafted.alpha = spec_.alpha;
      if (spec_.cross_validate) {
        grafted = tune_forest(train_set, grafted, {{"leaf_size", spec_.cv.leaf_sizes}, {"alpha", spec_.cv.alphas}}, s.cv);
      }
      push_forest_row(row("boston", "grafted", train_set.rows(), all.n_features(), seed), grafted, evaluate(grafted), start);

      start = Clock::now();
      GrowthConfig centered = base(Algorithm::centered, s.forest);
      centered.leaf_size = spec_.leaf_size;
      if (spec_.cross_validate) centered = tune_forest(train_set, centered, {{"leaf_size", spec_.cv.leaf_sizes}}, s.cv);
      push_forest_row(row("boston", "centered", train_set.rows(), all.n_features(), seed), centered, evaluate(centered),
                      start);
    }
  }

  void biau() {
    const std::string name = spec_.models.empty() ? "biau" : spec_.models.front();
    const SyntheticModel model = cef_catalog(name);
    if (model.p != 2) throw ConfigError("the Biau experiment needs a two-dimensional model");
    MeshSpec centre;
    centre.p = 2;
    centre.resolution = spec_.mesh_resolution;
    centre.lower = {kBiauCentreLower, kBiauCentreLower};
    centre.upper = {kBiauCentreUpper, kBiauCentreUpper};
    const RowMatrix mesh = build_mesh(centre);

    for (std::size_t k = 0; k < spec_.seeds.size(); ++k) {
      const std::uint64_t seed = spec_.seeds[k];
      const RunSeeds s = run_seeds(seed, name, spec_.n);
      const Dataset data = sample_model(model, spec_.n, s.data);

      auto start = Clock::now();
      GrowthConfig cart = base(Algorithm::cart, s.forest);
      cart.leaf_size = spec_.cart_leaf_size;
      const ForestModel cart_forest = train(data, cart);
      push_forest_row(row(name, "cart", spec_.n, 2, seed), cart, forest_mesh_error(cart_forest, model.cef, mesh, spec_.threads),
                      start);

      start = Clock::now();
      GrowthConfig grafted = base(Algorithm::grafted, s.forest);
      grafted.leaf_size = spec_.leaf_size;
      grafted.alpha = spec_.alpha;
      const ForestModel grafted_forest = train(data, grafted);
      push_forest_row(row(name, "grafted", spec_.n, 2, seed), grafted,
                      forest_mesh_error(grafted_forest, model.cef, mesh, spec_.threads), start);

      if (k == 0 && spec_.contour_resolution > 0) {
        MeshSpec grid;
        grid.p = 2;
        grid.resolution = spec_.contour_resolution;
        const RowMatrix points = build_mesh(grid);
        ContourGrid contours;
        contours.resolution = spec_.contour_resolution;
        // build_mesh varies x2 fastest; contour rows are indexed by x2.
        const std::size_t res = contours.resolution;
        contours.truth.resize(res * res);
        const auto cart_pred = predict_forest(cart_forest, points, spec_.threads);
        const auto grafted_pred = predict_forest(grafted_forest, points, spec_.threads);
        contours.cart.resize(res * res);
        contours.grafted.resize(res * res);
        for (std::size_t i = 0; i < points.rows(); ++i) {
          const std::size_t ix = i / res;
          const std::size_t iy = i % res;
          const std::size_t cell = iy * res + ix;
          contours.truth[cell] = model(points.row(i));
          contours.cart[cell] = cart_pred[i];
          contours.grafted[cell] = grafted_pred[i];
        }
        result_.contours = std::move(contours);
      }
    }
  }

  const ExperimentSpec& spec_;
  ExperimentResult result_;
};

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

json spec_to_json(const ExperimentSpec& s) {
  json cv = {{"folds", s.cv.folds},         {"budget", s.cv.budget},       {"trees", s.cv.trees},
             {"leaf_sizes", s.cv.leaf_sizes}, {"alphas", s.cv.alphas},     {"bandwidths", s.cv.bandwidths},
             {"ridges", s.cv.ridges}};
  json out = {
      {"name", s.name},
      {"kind", to_string(s.kind)},
      {"models", s.models},
      {"n_grid", s.n_grid},
      {"p_grid", s.p_grid},
      {"alpha_grid", s.alpha_grid},
      {"n", s.n},
      {"n_trees", s.n_trees},
      {"resample_size", s.resample_size ? json(*s.resample_size) : json(nullptr)},
      {"resample_mode", s.resample_mode ? json(to_string(*s.resample_mode)) : json(nullptr)},
      {"leaf_size", s.leaf_size},
      {"alpha", s.alpha},
      {"cart_leaf_size", s.cart_leaf_size},
      {"bandwidth", s.bandwidth},
      {"ridge", s.ridge},
      {"mtry", s.mtry ? json(*s.mtry) : json(nullptr)},
      {"cross_validate", s.cross_validate},
      {"cv", std::move(cv)},
      {"mesh_resolution", s.mesh_resolution},
      {"mesh_count", s.mesh_count},
      {"contour_resolution", s.contour_resolution},
      {"seeds", s.seeds},
      {"data_path", s.data_path},
      {"test_fraction", s.test_fraction},
      {"max_trees", s.max_trees},
  };
  return out;
}

void spec_update_from_json(ExperimentSpec& s, const json& in) {
  for (const auto& [key, value] : in.items()) {
    if (key == "preset") continue;
    if (key == "name") {
      s.name = value.get<std::string>();
    } else if (key == "kind") {
      s.kind = parse_experiment_kind(value.get<std::string>());
    } else if (key == "models") {
      s.models = value.get<std::vector<std::string>>();
    } else if (key == "n_grid") {
      s.n_grid = value.get<std::vector<std::size_t>>();
    } else if (key == "p_grid") {
      s.p_grid = value.get<std::vector<std::size_t>>();
    } else if (key == "alpha_grid") {
      s.alpha_grid = value.get<std::vector<double>>();
    } else if (key == "n") {
      s.n = value.get<std::size_t>();
    } else if (key == "n_trees") {
      s.n_trees = value.get<std::size_t>();
    } else if (key == "resample_size") {
      s.resample_size = value.is_null() ? std::nullopt : std::optional<std::size_t>(value.get<std::size_t>());
    } else if (key == "resample_mode") {
      s.resample_mode = value.is_null() ? std::nullopt
                                        : std::optional<ResampleMode>(parse_resample_mode(value.get<std::string>()));
    } else if (key == "leaf_size") {
      s.leaf_size = value.get<std::size_t>();
    } else if (key == "alpha") {
      s.alpha = value.get<double>();
    } else if (key == "cart_leaf_size") {
      s.cart_leaf_size = value.get<std::size_t>();
    } else if (key == "bandwidth") {
      s.bandwidth = value.get<double>();
    } else if (key == "ridge") {
      s.ridge = value.get<double>();
    } else if (key == "mtry") {
      s.mtry = value.is_null() ? std::nullopt : std::optional<std::size_t>(value.get<std::size_t>());
    } else if (key == "cross_validate") {
      s.cross_validate = value.get<bool>();
    } else if (key == "cv") {
      for (const auto& [ck, cvalue] : value.items()) {
        if (ck == "folds") {
          s.cv.folds = cvalue.get<std::size_t>();
        } else if (ck == "budget") {
          s.cv.budget = cvalue.get<std::size_t>();
        } else if (ck == "trees") {
          s.cv.trees = cvalue.get<std::size_t>();
        } else if (ck == "leaf_sizes") {
          s.cv.leaf_sizes = cvalue.get<std::vector<double>>();
        } else if (ck == "alphas") {
          s.cv.alphas = cvalue.get<std::vector<double>>();
        } else if (ck == "bandwidths") {
          s.cv.bandwidths = cvalue.get<std::vector<double>>();
        } else if (ck == "ridges") {
          s.cv.ridges = cvalue.get<std::vector<double>>();
        } else {
          throw ConfigError("unknown cv key '" + ck + "' in experiment spec");
        }
      }
    } else if (key == "mesh_resolution") {
      s.mesh_resolution = value.get<std::size_t>();
    } else if (key == "mesh_count") {
      s.mesh_count = value.get<std::size_t>();
    } else if (key == "contour_resolution") {
      s.contour_resolution = value.get<std::size_t>();
    } else if (key == "seeds") {
      s.seeds = value.get<std::vector<std::uint64_t>>();
    } else if (key == "data_path") {
      s.data_path = value.get<std::string>();
    } else if (key == "test_fraction") {
      s.test_fraction = value.get<double>();
    } else if (key == "max_trees") {
      s.max_trees = value.get<std::size_t>();
    } else {
      throw ConfigError("unknown key '" + key + "' in experiment spec");
    }
  }
}

std::string chart_svg(const ExperimentSpec& spec, const ExperimentResult& result) {
  if (spec.kind == ExperimentKind::biau_contours && result.contours) {
    const ContourGrid& c = *result.contours;
    return render_heatmaps(spec.name + ": Biau CEF, CART forest, grafted forest",
                           {{"truth", c.resolution, c.truth}, {"CART forest", c.resolution, c.cart},
                            {"grafted forest", c.resolution, c.grafted}});
  }
  if (spec.kind == ExperimentKind::boston || spec.kind == ExperimentKind::biau_contours) {
    std::vector<std::string> labels;
    std::map<std::string, std::vector<double>> errors;
    for (const ResultRow& r : result.rows) {
      if (!errors.count(r.algorithm)) labels.push_back(r.algorithm);
      errors[r.algorithm].push_back(r.error);
    }
    BarChart chart{spec.name + ": median error over seeds", "error", labels, {}};
    for (const std::string& l : labels) chart.values.push_back(median(errors[l]));
    return render_bar_chart(chart);
  }

  LineChart chart;
  chart.title = spec.name;
  chart.y_label = "L2 error (median over seeds)";
  chart.log_y = true;
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::vector<double>>> points;
  for (const ResultRow& r : result.rows) {
    std::string label;
    double x = 0.0;
    switch (spec.kind) {
      case ExperimentKind::error_vs_n:
        label = r.model + " " + r.algorithm;
        x = static_cast<double>(r.n);
        break;
      case ExperimentKind::alpha_sweep:
        label = r.model;
        x = r.alpha.value_or(1.0);
        break;
      default:
        label = r.algorithm;
        x = static_cast<double>(r.p);
    }
    if (!points.count(label)) order.push_back(label);
    points[label][x].push_back(r.error);
  }
  switch (spec.kind) {
    case ExperimentKind::error_vs_n:
      chart.x_label = "n";
      chart.log_x = true;
      break;
    case ExperimentKind::alpha_sweep:
      chart.x_label = "alpha";
      chart.log_x = true;
      break;
    default:
      chart.x_label = "p";
  }
  for (const std::string& label : order) {
    ChartSeries series{label, {}, {}};
    for (const auto& [x, ys] : points[label]) {
      series.x.push_back(x);
      series.y.push_back(median(ys));
    }
    chart.series.push_back(std::move(series));
  }
  return render_line_chart(chart);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::vector<std::size_t> range(std::size_t first, std::size_t last, std::size_t step) {
  std::vector<std::size_t> out;
  for (std::size_t v = first; v <= last; v += step) out.push_back(v);
  return out;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::error_vs_n: return "error_vs_n";
    case ExperimentKind::alpha_sweep: return "alpha_sweep";
    case ExperimentKind::sparsity_sweep: return "sparsity_sweep";
    case ExperimentKind::kernel_sparsity_sweep: return "kernel_sparsity_sweep";
    case ExperimentKind::boston: return "boston";
    case ExperimentKind::biau_contours: return "biau_contours";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (ExperimentKind k : {ExperimentKind::error_vs_n, ExperimentKind::alpha_sweep, ExperimentKind::sparsity_sweep,
                           ExperimentKind::kernel_sparsity_sweep, ExperimentKind::boston, ExperimentKind::biau_contours}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

RunSeeds run_seeds(std::uint64_t seed, std::string_view model, std::size_t size_key) {
  const std::uint64_t cell = derive_seed(derive_seed(seed, fnv1a(model)), static_cast<std::uint64_t>(size_key));
  return RunSeeds{cell, derive_seed(cell, 1), derive_seed(cell, 2)};
}

ExperimentSpec experiment_preset(std::string_view name) {
  ExperimentSpec s;
  s.name = std::string(name);
  if (name.size() == 4 && name.substr(0, 3) == "fig" && name[3] >= '2' && name[3] <= '7') {
    s.kind = ExperimentKind::error_vs_n;
    s.models = {std::string(name)};
    s.n_grid = {500, 1000, 2000, 4000, 8000};
    s.cross_validate = true;
    s.mesh_resolution = 20;
    return s;
  }
  if (name == "fig8") {
    s.kind = ExperimentKind::alpha_sweep;
    s.models = alpha_study_names();
    s.n = 10000;
    s.resample_size = 8000;
    s.leaf_size = 10;
    s.alpha_grid = {1, 2, 4, 8, 16, 32, 64};
    return s;
  }
  if (name == "fig9" || name == "sparsity") {
    s.kind = ExperimentKind::sparsity_sweep;
    s.models = {"sparse"};
    s.n = 1000;
    s.p_grid = range(2, 102, 1);
    s.leaf_size = 10;
    s.alpha = 10;
    s.cart_leaf_size = 1;
    s.mesh_resolution = 50;
    return s;
  }
  if (name == "fig10" || name == "kernel_sparsity") {
    s.kind = ExperimentKind::kernel_sparsity_sweep;
    s.models = {"sparse"};
    s.n = 1000;
    s.p_grid = range(2, 102, 1);
    s.leaf_size = 10;
    s.alpha = 10;
    s.cart_leaf_size = 1;
    s.mesh_resolution = 50;
    s.cross_validate = true;
    s.cv.folds = 5;
    return s;
  }
  if (name == "boston") {
    s.kind = ExperimentKind::boston;
    s.models = {"boston"};
    s.resample_size = 400;
    s.resample_mode = ResampleMode::with_replacement;
    s.mtry = 13;
    s.cross_validate = true;
    s.leaf_size = 5;
    s.alpha = 4;
    return s;
  }
  if (name == "biau") {
    s.kind = ExperimentKind::biau_contours;
    s.models = {"biau"};
    s.n = 20000;
    s.cart_leaf_size = 1;
    s.leaf_size = 5;
    s.alpha = 16;
    s.mesh_resolution = 64;
    s.contour_resolution = 100;
    s.seeds = {1, 2, 3, 4, 5};
    return s;
  }
  throw ConfigError("unknown experiment preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  return {"boston", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "sparsity", "kernel_sparsity", "biau"};
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open experiment spec '" + path.string() + "'");
  try {
    const json doc = json::parse(in);
    if (!doc.is_object()) throw ConfigError("experiment spec must be a JSON object");
    ExperimentSpec spec = doc.contains("preset") ? experiment_preset(doc.at("preset").get<std::string>()) : ExperimentSpec{};
    if (spec.name.empty()) spec.name = path.stem().string();
    spec_update_from_json(spec, doc);
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError("malformed experiment spec '" + path.string() + "': " + e.what());
  }
}

void validate_spec(const ExperimentSpec& s) {
  const auto increasing = [](const auto& grid) { return std::adjacent_find(grid.begin(), grid.end(), std::greater_equal<>()) == grid.end(); };
  if (s.name.empty()) throw ConfigError("experiment needs a name");
  if (s.n_trees == 0) throw ConfigError("experiment needs at least one tree per forest");
  if (s.seeds.empty()) throw ConfigError("experiment needs at least one seed");
  if (s.mesh_resolution < 2) throw ConfigError("mesh resolution must be at least 2");
  switch (s.kind) {
    case ExperimentKind::error_vs_n:
      if (s.models.empty()) throw ConfigError("error_vs_n needs at least one model");
      if (s.n_grid.empty() || !increasing(s.n_grid)) throw ConfigError("n grid must be nonempty and increasing");
      break;
    case ExperimentKind::alpha_sweep:
      if (s.models.empty()) throw ConfigError("alpha_sweep needs at least one model");
      if (s.alpha_grid.empty() || !increasing(s.alpha_grid)) throw ConfigError("alpha grid must be nonempty and increasing");
      if (s.alpha_grid.front() < 1.0) throw ConfigError("alpha values must be >= 1");
      break;
    case ExperimentKind::sparsity_sweep:
    case ExperimentKind::kernel_sparsity_sweep:
      if (s.p_grid.empty() || !increasing(s.p_grid)) throw ConfigError("p grid must be nonempty and increasing");
      if (s.p_grid.front() < 2) throw ConfigError("sparsity sweeps need p >= 2");
      break;
    case ExperimentKind::boston:
      if (!(s.test_fraction > 0.0 && s.test_fraction < 1.0)) throw ConfigError("test fraction must lie in (0, 1)");
      break;
    case ExperimentKind::biau_contours:
      break;
  }
  if (s.cross_validate) {
    if (s.kind == ExperimentKind::alpha_sweep || s.kind == ExperimentKind::sparsity_sweep ||
        s.kind == ExperimentKind::biau_contours) {
      throw ConfigError(std::string("cross-validation is not part of the ") + to_string(s.kind) + " protocol");
    }
    if (s.cv.folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  }
  for (const std::string& m : s.models) {
    if (s.kind != ExperimentKind::boston) cef_catalog(m);
  }
  const std::size_t planned = planned_tree_count(s);
  if (planned > s.max_trees) {
    throw ConfigError("experiment would grow " + std::to_string(planned) + " trees, above the limit of " +
                      std::to_string(s.max_trees) + "; reduce seeds, grids, CV folds/budget or raise max_trees");
  }
}

std::size_t planned_tree_count(const ExperimentSpec& s) {
  const std::size_t m = s.n_trees;
  const std::size_t cv_trees = s.cv.trees > 0 ? s.cv.trees : m;
  const auto cv_cost = [&](std::size_t grid) { return s.cross_validate ? s.cv.folds * candidate_count(grid, s.cv) * cv_trees : 0; };
  const std::size_t q = s.cv.leaf_sizes.size();
  const std::size_t qa = q * s.cv.alphas.size();
  const std::size_t kernel = s.cv.bandwidths.size() * s.cv.ridges.size();
  const std::size_t seeds = s.seeds.size();
  switch (s.kind) {
    case ExperimentKind::error_vs_n:
      return s.models.size() * seeds * s.n_grid.size() * (2 * m + cv_cost(qa) + cv_cost(q));
    case ExperimentKind::alpha_sweep:
      return s.models.size() * seeds * s.alpha_grid.size() * m;
    case ExperimentKind::sparsity_sweep:
      return seeds * s.p_grid.size() * 3 * m;
    case ExperimentKind::kernel_sparsity_sweep:
      return seeds * s.p_grid.size() * (2 * m + cv_cost(kernel));
    case ExperimentKind::boston:
      return seeds * (3 * m + 2 * cv_cost(q) + cv_cost(qa));
    case ExperimentKind::biau_contours:
      return seeds * 2 * m;
  }
  return 0;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = "experiment,model,algorithm,n,p,seed,leaf_size,alpha,bandwidth,ridge,error\n";
  for (const ResultRow& r : rows) {
    out += r.experiment + ',' + r.model + ',' + r.algorithm + ',' + std::to_string(r.n) + ',' + std::to_string(r.p) + ',' +
           std::to_string(r.seed) + ',' + optional_cell(r.leaf_size) + ',' + optional_cell(r.alpha) + ',' +
           optional_cell(r.bandwidth) + ',' + optional_cell(r.ridge) + ',' + format_double(r.error) + '\n';
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& output_dir) {
  validate_spec(spec);
  ExperimentResult result = Runner(spec).run();
  if (output_dir.empty()) return result;

  std::filesystem::create_directories(output_dir);
  const std::string generated = timestamp();
  const auto file = [&](const std::string& suffix) { return output_dir / (spec.name + suffix); };

  write_text(file(".csv"), "# generated " + generated + " by graftforest " + kVersion + "\n" + results_csv(result.rows));
  result.files.push_back(file(".csv"));

  std::string timings = "experiment,model,algorithm,n,p,seed,seconds\n";
  for (const ResultRow& r : result.rows) {
    timings += r.experiment + ',' + r.model + ',' + r.algorithm + ',' + std::to_string(r.n) + ',' + std::to_string(r.p) +
               ',' + std::to_string(r.seed) + ',' + format_double(r.seconds) + '\n';
  }
  write_text(file("_timings.csv"), timings);
  result.files.push_back(file("_timings.csv"));

  if (result.contours) {
    const ContourGrid& c = *result.contours;
    std::string text = "x1,x2,truth,cart,grafted\n";
    const double res = static_cast<double>(c.resolution);
    for (std::size_t iy = 0; iy < c.resolution; ++iy) {
      for (std::size_t ix = 0; ix < c.resolution; ++ix) {
        const std::size_t k = iy * c.resolution + ix;
        text += format_double((static_cast<double>(ix) + 0.5) / res) + ',' + format_double((static_cast<double>(iy) + 0.5) / res) +
                ',' + format_double(c.truth[k]) + ',' + format_double(c.cart[k]) + ',' + format_double(c.grafted[k]) + '\n';
      }
    }
    write_text(file("_contours.csv"), text);
    result.files.push_back(file("_contours.csv"));
  }

  write_text(file(".svg"), chart_svg(spec, result));
  result.files.push_back(file(".svg"));

  json manifest = {
      {"tool", "graftforest"},
      {"version", kVersion},
      {"generated_at", generated},
      {"spec", spec_to_json(spec)},
      {"seeds", spec.seeds},
      {"seed_generated", spec.seed_generated},
      {"planned_trees", planned_tree_count(spec)},
      {"rows", result.rows.size()},
      {"biau_geometry_version", kBiauGeometryVersion},
      {"results_columns", {"experiment", "model", "algorithm", "n", "p", "seed", "leaf_size", "alpha", "bandwidth", "ridge", "error"}},
  };
  json files = json::array();
  for (const auto& f : result.files) files.push_back(f.filename().string());
  files.push_back(file("_manifest.json").filename().string());
  manifest["files"] = std::move(files);
  write_text(file("_manifest.json"), manifest.dump(2) + "\n");
  result.files.push_back(file("_manifest.json"));
  return result;
}

}  // namespace graftforest
