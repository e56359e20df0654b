// Acceptance run: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "graftforest/cart.hpp"
#include "graftforest/csv.hpp"
#include "graftforest/error.hpp"
#include "graftforest/evaluation.hpp"
#include "graftforest/experiment.hpp"
#include "graftforest/forest.hpp"
#include "graftforest/synthetic.hpp"
#include "oracles.hpp"

#ifndef GRAFTFOREST_BOSTON_CSV
#define GRAFTFOREST_BOSTON_CSV ""
#endif
#ifndef GRAFTFOREST_UNIT_TESTS
#define GRAFTFOREST_UNIT_TESTS ""
#endif

using namespace graftforest;

namespace {

constexpr int kSkipCode = 77;

// Pinned tolerances and thresholds.
constexpr double kGainTolerance = 1e-10;
constexpr double kSplitTieTolerance = 1e-12;
constexpr double kWeightTolerance = 1e-10;
constexpr double kSideLengthSe = 3.0;
constexpr double kConsistencyRatio = 0.5;
constexpr double kSparsityGraftedGrowth = 1.5;
constexpr double kSparsityCenteredGrowth = 3.0;
constexpr double kKernelGrowth = 1.5;
constexpr double kKernelVsPlain = 0.5;
constexpr double kBostonCenteredFactor = 2.0;
constexpr double kBostonGraftedGap = 0.35;
constexpr double kBostonBand = 0.30;
constexpr double kBostonCart = 10.46;
constexpr double kBostonGrafted = 11.23;
constexpr double kBostonCentered = 26.45;
constexpr int kBiauWinsNeeded = 4;

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Median error over seeds for each (model, algorithm, n or p) key.
std::map<std::string, double> median_errors(const std::vector<ResultRow>& rows, bool key_by_p) {
  std::map<std::string, std::vector<double>> groups;
  for (const ResultRow& r : rows) {
    groups[r.model + "/" + r.algorithm + "/" + std::to_string(key_by_p ? r.p : r.n)].push_back(r.error);
  }
  std::map<std::string, double> out;
  for (const auto& [k, v] : groups) out[k] = median(v);
  return out;
}

Outcome verdict(bool ok, std::string detail) { return Outcome{ok ? Status::pass : Status::fail, std::move(detail)}; }

Outcome cart_identity() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  std::size_t checked = 0;
  while (checked < 1000) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 200)(rng);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const Dataset data = oracle::uniform_dataset(n, p, rng());
    const NodeSample node = NodeSample::from(data, oracle::random_members(n, 4, rng()));
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, p - 1)(rng);
    const auto thresholds = candidate_thresholds(data, node, j);
    if (thresholds.empty()) continue;
    const double z = thresholds[std::uniform_int_distribution<std::size_t>(0, thresholds.size() - 1)(rng)];
    const double product = impurity_gain(data, node, j, z).gain;
    worst = std::max(worst, std::abs(product - variance_decrease_gain(data, node, j, z)));
    worst = std::max(worst, std::abs(product - oracle::variance_decrease(data, node.members, j, z)));
    ++checked;
  }
  return verdict(worst <= kGainTolerance, "1000 nodes, max |product - variance decrease| = " + fmt(worst));
}

Outcome split_oracle() {
  std::mt19937_64 rng(77);
  std::size_t mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 100)(rng);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    const std::size_t min_leaf = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    const Dataset data = oracle::uniform_dataset(n, p, rng(), 0.3);
    const NodeSample node = NodeSample::from(data, oracle::random_members(n, 3, rng()));
    std::vector<std::size_t> features(p);
    for (std::size_t j = 0; j < p; ++j) features[j] = j;
    const auto got = best_split(data, node, features, min_leaf);
    const auto all = oracle::all_splits(data, node.members, min_leaf);
    double best = 0.0;
    for (const auto& c : all) best = std::max(best, c.gain);
    const oracle::Candidate* want = nullptr;
    for (const auto& c : all) {
      if (best > 0.0 && c.gain >= best - kSplitTieTolerance) {
        want = &c;
        break;
      }
    }
    if (!want) {
      if (got) ++mismatches;
      continue;
    }
    if (!got || got->feature != want->feature || std::abs(got->threshold - want->threshold) > 1e-14 ||
        std::abs(got->gain - want->gain) > kGainTolerance) {
      ++mismatches;
    }
  }
  return verdict(mismatches == 0, "200 nodes, " + std::to_string(mismatches) + " disagreements with brute force");
}

Outcome weight_representation() {
  double worst_sum = 0.0;
  double worst_pred = 0.0;
  const Algorithm algorithms[] = {Algorithm::cart, Algorithm::centered, Algorithm::grafted};
  for (int f = 0; f < 10; ++f) {
    const Dataset data = oracle::uniform_dataset(300, 3, 100 + f);
    GrowthConfig c;
    c.algorithm = algorithms[f % 3];
    c.n_trees = 20;
    c.leaf_size = 1 + f % 4;
    c.alpha = 4;
    c.seed = 500 + f;
    c.resample_mode = f % 2 ? ResampleMode::with_replacement : ResampleMode::without_replacement;
    const ForestModel forest = train_forest(data, c);
    const RowMatrix probes = oracle::uniform_points(100, 3, 900 + f);
    for (std::size_t k = 0; k < probes.rows(); ++k) {
      const auto w = forest_weights(forest, probes.row(k));
      double sum = 0.0;
      double weighted = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        sum += w[i];
        weighted += w[i] * data.y(i);
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      worst_pred = std::max(worst_pred, std::abs(weighted - predict_forest(forest, probes.row(k))));
    }
  }
  return verdict(worst_sum <= kWeightTolerance && worst_pred <= kWeightTolerance,
                 "max |sum W - 1| = " + fmt(worst_sum) + ", max |sum W Y - prediction| = " + fmt(worst_pred));
}

Outcome degeneracies() {
  std::size_t differing = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const Dataset data = oracle::uniform_dataset(600, 3, seed);
    const RowMatrix probes = oracle::uniform_points(1000, 3, 40 + seed);
    GrowthConfig base;
    base.n_trees = 10;
    base.seed = seed * 11;
    base.resample_mode = ResampleMode::without_replacement;
    base.resample_size = 450;

    GrowthConfig cart = base;
    cart.algorithm = Algorithm::cart;
    cart.leaf_size = 4;
    GrowthConfig grafted = cart;
    grafted.algorithm = Algorithm::grafted;
    grafted.alpha = 1.0;
    const auto a = predict_forest(train_forest(data, cart), probes);
    const auto b = predict_forest(train_forest(data, grafted), probes);

    GrowthConfig centered = base;
    centered.algorithm = Algorithm::centered;
    centered.leaf_size = 5;
    GrowthConfig wide = centered;
    wide.algorithm = Algorithm::grafted;
    wide.alpha = 100.0;
    const auto c = predict_forest(train_forest(data, centered), probes);
    const auto d = predict_forest(train_forest(data, wide), probes);
    for (std::size_t k = 0; k < probes.rows(); ++k) {
      if (a[k] != b[k]) ++differing;
      if (c[k] != d[k]) ++differing;
    }
  }
  return verdict(differing == 0, "3 seeds x 1000 probes x 2 equivalences, " + std::to_string(differing) + " differing predictions");
}

Outcome side_lengths() {
  std::string detail;
  bool ok = true;
  for (std::size_t p : {2, 3, 5}) {
    for (double alpha : {4.0, 16.0}) {
      const Dataset data = oracle::uniform_dataset(5000, p, 10 * p + static_cast<std::size_t>(alpha));
      GrowthConfig c;
      c.algorithm = Algorithm::grafted;
      c.n_trees = 50;
      c.leaf_size = 5;
      c.alpha = alpha;
      c.seed = 3;
      const SideLengthStats s = side_length_stats(train_forest(data, c), oracle::uniform_points(1000, p, 7));
      const double bound = side_length_bound(p, alpha);
      for (std::size_t j = 0; j < p; ++j) {
        if (s.mean_sq[j] > bound + kSideLengthSe * s.se_sq[j]) ok = false;
      }
      detail += " p=" + std::to_string(p) + ",a=" + fmt(alpha) + ": max l^2=" +
                fmt(*std::max_element(s.mean_sq.begin(), s.mean_sq.end())) + " bound=" + fmt(bound) + ";";
    }
  }
  return verdict(ok, detail);
}

Outcome consistency() {
  bool ok = true;
  std::string detail;
  for (const char* model : {"fig6", "fig7"}) {
    ExperimentSpec s = experiment_preset(model);
    s.n_grid = {500, 8000};
    s.seeds = {1, 2, 3, 4, 5};
    s.cv.folds = 5;
    s.cv.trees = 20;
    s.cv.leaf_sizes = {5, 10, 20, 50, 100, 200};
    s.cv.alphas = {1, 2, 4, 8, 16};
    const auto m = median_errors(run_experiment(s).rows, false);
    for (const char* algorithm : {"grafted", "cart"}) {
      const std::string key = std::string(model) + "/" + algorithm + "/";
      const double small = m.at(key + "500");
      const double large = m.at(key + "8000");
      ok = ok && large < kConsistencyRatio * small;
      detail += " " + std::string(model) + " " + algorithm + ": " + fmt(small) + " -> " + fmt(large) + ";";
    }
  }
  return verdict(ok, detail);
}

Outcome alpha_shape() {
  ExperimentSpec s = experiment_preset("fig8");
  s.models = {"alpha_x1x2"};
  s.alpha_grid = {2, 4, 8, 64};
  s.n_trees = 50;
  s.seeds = {1, 2, 3};
  std::map<double, std::vector<double>> by_alpha;
  for (const ResultRow& r : run_experiment(s).rows) by_alpha[*r.alpha].push_back(r.error);
  const double best_small = std::min({median(by_alpha[2]), median(by_alpha[4]), median(by_alpha[8])});
  const double at64 = median(by_alpha[64]);
  return verdict(best_small <= at64, "median error a=2: " + fmt(median(by_alpha[2])) + ", a=4: " + fmt(median(by_alpha[4])) +
                                         ", a=8: " + fmt(median(by_alpha[8])) + ", a=64: " + fmt(at64));
}

Outcome sparsity() {
  ExperimentSpec s = experiment_preset("sparsity");
  s.p_grid = {2, 27, 52, 102};
  s.seeds = {1, 2, 3, 4, 5};
  const auto m = median_errors(run_experiment(s).rows, true);
  const double g2 = m.at("sparse/grafted/2");
  const double g102 = m.at("sparse/grafted/102");
  const double c2 = m.at("sparse/centered/2");
  const double c102 = m.at("sparse/centered/102");
  const double b102 = m.at("sparse/cart/102");
  const bool a = g102 <= kSparsityGraftedGrowth * g2;
  const bool b = c102 >= kSparsityCenteredGrowth * c2;
  const bool c = g102 <= b102;
  return verdict(a && b && c, "grafted " + fmt(g2) + " -> " + fmt(g102) + (a ? " ok" : " FAIL") + "; centered " + fmt(c2) +
                                  " -> " + fmt(c102) + (b ? " ok" : " FAIL") + "; Breiman at p=102 " + fmt(b102) +
                                  (c ? " ok" : " FAIL"));
}

Outcome kernel_sparsity() {
  ExperimentSpec s = experiment_preset("kernel_sparsity");
  s.p_grid = {2, 102};
  s.seeds = {1, 2, 3, 4, 5};
  const auto m = median_errors(run_experiment(s).rows, true);
  const double g2 = m.at("sparse/grafted_kernel_ridge/2");
  const double g102 = m.at("sparse/grafted_kernel_ridge/102");
  const double k102 = m.at("sparse/kernel_ridge/102");
  const bool a = g102 <= kKernelGrowth * g2;
  const bool b = g102 <= kKernelVsPlain * k102;
  return verdict(a && b, "grafted kernel ridge " + fmt(g2) + " -> " + fmt(g102) + (a ? " ok" : " FAIL") +
                             "; plain kernel ridge at p=102 " + fmt(k102) + (b ? " ok" : " FAIL"));
}

Outcome boston() {
  const char* env = std::getenv("GRAFTFOREST_BOSTON_CSV");
  const std::string path = env && *env ? env : GRAFTFOREST_BOSTON_CSV;
  if (path.empty() || !std::filesystem::exists(path)) {
    return Outcome{Status::skip, "Boston CSV not found (set GRAFTFOREST_BOSTON_CSV)"};
  }
  ExperimentSpec s = experiment_preset("boston");
  s.data_path = path;
  s.seeds = {1};
  double cart = 0, grafted = 0, centered = 0;
  for (const ResultRow& r : run_experiment(s).rows) {
    if (r.algorithm == "cart") cart = r.error;
    if (r.algorithm == "grafted") grafted = r.error;
    if (r.algorithm == "centered") centered = r.error;
  }
  const auto within = [](double v, double target) { return std::abs(v - target) <= kBostonBand * target; };
  const bool order = centered >= kBostonCenteredFactor * grafted;
  const bool gap = std::abs(grafted - cart) <= kBostonGraftedGap * cart;
  const bool bands = within(cart, kBostonCart) && within(grafted, kBostonGrafted) && within(centered, kBostonCentered);
  return verdict(order && gap && bands, "test MSE Breiman " + fmt(cart) + ", grafted " + fmt(grafted) + ", centered " +
                                            fmt(centered) + "; ordering " + (order ? "ok" : "FAIL") + ", gap " +
                                            (gap ? "ok" : "FAIL") + ", +-30% bands " + (bands ? "ok" : "FAIL"));
}

Outcome biau() {
  ExperimentSpec s = experiment_preset("biau");
  s.seeds = {1, 2, 3, 4, 5};
  s.contour_resolution = 0;
  std::map<std::uint64_t, double> cart;
  std::map<std::uint64_t, double> grafted;
  for (const ResultRow& r : run_experiment(s).rows) (r.algorithm == "cart" ? cart : grafted)[r.seed] = r.error;
  int wins = 0;
  std::string detail;
  for (const auto& [seed, e] : grafted) {
    if (e < cart[seed]) ++wins;
    detail += " seed " + std::to_string(seed) + ": " + fmt(e) + " vs " + fmt(cart[seed]) + ";";
  }
  return verdict(wins >= kBiauWinsNeeded, "grafted beats Breiman on " + std::to_string(wins) + "/5 seeds;" + detail);
}

Outcome property_suite() {
  const std::string binary = GRAFTFOREST_UNIT_TESTS;
  if (binary.empty() || !std::filesystem::exists(binary)) return Outcome{Status::fail, "unit test binary not found"};
  const int code = std::system((binary + " --minimal > /dev/null 2>&1").c_str());
  return verdict(code == 0, "unit and property suites exit code " + std::to_string(code));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graftforest acceptance run"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria (1-12)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"CART criterion identity", cart_identity},
      {"split oracle equivalence", split_oracle},
      {"local averaging weights", weight_representation},
      {"degeneracy equivalences", degeneracies},
      {"side-length bound", side_lengths},
      {"consistency trend", consistency},
      {"alpha sweep shape", alpha_shape},
      {"sparsity sweep", sparsity},
      {"kernel grafting sweep", kernel_sparsity},
      {"Boston protocol", boston},
      {"Biau CEF", biau},
      {"property suite", property_suite},
  };

  bool failed = false;
  bool skipped = false;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = Outcome{Status::fail, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* label = o.status == Status::pass ? "PASS" : o.status == Status::skip ? "SKIP" : "FAIL";
    std::cout << "criterion " << id << " (" << criteria[k].first << "): " << label << " - " << o.detail << " ["
              << fmt(seconds) << " s]" << std::endl;
    failed = failed || o.status == Status::fail;
    skipped = skipped || o.status == Status::skip;
  }
  if (failed) return 1;
  return skipped ? kSkipCode : 0;
}
