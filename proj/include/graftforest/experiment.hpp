#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graftforest/dataset.hpp"

namespace graftforest {

inline constexpr const char* kVersion = "1.0.0";

enum class ExperimentKind { error_vs_n, alpha_sweep, sparsity_sweep, kernel_sparsity_sweep, boston, biau_contours };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

struct CVSettings {
  std::size_t folds = 50;
  /// Candidates evaluated per search; 0 means the whole grid.
  std::size_t budget = 0;
  /// Trees per CV forest; 0 means the experiment's M.
  std::size_t trees = 0;
  std::vector<double> leaf_sizes{1, 2, 3, 5, 8, 10, 15, 20};
  std::vector<double> alphas{1, 2, 4, 8, 16, 32};
  std::vector<double> bandwidths{0.05, 0.1, 0.2, 0.5, 1, 2, 5};
  std::vector<double> ridges{1e-3, 1e-2, 1e-1};
};

struct ExperimentSpec {
  std::string name;
  ExperimentKind kind = ExperimentKind::error_vs_n;
  std::vector<std::string> models;
  /// error_vs_n sample sizes.
  std::vector<std::size_t> n_grid;
  /// Dimensions of the sparsity sweeps.
  std::vector<std::size_t> p_grid;
  /// alpha values of the alpha sweep.
  std::vector<double> alpha_grid;
  /// Sample size of the fixed-n experiments.
  std::size_t n = 1000;
  /// M
  std::size_t n_trees = 100;
  /// Fixed a_n; unset means ceil(n/1.3).
  std::optional<std::size_t> resample_size;
  /// Unset means the per-algorithm default.
  std::optional<ResampleMode> resample_mode;
  /// q_n and alpha_n of grafted and centered forests when not cross-validated.
  std::size_t leaf_size = 10;
  double alpha = 10.0;
  /// q_n of the Breiman forest when not cross-validated.
  std::size_t cart_leaf_size = 1;
  /// Leaf kernel ridge and plain kernel ridge parameters when not cross-validated.
  double bandwidth = 0.2;
  double ridge = 1e-2;
  /// nu; unset means all features.
  std::optional<std::size_t> mtry;
  bool cross_validate = false;
  CVSettings cv;
  /// Grid points per axis (p <= 3, sparsity subspace, Biau centre cell).
  std::size_t mesh_resolution = 20;
  /// Low-discrepancy mesh size for p > 3.
  std::size_t mesh_count = 4096;
  /// Biau contour grid per axis.
  std::size_t contour_resolution = 100;
  std::vector<std::uint64_t> seeds{1};
  bool seed_generated = false;
  /// Boston CSV.
  std::string data_path;
  double test_fraction = 102.0 / 506.0;
  unsigned threads = 0;
  /// Resource guard on the total number of trees grown, CV included.
  std::size_t max_trees = 20'000'000;
};

/// Named protocols: boston, fig2..fig7, fig8, fig9, fig10, sparsity, kernel_sparsity, biau.
ExperimentSpec experiment_preset(std::string_view name);
std::vector<std::string> preset_names();

/// Reads a JSON spec file. Keys mirror the ExperimentSpec fields; "preset" picks a base.
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

void validate_spec(const ExperimentSpec& spec);
/// Trees the spec would grow, cross-validation included.
std::size_t planned_tree_count(const ExperimentSpec& spec);

/// Seeds of one experiment cell, derived from the master seed, the model name and a size key (n or p).
struct RunSeeds {
  std::uint64_t data = 0;
  std::uint64_t forest = 0;
  std::uint64_t cv = 0;
};
RunSeeds run_seeds(std::uint64_t seed, std::string_view model, std::size_t size_key);

struct ResultRow {
  std::string experiment;
  std::string model;
  std::string algorithm;
  std::size_t n = 0;
  std::size_t p = 0;
  std::uint64_t seed = 0;
  std::optional<double> leaf_size;
  std::optional<double> alpha;
  std::optional<double> bandwidth;
  std::optional<double> ridge;
  double error = 0.0;
  double seconds = 0.0;
};

/// One panel grid of the Biau experiment: values over a res x res cell-centre grid.
struct ContourGrid {
  std::size_t resolution = 0;
  std::vector<double> truth;
  std::vector<double> cart;
  std::vector<double> grafted;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::optional<ContourGrid> contours;
  std::vector<std::filesystem::path> files;
};

/// Runs the protocol. With a non-empty `output_dir`, writes <name>.csv,
/// <name>_timings.csv, <name>_manifest.json and <name>.svg (plus
/// <name>_contours.csv for the Biau experiment).
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& output_dir = {});

/// Results table in the fixed column order, without the timestamp line.
std::string results_csv(const std::vector<ResultRow>& rows);

}  // namespace graftforest
