#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graftforest/dataset.hpp"

namespace graftforest {

using Cef = std::function<double(std::span<const double>)>;

/// Y = m(X) + sigma * Z with X uniform on [0,1]^p and Z standard normal.
struct SyntheticModel {
  std::string name;
  std::string formula;
  std::size_t p = 1;
  double noise_sd = 1.0;
  /// Features m actually depends on (metadata).
  std::vector<std::size_t> relevant;
  Cef cef;

  double operator()(std::span<const double> x) const { return cef(x); }

  /// Same CEF with irrelevant features appended (or dropped) up to dimension p.
  SyntheticModel with_dimension(std::size_t p) const;
  SyntheticModel with_noise(double sd) const;
};

Dataset sample_model(const SyntheticModel& model, std::size_t n, std::uint64_t seed);

/// Truncated Biau construction on [0,1]^2 (a 3x3 grid of cells of width 1/3):
/// lower-left cell: vertical stripes along x1 at 1 - 2^-k of the cell width,
/// value 1 on even k; upper-right cell: the same along x2; centre cell: a
/// kBiauChecker x kBiauChecker checkerboard, value 1 where (i + j) is even.
/// Stripes past kBiauStripes are 0, as is every other cell.
inline constexpr int kBiauStripes = 30;
inline constexpr int kBiauChecker = 4;
inline constexpr int kBiauGeometryVersion = 1;
double biau_cef(std::span<const double> x);

/// Lower/upper corner of the centre cell of the Biau construction.
inline constexpr double kBiauCentreLower = 1.0 / 3.0;
inline constexpr double kBiauCentreUpper = 2.0 / 3.0;

/// Named experiment models: fig2..fig7, the alpha-study functions, sparse, biau.
SyntheticModel cef_catalog(std::string_view name);
std::vector<std::string> catalog_names();
/// The six functions of the alpha study, in catalog order.
std::vector<std::string> alpha_study_names();

/// Evaluation points. Three layouts:
///  - full grid of cell centres at `resolution` per axis (p <= 3, `grid_dims` empty);
///  - `count` points of a shifted Kronecker low-discrepancy sequence (p > 3);
///  - grid over `grid_dims` only, every other coordinate fixed at `fill`.
/// The grid layouts cover [lower, upper] (default the unit cube).
struct MeshSpec {
  std::size_t p = 1;
  std::size_t resolution = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> grid_dims;
  double fill = 0.5;
  std::vector<double> lower;
  std::vector<double> upper;
};

inline constexpr std::size_t kMaxMeshPoints = 10'000'000;

RowMatrix build_mesh(const MeshSpec& spec);

}  // namespace graftforest
