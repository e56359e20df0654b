#include "graftforest/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "graftforest/error.hpp"
#include "graftforest/random.hpp"

namespace graftforest {

namespace {

SyntheticModel make(std::string name, std::string formula, std::size_t p, double sd, std::vector<std::size_t> relevant,
                    Cef cef) {
  return SyntheticModel{std::move(name), std::move(formula), p, sd, std::move(relevant), std::move(cef)};
}

// 0/1 value of the geometric stripe pattern at local coordinate t in [0,1].
double stripe_value(double t) {
  double u = 1.0 - t;
  int k = 0;
  while (u <= 0.5 && k < kBiauStripes) {
    u *= 2.0;
    ++k;
  }
  if (k >= kBiauStripes) return 0.0;
  return k % 2 == 0 ? 1.0 : 0.0;
}

int biau_cell(double v) { return std::clamp(static_cast<int>(std::floor(3.0 * v)), 0, 2); }

std::size_t checked_power(std::size_t base, std::size_t exponent) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (total > kMaxMeshPoints / base) {
      throw ConfigError("mesh of " + std::to_string(base) + "^" + std::to_string(exponent) +
                        " points exceeds the 1e7 limit; use the low-discrepancy layout (count) instead");
    }
    total *= base;
  }
  return total;
}

// Kronecker sequence generator: alpha_j = phi_d^-(j+1), phi_d the root of x^(d+1) = x + 1.
std::vector<double> kronecker_alphas(std::size_t d) {
  double phi = 2.0;
  for (int it = 0; it < 60; ++it) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(d + 1));
  std::vector<double> alphas(d);
  for (std::size_t j = 0; j < d; ++j) alphas[j] = std::fmod(std::pow(1.0 / phi, static_cast<double>(j + 1)), 1.0);
  return alphas;
}

}  // namespace

SyntheticModel SyntheticModel::with_dimension(std::size_t new_p) const {
  for (std::size_t j : relevant) {
    if (j >= new_p) throw ConfigError("model '" + name + "' needs at least " + std::to_string(j + 1) + " features");
  }
  if (new_p == 0) throw ConfigError("dimension must be at least 1");
  SyntheticModel out = *this;
  out.p = new_p;
  return out;
}

SyntheticModel SyntheticModel::with_noise(double sd) const {
  if (!(sd >= 0.0) || !std::isfinite(sd)) throw ConfigError("noise standard deviation must be finite and >= 0");
  SyntheticModel out = *this;
  out.noise_sd = sd;
  return out;
}

Dataset sample_model(const SyntheticModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample size must be at least 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix x(n, model.p);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.row(i);
    for (double& v : row) v = unit(rng);
    y[i] = model(row) + model.noise_sd * normal(rng);
  }
  return Dataset(std::move(x), std::move(y));
}

double biau_cef(std::span<const double> x) {
  if (x.size() != 2) throw InputError("biau_cef is defined on [0,1]^2");
  const int cx = biau_cell(x[0]);
  const int cy = biau_cell(x[1]);
  const double w = 1.0 / 3.0;
  if (cx == 0 && cy == 0) return stripe_value(std::clamp(x[0] / w, 0.0, 1.0));
  if (cx == 2 && cy == 2) return stripe_value(std::clamp((x[1] - 2.0 * w) / w, 0.0, 1.0));
  if (cx == 1 && cy == 1) {
    const auto index = [&](double v) {
      return std::clamp(static_cast<int>(std::floor((v - w) / w * kBiauChecker)), 0, kBiauChecker - 1);
    };
    return (index(x[0]) + index(x[1])) % 2 == 0 ? 1.0 : 0.0;
  }
  return 0.0;
}

SyntheticModel cef_catalog(std::string_view name) {
  using S = std::span<const double>;
  static const std::map<std::string, SyntheticModel, std::less<>> catalog = [] {
    std::map<std::string, SyntheticModel, std::less<>> m;
    const auto add = [&](SyntheticModel model) { m.emplace(model.name, std::move(model)); };
    add(make("fig2", "100 sin(200 x1 x2)", 3, 1.0, {0, 1}, [](S x) { return 100.0 * std::sin(200.0 * x[0] * x[1]); }));
    add(make("fig3", "100 x1^4", 3, 1.0, {0}, [](S x) { return 100.0 * std::pow(x[0], 4); }));
    add(make("fig4", "cos(30 x3^3)", 3, 1.0, {2}, [](S x) { return std::cos(30.0 * std::pow(x[2], 3)); }));
    add(make("fig5", "cos(200 x1 + x2) + x3", 3, 1.0, {0, 1, 2},
             [](S x) { return std::cos(200.0 * x[0] + x[1]) + x[2]; }));
    add(make("fig6", "x1 x2 x3", 3, 1.0, {0, 1, 2}, [](S x) { return x[0] * x[1] * x[2]; }));
    add(make("fig7", "x1^2 + x2^3", 3, 1.0, {0, 1}, [](S x) { return x[0] * x[0] + x[1] * x[1] * x[1]; }));
    add(make("alpha_sin200", "sin(200 x1 x2)", 3, 1.0, {0, 1}, [](S x) { return std::sin(200.0 * x[0] * x[1]); }));
    add(make("alpha_x1x2", "x1 x2", 3, 1.0, {0, 1}, [](S x) { return x[0] * x[1]; }));
    add(make("alpha_x1x2_x3", "x1 x2 + x3", 3, 1.0, {0, 1, 2}, [](S x) { return x[0] * x[1] + x[2]; }));
    add(make("alpha_sin_sin", "sin(x1 x2) + sin(x3)", 3, 1.0, {0, 1, 2},
             [](S x) { return std::sin(x[0] * x[1]) + std::sin(x[2]); }));
    add(make("alpha_cos_mix", "-cos(x1^4 x2^5 x3) + 0.2 x2^3", 3, 1.0, {0, 1, 2}, [](S x) {
      return -std::cos(std::pow(x[0], 4) * std::pow(x[1], 5) * x[2]) + 0.2 * std::pow(x[1], 3);
    }));
    add(make("alpha_sin_x1x2x3", "sin(x1 x2) + x1 x2 x3", 3, 1.0, {0, 1, 2},
             [](S x) { return std::sin(x[0] * x[1]) + x[0] * x[1] * x[2]; }));
    add(make("sparse", "x1 x2", 2, std::sqrt(0.1), {0, 1}, [](S x) { return x[0] * x[1]; }));
    add(make("biau", "truncated Biau stripes and checkerboard", 2, 1.0, {0, 1}, [](S x) { return biau_cef(x); }));
    return m;
  }();
  const auto it = catalog.find(name);
  if (it == catalog.end()) throw ConfigError("unknown catalog model '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> catalog_names() {
  return {"fig2",          "fig3",          "fig4",           "fig5",          "fig6",
          "fig7",          "alpha_sin200",  "alpha_x1x2",     "alpha_x1x2_x3", "alpha_sin_sin",
          "alpha_cos_mix", "alpha_sin_x1x2x3", "sparse",      "biau"};
}

std::vector<std::string> alpha_study_names() {
  return {"alpha_sin200", "alpha_x1x2", "alpha_x1x2_x3", "alpha_sin_sin", "alpha_cos_mix", "alpha_sin_x1x2x3"};
}

RowMatrix build_mesh(const MeshSpec& spec) {
  if (spec.p == 0) throw ConfigError("mesh dimension must be at least 1");
  std::vector<double> lower = spec.lower.empty() ? std::vector<double>(spec.p, 0.0) : spec.lower;
  std::vector<double> upper = spec.upper.empty() ? std::vector<double>(spec.p, 1.0) : spec.upper;
  if (lower.size() != spec.p || upper.size() != spec.p) throw ConfigError("mesh region has the wrong dimension");
  for (std::size_t j = 0; j < spec.p; ++j) {
    if (!(lower[j] < upper[j])) throw ConfigError("mesh region must have lower < upper on every axis");
  }

  const bool low_discrepancy = spec.grid_dims.empty() && spec.p > 3;
  if (low_discrepancy) {
    if (spec.count == 0) throw ConfigError("meshes with p > 3 need an explicit point count");
    if (spec.count > kMaxMeshPoints) throw ConfigError("mesh point count exceeds the 1e7 limit");
    Rng rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> shift(spec.p);
    for (double& s : shift) s = unit(rng);
    const auto alphas = kronecker_alphas(spec.p);
    RowMatrix out(spec.count, spec.p);
    for (std::size_t i = 0; i < spec.count; ++i) {
      for (std::size_t j = 0; j < spec.p; ++j) {
        const double t = std::fmod(shift[j] + static_cast<double>(i + 1) * alphas[j], 1.0);
        out(i, j) = lower[j] + t * (upper[j] - lower[j]);
      }
    }
    return out;
  }

  if (spec.resolution < 2) throw ConfigError("mesh resolution must be at least 2 per axis");
  std::vector<std::size_t> dims = spec.grid_dims;
  if (dims.empty()) {
    dims.resize(spec.p);
    for (std::size_t j = 0; j < spec.p; ++j) dims[j] = j;
  }
  for (std::size_t j : dims) {
    if (j >= spec.p) throw ConfigError("mesh grid dimension out of range");
  }
  const std::size_t total = checked_power(spec.resolution, dims.size());
  RowMatrix out(total, spec.p);
  std::vector<std::size_t> digits(dims.size(), 0);
  const double res = static_cast<double>(spec.resolution);
  for (std::size_t i = 0; i < total; ++i) {
    auto row = out.row(i);
    std::fill(row.begin(), row.end(), spec.fill);
    // Last grid dimension varies fastest.
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const std::size_t j = dims[k];
      row[j] = lower[j] + (static_cast<double>(digits[k]) + 0.5) / res * (upper[j] - lower[j]);
    }
    for (std::size_t k = dims.size(); k-- > 0;) {
      if (++digits[k] < spec.resolution) break;
      digits[k] = 0;
    }
  }
  return out;
}

}  // namespace graftforest
