#include "facetproc/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "facetproc/geometry.hpp"
#include "facetproc/ustats.hpp"

namespace facetproc {

IntensityFunction IntensityFunction::constant(double level, int d, double b) {
  IntensityFunction chi;
  chi.name = "constant";
  chi.bound = level;
  chi.total = level * power_by_multiplication(b, d);
  return chi;
}

IntensityFunction IntensityFunction::first_coordinate(int d, double b) {
  IntensityFunction chi;
  chi.name = "first_coordinate";
  chi.value = [](std::span<const double> z) { return z[0]; };
  chi.bound = b;
  chi.total = 0.5 * power_by_multiplication(b, d + 1);
  return chi;
}

void ModelConfig::validate() const {
  if (d < 2 || d > kMaxDim) throw std::invalid_argument("model: d must be in [2, 8]");
  if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("model: b must be positive");
  if (!(a >= 1.0) || !std::isfinite(a)) throw std::invalid_argument("model: a must be >= 1");
  if (nu.size() != static_cast<std::size_t>(d)) throw std::invalid_argument("model: nu must have d entries");
  for (std::size_t i = 1; i < nu.size(); ++i)
    if (!(nu[i] <= 0.0)) throw std::invalid_argument("model: nu_i must be <= 0 for i >= 2");
  if (!std::isfinite(nu[0])) throw std::invalid_argument("model: nu_1 must be finite");
  if (!(chi.total > 0.0) || !(chi.bound > 0.0)) throw std::invalid_argument("model: chi must have positive total and bound");
}

ModelConfig make_config(int d, double b, double a, std::vector<double> nu) {
  ModelConfig config;
  config.d = d;
  config.b = b;
  config.a = a;
  config.chi = IntensityFunction::constant(1.0, d, b);
  config.nu = nu.empty() ? std::vector<double>(static_cast<std::size_t>(d), 0.0) : std::move(nu);
  config.validate();
  return config;
}

ModelConfig with_submodel(ModelConfig config, const SubmodelSpec& sub) {
  if (sub.c < 2 || sub.c > config.d) throw std::invalid_argument("submodel: c must be in [2, d]");
  if (!(sub.nu_c < 0.0)) throw std::invalid_argument("submodel: nu_c must be negative");
  config.nu.assign(static_cast<std::size_t>(config.d), 0.0);
  config.nu[static_cast<std::size_t>(sub.c - 1)] = sub.nu_c;
  config.validate();
  return config;
}

std::optional<SubmodelSpec> submodel_of(const ModelConfig& config) {
  if (config.nu.empty() || config.nu[0] != 0.0) return std::nullopt;
  std::optional<SubmodelSpec> found;
  for (int j = 2; j <= config.d; ++j) {
    const double v = config.nu_of(j);
    if (v == 0.0) continue;
    if (found) return std::nullopt;
    found = SubmodelSpec{j, v};
  }
  return found;
}

double lambda_total(const ModelConfig& config) { return config.chi.total; }

double base_total(const ModelConfig& config, BaseMeasure base) {
  if (base.orientations < 1 || base.orientations > config.d)
    throw std::invalid_argument("base measure: orientation count out of range");
  return config.chi.total * base.orientations / config.d;
}

Facet sample_center(Rng& rng, const ModelConfig& config, int axis) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Facet f;
  f.dim = config.d;
  f.axis = axis;
  if (config.chi.is_constant()) {
    for (int m = 0; m < config.d; ++m) f.center[m] = config.b * unif(rng);
    return f;
  }
  constexpr int kMaxTries = 1 << 22;
  for (int t = 0; t < kMaxTries; ++t) {
    for (int m = 0; m < config.d; ++m) f.center[m] = config.b * unif(rng);
    const double v = config.chi(std::span<const double>(f.center.data(), static_cast<std::size_t>(config.d)));
    if (v > config.chi.bound)
      throw std::runtime_error("sample_facet: intensity exceeds its declared bound");
    if (unif(rng) * config.chi.bound < v) return f;
  }
  throw std::runtime_error("sample_facet: rejection sampler did not terminate");
}

Facet sample_facet(Rng& rng, const ModelConfig& config, BaseMeasure base) {
  std::uniform_int_distribution<int> orient(0, base.orientations - 1);
  const int axis = orient(rng);
  return sample_center(rng, config, axis);
}

Facet sample_facet(Rng& rng, const ModelConfig& config) {
  return sample_facet(rng, config, BaseMeasure::full(config));
}

FacetPattern sample_poisson(Rng& rng, const ModelConfig& config, BaseMeasure base) {
  std::poisson_distribution<long> count(config.a * base_total(config, base));
  const long n = count(rng);
  FacetPattern x;
  x.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) x.push_back(sample_facet(rng, config, base));
  return x;
}

FacetPattern sample_poisson(Rng& rng, const ModelConfig& config) {
  return sample_poisson(rng, config, BaseMeasure::full(config));
}

double log_density_unnormalized(const FacetPattern& pattern, const ModelConfig& config) {
  const UStatVector g = compute_G(pattern, config);
  double s = 0.0;
  for (int j = 1; j <= config.d; ++j)
    if (config.nu_of(j) != 0.0) s += config.nu_of(j) * g.G(j);
  return s;
}

double conditional_intensity(const FacetPattern& pattern, std::span<const Facet> new_facets,
                             const ModelConfig& config) {
  ClassedPattern x(pattern, config.d);
  double log_ratio = 0.0;
  for (const Facet& u : new_facets) {
    log_ratio += log_papangelou(x, u, config);
    x.insert(u);
  }
  return std::exp(log_ratio);
}

}  // namespace facetproc
