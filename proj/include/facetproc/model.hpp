#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facetproc/types.hpp"

namespace facetproc {

/// Bounded intensity of facet centres on [0,b]^d with known sup and integral.
struct IntensityFunction {
  std::string name = "constant";
  /// Empty for the constant function `bound`.
  std::function<double(std::span<const double>)> value;
  double bound = 1.0;
  double total = 1.0;

  bool is_constant() const { return !value; }
  double operator()(std::span<const double> z) const { return value ? value(z) : bound; }

  static IntensityFunction constant(double level, int d, double b);
  /// chi(z) = z_1; bound b, integral b^{d+1}/2.
  static IntensityFunction first_coordinate(int d, double b);
};

struct ModelConfig {
  int d = 2;
  double b = 1.0;
  double a = 1.0;
  IntensityFunction chi;
  /// nu[i] multiplies G_{i+1}; nu[i] <= 0 for i >= 1.
  std::vector<double> nu;

  void validate() const;
  double nu_of(int j) const { return nu[static_cast<std::size_t>(j - 1)]; }
};

/// chi == 1 and nu == 0 unless given.
ModelConfig make_config(int d, double b, double a, std::vector<double> nu = {});

/// Submodel of order c: only nu_c < 0 is active.
struct SubmodelSpec {
  int c = 2;
  double nu_c = -1.0;
};

ModelConfig with_submodel(ModelConfig config, const SubmodelSpec& sub);
/// The active submodel, if exactly one nu_j (j >= 2) is non-zero and nu_1 == 0.
std::optional<SubmodelSpec> submodel_of(const ModelConfig& config);

/// Restriction of lambda to the first `orientations` normal directions
/// (orientations == d is lambda itself; c-1 gives lambda_{c-1}).
struct BaseMeasure {
  int orientations = 0;

  static BaseMeasure full(const ModelConfig& config) { return {config.d}; }
  static BaseMeasure restricted(int c) { return {c - 1}; }
};

double lambda_total(const ModelConfig& config);
double base_total(const ModelConfig& config, BaseMeasure base);

/// Facet from lambda / lambda(Y) (or base / base(Y)).
Facet sample_facet(Rng& rng, const ModelConfig& config);
Facet sample_facet(Rng& rng, const ModelConfig& config, BaseMeasure base);
/// Centre with density chi / T; orientation left to the caller.
Facet sample_center(Rng& rng, const ModelConfig& config, int axis);

/// Poisson process with intensity measure a * lambda (or a * base).
FacetPattern sample_poisson(Rng& rng, const ModelConfig& config);
FacetPattern sample_poisson(Rng& rng, const ModelConfig& config, BaseMeasure base);

/// sum_i nu_i G_i(x), i.e. log p(x) + const.
double log_density_unnormalized(const FacetPattern& pattern, const ModelConfig& config);

/// lambda*_n(new; pattern) = p(pattern ∪ new) / p(pattern).
double conditional_intensity(const FacetPattern& pattern, std::span<const Facet> new_facets,
                             const ModelConfig& config);

}  // namespace facetproc
