#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "facetproc/classed_pattern.hpp"
#include "facetproc/model.hpp"
#include "facetproc/ustats.hpp"

namespace facetproc {

struct MoveProbabilities {
  double birth = 1.0 / 3.0;
  double death = 1.0 / 3.0;
  double move = 1.0 / 3.0;
};

struct ChainConfig {
  std::int64_t n_steps = 0;
  std::int64_t burn_in = 0;
  std::int64_t thin = 1;
  MoveProbabilities moves;
  std::uint64_t seed = 0;
  bool init_from_poisson = false;
  bool record_ustats = true;
  bool record_patterns = false;

  void validate() const;
  std::int64_t sample_count() const { return (n_steps - burn_in) / thin; }
};

/// burn_in = 10 a lambda(Y), thin = max(1, a lambda(Y) / 2), and enough steps
/// for `samples` recorded states.
ChainConfig default_chain_config(const ModelConfig& config, std::int64_t samples, std::uint64_t seed);

enum class MoveKind { birth = 0, death = 1, move = 2 };

struct AcceptanceStats {
  std::array<std::int64_t, 3> proposed{};
  std::array<std::int64_t, 3> accepted{};

  double rate(MoveKind k) const;
};

struct ChainOutput {
  int dim = 0;
  std::vector<UStatVector> samples;
  std::vector<OrientationCounts> thetas;
  std::vector<FacetPattern> patterns;
  AcceptanceStats acceptance;
  /// ESS of each G_j series (index j-1), or of theta_i when G is not recorded.
  std::array<double, kMaxDim> ess{};
  std::array<double, kMaxDim> ess_theta{};
  std::vector<std::string> warnings;

  std::vector<double> G_series(int j) const;
  std::vector<double> theta_series(int axis) const;
};

/// Birth-death-move Metropolis-Hastings chain for the density exp(sum nu_j G_j)
/// with respect to the Poisson process with intensity a lambda.
class BdmSampler {
 public:
  explicit BdmSampler(ModelConfig config, MoveProbabilities moves = {});

  void reset(const FacetPattern& init);
  /// One transition; returns the kind of move proposed.
  MoveKind step(Rng& rng);

  const ClassedPattern& state() const { return state_; }
  const ModelConfig& config() const { return config_; }
  const AcceptanceStats& acceptance() const { return stats_; }

  /// log of the birth acceptance ratio for adding u to x (before the min with 0).
  double birth_log_ratio(const ClassedPattern& x, const Facet& u) const;
  /// log of the death acceptance ratio for removing u, given x \ u and n = |x|.
  double death_log_ratio(const ClassedPattern& x_without_u, const Facet& u, std::size_t n) const;
  /// log ratio for replacing u by v, given x \ u.
  double move_log_ratio(const ClassedPattern& x_without_u, const Facet& u, const Facet& v) const;

 private:
  ModelConfig config_;
  MoveProbabilities moves_;
  double mass_;  // a * lambda(Y)
  ClassedPattern state_;
  AcceptanceStats stats_;
};

/// One transition from `state`.
FacetPattern bdm_step(const FacetPattern& state, const ModelConfig& config, Rng& rng);

/// Deterministic given chain.seed.
ChainOutput run_chain(const ModelConfig& config, const ChainConfig& chain);
ChainOutput run_chain(const ModelConfig& config, const SubmodelSpec& sub, const ChainConfig& chain);

/// Thinned theta samples of the full-dimensional submodel (config must have c = d).
std::vector<OrientationCounts> sample_theta_chain(const ModelConfig& config, const ChainConfig& chain,
                                                  ChainOutput* diagnostics = nullptr);

}  // namespace facetproc
