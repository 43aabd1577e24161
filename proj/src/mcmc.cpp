#include "facetproc/mcmc.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "facetproc/stats.hpp"

namespace facetproc {

void ChainConfig::validate() const {
  if (n_steps <= 0) throw std::invalid_argument("chain: n_steps must be positive");
  if (burn_in < 0 || burn_in >= n_steps) throw std::invalid_argument("chain: need 0 <= burn_in < n_steps");
  if (thin < 1) throw std::invalid_argument("chain: thin must be positive");
  const MoveProbabilities& p = moves;
  if (p.birth < 0 || p.death < 0 || p.move < 0) throw std::invalid_argument("chain: negative move probability");
  if (std::abs(p.birth + p.death + p.move - 1.0) > 1e-12) throw std::invalid_argument("chain: move probabilities must sum to 1");
  if (p.birth <= 0 || p.death <= 0) throw std::invalid_argument("chain: birth and death probabilities must be positive");
}

ChainConfig default_chain_config(const ModelConfig& config, std::int64_t samples, std::uint64_t seed) {
  const double mass = config.a * lambda_total(config);
  ChainConfig c;
  c.burn_in = static_cast<std::int64_t>(std::ceil(10.0 * mass));
  c.thin = std::max<std::int64_t>(1, static_cast<std::int64_t>(mass / 2.0));
  c.n_steps = c.burn_in + samples * c.thin;
  c.seed = seed;
  return c;
}

double AcceptanceStats::rate(MoveKind k) const {
  const auto i = static_cast<std::size_t>(k);
  return proposed[i] ? static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]) : 0.0;
}

std::vector<double> ChainOutput::G_series(int j) const {
  std::vector<double> s;
  s.reserve(samples.size());
  for (const auto& g : samples) s.push_back(g.G(j));
  return s;
}

std::vector<double> ChainOutput::theta_series(int axis) const {
  std::vector<double> s;
  s.reserve(thetas.size());
  for (const auto& t : thetas) s.push_back(static_cast<double>(t[axis]));
  return s;
}

BdmSampler::BdmSampler(ModelConfig config, MoveProbabilities moves)
    : config_(std::move(config)), moves_(moves), mass_(config_.a * lambda_total(config_)), state_(config_.d) {
  config_.validate();
}

void BdmSampler::reset(const FacetPattern& init) {
  state_.clear();
  for (const Facet& f : init) state_.insert(f);
  stats_ = {};
}

double BdmSampler::birth_log_ratio(const ClassedPattern& x, const Facet& u) const {
  const double n1 = static_cast<double>(x.size() + 1);
  return std::log(moves_.death / moves_.birth) + std::log(mass_ / n1) + log_papangelou(x, u, config_);
}

double BdmSampler::death_log_ratio(const ClassedPattern& x_without_u, const Facet& u, std::size_t n) const {
  return std::log(moves_.birth / moves_.death) + std::log(static_cast<double>(n) / mass_) -
         log_papangelou(x_without_u, u, config_);
}

double BdmSampler::move_log_ratio(const ClassedPattern& x_without_u, const Facet& u, const Facet& v) const {
  return log_papangelou(x_without_u, v, config_) - log_papangelou(x_without_u, u, config_);
}

MoveKind BdmSampler::step(Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double r = unif(rng);
  const std::size_t n = state_.size();

  auto accept = [&](double log_ratio) { return log_ratio >= 0.0 || std::log(unif(rng)) < log_ratio; };
  auto pick = [&] {
    std::uniform_int_distribution<std::size_t> idx(0, n - 1);
    return state_.locate(idx(rng));
  };

  if (r < moves_.birth) {
    ++stats_.proposed[0];
    const Facet u = sample_facet(rng, config_);
    if (accept(birth_log_ratio(state_, u))) {
      state_.insert(u);
      ++stats_.accepted[0];
    }
    return MoveKind::birth;
  }
  if (r < moves_.birth + moves_.death) {
    ++stats_.proposed[1];
    if (n == 0) return MoveKind::death;
    const auto [axis, i] = pick();
    const Facet u = state_.remove(axis, i);
    if (accept(death_log_ratio(state_, u, n))) {
      ++stats_.accepted[1];
    } else {
      state_.insert(u);
    }
    return MoveKind::death;
  }
  ++stats_.proposed[2];
  if (n == 0) return MoveKind::move;
  const auto [axis, i] = pick();
  const Facet u = state_.remove(axis, i);
  const Facet v = sample_facet(rng, config_);
  if (accept(move_log_ratio(state_, u, v))) {
    state_.insert(v);
    ++stats_.accepted[2];
  } else {
    state_.insert(u);
  }
  return MoveKind::move;
}

FacetPattern bdm_step(const FacetPattern& state, const ModelConfig& config, Rng& rng) {
  BdmSampler sampler(config);
  sampler.reset(state);
  sampler.step(rng);
  return sampler.state().to_pattern();
}

ChainOutput run_chain(const ModelConfig& config, const ChainConfig& chain) {
  chain.validate();
  Rng rng(chain.seed);
  BdmSampler sampler(config, chain.moves);
  if (chain.init_from_poisson) sampler.reset(sample_poisson(rng, config));

  ChainOutput out;
  out.dim = config.d;
  const std::int64_t count = chain.sample_count();
  if (chain.record_ustats) out.samples.reserve(static_cast<std::size_t>(count));
  out.thetas.reserve(static_cast<std::size_t>(count));

  for (std::int64_t t = 1; t <= chain.n_steps; ++t) {
    sampler.step(rng);
    if (t <= chain.burn_in || (t - chain.burn_in) % chain.thin != 0) continue;
    if (static_cast<std::int64_t>(out.thetas.size()) >= count) continue;
    out.thetas.push_back(sampler.state().counts());
    if (chain.record_ustats) out.samples.push_back(compute_G(sampler.state(), config.b));
    if (chain.record_patterns) out.patterns.push_back(sampler.state().to_pattern());
  }
  out.acceptance = sampler.acceptance();

  for (int i = 0; i < config.d; ++i) {
    const auto th = out.theta_series(i);
    out.ess_theta[i] = stats::effective_sample_size(th);
    if (chain.record_ustats) {
      const auto g = out.G_series(i + 1);
      out.ess[i] = stats::effective_sample_size(g);
    } else {
      out.ess[i] = out.ess_theta[i];
    }
  }

  static constexpr const char* kNames[] = {"birth", "death", "move"};
  for (int k = 0; k < 3; ++k) {
    const auto kind = static_cast<MoveKind>(k);
    if (out.acceptance.proposed[k] > 0 && out.acceptance.rate(kind) < 0.01) {
      std::ostringstream msg;
      msg << kNames[k] << " acceptance rate " << out.acceptance.rate(kind) << " < 1%";
      out.warnings.push_back(msg.str());
    }
  }
  for (int j = 1; j <= config.d; ++j) {
    if (out.ess[j - 1] < 50.0) {
      std::ostringstream msg;
      msg << "ESS of " << (chain.record_ustats ? "G_" : "theta_") << j << " is " << out.ess[j - 1] << " < 50";
      out.warnings.push_back(msg.str());
    }
  }
  return out;
}

ChainOutput run_chain(const ModelConfig& config, const SubmodelSpec& sub, const ChainConfig& chain) {
  return run_chain(with_submodel(config, sub), chain);
}

std::vector<OrientationCounts> sample_theta_chain(const ModelConfig& config, const ChainConfig& chain,
                                                  ChainOutput* diagnostics) {
  for (int j = 1; j < config.d; ++j)
    if (config.nu_of(j) != 0.0) throw std::invalid_argument("sample_theta_chain: only nu_d may be non-zero");
  ChainConfig c = chain;
  c.record_ustats = false;
  ChainOutput out = run_chain(config, c);
  std::vector<OrientationCounts> thetas = std::move(out.thetas);
  if (diagnostics) *diagnostics = std::move(out);
  return thetas;
}

}  // namespace facetproc
