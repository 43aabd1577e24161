#include "facetproc/partitions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "facetproc/analytic.hpp"
#include "facetproc/stats.hpp"
#include "facetproc/ustats.hpp"

namespace facetproc {
namespace {

void check_sizes(std::span<const int> sizes) {
  int total = 0;
  for (int k : sizes) {
    if (k < 1) throw std::invalid_argument("partitions: base block sizes must be positive");
    total += k;
  }
  if (total > kMaxPartitionElements) throw std::invalid_argument("partitions: more than 12 elements");
}

std::vector<int> base_index(std::span<const int> sizes) {
  std::vector<int> of;
  for (std::size_t i = 0; i < sizes.size(); ++i) of.insert(of.end(), static_cast<std::size_t>(sizes[i]), static_cast<int>(i));
  return of;
}

}  // namespace

int BlockPartition::base_block_of(int element) const {
  int acc = 0;
  for (std::size_t i = 0; i < base_sizes.size(); ++i) {
    acc += base_sizes[i];
    if (element < acc) return static_cast<int>(i);
  }
  throw std::out_of_range("base_block_of: element out of range");
}

bool BlockPartition::compatible() const {
  for (const auto& block : blocks) {
    std::vector<int> seen;
    for (int e : block) {
      const int j = base_block_of(e);
      if (std::find(seen.begin(), seen.end(), j) != seen.end()) return false;
      seen.push_back(j);
    }
  }
  return true;
}

BlockPartition partition_from_rgs(std::vector<int> base_sizes, std::vector<int> rgs) {
  BlockPartition p;
  p.base_sizes = std::move(base_sizes);
  if (std::accumulate(p.base_sizes.begin(), p.base_sizes.end(), 0) != static_cast<int>(rgs.size()))
    throw std::invalid_argument("partition_from_rgs: length mismatch");
  int next = 0;
  for (std::size_t e = 0; e < rgs.size(); ++e) {
    if (rgs[e] < 0 || rgs[e] > next) throw std::invalid_argument("partition_from_rgs: not a restricted growth string");
    if (rgs[e] == next) {
      p.blocks.emplace_back();
      ++next;
    }
    p.blocks[static_cast<std::size_t>(rgs[e])].push_back(static_cast<int>(e));
  }
  p.rgs = std::move(rgs);
  return p;
}

std::vector<BlockPartition> enumerate_partitions(std::span<const int> sizes) {
  check_sizes(sizes);
  const std::vector<int> base = base_index(sizes);
  const std::size_t k = base.size();
  std::vector<BlockPartition> out;
  std::vector<int> rgs(k, 0);
  std::vector<std::uint32_t> used;  // base blocks present in each sigma block

  auto rec = [&](auto&& self, std::size_t e) -> void {
    if (e == k) {
      out.push_back(partition_from_rgs(std::vector<int>(sizes.begin(), sizes.end()), rgs));
      return;
    }
    const std::uint32_t bit = 1u << base[e];
    for (std::size_t b = 0; b <= used.size(); ++b) {
      if (b == used.size()) {
        used.push_back(bit);
        rgs[e] = static_cast<int>(b);
        self(self, e + 1);
        used.pop_back();
      } else if (!(used[b] & bit)) {
        used[b] |= bit;
        rgs[e] = static_cast<int>(b);
        self(self, e + 1);
        used[b] &= ~bit;
      }
    }
  };
  if (k > 0) rec(rec, 0);
  return out;
}

std::vector<int> driver_orders(std::span<const int> m) {
  std::vector<int> orders;
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m[j] < 0) throw std::invalid_argument("driver_orders: negative multiplicity");
    orders.insert(orders.end(), static_cast<std::size_t>(m[j]), static_cast<int>(j + 1));
  }
  return orders;
}

ContractedKernel::ContractedKernel(std::vector<int> orders, BlockPartition sigma, double b)
    : orders_(std::move(orders)), sigma_(std::move(sigma)), b_(b) {
  if (orders_ != sigma_.base_sizes) throw std::invalid_argument("contract_kernel: driver orders do not match the partition");
  slots_.resize(orders_.size());
  for (int e = 0; e < sigma_.elements(); ++e)
    slots_[static_cast<std::size_t>(sigma_.base_block_of(e))].push_back(sigma_.rgs[static_cast<std::size_t>(e)]);
}

double ContractedKernel::operator()(std::span<const Facet> u) const {
  if (u.size() != sigma_.size()) throw std::invalid_argument("contracted kernel: arity mismatch");
  double v = 1.0;
  std::array<Facet, kMaxDim> args;
  for (const auto& slot : slots_) {
    if (slot.size() > static_cast<std::size_t>(kMaxDim)) return 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < slot.size(); ++i) {
      args[i] = u[static_cast<std::size_t>(slot[i])];
      if (static_cast<int>(slot.size()) > args[i].dim) ok = false;
    }
    if (!ok) return 0.0;
    v *= driver_g(std::span<const Facet>(args.data(), slot.size()), b_);
    if (v == 0.0) return 0.0;
  }
  return v;
}

ContractedKernel contract_kernel(std::span<const int> orders, const BlockPartition& sigma, double b) {
  return ContractedKernel(std::vector<int>(orders.begin(), orders.end()), sigma, b);
}

MomentEstimate poisson_joint_moment(std::span<const int> m, const ModelConfig& config, BaseMeasure base,
                                    const MomentSpec& spec, Rng& rng) {
  config.validate();
  const std::vector<int> orders = driver_orders(m);
  MomentEstimate out;
  if (orders.empty()) {
    out.value = 1.0;
    return out;
  }
  if (spec.samples < 2) throw std::invalid_argument("poisson_joint_moment: need at least 2 samples");
  const double M = base_total(config, base);
  double var = 0.0;
  for (const BlockPartition& sigma : enumerate_partitions(orders)) {
    const ContractedKernel g(orders, sigma, config.b);
    const double scale = std::pow(config.a * M, static_cast<double>(sigma.size()));
    std::vector<Facet> u(sigma.size());
    std::vector<double> vals(static_cast<std::size_t>(spec.samples));
    for (auto& v : vals) {
      for (auto& f : u) f = sample_facet(rng, config, base);
      v = g(u);
    }
    const auto s = stats::summarize(vals);
    MomentTerm t{sigma.rgs, scale * s.mean, scale * std::sqrt(s.variance / static_cast<double>(s.n))};
    out.value += t.value;
    var += t.stderr * t.stderr;
    out.terms.push_back(std::move(t));
  }
  out.stderr = std::sqrt(var);
  return out;
}

MomentEstimate gibbs_joint_moment(std::span<const int> m, const ModelConfig& config, const SubmodelSpec& sub,
                                  const MomentSpec& spec, Rng& rng, CorrelationEstimator* shared) {
  const ModelConfig cfg = with_submodel(config, sub);
  std::unique_ptr<CorrelationEstimator> own;
  if (!shared) {
    own = std::make_unique<CorrelationEstimator>(cfg, sub.c, spec.rho);
    shared = own.get();
  }
  const std::vector<int> orders = driver_orders(m);
  MomentEstimate out;
  if (orders.empty()) {
    out.value = 1.0;
    return out;
  }
  if (spec.samples < 2) throw std::invalid_argument("gibbs_joint_moment: need at least 2 samples");
  const ExpectationEstimate& den = shared->denominator(rng);
  const double lam = lambda_total(cfg);
  double num_var = 0.0, total = 0.0;
  for (const BlockPartition& sigma : enumerate_partitions(orders)) {
    const ContractedKernel g(orders, sigma, cfg.b);
    const double scale = std::pow(cfg.a * lam, static_cast<double>(sigma.size()));
    std::vector<Facet> u(sigma.size());
    std::vector<double> vals(static_cast<std::size_t>(spec.samples));
    for (auto& v : vals) {
      for (auto& f : u) f = sample_facet(rng, cfg);
      const double gv = g(u);
      v = gv == 0.0 ? 0.0 : gv * shared->expectation(u, rng, spec.node_reps, true).value;
    }
    const auto s = stats::summarize(vals);
    const double term = scale * s.mean;
    const double term_se = scale * std::sqrt(s.variance / static_cast<double>(s.n));
    total += term;
    num_var += term_se * term_se;
    out.terms.push_back({sigma.rgs, term / den.value, term_se / den.value});
  }
  out.value = total / den.value;
  out.stderr = std::sqrt(num_var / (den.value * den.value) + out.value * out.value * den.variance / (den.value * den.value));
  const double rel = std::sqrt(den.variance) / den.value;
  if (rel > spec.rho.warn_rel_stderr)
    out.warnings.push_back("shared denominator relative stderr " + std::to_string(rel) + " exceeds the warning level");
  return out;
}

double centered_joint_moment(std::span<const int> m, std::span<const double> means, const RawMomentProvider& raw,
                             double a) {
  const std::size_t s = m.size();
  if (means.size() < s) throw std::invalid_argument("centered_joint_moment: missing means");
  if (!(a > 0)) throw std::invalid_argument("centered_joint_moment: a must be positive");
  double q = 0.0;
  for (std::size_t j = 0; j < s; ++j) q += (static_cast<double>(j + 1) - 0.5) * m[j];

  std::vector<int> i(s, 0), rest(s, 0);
  double total = 0.0;
  for (;;) {
    double coef = 1.0;
    int sign_sum = 0;
    bool zero = true;
    for (std::size_t j = 0; j < s; ++j) {
      coef *= binomial(m[j], i[j]) * std::pow(means[j], i[j]);
      sign_sum += i[j];
      rest[j] = m[j] - i[j];
      zero = zero && rest[j] == 0;
    }
    const double r = zero ? 1.0 : raw(rest);
    total += (sign_sum % 2 ? -1.0 : 1.0) * coef * r;
    std::size_t j = 0;
    while (j < s && ++i[j] > m[j]) i[j++] = 0;
    if (j == s) break;
  }
  return total / std::pow(a, q);
}

}  // namespace facetproc
