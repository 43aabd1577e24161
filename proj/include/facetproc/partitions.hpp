#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "facetproc/correlation.hpp"
#include "facetproc/model.hpp"
#include "facetproc/types.hpp"

namespace facetproc {

inline constexpr int kMaxPartitionElements = 12;

/// Partition sigma of [k] (0-based elements), k = sum of base_sizes, where the
/// base partition has consecutive blocks of sizes k_1..k_m.
struct BlockPartition {
  std::vector<int> base_sizes;
  /// Restricted growth string: block index of each element.
  std::vector<int> rgs;
  std::vector<std::vector<int>> blocks;

  std::size_t size() const { return blocks.size(); }
  int elements() const { return static_cast<int>(rgs.size()); }
  int base_block_of(int element) const;
  /// |J ∩ J'| <= 1 for every base block J and block J'.
  bool compatible() const;
};

BlockPartition partition_from_rgs(std::vector<int> base_sizes, std::vector<int> rgs);

/// All compatible partitions in restricted-growth-string order.
std::vector<BlockPartition> enumerate_partitions(std::span<const int> sizes);

/// Driver orders for the multi-index m: order j repeated m_j times (m[0] is m_1).
std::vector<int> driver_orders(std::span<const int> m);

/// (⊗ g^{(orders[i])})_sigma as a function of |sigma| facets.
class ContractedKernel {
 public:
  ContractedKernel(std::vector<int> orders, BlockPartition sigma, double b);

  int arity() const { return static_cast<int>(sigma_.size()); }
  const BlockPartition& sigma() const { return sigma_; }
  double operator()(std::span<const Facet> u) const;

 private:
  std::vector<int> orders_;
  BlockPartition sigma_;
  double b_;
  /// slots_[i] = block indices feeding base block i, in slot order.
  std::vector<std::vector<int>> slots_;
};

ContractedKernel contract_kernel(std::span<const int> orders, const BlockPartition& sigma, double b);

struct MomentSpec {
  /// Integration nodes per partition.
  std::int64_t samples = 20000;
  /// Draws per node for the numerator of rho (Gibbs only, c < d).
  std::int64_t node_reps = 256;
  RhoOptions rho;
};

struct MomentTerm {
  std::vector<int> rgs;
  double value = 0.0;
  double stderr = 0.0;
};

struct MomentEstimate {
  double value = 0.0;
  double stderr = 0.0;
  std::vector<MomentTerm> terms;
  std::vector<std::string> warnings;
};

/// E prod_j G_j^{m_j} of the Poisson process with intensity a * base:
/// sum_sigma a^{|sigma|} ∫ g_sigma d base^{|sigma|}, each integral by i.i.d.
/// base draws times base(Y)^{|sigma|}.
MomentEstimate poisson_joint_moment(std::span<const int> m, const ModelConfig& config, BaseMeasure base,
                                    const MomentSpec& spec, Rng& rng);

/// The same sum with rho_{|sigma|}(.; mu_a^{(c)}) under lambda; the denominator
/// of rho is estimated once and shared by every node and partition.
MomentEstimate gibbs_joint_moment(std::span<const int> m, const ModelConfig& config, const SubmodelSpec& sub,
                                  const MomentSpec& spec, Rng& rng, CorrelationEstimator* shared = nullptr);

/// Raw moment E prod_j G_j^{n_j} for a multi-index n (n[0] is n_1).
using RawMomentProvider = std::function<double(std::span<const int>)>;

/// E prod_j ((G_j - E G_j) / a^{j-1/2})^{m_j} by binomial expansion.
double centered_joint_moment(std::span<const int> m, std::span<const double> means, const RawMomentProvider& raw,
                             double a);

}  // namespace facetproc
