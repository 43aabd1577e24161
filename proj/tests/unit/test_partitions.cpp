#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "facetproc/mcmc.hpp"
#include "facetproc/model.hpp"
#include "facetproc/partitions.hpp"
#include "facetproc/stats.hpp"
#include "facetproc/ustats.hpp"

using namespace facetproc;

namespace {

// All set partitions of [n] as canonical block-label strings, by inserting
// each element into an existing block or a new one.
std::vector<std::vector<int>> all_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> label(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int i, int blocks) {
    if (i == n) {
      out.push_back(label);
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      label[static_cast<std::size_t>(i)] = b;
      rec(i + 1, std::max(blocks, b + 1));
    }
  };
  rec(0, 0);
  return out;
}

bool compatible(const std::vector<int>& sizes, const std::vector<int>& label) {
  int start = 0;
  for (const int k : sizes) {
    std::set<int> seen;
    for (int i = start; i < start + k; ++i)
      if (!seen.insert(label[static_cast<std::size_t>(i)]).second) return false;
    start += k;
  }
  return true;
}

std::multiset<std::size_t> block_counts(const std::vector<int>& sizes) {
  std::multiset<std::size_t> s;
  for (const auto& p : enumerate_partitions(sizes)) s.insert(p.size());
  return s;
}

Estimate chain_mean(const std::vector<double>& x) {
  const auto s = stats::summarize(x);
  const double ess = std::max(1.0, stats::effective_sample_size(x));
  return {s.mean, std::sqrt(s.variance / ess)};
}

}  // namespace

TEST_CASE("partition counts") {
  CHECK(enumerate_partitions(std::vector<int>{1, 1}).size() == 2);
  CHECK(enumerate_partitions(std::vector<int>{2, 2}).size() == 7);
  for (int k = 1; k <= 6; ++k) CHECK(enumerate_partitions(std::vector<int>{k}).size() == 1);
  const std::size_t bell[] = {1, 1, 2, 5, 15, 52, 203};
  for (int k = 1; k <= 6; ++k) CHECK(enumerate_partitions(std::vector<int>(static_cast<std::size_t>(k), 1)).size() == bell[k]);
  CHECK_THROWS_AS(enumerate_partitions(std::vector<int>{7, 6}), std::invalid_argument);
}

TEST_CASE("enumeration equals the filtered brute force") {
  const std::vector<std::vector<int>> cases{{1}, {2}, {1, 1}, {2, 1}, {1, 2}, {2, 2}, {3, 1}, {1, 1, 1},
                                            {2, 2, 2}, {3, 3}, {2, 1, 2}, {4, 4}, {1, 2, 3}, {2, 2, 1, 1}, {1, 1, 1, 1, 1, 1, 1, 1}};
  for (const auto& sizes : cases) {
    int n = 0;
    for (const int k : sizes) n += k;
    std::set<std::vector<int>> ref;
    for (const auto& p : all_partitions(n))
      if (compatible(sizes, p)) ref.insert(p);
    std::set<std::vector<int>> got;
    for (const auto& p : enumerate_partitions(sizes)) {
      CHECK(p.compatible());
      CHECK(p.base_sizes == sizes);
      got.insert(p.rgs);
    }
    CHECK(got == ref);
  }
}

TEST_CASE("canonical order is deterministic") {
  const std::vector<int> sizes{2, 1, 2};
  const auto a = enumerate_partitions(sizes), b = enumerate_partitions(sizes);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].rgs == b[i].rgs);
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].rgs < a[i].rgs);
}

TEST_CASE("invariant under permuting base blocks") {
  CHECK(block_counts({1, 2}) == block_counts({2, 1}));
  CHECK(block_counts({2, 1, 3}) == block_counts({3, 2, 1}));
  CHECK(block_counts({1, 1, 2, 2}) == block_counts({2, 1, 2, 1}));
}

TEST_CASE("partition_from_rgs") {
  const BlockPartition p = partition_from_rgs({2, 2}, {0, 1, 1, 0});
  CHECK(p.size() == 2);
  CHECK(p.compatible());
  CHECK(p.base_block_of(2) == 1);
  CHECK_FALSE(partition_from_rgs({2, 2}, {0, 0, 1, 2}).compatible());
}

TEST_CASE("contracted kernels") {
  const double b = 1.0;
  Rng rng(91);
  const ModelConfig cfg = make_config(3, b, 1.0);
  const std::vector<int> two_g1 = driver_orders(std::vector<int>{2});
  CHECK(two_g1 == std::vector<int>{1, 1});
  const ContractedKernel split = contract_kernel(two_g1, partition_from_rgs({1, 1}, {0, 1}), b);
  const ContractedKernel merged = contract_kernel(two_g1, partition_from_rgs({1, 1}, {0, 0}), b);
  CHECK(split.arity() == 2);
  CHECK(merged.arity() == 1);
  for (int t = 0; t < 100; ++t) {
    const Facet u = sample_facet(rng, cfg), v = sample_facet(rng, cfg);
    const std::vector<Facet> uv{u, v}, uu{u};
    CHECK(split(uv) == driver_g(std::vector<Facet>{u}, b) * driver_g(std::vector<Facet>{v}, b));
    CHECK(merged(uu) == std::pow(driver_g(std::vector<Facet>{u}, b), 2));
  }
  // g^(1) (x) g^(2), the g^(1) slot paired with the first g^(2) slot.
  const std::vector<int> orders = driver_orders(std::vector<int>{1, 1});
  CHECK(orders == std::vector<int>{1, 2});
  const ContractedKernel mixed = contract_kernel(orders, partition_from_rgs({1, 2}, {0, 0, 1}), b);
  for (int t = 0; t < 200; ++t) {
    const Facet u = sample_facet(rng, cfg), v = sample_facet(rng, cfg);
    const std::vector<Facet> uv{u, v};
    CHECK(mixed(uv) == driver_g(std::vector<Facet>{u}, b) * driver_g(uv, b));
  }
  const std::vector<Facet> one{sample_facet(rng, cfg)};
  CHECK_THROWS_AS(split(one), std::invalid_argument);
  CHECK_THROWS_AS(contract_kernel(std::vector<int>{1, 2}, partition_from_rgs({1, 1}, {0, 1}), b), std::invalid_argument);
}

TEST_CASE("Poisson moment formula examples") {
  const ModelConfig cfg = make_config(2, 1.0, 5.0);
  Rng rng(92);
  MomentSpec spec;
  spec.samples = 200000;
  const MomentEstimate g1 = poisson_joint_moment(std::vector<int>{1}, cfg, BaseMeasure::full(cfg), spec, rng);
  CHECK(g1.value == doctest::Approx(10.0).epsilon(1e-14));
  const MomentEstimate g11 = poisson_joint_moment(std::vector<int>{2}, cfg, BaseMeasure::full(cfg), spec, rng);
  CHECK(std::abs(g11.value - 120.0) <= 4.0 * g11.stderr + 1e-10);
  CHECK(g11.terms.size() == 2);
  const MomentEstimate g2 = poisson_joint_moment(std::vector<int>{0, 1}, cfg, BaseMeasure::full(cfg), spec, rng);
  CHECK(std::abs(g2.value - 6.25) <= 4.0 * g2.stderr);
  CHECK(g2.stderr > 0.0);
}

TEST_CASE("Poisson formula matches empirical Poisson moments") {
  const ModelConfig cfg = make_config(3, 1.0, 4.0);
  Rng rng(93);
  MomentSpec spec;
  spec.samples = 100000;
  const std::vector<std::vector<int>> ms{{0, 1}, {1, 1}, {0, 0, 1}, {0, 2}};
  std::vector<std::vector<double>> vals(ms.size());
  for (int r = 0; r < 20000; ++r) {
    const UStatVector G = compute_G(sample_poisson(rng, cfg), cfg);
    for (std::size_t i = 0; i < ms.size(); ++i) {
      double p = 1.0;
      for (std::size_t j = 0; j < ms[i].size(); ++j) p *= std::pow(G.values[j], ms[i][j]);
      vals[i].push_back(p);
    }
  }
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const MomentEstimate f = poisson_joint_moment(ms[i], cfg, BaseMeasure::full(cfg), spec, rng);
    const auto s = stats::summarize(vals[i]);
    CHECK(std::abs(f.value - s.mean) < 4.0 * std::hypot(f.stderr, std::sqrt(s.variance / 20000.0)));
  }
}

TEST_CASE("centered moments") {
  for (const double a : {2.0, 5.0, 30.0}) {
    const ModelConfig cfg = make_config(2, 1.0, a);
    Rng rng(94);
    for (const bool restricted : {false, true}) {
      const BaseMeasure base = restricted ? BaseMeasure::restricted(2) : BaseMeasure::full(cfg);
      MomentSpec spec;
      const RawMomentProvider raw = [&](std::span<const int> m) {
        return poisson_joint_moment(m, cfg, base, spec, rng).value;
      };
      const std::vector<double> means{raw(std::vector<int>{1})};
      CHECK(centered_joint_moment(std::vector<int>{1}, means, raw, a) == doctest::Approx(0.0).scale(1.0));
      CHECK(centered_joint_moment(std::vector<int>{2}, means, raw, a) == doctest::Approx(restricted ? 2.0 : 4.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("Gibbs formula with vanishing interaction is the Poisson formula") {
  const ModelConfig cfg = make_config(2, 1.0, 5.0);
  Rng rng(95);
  MomentSpec spec;
  spec.samples = 50000;
  const MomentEstimate p = poisson_joint_moment(std::vector<int>{0, 1}, cfg, BaseMeasure::full(cfg), spec, rng);
  const MomentEstimate g = gibbs_joint_moment(std::vector<int>{0, 1}, cfg, {2, -1e-10}, spec, rng);
  CHECK(std::abs(p.value - g.value) < 4.0 * std::hypot(p.stderr, g.stderr));
}

TEST_CASE("Gibbs formula agrees with the chain and shows repulsion") {
  const std::vector<std::vector<int>> ms{{1, 0}, {0, 1}, {2, 0}};
  for (const double a : {2.0, 5.0}) {
    const ModelConfig cfg = make_config(2, 1.0, a, {0.0, -1.0});
    const SubmodelSpec sub{2, -1.0};
    Rng rng(96);
    CorrelationEstimator shared(cfg, 2);
    MomentSpec spec;
    spec.samples = 50000;
    const ChainOutput out = run_chain(cfg, sub, default_chain_config(cfg, 40000, 97));
    for (const auto& m : ms) {
      const MomentEstimate f = gibbs_joint_moment(m, cfg, sub, spec, rng, &shared);
      std::vector<double> v;
      for (const auto& G : out.samples) v.push_back(std::pow(G.G(1), m[0]) * std::pow(G.G(2), m[1]));
      const Estimate e = chain_mean(v);
      CHECK(std::abs(f.value - e.value) <= 4.0 * std::hypot(f.stderr, e.stderr));
    }
    const MomentEstimate gc = gibbs_joint_moment(std::vector<int>{0, 1}, cfg, sub, spec, rng, &shared);
    const MomentEstimate pc = poisson_joint_moment(std::vector<int>{0, 1}, make_config(2, 1.0, a),
                                                   BaseMeasure::full(cfg), spec, rng);
    CHECK(gc.value + 4.0 * gc.stderr < pc.value - 4.0 * pc.stderr);
  }
}
