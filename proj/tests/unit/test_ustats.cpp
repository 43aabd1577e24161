#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "facetproc/geometry.hpp"
#include "facetproc/model.hpp"
#include "facetproc/stats.hpp"
#include "facetproc/ustats.hpp"

using namespace facetproc;

namespace {

// Sum of H^{d-j} over all j-subsets, straight from the geometry module.
double brute_G(const FacetPattern& p, int j, double b) {
  const int n = static_cast<int>(p.size());
  if (j > n) return 0.0;
  std::vector<int> idx(static_cast<std::size_t>(j));
  for (int i = 0; i < j; ++i) idx[static_cast<std::size_t>(i)] = i;
  double s = 0.0;
  while (true) {
    std::vector<Facet> fs;
    for (const int i : idx) fs.push_back(p[static_cast<std::size_t>(i)]);
    s += intersection_measure(fs, b);
    int k = j - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - j + k) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (int m = k + 1; m < j; ++m) idx[static_cast<std::size_t>(m)] = idx[static_cast<std::size_t>(m - 1)] + 1;
  }
  return s;
}

FacetPattern random_pattern(Rng& rng, int d, int size, double b) {
  const ModelConfig cfg = make_config(d, b, 1.0);
  FacetPattern p;
  for (int i = 0; i < size; ++i) p.push_back(sample_facet(rng, cfg));
  return p;
}

}  // namespace

TEST_CASE("driver examples") {
  const std::vector<Facet> one{make_facet({0.5, 0.5, 0.5}, 0)};
  CHECK(driver_g(one, 1.0) == 4.0);
  const std::vector<Facet> cross{make_facet({0.3, 0.4}, 0), make_facet({0.7, 0.2}, 1)};
  CHECK(driver_g(cross, 1.0) == 0.5);
  const std::vector<Facet> par{make_facet({0.3, 0.4}, 0), make_facet({0.7, 0.2}, 0)};
  CHECK(driver_g(par, 1.0) == 0.0);
}

TEST_CASE("compute_G examples") {
  const ModelConfig cfg = make_config(2, 1.0, 1.0);
  const FacetPattern p{make_facet({0.3, 0.4}, 0), make_facet({0.7, 0.2}, 1)};
  const UStatVector G = compute_G(p, cfg);
  CHECK(G.G(1) == 4.0);
  CHECK(G.G(2) == 1.0);
  const UStatVector E = compute_G(FacetPattern{}, make_config(4, 1.0, 1.0));
  for (int j = 1; j <= 4; ++j) CHECK(E.G(j) == 0.0);
}

TEST_CASE("orientation counts") {
  CHECK(orientation_counts({}, 3).total() == 0);
  const FacetPattern p{make_facet({0.1, 0.1}, 0), make_facet({0.2, 0.1}, 0), make_facet({0.3, 0.1}, 0),
                       make_facet({0.1, 0.4}, 1)};
  const OrientationCounts th = orientation_counts(p, 2);
  CHECK(th[0] == 3);
  CHECK(th[1] == 1);
  CHECK(th.total() == 4);
  CHECK(th.product() == 3);
}

TEST_CASE("theta of a Poisson pattern is independent Poisson(A)") {
  const ModelConfig cfg = make_config(3, 1.0, 6.0);
  Rng rng(31);
  std::vector<std::int64_t> t0, t1, t2;
  std::vector<double> x0, x1;
  for (int i = 0; i < 10000; ++i) {
    const OrientationCounts th = orientation_counts(sample_poisson(rng, cfg), 3);
    t0.push_back(th[0]);
    t1.push_back(th[1]);
    t2.push_back(th[2]);
    x0.push_back(static_cast<double>(th[0]));
    x1.push_back(static_cast<double>(th[1]));
  }
  CHECK(stats::chi_square_poisson(t0, 2.0).p_value > 0.01);
  CHECK(stats::chi_square_poisson(t1, 2.0).p_value > 0.01);
  CHECK(stats::chi_square_poisson(t2, 2.0).p_value > 0.01);
  // Correlation of independent counts: |r| < 4 / sqrt(n).
  const double r = stats::covariance(x0, x1) / 2.0;
  CHECK(std::abs(r) < 0.04);
}

TEST_CASE("enumeration matches brute force") {
  Rng rng(32);
  for (int t = 0; t < 300; ++t) {
    const int d = 2 + t % 3;
    const double b = (t % 2) ? 1.0 : 0.75;
    const FacetPattern p = random_pattern(rng, d, 1 + t % 12, b);
    const ClassedPattern cp(p, d);
    for (int j = 1; j <= d; ++j) {
      const double ref = brute_G(p, j, b);
      CHECK(compute_G_order(cp, j, b, {false}) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("product identity holds exactly") {
  Rng rng(33);
  std::uniform_int_distribution<int> size(0, 30);
  for (int t = 0; t < 1000; ++t) {
    const int d = 2 + t % 3;
    const FacetPattern p = random_pattern(rng, d, size(rng), 1.0);
    const ClassedPattern cp(p, d);
    REQUIRE(compute_G_order(cp, d, 1.0, {false}) == static_cast<double>(orientation_counts(p, d).product()));
  }
}

TEST_CASE("G_1 is (2b)^(d-1) times the size; invariant under storage order") {
  Rng rng(34);
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + t % 4;
    const double b = 0.5 + 0.25 * (t % 3);
    FacetPattern p = random_pattern(rng, d, t % 20, b);
    const ModelConfig cfg = make_config(d, b, 1.0);
    const UStatVector G = compute_G(p, cfg);
    CHECK(G.G(1) == power_by_multiplication(2.0 * b, d - 1) * static_cast<double>(p.size()));
    std::shuffle(p.begin(), p.end(), rng);
    const UStatVector H = compute_G(p, cfg);
    for (int j = 1; j <= d; ++j) CHECK(H.G(j) == doctest::Approx(G.G(j)).epsilon(1e-13));
    for (int j = 1; j <= d; ++j) CHECK(G.G(j) >= 0.0);
  }
}

TEST_CASE("insertion delta and Papangelou intensity") {
  Rng rng(35);
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + t % 3;
    const ModelConfig cfg = with_submodel(make_config(d, 1.0, 5.0), {2, -0.8});
    const FacetPattern p = sample_poisson(rng, cfg);
    const Facet u = sample_facet(rng, cfg);
    FacetPattern pu = p;
    pu.push_back(u);
    const ClassedPattern cp(p, d);
    for (int j = 1; j <= d; ++j) {
      const double delta = compute_G(pu, cfg).G(j) - compute_G(p, cfg).G(j);
      CHECK(insertion_delta(cp, u, j, 1.0) == doctest::Approx(delta).epsilon(1e-12).scale(1.0));
    }
    const std::vector<Facet> us{u};
    CHECK(std::exp(log_papangelou(cp, u, cfg)) == doctest::Approx(conditional_intensity(p, us, cfg)).epsilon(1e-12));
  }
}

TEST_CASE("Poisson means of G_1, G_2") {
  const ModelConfig cfg = make_config(2, 1.0, 5.0);
  Rng rng(36);
  std::vector<double> g1, g2;
  for (int i = 0; i < 10000; ++i) {
    const UStatVector G = compute_G(sample_poisson(rng, cfg), cfg);
    g1.push_back(G.G(1));
    g2.push_back(G.G(2));
  }
  const auto s1 = stats::summarize(g1), s2 = stats::summarize(g2);
  CHECK(std::abs(s1.mean - 10.0) < 4.0 * std::sqrt(s1.variance / 1e4));
  CHECK(std::abs(s2.mean - 6.25) < 4.0 * std::sqrt(s2.variance / 1e4));
}

TEST_CASE("reduced kernel g_1") {
  const ModelConfig cfg = make_config(2, 1.0, 1.0);
  Rng rng(37);
  const Facet y = make_facet({0.5, 0.5}, 0);
  const Estimate e1 = reduced_kernel_g1(1, y, cfg, BaseMeasure::full(cfg), 10, rng);
  CHECK(e1.value == 2.0);
  CHECK(e1.stderr == 0.0);
  // Every facet of the other orientation meets the centred y: lambda(Y) / 2.
  const Estimate e2 = reduced_kernel_g1(2, y, cfg, BaseMeasure::full(cfg), 200000, rng);
  CHECK(std::abs(e2.value - 0.5) < 4.0 * e2.stderr + 1e-12);
  // Reflection z -> b - z.
  const Facet ya = make_facet({0.2, 0.9}, 0), yb = make_facet({0.8, 0.1}, 0);
  const Estimate ea = reduced_kernel_g1(2, ya, cfg, BaseMeasure::full(cfg), 200000, rng);
  const Estimate eb = reduced_kernel_g1(2, yb, cfg, BaseMeasure::full(cfg), 200000, rng);
  CHECK(std::abs(ea.value - eb.value) < 4.0 * std::hypot(ea.stderr, eb.stderr) + 1e-12);
}

TEST_CASE("standardize examples") {
  const std::vector<double> G{7.0, 3.0}, m{7.0, 3.0};
  const auto z = standardize(G, m, 9.0);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
  const std::vector<double> g1{16.0}, m1{10.0};
  CHECK(standardize(g1, m1, 4.0)[0] == 3.0);
  const std::vector<double> g2{0.0, 110.0}, m2{0.0, 100.0};
  CHECK(standardize(g2, m2, 100.0)[1] == doctest::Approx(0.01).epsilon(1e-14));
}
