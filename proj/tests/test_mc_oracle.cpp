#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "gwpi/mc_oracle.hpp"
#include "gwpi/philox.hpp"
#include "gwpi/sv_models.hpp"

using namespace gwpi;

namespace {

const ModelSpec kSpec = ModelSpec::default_spec();

// Chi-square p-value of counts over bins 0..K-1 plus a tail bin, against
// the exact series. Adjacent bins are merged until each expects >= 20.
double chi_square_p(const std::vector<std::uint64_t>& counts, const TruncatedSeries& exact,
                    std::uint64_t total) {
  const std::size_t K = counts.size() - 1;
  std::vector<double> probs(K + 1, 0.0);
  for (std::size_t j = 0; j < K; ++j) probs[j] = exact[j];
  double head = 0.0;
  for (std::size_t j = 0; j < K; ++j) head += probs[j];
  probs[K] = 1.0 - head;
  double stat = 0.0;
  int bins = 0;
  double e = 0.0, o = 0.0;
  for (std::size_t j = 0; j <= K; ++j) {
    e += probs[j] * static_cast<double>(total);
    o += static_cast<double>(counts[j]);
    if (e >= 20.0 || j == K) {
      stat += (o - e) * (o - e) / e;
      ++bins;
      e = o = 0.0;
    }
  }
  boost::math::chi_squared dist(bins - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

template <class Draw>
std::vector<std::uint64_t> histogram(std::size_t K, std::size_t n, Draw draw) {
  std::vector<std::uint64_t> counts(K + 1, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const std::uint64_t x = draw(r);
    ++counts[x < K ? x : K];
  }
  return counts;
}

}  // namespace

TEST_CASE("Philox4x32-10 known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        PhiloxBlock{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu}) ==
        PhiloxBlock{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      {0xa4093822u, 0x299f31d0u}) ==
        PhiloxBlock{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  PhiloxStream a(7, 3), b(7, 3), c(7, 4);
  for (int k = 0; k < 10; ++k) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
  PhiloxStream u(1, 1);
  for (int k = 0; k < 1000; ++k) {
    const double v = u.uniform();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("offspring sampler matches exact law") {
  const OffspringSampler sampler(kSpec, 4096);
  const auto exact = offspring_coefficients(kSpec, 64);
  PhiloxStream rng(11, 0);
  const auto counts = histogram(64, 200000, [&](std::size_t) { return sampler(rng); });
  CHECK(chi_square_p(counts, exact, 200000) > 1e-4);
  CHECK(sampler.survivor(10) == doctest::Approx(offspring_survivor(kSpec, 10)).epsilon(1e-12));
  CHECK(sampler.survivor(100000) == doctest::Approx(offspring_survivor(kSpec, 100000)).epsilon(1e-8));
}

TEST_CASE("draws beyond the table follow the survivor function") {
  const OffspringSampler sampler(kSpec, 64);
  PhiloxStream rng(12, 0);
  std::size_t above = 0;
  const std::size_t n = 400000;
  for (std::size_t r = 0; r < n; ++r) above += sampler(rng) > 1000 ? 1 : 0;
  const double p = offspring_survivor(kSpec, 1000);
  const double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(static_cast<double>(above) / n - p) < 4 * se);
}

TEST_CASE("conditional draw stays above k") {
  const OffspringSampler sampler(kSpec, 256);
  PhiloxStream rng(13, 0);
  for (int r = 0; r < 1000; ++r) CHECK(sampler.above(300, rng) > 300);
}

TEST_CASE("immigration sampler matches exact law") {
  const ImmigrationSampler sampler(kSpec);
  const auto exact = immigration_coefficients(kSpec, 64);
  PhiloxStream rng(14, 0);
  const auto counts = histogram(64, 200000, [&](std::size_t) { return sampler(rng); });
  CHECK(chi_square_p(counts, exact, 200000) > 1e-4);
}

TEST_CASE("sum of many offspring matches the power of the pgf") {
  const OffspringSampler sampler(kSpec, 4096);
  const std::size_t m = 200;
  const auto exact = power(offspring_coefficients(kSpec, 1024), m);
  PhiloxStream rng(15, 0);
  const auto counts = histogram(600, 50000, [&](std::size_t) { return sampler.total(m, rng); });
  CHECK(chi_square_p(counts, exact.truncated(600), 50000) > 1e-4);
}

TEST_CASE("simulation results") {
  SimConfig cfg;
  cfg.replications = 100000;
  cfg.horizon = 2;
  cfg.pmf_order = 64;
  const auto sim = simulate_gwpi(cfg);
  CHECK(sim.reps == 100000);
  CHECK(std::abs(sim.p00_hat(1) - 0.5) < 4 * sim.p00_se(1));
  CHECK(std::abs(sim.p00_hat(2) - 0.351349) < 4 * sim.p00_se(2));
  CHECK(sim.zero_counts[0] == sim.reps);
  std::uint64_t total = sim.overflow;
  for (auto c : sim.counts) total += c;
  CHECK(total == sim.reps);
  const auto j = to_json(sim);
  CHECK(j["n"] == 2);
  std::ostringstream out;
  write_pmf_csv(out, sim);
  CHECK(out.str().rfind("n,j,p_0j_n\n2,0,", 0) == 0);
}

TEST_CASE("results do not depend on the worker count") {
  SimConfig cfg;
  cfg.replications = 20000;
  cfg.horizon = 10;
  cfg.pmf_order = 128;
  cfg.workers = 1;
  const auto a = simulate_gwpi(cfg);
  cfg.workers = 3;
  const auto b = simulate_gwpi(cfg);
  CHECK(a.counts == b.counts);
  CHECK(a.overflow == b.overflow);
  CHECK(a.zero_counts == b.zero_counts);
  CHECK(a.mean == b.mean);
  cfg.seed += 1;
  CHECK(simulate_gwpi(cfg).counts != a.counts);
}

TEST_CASE("total variation against exact row") {
  SimConfig cfg;
  cfg.replications = 50000;
  cfg.horizon = 1;
  cfg.pmf_order = 64;
  const auto sim = simulate_gwpi(cfg);
  const auto exact = immigration_coefficients(kSpec, 64);
  const double tv = total_variation(sim, exact);
  CHECK(tv > 0.0);
  CHECK(tv < 0.02);
}
