#pragma once

// Monte Carlo oracle: simulates X_0 = 0, X_{k+1} = sum of X_k offspring + I_k
// with exact samplers for the constant family. Each replication owns a
// Philox stream keyed by (seed, replication), and all reductions are
// integer sums, so results do not depend on the worker count.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "gwpi/philox.hpp"
#include "gwpi/series.hpp"
#include "gwpi/sv_models.hpp"

namespace gwpi {

inline constexpr std::size_t kOffspringTable = 100'000;
inline constexpr std::uint64_t kPopulationCap = 1'000'000'000;

/// Saturates at this value; anything this large is past every cap.
inline constexpr std::uint64_t kSampleCeiling = std::uint64_t{1} << 62;

/// Sibuya(delta): first success in independent trials with success
/// probability delta/k at trial k. The first 32 trials run literally; past
/// that the exact Beta-geometric representation of the remainder is used.
class SibuyaSampler {
 public:
  explicit SibuyaSampler(double delta);
  std::uint64_t operator()(PhiloxStream& rng) const;

 private:
  double delta_;
};

/// 0 with probability 1 - lambda, otherwise Sibuya(delta).
class ImmigrationSampler {
 public:
  explicit ImmigrationSampler(const ModelSpec& spec);
  std::uint64_t operator()(PhiloxStream& rng) const;

 private:
  double lambda_;
  SibuyaSampler sibuya_;
};

/// Inversion against the exact survivor function S(k) = P(xi > k): a table
/// for k < J, and beyond it S(k) from log-gamma, searched by bisection.
class OffspringSampler {
 public:
  explicit OffspringSampler(const ModelSpec& spec, std::size_t table_size = kOffspringTable);

  std::uint64_t operator()(PhiloxStream& rng) const;
  /// Draw conditioned on xi > k.
  std::uint64_t above(std::uint64_t k, PhiloxStream& rng) const;
  /// Sum of n independent draws; exact category splitting with binomial
  /// counts while more than 64 individuals remain.
  std::uint64_t total(std::uint64_t n, PhiloxStream& rng) const;

  double survivor(std::uint64_t k) const;
  std::size_t table_size() const { return survivor_.size(); }

 private:
  std::uint64_t invert(double u) const;

  double nu_;
  double log_scale_;  ///< ln(c nu) - lgamma(1 - nu)
  std::vector<double> survivor_;  ///< S(0) .. S(J-1)
};

struct SimConfig {
  ModelSpec spec = ModelSpec::default_spec();
  std::size_t replications = 1'000'000;
  std::size_t horizon = 20;
  std::uint64_t seed = 20240601;
  std::size_t workers = 1;
  std::size_t table_size = kOffspringTable;
  std::size_t pmf_order = kDefaultTruncation;  ///< histogram bins 0..K, then one overflow bin
  std::uint64_t population_cap = kPopulationCap;
};

struct SimResult {
  std::size_t n = 0;
  std::size_t reps = 0;
  std::vector<std::uint64_t> counts;  ///< X_n = j for j <= K
  std::uint64_t overflow = 0;         ///< X_n > K, censored paths included
  std::uint64_t censored_paths = 0;
  std::vector<std::uint64_t> zero_counts;  ///< X_k = 0 for k = 0..n
  double mean = 0.0;     ///< over uncensored paths
  double mean_se = 0.0;

  double pmf(std::size_t j) const;
  double p00_hat() const { return p00_hat(n); }
  /// Fraction of paths with X_k = 0.
  double p00_hat(std::size_t k) const;
  double p00_se(std::size_t k) const;
};

SimResult simulate_gwpi(const SimConfig& config);

/// 0.5 sum_j |empirical_j - exact_j| with all mass above K in one bin.
double total_variation(const SimResult& sim, const TruncatedSeries& exact);

/// {n, reps, p00_hat, se, pmf, censored_paths, overflow, mean, mean_se}
nlohmann::json to_json(const SimResult& sim);
/// Header: n,j,p_0j_n
void write_pmf_csv(std::ostream& out, const SimResult& sim);

}  // namespace gwpi
