#include "gwpi/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <fmt/format.h>

#include "gwpi/errors.hpp"
#include "gwpi/log.hpp"
#include "gwpi/parallel.hpp"

namespace gwpi {

namespace {

constexpr std::uint64_t kSequentialTrials = 32;
constexpr std::uint64_t kIndividualLimit = 64;

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > kSampleCeiling - std::min(b, kSampleCeiling) ? kSampleCeiling : a + b;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a > kSampleCeiling / b ? kSampleCeiling : a * b;
}

// Geometric on {1, 2, ...} with success probability p.
std::uint64_t geometric(double p, PhiloxStream& rng) {
  if (p >= 1.0) return 1;
  const double denom = std::log1p(-p);
  if (denom == 0.0) return kSampleCeiling;
  const double g = std::ceil(std::log(rng.uniform()) / denom);
  if (!(g < static_cast<double>(kSampleCeiling))) return kSampleCeiling;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(g));
}

}  // namespace

SibuyaSampler::SibuyaSampler(double delta) : delta_(delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ModelError(fmt::format("Sibuya index {} outside (0,1]", delta));
}

std::uint64_t SibuyaSampler::operator()(PhiloxStream& rng) const {
  if (delta_ == 1.0) return 1;
  for (std::uint64_t k = 1; k <= kSequentialTrials; ++k) {
    if (rng.uniform() < delta_ / static_cast<double>(k)) return k;
  }
  // Given no success in the first M trials, the success probability is
  // Beta(delta, M + 1 - delta) and the wait after M is geometric.
  const double m = static_cast<double>(kSequentialTrials);
  boost::random::beta_distribution<double> beta(delta_, m + 1.0 - delta_);
  const double t = beta(rng);
  return saturating_add(kSequentialTrials, geometric(t, rng));
}

ImmigrationSampler::ImmigrationSampler(const ModelSpec& spec)
    : lambda_(spec.lambda()), sibuya_(spec.delta()) {}

std::uint64_t ImmigrationSampler::operator()(PhiloxStream& rng) const {
  if (rng.uniform() >= lambda_) return 0;
  return sibuya_(rng);
}

OffspringSampler::OffspringSampler(const ModelSpec& spec, std::size_t table_size)
    : nu_(spec.nu()) {
  if (table_size < 2) throw DomainError("offspring table needs at least two entries");
  const double c = spec.c();
  log_scale_ = nu_ < 1.0 ? std::log(c * nu_) - std::lgamma(1.0 - nu_) : 0.0;
  survivor_.resize(table_size);
  survivor_[0] = 1.0 - c;
  survivor_[1] = c * nu_;
  for (std::size_t k = 1; k + 1 < table_size; ++k) {
    survivor_[k + 1] = survivor_[k] * (static_cast<double>(k) - nu_) / static_cast<double>(k + 1);
  }
}

double OffspringSampler::survivor(std::uint64_t k) const {
  if (k < survivor_.size()) return survivor_[k];
  if (nu_ >= 1.0) return 0.0;
  const double x = static_cast<double>(k);
  return std::exp(log_scale_) * boost::math::tgamma_delta_ratio(x - nu_, 1.0 + nu_);
}

std::uint64_t OffspringSampler::invert(double u) const {
  // min{k : S(k) < u}
  const auto it = std::partition_point(survivor_.begin(), survivor_.end(),
                                       [u](double s) { return s >= u; });
  if (it != survivor_.end()) return static_cast<std::uint64_t>(it - survivor_.begin());
  std::uint64_t lo = survivor_.size() - 1;  // S(lo) >= u
  std::uint64_t hi = lo;
  do {
    lo = hi;
    hi = saturating_mul(hi, 2);
    if (hi >= kSampleCeiling) {
      if (survivor(kSampleCeiling) >= u) return kSampleCeiling;
      break;
    }
  } while (survivor(hi) >= u);
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (survivor(mid) >= u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

std::uint64_t OffspringSampler::operator()(PhiloxStream& rng) const { return invert(rng.uniform()); }

std::uint64_t OffspringSampler::above(std::uint64_t k, PhiloxStream& rng) const {
  return invert(rng.uniform() * survivor(k));
}

std::uint64_t OffspringSampler::total(std::uint64_t n, PhiloxStream& rng) const {
  std::uint64_t sum = 0;
  std::uint64_t remaining = n;
  std::uint64_t k = 0;  // every remaining individual has xi >= k
  double above_prev = 1.0;
  while (remaining > kIndividualLimit && k < survivor_.size()) {
    const double s_k = survivor_[k];
    if (above_prev <= 0.0) return sum;
    const double p = std::clamp(1.0 - s_k / above_prev, 0.0, 1.0);
    boost::random::binomial_distribution<std::int64_t, double> split(
        static_cast<std::int64_t>(remaining), p);
    const auto at_k = static_cast<std::uint64_t>(split(rng));
    sum = saturating_add(sum, saturating_mul(at_k, k));
    remaining -= at_k;
    above_prev = s_k;
    ++k;
  }
  for (std::uint64_t i = 0; i < remaining; ++i) {
    const std::uint64_t x = k == 0 ? (*this)(rng) : above(k - 1, rng);
    sum = saturating_add(sum, x);
  }
  return sum;
}

// ---------------------------------------------------------------------------

double SimResult::pmf(std::size_t j) const {
  return j < counts.size() ? static_cast<double>(counts[j]) / static_cast<double>(reps) : 0.0;
}

double SimResult::p00_hat(std::size_t k) const {
  return static_cast<double>(zero_counts.at(k)) / static_cast<double>(reps);
}

double SimResult::p00_se(std::size_t k) const {
  const double p = p00_hat(k);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

namespace {

// Exact sums of X and X^2 over a million paths overflow 64 bits.
__extension__ using u128 = unsigned __int128;

struct Partial {
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> zero_counts;
  std::uint64_t overflow = 0;
  std::uint64_t censored = 0;
  std::uint64_t uncensored = 0;
  u128 sum = 0;
  u128 sum_sq = 0;
};

}  // namespace

SimResult simulate_gwpi(const SimConfig& config) {
  if (config.replications < 1) throw DomainError("simulate_gwpi: replications must be >= 1");
  const ImmigrationSampler immigration(config.spec);
  const OffspringSampler offspring(config.spec, config.table_size);
  const std::size_t K = config.pmf_order;
  const std::size_t n = config.horizon;
  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, config.replications));

  std::vector<Partial> parts(workers);
  parallel_for(workers, workers, [&](std::size_t w) {
    Partial& part = parts[w];
    part.counts.assign(K + 1, 0);
    part.zero_counts.assign(n + 1, 0);
    for (std::size_t rep = w; rep < config.replications; rep += workers) {
      PhiloxStream rng(config.seed, rep);
      std::uint64_t x = 0;
      bool censored = false;
      ++part.zero_counts[0];
      for (std::size_t k = 0; k < n; ++k) {
        x = saturating_add(offspring.total(x, rng), immigration(rng));
        if (x > config.population_cap) {
          censored = true;
          break;
        }
        if (x == 0) ++part.zero_counts[k + 1];
      }
      if (censored) {
        ++part.censored;
        ++part.overflow;
        continue;
      }
      if (x <= K) {
        ++part.counts[x];
      } else {
        ++part.overflow;
      }
      ++part.uncensored;
      part.sum += x;
      part.sum_sq += static_cast<u128>(x) * x;
    }
  });

  SimResult out;
  out.n = n;
  out.reps = config.replications;
  out.counts.assign(K + 1, 0);
  out.zero_counts.assign(n + 1, 0);
  std::uint64_t m = 0;
  u128 sum = 0;
  u128 sum_sq = 0;
  for (const auto& part : parts) {
    for (std::size_t j = 0; j <= K; ++j) out.counts[j] += part.counts[j];
    for (std::size_t k = 0; k <= n; ++k) out.zero_counts[k] += part.zero_counts[k];
    out.overflow += part.overflow;
    out.censored_paths += part.censored;
    m += part.uncensored;
    sum += part.sum;
    sum_sq += part.sum_sq;
  }
  if (m > 0) {
    const auto md = static_cast<long double>(m);
    const long double s = static_cast<long double>(sum);
    const long double ss = static_cast<long double>(sum_sq);
    out.mean = static_cast<double>(s / md);
    if (m > 1) {
      const long double var = std::max<long double>(0.0L, (ss - s * s / md) / (md - 1.0L));
      out.mean_se = static_cast<double>(std::sqrt(var / md));
    }
  }
  if (out.censored_paths > 0) {
    log::info("simulate: {} of {} paths censored above {}", out.censored_paths, out.reps,
              config.population_cap);
  }
  return out;
}

double total_variation(const SimResult& sim, const TruncatedSeries& exact) {
  const std::size_t K = std::min(exact.order(), sim.counts.size() - 1);
  const double reps = static_cast<double>(sim.reps);
  double tv = 0.0;
  double exact_kept = 0.0;
  std::uint64_t emp_kept = 0;
  for (std::size_t j = 0; j <= K; ++j) {
    tv += std::abs(static_cast<double>(sim.counts[j]) / reps - exact[j]);
    exact_kept += exact[j];
    emp_kept += sim.counts[j];
  }
  const double emp_tail = static_cast<double>(sim.reps - emp_kept) / reps;
  tv += std::abs(emp_tail - std::max(0.0, 1.0 - exact_kept));
  return 0.5 * tv;
}

nlohmann::json to_json(const SimResult& sim) {
  std::vector<double> pmf(sim.counts.size());
  for (std::size_t j = 0; j < pmf.size(); ++j) pmf[j] = sim.pmf(j);
  return {{"n", sim.n},
          {"reps", sim.reps},
          {"p00_hat", sim.p00_hat()},
          {"se", sim.p00_se(sim.n)},
          {"pmf", pmf},
          {"overflow", static_cast<double>(sim.overflow) / static_cast<double>(sim.reps)},
          {"censored_paths", sim.censored_paths},
          {"mean", sim.mean},
          {"mean_se", sim.mean_se}};
}

void write_pmf_csv(std::ostream& out, const SimResult& sim) {
  out << "n,j,p_0j_n\n";
  for (std::size_t j = 0; j < sim.counts.size(); ++j) {
    out << fmt::format("{},{},{:.17g}\n", sim.n, j, sim.pmf(j));
  }
}

}  // namespace gwpi
