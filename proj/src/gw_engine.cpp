#include "gwpi/gw_engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "gwpi/errors.hpp"
#include "gwpi/log.hpp"
#include "gwpi/parallel.hpp"

namespace gwpi {

namespace {

void require_s(double s, const char* what) {
  if (!(s >= 0.0 && s < 1.0)) throw DomainError(fmt::format("{}: s = {} outside [0,1)", what, s));
}

void require_n(std::size_t n, const char* what) {
  if (n < 1) throw DomainError(fmt::format("{}: n must be >= 1", what));
}

double nu_power(const ModelSpec& spec, double x) { return std::pow(x, 1.0 / spec.nu()); }

// V as a function of the deficit r = 1 - s.
double v_of_deficit(const ModelSpec& spec, double r) {
  return 1.0 / (spec.nu() * std::pow(r, spec.nu()) * spec.offspring_sv()(1.0 / r));
}

// Lambda on the deficit scale, without the (0,1] range check.
double lambda_unchecked(const ModelSpec& spec, double y) {
  return std::pow(y, spec.nu()) * spec.offspring_sv()(1.0 / y);
}

}  // namespace

DeficitOrbit::DeficitOrbit(const ModelSpec& spec, double r0, int) : spec_(&spec), r_(r0) {}

DeficitOrbit::DeficitOrbit(const ModelSpec& spec, double s) : spec_(&spec), r_(1.0 - s) {
  require_s(s, "DeficitOrbit");
}

DeficitOrbit DeficitOrbit::from_deficit(const ModelSpec& spec, double r0) {
  if (!(r0 > 0.0 && r0 <= 1.0)) throw DomainError(fmt::format("deficit {} outside (0,1]", r0));
  return DeficitOrbit(spec, r0, 0);
}

double iterate_deficit(const ModelSpec& spec, std::size_t n, double s, std::size_t cap) {
  if (n > cap) throw DomainError(fmt::format("iteration count {} exceeds cap {}", n, cap));
  DeficitOrbit orbit(spec, s);
  orbit.advance_to(n);
  return orbit.deficit();
}

double iterate_f(const ModelSpec& spec, std::size_t n, double s, std::size_t cap) {
  if (n == 0) {
    require_s(s, "iterate_f");
    return s;
  }
  return 1.0 - iterate_deficit(spec, n, s, cap);
}

double survival_q(const ModelSpec& spec, std::size_t n) {
  require_n(n, "survival_q");
  return iterate_deficit(spec, n, 0.0);
}

std::vector<double> survival_trajectory(const ModelSpec& spec, std::size_t n_max) {
  std::vector<double> q;
  q.reserve(n_max + 1);
  DeficitOrbit orbit(spec, 0.0);
  q.push_back(orbit.deficit());
  while (orbit.n() < n_max) {
    orbit.step();
    q.push_back(orbit.deficit());
  }
  return q;
}

double asymp_q(const ModelSpec& spec, std::size_t n) {
  require_n(n, "asymp_q");
  const double c = spec.c();
  return std::pow(c * spec.nu() * static_cast<double>(n), -1.0 / spec.nu());
}

double n_slow_from_q(const ModelSpec& spec, std::size_t n, double q) {
  return q * nu_power(spec, spec.nu() * static_cast<double>(n));
}

double n_slow(const ModelSpec& spec, std::size_t n) {
  return n_slow_from_q(spec, n, survival_q(spec, n));
}

double n_slow_normalization(const ModelSpec& spec, std::size_t n) {
  const double N = n_slow(spec, n);
  const double arg = nu_power(spec, spec.nu() * static_cast<double>(n)) / N;
  return N * nu_power(spec, spec.offspring_sv()(arg));
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::size_t kDenseLimit = 4096;
constexpr double kGridRatio = 1.0366329284376981;  // 10^{1/64}
}  // namespace

SlowNormalizer::SlowNormalizer(const ModelSpec& spec, std::size_t cap)
    : spec_(&spec), cap_(cap), orbit_(spec, 0.0) {}

void SlowNormalizer::extend_to(std::size_t n) {
  n = std::min(n, cap_);
  auto next_point = [&]() -> std::size_t {
    if (grid_n_.empty()) return 1;
    const auto last = static_cast<std::size_t>(grid_n_.back());
    if (last < kDenseLimit) return last + 1;
    return std::max(last + 1, static_cast<std::size_t>(std::ceil(last * kGridRatio)));
  };
  while (grid_n_.empty() || static_cast<std::size_t>(grid_n_.back()) < n) {
    const std::size_t target = std::min(next_point(), cap_);
    orbit_.advance_to(target);
    grid_n_.push_back(static_cast<double>(target));
    log_N_.push_back(std::log(n_slow_from_q(*spec_, target, orbit_.deficit())));
    if (target == cap_) break;
  }
}

double SlowNormalizer::operator()(double x) {
  if (!(x >= 1.0)) throw DomainError(fmt::format("N(x): x = {} below 1", x));
  if (x >= static_cast<double>(cap_)) {
    extend_to(cap_);
    log::debug("N(x): x = {:.3e} beyond cap {}, held at N(cap)", x, cap_);
    return std::exp(log_N_.back());
  }
  extend_to(static_cast<std::size_t>(std::ceil(x)));
  const auto it = std::lower_bound(grid_n_.begin(), grid_n_.end(), x);
  const auto hi = static_cast<std::size_t>(it - grid_n_.begin());
  if (grid_n_[hi] == x || hi == 0) return std::exp(log_N_[hi]);
  const std::size_t lo = hi - 1;
  const double t = std::log(x / grid_n_[lo]) / std::log(grid_n_[hi] / grid_n_[lo]);
  return std::exp(log_N_[lo] + t * (log_N_[hi] - log_N_[lo]));
}

// ---------------------------------------------------------------------------

double u_n(const ModelSpec& spec, std::size_t n, double s) {
  require_n(n, "u_n");
  require_s(s, "u_n");
  const double q = survival_q(spec, n);
  const double r = iterate_deficit(spec, n, s);
  return spec.nu() * static_cast<double>(n) * (1.0 - r / q);
}

double script_u_n(const ModelSpec& spec, std::size_t n, double s) {
  require_n(n, "script_u_n");
  require_s(s, "script_u_n");
  DeficitOrbit q_orbit(spec, 0.0);
  q_orbit.advance_to(n - 1);
  const double q_prev = q_orbit.deficit();
  const double increment = spec.offspring_deficit(q_prev);  // f_n(0) - f_{n-1}(0)
  if (!(increment > 0.0)) throw std::logic_error("script_u_n: f_n(0) = f_{n-1}(0)");
  const double q = q_prev - increment;
  return (q - iterate_deficit(spec, n, s)) / increment;
}

double m_n(const ModelSpec& spec, std::size_t n, double s) {
  require_n(n, "m_n");
  require_s(s, "m_n");
  const double q = survival_q(spec, n);
  const double r = iterate_deficit(spec, n, s);
  return 1.0 - lambda_fn(spec, r) / lambda_fn(spec, q);
}

double v_fn(const ModelSpec& spec, double s) {
  require_s(s, "v_fn");
  return v_of_deficit(spec, 1.0 - s);
}

double u_closed(const ModelSpec& spec, double s) { return v_fn(spec, s) - v_fn(spec, 0.0); }

double abel_residual(const ModelSpec& spec, double s) {
  require_s(s, "abel_residual");
  const double r = 1.0 - s;
  const double r1 = r - spec.offspring_deficit(r);  // 1 - f(s)
  return v_of_deficit(spec, r1) - v_of_deficit(spec, r) - 1.0;
}

double eq10_check(const ModelSpec& spec, std::size_t n, double s) {
  require_n(n, "eq10_check");
  require_s(s, "eq10_check");
  const double lam0 = lambda_fn(spec, 1.0 - s);
  const double predicted = lam0 / (lam0 * spec.nu() * static_cast<double>(n) + 1.0);
  return lambda_fn(spec, iterate_deficit(spec, n, s)) / predicted;
}

double lemma1_identity(const ModelSpec& spec, std::size_t n, double s) {
  require_n(n, "lemma1_identity");
  const double q = survival_q(spec, n);
  const double N = n_slow_from_q(spec, n, q);
  const double r = iterate_deficit(spec, n, s);
  const double nun = spec.nu() * static_cast<double>(n);
  const double un = nun * (1.0 - r / q);
  return r * nu_power(spec, nun) / N + un / nun;
}

double lemma1_max_deviation(const ModelSpec& spec, const std::vector<double>& s_grid,
                            std::size_t n_max) {
  double worst = 0.0;
  for (double s : s_grid) {
    require_s(s, "lemma1_max_deviation");
    DeficitOrbit q(spec, 0.0);
    DeficitOrbit r(spec, s);
    for (std::size_t n = 1; n <= n_max; ++n) {
      q.step();
      r.step();
      const double nun = spec.nu() * static_cast<double>(n);
      const double N = n_slow_from_q(spec, n, q.deficit());
      const double un = nun * (1.0 - r.deficit() / q.deficit());
      const double value = r.deficit() * nu_power(spec, nun) / N + un / nun;
      worst = std::max(worst, std::abs(value - 1.0));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

std::vector<double> default_s_grid() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 0.999};
}

std::vector<std::size_t> default_record_points(std::size_t n_max) {
  std::vector<std::size_t> pts;
  for (std::size_t n = 1; n <= std::min<std::size_t>(10, n_max); ++n) pts.push_back(n);
  for (std::size_t decade = 10; decade <= n_max; decade *= 10) {
    for (std::size_t m : {2, 5, 10}) {
      if (decade * m <= n_max) pts.push_back(decade * m);
    }
  }
  if (pts.empty() || pts.back() != n_max) pts.push_back(n_max);
  return pts;
}

GwTrace build_gw_trace(const ModelSpec& spec, const std::vector<double>& s_grid,
                       const std::vector<std::size_t>& record_points, std::size_t workers) {
  for (double s : s_grid) require_s(s, "build_gw_trace");
  if (!std::is_sorted(record_points.begin(), record_points.end()) ||
      (!record_points.empty() && record_points.front() < 1)) {
    throw DomainError("build_gw_trace: record points must be increasing and >= 1");
  }
  GwTrace trace{s_grid, record_points, {}};
  const std::size_t G = s_grid.size();
  const std::size_t P = record_points.size();
  trace.records.resize(G * P);

  // Q_n at the record points, shared by all columns.
  std::vector<double> q_at(P);
  {
    DeficitOrbit q(spec, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
      q.advance_to(record_points[p]);
      q_at[p] = q.deficit();
    }
  }

  parallel_for(G, workers, [&](std::size_t g) {
    const double s = s_grid[g];
    const double abel = abel_residual(spec, s);
    DeficitOrbit orbit(spec, s);
    for (std::size_t p = 0; p < P; ++p) {
      const std::size_t n = record_points[p];
      orbit.advance_to(n);
      const double r = orbit.deficit();
      const double q = q_at[p];
      const double nun = spec.nu() * static_cast<double>(n);
      const double m = 1.0 - lambda_unchecked(spec, r) / lambda_unchecked(spec, q);
      trace.records[p * G + g] = GwRecord{n,
                                          s,
                                          1.0 - r,
                                          q,
                                          r,
                                          n_slow_from_q(spec, n, q),
                                          nun * (1.0 - r / q),
                                          m,
                                          static_cast<double>(n) * m,
                                          abel};
    }
  });
  return trace;
}

void write_gw_trace_csv(std::ostream& out, const GwTrace& trace) {
  out << "n,s,f_n,Q_n,R_n,N_n,U_n,M_n,nM_n,abel_residual\n";
  for (const auto& r : trace.records) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                       r.n, r.s, r.f_n, r.q_n, r.r_n, r.n_slow, r.u_n, r.m_n, r.n_m_n,
                       r.abel_residual);
  }
}

InvariantTable build_invariant_table(const ModelSpec& spec, const std::vector<double>& s_grid,
                                     const std::vector<std::size_t>& decades, double tol,
                                     bool richardson, std::size_t workers) {
  if (decades.empty()) throw DomainError("build_invariant_table: no n values");
  for (double s : s_grid) require_s(s, "build_invariant_table");
  const std::size_t G = s_grid.size();
  const std::size_t D = decades.size();
  InvariantTable table;
  table.rows.resize(G * D);
  table.converged.assign(G, false);
  if (richardson) table.richardson.assign(G, 0.0);

  std::vector<double> q_prev(D);
  std::vector<double> q_at(D);
  {
    DeficitOrbit q(spec, 0.0);
    for (std::size_t d = 0; d < D; ++d) {
      if (decades[d] < 1) throw DomainError("build_invariant_table: n must be >= 1");
      q.advance_to(decades[d] - 1);
      q_prev[d] = q.deficit();
      q.step();
      q_at[d] = q.deficit();
    }
  }

  std::vector<char> conv(G, 0);
  parallel_for(G, workers, [&](std::size_t g) {
    const double s = s_grid[g];
    const double uc = u_closed(spec, s);
    DeficitOrbit orbit(spec, s);
    for (std::size_t d = 0; d < D; ++d) {
      const std::size_t n = decades[d];
      orbit.advance_to(n);
      const double r = orbit.deficit();
      const double q = q_at[d];
      const double inc = spec.offspring_deficit(q_prev[d]);
      const double m = 1.0 - lambda_unchecked(spec, r) / lambda_unchecked(spec, q);
      table.rows[g * D + d] = InvariantRow{s,
                                           n,
                                           (q - r) / inc,
                                           static_cast<double>(n) * m,
                                           spec.nu() * static_cast<double>(n) * (1.0 - r / q),
                                           uc};
    }
    if (D >= 2) {
      const double a = table.rows[g * D + D - 2].n_m;
      const double b = table.rows[g * D + D - 1].n_m;
      conv[g] = (b == 0.0 && a == 0.0) || std::abs(b - a) <= tol * std::abs(b);
      if (richardson) {
        const double ratio = static_cast<double>(decades[D - 1]) / static_cast<double>(decades[D - 2]);
        table.richardson[g] = (ratio * b - a) / (ratio - 1.0);
      }
    } else if (richardson) {
      table.richardson[g] = table.rows[g * D].n_m;
    }
  });
  for (std::size_t g = 0; g < G; ++g) table.converged[g] = conv[g] != 0;
  return table;
}

void write_invariant_csv(std::ostream& out, const InvariantTable& table) {
  out << "s,n,script_U_n,nM_n,U_n,U_closed,rel_err_script,rel_err_nM,rel_err_U_n\n";
  auto rel = [](double x, double ref) { return ref == 0.0 ? std::abs(x) : std::abs(x / ref - 1.0); };
  for (const auto& r : table.rows) {
    out << fmt::format("{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.12e},{:.12e},{:.12e}\n", r.s,
                       r.n, r.script_u, r.n_m, r.u_n, r.u_closed, rel(r.script_u, r.u_closed),
                       rel(r.n_m, r.u_closed), rel(r.u_n, r.u_closed));
  }
}

}  // namespace gwpi
