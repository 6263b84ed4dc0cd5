#pragma once

// Exact iteration of the immigration-free process and the limit objects
// built from it: survival probabilities Q_n, the slowly varying normalizer
// N(n), the three estimators of the invariant-measure PGF U(s), and the
// closed form U(s) = V(s) - V(0) with V(s) = 1 / (nu Lambda(1-s)).
//
// All iteration runs on the deficit R_n(s) = 1 - f_n(s) via
//   R_{k+1} = R_k - R_k^{1+nu} L(1/R_k),
// which keeps relative precision when Q_n is of order 1e-8 or smaller.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "gwpi/sv_models.hpp"

namespace gwpi {

inline constexpr std::size_t kDefaultIterationCap = 10'000'000;

/// Deficit orbit r_0 = 1 - s, r_{k+1} = r_k - offspring_deficit(r_k).
/// Holds a pointer to the ModelSpec, which must outlive the orbit.
class DeficitOrbit {
 public:
  DeficitOrbit(const ModelSpec& spec, double s);
  static DeficitOrbit from_deficit(const ModelSpec& spec, double r0);

  void step() {
    r_ -= spec_->offspring_deficit(r_);
    ++n_;
  }
  void advance_to(std::size_t n) {
    while (n_ < n) step();
  }

  std::size_t n() const noexcept { return n_; }
  double deficit() const noexcept { return r_; }
  double value() const noexcept { return 1.0 - r_; }

 private:
  DeficitOrbit(const ModelSpec& spec, double r0, int);

  const ModelSpec* spec_;
  std::size_t n_ = 0;
  double r_;
};

/// f_n(s); throws DomainError when n exceeds cap.
double iterate_f(const ModelSpec& spec, std::size_t n, double s,
                 std::size_t cap = kDefaultIterationCap);
/// R_n(s) = 1 - f_n(s), computed without cancellation.
double iterate_deficit(const ModelSpec& spec, std::size_t n, double s,
                       std::size_t cap = kDefaultIterationCap);

/// Q_n = R_n(0).
double survival_q(const ModelSpec& spec, std::size_t n);
/// Q_0 .. Q_{n_max} in one pass.
std::vector<double> survival_trajectory(const ModelSpec& spec, std::size_t n_max);
/// (c nu n)^{-1/nu}: the survival asymptotics inverted for constant L.
double asymp_q(const ModelSpec& spec, std::size_t n);

/// N(n) = Q_n (nu n)^{1/nu}.
double n_slow(const ModelSpec& spec, std::size_t n);
double n_slow_from_q(const ModelSpec& spec, std::size_t n, double q);
/// N(n) L^{1/nu}((nu n)^{1/nu} / N(n)); tends to 1.
double n_slow_normalization(const ModelSpec& spec, std::size_t n);

/// Slowly varying extension of N to real arguments x >= 1: exact values on
/// integers up to 4096, then a log-spaced table (64 points per decade)
/// interpolated linearly in log-log coordinates. Arguments beyond `cap` are
/// held at N(cap). Not thread-safe: the table grows on demand.
class SlowNormalizer {
 public:
  explicit SlowNormalizer(const ModelSpec& spec, std::size_t cap = kDefaultIterationCap);
  double operator()(double x);
  std::size_t cap() const noexcept { return cap_; }

 private:
  void extend_to(std::size_t n);

  const ModelSpec* spec_;
  std::size_t cap_;
  DeficitOrbit orbit_;
  std::vector<double> grid_n_;   // increasing sample points
  std::vector<double> log_N_;    // log N at grid_n_
};

/// U_n(s) = nu n (1 - R_n(s) / Q_n).
double u_n(const ModelSpec& spec, std::size_t n, double s);
/// (f_n(s) - f_n(0)) / (f_n(0) - f_{n-1}(0)).
double script_u_n(const ModelSpec& spec, std::size_t n, double s);
/// 1 - Lambda(R_n(s)) / Lambda(Q_n).
double m_n(const ModelSpec& spec, std::size_t n, double s);
/// V(s) = 1 / (nu Lambda(1 - s)).
double v_fn(const ModelSpec& spec, double s);
/// U(s) = V(s) - V(0).
double u_closed(const ModelSpec& spec, double s);
/// U(f(s)) - U(s) - 1, evaluated in the deficit coordinate.
double abel_residual(const ModelSpec& spec, double s);
/// Lambda(R_n(s)) / [Lambda(1-s) / (Lambda(1-s) nu n + 1)].
double eq10_check(const ModelSpec& spec, std::size_t n, double s);
/// R_n(s) (nu n)^{1/nu} / N(n) + U_n(s) / (nu n); identically 1.
double lemma1_identity(const ModelSpec& spec, std::size_t n, double s);
/// max over grid s and 1 <= n <= n_max of |lemma1_identity - 1|, in one pass per s.
double lemma1_max_deviation(const ModelSpec& spec, const std::vector<double>& s_grid,
                            std::size_t n_max);

/// {0, 0.1, ..., 0.9, 0.99, 0.999}.
std::vector<double> default_s_grid();
/// 1..10, then 20, 50, 100, 200, 500, ... up to n_max (always included).
std::vector<std::size_t> default_record_points(std::size_t n_max);

struct GwRecord {
  std::size_t n;
  double s;
  double f_n;
  double q_n;
  double r_n;
  double n_slow;
  double u_n;
  double m_n;
  double n_m_n;
  double abel_residual;
};

struct GwTrace {
  std::vector<double> s_grid;
  std::vector<std::size_t> record_points;
  /// Ordered by n, then by grid position.
  std::vector<GwRecord> records;
};

/// One sequential n-pass per grid point, grid points spread over `workers`.
GwTrace build_gw_trace(const ModelSpec& spec, const std::vector<double>& s_grid,
                       const std::vector<std::size_t>& record_points, std::size_t workers = 1);

/// Header: n,s,f_n,Q_n,R_n,N_n,U_n,M_n,nM_n,abel_residual
void write_gw_trace_csv(std::ostream& out, const GwTrace& trace);

struct InvariantRow {
  double s;
  std::size_t n;
  double script_u;  ///< Slack ratio
  double n_m;       ///< n * M_n(s)
  double u_n;       ///< U_n(s)
  double u_closed;
};

struct InvariantTable {
  std::vector<InvariantRow> rows;  ///< ordered by s, then n
  /// Per grid point: successive-decade relative change of n*M_n below tol.
  std::vector<bool> converged;
  /// Per grid point: Richardson-extrapolated n*M_n (first-order in 1/n), when requested.
  std::vector<double> richardson;
};

InvariantTable build_invariant_table(const ModelSpec& spec, const std::vector<double>& s_grid,
                                     const std::vector<std::size_t>& decades, double tol = 1e-3,
                                     bool richardson = false, std::size_t workers = 1);
void write_invariant_csv(std::ostream& out, const InvariantTable& table);

}  // namespace gwpi
