#pragma once

// Exact finite-n quantities for the process with immigration started from
// state i:
//
//   P_n^{(i)}(s) = f_n(s)^i * prod_{k<n} h(f_k(s)),
//
// in pointwise (log-space) and truncated-series form, together with the
// asymptotic predictions they are compared against: the log-integral
// representation and its constant K(s), the exponent of the p_00
// asymptotics, the rate correction Delta_n and the integral form with
// ln h in the numerator.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwpi/gw_engine.hpp"
#include "gwpi/series.hpp"
#include "gwpi/sv_models.hpp"

namespace gwpi {

inline constexpr std::size_t kCoefficientModeCap = 1000;

/// Roughly `per_decade` geometrically spaced integers from lo to hi, both included.
std::vector<std::size_t> log_spaced_points(std::size_t lo, std::size_t hi, std::size_t per_decade);

/// ln P_n^{(i)}(s), accumulated with compensated summation. DomainError if
/// some factor h(f_k(s)) is not positive.
double log_transition_pgf(const ModelSpec& spec, std::size_t i, std::size_t n, double s);
double transition_pgf(const ModelSpec& spec, std::size_t i, std::size_t n, double s);

/// ln P_n^{(0)}(s) for every n in `points` (increasing), from a single orbit.
std::vector<double> log_transition_path(const ModelSpec& spec, double s,
                                        const std::vector<std::size_t>& points);

struct RecursionCheck {
  std::size_t n_max = 0;
  double max_rel_error = 0.0;
  std::size_t worst_n = 0;
  double worst_s = 0.0;
};

/// max over n < n_max and grid s of |P_{n+1}(s) / (h(s) P_n(f(s))) - 1|, with
/// f(s) and h(s) taken from the pointwise PGFs.
RecursionCheck check_transition_recursion(const ModelSpec& spec, const std::vector<double>& s_grid,
                                          std::size_t n_max, std::size_t workers = 1);

struct SeriesOptions {
  std::size_t order = kDefaultTruncation;
  /// Warn when the accumulated tail mass of the result exceeds this.
  double tail_tol = 0.05;
};

/// Coefficients p_{i0}^{(n)} .. p_{iK}^{(n)} as a PGF-mode series. Requires
/// the constant family and n <= 1000.
TruncatedSeries transition_series(const ModelSpec& spec, std::size_t i, std::size_t n,
                                  const SeriesOptions& options = {});
double transition_prob(const ModelSpec& spec, std::size_t i, std::size_t j, std::size_t n,
                       std::size_t K = kDefaultTruncation);

/// E[X_n | X_0 = i] for offspring mean m and immigration mean a.
/// DomainError when a is not finite or m is not positive.
double mean_conditional(double m, double a, std::size_t i, std::size_t n);

// ---------------------------------------------------------------------------
// Log-integral representation and the constant K(s)

/// int_s^{f_n(s)} (1 - h(y)) / (f(y) - y) dy by adaptive quadrature.
/// Requires delta > nu. ConvergenceError if quadrature fails.
double thm1_integral(const ModelSpec& spec, double s, std::size_t n);
/// Same integral with n = infinity.
double thm1_integral_limit(const ModelSpec& spec, double s);
/// lambda / (c (delta - nu)) [(1-s)^{delta-nu} - R_n(s)^{delta-nu}]; constant family only.
double thm1_closed_form(const ModelSpec& spec, double s, std::size_t n);

struct KEstimate {
  double s = 0.0;
  double value = 0.0;  ///< mean of P_n(s) exp(integral) over the last decade
  std::size_t n_lo = 0;
  std::size_t n_hi = 0;
  double drift = 0.0;  ///< (max - min) / value over all sampled n in [n_lo, n_hi]
  bool stable = false; ///< drift <= 5%
  std::vector<std::size_t> n;
  std::vector<double> samples;
};

/// Samples P_n(s) exp{thm1_integral(s, n)} at 16 log-spaced n per decade.
KEstimate estimate_K(const ModelSpec& spec, double s, std::size_t n_lo, std::size_t n_hi);

/// N^nu(n) / (delta - nu) * ell((nu n)^{1/nu} / N(n)).
double corollary1_exponent(const ModelSpec& spec, std::size_t n);

// ---------------------------------------------------------------------------
// Rate of convergence to the stationary law

enum class LambdaInverse { reciprocal, functional };

/// nu n + Lambda^{-1}(1 - s).
double nu_n(const ModelSpec& spec, double s, std::size_t n,
            LambdaInverse reading = LambdaInverse::reciprocal);
/// (1/(delta-nu)) x^{1-delta/nu} - ((1+nu)/(2 nu)) ln(x) x^{-delta/nu}.
double delta_n(const ModelSpec& spec, double x);
/// Same display with x = nu n and ln n in place of ln x.
double corollary2_delta(const ModelSpec& spec, std::size_t n);
/// N(x)^delta ell(x).
double n_delta(const ModelSpec& spec, SlowNormalizer& normalizer, double x);

struct Thm2Prediction {
  double pi = 0.0;
  double nu_n = 0.0;
  double delta_n = 0.0;
  double n_delta = 0.0;
  double predicted = 0.0;
};

/// pi(s) (1 + Delta_n(s) N_delta(1 / R_n(s))). pi(s) is supplied by the caller.
Thm2Prediction thm2_predicted_pn(const ModelSpec& spec, SlowNormalizer& normalizer, double pi_s,
                                 double s, std::size_t n,
                                 LambdaInverse reading = LambdaInverse::reciprocal);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> x;  ///< ln(nu n)
  std::vector<double> y;  ///< ln|P_n(0)/pi_0 - 1|
};

/// Least squares slope of ln|P_n(0)/pi_0 - 1| against ln(nu n) at
/// `per_decade` log-spaced n in [n_lo, n_hi].
SlopeFit rate_slope(const ModelSpec& spec, double log_pi0, std::size_t n_lo, std::size_t n_hi,
                    std::size_t per_decade = 8);

// ---------------------------------------------------------------------------
// Integral of ln h(y) / (f(y) - y)

struct LogHIntegral {
  double value = 0.0;        ///< int_0^{f_n(0)} ln h(y) / (f(y) - y) dy
  double summability = 0.0;  ///< sum_{m<n} (1 - h(f_m(0))) (1 - f'(f_m(0)))
};

LogHIntegral pakes_p1_integral(const ModelSpec& spec, std::size_t n);
/// ln h(y) / (f(y) - y).
double pakes_integrand(const ModelSpec& spec, double y);

// ---------------------------------------------------------------------------
// Reports and exports

struct AsymptoticEntry {
  std::string name;
  double constant = 0.0;
  std::size_t fit_lo = 0;
  std::size_t fit_hi = 0;
  double drift = 0.0;
  bool pass = false;
};

struct AsymptoticReport {
  std::vector<AsymptoticEntry> entries;
  bool all_pass() const;
};

nlohmann::json to_json(const AsymptoticReport& report);

struct GwpiRow {
  std::size_t n;
  double s;
  double p_n;
  double predicted_thm1;
  double predicted_thm2;
  double ratio;  ///< p_n / predicted_thm2
};

/// Header: n,s,P_n,predicted_thm1,predicted_thm2,ratio
void write_gwpi_csv(std::ostream& out, const std::vector<GwpiRow>& rows);
/// Header: n,j,p_0j_n
void write_transition_csv(std::ostream& out, std::size_t n, const TruncatedSeries& row);

}  // namespace gwpi
