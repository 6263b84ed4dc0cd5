#pragma once

// Stationary law of the ergodic process (delta > nu):
//
//   pi(s) = prod_{k>=0} h(f_k(s)) = lim_n P_n^{(0)}(s).
//
// The product is summed exactly up to N terms; the remaining terms are
// replaced by an Euler-Maclaurin estimate along the flow that interpolates
// the deficit map r -> r - Phi(r). N doubles until ln pi changes by less
// than tol. Coefficients pi_j come from a discrete Cauchy integral of the
// complex-valued pi(z) on a circle of radius rho < 1.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "gwpi/series.hpp"
#include "gwpi/sv_models.hpp"

namespace gwpi {

inline constexpr std::size_t kStationaryStart = 1024;
inline constexpr std::size_t kStationaryCap = std::size_t{1} << 24;

struct StationaryValue {
  double value = 0.0;
  double log_value = 0.0;
  std::size_t n_used = 0;  ///< exact product terms at acceptance
  double change = 0.0;     ///< |ln pi_{N} - ln pi_{N/2}| at acceptance
};

/// ConvergenceError when delta <= nu or when N reaches n_cap before the
/// change drops below tol.
StationaryValue stationary_pgf(const ModelSpec& spec, double s, double tol = 1e-12,
                               std::size_t n_cap = kStationaryCap);

/// pi(z) for complex |z| < 1, constant family only.
std::complex<double> stationary_pgf(const ModelSpec& spec, std::complex<double> z,
                                    double tol = 1e-12, std::size_t n_cap = kStationaryCap);

/// |pi(s) - h(s) pi(f(s))|, each side computed independently.
double stationarity_residual(const ModelSpec& spec, double s, double tol = 1e-12);

struct StationaryCoeffs {
  TruncatedSeries series;  ///< pi_0 .. pi_K in PGF mode
  double radius = 0.0;
  std::size_t points = 0;
  double max_clamped = 0.0;  ///< largest negative value set to zero
};

/// pi_0 .. pi_K from M = 8K equispaced samples of pi(z) on |z| = 10^{-3/K}.
StationaryCoeffs stationary_coeffs(const ModelSpec& spec, std::size_t K, double tol = 1e-12,
                                   std::size_t workers = 1);

/// max_{j <= j_max} |sum_i pi_i p_ij - pi_j| using the one-step row
/// h(s) pi(f(s)) built from truncated series.
double coefficient_invariance_error(const ModelSpec& spec, const TruncatedSeries& pi,
                                    std::size_t j_max);

/// Header: j,pi_j
void write_stationary_csv(std::ostream& out, const TruncatedSeries& pi);

}  // namespace gwpi
