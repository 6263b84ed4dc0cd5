#pragma once

// Output helpers shared by the CLI commands: gnuplot-ready two-column .dat
// files and the assembled asymptotic comparison for a spec.

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <utility>
#include <vector>

#include "gwpi/gwpi_engine.hpp"
#include "gwpi/sv_models.hpp"

namespace gwpi {

using Curve = std::vector<std::pair<double, double>>;

/// "# title" and "# xlabel ylabel" comment lines, then "x y" rows, 17 digits.
void write_dat(const std::filesystem::path& path, std::string_view title, std::string_view xlabel,
               std::string_view ylabel, const Curve& curve);

/// Creates the directory if needed; ConfigError if that fails.
void ensure_directory(const std::filesystem::path& dir);

/// (n, Q_n (c nu n)^{1/nu}) at the default record points; in analytic mode
/// the normalized N(n) L^{1/nu}(...) is used instead.
Curve survival_scaling_curve(const ModelSpec& spec, std::size_t n_max);

/// (1 - s, |abel_residual(s)|) for 1 - s = 10^{-k/4}, k = 1..16.
Curve abel_residual_curve(const ModelSpec& spec);

struct AsymptoticsOptions {
  std::vector<double> s_grid;
  std::size_t n_lo = 1000;
  std::size_t n_hi = 10000;
  std::size_t slope_hi = 100000;
  double tol = 1e-12;
  LambdaInverse reading = LambdaInverse::reciprocal;
  std::size_t workers = 1;
};

struct AsymptoticsRun {
  AsymptoticReport report;
  std::vector<GwpiRow> rows;
  Curve thm1_ratio;  ///< (n, P_n(0) / (K(0) exp(-integral))) over the fit range
  Curve thm2_ratio;  ///< (n, P_n(0) / predicted) over the fit range
};

/// K(s) per grid point, the p_00 exponent, the rate slope, the constant of
/// the ln h integral form and the Delta_n prediction ratio.
AsymptoticsRun run_asymptotics(const ModelSpec& spec, const AsymptoticsOptions& options);

}  // namespace gwpi
