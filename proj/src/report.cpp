#include "gwpi/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "gwpi/errors.hpp"
#include "gwpi/gw_engine.hpp"
#include "gwpi/parallel.hpp"
#include "gwpi/stationary.hpp"

namespace gwpi {

void write_dat(const std::filesystem::path& path, std::string_view title, std::string_view xlabel,
               std::string_view ylabel, const Curve& curve) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << fmt::format("# {}\n# {} {}\n", title, xlabel, ylabel);
  for (const auto& [x, y] : curve) out << fmt::format("{:.17g} {:.17g}\n", x, y);
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
}

Curve survival_scaling_curve(const ModelSpec& spec, std::size_t n_max) {
  Curve out;
  DeficitOrbit q(spec, 0.0);
  for (std::size_t n : default_record_points(n_max)) {
    q.advance_to(n);
    const double nn = static_cast<double>(n);
    double y = 0.0;
    if (spec.has_series()) {
      y = q.deficit() * std::pow(spec.c() * spec.nu() * nn, 1.0 / spec.nu());
    } else {
      const double N = n_slow_from_q(spec, n, q.deficit());
      const double arg = std::pow(spec.nu() * nn, 1.0 / spec.nu()) / N;
      y = N * std::pow(spec.offspring_sv()(arg), 1.0 / spec.nu());
    }
    out.emplace_back(nn, y);
  }
  return out;
}

Curve abel_residual_curve(const ModelSpec& spec) {
  Curve out;
  for (int k = 1; k <= 16; ++k) {
    const double r = std::pow(10.0, -k / 4.0);
    out.emplace_back(r, std::abs(abel_residual(spec, 1.0 - r)));
  }
  return out;
}

namespace {

double relative_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return (*hi - *lo) / std::abs(v.back());
}

}  // namespace

AsymptoticsRun run_asymptotics(const ModelSpec& spec, const AsymptoticsOptions& options) {
  const auto grid = options.s_grid.empty() ? default_s_grid() : options.s_grid;
  const std::size_t n_lo = options.n_lo;
  const std::size_t n_hi = options.n_hi;
  AsymptoticsRun run;
  auto& entries = run.report.entries;

  // Survival normalization at n_lo and n_hi.
  {
    auto scaled = [&](std::size_t n) {
      const double q = survival_q(spec, n);
      if (spec.has_series()) {
        return std::pow(q, spec.nu()) * spec.c() * spec.nu() * static_cast<double>(n);
      }
      return n_slow_normalization(spec, n);
    };
    const double a = scaled(n_lo);
    const double b = scaled(n_hi);
    entries.push_back({"survival_normalization", b, n_lo, n_hi, std::abs(b / a - 1.0),
                       std::abs(b - 1.0) < 0.1 && std::abs(b - 1.0) < std::abs(a - 1.0)});
  }

  // K(s), pi(s) and the prediction rows, one grid point per task.
  std::vector<KEstimate> ks(grid.size());
  std::vector<double> pis(grid.size());
  parallel_for(grid.size(), options.workers, [&](std::size_t g) {
    ks[g] = estimate_K(spec, grid[g], n_lo, n_hi);
    pis[g] = stationary_pgf(spec, grid[g], options.tol).value;
  });
  SlowNormalizer normalizer(spec);
  const auto pts = log_spaced_points(n_lo, n_hi, 4);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double s = grid[g];
    entries.push_back({fmt::format("K(s={})", s), ks[g].value, n_lo, n_hi, ks[g].drift,
                       ks[g].drift < 0.01});
    const auto logp = log_transition_path(spec, s, pts);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double p = std::exp(logp[k]);
      const double thm1 = ks[g].value * std::exp(-thm1_integral(spec, s, pts[k]));
      const auto thm2 = thm2_predicted_pn(spec, normalizer, pis[g], s, pts[k], options.reading);
      run.rows.push_back({pts[k], s, p, thm1, thm2.predicted, p / thm2.predicted});
      if (s == grid.front()) {
        run.thm1_ratio.emplace_back(static_cast<double>(pts[k]), p / thm1);
        run.thm2_ratio.emplace_back(static_cast<double>(pts[k]), p / thm2.predicted);
      }
    }
  }
  std::stable_sort(run.rows.begin(), run.rows.end(), [](const GwpiRow& a, const GwpiRow& b) {
    return a.n < b.n;
  });

  // Exponent of the p_00 asymptotics.
  {
    const double a = corollary1_exponent(spec, n_hi);
    const double b = corollary1_exponent(spec, 10 * n_hi);
    bool pass = std::abs(b / a - 1.0) < 0.05;
    if (spec.has_series()) {
      const double limit = spec.lambda() / (spec.c() * (spec.delta() - spec.nu()));
      pass = std::abs(b / limit - 1.0) < 0.05;
    }
    entries.push_back({"p00_exponent", b, n_hi, 10 * n_hi, std::abs(b / a - 1.0), pass});
  }

  // Rate of P_n(0) -> pi_0.
  const StationaryValue pi0 = stationary_pgf(spec, 0.0, options.tol);
  entries.push_back({"pi_0", pi0.value, pi0.n_used, pi0.n_used, pi0.change, true});
  {
    const auto fit = rate_slope(spec, pi0.log_value, n_lo, options.slope_hi);
    const double target = 1.0 - spec.delta() / spec.nu();
    entries.push_back({"rate_slope", fit.slope, n_lo, options.slope_hi,
                       std::abs(fit.slope - target), std::abs(fit.slope - target) <= 0.1});
  }

  // Constant in front of exp{int_0^{f_n(0)} ln h / (f - y)}.
  {
    std::vector<double> k1;
    const auto kpts = log_spaced_points(n_lo, n_hi, 4);
    const auto logp = log_transition_path(spec, 0.0, kpts);
    for (std::size_t k = 0; k < kpts.size(); ++k) {
      k1.push_back(std::exp(logp[k] - pakes_p1_integral(spec, kpts[k]).value));
    }
    const double drift = relative_spread(k1);
    entries.push_back({"log_h_integral_constant", k1.back(), n_lo, n_hi, drift, drift < 0.01});
  }

  // Delta_n prediction: the ratio should move toward 1.
  {
    const double first = std::abs(run.thm2_ratio.front().second - 1.0);
    const double last = std::abs(run.thm2_ratio.back().second - 1.0);
    entries.push_back({"rate_prediction_ratio", run.thm2_ratio.back().second, n_lo, n_hi, last,
                       last <= first});
  }
  return run;
}

}  // namespace gwpi
