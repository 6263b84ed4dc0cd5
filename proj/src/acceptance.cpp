#include "gwpi/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "gwpi/gw_engine.hpp"
#include "gwpi/gwpi_engine.hpp"
#include "gwpi/mc_oracle.hpp"
#include "gwpi/stationary.hpp"

namespace gwpi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] < v[k - 1])) return false;
  }
  return true;
}

std::string join(const std::vector<double>& v, const char* fmt_spec = "{:.4g}") {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += fmt::format(fmt::runtime(fmt_spec), v[k]);
  }
  return out;
}

CriterionResult survival_rate(const AcceptanceOptions& o) {
  CriterionResult r{1, "survival probability scaling Q_n^nu c nu n -> 1", false, "", 0};
  const auto t0 = Clock::now();
  const auto& spec = o.spec;
  const std::vector<std::size_t> ns = {1000, 10000, 100000, 1000000};
  DeficitOrbit q(spec, 0.0);
  std::vector<double> v;
  std::vector<double> err;
  for (std::size_t n : ns) {
    q.advance_to(n);
    v.push_back(std::pow(q.deficit(), spec.nu()) * spec.c() * spec.nu() * static_cast<double>(n));
    err.push_back(std::abs(v.back() - 1.0));
  }
  r.seconds = seconds_since(t0);
  r.pass = err[1] < 0.1 && strictly_decreasing(err) && r.seconds < 1.0;
  r.detail = fmt::format("values at n=1e3..1e6: {}", join(v, "{:.6f}"));
  return r;
}

CriterionResult normalizer_identity(const AcceptanceOptions& o) {
  CriterionResult r{2, "identity R_n (nu n)^{1/nu} / N(n) + U_n / (nu n) = 1", false, "", 0};
  const auto t0 = Clock::now();
  const double dev = lemma1_max_deviation(o.spec, default_s_grid(), 10000);
  r.seconds = seconds_since(t0);
  r.pass = dev < 1e-12;
  r.detail = fmt::format("max deviation {:.3e} over the grid, n <= 1e4", dev);
  return r;
}

CriterionResult invariant_measure(const AcceptanceOptions& o) {
  CriterionResult r{3, "n M_n(s) / U(s) -> 1", false, "", 0};
  const auto t0 = Clock::now();
  const std::vector<double> grid = {0.3, 0.6, 0.9};
  const std::vector<std::size_t> ns = {100, 1000, 10000};
  const auto table = build_invariant_table(o.spec, grid, ns, 1e-3, false, o.workers);
  bool pass = true;
  std::string detail;
  // The Slack ratio converges to the exact Abel solution on its own, so its
  // distance to n M_n separates iteration error from the closed form's.
  double spread = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> err;
    for (std::size_t d = 0; d < ns.size(); ++d) {
      const auto& row = table.rows[g * ns.size() + d];
      err.push_back(std::abs(row.n_m / row.u_closed - 1.0));
    }
    const auto& last = table.rows[g * ns.size() + ns.size() - 1];
    spread = std::max(spread, std::abs(last.n_m / last.script_u - 1.0));
    pass = pass && err.back() < 0.05 && strictly_decreasing(err);
    detail += fmt::format("{}s={}: {}", g ? "; " : "", grid[g], join(err, "{:.3e}"));
  }
  r.seconds = seconds_since(t0);
  r.pass = pass;
  r.detail = fmt::format("relative error at n=1e2,1e3,1e4 {} (n M_n vs Slack ratio at 1e4: {:.2e})",
                         detail, spread);
  return r;
}

CriterionResult abel_equation(const AcceptanceOptions& o) {
  CriterionResult r{4, "Abel equation residual <= C (1-s)^nu", false, "", 0};
  const auto t0 = Clock::now();
  const std::vector<double> ss = {0.9, 0.99, 0.999, 0.9999};
  std::vector<double> res;
  std::vector<double> cs;
  double log_sum = 0.0;
  for (double s : ss) {
    res.push_back(std::abs(abel_residual(o.spec, s)));
    cs.push_back(res.back() / std::pow(1.0 - s, o.spec.nu()));
    log_sum += std::log(cs.back());
  }
  const double C = std::exp(log_sum / static_cast<double>(cs.size()));
  double worst = 0.0;
  for (double c : cs) worst = std::max(worst, std::abs(c / C - 1.0));
  r.seconds = seconds_since(t0);
  r.pass = worst <= 0.1 && res[2] < res[1] && res[1] < res[0];
  r.detail = fmt::format("C = {:.6f}, max deviation {:.2f}%, residuals {}", C, 100 * worst,
                         join(res, "{:.4e}"));
  return r;
}

CriterionResult lambda_iterates(const AcceptanceOptions& o) {
  CriterionResult r{5, "Lambda(R_n(s)) against Lambda(1-s) / (Lambda(1-s) nu n + 1)", false, "", 0};
  const auto t0 = Clock::now();
  const double a = eq10_check(o.spec, 10000, 0.0);
  const double b = eq10_check(o.spec, 10000, 0.5);
  r.seconds = seconds_since(t0);
  r.pass = std::abs(a - 1.0) < 0.05 && std::abs(b - 1.0) < 0.05;
  r.detail = fmt::format("ratio at n=1e4: s=0 {:.6f}, s=0.5 {:.6f}", a, b);
  return r;
}

CriterionResult recursion(const AcceptanceOptions& o) {
  CriterionResult r{6, "P_{n+1}(s) = h(s) P_n(f(s))", false, "", 0};
  const auto t0 = Clock::now();
  const auto check = check_transition_recursion(o.spec, default_s_grid(), 10000, o.workers);
  r.seconds = seconds_since(t0);
  r.pass = check.max_rel_error < 1e-12;
  r.detail = fmt::format("max relative error {:.3e} (n={}, s={})", check.max_rel_error,
                         check.worst_n, check.worst_s);
  return r;
}

CriterionResult log_integral(const AcceptanceOptions& o) {
  CriterionResult r{7, "K(s) = P_n(s) exp{int (1-h)/(f-y)} is stable", false, "", 0};
  const auto t0 = Clock::now();
  const auto& spec = o.spec;
  double worst_drift = 0.0;
  double worst_gap = 0.0;
  std::string ks;
  for (double s : {0.0, 0.5}) {
    const auto k = estimate_K(spec, s, 1000, 10000);
    worst_drift = std::max(worst_drift, k.drift);
    ks += fmt::format("{}K({})={:.8f} drift {:.2e}", ks.empty() ? "" : ", ", s, k.value, k.drift);
    for (std::size_t n : {1000, 10000}) {
      worst_gap = std::max(worst_gap, std::abs(thm1_integral(spec, s, n) - thm1_closed_form(spec, s, n)));
    }
    const double limit = spec.lambda() / (spec.c() * (spec.delta() - spec.nu())) *
                         std::pow(1.0 - s, spec.delta() - spec.nu());
    worst_gap = std::max(worst_gap, std::abs(thm1_integral_limit(spec, s) - limit));
  }
  r.seconds = seconds_since(t0);
  r.pass = worst_drift < 0.01 && worst_gap < 1e-8 && r.seconds < 10.0;
  r.detail = fmt::format("{}; quadrature vs closed form {:.2e}", ks, worst_gap);
  return r;
}

CriterionResult p00_exponent(const AcceptanceOptions& o) {
  CriterionResult r{8, "exponent N^nu ell(.) / (delta - nu) -> lambda / (c (delta - nu))", false,
                    "", 0};
  const auto t0 = Clock::now();
  const double value = corollary1_exponent(o.spec, 100000);
  const double limit = o.spec.lambda() / (o.spec.c() * (o.spec.delta() - o.spec.nu()));
  r.seconds = seconds_since(t0);
  r.pass = std::abs(value / limit - 1.0) < 0.05;
  r.detail = fmt::format("value at n=1e5 {:.6f}, limit {:.6f}", value, limit);
  return r;
}

CriterionResult rate(const AcceptanceOptions& o) {
  CriterionResult r{9, "slope of ln|P_n(0)/pi_0 - 1| against ln(nu n)", false, "", 0};
  const auto t0 = Clock::now();
  const auto pi0 = stationary_pgf(o.spec, 0.0, 1e-13);
  const auto fit = rate_slope(o.spec, pi0.log_value, 1000, 100000);
  const double target = 1.0 - o.spec.delta() / o.spec.nu();
  r.seconds = seconds_since(t0);
  r.pass = std::abs(fit.slope - target) <= 0.1 && r.seconds < 30.0;
  r.detail = fmt::format("slope {:.4f} (target {:.4f}, r^2 {:.5f}), pi_0 = {:.15g}", fit.slope,
                         target, fit.r2, pi0.value);
  return r;
}

CriterionResult stationarity(const AcceptanceOptions& o) {
  CriterionResult r{10, "stationary law: pi(s) = h(s) pi(f(s)) and pi P = pi", false, "", 0};
  const auto t0 = Clock::now();
  const auto& spec = o.spec;
  double worst = 0.0;
  for (double s : default_s_grid()) worst = std::max(worst, stationarity_residual(spec, s, 1e-12));
  const std::size_t K = 256;
  const auto coeffs = stationary_coeffs(spec, K, 1e-12, o.workers);
  const double inv = coefficient_invariance_error(spec, coeffs.series, 20);
  const double pi0 = stationary_pgf(spec, 0.0, 1e-12).value;
  const double gap0 = std::abs(coeffs.series[0] - pi0);
  r.seconds = seconds_since(t0);
  r.pass = worst < 1e-8 && inv < 1e-6 && gap0 < 1e-8;
  r.detail = fmt::format(
      "functional residual {:.2e}; coefficient invariance (j<=20, K={}) {:.2e}; "
      "|pi_0 coefficient - pi(0)| {:.2e}",
      worst, K, inv, gap0);
  return r;
}

CriterionResult monte_carlo(const AcceptanceOptions& o) {
  CriterionResult r{11, "Monte Carlo law of X_20 and p_00^(2) against exact values", false, "", 0};
  const auto t0 = Clock::now();
  const auto& spec = o.spec;
  SimConfig cfg;
  cfg.spec = spec;
  cfg.replications = o.reps;
  cfg.horizon = 20;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.pmf_order = 1024;
  const auto sim = simulate_gwpi(cfg);
  SeriesOptions so;
  so.order = 1024;
  so.tail_tol = 1.0;
  const auto exact = transition_series(spec, 0, 20, so);
  const double tv_graded = total_variation(sim, exact.truncated(256));
  const double tv_full = total_variation(sim, exact);
  // p_00^(2) = h(0) h(f(0)) with f(0) = c.
  const double target = (1.0 - spec.lambda()) *
                        (1.0 - spec.lambda() * std::pow(1.0 - spec.c(), spec.delta()));
  const double p2 = sim.p00_hat(2);
  const double se = sim.p00_se(2);
  r.seconds = seconds_since(t0);
  r.pass = tv_graded < 0.005 && std::abs(p2 - target) <= 3.0 * se && r.seconds < 120.0;
  r.detail = fmt::format(
      "TV {:.5f} on 0..256 plus tail (on 0..1024 plus tail: {:.5f}); p_00^(2) {:.6f} vs {:.6f} "
      "({:.2f} SE); {} censored",
      tv_graded, tv_full, p2, target, std::abs(p2 - target) / se, sim.censored_paths);
  return r;
}

CriterionResult conditional_mean(const AcceptanceOptions& o) {
  CriterionResult r{12, "Monte Carlo mean of X_10 with finite immigration mean", false, "", 0};
  const auto t0 = Clock::now();
  SimConfig cfg;
  cfg.spec = ModelSpec::constant_sv(o.spec.nu(), o.spec.c(), 1.0, 0.5);
  cfg.replications = o.reps;
  cfg.horizon = 10;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.pmf_order = 64;
  const auto sim = simulate_gwpi(cfg);
  const double target = mean_conditional(cfg.spec.offspring_mean(), cfg.spec.immigration_mean(), 0, 10);
  r.seconds = seconds_since(t0);
  r.pass = std::abs(sim.mean - target) <= 3.0 * sim.mean_se;
  r.detail = fmt::format("mean {:.5f} +- {:.5f} vs {:.5f} ({:.2f} SE)", sim.mean, sim.mean_se,
                         target, std::abs(sim.mean - target) / sim.mean_se);
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  using Check = std::function<CriterionResult(const AcceptanceOptions&)>;
  const std::vector<Check> checks = {survival_rate, normalizer_identity, invariant_measure,
                                     abel_equation, lambda_iterates,     recursion,
                                     log_integral,  p00_exponent,        rate,
                                     stationarity,  monte_carlo,         conditional_mean};
  std::vector<CriterionResult> out;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
      continue;
    }
    try {
      out.push_back(checks[k](options));
    } catch (const std::exception& e) {
      out.push_back({id, "criterion " + std::to_string(id), false,
                     std::string("error: ") + e.what(), 0.0});
    }
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  return fmt::format("[{}] {:>2}  {} ({:.2f} s): {}", r.pass ? "PASS" : "FAIL", r.id, r.title,
                     r.seconds, r.detail);
}

nlohmann::json to_json(const std::vector<CriterionResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const auto& r : results) {
    arr.push_back({{"id", r.id},
                   {"title", r.title},
                   {"pass", r.pass},
                   {"detail", r.detail},
                   {"seconds", r.seconds}});
    all = all && r.pass;
  }
  return {{"criteria", arr}, {"pass", all}};
}

}  // namespace gwpi
