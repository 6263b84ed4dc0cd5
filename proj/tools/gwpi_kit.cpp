// gwpi_kit: command-line front end for the gwpi library.
//
// Exit codes: 0 success, 1 configuration or input error, 2 verification
// failure, 3 numerical non-convergence.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gwpi/acceptance.hpp"
#include "gwpi/config.hpp"
#include "gwpi/errors.hpp"
#include "gwpi/gw_engine.hpp"
#include "gwpi/gwpi_engine.hpp"
#include "gwpi/mc_oracle.hpp"
#include "gwpi/report.hpp"
#include "gwpi/stationary.hpp"

namespace {

using namespace gwpi;

constexpr int kExitConfig = 1;
constexpr int kExitVerify = 2;
constexpr int kExitConvergence = 3;

struct Flags {
  std::string model;
  std::string out;
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::size_t nmax = 0;
  std::size_t K = 0;
  std::string s_grid;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t n = 0;
  std::size_t reps = 0;
  bool richardson = false;
  bool functional_inverse = false;
  std::vector<int> only;

  std::vector<CLI::Option*> given;
};

struct Overrides {
  CLI::Option* out = nullptr;
  CLI::Option* workers = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* tol = nullptr;
  CLI::Option* nmax = nullptr;
  CLI::Option* K = nullptr;
  CLI::Option* s_grid = nullptr;
  CLI::Option* i = nullptr;
  CLI::Option* j = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* reps = nullptr;
  CLI::Option* richardson = nullptr;
  CLI::Option* functional_inverse = nullptr;
};

void add_common(CLI::App* cmd, Flags& f, Overrides& o) {
  cmd->add_option("--model", f.model, "Config file with [model] and optional [run] sections");
  o.out = cmd->add_option("--out", f.out, "Output directory");
  o.workers = cmd->add_option("--workers", f.workers, "Worker threads")->check(CLI::Range(1, 1024));
  o.seed = cmd->add_option("--seed", f.seed, "Random seed");
  o.tol = cmd->add_option("--tol", f.tol, "Tolerance");
  o.nmax = cmd->add_option("--nmax", f.nmax, "Largest n");
  o.K = cmd->add_option("--K", f.K, "Series truncation order");
}

bool set(const CLI::Option* opt) { return opt != nullptr && opt->count() > 0; }

RunConfig resolve(const Flags& f, const Overrides& o) {
  RunConfig cfg = f.model.empty() ? RunConfig{} : load_config(f.model);
  if (set(o.out)) cfg.out_dir = f.out;
  if (set(o.workers)) cfg.workers = f.workers;
  if (set(o.seed)) cfg.seed = f.seed;
  if (set(o.tol)) cfg.tol = f.tol;
  if (set(o.nmax)) cfg.nmax = f.nmax;
  if (set(o.K)) cfg.K = f.K;
  if (set(o.s_grid)) cfg.s_grid = parse_grid(f.s_grid);
  if (set(o.i)) cfg.i = f.i;
  if (set(o.j)) cfg.j = f.j;
  if (set(o.n)) cfg.n = f.n;
  if (set(o.reps)) cfg.reps = f.reps;
  if (set(o.richardson)) cfg.richardson = f.richardson;
  if (set(o.functional_inverse)) cfg.functional_inverse = f.functional_inverse;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

int cmd_survival(const RunConfig& cfg) {
  const ModelSpec spec = cfg.model.build();
  ensure_directory(cfg.out_dir);
  const auto trace =
      build_gw_trace(spec, cfg.grid(), default_record_points(cfg.nmax), cfg.workers);
  auto csv = open_out(cfg.out_dir / "gw_trace.csv");
  write_gw_trace_csv(csv, trace);
  const auto scaling = survival_scaling_curve(spec, cfg.nmax);
  write_dat(cfg.out_dir / "survival_scaling.dat", "normalized survival probability", "n",
            "Q_n*(c*nu*n)^(1/nu)", scaling);
  write_dat(cfg.out_dir / "abel_residual.dat", "Abel equation residual", "1-s",
            "|U(f(s))-U(s)-1|", abel_residual_curve(spec));
  fmt::print("Q_{} = {:.17g}\n", cfg.nmax, survival_q(spec, cfg.nmax));
  fmt::print("normalized Q_{} = {:.17g}\n", cfg.nmax, scaling.back().second);
  fmt::print("wrote {}\n", (cfg.out_dir / "gw_trace.csv").string());
  return 0;
}

int cmd_invariant(const RunConfig& cfg) {
  const ModelSpec spec = cfg.model.build();
  ensure_directory(cfg.out_dir);
  std::vector<std::size_t> ns;
  for (std::size_t n = 10; n <= cfg.nmax; n *= 10) ns.push_back(n);
  if (ns.empty() || ns.back() != cfg.nmax) ns.push_back(cfg.nmax);
  const auto grid = cfg.grid();
  const double tol = cfg.tol < 1e-3 ? 1e-3 : cfg.tol;
  const auto table = build_invariant_table(spec, grid, ns, tol, cfg.richardson, cfg.workers);
  auto csv = open_out(cfg.out_dir / "invariant.csv");
  write_invariant_csv(csv, table);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& last = table.rows[g * ns.size() + ns.size() - 1];
    fmt::print("s={:<8} U={:.12g} nM_n={:.12g} converged={}", grid[g], last.u_closed, last.n_m,
               table.converged[g] ? "yes" : "no");
    if (cfg.richardson) fmt::print(" richardson={:.12g}", table.richardson[g]);
    fmt::print("\n");
  }
  return 0;
}

int cmd_transition(const RunConfig& cfg, bool write_csv) {
  const ModelSpec spec = cfg.model.build();
  if (cfg.j > cfg.K) throw ConfigError(fmt::format("j = {} exceeds K = {}", cfg.j, cfg.K));
  SeriesOptions opt;
  opt.order = cfg.K;
  const auto row = transition_series(spec, cfg.i, cfg.n, opt);
  fmt::print("{:.17g}\n", row[cfg.j]);
  if (write_csv) {
    ensure_directory(cfg.out_dir);
    auto csv = open_out(cfg.out_dir / "transition.csv");
    write_transition_csv(csv, cfg.n, row);
  }
  return 0;
}

int cmd_stationary(const RunConfig& cfg) {
  const ModelSpec spec = cfg.model.build();
  ensure_directory(cfg.out_dir);
  const auto coeffs = stationary_coeffs(spec, cfg.K, cfg.tol, cfg.workers);
  auto csv = open_out(cfg.out_dir / "stationary_coeffs.csv");
  write_stationary_csv(csv, coeffs.series);
  auto res = open_out(cfg.out_dir / "stationary_residuals.csv");
  res << "s,pi,h_pi_f,residual,n_used\n";
  double worst = 0.0;
  for (double s : cfg.grid()) {
    const auto pi = stationary_pgf(spec, s, cfg.tol);
    const double image =
        immigration_pgf(spec, s) * stationary_pgf(spec, offspring_pgf(spec, s), cfg.tol).value;
    const double r = std::abs(pi.value - image);
    worst = std::max(worst, r);
    res << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{}\n", s, pi.value, image, r, pi.n_used);
  }
  fmt::print("pi(0) = {:.17g}\n", stationary_pgf(spec, 0.0, cfg.tol).value);
  fmt::print("sum of pi_0..pi_{} = {:.17g}\n", cfg.K, coeffs.series.stored_mass());
  fmt::print("max residual = {:.3e} (10*tol = {:.1e})\n", worst, 10 * cfg.tol);
  return 0;
}

int cmd_asymptotics(const RunConfig& cfg) {
  const ModelSpec spec = cfg.model.build();
  ensure_directory(cfg.out_dir);
  AsymptoticsOptions opt;
  opt.s_grid = cfg.grid();
  opt.n_hi = std::max<std::size_t>(cfg.nmax, 100);
  opt.n_lo = opt.n_hi / 10;
  opt.slope_hi = 10 * opt.n_hi;
  opt.tol = cfg.tol;
  opt.workers = cfg.workers;
  opt.reading = cfg.functional_inverse ? LambdaInverse::functional : LambdaInverse::reciprocal;
  const auto run = run_asymptotics(spec, opt);
  auto json = open_out(cfg.out_dir / "asymptotics.json");
  json << to_json(run.report).dump(2) << "\n";
  auto csv = open_out(cfg.out_dir / "gwpi.csv");
  write_gwpi_csv(csv, run.rows);
  write_dat(cfg.out_dir / "thm1_ratio.dat", "P_n(s) over K(s) exp(-integral)", "n", "ratio",
            run.thm1_ratio);
  write_dat(cfg.out_dir / "thm2_ratio.dat", "P_n(s) over pi(s)(1 + Delta_n N_delta)", "n", "ratio",
            run.thm2_ratio);
  for (const auto& e : run.report.entries) {
    fmt::print("[{}] {:<26} {:.12g} drift {:.3e} on [{}, {}]\n", e.pass ? "PASS" : "FAIL", e.name,
               e.constant, e.drift, e.fit_lo, e.fit_hi);
  }
  return run.report.all_pass() ? 0 : kExitVerify;
}

int cmd_simulate(const RunConfig& cfg) {
  ensure_directory(cfg.out_dir);
  SimConfig sc;
  sc.spec = cfg.model.build();
  sc.replications = cfg.reps;
  sc.horizon = cfg.horizon;
  sc.seed = cfg.seed;
  sc.workers = cfg.workers;
  sc.table_size = cfg.table_size;
  sc.pmf_order = cfg.K;
  const auto sim = simulate_gwpi(sc);
  auto json = open_out(cfg.out_dir / "mc_summary.json");
  json << to_json(sim).dump(2) << "\n";
  auto csv = open_out(cfg.out_dir / "mc_pmf.csv");
  write_pmf_csv(csv, sim);
  fmt::print("n = {}, reps = {}\n", sim.n, sim.reps);
  fmt::print("p00_hat = {:.12g} (se {:.3e})\n", sim.p00_hat(), sim.p00_se(sim.n));
  fmt::print("mean = {:.12g} (se {:.3e}), censored paths = {}\n", sim.mean, sim.mean_se,
             sim.censored_paths);
  return 0;
}

int cmd_verify(const RunConfig& cfg, const std::vector<int>& only) {
  AcceptanceOptions opt;
  opt.spec = cfg.model.build();
  opt.workers = cfg.workers;
  opt.seed = cfg.seed;
  opt.reps = cfg.reps;
  opt.only = only;
  const auto results = run_acceptance(opt);
  bool all = true;
  for (const auto& r : results) {
    fmt::print("{}\n", format_result(r));
    std::fflush(stdout);
    all = all && r.pass;
  }
  ensure_directory(cfg.out_dir);
  auto json = open_out(cfg.out_dir / "acceptance.json");
  json << to_json(results).dump(2) << "\n";
  fmt::print("{}\n", all ? "all criteria passed" : "some criteria failed");
  return all ? 0 : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and Monte Carlo computations for critical branching processes with immigration"};
  app.require_subcommand(1);
  Flags f;

  Overrides o_survival, o_invariant, o_transition, o_stationary, o_asym, o_sim, o_verify;
  auto* survival = app.add_subcommand("survival", "Survival probabilities and GW trace CSV");
  add_common(survival, f, o_survival);
  o_survival.s_grid = survival->add_option("--s-grid", f.s_grid, "Comma separated s values");

  auto* invariant = app.add_subcommand("invariant", "Invariant measure estimators table");
  add_common(invariant, f, o_invariant);
  o_invariant.s_grid = invariant->add_option("--s-grid", f.s_grid, "Comma separated s values");
  o_invariant.richardson = invariant->add_flag("--richardson", f.richardson, "Add extrapolated column");

  auto* transition = app.add_subcommand("transition", "Transition probability p_ij^(n)");
  add_common(transition, f, o_transition);
  o_transition.i = transition->add_option("--i", f.i, "Initial state");
  o_transition.j = transition->add_option("--j", f.j, "Target state");
  o_transition.n = transition->add_option("--n", f.n, "Steps (at most 1000)");

  auto* stationary = app.add_subcommand("stationary", "Stationary law coefficients and residuals");
  add_common(stationary, f, o_stationary);
  o_stationary.s_grid = stationary->add_option("--s-grid", f.s_grid, "Comma separated s values");

  auto* asym = app.add_subcommand("asymptotics", "Asymptotic constants and prediction ratios");
  add_common(asym, f, o_asym);
  o_asym.s_grid = asym->add_option("--s-grid", f.s_grid, "Comma separated s values");
  o_asym.functional_inverse =
      asym->add_flag("--functional-inverse", f.functional_inverse, "Read Lambda^{-1} as inverse function");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo law of X_n from X_0 = 0");
  add_common(simulate, f, o_sim);
  o_sim.reps = simulate->add_option("--reps", f.reps, "Replications");
  o_sim.n = simulate->add_option("--n", f.n, "Horizon");

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  add_common(verify, f, o_verify);
  o_verify.reps = verify->add_option("--reps", f.reps, "Monte Carlo replications");
  verify->add_option("--only", f.only, "Criterion ids to run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (survival->parsed()) return cmd_survival(resolve(f, o_survival));
    if (invariant->parsed()) return cmd_invariant(resolve(f, o_invariant));
    if (transition->parsed()) {
      return cmd_transition(resolve(f, o_transition), set(o_transition.out));
    }
    if (stationary->parsed()) return cmd_stationary(resolve(f, o_stationary));
    if (asym->parsed()) return cmd_asymptotics(resolve(f, o_asym));
    if (simulate->parsed()) {
      RunConfig cfg = resolve(f, o_sim);
      if (set(o_sim.n)) cfg.horizon = f.n;
      return cmd_simulate(cfg);
    }
    if (verify->parsed()) return cmd_verify(resolve(f, o_verify), f.only);
  } catch (const ConvergenceError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitConvergence;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
