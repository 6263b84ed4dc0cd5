#include "gwpi/gwpi_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "gwpi/errors.hpp"
#include "gwpi/log.hpp"
#include "gwpi/parallel.hpp"
#include "gwpi/quadrature.hpp"

namespace gwpi {

namespace {

void require_s(double s, const char* what) {
  if (!(s >= 0.0 && s < 1.0)) throw DomainError(fmt::format("{}: s = {} outside [0,1)", what, s));
}

void require_ergodic(const ModelSpec& spec, const char* what) {
  if (!spec.ergodic()) {
    throw DomainError(fmt::format("{}: needs delta > nu (delta = {}, nu = {})", what,
                                  spec.delta(), spec.nu()));
  }
}

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double log_h_deficit(const ModelSpec& spec, double r) {
  const double psi = spec.immigration_deficit(r);
  if (!(psi < 1.0)) throw DomainError(fmt::format("h(f_k(s)) = {} is not positive", 1.0 - psi));
  return std::log1p(-psi);
}

// int_{r_lo}^{r_hi} g(r) dr where g(r) ~ C r^{delta-nu-1} near 0; the
// substitution r = u^p with p = 1/(delta-nu) makes the integrand bounded.
template <typename G>
double integrate_deficit(const ModelSpec& spec, G g, double r_lo, double r_hi) {
  if (r_lo == r_hi) return 0.0;
  const double p = 1.0 / (spec.delta() - spec.nu());
  const double u_lo = std::pow(r_lo, 1.0 / p);
  const double u_hi = std::pow(r_hi, 1.0 / p);
  auto integrand = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double r = std::pow(u, p);
    if (r <= 0.0) return 0.0;
    return g(r) * p * std::pow(u, p - 1.0);
  };
  QuadOptions opt;
  opt.abs_tol = 1e-12;
  opt.rel_tol = 1e-13;
  const auto res = integrate(integrand, u_lo, u_hi, opt);
  if (!res.converged) {
    throw ConvergenceError(fmt::format("quadrature on [{:.3e}, {:.3e}] stopped at error {:.3e}",
                                       r_lo, r_hi, res.error));
  }
  return res.value;
}

double ratio_integrand(const ModelSpec& spec, double r) {
  return spec.immigration_deficit(r) / spec.offspring_deficit(r);
}

}  // namespace

std::vector<std::size_t> log_spaced_points(std::size_t lo, std::size_t hi, std::size_t per_decade) {
  if (lo < 1 || hi < lo) throw DomainError(fmt::format("bad n range [{}, {}]", lo, hi));
  std::vector<std::size_t> pts;
  const double span = std::log10(static_cast<double>(hi) / static_cast<double>(lo));
  const auto steps = static_cast<std::size_t>(std::ceil(span * static_cast<double>(per_decade)));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = steps == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(steps);
    const auto n = static_cast<std::size_t>(std::llround(lo * std::pow(10.0, span * t)));
    if (pts.empty() || n > pts.back()) pts.push_back(std::min(n, hi));
  }
  if (pts.back() != hi) pts.push_back(hi);
  return pts;
}

double log_transition_pgf(const ModelSpec& spec, std::size_t i, std::size_t n, double s) {
  require_s(s, "transition_pgf");
  DeficitOrbit orbit(spec, s);
  CompensatedSum sum;
  for (std::size_t k = 0; k < n; ++k) {
    sum.add(log_h_deficit(spec, orbit.deficit()));
    orbit.step();
  }
  if (i > 0) sum.add(static_cast<double>(i) * std::log1p(-orbit.deficit()));
  return sum.value();
}

double transition_pgf(const ModelSpec& spec, std::size_t i, std::size_t n, double s) {
  return std::exp(log_transition_pgf(spec, i, n, s));
}

std::vector<double> log_transition_path(const ModelSpec& spec, double s,
                                        const std::vector<std::size_t>& points) {
  require_s(s, "log_transition_path");
  if (!std::is_sorted(points.begin(), points.end())) {
    throw DomainError("log_transition_path: points must be increasing");
  }
  std::vector<double> out;
  out.reserve(points.size());
  DeficitOrbit orbit(spec, s);
  CompensatedSum sum;
  for (std::size_t n : points) {
    while (orbit.n() < n) {
      sum.add(log_h_deficit(spec, orbit.deficit()));
      orbit.step();
    }
    out.push_back(sum.value());
  }
  return out;
}

RecursionCheck check_transition_recursion(const ModelSpec& spec, const std::vector<double>& s_grid,
                                          std::size_t n_max, std::size_t workers) {
  std::vector<RecursionCheck> per_s(s_grid.size());
  parallel_for(s_grid.size(), workers, [&](std::size_t g) {
    const double s = s_grid[g];
    require_s(s, "check_transition_recursion");
    const double fs = offspring_pgf(spec, s);
    const double log_hs = std::log(immigration_pgf(spec, s));
    DeficitOrbit a(spec, s);
    DeficitOrbit b(spec, fs);
    CompensatedSum la;  // ln P_{n+1}(s)
    CompensatedSum lb;  // ln P_n(f(s))
    la.add(log_h_deficit(spec, a.deficit()));
    a.step();
    RecursionCheck& out = per_s[g];
    out.worst_s = s;
    for (std::size_t n = 1; n <= n_max; ++n) {
      la.add(log_h_deficit(spec, a.deficit()));
      a.step();
      lb.add(log_h_deficit(spec, b.deficit()));
      b.step();
      const double err = std::abs(std::expm1(la.value() - log_hs - lb.value()));
      if (err > out.max_rel_error) {
        out.max_rel_error = err;
        out.worst_n = n;
      }
    }
  });
  RecursionCheck total;
  total.n_max = n_max;
  for (const auto& r : per_s) {
    if (r.max_rel_error >= total.max_rel_error) {
      total.max_rel_error = r.max_rel_error;
      total.worst_n = r.worst_n;
      total.worst_s = r.worst_s;
    }
  }
  return total;
}

TruncatedSeries transition_series(const ModelSpec& spec, std::size_t i, std::size_t n,
                                  const SeriesOptions& options) {
  if (n > kCoefficientModeCap) {
    throw DomainError(fmt::format("coefficient mode is limited to n <= {} (got {})",
                                  kCoefficientModeCap, n));
  }
  const std::size_t K = options.order;
  const TruncatedSeries f = offspring_coefficients(spec, K);
  const TruncatedSeries h = immigration_coefficients(spec, K);
  TruncatedSeries product = TruncatedSeries::unit(K);
  TruncatedSeries fk = TruncatedSeries::identity(K);
  for (std::size_t k = 0; k < n; ++k) {
    product = multiply(product, compose(h, fk));
    if (k + 1 < n || i > 0) fk = compose(f, fk);
  }
  if (i > 0) product = multiply(product, power(fk, i));
  if (product.tail_mass() > options.tail_tol) {
    log::warn("transition row i={} n={}: tail mass {:.3e} beyond order {}", i, n,
              product.tail_mass(), K);
  }
  return product;
}

double transition_prob(const ModelSpec& spec, std::size_t i, std::size_t j, std::size_t n,
                       std::size_t K) {
  if (j > K) throw DomainError(fmt::format("j = {} above truncation order {}", j, K));
  if (n == 0) return i == j ? 1.0 : 0.0;
  SeriesOptions opt;
  opt.order = K;
  return transition_series(spec, i, n, opt)[j];
}

double mean_conditional(double m, double a, std::size_t i, std::size_t n) {
  if (!std::isfinite(a)) throw DomainError("mean_conditional: immigration mean is infinite");
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("mean_conditional: need 0 < m < inf");
  const double nn = static_cast<double>(n);
  const double ii = static_cast<double>(i);
  if (m == 1.0) return a * nn + ii;
  const double shift = a / (m - 1.0);
  return (shift + ii) * std::pow(m, nn) - shift;
}

// ---------------------------------------------------------------------------

double thm1_integral(const ModelSpec& spec, double s, std::size_t n) {
  require_ergodic(spec, "thm1_integral");
  require_s(s, "thm1_integral");
  if (n == 0) return 0.0;
  const double r_n = iterate_deficit(spec, n, s);
  return integrate_deficit(spec, [&](double r) { return ratio_integrand(spec, r); }, r_n, 1.0 - s);
}

double thm1_integral_limit(const ModelSpec& spec, double s) {
  require_ergodic(spec, "thm1_integral_limit");
  require_s(s, "thm1_integral_limit");
  return integrate_deficit(spec, [&](double r) { return ratio_integrand(spec, r); }, 0.0, 1.0 - s);
}

double thm1_closed_form(const ModelSpec& spec, double s, std::size_t n) {
  require_ergodic(spec, "thm1_closed_form");
  require_s(s, "thm1_closed_form");
  const double e = spec.delta() - spec.nu();
  const double r_n = iterate_deficit(spec, n, s);
  return spec.lambda() / (spec.c() * e) * (std::pow(1.0 - s, e) - std::pow(r_n, e));
}

KEstimate estimate_K(const ModelSpec& spec, double s, std::size_t n_lo, std::size_t n_hi) {
  require_ergodic(spec, "estimate_K");
  require_s(s, "estimate_K");
  KEstimate est;
  est.s = s;
  est.n_lo = n_lo;
  est.n_hi = n_hi;
  est.n = log_spaced_points(n_lo, n_hi, 16);
  const auto logp = log_transition_path(spec, s, est.n);
  DeficitOrbit orbit(spec, s);
  for (std::size_t k = 0; k < est.n.size(); ++k) {
    orbit.advance_to(est.n[k]);
    const double integral = integrate_deficit(
        spec, [&](double r) { return ratio_integrand(spec, r); }, orbit.deficit(), 1.0 - s);
    est.samples.push_back(std::exp(logp[k] + integral));
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < est.n.size(); ++k) {
    if (est.n[k] * 10 >= n_hi) {
      sum += est.samples[k];
      ++count;
    }
  }
  est.value = sum / static_cast<double>(count);
  const auto [lo, hi] = std::minmax_element(est.samples.begin(), est.samples.end());
  est.drift = (*hi - *lo) / est.value;
  est.stable = est.drift <= 0.05;
  if (!est.stable) log::warn("K({}) drifts by {:.2f}% over [{}, {}]", s, 100 * est.drift, n_lo, n_hi);
  return est;
}

double corollary1_exponent(const ModelSpec& spec, std::size_t n) {
  require_ergodic(spec, "corollary1_exponent");
  const double N = n_slow(spec, n);
  const double arg = std::pow(spec.nu() * static_cast<double>(n), 1.0 / spec.nu()) / N;
  return std::pow(N, spec.nu()) / (spec.delta() - spec.nu()) * spec.immigration_sv()(arg);
}

// ---------------------------------------------------------------------------

double nu_n(const ModelSpec& spec, double s, std::size_t n, LambdaInverse reading) {
  require_s(s, "nu_n");
  const double inv = reading == LambdaInverse::reciprocal
                         ? lambda_reciprocal(spec, 1.0 - s)
                         : lambda_functional_inverse(spec, 1.0 - s);
  return spec.nu() * static_cast<double>(n) + inv;
}

double delta_n(const ModelSpec& spec, double x) {
  require_ergodic(spec, "delta_n");
  if (!(x > 0.0)) throw DomainError(fmt::format("delta_n: argument {} not positive", x));
  const double nu = spec.nu();
  const double ratio = spec.delta() / nu;
  return std::pow(x, 1.0 - ratio) / (spec.delta() - nu) -
         (1.0 + nu) / (2.0 * nu) * std::log(x) * std::pow(x, -ratio);
}

double corollary2_delta(const ModelSpec& spec, std::size_t n) {
  require_ergodic(spec, "corollary2_delta");
  if (n < 1) throw DomainError("corollary2_delta: n must be >= 1");
  const double nu = spec.nu();
  const double x = nu * static_cast<double>(n);
  const double ratio = spec.delta() / nu;
  return std::pow(x, 1.0 - ratio) / (spec.delta() - nu) -
         (1.0 + nu) / (2.0 * nu) * std::log(static_cast<double>(n)) * std::pow(x, -ratio);
}

double n_delta(const ModelSpec& spec, SlowNormalizer& normalizer, double x) {
  return std::pow(normalizer(x), spec.delta()) * spec.immigration_sv()(x);
}

Thm2Prediction thm2_predicted_pn(const ModelSpec& spec, SlowNormalizer& normalizer, double pi_s,
                                 double s, std::size_t n, LambdaInverse reading) {
  require_ergodic(spec, "thm2_predicted_pn");
  Thm2Prediction out;
  out.pi = pi_s;
  out.nu_n = nu_n(spec, s, n, reading);
  out.delta_n = delta_n(spec, out.nu_n);
  out.n_delta = n_delta(spec, normalizer, 1.0 / iterate_deficit(spec, n, s));
  out.predicted = pi_s * (1.0 + out.delta_n * out.n_delta);
  return out;
}

SlopeFit rate_slope(const ModelSpec& spec, double log_pi0, std::size_t n_lo, std::size_t n_hi,
                    std::size_t per_decade) {
  const auto pts = log_spaced_points(n_lo, n_hi, per_decade);
  const auto logp = log_transition_path(spec, 0.0, pts);
  SlopeFit fit;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double excess = std::abs(std::expm1(logp[k] - log_pi0));
    if (!(excess > 0.0)) continue;
    fit.x.push_back(std::log(spec.nu() * static_cast<double>(pts[k])));
    fit.y.push_back(std::log(excess));
  }
  const auto m = static_cast<double>(fit.x.size());
  if (fit.x.size() < 2) throw ConvergenceError("rate_slope: fewer than two usable points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < fit.x.size(); ++k) {
    sx += fit.x[k];
    sy += fit.y[k];
    sxx += fit.x[k] * fit.x[k];
    sxy += fit.x[k] * fit.y[k];
    syy += fit.y[k] * fit.y[k];
  }
  const double vx = sxx - sx * sx / m;
  const double vy = syy - sy * sy / m;
  const double cxy = sxy - sx * sy / m;
  fit.slope = cxy / vx;
  fit.intercept = (sy - fit.slope * sx) / m;
  fit.r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
  return fit;
}

// ---------------------------------------------------------------------------

double pakes_integrand(const ModelSpec& spec, double y) {
  require_s(y, "pakes_integrand");
  const double r = 1.0 - y;
  return std::log1p(-spec.immigration_deficit(r)) / spec.offspring_deficit(r);
}

LogHIntegral pakes_p1_integral(const ModelSpec& spec, std::size_t n) {
  require_ergodic(spec, "pakes_p1_integral");
  LogHIntegral out;
  if (n == 0) return out;
  DeficitOrbit orbit(spec, 0.0);
  CompensatedSum sum;
  while (orbit.n() < n) {
    const double q = orbit.deficit();
    sum.add(spec.immigration_deficit(q) * spec.offspring_deficit_derivative(q));
    orbit.step();
  }
  out.summability = sum.value();
  out.value = integrate_deficit(
      spec,
      [&](double r) { return std::log1p(-spec.immigration_deficit(r)) / spec.offspring_deficit(r); },
      orbit.deficit(), 1.0);
  return out;
}

// ---------------------------------------------------------------------------

bool AsymptoticReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

nlohmann::json to_json(const AsymptoticReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"name", e.name},
                       {"constant", e.constant},
                       {"fit_range", {e.fit_lo, e.fit_hi}},
                       {"drift", e.drift},
                       {"pass", e.pass}});
  }
  return {{"entries", entries}, {"pass", report.all_pass()}};
}

void write_gwpi_csv(std::ostream& out, const std::vector<GwpiRow>& rows) {
  out << "n,s,P_n,predicted_thm1,predicted_thm2,ratio\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.n, r.s, r.p_n,
                       r.predicted_thm1, r.predicted_thm2, r.ratio);
  }
}

void write_transition_csv(std::ostream& out, std::size_t n, const TruncatedSeries& row) {
  out << "n,j,p_0j_n\n";
  for (std::size_t j = 0; j <= row.order(); ++j) {
    out << fmt::format("{},{},{:.17g}\n", n, j, row[j]);
  }
}

}  // namespace gwpi
