#include "gwpi/sv_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "gwpi/errors.hpp"

namespace gwpi {

namespace {

double default_gauge(double x) { return 1.0 / std::log(std::numbers::e + x); }

void require_unit_interval(double s, const char* what) {
  if (!(s >= 0.0 && s < 1.0)) throw DomainError(fmt::format("{}: s = {} outside [0,1)", what, s));
}

// Central difference in log-scale for analytic-mode derivatives.
template <typename F>
double log_scale_derivative(F&& g, double r, double eps) {
  const double up = r * (1.0 + eps);
  const double dn = r * (1.0 - eps);
  return (g(up) - g(dn)) / (up - dn);
}

}  // namespace

SlowlyVaryingFn::SlowlyVaryingFn(std::string label, Function eval, Function gauge)
    : label_(std::move(label)), eval_(std::move(eval)), gauge_(std::move(gauge)) {}

SlowlyVaryingFn SlowlyVaryingFn::constant(double value) {
  SlowlyVaryingFn fn(fmt::format("const({})", value), [value](double) { return value; },
                     default_gauge);
  fn.constant_ = value;
  return fn;
}

SlowlyVaryingFn SlowlyVaryingFn::logarithmic(double scale) {
  return SlowlyVaryingFn(fmt::format("{}*(1+ln x)", scale),
                         [scale](double x) { return scale * (1.0 + std::log(x)); },
                         default_gauge);
}

SlowlyVaryingFn SlowlyVaryingFn::power_corrected(double scale, double weight, double rate) {
  return SlowlyVaryingFn(
      fmt::format("{}*(1+{}*x^-{})", scale, weight, rate),
      [=](double x) { return scale * (1.0 + weight * std::pow(x, -rate)); }, default_gauge);
}

// ---------------------------------------------------------------------------

ModelSpec::ModelSpec(double nu, SlowlyVaryingFn L, double delta, SlowlyVaryingFn ell,
                     Family family)
    : nu_(nu),
      delta_(delta),
      offspring_sv_(std::move(L)),
      immigration_sv_(std::move(ell)),
      family_(family) {}

ModelSpec ModelSpec::constant_sv(double nu, double c, double delta, double lambda) {
  if (!(nu > 0.0 && nu <= 1.0)) throw ModelError(fmt::format("nu = {} outside (0,1]", nu));
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ModelError(fmt::format("delta = {} outside (0,1]", delta));
  }
  // f'(s) = 1 - c(1+nu)(1-s)^nu >= 0 on [0,1] and p_0 = c > 0.
  if (!(c > 0.0 && c <= 1.0 / (1.0 + nu))) {
    throw ModelError(fmt::format("c = {} outside (0, 1/(1+nu)] = (0, {}]", c, 1.0 / (1.0 + nu)));
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw ModelError(fmt::format("lambda = {} outside (0,1]", lambda));
  }
  return ModelSpec(nu, SlowlyVaryingFn::constant(c), delta, SlowlyVaryingFn::constant(lambda),
                   Family::constant_sv);
}

ModelSpec ModelSpec::analytic(double nu, SlowlyVaryingFn offspring_sv, double delta,
                              SlowlyVaryingFn immigration_sv) {
  if (!(nu > 0.0 && nu <= 1.0)) throw ModelError(fmt::format("nu = {} outside (0,1]", nu));
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ModelError(fmt::format("delta = {} outside (0,1]", delta));
  }
  ModelSpec spec(nu, std::move(offspring_sv), delta, std::move(immigration_sv), Family::analytic);
  if (!(spec.offspring_sv_(1.0) > 0.0)) throw ModelError("analytic model: f(0) = L(1) must be > 0");
  for (int i = 0; i < 400; ++i) {
    const double s = 1.0 - std::pow(10.0, -8.0 * i / 399.0);
    const double f = offspring_pgf(spec, s);
    const double h = immigration_pgf(spec, s);
    if (!(f >= 0.0 && f <= 1.0) || !(h >= 0.0 && h <= 1.0)) {
      throw ModelError(fmt::format("analytic model leaves [0,1] at s = {}: f = {}, h = {}", s, f, h));
    }
  }
  return spec;
}

ModelSpec ModelSpec::default_spec() { return constant_sv(0.5, 0.5, 0.75, 0.5); }

double ModelSpec::c() const {
  if (!offspring_sv_.constant_value()) throw FamilyError("offspring SV function is not constant");
  return *offspring_sv_.constant_value();
}

double ModelSpec::lambda() const {
  if (!immigration_sv_.constant_value()) {
    throw FamilyError("immigration SV function is not constant");
  }
  return *immigration_sv_.constant_value();
}

double ModelSpec::immigration_mean() const {
  if (delta_ < 1.0 || !immigration_sv_.constant_value()) {
    return std::numeric_limits<double>::infinity();
  }
  return *immigration_sv_.constant_value();
}

double ModelSpec::offspring_b() const {
  if (nu_ < 1.0 || !offspring_sv_.constant_value()) return std::numeric_limits<double>::infinity();
  // f(s) = s + c(1-s)^2, f'' = 2c.
  return *offspring_sv_.constant_value();
}

double ModelSpec::offspring_deficit(double r) const {
  return std::pow(r, 1.0 + nu_) * offspring_sv_(1.0 / r);
}

double ModelSpec::offspring_deficit_derivative(double r) const {
  if (auto c = offspring_sv_.constant_value()) return *c * (1.0 + nu_) * std::pow(r, nu_);
  return log_scale_derivative([this](double x) { return offspring_deficit(x); }, r, 1e-5);
}

double ModelSpec::offspring_deficit_second_derivative(double r) const {
  if (auto c = offspring_sv_.constant_value()) {
    return *c * (1.0 + nu_) * nu_ * std::pow(r, nu_ - 1.0);
  }
  return log_scale_derivative([this](double x) { return offspring_deficit_derivative(x); }, r,
                              1e-4);
}

double ModelSpec::immigration_deficit(double r) const {
  return std::pow(r, delta_) * immigration_sv_(1.0 / r);
}

double ModelSpec::immigration_deficit_derivative(double r) const {
  if (auto l = immigration_sv_.constant_value()) return *l * delta_ * std::pow(r, delta_ - 1.0);
  return log_scale_derivative([this](double x) { return immigration_deficit(x); }, r, 1e-5);
}

// ---------------------------------------------------------------------------

double offspring_pgf(const ModelSpec& spec, double s) {
  require_unit_interval(s, "offspring_pgf");
  return s + spec.offspring_deficit(1.0 - s);
}

double immigration_pgf(const ModelSpec& spec, double s) {
  require_unit_interval(s, "immigration_pgf");
  return 1.0 - spec.immigration_deficit(1.0 - s);
}

double offspring_survivor(const ModelSpec& spec, std::size_t k) {
  const double c = spec.c();
  const double nu = spec.nu();
  if (k == 0) return 1.0 - c;
  // S(1) = c nu, S(k+1) = S(k) (k - nu) / (k + 1).
  double S = c * nu;
  for (std::size_t j = 1; j < k; ++j) S *= (static_cast<double>(j) - nu) / static_cast<double>(j + 1);
  return S;
}

TruncatedSeries offspring_coefficients(const ModelSpec& spec, std::size_t K) {
  if (!spec.has_series()) throw FamilyError("offspring_coefficients: analytic family has no series form");
  if (K < 2) throw DomainError("offspring_coefficients: K must be >= 2");
  const double c = spec.c();
  const double nu = spec.nu();
  std::vector<double> p(K + 1, 0.0);
  p[0] = c;
  p[1] = 1.0 - c * (1.0 + nu);
  // p_j = S(j-1) (1+nu) / j, where S is the survivor function.
  double S = c * nu;
  for (std::size_t j = 2; j <= K; ++j) {
    p[j] = S * (1.0 + nu) / static_cast<double>(j);
    S *= (static_cast<double>(j) - 1.0 - nu) / static_cast<double>(j);
  }
  return TruncatedSeries(std::move(p), S, SeriesMode::pgf);
}

TruncatedSeries immigration_coefficients(const ModelSpec& spec, std::size_t K) {
  if (!spec.has_series()) {
    throw FamilyError("immigration_coefficients: analytic family has no series form");
  }
  if (K < 1) throw DomainError("immigration_coefficients: K must be >= 1");
  const double lambda = spec.lambda();
  const double delta = spec.delta();
  std::vector<double> h(K + 1, 0.0);
  h[0] = 1.0 - lambda;
  // T(k) = P(Sibuya > k); h_j = lambda T(j-1) delta / j.
  double T = 1.0;
  for (std::size_t j = 1; j <= K; ++j) {
    h[j] = lambda * T * delta / static_cast<double>(j);
    T *= (static_cast<double>(j) - delta) / static_cast<double>(j);
  }
  return TruncatedSeries(std::move(h), lambda * T, SeriesMode::pgf);
}

double lambda_fn(const ModelSpec& spec, double y) {
  if (!(y > 0.0 && y <= 1.0)) throw DomainError(fmt::format("Lambda: y = {} outside (0,1]", y));
  return std::pow(y, spec.nu()) * spec.offspring_sv()(1.0 / y);
}

double lambda_reciprocal(const ModelSpec& spec, double y) { return 1.0 / lambda_fn(spec, y); }

double lambda_functional_inverse(const ModelSpec& spec, double z) {
  if (!(z > 0.0)) throw DomainError(fmt::format("Lambda inverse: z = {} must be positive", z));
  if (auto c = spec.offspring_sv().constant_value()) return std::pow(z / *c, 1.0 / spec.nu());
  if (z > lambda_fn(spec, 1.0)) {
    throw DomainError(fmt::format("Lambda inverse: z = {} above Lambda(1)", z));
  }
  // Bisection in log y on (1e-300, 1].
  double lo = -690.0;
  double hi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lambda_fn(spec, std::exp(mid)) < z) lo = mid; else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

RemainderReport validate_sv_remainder(const SlowlyVaryingFn& fn, double exponent) {
  RemainderReport rep;
  rep.label = fn.label();
  rep.exponent = exponent;
  for (int i = 0; i <= 32; ++i) {
    const double x = std::pow(10.0, i / 4.0);
    const double L = fn(x);
    const double alpha = fn(2.0 * x) / L - 1.0;
    rep.x.push_back(x);
    rep.ratio.push_back(std::abs(alpha) * std::pow(x, exponent) / L);
    if (x <= 10.0) rep.first_decade_max = std::max(rep.first_decade_max, rep.ratio.back());
    if (x >= 1e7) {
      rep.top_decade_max = std::max(rep.top_decade_max, rep.ratio.back());
      rep.top_decade_gauge_max = std::max(rep.top_decade_gauge_max, std::abs(alpha) / fn.gauge(x));
    }
  }

  // Plain slow variation along a doubling grid.
  rep.slowly_varying = true;
  for (double k : {0.5, 2.0, 10.0}) {
    double first = -1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double x = 1e3; x <= 1e12; x *= 1e3) {
      const double dev = std::abs(fn(k * x) / fn(x) - 1.0);
      if (first < 0.0) first = dev;
      if (dev > prev + 1e-15) rep.slowly_varying = false;
      prev = dev;
    }
    if (prev > 0.0 && prev > 0.5 * first) rep.slowly_varying = false;
  }

  // Pass: the ratio vanishes identically, or it decreases over the top two
  // decades and has dropped well below its grid maximum.
  const double grid_max = *std::max_element(rep.ratio.begin(), rep.ratio.end());
  bool decreasing = true;
  for (std::size_t i = rep.ratio.size() - 9; i < rep.ratio.size(); ++i) {
    if (rep.ratio[i] > rep.ratio[i - 1] * (1.0 + 1e-9) + 1e-300) decreasing = false;
  }
  rep.passed = rep.slowly_varying &&
               (rep.top_decade_max <= 1e-12 || (decreasing && rep.top_decade_max < 0.1 * grid_max));
  return rep;
}

RemainderReport validate_sv_remainder(const ModelSpec& spec, RemainderMode mode) {
  return mode == RemainderMode::alpha_offspring
             ? validate_sv_remainder(spec.offspring_sv(), spec.nu())
             : validate_sv_remainder(spec.immigration_sv(), spec.delta());
}

}  // namespace gwpi
