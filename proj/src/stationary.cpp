#include "gwpi/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "gwpi/errors.hpp"
#include "gwpi/log.hpp"
#include "gwpi/parallel.hpp"
#include "gwpi/quadrature.hpp"

namespace gwpi {

namespace {

using cplx = std::complex<double>;

struct RealLaws {
  const ModelSpec& spec;
  double phi(double r) const { return spec.offspring_deficit(r); }
  double dphi(double r) const { return spec.offspring_deficit_derivative(r); }
  double d2phi(double r) const { return spec.offspring_deficit_second_derivative(r); }
  double psi(double r) const { return spec.immigration_deficit(r); }
  double dpsi(double r) const { return spec.immigration_deficit_derivative(r); }
  static double log1m(double x) { return std::log1p(-x); }
};

struct ComplexLaws {
  double nu, c, delta, lambda;
  cplx phi(cplx r) const { return c * std::pow(r, 1.0 + nu); }
  cplx dphi(cplx r) const { return c * (1.0 + nu) * std::pow(r, nu); }
  cplx d2phi(cplx r) const { return c * (1.0 + nu) * nu * std::pow(r, nu - 1.0); }
  cplx psi(cplx r) const { return lambda * std::pow(r, delta); }
  cplx dpsi(cplx r) const { return lambda * delta * std::pow(r, delta - 1.0); }
  // ln(1 - x) without cancellation for small |x|.
  static cplx log1m(cplx x) {
    const double a = x.real();
    const double b = x.imag();
    return {0.5 * std::log1p(-2.0 * a + a * a + b * b), std::atan2(-b, 1.0 - a)};
  }
};

// sum_{k>=0} G(r_k) for the orbit started at r, with G = ln(1 - psi).
// Beyond the exact part, Euler-Maclaurin on the interpolating flow
// dr/dt = V(r), V = D - D D'/2 + D D'^2/3 + D^2 D''/12, D = -phi.
template <typename T, typename Laws>
class LogProduct {
 public:
  LogProduct(Laws laws, T r0, double exponent_gap) : laws_(laws), r_(r0), gap_(exponent_gap) {}

  void advance_to(std::size_t n) {
    while (n_ < n) {
      const T psi = laws_.psi(r_);
      if constexpr (std::is_same_v<T, double>) {
        if (!(psi < 1.0)) throw DomainError("h(f_k(s)) is not positive");
      }
      add(Laws::log1m(psi));
      r_ -= laws_.phi(r_);
      ++n_;
    }
  }

  T estimate() const { return sum_ + comp_ + tail(r_); }
  std::size_t n() const { return n_; }

 private:
  void add(T x) {
    const T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  T flow(T r) const {
    const T d = -laws_.phi(r);
    const T d1 = -laws_.dphi(r);
    const T d2 = -laws_.d2phi(r);
    return d - 0.5 * d * d1 + d * d1 * d1 / 3.0 + d * d * d2 / 12.0;
  }

  T tail(T rn) const {
    const double p = 1.0 / gap_;
    auto integrand = [&](double u) -> T {
      if (u <= 0.0) return T{};
      const double up = std::pow(u, p);
      if (up <= 0.0) return T{};
      const T r = rn * up;
      return Laws::log1m(laws_.psi(r)) / (-flow(r)) * rn * p * (up / u);
    };
    QuadOptions opt;
    opt.abs_tol = 1e-15;
    opt.rel_tol = 1e-14;
    const auto res = integrate(integrand, 0.0, 1.0, opt);
    const T psi = laws_.psi(rn);
    const T g = Laws::log1m(psi);
    const T dg = -laws_.dpsi(rn) / (1.0 - psi);
    return res.value + 0.5 * g - dg * flow(rn) / 12.0;
  }

  Laws laws_;
  T r_;
  double gap_;
  std::size_t n_ = 0;
  T sum_{};
  T comp_{};
};

template <typename T, typename Laws>
std::pair<T, StationaryValue> run_doubling(Laws laws, T r0, double gap, double tol,
                                           std::size_t n_cap) {
  if (!(tol > 0.0)) throw DomainError("stationary: tol must be positive");
  LogProduct<T, Laws> lp(laws, r0, gap);
  std::size_t n = std::min(kStationaryStart, n_cap);
  lp.advance_to(n);
  T prev = lp.estimate();
  while (true) {
    const std::size_t next = 2 * n;
    if (next > n_cap) {
      throw ConvergenceError(fmt::format(
          "stationary product did not settle to {:.1e} within {} terms", tol, n_cap));
    }
    lp.advance_to(next);
    const T cur = lp.estimate();
    const double change = std::abs(cur - prev);
    if (change < tol) {
      StationaryValue info;
      info.n_used = next;
      info.change = change;
      return {cur, info};
    }
    prev = cur;
    n = next;
  }
}

void require_ergodic(const ModelSpec& spec) {
  if (!spec.ergodic()) {
    throw ConvergenceError(fmt::format(
        "no stationary law: delta = {} does not exceed nu = {}", spec.delta(), spec.nu()));
  }
}

}  // namespace

StationaryValue stationary_pgf(const ModelSpec& spec, double s, double tol, std::size_t n_cap) {
  if (!(s >= 0.0 && s < 1.0)) throw DomainError(fmt::format("stationary_pgf: s = {} outside [0,1)", s));
  require_ergodic(spec);
  auto [log_pi, info] =
      run_doubling<double>(RealLaws{spec}, 1.0 - s, spec.delta() - spec.nu(), tol, n_cap);
  info.log_value = log_pi;
  info.value = std::exp(log_pi);
  log::debug("pi({}) = {:.15g} after {} terms", s, info.value, info.n_used);
  return info;
}

cplx stationary_pgf(const ModelSpec& spec, cplx z, double tol, std::size_t n_cap) {
  if (!(std::abs(z) < 1.0)) throw DomainError("stationary_pgf: |z| must be below 1");
  require_ergodic(spec);
  ComplexLaws laws{spec.nu(), spec.c(), spec.delta(), spec.lambda()};
  auto [log_pi, info] = run_doubling<cplx>(laws, 1.0 - z, spec.delta() - spec.nu(), tol, n_cap);
  return std::exp(log_pi);
}

double stationarity_residual(const ModelSpec& spec, double s, double tol) {
  const double pi_s = stationary_pgf(spec, s, tol).value;
  const double pi_fs = stationary_pgf(spec, offspring_pgf(spec, s), tol).value;
  return std::abs(pi_s - immigration_pgf(spec, s) * pi_fs);
}

StationaryCoeffs stationary_coeffs(const ModelSpec& spec, std::size_t K, double tol,
                                   std::size_t workers) {
  if (K < 1) throw DomainError("stationary_coeffs: K must be >= 1");
  require_ergodic(spec);
  const std::size_t M = 8 * K;
  const double rho = std::pow(10.0, -3.0 / static_cast<double>(K));
  const std::size_t half = M / 2;
  std::vector<cplx> values(half + 1);
  parallel_for(half + 1, workers, [&](std::size_t m) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(M);
    values[m] = stationary_pgf(spec, std::polar(rho, theta), tol);
  });

  std::vector<double> pi(K + 1);
  parallel_for(K + 1, workers, [&](std::size_t j) {
    // Real part of sum over the full circle, using pi(conj z) = conj pi(z).
    double acc = values[0].real() + values[half].real() * (j % 2 == 0 ? 1.0 : -1.0);
    for (std::size_t m = 1; m < half; ++m) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((j * m) % M) /
                           static_cast<double>(M);
      acc += 2.0 * (values[m] * std::polar(1.0, phase)).real();
    }
    pi[j] = acc / (static_cast<double>(M) * std::pow(rho, static_cast<double>(j)));
  });

  StationaryCoeffs out{TruncatedSeries(0), rho, M, 0.0};
  double sum = 0.0;
  for (double& v : pi) {
    if (v < 0.0) {
      out.max_clamped = std::max(out.max_clamped, -v);
      v = 0.0;
    }
    sum += v;
  }
  if (out.max_clamped > 1e-10) {
    log::warn("stationary coefficients: clamped a negative value of size {:.3e}", out.max_clamped);
  }
  out.series = TruncatedSeries(std::move(pi), std::max(0.0, 1.0 - sum), SeriesMode::pgf);
  return out;
}

double coefficient_invariance_error(const ModelSpec& spec, const TruncatedSeries& pi,
                                    std::size_t j_max) {
  const std::size_t K = pi.order();
  if (j_max > K) throw DomainError("coefficient_invariance_error: j_max above order");
  const auto f = offspring_coefficients(spec, K);
  const auto h = immigration_coefficients(spec, K);
  ComposeOptions quiet;
  quiet.tail_warning = 1.0;
  const auto image = multiply(h, compose(pi, f, quiet));
  double worst = 0.0;
  for (std::size_t j = 0; j <= j_max; ++j) worst = std::max(worst, std::abs(image[j] - pi[j]));
  return worst;
}

void write_stationary_csv(std::ostream& out, const TruncatedSeries& pi) {
  out << "j,pi_j\n";
  for (std::size_t j = 0; j <= pi.order(); ++j) out << fmt::format("{},{:.17g}\n", j, pi[j]);
}

}  // namespace gwpi
