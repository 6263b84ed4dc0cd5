#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "gwpi/errors.hpp"
#include "gwpi/gwpi_engine.hpp"
#include "gwpi/stationary.hpp"

using namespace gwpi;

namespace {
const ModelSpec kSpec = ModelSpec::default_spec();
}

TEST_CASE("pi(0) regression value") {
  const auto pi0 = stationary_pgf(kSpec, 0.0);
  CHECK(pi0.value == doctest::Approx(0.0177107265757622).epsilon(1e-12));
  CHECK(pi0.change < 1e-12);
  CHECK(std::log(pi0.value) == doctest::Approx(pi0.log_value));
}

TEST_CASE("pi(0.5) = 2 pi(0) since f(0) = h(0) = 1/2") {
  CHECK(stationary_pgf(kSpec, 0.5).value ==
        doctest::Approx(2.0 * stationary_pgf(kSpec, 0.0).value).epsilon(1e-12));
}

TEST_CASE("tolerances agree") {
  const double a = stationary_pgf(kSpec, 0.3, 1e-9).value;
  const double b = stationary_pgf(kSpec, 0.3, 1e-12).value;
  CHECK(std::abs(a / b - 1.0) < 1e-8);
}

TEST_CASE("finite products approach pi from above") {
  const double pi0 = stationary_pgf(kSpec, 0.0).value;
  double prev = HUGE_VAL;
  for (std::size_t n : {100, 1000, 10000, 100000}) {
    const double gap = transition_pgf(kSpec, 0, n, 0.0) / pi0 - 1.0;
    CHECK(gap > 0.0);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("stationarity on a grid") {
  for (double s : {0.0, 0.3, 0.6, 0.9, 0.99}) CHECK(stationarity_residual(kSpec, s) < 1e-11);
}

TEST_CASE("complex pi agrees with real pi on the real axis") {
  for (double s : {0.0, 0.2, 0.7}) {
    const auto z = stationary_pgf(kSpec, std::complex<double>(s, 0.0));
    CHECK(z.real() == doctest::Approx(stationary_pgf(kSpec, s).value).epsilon(1e-12));
    CHECK(std::abs(z.imag()) < 1e-15);
  }
  const auto w = stationary_pgf(kSpec, std::complex<double>(0.1, 0.4));
  const auto wc = stationary_pgf(kSpec, std::complex<double>(0.1, -0.4));
  CHECK(w.imag() == doctest::Approx(-wc.imag()));
}

TEST_CASE("coefficients") {
  const auto pc = stationary_coeffs(kSpec, 64);
  const auto& pi = pc.series;
  CHECK(pi.is_pgf());
  CHECK(pi[0] == doctest::Approx(stationary_pgf(kSpec, 0.0).value).epsilon(1e-10));
  for (double s : {0.2, 0.5}) {
    const auto e = evaluate(pi, s);
    CHECK(std::abs(e.value - stationary_pgf(kSpec, s).value) <= e.error_bound + 1e-10);
  }
  CHECK(coefficient_invariance_error(kSpec, pi, 20) < 1e-6);
  std::ostringstream out;
  write_stationary_csv(out, pi);
  CHECK(out.str().rfind("j,pi_j\n0,", 0) == 0);
}

TEST_CASE("non-ergodic model is refused") {
  const auto spec = ModelSpec::constant_sv(0.5, 0.5, 0.5, 0.5);
  CHECK_THROWS_AS(stationary_pgf(spec, 0.0), ConvergenceError);
}
