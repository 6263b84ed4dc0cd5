#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "gwpi/errors.hpp"
#include "gwpi/gwpi_engine.hpp"

using namespace gwpi;

namespace {

const ModelSpec kSpec = ModelSpec::default_spec();

// Direct product f_n(s)^i * prod h(f_k(s)) with no log space or deficits.
double naive_pgf(const ModelSpec& spec, std::size_t i, std::size_t n, double s) {
  double p = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    p *= immigration_pgf(spec, s);
    s = offspring_pgf(spec, s);
  }
  return p * std::pow(s, static_cast<double>(i));
}

}  // namespace

TEST_CASE("transition pgf small cases") {
  CHECK(transition_pgf(kSpec, 0, 1, 0.0) == doctest::Approx(0.5));
  CHECK(transition_pgf(kSpec, 0, 2, 0.0) == doctest::Approx(0.351349).epsilon(1e-6));
  CHECK(transition_pgf(kSpec, 2, 1, 0.0) == doctest::Approx(0.125));
  for (double s : {0.0, 0.3, 0.8}) {
    for (std::size_t n : {1, 3, 40}) {
      CHECK(transition_pgf(kSpec, 1, n, s) == doctest::Approx(naive_pgf(kSpec, 1, n, s)).epsilon(1e-13));
    }
  }
}

TEST_CASE("transition pgf is decreasing in n") {
  double prev = 1.0;
  for (std::size_t n = 1; n <= 200; ++n) {
    const double p = transition_pgf(kSpec, 0, n, 0.4);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("log path matches single evaluations") {
  const std::vector<std::size_t> pts = {1, 10, 100, 1000};
  const auto path = log_transition_path(kSpec, 0.5, pts);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    CHECK(path[k] == doctest::Approx(log_transition_pgf(kSpec, 0, pts[k], 0.5)).epsilon(1e-14));
  }
}

TEST_CASE("recursion holds") {
  const auto rc = check_transition_recursion(kSpec, {0.0, 0.5, 0.9}, 2000);
  CHECK(rc.max_rel_error < 1e-12);
}

TEST_CASE("series rows") {
  CHECK(transition_prob(kSpec, 0, 0, 1, 64) == doctest::Approx(0.5));
  CHECK(transition_prob(kSpec, 0, 1, 1, 64) == doctest::Approx(0.375));
  CHECK(transition_prob(kSpec, 0, 0, 2, 64) == doctest::Approx(0.351349).epsilon(1e-6));
  CHECK_THROWS(transition_series(kSpec, 0, kCoefficientModeCap + 1));
}

TEST_CASE("series and pointwise forms agree") {
  SeriesOptions opt;
  opt.order = 1024;
  for (std::size_t n : {1, 5, 20, 50}) {
    const auto row = transition_series(kSpec, 1, n, opt);
    for (double s : {0.0, 0.5, 0.9}) {
      const auto e = evaluate(row, s);
      CHECK(std::abs(e.value - transition_pgf(kSpec, 1, n, s)) <= e.error_bound + 1e-13);
    }
    CHECK(row.stored_mass() <= 1.0 + 1e-10);
  }
}

TEST_CASE("mean display") {
  CHECK(mean_conditional(1.0, 0.5, 0, 10) == doctest::Approx(5.0));
  CHECK(mean_conditional(1.0, 0.9, 3, 0) == doctest::Approx(3.0));
  CHECK(mean_conditional(2.0, 1.0, 1, 2) == doctest::Approx(7.0));
  CHECK_THROWS_AS(mean_conditional(1.0, std::numeric_limits<double>::infinity(), 0, 1), DomainError);
}

TEST_CASE("log integral and closed form") {
  CHECK(thm1_integral(kSpec, 0.3, 0) == 0.0);
  CHECK(thm1_integral_limit(kSpec, 0.0) == doctest::Approx(4.0).epsilon(1e-10));
  for (std::size_t n : {1, 100, 10000}) {
    const double q = survival_q(kSpec, n);
    CHECK(thm1_closed_form(kSpec, 0.0, n) == doctest::Approx(4.0 * (1.0 - std::pow(q, 0.25))));
    CHECK(thm1_integral(kSpec, 0.0, n) == doctest::Approx(thm1_closed_form(kSpec, 0.0, n)).epsilon(1e-10));
    CHECK(thm1_integral(kSpec, 0.5, n) == doctest::Approx(thm1_closed_form(kSpec, 0.5, n)).epsilon(1e-10));
  }
  // Q = 0.0016 gives 4 (1 - 0.2).
  CHECK(4.0 * (1.0 - std::pow(0.0016, 0.25)) == doctest::Approx(3.2));
}

TEST_CASE("K(s) is stable") {
  const auto k = estimate_K(kSpec, 0.0, 1000, 10000);
  CHECK(k.drift < 0.01);
  CHECK(k.value > 0.0);
  CHECK(k.stable);
}

TEST_CASE("p00 exponent") {
  CHECK(corollary1_exponent(kSpec, 1000) == doctest::Approx(4.0).epsilon(0.1));
  CHECK(corollary1_exponent(kSpec, 100000) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("rate quantities") {
  CHECK(nu_n(kSpec, 0.0, 10) == doctest::Approx(7.0));
  CHECK(nu_n(kSpec, 0.0, 10, LambdaInverse::functional) == doctest::Approx(5.0 + 4.0));
  const double x = 0.5 * 400 + 2;
  const double lead = 4.0 / std::sqrt(x);
  CHECK(delta_n(kSpec, x) == doctest::Approx(lead - 1.5 * std::log(x) * std::pow(x, -1.5)));
  CHECK(4.0 / std::sqrt(200.0) == doctest::Approx(0.28284).epsilon(1e-5));
  const double c2 = corollary2_delta(kSpec, 400);
  CHECK(c2 == doctest::Approx(4.0 / std::sqrt(200.0) - 1.5 * std::log(400.0) * std::pow(200.0, -1.5)));
  CHECK(c2 < 4.0 / std::sqrt(200.0));
  CHECK(corollary2_delta(kSpec, 100000000) < 1e-3);
}

TEST_CASE("ln h integral") {
  CHECK(pakes_integrand(kSpec, 0.0) == doctest::Approx(std::log(0.5) / 0.5));
  CHECK(pakes_integrand(kSpec, 0.0) == doctest::Approx(-1.38629).epsilon(1e-5));
  CHECK(pakes_p1_integral(kSpec, 0).value == 0.0);
  const double a = std::exp(log_transition_pgf(kSpec, 0, 1000, 0.0) - pakes_p1_integral(kSpec, 1000).value);
  const double b = std::exp(log_transition_pgf(kSpec, 0, 10000, 0.0) - pakes_p1_integral(kSpec, 10000).value);
  CHECK(b == doctest::Approx(a).epsilon(0.01));
  CHECK(std::isfinite(pakes_p1_integral(kSpec, 10000).summability));
}

TEST_CASE("log spaced points") {
  const auto p = log_spaced_points(1000, 10000, 4);
  CHECK(p.front() == 1000);
  CHECK(p.back() == 10000);
  for (std::size_t k = 1; k < p.size(); ++k) CHECK(p[k] > p[k - 1]);
}

TEST_CASE("report json and csv") {
  AsymptoticReport r;
  r.entries.push_back({"x", 1.0, 10, 100, 0.001, true});
  r.entries.push_back({"y", 2.0, 10, 100, 0.5, false});
  CHECK_FALSE(r.all_pass());
  const auto j = to_json(r);
  CHECK(j["entries"].size() == 2);
  CHECK(j["pass"] == false);
  std::ostringstream out;
  write_transition_csv(out, 2, transition_series(kSpec, 0, 2, {8, 1.0}));
  CHECK(out.str().rfind("n,j,p_0j_n\n2,0,", 0) == 0);
}
