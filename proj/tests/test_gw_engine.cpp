#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "gwpi/errors.hpp"
#include "gwpi/gw_engine.hpp"

using namespace gwpi;

namespace {

const ModelSpec kSpec = ModelSpec::default_spec();
const ModelSpec kLinear = ModelSpec::constant_sv(1.0, 0.5, 1.0, 0.5);

double naive_iterate(const ModelSpec& spec, std::size_t n, double s) {
  for (std::size_t k = 0; k < n; ++k) s = offspring_pgf(spec, s);
  return s;
}

}  // namespace

TEST_CASE("deficit iteration matches direct iteration of f") {
  for (double s : {0.0, 0.4, 0.9}) {
    for (std::size_t n : {1, 5, 50, 500}) {
      CHECK(iterate_f(kSpec, n, s) == doctest::Approx(naive_iterate(kSpec, n, s)).epsilon(1e-13));
    }
  }
  CHECK(iterate_f(kSpec, 0, 0.3) == 0.3);
  CHECK_THROWS_AS(iterate_f(kSpec, 11, 0.3, 10), DomainError);
}

TEST_CASE("survival probabilities") {
  CHECK(survival_q(kSpec, 1) == doctest::Approx(0.5));
  CHECK(survival_q(kSpec, 2) == doctest::Approx(0.323223).epsilon(1e-6));
  CHECK(survival_q(kLinear, 2) == doctest::Approx(0.375));
  const auto traj = survival_trajectory(kSpec, 100);
  REQUIRE(traj.size() == 101);
  CHECK(traj[0] == 1.0);
  CHECK(traj[100] == survival_q(kSpec, 100));
  for (std::size_t n = 1; n <= 100; ++n) CHECK(traj[n] < traj[n - 1]);
  CHECK(asymp_q(kSpec, 100) == doctest::Approx(std::pow(0.25 * 100, -2.0)));
}

TEST_CASE("normalizer") {
  CHECK(n_slow(kSpec, 1) == doctest::Approx(0.5 * 0.25));
  CHECK(n_slow_normalization(kSpec, 100000) == doctest::Approx(1.0).epsilon(1e-3));
  SlowNormalizer N(kSpec, 100000);
  CHECK(N(10.0) == doctest::Approx(n_slow(kSpec, 10)).epsilon(1e-14));
  CHECK(N(20000.0) == doctest::Approx(n_slow(kSpec, 20000)).epsilon(1e-6));
  CHECK(N(1e7) == N(1e5));
}

TEST_CASE("invariant estimators at n = 1") {
  CHECK(u_n(kSpec, 1, 0.5) == doctest::Approx(0.176777).epsilon(1e-5));
  CHECK(script_u_n(kSpec, 1, 0.5) == doctest::Approx(0.353553).epsilon(1e-5));
  CHECK(script_u_n(kSpec, 1, 0.0) == 0.0);
  // 1 - (R_1(0.5) / Q_1)^nu by hand: 1 - sqrt(0.323223 / 0.5).
  CHECK(m_n(kSpec, 1, 0.5) == doctest::Approx(1.0 - std::sqrt((1.0 - offspring_pgf(kSpec, 0.5)) / 0.5)).epsilon(1e-12));
  CHECK(m_n(kSpec, 1, 0.5) == doctest::Approx(0.195980).epsilon(1e-5));
  CHECK(m_n(kSpec, 7, 0.0) == 0.0);
  CHECK(u_n(kSpec, 9, 0.0) == 0.0);
}

TEST_CASE("U_n tends to nu n as s approaches 1") {
  CHECK(u_n(kSpec, 20, 1.0 - 1e-12) == doctest::Approx(10.0).epsilon(1e-4));
}

TEST_CASE("closed form and Abel residual") {
  CHECK(u_closed(kSpec, 0.0) == 0.0);
  CHECK(u_closed(kSpec, 0.75) == doctest::Approx(4.0));
  CHECK(u_closed(kLinear, 0.5) == doctest::Approx(2.0));
  CHECK(abel_residual(kLinear, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(abel_residual(kLinear, 0.9) == doctest::Approx(0.05263).epsilon(1e-4));
  CHECK(std::abs(abel_residual(kSpec, 0.9999)) < std::abs(abel_residual(kSpec, 0.99)));
}

TEST_CASE("normalizer identity and Lambda(R_n) ratio") {
  CHECK(lemma1_max_deviation(kSpec, default_s_grid(), 2000) < 1e-12);
  CHECK(lemma1_identity(kLinear, 37, 0.3) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(eq10_check(kSpec, 10000, 0.0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(eq10_check(kSpec, 10000, 0.5) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("record points") {
  const auto pts = default_record_points(1000);
  CHECK(pts.front() == 1);
  CHECK(pts.back() == 1000);
  for (std::size_t k = 1; k < pts.size(); ++k) CHECK(pts[k] > pts[k - 1]);
  CHECK(default_record_points(1234).back() == 1234);
}

TEST_CASE("trace is ordered and independent of worker count") {
  const std::vector<double> grid = {0.0, 0.5, 0.9};
  const auto a = build_gw_trace(kSpec, grid, default_record_points(100), 1);
  const auto b = build_gw_trace(kSpec, grid, default_record_points(100), 3);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) CHECK(a.records[k].f_n == b.records[k].f_n);
  CHECK(a.records[0].n == 1);
  CHECK(a.records[1].s == 0.5);
  std::ostringstream out;
  write_gw_trace_csv(out, a);
  CHECK(out.str().rfind("n,s,f_n,Q_n,R_n,N_n,U_n,M_n,nM_n,abel_residual\n", 0) == 0);
}

TEST_CASE("invariant table estimators agree with each other") {
  const auto t = build_invariant_table(kSpec, {0.5}, {100, 1000, 10000}, 0.05, true);
  REQUIRE(t.rows.size() == 3);
  const auto& last = t.rows.back();
  CHECK(last.n_m == doctest::Approx(last.script_u).epsilon(2e-3));
  CHECK(last.n_m == doctest::Approx(last.u_n).epsilon(2e-3));
  CHECK(t.converged[0]);
  CHECK(t.richardson.size() == 1);
}
