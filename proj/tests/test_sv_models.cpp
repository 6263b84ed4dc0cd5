#include <doctest.h>

#include <cmath>

#include "gwpi/errors.hpp"
#include "gwpi/sv_models.hpp"

using namespace gwpi;

TEST_CASE("model validation") {
  CHECK_NOTHROW(ModelSpec::constant_sv(0.5, 0.5, 0.75, 0.5));
  CHECK_NOTHROW(ModelSpec::constant_sv(1.0, 0.5, 1.0, 1.0));
  CHECK_THROWS_AS(ModelSpec::constant_sv(0.0, 0.5, 0.75, 0.5), ModelError);
  CHECK_THROWS_AS(ModelSpec::constant_sv(1.2, 0.5, 0.75, 0.5), ModelError);
  CHECK_THROWS_AS(ModelSpec::constant_sv(0.5, 0.7, 0.75, 0.5), ModelError);
  CHECK_THROWS_AS(ModelSpec::constant_sv(0.5, 0.5, 1.5, 0.5), ModelError);
  CHECK_THROWS_AS(ModelSpec::constant_sv(0.5, 0.5, 0.75, 0.0), ModelError);
}

TEST_CASE("pgf values") {
  const auto spec = ModelSpec::default_spec();
  CHECK(offspring_pgf(spec, 0.5) == doctest::Approx(0.676777).epsilon(1e-6));
  CHECK(offspring_pgf(spec, 0.0) == doctest::Approx(0.5));
  CHECK(immigration_pgf(spec, 0.0) == doctest::Approx(0.5));
  CHECK(immigration_pgf(spec, 0.5) == doctest::Approx(1.0 - 0.5 * std::pow(0.5, 0.75)));
  CHECK_THROWS_AS(offspring_pgf(spec, 1.0), DomainError);
}

TEST_CASE("offspring coefficients sum to one and reproduce f") {
  const auto spec = ModelSpec::default_spec();
  const auto f = offspring_coefficients(spec, 2048);
  CHECK(f[0] == doctest::Approx(0.5));
  CHECK(f[1] == doctest::Approx(1.0 - 0.5 * 1.5));
  CHECK(f.total_mass() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(f.tail_mass() == doctest::Approx(offspring_survivor(spec, 2048)));
  for (double s : {0.1, 0.5, 0.9}) {
    const auto e = evaluate(f, s);
    CHECK(std::abs(e.value - offspring_pgf(spec, s)) <= e.error_bound + 1e-14);
  }
}

TEST_CASE("immigration coefficients follow the Sibuya law") {
  const auto spec = ModelSpec::default_spec();
  const auto h = immigration_coefficients(spec, 200);
  const double d = spec.delta();
  for (std::size_t j : {1, 2, 10, 200}) {
    const double jj = static_cast<double>(j);
    const double sibuya = d * std::exp(std::lgamma(jj - d) - std::lgamma(1.0 - d) - std::lgamma(jj + 1.0));
    CHECK(h[j] == doctest::Approx(0.5 * sibuya).epsilon(1e-12));
  }
  CHECK(h.total_mass() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("analytic family has no series") {
  const auto spec = ModelSpec::analytic(0.5, SlowlyVaryingFn::constant(0.5), 0.75,
                                        SlowlyVaryingFn::constant(0.5));
  CHECK_THROWS_AS(offspring_coefficients(spec, 16), FamilyError);
}

TEST_CASE("Lambda and its two inverses") {
  const auto spec = ModelSpec::default_spec();
  CHECK(lambda_fn(spec, 0.25) == doctest::Approx(0.25));
  CHECK(lambda_reciprocal(spec, 0.25) == doctest::Approx(4.0));
  CHECK(lambda_functional_inverse(spec, 0.25) == doctest::Approx(0.25));
  const auto log_spec = ModelSpec::analytic(0.5, SlowlyVaryingFn::logarithmic(0.5), 0.75,
                                            SlowlyVaryingFn::constant(0.5));
  const double y = lambda_functional_inverse(log_spec, 0.1);
  CHECK(lambda_fn(log_spec, y) == doctest::Approx(0.1).epsilon(1e-10));
  CHECK_THROWS_AS(lambda_fn(spec, 0.0), DomainError);
}

TEST_CASE("slowly varying remainder checks") {
  const auto good = validate_sv_remainder(SlowlyVaryingFn::power_corrected(1.0, 1.0, 1.0), 0.5);
  CHECK(good.slowly_varying);
  CHECK(good.passed);
  const auto slow = validate_sv_remainder(SlowlyVaryingFn::logarithmic(1.0), 0.5);
  CHECK(slow.slowly_varying);
  CHECK_FALSE(slow.passed);
}

TEST_CASE("first offspring coefficients from the binomial series") {
  const auto f = offspring_coefficients(ModelSpec::default_spec(), 16);
  CHECK(f[0] == doctest::Approx(0.5));
  CHECK(f[1] == doctest::Approx(0.25));
  CHECK(f[2] == doctest::Approx(0.1875));
  CHECK(f[3] == doctest::Approx(0.03125));
}
