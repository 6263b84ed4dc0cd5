#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "gwpi/errors.hpp"
#include "gwpi/series.hpp"
#include "gwpi/sv_models.hpp"

using namespace gwpi;

namespace {

// Direct O(K^3) composition for small orders.
std::vector<double> naive_compose(const std::vector<double>& outer, const std::vector<double>& inner) {
  const std::size_t K = outer.size() - 1;
  std::vector<double> out(K + 1, 0.0), pw(K + 1, 0.0);
  pw[0] = 1.0;
  for (std::size_t k = 0; k <= K; ++k) {
    for (std::size_t j = 0; j <= K; ++j) out[j] += outer[k] * pw[j];
    std::vector<double> next(K + 1, 0.0);
    for (std::size_t a = 0; a <= K; ++a)
      for (std::size_t b = 0; a + b <= K; ++b) next[a + b] += pw[a] * inner[b];
    pw = next;
  }
  return out;
}

}  // namespace

TEST_CASE("unit and identity") {
  const auto u = TruncatedSeries::unit(8);
  const auto x = TruncatedSeries::identity(8);
  CHECK(u[0] == 1.0);
  CHECK(x[1] == 1.0);
  CHECK(evaluate(x, 0.3).value == doctest::Approx(0.3));
  CHECK(power(x, 0).stored_mass() == 1.0);
}

TEST_CASE("pgf mode rejects bad mass and negative coefficients") {
  CHECK_THROWS_AS(TruncatedSeries({0.5, 0.4}, 0.0, SeriesMode::pgf), DomainError);
  CHECK_THROWS_AS(TruncatedSeries({1.1, -0.1}, 0.0, SeriesMode::pgf), DomainError);
  CHECK_NOTHROW(TruncatedSeries({0.5, 0.4}, 0.1, SeriesMode::pgf));
  TruncatedSeries tiny({1.0, -1e-16}, 0.0, SeriesMode::pgf);
  CHECK(tiny[1] == 0.0);
}

TEST_CASE("multiply truncates and tracks tail mass") {
  TruncatedSeries a({0.5, 0.5}, 0.0, SeriesMode::pgf);
  const auto sq = multiply(a, a);
  CHECK(sq[0] == doctest::Approx(0.25));
  CHECK(sq[1] == doctest::Approx(0.5));
  CHECK(sq.tail_mass() == doctest::Approx(0.25));
  CHECK(sq.total_mass() == doctest::Approx(1.0));
}

TEST_CASE("compose agrees with direct composition") {
  const std::size_t K = 24;
  std::vector<double> outer(K + 1), inner(K + 1, 0.0);
  for (std::size_t k = 0; k <= K; ++k) outer[k] = std::pow(0.5, static_cast<double>(k + 1));
  inner[0] = 0.2;
  inner[1] = 0.5;
  inner[3] = 0.3;
  const auto fast = compose(TruncatedSeries(outer, 0.0, SeriesMode::general),
                            TruncatedSeries(inner, 0.0, SeriesMode::general));
  const auto slow = naive_compose(outer, inner);
  for (std::size_t j = 0; j <= K; ++j) CHECK(fast[j] == doctest::Approx(slow[j]).epsilon(1e-13));
}

TEST_CASE("compose of offspring pgf matches pointwise iterate") {
  const auto spec = ModelSpec::default_spec();
  const auto f = offspring_coefficients(spec, 512);
  const auto f2 = compose(f, f, ComposeOptions{1.0});
  for (double s : {0.0, 0.3, 0.6}) {
    const auto e = evaluate(f2, s);
    const double exact = offspring_pgf(spec, offspring_pgf(spec, s));
    CHECK(std::abs(e.value - exact) <= e.error_bound + 1e-14);
  }
  CHECK(f2.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power matches repeated multiply") {
  TruncatedSeries a({0.2, 0.5, 0.3}, 0.0, SeriesMode::pgf);
  const auto p = power(a.truncated(2), 3);
  const auto m = multiply(multiply(a, a), a);
  for (std::size_t j = 0; j <= 2; ++j) CHECK(p[j] == doctest::Approx(m[j]));
}

TEST_CASE("evaluate domain") {
  const auto u = TruncatedSeries::unit(4);
  CHECK_THROWS_AS(evaluate(u, 1.0), DomainError);
  CHECK_THROWS_AS(evaluate(u, -0.1), DomainError);
}

TEST_CASE("json round trip is bit exact") {
  const auto f = offspring_coefficients(ModelSpec::default_spec(), 64);
  const auto back = series_from_json(to_json(f));
  REQUIRE(back.order() == f.order());
  for (std::size_t j = 0; j <= f.order(); ++j) CHECK(back[j] == f[j]);
  CHECK(back.tail_mass() == f.tail_mass());
  CHECK(back.is_pgf());
}

TEST_CASE("csv has header and one row per coefficient") {
  std::ostringstream out;
  write_csv(out, TruncatedSeries({0.25, 0.75}, 0.0, SeriesMode::pgf));
  CHECK(out.str() == "j,coeff\n0,0.25\n1,0.75\n");
}

TEST_CASE("outer tail with nonzero inner constant spoils low orders") {
  TruncatedSeries outer({0.5, 0.3}, 0.2, SeriesMode::pgf);
  TruncatedSeries shifted({0.4, 0.6}, 0.0, SeriesMode::pgf);
  TruncatedSeries pure({0.0, 1.0}, 0.0, SeriesMode::pgf);
  CHECK(compose(outer, pure, {1.0}).low_order_exact());
  const auto c = compose(outer, shifted, {1.0});
  CHECK_FALSE(c.low_order_exact());
  CHECK(evaluate(c, 0.5).error_bound == doctest::Approx(c.tail_mass()));
  CHECK_FALSE(series_from_json(to_json(c)).low_order_exact());
}
