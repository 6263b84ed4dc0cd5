#pragma once

// Offspring and immigration laws of regularly varying type:
//
//   f(s)     = s + (1-s)^{1+nu} L(1/(1-s)),   0 < nu <= 1
//   1 - h(s) = (1-s)^{delta} ell(1/(1-s)),    0 < delta <= 1
//
// with L, ell slowly varying. Constant L = c and ell = lambda give genuine
// PGFs with closed-form coefficients (the "constant_sv" family); any other
// SV pair is accepted in analytic mode, where only pointwise evaluation is
// meaningful.
//
// Most engines work in the deficit coordinate r = 1 - s, where
//   offspring_deficit(r)   = f(1-r) - (1-r) = r^{1+nu} L(1/r)
//   immigration_deficit(r) = 1 - h(1-r)     = r^{delta} ell(1/r)
// so that survival-scale quantities keep full relative precision.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gwpi/series.hpp"

namespace gwpi {

class SlowlyVaryingFn {
 public:
  using Function = std::function<double(double)>;

  SlowlyVaryingFn(std::string label, Function eval, Function gauge);

  static SlowlyVaryingFn constant(double value);
  /// scale * (1 + ln x): slowly varying, but its remainder decays only logarithmically.
  static SlowlyVaryingFn logarithmic(double scale);
  /// scale * (1 + weight * x^{-rate}); remainder of order x^{-rate}.
  static SlowlyVaryingFn power_corrected(double scale, double weight, double rate);

  double operator()(double x) const { return eval_(x); }
  /// Remainder gauge g(x) -> 0 against which alpha(x) = o(g(x)) is read.
  double gauge(double x) const { return gauge_(x); }
  void set_gauge(Function gauge) { gauge_ = std::move(gauge); }

  std::optional<double> constant_value() const { return constant_; }
  const std::string& label() const { return label_; }

 private:
  std::string label_;
  Function eval_;
  Function gauge_;
  std::optional<double> constant_;
};

enum class Family { constant_sv, analytic };

class ModelSpec {
 public:
  /// L = c, ell = lambda. Requires 0 < nu <= 1, 0 < c <= 1/(1+nu),
  /// 0 < delta <= 1, 0 < lambda <= 1. Throws ModelError otherwise.
  static ModelSpec constant_sv(double nu, double c, double delta, double lambda);
  /// Arbitrary SV pair; validated by sampling f and h on a grid of [0,1).
  static ModelSpec analytic(double nu, SlowlyVaryingFn offspring_sv, double delta,
                            SlowlyVaryingFn immigration_sv);
  /// nu = 0.5, c = 0.5, delta = 0.75, lambda = 0.5.
  static ModelSpec default_spec();

  double nu() const noexcept { return nu_; }
  double delta() const noexcept { return delta_; }
  Family family() const noexcept { return family_; }
  bool has_series() const noexcept { return family_ == Family::constant_sv; }

  /// Constant offspring SV value; FamilyError in analytic mode.
  double c() const;
  /// Constant immigration SV value; FamilyError in analytic mode.
  double lambda() const;

  const SlowlyVaryingFn& offspring_sv() const noexcept { return offspring_sv_; }
  const SlowlyVaryingFn& immigration_sv() const noexcept { return immigration_sv_; }

  /// m = f'(1-). Always 1: only critical laws are representable.
  double offspring_mean() const noexcept { return 1.0; }
  /// a = h'(1-); +infinity unless delta = 1 with constant ell.
  double immigration_mean() const;
  /// b = f''(1-)/2; +infinity when nu < 1.
  double offspring_b() const;
  /// delta > nu: the regime with a proper stationary law.
  bool ergodic() const noexcept { return delta_ > nu_; }

  double offspring_deficit(double r) const;
  double offspring_deficit_derivative(double r) const;
  double offspring_deficit_second_derivative(double r) const;
  double immigration_deficit(double r) const;
  double immigration_deficit_derivative(double r) const;

 private:
  ModelSpec(double nu, SlowlyVaryingFn L, double delta, SlowlyVaryingFn ell, Family family);

  double nu_;
  double delta_;
  SlowlyVaryingFn offspring_sv_;
  SlowlyVaryingFn immigration_sv_;
  Family family_;
};

double offspring_pgf(const ModelSpec& spec, double s);
double immigration_pgf(const ModelSpec& spec, double s);

/// Exact coefficients p_0 .. p_K of f for the constant family; tail_mass is
/// the exact survivor P(xi > K). FamilyError in analytic mode.
TruncatedSeries offspring_coefficients(const ModelSpec& spec, std::size_t K = kDefaultTruncation);
/// h_0 = 1 - lambda, h_j = lambda * Sibuya(delta)_j.
TruncatedSeries immigration_coefficients(const ModelSpec& spec,
                                         std::size_t K = kDefaultTruncation);

/// P(xi > k) for the constant offspring family, k >= 0.
double offspring_survivor(const ModelSpec& spec, std::size_t k);

/// Lambda(y) = y^nu L(1/y), y in (0,1].
double lambda_fn(const ModelSpec& spec, double y);
/// 1 / Lambda(y): the default reading of Lambda^{-1} in the rate formula.
double lambda_reciprocal(const ModelSpec& spec, double y);
/// Functional inverse: y with Lambda(y) = z. Kept for sensitivity checks.
double lambda_functional_inverse(const ModelSpec& spec, double z);

enum class RemainderMode {
  alpha_offspring,   ///< |alpha(x)| x^nu / L(x) -> 0
  beta_immigration,  ///< |beta(x)| x^delta / ell(x) -> 0
};

struct RemainderReport {
  std::string label;
  double exponent = 0.0;
  std::vector<double> x;
  std::vector<double> ratio;  ///< |L(2x)/L(x) - 1| x^exponent / L(x)
  double first_decade_max = 0.0;
  double top_decade_max = 0.0;
  double top_decade_gauge_max = 0.0;  ///< max |alpha(x)| / g(x) over the top decade
  bool slowly_varying = false;        ///< |L(kx)/L(x) - 1| shrinks for k in {0.5, 2, 10}
  bool passed = false;
};

/// Samples the remainder on the geometric grid 10^{i/4}, x in [1, 1e8].
/// Failure is reported, not thrown.
RemainderReport validate_sv_remainder(const SlowlyVaryingFn& fn, double exponent);
RemainderReport validate_sv_remainder(const ModelSpec& spec, RemainderMode mode);

}  // namespace gwpi
