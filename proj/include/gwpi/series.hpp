#pragma once

// Truncated power series with nonnegative coefficients: the working
// representation of offspring/immigration PGFs, their iterates, and
// n-step transition rows.
//
// A series of order K stores the coefficients of s^0 .. s^K. Mass that
// would land above s^K is not dropped; it is tracked in tail_mass so that
// normalization checks can tell truncation apart from arithmetic errors.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace gwpi {

inline constexpr std::size_t kDefaultTruncation = 1024;

enum class SeriesMode {
  general,  ///< arbitrary real coefficients, no mass bookkeeping checks
  pgf,      ///< nonnegative coefficients, sum + tail_mass = 1
};

class TruncatedSeries {
 public:
  /// Zero series of the given order.
  explicit TruncatedSeries(std::size_t order = 0, SeriesMode mode = SeriesMode::general);

  /// Takes ownership of coeffs (size K+1). In PGF mode, negatives of
  /// magnitude below 1e-14 are clamped to zero and anything larger throws;
  /// sum + tail_mass must equal 1 within 1e-12.
  TruncatedSeries(std::vector<double> coeffs, double tail_mass, SeriesMode mode);

  /// PGF of the constant 1 (point mass at zero).
  static TruncatedSeries unit(std::size_t order);
  /// PGF s (point mass at one).
  static TruncatedSeries identity(std::size_t order);

  std::size_t order() const noexcept { return coeffs_.size() - 1; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  double operator[](std::size_t j) const { return j < coeffs_.size() ? coeffs_[j] : 0.0; }
  double tail_mass() const noexcept { return tail_mass_; }
  SeriesMode mode() const noexcept { return mode_; }
  bool is_pgf() const noexcept { return mode_ == SeriesMode::pgf; }

  /// Sum of stored coefficients.
  double stored_mass() const;
  /// stored_mass() + tail_mass().
  double total_mass() const { return stored_mass() + tail_mass_; }
  /// True when all missing mass sits above s^K. Composing with an outer
  /// series that has a tail and an inner series with inner[0] > 0 also loses
  /// mass from low orders, which clears this.
  bool low_order_exact() const noexcept { return low_exact_; }

  /// Copy restricted to s^0 .. s^order; dropped coefficients move into tail_mass.
  TruncatedSeries truncated(std::size_t order) const;

 private:
  friend TruncatedSeries from_raw(std::vector<double>, double, SeriesMode, bool);

  std::vector<double> coeffs_;
  double tail_mass_ = 0.0;
  SeriesMode mode_ = SeriesMode::general;
  bool low_exact_ = true;
};

struct Evaluation {
  double value = 0.0;
  /// Upper bound on the contribution of truncated mass: tail_mass * s^{K+1},
  /// or tail_mass when low-order coefficients are not exact.
  double error_bound = 0.0;
};

/// Σ coeffs[j] s^j for s in [0, 1).
Evaluation evaluate(const TruncatedSeries& series, double s);

/// Cauchy product truncated to min(a.order, b.order).
TruncatedSeries multiply(const TruncatedSeries& a, const TruncatedSeries& b);

struct ComposeOptions {
  /// Emit a precision warning when the outer series has more tail mass than this.
  double tail_warning = 1e-2;
};

/// outer(inner(s)) truncated at min order. Blocked Horner evaluation
/// (Paterson–Stockmeyer): about 2*sqrt(K) full products plus K scalar-vector
/// updates, all with nonnegative operands in PGF mode.
TruncatedSeries compose(const TruncatedSeries& outer, const TruncatedSeries& inner,
                        const ComposeOptions& options = {});

/// base^exponent by binary exponentiation; exponent 0 gives the unit series.
TruncatedSeries power(const TruncatedSeries& base, std::size_t exponent);

// Serialization. CSV rows are "j,coeff" with 17 significant digits. JSON is
// an object holding the coefficient array, tail mass and mode; numbers use
// the shortest round-trip form, so parsing back is bit-exact.
void write_csv(std::ostream& out, const TruncatedSeries& series);
nlohmann::json to_json(const TruncatedSeries& series);
TruncatedSeries series_from_json(const nlohmann::json& j);

}  // namespace gwpi
