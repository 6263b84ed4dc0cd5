#include "gwpi/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <utility>

#include <fmt/format.h>

#include "gwpi/errors.hpp"
#include "gwpi/log.hpp"

namespace gwpi {

namespace {

constexpr double kClampNegative = 1e-14;
constexpr double kMassTolerance = 1e-12;

void clamp_pgf(std::vector<double>& c) {
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j] >= 0.0) continue;
    if (c[j] > -kClampNegative) {
      c[j] = 0.0;
    } else {
      throw DomainError(fmt::format("PGF coefficient {} is negative ({:.3e})", j, c[j]));
    }
  }
}

double clamp_tail(double tail) {
  if (tail < 0.0 && tail > -kMassTolerance) return 0.0;
  return tail;
}

// r[0..K] = (a * b)[0..K]
std::vector<double> mul_trunc(std::span<const double> a, std::span<const double> b,
                              std::size_t K) {
  std::vector<double> r(K + 1, 0.0);
  const std::size_t na = std::min(a.size(), K + 1);
  for (std::size_t i = 0; i < na; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    const std::size_t nb = std::min(b.size(), K + 1 - i);
    double* out = r.data() + i;
    for (std::size_t l = 0; l < nb; ++l) out[l] += ai * b[l];
  }
  return r;
}

}  // namespace

TruncatedSeries from_raw(std::vector<double> coeffs, double tail, SeriesMode mode,
                         bool low_exact) {
  TruncatedSeries s;
  if (mode == SeriesMode::pgf) {
    clamp_pgf(coeffs);
    tail = clamp_tail(tail);
  }
  s.coeffs_ = std::move(coeffs);
  s.tail_mass_ = tail;
  s.mode_ = mode;
  s.low_exact_ = low_exact;
  return s;
}

TruncatedSeries::TruncatedSeries(std::size_t order, SeriesMode mode)
    : coeffs_(order + 1, 0.0), mode_(mode) {}

TruncatedSeries::TruncatedSeries(std::vector<double> coeffs, double tail_mass, SeriesMode mode)
    : mode_(mode) {
  if (coeffs.empty()) throw DomainError("series needs at least one coefficient");
  if (mode == SeriesMode::pgf) {
    clamp_pgf(coeffs);
    tail_mass = clamp_tail(tail_mass);
    if (tail_mass < 0.0) throw DomainError(fmt::format("negative tail mass {:.3e}", tail_mass));
    const double total = std::accumulate(coeffs.begin(), coeffs.end(), 0.0) + tail_mass;
    if (std::abs(total - 1.0) > kMassTolerance) {
      throw DomainError(fmt::format("PGF mass {:.17g} differs from 1", total));
    }
  }
  coeffs_ = std::move(coeffs);
  tail_mass_ = tail_mass;
}

TruncatedSeries TruncatedSeries::unit(std::size_t order) {
  std::vector<double> c(order + 1, 0.0);
  c[0] = 1.0;
  return TruncatedSeries(std::move(c), 0.0, SeriesMode::pgf);
}

TruncatedSeries TruncatedSeries::identity(std::size_t order) {
  if (order == 0) return TruncatedSeries({0.0}, 1.0, SeriesMode::pgf);
  std::vector<double> c(order + 1, 0.0);
  c[1] = 1.0;
  return TruncatedSeries(std::move(c), 0.0, SeriesMode::pgf);
}

double TruncatedSeries::stored_mass() const {
  return std::accumulate(coeffs_.begin(), coeffs_.end(), 0.0);
}

TruncatedSeries TruncatedSeries::truncated(std::size_t order) const {
  if (order >= this->order()) return *this;
  std::vector<double> c(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(order) + 1);
  const double dropped =
      std::accumulate(coeffs_.begin() + static_cast<std::ptrdiff_t>(order) + 1, coeffs_.end(), 0.0);
  return from_raw(std::move(c), tail_mass_ + dropped, mode_, low_exact_);
}

Evaluation evaluate(const TruncatedSeries& series, double s) {
  if (!(s >= 0.0 && s < 1.0)) throw DomainError(fmt::format("evaluate: s = {} outside [0,1)", s));
  const auto c = series.coeffs();
  double acc = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) acc = acc * s + c[j];
  const double reach =
      series.low_order_exact() ? std::pow(s, static_cast<double>(series.order() + 1)) : 1.0;
  return {acc, series.tail_mass() * reach};
}

TruncatedSeries multiply(const TruncatedSeries& a, const TruncatedSeries& b) {
  const std::size_t K = std::min(a.order(), b.order());
  auto r = mul_trunc(a.coeffs(), b.coeffs(), K);
  const double kept = std::accumulate(r.begin(), r.end(), 0.0);
  const auto mode = (a.is_pgf() && b.is_pgf()) ? SeriesMode::pgf : SeriesMode::general;
  return from_raw(std::move(r), a.total_mass() * b.total_mass() - kept, mode,
                  a.low_order_exact() && b.low_order_exact());
}

TruncatedSeries compose(const TruncatedSeries& outer, const TruncatedSeries& inner,
                        const ComposeOptions& options) {
  if (!(inner[0] >= 0.0 && inner[0] < 1.0)) {
    throw DomainError(fmt::format("compose: inner constant term {} outside [0,1)", inner[0]));
  }
  if (outer.tail_mass() > options.tail_warning) {
    log::warn("compose: outer tail mass {:.3e} exceeds {:.1e}; composition error is unbounded",
              outer.tail_mass(), options.tail_warning);
  }
  const std::size_t K = std::min(outer.order(), inner.order());
  const auto o = outer.coeffs();
  const auto in = inner.coeffs().first(K + 1);

  // Baby steps: in^0 .. in^b.
  const auto b = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(K + 1))));
  std::vector<std::vector<double>> pows;
  pows.reserve(b + 1);
  pows.emplace_back(K + 1, 0.0);
  pows[0][0] = 1.0;
  pows.emplace_back(in.begin(), in.end());
  for (std::size_t m = 2; m <= b; ++m) pows.push_back(mul_trunc(pows[m - 1], in, K));

  const std::size_t blocks = (K + 1 + b - 1) / b;
  auto chunk = [&](std::size_t q) {
    std::vector<double> c(K + 1, 0.0);
    for (std::size_t r = 0; r < b && q * b + r <= K; ++r) {
      const double w = o[q * b + r];
      if (w == 0.0) continue;
      const auto& p = pows[r];
      for (std::size_t j = 0; j <= K; ++j) c[j] += w * p[j];
    }
    return c;
  };

  // Giant steps: Horner in Y = in^b over the blocks.
  std::vector<double> result = chunk(blocks - 1);
  for (std::size_t q = blocks - 1; q-- > 0;) {
    result = mul_trunc(result, pows[b], K);
    const auto c = chunk(q);
    for (std::size_t j = 0; j <= K; ++j) result[j] += c[j];
  }

  // Mass bookkeeping: total(outer ∘ inner) = outer evaluated at total(inner).
  const double t = inner.total_mass();
  double total = 0.0;
  for (std::size_t j = o.size(); j-- > 0;) total = total * t + o[j];
  total += outer.tail_mass() * std::pow(t, static_cast<double>(o.size()));
  const double kept = std::accumulate(result.begin(), result.end(), 0.0);
  const auto mode = (outer.is_pgf() && inner.is_pgf()) ? SeriesMode::pgf : SeriesMode::general;
  const bool exact = outer.low_order_exact() && inner.low_order_exact() &&
                     (outer.tail_mass() == 0.0 || inner[0] == 0.0);
  return from_raw(std::move(result), total - kept, mode, exact);
}

TruncatedSeries power(const TruncatedSeries& base, std::size_t exponent) {
  TruncatedSeries result = TruncatedSeries::unit(base.order());
  TruncatedSeries sq = base;
  while (exponent > 0) {
    if (exponent & 1U) result = multiply(result, sq);
    exponent >>= 1U;
    if (exponent > 0) sq = multiply(sq, sq);
  }
  return result;
}

void write_csv(std::ostream& out, const TruncatedSeries& series) {
  out << "j,coeff\n";
  const auto c = series.coeffs();
  for (std::size_t j = 0; j < c.size(); ++j) out << fmt::format("{},{:.17g}\n", j, c[j]);
}

nlohmann::json to_json(const TruncatedSeries& series) {
  nlohmann::json j;
  j["order"] = series.order();
  j["mode"] = series.is_pgf() ? "pgf" : "general";
  j["tail_mass"] = series.tail_mass();
  j["low_order_exact"] = series.low_order_exact();
  j["coeffs"] = std::vector<double>(series.coeffs().begin(), series.coeffs().end());
  return j;
}

TruncatedSeries series_from_json(const nlohmann::json& j) {
  auto coeffs = j.at("coeffs").get<std::vector<double>>();
  const auto mode_text = j.value("mode", std::string("general"));
  if (mode_text != "pgf" && mode_text != "general") {
    throw DomainError("series_from_json: unknown mode '" + mode_text + "'");
  }
  const auto mode = mode_text == "pgf" ? SeriesMode::pgf : SeriesMode::general;
  TruncatedSeries s(std::move(coeffs), j.value("tail_mass", 0.0), mode);
  if (j.value("low_order_exact", true)) return s;
  return from_raw(std::vector<double>(s.coeffs().begin(), s.coeffs().end()), s.tail_mass(), mode,
                  false);
}

}  // namespace gwpi
