#pragma once

// Deterministic sequence mathematics: p-moduli, truncations, shifts, the
// shift-invariant distance and order statistics. Sequences are finite and
// univariate; anything outside the stored range is treated as zero.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lpblocks/errors.hpp"

namespace lpblocks {

/// Exponent p in (0, inf]. Infinity compares above every finite value.
class PExponent {
 public:
  static PExponent finite(double p) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw DomainError("p must be a positive finite real or infinity");
    }
    return PExponent(p);
  }
  static constexpr PExponent infinity() noexcept { return PExponent(); }

  // Accepts "inf", "infinity" or a positive real.
  static PExponent parse(std::string_view text) {
    if (text == "inf" || text == "infinity" || text == "Inf") return infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(std::string(text), &used);
    } catch (const std::exception&) {
      throw DomainError("cannot parse p exponent '" + std::string(text) + "'");
    }
    if (used != text.size()) throw DomainError("cannot parse p exponent '" + std::string(text) + "'");
    if (std::isinf(v) && v > 0) return infinity();
    return finite(v);
  }

  constexpr bool is_infinite() const noexcept { return infinite_; }
  constexpr bool is_finite() const noexcept { return !infinite_; }

  // +inf for the infinite exponent.
  constexpr double value() const noexcept {
    return infinite_ ? std::numeric_limits<double>::infinity() : p_;
  }

  std::string to_string() const {
    if (infinite_) return "inf";
    std::string s = std::to_string(p_);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  friend constexpr std::partial_ordering operator<=>(const PExponent& a, const PExponent& b) noexcept {
    return a.value() <=> b.value();
  }
  friend constexpr bool operator==(const PExponent& a, const PExponent& b) noexcept {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.p_ == b.p_);
  }

 private:
  constexpr PExponent() noexcept : p_(0.0), infinite_(true) {}
  constexpr explicit PExponent(double p) noexcept : p_(p), infinite_(false) {}

  double p_;
  bool infinite_;
};

/// A contiguous view [start, start + len) into a Series.
struct Window {
  std::size_t start = 0;
  std::size_t len = 0;
};

/// Univariate observations X_1..X_n, all finite.
class Series {
 public:
  Series() = default;
  explicit Series(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw DomainError("series value at index " + std::to_string(i) + " is not finite");
      }
    }
  }
  Series(std::initializer_list<double> values) : Series(std::vector<double>(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }  // NOLINT

  std::span<const double> window(Window w) const {
    if (w.len == 0 || w.start + w.len > values_.size()) {
      throw DomainError("window out of range");
    }
    return std::span<const double>(values_).subspan(w.start, w.len);
  }

  friend bool operator==(const Series&, const Series&) = default;

 private:
  std::vector<double> values_;
};

namespace detail {

// Sum of |x|^p without rescaling; the caller has handled zeros and overflow.
inline double power_sum(std::span<const double> xs, double p) {
  double s = 0.0;
  if (p == 1.0) {
    for (double x : xs) s += std::abs(x);
  } else if (p == 2.0) {
    for (double x : xs) s += x * x;
  } else {
    for (double x : xs) s += std::pow(std::abs(x), p);
  }
  return s;
}

inline double max_abs(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// (sum |x_t|^p)^(1/p) for finite p, max |x_t| for p = inf.
inline double p_modulus(std::span<const double> xs, PExponent p) {
  if (xs.empty()) throw DomainError("p_modulus of an empty sequence");
  if (p.is_infinite()) return detail::max_abs(xs);
  const double q = p.value();
  if (q == 1.0) return detail::power_sum(xs, 1.0);
  const double s = detail::power_sum(xs, q);
  if (s > 0.0 && std::isfinite(s) && s > std::numeric_limits<double>::min()) {
    return std::pow(s, 1.0 / q);
  }
  // Overflow or underflow of the raw power sum: rescale by the maximum.
  const double m = detail::max_abs(xs);
  if (m == 0.0) return 0.0;
  double scaled = 0.0;
  for (double x : xs) scaled += std::pow(std::abs(x) / m, q);
  return m * std::pow(scaled, 1.0 / q);
}

/// ||x||_p^alpha, the quantity most estimators are built from.
inline double p_modulus_pow(std::span<const double> xs, PExponent p, double alpha) {
  if (p.is_finite() && p.value() == alpha) {
    if (xs.empty()) throw DomainError("p_modulus of an empty sequence");
    const double s = detail::power_sum(xs, alpha);
    if (std::isfinite(s) && s > std::numeric_limits<double>::min()) return s;
  }
  return std::pow(p_modulus(xs, p), alpha);
}

/// Entries with |x_t| > eps kept, the rest zeroed.
inline std::vector<double> truncate_below(std::span<const double> xs, double eps) {
  if (!(eps > 0.0)) throw DomainError("truncation level must be positive");
  std::vector<double> out(xs.begin(), xs.end());
  for (double& x : out) {
    if (!(std::abs(x) > eps)) x = 0.0;
  }
  return out;
}

/// Entries with |x_t| <= eps kept, the rest zeroed.
inline std::vector<double> truncate_above(std::span<const double> xs, double eps) {
  if (!(eps > 0.0)) throw DomainError("truncation level must be positive");
  std::vector<double> out(xs.begin(), xs.end());
  for (double& x : out) {
    if (std::abs(x) > eps) x = 0.0;
  }
  return out;
}

/// B^k x on the same index window: out[t] = x[t - k], zero outside the support.
inline std::vector<double> backshift(std::span<const double> xs, long k) {
  const long n = static_cast<long>(xs.size());
  std::vector<double> out(xs.size(), 0.0);
  for (long t = 0; t < n; ++t) {
    const long s = t - k;
    if (s >= 0 && s < n) out[static_cast<std::size_t>(t)] = xs[static_cast<std::size_t>(s)];
  }
  return out;
}

/// d_p of two zero-embedded sequences where ys is offset by `shift` against xs.
/// Uses ||.||_p for p >= 1 and ||.||_p^p for p < 1.
inline double shifted_distance(std::span<const double> xs, std::span<const double> ys, long shift,
                               PExponent p) {
  // xs occupies [shift, shift + lx), ys occupies [0, ly).
  const long lx = static_cast<long>(xs.size());
  const long ly = static_cast<long>(ys.size());
  const long lo = std::min(shift, 0L);
  const long hi = std::max(shift + lx, ly);
  const bool sup = p.is_infinite();
  const double q = p.value();
  double acc = 0.0;
  for (long t = lo; t < hi; ++t) {
    const long ix = t - shift;
    const double a = (ix >= 0 && ix < lx) ? xs[static_cast<std::size_t>(ix)] : 0.0;
    const double b = (t >= 0 && t < ly) ? ys[static_cast<std::size_t>(t)] : 0.0;
    const double d = std::abs(a - b);
    if (sup) {
      acc = std::max(acc, d);
    } else {
      acc += std::pow(d, q);
    }
  }
  if (sup || q < 1.0) return acc;
  return std::pow(acc, 1.0 / q);
}

/// Shift-invariant distance: min over integer shifts of d_p(B^k xs, ys).
inline double shift_min_distance(std::span<const double> xs, std::span<const double> ys, PExponent p) {
  const long reach = static_cast<long>(xs.size() + ys.size());
  double best = std::numeric_limits<double>::infinity();
  for (long k = -reach; k <= reach; ++k) {
    best = std::min(best, shifted_distance(xs, ys, k, p));
  }
  return best;
}

/// Values sorted in descending order; duplicates kept.
inline std::vector<double> order_statistics_desc(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  std::stable_sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// The k-th largest value (1-based, ties positional).
inline double kth_order_stat(std::span<const double> values, std::size_t k) {
  if (k < 1 || k > values.size()) {
    throw DomainError("order statistic index " + std::to_string(k) + " out of range [1, " +
                      std::to_string(values.size()) + "]");
  }
  std::vector<double> work(values.begin(), values.end());
  auto nth = work.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(work.begin(), nth, work.end(), std::greater<>());
  return *nth;
}

}  // namespace lpblocks
