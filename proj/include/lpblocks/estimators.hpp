#pragma once

// Cluster inference from extremal l^p-blocks. Every estimator thresholds the
// block p-moduli at their k-th largest value and averages a functional of the
// blocks above it. Statistics only involve ratios against the empirical
// threshold, so multiplying the series by c > 0 leaves them unchanged.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lpblocks/blocks.hpp"
#include "lpblocks/errors.hpp"
#include "lpblocks/seqcore.hpp"

namespace lpblocks {

struct EstimateReport {
  std::string estimator_id;
  double value = 0.0;
  PExponent p = PExponent::infinity();
  std::size_t b = 0;
  std::size_t k = 0;
  std::size_t m = 0;
  double threshold = 0.0;
  std::size_t selected_blocks = 0;
  double alpha_used = 0.0;
  bool degenerate = false;
  // Estimator-specific companion statistic, e.g. the un-inverted mean of the
  // c(1) estimator or the denominator of a ratio estimator.
  double auxiliary = 0.0;
};

/// A block coordinate system: values[origin] is time 0, everything outside
/// the stored range is 0, and every read is multiplied by `scale`.
struct ShiftedBlock {
  std::span<const double> values;
  std::size_t origin = 0;
  double scale = 1.0;

  double at(long t) const noexcept {
    const long i = static_cast<long>(origin) + t;
    if (i < 0 || i >= static_cast<long>(values.size())) return 0.0;
    return scale * values[static_cast<std::size_t>(i)];
  }
  long first() const noexcept { return -static_cast<long>(origin); }
  long last() const noexcept { return static_cast<long>(values.size()) - 1 - static_cast<long>(origin); }
};

/// g on blocks normalized by the threshold. `vanish_radius` is the c_g > 0
/// such that g(x) = 0 whenever ||x||_p <= c_g.
struct ClusterFunctional {
  std::function<double(std::span<const double>)> g;
  double vanish_radius = 1.0;
  bool shift_invariant = true;
  std::string name = "custom";
};

/// Bounded g evaluated on the block re-centred at each coordinate.
using PsiFunctional = std::function<double(const ShiftedBlock&)>;

namespace kernels {

// (||x||_inf^alpha / ||x||_alpha^alpha) 1(||x||_alpha > 1)
inline ClusterFunctional extremal_index(double alpha) {
  const auto pa = PExponent::finite(alpha);
  return {[alpha, pa](std::span<const double> x) {
            const double na = p_modulus(x, pa);
            if (!(na > 1.0)) return 0.0;
            return std::pow(p_modulus(x, PExponent::infinity()) / na, alpha);
          },
          1.0, true, "theta_alpha"};
}

// (||x||_alpha^alpha / ||x||_1^alpha) 1(||x||_1 > 1)
inline ClusterFunctional inverse_c1(double alpha) {
  const auto pa = PExponent::finite(alpha);
  return {[alpha, pa](std::span<const double> x) {
            const double n1 = p_modulus(x, PExponent::finite(1.0));
            if (!(n1 > 1.0)) return 0.0;
            return std::pow(p_modulus(x, pa) / n1, alpha);
          },
          1.0, true, "inv_c1"};
}

// 1(||x||_p > 1)
inline ClusterFunctional exceedance(PExponent p) {
  return {[p](std::span<const double> x) { return p_modulus(x, p) > 1.0 ? 1.0 : 0.0; }, 1.0, true, "exceedance"};
}

// (sup_j sum_{i<=j} x_i / ||x||_1)_+^alpha 1(||x||_1 > 1)
inline ClusterFunctional supwalk(double alpha) {
  return {[alpha](std::span<const double> x) {
            const double n1 = p_modulus(x, PExponent::finite(1.0));
            if (!(n1 > 1.0)) return 0.0;
            double s = 0.0;
            double best = 0.0;
            for (double v : x) {
              s += v;
              best = std::max(best, s);
            }
            return std::pow(best / n1, alpha);
          },
          1.0, false, "supwalk"};
}

enum class SumPart { absolute, positive, negative };

// (|sum x| / ||x||_1)^alpha 1(||x||_1 > 1), or its positive / negative part.
inline ClusterFunctional block_sum(double alpha, SumPart part) {
  return {[alpha, part](std::span<const double> x) {
            const double n1 = p_modulus(x, PExponent::finite(1.0));
            if (!(n1 > 1.0)) return 0.0;
            double s = 0.0;
            for (double v : x) s += v;
            if (part == SumPart::positive) s = std::max(s, 0.0);
            if (part == SumPart::negative) s = std::max(-s, 0.0);
            return std::pow(std::abs(s) / n1, alpha);
          },
          1.0, true, "block_sum"};
}

// g_h(x) = |x_h|^alpha sign(x_0) sign(x_h)
inline PsiFunctional serial_dependence(double alpha, long h) {
  return [alpha, h](const ShiftedBlock& x) {
    const double x0 = x.at(0);
    const double xh = x.at(h);
    if (x0 == 0.0 || xh == 0.0) return 0.0;
    const double sign = (x0 > 0.0) == (xh > 0.0) ? 1.0 : -1.0;
    return sign * std::pow(std::abs(xh), alpha);
  };
}

// rho_zeta(x) = min(rho(x / |x_0|)^alpha, 1), 0 when x_0 = 0.
inline PsiFunctional theta_functional(double alpha, std::function<double(const ShiftedBlock&)> rho) {
  return [alpha, rho = std::move(rho)](const ShiftedBlock& x) {
    const double x0 = x.at(0);
    if (x0 == 0.0) return 0.0;
    ShiftedBlock zeta = x;
    zeta.scale = x.scale / std::abs(x0);
    const double r = rho(zeta);
    return std::min(std::pow(std::abs(r), alpha), 1.0);
  };
}

}  // namespace kernels

namespace detail {

inline void check_alpha_arg(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw PreconditionError("alpha must be a positive finite real");
}

inline EstimateReport base_report(const BlockFrame& frame, std::string id, PExponent p, const ThresholdChoice& thr,
                                  double alpha) {
  EstimateReport r;
  r.estimator_id = std::move(id);
  r.p = p;
  r.b = frame.block_length();
  r.k = thr.k;
  r.m = frame.block_count();
  r.threshold = thr.threshold;
  r.alpha_used = alpha;
  return r;
}

// Sum over blocks of g(B_t / threshold). Blocks with ||B_t||_p <= c_g * threshold
// are skipped: g vanishes there by contract.
inline double functional_sum(const BlockFrame& frame, PExponent p, double threshold, const ClusterFunctional& g,
                             std::size_t& evaluated, std::vector<double>& scratch) {
  const auto& norms = frame.norms(p);
  const double cutoff = g.vanish_radius * threshold;
  double total = 0.0;
  evaluated = 0;
  scratch.resize(frame.block_length());
  for (std::size_t t = 0; t < frame.block_count(); ++t) {
    if (!(norms[t] > cutoff)) continue;
    const auto blk = frame.block(t);
    for (std::size_t j = 0; j < blk.size(); ++j) scratch[j] = blk[j] / threshold;
    total += g.g(scratch);
    ++evaluated;
  }
  return total;
}

inline void probe_contract(const ClusterFunctional& g, const BlockFrame& frame, PExponent p) {
  if (!(g.vanish_radius > 0.0)) throw ContractError("cluster functional '" + g.name + "' needs a positive vanish radius");
  const std::vector<double> zero(frame.block_length(), 0.0);
  if (g.g(zero) != 0.0) {
    throw ContractError("cluster functional '" + g.name + "' does not vanish at the zero block");
  }
  // A block shrunk strictly inside the vanishing ball must also map to 0.
  const auto first = frame.block(0);
  const double norm = p_modulus(first, p);
  if (norm > 0.0) {
    std::vector<double> inside(first.begin(), first.end());
    const double s = 0.5 * g.vanish_radius / norm;
    for (double& v : inside) v *= s;
    if (g.g(inside) != 0.0) {
      throw ContractError("cluster functional '" + g.name + "' is nonzero inside its vanishing neighbourhood");
    }
  }
}

}  // namespace detail

/// (1/k) sum_t g(B_t / ||B||_{p,(k)}).
inline EstimateReport cluster_functional_estimate(const BlockFrame& frame, PExponent p, std::size_t k,
                                                  const ClusterFunctional& g) {
  detail::probe_contract(g, frame, p);
  const auto thr = threshold_from_order_stat(frame, p, k);
  auto r = detail::base_report(frame, g.name, p, thr, 0.0);
  if (!(thr.threshold > 0.0)) {
    r.degenerate = true;
    return r;
  }
  std::vector<double> scratch;
  const double total = detail::functional_sum(frame, p, thr.threshold, g, r.selected_blocks, scratch);
  r.value = total / static_cast<double>(k);
  return r;
}

/// Extremal index from l^alpha-blocks: mean of ||B_t||_inf^alpha / ||B_t||_alpha^alpha
/// over blocks with ||B_t||_alpha > ||B||_{alpha,(k)}, divided by k.
inline EstimateReport extremal_index_alpha_blocks(const BlockFrame& frame, double alpha, std::size_t k) {
  detail::check_alpha_arg(alpha);
  auto r = cluster_functional_estimate(frame, PExponent::finite(alpha), k, kernels::extremal_index(alpha));
  r.estimator_id = "theta_alpha";
  r.alpha_used = alpha;
  if (r.selected_blocks == 0) r.degenerate = true;
  return r;
}

/// Hsing-type blocks estimator: inverse of (1/k') #{t <= n : |X_t| >= ||B||_{inf,(k')}}.
inline EstimateReport extremal_index_infty_blocks(const BlockFrame& frame, std::size_t k_prime) {
  const auto p = PExponent::infinity();
  const auto thr = threshold_from_order_stat(frame, p, k_prime);
  auto r = detail::base_report(frame, "theta_inf", p, thr, 0.0);
  if (!(thr.threshold > 0.0)) {
    r.degenerate = true;
    return r;
  }
  std::size_t exceed = 0;
  for (double x : frame.series().values()) {
    if (std::abs(x) >= thr.threshold) ++exceed;
  }
  const auto& norms = frame.norms(p);
  r.selected_blocks = static_cast<std::size_t>(
      std::count_if(norms.begin(), norms.end(), [&](double v) { return v >= thr.threshold; }));
  r.auxiliary = static_cast<double>(exceed) / static_cast<double>(k_prime);
  r.value = static_cast<double>(k_prime) / static_cast<double>(exceed);
  return r;
}

/// c(1) from l^1-blocks. `value` is c-hat(1); `auxiliary` is the mean
/// (1/k) sum ||B_t||_alpha^alpha / ||B_t||_1^alpha, i.e. 1 / c-hat(1).
inline EstimateReport cluster_index_c1(const BlockFrame& frame, double alpha, std::size_t k) {
  detail::check_alpha_arg(alpha);
  auto r = cluster_functional_estimate(frame, PExponent::finite(1.0), k, kernels::inverse_c1(alpha));
  r.estimator_id = "c1_l1";
  r.alpha_used = alpha;
  r.auxiliary = r.value;
  if (r.degenerate || r.selected_blocks == 0 || !(r.auxiliary > 0.0)) {
    r.degenerate = true;
    r.value = 0.0;
    return r;
  }
  r.value = 1.0 / r.auxiliary;
  return r;
}

/// c(1) from l^inf-blocks: #{blocks with ||B_t||_1 > u} / #{t <= n : |X_t| > u},
/// u = ||B||_{inf,(k')}.
inline EstimateReport cluster_index_c1_infty(const BlockFrame& frame, std::size_t k_prime) {
  const auto p = PExponent::infinity();
  const auto thr = threshold_from_order_stat(frame, p, k_prime);
  auto r = detail::base_report(frame, "c1_inf", p, thr, 0.0);
  if (!(thr.threshold > 0.0)) {
    r.degenerate = true;
    return r;
  }
  const auto& l1 = frame.norms(PExponent::finite(1.0));
  const auto numerator =
      static_cast<std::size_t>(std::count_if(l1.begin(), l1.end(), [&](double v) { return v > thr.threshold; }));
  std::size_t denominator = 0;
  for (double x : frame.series().values()) {
    if (std::abs(x) > thr.threshold) ++denominator;
  }
  r.selected_blocks = numerator;
  r.auxiliary = static_cast<double>(denominator);
  if (denominator == 0) {
    r.degenerate = true;
    return r;
  }
  r.value = static_cast<double>(numerator) / static_cast<double>(denominator);
  return r;
}

/// psi-estimator of E[g(Q^(p))], p <= alpha:
///   (1/k) sum_t sum_j W_{j,t} g(B^{j-1} B_t / ||B_t||_p) 1(||B_t||_p > ||B||_{p,(k)}),
/// with W_{j,t} = |X_{j,t}|^alpha / ||B_t||_p^alpha. Coordinates with W = 0 are
/// skipped.
inline EstimateReport psi_functional_estimate(const BlockFrame& frame, PExponent p, double alpha, std::size_t k,
                                              const PsiFunctional& g, std::string id = "psi") {
  detail::check_alpha_arg(alpha);
  if (p.value() > alpha) {
    throw PreconditionError("psi-estimators require p <= alpha (p=" + p.to_string() +
                            ", alpha=" + std::to_string(alpha) + ")");
  }
  const auto thr = threshold_from_order_stat(frame, p, k);
  auto r = detail::base_report(frame, std::move(id), p, thr, alpha);
  if (!(thr.threshold > 0.0)) {
    r.degenerate = true;
    return r;
  }
  const auto& norms = frame.norms(p);
  std::vector<double> x(frame.block_length());
  double total = 0.0;
  for (std::size_t t = 0; t < frame.block_count(); ++t) {
    if (!(norms[t] > thr.threshold)) continue;
    ++r.selected_blocks;
    const auto blk = frame.block(t);
    for (std::size_t j = 0; j < blk.size(); ++j) x[j] = blk[j] / norms[t];
    double inner = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] == 0.0) continue;
      const double w = std::pow(std::abs(x[j]), alpha);
      inner += w * g(ShiftedBlock{x, j, 1.0});
    }
    total += inner;
  }
  r.value = total / static_cast<double>(k);
  if (r.selected_blocks == 0) r.degenerate = true;
  return r;
}

/// The weights W_{j,t}(p) of one block.
inline std::vector<double> block_weights(std::span<const double> block, PExponent p, double alpha) {
  const double norm = p_modulus(block, p);
  std::vector<double> w(block.size(), 0.0);
  if (norm == 0.0) return w;
  for (std::size_t j = 0; j < block.size(); ++j) w[j] = std::pow(std::abs(block[j] / norm), alpha);
  return w;
}

/// Extremogram-type lag-h serial dependence of Q^(alpha).
inline EstimateReport serial_dependence_estimate(const BlockFrame& frame, double alpha, std::size_t k, std::size_t h) {
  if (h >= frame.block_length()) {
    throw PreconditionError("lag h=" + std::to_string(h) + " must be < block length " +
                            std::to_string(frame.block_length()));
  }
  return psi_functional_estimate(frame, PExponent::finite(alpha), alpha, k,
                                 kernels::serial_dependence(alpha, static_cast<long>(h)),
                                 "serial_" + std::to_string(h));
}

/// Estimator of c(1) E[(sup_t sum_{i<=t} Q^(1)_i)_+^alpha]. Partial sums run
/// within each block only.
inline EstimateReport supwalk_constant_estimate(const BlockFrame& frame, double alpha, std::size_t k) {
  detail::check_alpha_arg(alpha);
  if (!(alpha >= 1.0)) throw PreconditionError("random-walk supremum estimator requires alpha >= 1");
  const auto num = cluster_functional_estimate(frame, PExponent::finite(1.0), k, kernels::supwalk(alpha));
  const auto den = cluster_functional_estimate(frame, PExponent::finite(1.0), k, kernels::inverse_c1(alpha));
  auto r = num;
  r.estimator_id = "supwalk";
  r.alpha_used = alpha;
  r.auxiliary = den.value;
  if (num.degenerate || !(den.value > 0.0)) {
    r.degenerate = true;
    r.value = 0.0;
    return r;
  }
  r.value = num.value / den.value;
  return r;
}

struct StableParameters {
  double sigma = 0.0;
  double beta = 0.0;
  bool degenerate = false;
  EstimateReport c1;
};

/// Scale and skewness of the alpha-stable limit of partial sums,
///   sigma = c(1) E|sum Q^(1)|^alpha,
///   beta  = E[(sum Q^(1))_+^alpha - (sum Q^(1))_-^alpha] / E|sum Q^(1)|^alpha.
inline StableParameters stable_scale_skew(const BlockFrame& frame, double alpha, std::size_t k) {
  if (!(alpha > 0.0 && alpha < 2.0) || alpha == 1.0) {
    throw PreconditionError("stable parameters need alpha in (0,1) or (1,2)");
  }
  const auto p1 = PExponent::finite(1.0);
  StableParameters out;
  out.c1 = cluster_index_c1(frame, alpha, k);
  const auto abs_sum = cluster_functional_estimate(frame, p1, k, kernels::block_sum(alpha, kernels::SumPart::absolute));
  const auto pos = cluster_functional_estimate(frame, p1, k, kernels::block_sum(alpha, kernels::SumPart::positive));
  const auto neg = cluster_functional_estimate(frame, p1, k, kernels::block_sum(alpha, kernels::SumPart::negative));
  if (out.c1.degenerate || !(abs_sum.value > 0.0)) {
    out.degenerate = true;
    return out;
  }
  out.sigma = out.c1.value * abs_sum.value;
  out.beta = (pos.value - neg.value) / abs_sum.value;
  return out;
}

/// Estimator of P(rho(Y Theta) > 1) for a homogeneous rho, Y ~ Pareto(alpha).
inline EstimateReport theta_functional_estimate(const BlockFrame& frame, double alpha, std::size_t k,
                                                std::function<double(const ShiftedBlock&)> rho) {
  return psi_functional_estimate(frame, PExponent::finite(alpha), alpha, k,
                                 kernels::theta_functional(alpha, std::move(rho)), "theta_rho");
}

struct HillOptions {
  bool reduce_bias = false;
  double rho = -1.0;  // second-order parameter used by the bias reduction
};

/// Hill estimate of alpha from the k_tail largest |X|. With reduce_bias the
/// generalized-jackknife combination of the Hill estimators at k and k/2 is
/// used: gamma = (gamma(k/2) - 2^rho gamma(k)) / (1 - 2^rho). This is a
/// simplified stand-in for the full second-order procedure.
inline double hill_alpha(std::span<const double> series, std::size_t k_tail, HillOptions opts = {}) {
  const std::size_t n = series.size();
  if (k_tail < 2 || k_tail >= n) {
    throw DomainError("Hill estimator needs 2 <= k_tail < n (k_tail=" + std::to_string(k_tail) +
                      ", n=" + std::to_string(n) + ")");
  }
  std::vector<double> a(series.size());
  std::transform(series.begin(), series.end(), a.begin(), [](double x) { return std::abs(x); });
  std::partial_sort(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k_tail + 1), a.end(), std::greater<>());
  auto gamma_at = [&](std::size_t kk) {
    const double base = a[kk];
    if (!(base > 0.0)) throw DomainError("Hill estimator: non-positive order statistic at the threshold");
    double s = 0.0;
    for (std::size_t i = 0; i < kk; ++i) s += std::log(a[i] / base);
    return s / static_cast<double>(kk);
  };
  double gamma = gamma_at(k_tail);
  if (opts.reduce_bias) {
    if (!(opts.rho < 0.0)) throw DomainError("second-order parameter rho must be negative");
    const std::size_t half = std::max<std::size_t>(2, k_tail / 2);
    const double c = std::pow(2.0, opts.rho);
    gamma = (gamma_at(half) - c * gamma) / (1.0 - c);
  }
  if (!(gamma > 0.0)) throw DomainError("Hill estimate is not positive");
  return 1.0 / gamma;
}

}  // namespace lpblocks
