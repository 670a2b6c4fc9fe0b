#pragma once

// Closed forms and samplers for the spectral tail process Theta and the
// spectral cluster processes Q^(p) of finite linear processes
//   X_t = sum_j phi_j Z_{t-j}.
// For such processes the tail process is Theta_t = sign * phi_{t+J} / |phi_J|
// with P(J = j) = |phi_j|^alpha / ||phi||_alpha^alpha and sign ~ Theta_0^Z.
// Every draw is a shifted copy of phi, so ||Theta||_p / ||Theta||_alpha is the
// deterministic constant ||phi||_p / ||phi||_alpha and the change-of-norms
// reweighting between Q^(alpha) and Q^(p) cancels. A non-linear model would
// need explicit importance weights here.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "lpblocks/errors.hpp"
#include "lpblocks/models.hpp"
#include "lpblocks/rng.hpp"
#include "lpblocks/seqcore.hpp"

namespace lpblocks {

/// A finite-support sample of Theta or Q^(p); values[origin] is time 0.
struct SpectralDraw {
  std::vector<double> values;
  std::size_t origin = 0;

  double at(long t) const noexcept {
    const long i = static_cast<long>(origin) + t;
    if (i < 0 || i >= static_cast<long>(values.size())) return 0.0;
    return values[static_cast<std::size_t>(i)];
  }

  // First index attaining the sup norm (T* relative to the stored range).
  std::size_t argmax_index() const noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (std::abs(values[i]) > std::abs(values[best])) best = i;
    }
    return best;
  }
};

namespace detail {
inline void check_coeffs(std::span<const double> coeffs) {
  if (coeffs.empty() || std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; })) {
    throw DomainError("coefficients must not be all zero");
  }
}
inline void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be > 0");
}
}  // namespace detail

/// Law of the random shift J.
struct ShiftLaw {
  std::vector<double> probabilities;

  static ShiftLaw from_coeffs(std::span<const double> coeffs, double alpha) {
    detail::check_coeffs(coeffs);
    detail::check_alpha(alpha);
    ShiftLaw law;
    law.probabilities.reserve(coeffs.size());
    double total = 0.0;
    for (double c : coeffs) {
      const double w = c == 0.0 ? 0.0 : std::pow(std::abs(c), alpha);
      law.probabilities.push_back(w);
      total += w;
    }
    for (double& w : law.probabilities) w /= total;
    return law;
  }
};

/// The finitely many atoms (J, sign) of the tail process of a linear model.
class LinearSpectralLaw {
 public:
  struct Atom {
    std::size_t shift;  // J
    double sign;        // Theta_0^Z
    double probability;
  };

  LinearSpectralLaw(std::vector<double> coeffs, double alpha, double positive_tail_balance)
      : coeffs_(std::move(coeffs)), alpha_(alpha) {
    if (!(positive_tail_balance >= 0.0 && positive_tail_balance <= 1.0)) {
      throw DomainError("tail balance must lie in [0, 1]");
    }
    const auto law = ShiftLaw::from_coeffs(coeffs_, alpha_);
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
      const double pj = law.probabilities[j];
      if (pj == 0.0) continue;
      if (positive_tail_balance > 0.0) atoms_.push_back({j, 1.0, pj * positive_tail_balance});
      if (positive_tail_balance < 1.0) atoms_.push_back({j, -1.0, pj * (1.0 - positive_tail_balance)});
    }
    std::vector<double> w;
    for (const auto& a : atoms_) w.push_back(a.probability);
    picker_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }

  explicit LinearSpectralLaw(const LinearModelSpec& model)
      : LinearSpectralLaw(model.coeffs, model.noise.alpha, model.noise.positive_tail_balance()) {}

  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  double alpha() const noexcept { return alpha_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }

  std::size_t sample_atom(Engine& eng) const {
    auto picker = picker_;
    return picker(eng);
  }

  // Theta: |Theta_0| = 1.
  SpectralDraw theta(std::size_t atom) const {
    const auto& a = atoms_.at(atom);
    const double scale = a.sign / std::abs(coeffs_[a.shift]);
    return scaled(a.shift, scale);
  }

  // Q^(p): ||Q^(p)||_p = 1.
  SpectralDraw cluster(std::size_t atom, PExponent p) const {
    const auto& a = atoms_.at(atom);
    return scaled(a.shift, a.sign / p_modulus(coeffs_, p));
  }

 private:
  SpectralDraw scaled(std::size_t origin, double scale) const {
    SpectralDraw d;
    d.origin = origin;
    d.values.reserve(coeffs_.size());
    for (double c : coeffs_) d.values.push_back(c * scale);
    return d;
  }

  std::vector<double> coeffs_;
  double alpha_;
  std::vector<Atom> atoms_;
  std::discrete_distribution<std::size_t> picker_;
};

inline SpectralDraw sample_cluster_linear(const LinearModelSpec& model, PExponent p, Engine& eng) {
  const LinearSpectralLaw law(model);
  return law.cluster(law.sample_atom(eng), p);
}

inline SpectralDraw sample_cluster_linear(const LinearModelSpec& model, PExponent p, SeedSpec seed) {
  auto eng = make_engine(seed);
  return sample_cluster_linear(model, p, eng);
}

inline SpectralDraw sample_theta_linear(const LinearModelSpec& model, Engine& eng) {
  const LinearSpectralLaw law(model);
  return law.theta(law.sample_atom(eng));
}

/// c(p) = (||phi||_p / ||phi||_alpha)^alpha.
inline double cluster_constant_linear(std::span<const double> coeffs, double alpha, PExponent p) {
  detail::check_coeffs(coeffs);
  detail::check_alpha(alpha);
  if (p.is_finite() && p.value() == alpha) return 1.0;
  return std::pow(p_modulus(coeffs, p) / p_modulus(coeffs, PExponent::finite(alpha)), alpha);
}

/// Closed-form AR(1) constant (1 - |phi|^alpha) / (1 - |phi|^p)^(alpha/p).
inline double cluster_constant_ar1(double phi, double alpha, PExponent p) {
  detail::check_alpha(alpha);
  const double a = std::abs(phi);
  if (!(a < 1.0)) throw DomainError("AR(1) requires |phi| < 1");
  const double num = 1.0 - std::pow(a, alpha);
  if (p.is_infinite()) return num;
  return num / std::pow(1.0 - std::pow(a, p.value()), alpha / p.value());
}

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
};

namespace detail {
inline double change_of_norms_weight(const SpectralDraw& d, double alpha, PExponent p) {
  return std::pow(p_modulus(d.values, p) / p_modulus(d.values, PExponent::finite(alpha)), alpha);
}
}  // namespace detail

/// Monte Carlo mean of (||theta||_p / ||theta||_alpha)^alpha over draws from
/// `sampler(eng)`. Any scaling of the draw is accepted; the ratio is scale-free.
template <class Sampler>
McEstimate cluster_constant_mc(Sampler&& sampler, double alpha, PExponent p, std::size_t draws, Engine& eng) {
  if (draws == 0) throw DomainError("need at least one draw");
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double w = detail::change_of_norms_weight(sampler(eng), alpha, p);
    const double delta = w - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (w - mean);
  }
  McEstimate est{mean, 0.0, draws};
  if (draws > 1) est.std_error = std::sqrt(m2 / static_cast<double>(draws - 1) / static_cast<double>(draws));
  return est;
}

/// Same estimator for a law with finitely many atoms: draws are tallied per
/// atom and the functional is evaluated once per distinct atom.
inline McEstimate cluster_constant_mc(const LinearSpectralLaw& law, PExponent p, std::size_t draws, SeedSpec seed) {
  if (draws == 0) throw DomainError("need at least one draw");
  auto eng = make_engine(seed);
  std::vector<double> weights;
  weights.reserve(law.atoms().size());
  for (const auto& a : law.atoms()) weights.push_back(a.probability);
  // Multinomial counts by sequential conditional binomials.
  std::vector<std::uint64_t> counts(weights.size(), 0);
  std::uint64_t left = draws;
  double mass = 1.0;
  for (std::size_t a = 0; a < weights.size() && left > 0; ++a) {
    if (a + 1 == weights.size() || weights[a] >= mass) {
      counts[a] = left;
      break;
    }
    std::binomial_distribution<std::uint64_t> bin(left, std::clamp(weights[a] / mass, 0.0, 1.0));
    counts[a] = bin(eng);
    left -= counts[a];
    mass -= weights[a];
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] == 0) continue;
    const double w = detail::change_of_norms_weight(law.theta(a), law.alpha(), p);
    const auto c = static_cast<double>(counts[a]);
    sum += c * w;
    sum_sq += c * w * w;
  }
  const auto n = static_cast<double>(draws);
  McEstimate est{sum / n, 0.0, draws};
  if (draws > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.value * est.value) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

/// c(p) = E[||(Theta_t)_{t>=0}||_p^alpha - ||(Theta_t)_{t>=1}||_p^alpha],
/// evaluated exactly by summing over the law of J.
inline double cluster_constant_telescoping(std::span<const double> coeffs, double alpha, PExponent p) {
  detail::check_coeffs(coeffs);
  detail::check_alpha(alpha);
  const std::size_t len = coeffs.size();
  // tail[j] = ||(phi_t)_{t>=j}||_p^alpha
  std::vector<double> tail(len + 1, 0.0);
  if (p.is_infinite()) {
    double m = 0.0;
    for (std::size_t j = len; j-- > 0;) {
      m = std::max(m, std::abs(coeffs[j]));
      tail[j] = std::pow(m, alpha);
    }
  } else {
    const double q = p.value();
    double s = 0.0;
    for (std::size_t j = len; j-- > 0;) {
      s += std::pow(std::abs(coeffs[j]), q);
      tail[j] = std::pow(s, alpha / q);
    }
  }
  const auto law = ShiftLaw::from_coeffs(coeffs, alpha);
  double total = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    if (law.probabilities[j] == 0.0) continue;
    const double scale = std::pow(std::abs(coeffs[j]), alpha);
    total += law.probabilities[j] * (tail[j] - tail[j + 1]) / scale;
  }
  return total;
}

/// E[g_h(Q^(alpha))] for g_h(x) = |x_h|^alpha sign(x_0) sign(x_h).
inline double serial_dependence_oracle_linear(std::span<const double> coeffs, double alpha, long h) {
  detail::check_coeffs(coeffs);
  detail::check_alpha(alpha);
  const long len = static_cast<long>(coeffs.size());
  auto signed_pow = [&](long t) {
    if (t < 0 || t >= len) return 0.0;
    const double c = coeffs[static_cast<std::size_t>(t)];
    return c == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(c), alpha), c);
  };
  double num = 0.0;
  double norm = 0.0;
  for (long t = 0; t < len; ++t) {
    num += signed_pow(t) * signed_pow(t + h);
    norm += std::abs(signed_pow(t));
  }
  return num / (norm * norm);
}

/// c(1) E[(sup_t sum_{i<=t} Q^(1)_i)_+^alpha], enumerated over (J, sign).
/// The partial-sum supremum does not depend on J, only on the sign.
inline double supwalk_constant_oracle_linear(std::span<const double> coeffs, double alpha,
                                             double positive_tail_balance) {
  if (!(alpha >= 1.0)) throw DomainError("random-walk supremum constant requires alpha >= 1");
  detail::check_coeffs(coeffs);
  const double l1 = p_modulus(coeffs, PExponent::finite(1.0));
  auto sup_partial = [&](double sign) {
    double s = 0.0;
    double best = 0.0;
    for (double c : coeffs) {
      s += sign * c / l1;
      best = std::max(best, s);
    }
    return std::pow(best, alpha);
  };
  const double expect =
      positive_tail_balance * sup_partial(1.0) + (1.0 - positive_tail_balance) * sup_partial(-1.0);
  return cluster_constant_linear(coeffs, alpha, PExponent::finite(1.0)) * expect;
}

/// Rejection sampler for the spectral component of X_{[0,h]}: windows of a
/// stationary path are kept when their p-modulus exceeds the threshold and
/// returned normalized to p-modulus 1. Consecutive windows come from one
/// continuous path, so accepted draws are identically distributed but not
/// independent.
class ConditionalBlockSampler {
 public:
  static constexpr std::uint64_t default_max_attempts = 100'000'000;

  ConditionalBlockSampler(const ModelSpec& model, std::size_t h, PExponent p, double threshold, SeedSpec seed,
                          std::uint64_t max_attempts = default_max_attempts)
      : path_(model, seed), window_(h + 1), p_(p), threshold_(threshold), max_attempts_(max_attempts) {
    if (!(threshold > 0.0)) throw DomainError("threshold must be positive");
  }

  SpectralDraw next() {
    for (std::uint64_t attempt = 0; attempt < max_attempts_; ++attempt) {
      path_.fill(window_);
      ++attempts_;
      const double norm = p_modulus(window_, p_);
      if (norm > threshold_) {
        ++accepted_;
        SpectralDraw d;
        d.values.reserve(window_.size());
        for (double v : window_) d.values.push_back(v / norm);
        return d;
      }
    }
    throw ThresholdTooHighError("no block exceeded the threshold in " + std::to_string(max_attempts_) +
                                " attempts (acceptance rate below " +
                                std::to_string(1.0 / static_cast<double>(max_attempts_)) + ")");
  }

  std::uint64_t attempts() const noexcept { return attempts_; }
  std::uint64_t accepted() const noexcept { return accepted_; }

 private:
  PathStream path_;
  std::vector<double> window_;
  PExponent p_;
  double threshold_;
  std::uint64_t max_attempts_;
  std::uint64_t attempts_ = 0;
  std::uint64_t accepted_ = 0;
};

inline SpectralDraw conditional_block_sample(const ModelSpec& model, std::size_t h, PExponent p, double threshold,
                                             SeedSpec seed,
                                             std::uint64_t max_attempts = ConditionalBlockSampler::default_max_attempts) {
  ConditionalBlockSampler sampler(model, h, p, threshold, seed, max_attempts);
  return sampler.next();
}

}  // namespace lpblocks
