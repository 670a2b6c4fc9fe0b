#pragma once

// Seeded generators for regularly varying series: iid heavy-tailed noise,
// finite moving averages and the causal AR(1) recursion.

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "lpblocks/errors.hpp"
#include "lpblocks/rng.hpp"
#include "lpblocks/seqcore.hpp"

namespace lpblocks {

enum class NoiseLaw {
  pareto,   // P(Z > z) = z^-alpha on (1, inf); all mass in the right tail
  student,  // symmetric Student t with alpha degrees of freedom
};

struct NoiseSpec {
  NoiseLaw law = NoiseLaw::student;
  double alpha = 1.0;

  static NoiseSpec pareto(double alpha) { return validated({NoiseLaw::pareto, alpha}); }
  static NoiseSpec student(double alpha) { return validated({NoiseLaw::student, alpha}); }

  static NoiseSpec validated(NoiseSpec s) {
    if (!(s.alpha > 0.0) || !std::isfinite(s.alpha)) throw DomainError("noise tail index must be > 0");
    return s;
  }

  // lim P(Z > x) / P(|Z| > x), i.e. P(Theta_0^Z = +1).
  double positive_tail_balance() const noexcept { return law == NoiseLaw::pareto ? 1.0 : 0.5; }

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

inline std::string to_string(NoiseLaw law) { return law == NoiseLaw::pareto ? "pareto" : "student"; }

inline NoiseLaw parse_noise_law(const std::string& s) {
  if (s == "pareto") return NoiseLaw::pareto;
  if (s == "student") return NoiseLaw::student;
  throw DomainError("unknown noise law '" + s + "' (expected pareto or student)");
}

/// X_t = sum_{j=0}^{q} coeffs[j] Z_{t-j}.
struct LinearModelSpec {
  std::vector<double> coeffs{1.0};
  NoiseSpec noise;

  LinearModelSpec() = default;
  LinearModelSpec(std::vector<double> c, NoiseSpec z) : coeffs(std::move(c)), noise(NoiseSpec::validated(z)) {
    validate();
  }

  void validate() const {
    bool any = false;
    for (double c : coeffs) {
      if (!std::isfinite(c)) throw DomainError("linear coefficients must be finite");
      any = any || c != 0.0;
    }
    if (!any) throw DomainError("linear model needs at least one nonzero coefficient");
  }

  friend bool operator==(const LinearModelSpec&, const LinearModelSpec&) = default;
};

/// X_t = phi X_{t-1} + Z_t, started at 0 and run burn_in steps before output.
struct AR1ModelSpec {
  double phi = 0.0;
  NoiseSpec noise;
  std::size_t burn_in = 1000;

  AR1ModelSpec() = default;
  AR1ModelSpec(double p, NoiseSpec z, std::size_t burn = 1000) : phi(p), noise(NoiseSpec::validated(z)), burn_in(burn) {
    validate();
  }

  void validate() const {
    if (!(std::abs(phi) < 1.0)) throw DomainError("AR(1) requires |phi| < 1");
  }

  friend bool operator==(const AR1ModelSpec&, const AR1ModelSpec&) = default;
};

using ModelSpec = std::variant<LinearModelSpec, AR1ModelSpec>;

inline const NoiseSpec& noise_of(const ModelSpec& m) {
  return std::visit([](const auto& s) -> const NoiseSpec& { return s.noise; }, m);
}

inline double tail_index(const ModelSpec& m) { return noise_of(m).alpha; }

/// Lag L with |phi|^L < tol; coefficients phi^j for j = 0..L.
inline std::vector<double> ar1_truncated_coeffs(double phi, double tol = 1e-12) {
  if (!(std::abs(phi) < 1.0)) throw DomainError("AR(1) requires |phi| < 1");
  if (phi == 0.0) return {1.0};
  const auto lag = static_cast<std::size_t>(std::ceil(std::log(tol) / std::log(std::abs(phi))));
  std::vector<double> c(lag + 1);
  double v = 1.0;
  for (auto& x : c) {
    x = v;
    v *= phi;
  }
  return c;
}

/// The finite moving-average representation every oracle works with.
inline LinearModelSpec as_linear(const ModelSpec& m) {
  if (const auto* lin = std::get_if<LinearModelSpec>(&m)) return *lin;
  const auto& ar = std::get<AR1ModelSpec>(m);
  return LinearModelSpec(ar1_truncated_coeffs(ar.phi), ar.noise);
}

/// Draws iid noise from one engine. Holds distribution state, so one
/// sampler belongs to one stream.
class NoiseSampler {
 public:
  explicit NoiseSampler(const NoiseSpec& spec)
      : law_(spec.law), inv_alpha_(1.0 / spec.alpha), student_(spec.alpha) {}

  double operator()(Engine& eng) {
    if (law_ == NoiseLaw::pareto) {
      return std::pow(uniform_open0(eng), -inv_alpha_);
    }
    return student_(eng);
  }

 private:
  NoiseLaw law_;
  double inv_alpha_;
  // libstdc++ implements this as N(0,1) / sqrt(chi2_nu / nu).
  std::student_t_distribution<double> student_;
};

inline std::vector<double> sample_noise(const NoiseSpec& spec, std::size_t n, Engine& eng) {
  NoiseSampler draw(spec);
  std::vector<double> z(n);
  for (auto& v : z) v = draw(eng);
  return z;
}

inline Series sample_noise(const NoiseSpec& spec, std::size_t n, SeedSpec seed) {
  if (n == 0) throw DomainError("sample size must be >= 1");
  auto eng = make_engine(seed);
  return Series(sample_noise(spec, n, eng));
}

inline std::vector<double> simulate_linear(const LinearModelSpec& spec, std::size_t n, Engine& eng) {
  const std::size_t q = spec.coeffs.size() - 1;
  const auto z = sample_noise(spec.noise, n + q, eng);
  std::vector<double> x(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double s = 0.0;
    for (std::size_t j = 0; j <= q; ++j) s += spec.coeffs[j] * z[t + q - j];
    x[t] = s;
  }
  return x;
}

inline Series simulate_linear(const LinearModelSpec& spec, std::size_t n, SeedSpec seed) {
  if (n == 0) throw DomainError("sample size must be >= 1");
  spec.validate();
  auto eng = make_engine(seed);
  return Series(simulate_linear(spec, n, eng));
}

inline std::vector<double> simulate_ar1(const AR1ModelSpec& spec, std::size_t n, Engine& eng) {
  NoiseSampler draw(spec.noise);
  double x = 0.0;
  for (std::size_t t = 0; t < spec.burn_in; ++t) x = spec.phi * x + draw(eng);
  std::vector<double> out(n);
  for (auto& v : out) {
    x = spec.phi * x + draw(eng);
    v = x;
  }
  return out;
}

inline Series simulate_ar1(const AR1ModelSpec& spec, std::size_t n, SeedSpec seed) {
  if (n == 0) throw DomainError("sample size must be >= 1");
  spec.validate();
  auto eng = make_engine(seed);
  return Series(simulate_ar1(spec, n, eng));
}

inline std::vector<double> simulate(const ModelSpec& model, std::size_t n, Engine& eng) {
  return std::visit(
      [&](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, LinearModelSpec>) {
          return simulate_linear(s, n, eng);
        } else {
          return simulate_ar1(s, n, eng);
        }
      },
      model);
}

inline Series simulate(const ModelSpec& model, std::size_t n, SeedSpec seed) {
  if (n == 0) throw DomainError("sample size must be >= 1");
  auto eng = make_engine(seed);
  return Series(simulate(model, n, eng));
}

/// Continuous stationary path handed out in consecutive chunks. For AR(1)
/// the recursion state carries over between chunks, so burn-in is paid once.
class PathStream {
 public:
  PathStream(const ModelSpec& model, SeedSpec seed) : model_(model), eng_(make_engine(seed)), noise_(noise_of(model)) {
    if (const auto* lin = std::get_if<LinearModelSpec>(&model_)) {
      coeffs_ = lin->coeffs;
      history_.assign(coeffs_.size(), 0.0);
      for (std::size_t i = 0; i + 1 < coeffs_.size(); ++i) push_noise(noise_(eng_));
    } else {
      const auto& ar = std::get<AR1ModelSpec>(model_);
      phi_ = ar.phi;
      for (std::size_t t = 0; t < ar.burn_in; ++t) state_ = phi_ * state_ + noise_(eng_);
    }
  }

  double next() {
    if (coeffs_.empty()) {
      state_ = phi_ * state_ + noise_(eng_);
      return state_;
    }
    push_noise(noise_(eng_));
    // history_[head_] is the newest draw Z_t; walk backwards for Z_{t-j}.
    const std::size_t len = history_.size();
    double s = 0.0;
    std::size_t idx = head_;
    for (std::size_t j = 0; j < len; ++j) {
      s += coeffs_[j] * history_[idx];
      idx = idx == 0 ? len - 1 : idx - 1;
    }
    return s;
  }

  void fill(std::span<double> out) {
    for (auto& v : out) v = next();
  }

 private:
  void push_noise(double z) {
    head_ = head_ + 1 == history_.size() ? 0 : head_ + 1;
    history_[head_] = z;
  }

  ModelSpec model_;
  Engine eng_;
  NoiseSampler noise_;
  std::vector<double> coeffs_;
  std::vector<double> history_;
  std::size_t head_ = 0;
  double phi_ = 0.0;
  double state_ = 0.0;
};

}  // namespace lpblocks
