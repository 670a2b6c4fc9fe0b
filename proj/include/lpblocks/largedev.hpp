#pragma once

// Monte Carlo checks of the block large-deviation limit
//   P(||X_[1,n]||_p > x) / (n P(|X_0| > x)) -> c(p),
// and of its centred counterpart for moderate thresholds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "lpblocks/errors.hpp"
#include "lpblocks/models.hpp"
#include "lpblocks/rng.hpp"
#include "lpblocks/seqcore.hpp"

namespace lpblocks {

struct RatioEstimate {
  std::uint64_t numerator_hits = 0;    // replications with ||X_[1,n]||_p > level
  std::uint64_t denominator_hits = 0;  // observations with |X_t| > x, over all replications
  double ratio = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  double x = 0.0;      // marginal threshold
  double level = 0.0;  // threshold applied to the block norm (x, or z_n when centred)
  PExponent p = PExponent::infinity();
  std::uint64_t reps = 0;
  bool degenerate = false;
};

/// One block-norm threshold and the marginal threshold it is compared against.
struct LdLevel {
  PExponent p = PExponent::infinity();
  double level = 0.0;
  double x = 0.0;
};

namespace detail {

struct LdTally {
  std::uint64_t hits = 0;      // sum I_r
  std::uint64_t count = 0;     // sum C_r
  std::uint64_t count_sq = 0;  // sum C_r^2
  std::uint64_t cross = 0;     // sum I_r C_r

  void merge(const LdTally& o) noexcept {
    hits += o.hits;
    count += o.count;
    count_sq += o.count_sq;
    cross += o.cross;
  }
};

inline unsigned resolve_threads(unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return threads;
}

// Runs body(rep) for rep in [0, reps) on `threads` workers in contiguous
// chunks; the chunk layout is independent of scheduling.
template <class Body>
void parallel_for(std::uint64_t reps, unsigned threads, Body&& body) {
  threads = resolve_threads(threads);
  if (threads == 1 || reps < 2) {
    for (std::uint64_t r = 0; r < reps; ++r) body(r, 0u);
    return;
  }
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (reps + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::uint64_t lo = w * chunk;
    const std::uint64_t hi = std::min(reps, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi, w] {
      for (std::uint64_t r = lo; r < hi; ++r) body(r, w);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Ratio estimates for several (p, level, x) triples from one set of
/// replications. Replication r simulates X_[1,n] from stream derive(seed, r).
/// The marginal tail P(|X_0| > x) is estimated from every simulated
/// observation; the standard error is the delta-method error of the ratio of
/// the two per-replication means.
inline std::vector<RatioEstimate> ld_ratio_mc_levels(const ModelSpec& model, std::size_t n,
                                                     const std::vector<LdLevel>& levels, std::uint64_t reps,
                                                     SeedSpec seed, unsigned threads = 1) {
  if (reps < 1) throw DomainError("reps must be >= 1");
  if (n < 1) throw DomainError("n must be >= 1");
  for (const auto& lv : levels) {
    if (!(lv.x > 0.0) || !(lv.level > 0.0)) throw DomainError("thresholds must be positive");
  }
  threads = detail::resolve_threads(threads);
  std::vector<std::vector<detail::LdTally>> per_worker(threads, std::vector<detail::LdTally>(levels.size()));
  detail::parallel_for(reps, threads, [&](std::uint64_t r, unsigned w) {
    auto eng = make_engine(derive(seed, r));
    const auto path = simulate(model, n, eng);
    auto& tallies = per_worker[w];
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto& lv = levels[i];
      std::uint64_t c = 0;
      for (double v : path) c += std::abs(v) > lv.x ? 1u : 0u;
      const std::uint64_t hit = p_modulus(path, lv.p) > lv.level ? 1u : 0u;
      auto& t = tallies[i];
      t.hits += hit;
      t.count += c;
      t.count_sq += c * c;
      t.cross += hit * c;
    }
  });

  std::vector<RatioEstimate> out;
  const auto reps_d = static_cast<double>(reps);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    detail::LdTally t;
    for (const auto& w : per_worker) t.merge(w[i]);
    RatioEstimate e;
    e.numerator_hits = t.hits;
    e.denominator_hits = t.count;
    e.n = n;
    e.x = levels[i].x;
    e.level = levels[i].level;
    e.p = levels[i].p;
    e.reps = reps;
    if (t.count == 0) {
      e.degenerate = true;
      out.push_back(e);
      continue;
    }
    const double mi = static_cast<double>(t.hits) / reps_d;
    const double mc = static_cast<double>(t.count) / reps_d;
    e.ratio = mi / mc;
    if (reps > 1) {
      const double denom = reps_d - 1.0;
      const double var_i = (static_cast<double>(t.hits) - reps_d * mi * mi) / denom;
      const double var_c = (static_cast<double>(t.count_sq) - reps_d * mc * mc) / denom;
      const double cov = (static_cast<double>(t.cross) - reps_d * mi * mc) / denom;
      const double var_ratio = (var_i / (mc * mc) - 2.0 * mi * cov / (mc * mc * mc) +
                                mi * mi * var_c / (mc * mc * mc * mc)) /
                               reps_d;
      e.std_error = std::sqrt(std::max(0.0, var_ratio));
    }
    out.push_back(e);
  }
  return out;
}

inline RatioEstimate ld_ratio_mc(const ModelSpec& model, std::size_t n, PExponent p, double x, std::uint64_t reps,
                                 SeedSpec seed, unsigned threads = 1) {
  return ld_ratio_mc_levels(model, n, {LdLevel{p, x, x}}, reps, seed, threads).front();
}

/// The moment z_n needs: E|X|^p when p < alpha, the truncated moment
/// E[|X|^alpha 1(|X| <= x)] when p = alpha, nothing when p > alpha.
struct LevelMoment {
  enum class Kind { none, absolute_p, truncated_alpha };
  Kind kind = Kind::none;
  double value = 0.0;
};

/// z_n = x (n x^-p E|X|^p + 1)^(1/p)              for p < alpha,
///       x (n x^-alpha E[|X|^alpha 1(|X|<=x)] + 1)^(1/alpha)  for p = alpha,
///       x                                          for p > alpha.
inline double centered_level(PExponent p, double alpha, double x, std::size_t n, LevelMoment moment) {
  if (!(x > 0.0)) throw DomainError("threshold must be positive");
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (p.value() > alpha) return x;
  const bool at_alpha = p.value() == alpha;
  const auto want = at_alpha ? LevelMoment::Kind::truncated_alpha : LevelMoment::Kind::absolute_p;
  if (moment.kind != want) {
    throw DomainError(at_alpha ? "p = alpha needs the truncated alpha-moment E[|X|^alpha 1(|X| <= x)]"
                               : "p < alpha needs the absolute moment E|X|^p");
  }
  if (!(moment.value >= 0.0) || !std::isfinite(moment.value)) throw DomainError("moment must be finite and >= 0");
  const double q = p.value();
  return x * std::pow(static_cast<double>(n) * std::pow(x, -q) * moment.value + 1.0, 1.0 / q);
}

/// Estimates the moment centered_level needs from `pilot` stationary draws.
inline LevelMoment pilot_moment(const ModelSpec& model, PExponent p, double alpha, double x, std::size_t pilot,
                                SeedSpec seed) {
  if (p.value() > alpha) return {};
  auto eng = make_engine(seed);
  const auto draws = simulate(model, pilot, eng);
  double s = 0.0;
  if (p.value() == alpha) {
    for (double v : draws) {
      const double a = std::abs(v);
      if (a <= x) s += std::pow(a, alpha);
    }
    return {LevelMoment::Kind::truncated_alpha, s / static_cast<double>(pilot)};
  }
  for (double v : draws) s += std::pow(std::abs(v), p.value());
  return {LevelMoment::Kind::absolute_p, s / static_cast<double>(pilot)};
}

inline constexpr std::size_t default_pilot_size = 1'000'000;

/// As ld_ratio_mc, but the block norm is compared against z_n with the
/// moment taken from a pilot sample (stream id ~0 of `seed`).
inline RatioEstimate ld_ratio_centered_mc(const ModelSpec& model, std::size_t n, PExponent p, double alpha, double x,
                                          std::uint64_t reps, SeedSpec seed, unsigned threads = 1,
                                          std::size_t pilot = default_pilot_size) {
  const auto moment = pilot_moment(model, p, alpha, x, pilot, derive(seed, ~std::uint64_t{0}));
  const double z = centered_level(p, alpha, x, n, moment);
  return ld_ratio_mc_levels(model, n, {LdLevel{p, z, x}}, reps, seed, threads).front();
}

/// q-quantile of ||X_[1,n]||_p over `pilot` independent replications.
inline double quantile_threshold(const ModelSpec& model, std::size_t n, PExponent p, double q, std::size_t pilot,
                                 SeedSpec seed) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  if (pilot < 1) throw DomainError("pilot size must be >= 1");
  std::vector<double> norms(pilot);
  for (std::size_t r = 0; r < pilot; ++r) {
    auto eng = make_engine(derive(seed, r));
    norms[r] = p_modulus(simulate(model, n, eng), p);
  }
  const auto idx = std::min(pilot - 1, static_cast<std::size_t>(std::floor(q * static_cast<double>(pilot))));
  std::nth_element(norms.begin(), norms.begin() + static_cast<std::ptrdiff_t>(idx), norms.end());
  return norms[idx];
}

}  // namespace lpblocks
