#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "lpblocks/errors.hpp"
#include "lpblocks/seqcore.hpp"

namespace lpblocks {

/// A series cut into m = floor(n / b) disjoint blocks of length b; the final
/// partial block is dropped. Block p-moduli are computed on first request and
/// cached; the cache is guarded, so concurrent readers are fine.
class BlockFrame {
 public:
  BlockFrame(std::shared_ptr<const Series> series, std::size_t b) : series_(std::move(series)), b_(b) {
    if (!series_ || series_->empty()) throw DomainError("cannot partition an empty series");
    if (b_ < 1 || b_ > series_->size()) {
      throw DomainError("block length must lie in [1, n]");
    }
    m_ = series_->size() / b_;
    if (m_ < 2) {
      throw TooFewBlocksError("too few blocks: n=" + std::to_string(series_->size()) + ", b=" +
                              std::to_string(b_) + " gives m=" + std::to_string(m_) + " (need m >= 2)");
    }
  }

  std::size_t n() const noexcept { return series_->size(); }
  std::size_t block_length() const noexcept { return b_; }
  std::size_t block_count() const noexcept { return m_; }
  const Series& series() const noexcept { return *series_; }

  // Block t is B_{t+1} = X_{t b + [1, b]} (0-based t).
  std::span<const double> block(std::size_t t) const { return series_->values().subspan(t * b_, b_); }

  const std::vector<double>& norms(PExponent p) const {
    std::lock_guard lock(cache_->mutex);
    auto key = p.value();
    auto it = cache_->norms.find(key);
    if (it == cache_->norms.end()) {
      std::vector<double> out(m_);
      for (std::size_t t = 0; t < m_; ++t) out[t] = p_modulus(block(t), p);
      it = cache_->norms.emplace(key, std::move(out)).first;
    }
    return it->second;
  }

 private:
  struct Cache {
    std::mutex mutex;
    std::map<double, std::vector<double>> norms;  // keyed by p, +inf for the sup norm
  };

  std::shared_ptr<const Series> series_;
  std::size_t b_;
  std::size_t m_ = 0;
  std::unique_ptr<Cache> cache_ = std::make_unique<Cache>();
};

inline BlockFrame partition(std::shared_ptr<const Series> series, std::size_t b) {
  return BlockFrame(std::move(series), b);
}

inline BlockFrame partition(const Series& series, std::size_t b) {
  return BlockFrame(std::make_shared<const Series>(series), b);
}

inline const std::vector<double>& block_norms(const BlockFrame& frame, PExponent p) { return frame.norms(p); }

/// k = max{2, floor(n / b^(1 + kappa))}, clamped to m = floor(n / b).
inline std::size_t default_k(std::size_t n, std::size_t b, double kappa = 1.0) {
  if (n < 1 || b < 1) throw DomainError("n and b must be >= 1");
  if (!(kappa > 0.0)) throw DomainError("kappa must be > 0");
  const double raw = std::floor(static_cast<double>(n) / std::pow(static_cast<double>(b), 1.0 + kappa));
  std::size_t k = std::max<std::size_t>(2, static_cast<std::size_t>(raw));
  return std::min(k, std::max<std::size_t>(n / b, 2));
}

struct ThresholdChoice {
  std::size_t k = 0;
  double threshold = 0.0;  // k-th largest block p-modulus
};

inline ThresholdChoice threshold_from_norms(std::span<const double> norms, std::size_t k) {
  if (k < 2 || k > norms.size()) {
    throw DomainError("k=" + std::to_string(k) + " outside [2, m=" + std::to_string(norms.size()) + "]");
  }
  return {k, kth_order_stat(norms, k)};
}

inline ThresholdChoice threshold_from_order_stat(const BlockFrame& frame, PExponent p, std::size_t k) {
  return threshold_from_norms(frame.norms(p), k);
}

}  // namespace lpblocks
