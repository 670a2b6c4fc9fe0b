#pragma once

// Monte Carlo experiment runner, estimator dispatch by name and the
// closed-form oracle table.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "lpblocks/blocks.hpp"
#include "lpblocks/estimators.hpp"
#include "lpblocks/harness/config.hpp"
#include "lpblocks/harness/series_io.hpp"
#include "lpblocks/largedev.hpp"
#include "lpblocks/models.hpp"
#include "lpblocks/spectral.hpp"

namespace lpblocks::harness {

// ---------------------------------------------------------------------------
// Estimator registry

struct EstimatorRequest {
  std::string id;
  double alpha = 0.0;
  std::size_t k = 0;
  std::size_t k_prime = 0;
  PExponent p = PExponent::finite(1.0);  // used by "exceedance"
};

/// Splits "serial:3" into ("serial", 3); plain ids get `fallback`.
inline std::pair<std::string, long> split_lag(const std::string& id, long fallback) {
  const auto colon = id.find(':');
  if (colon == std::string::npos) return {id, fallback};
  char* end = nullptr;
  const std::string tail = id.substr(colon + 1);
  const long h = std::strtol(tail.c_str(), &end, 10);
  if (tail.empty() || *end != '\0' || h < 0) throw DomainError("bad lag in estimator id '" + id + "'");
  return {id.substr(0, colon), h};
}

inline const std::vector<std::string>& known_estimators() {
  static const std::vector<std::string> ids{"theta_alpha", "theta_inf",    "c1_l1",        "inv_c1_l1",
                                            "c1_inf",      "inv_c1_inf",   "serial:<h>",   "supwalk",
                                            "stable_sigma", "stable_beta", "theta_lag:<h>", "exceedance"};
  return ids;
}

/// Runs a named estimator. The report's estimator_id is the requested id.
inline EstimateReport run_estimator(const BlockFrame& frame, const EstimatorRequest& req) {
  const auto [base, lag] = split_lag(req.id, 1);
  EstimateReport r;
  if (base == "theta_alpha") {
    r = extremal_index_alpha_blocks(frame, req.alpha, req.k);
  } else if (base == "theta_inf") {
    r = extremal_index_infty_blocks(frame, req.k_prime);
    r.alpha_used = req.alpha;
  } else if (base == "c1_l1" || base == "inv_c1_l1") {
    r = cluster_index_c1(frame, req.alpha, req.k);
    if (base == "inv_c1_l1") std::swap(r.value, r.auxiliary);
  } else if (base == "c1_inf" || base == "inv_c1_inf") {
    r = cluster_index_c1_infty(frame, req.k_prime);
    r.alpha_used = req.alpha;
    if (base == "inv_c1_inf") {
      if (r.degenerate || r.value == 0.0) {
        r.degenerate = true;
        r.value = 0.0;
      } else {
        r.value = 1.0 / r.value;
      }
    }
  } else if (base == "serial") {
    r = serial_dependence_estimate(frame, req.alpha, req.k, static_cast<std::size_t>(lag));
  } else if (base == "supwalk") {
    r = supwalk_constant_estimate(frame, req.alpha, req.k);
  } else if (base == "stable_sigma" || base == "stable_beta") {
    const auto sp = stable_scale_skew(frame, req.alpha, req.k);
    r = sp.c1;
    r.value = base == "stable_sigma" ? sp.sigma : sp.beta;
    r.degenerate = sp.degenerate;
  } else if (base == "theta_lag") {
    const long h = lag;
    r = theta_functional_estimate(frame, req.alpha, req.k, [h](const ShiftedBlock& x) { return std::abs(x.at(h)); });
  } else if (base == "exceedance") {
    r = cluster_functional_estimate(frame, req.p, req.k, kernels::exceedance(req.p));
    r.alpha_used = req.alpha;
  } else {
    std::string all;
    for (const auto& s : known_estimators()) all += (all.empty() ? "" : ", ") + s;
    throw DomainError("unknown estimator '" + req.id + "' (known: " + all + ")");
  }
  r.estimator_id = req.id;
  return r;
}

inline double resolve_alpha(const AlphaMode& mode, const ModelSpec* model, std::span<const double> series) {
  switch (mode.kind) {
    case AlphaMode::Kind::fixed: return mode.value;
    case AlphaMode::Kind::oracle:
      if (!model) throw DomainError("oracle alpha needs a model; pass a number or hill[:k_tail] instead");
      return tail_index(*model);
    case AlphaMode::Kind::hill: {
      const std::size_t k_tail = mode.k_tail ? mode.k_tail : std::max<std::size_t>(2, series.size() / 20);
      return hill_alpha(series, k_tail, HillOptions{mode.reduce_bias, -1.0});
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Experiments

enum class RowStatus { ok = 0, degenerate = 1, skipped = 2 };

struct ResultRow {
  std::string estimator_id;
  std::size_t n = 0;
  std::size_t b = 0;
  std::size_t k = 0;
  std::uint64_t rep = 0;
  std::uint64_t seed = 0;
  double value = 0.0;
  RowStatus status = RowStatus::ok;
  double wall_time = 0.0;  // seconds; kept in memory only, not written
};

struct SummaryRow {
  std::string estimator_id;
  std::size_t n = 0;
  std::size_t b = 0;
  std::size_t k = 0;
  std::size_t count = 0;  // non-degenerate replications
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0, mean = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
};

/// Linear-interpolation quantile of sorted data (R type 7).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Per (estimator, n, b) quantiles over the non-degenerate rows. Rows must be
/// grouped by (estimator, n, b) and ordered by rep within each group.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].estimator_id == rows[i].estimator_id && rows[j].n == rows[i].n &&
           rows[j].b == rows[i].b) {
      ++j;
    }
    SummaryRow s;
    s.estimator_id = rows[i].estimator_id;
    s.n = rows[i].n;
    s.b = rows[i].b;
    s.k = rows[i].k;
    std::vector<double> vals;
    double sum = 0.0;
    for (std::size_t r = i; r < j; ++r) {
      if (rows[r].status != RowStatus::ok) continue;
      vals.push_back(rows[r].value);
      sum += rows[r].value;
    }
    s.count = vals.size();
    std::sort(vals.begin(), vals.end());
    s.q05 = quantile_sorted(vals, 0.05);
    s.q25 = quantile_sorted(vals, 0.25);
    s.q50 = quantile_sorted(vals, 0.50);
    s.q75 = quantile_sorted(vals, 0.75);
    s.q95 = quantile_sorted(vals, 0.95);
    s.mean = vals.empty() ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(vals.size());
    out.push_back(s);
    i = j;
  }
  return out;
}

/// Series for replication `rep` at sample size n. Every estimator and block
/// length at that grid point sees this same series.
inline SeedSpec replication_seed(std::uint64_t master_seed, std::uint64_t rep, std::size_t n) {
  return derive(SeedSpec{master_seed, rep}, n);
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 1) {
  if (cfg.reps < 1 || cfg.n_grid.empty() || cfg.b_grid.empty() || cfg.estimators.empty()) {
    throw DomainError("experiment needs reps >= 1 and nonempty grids");
  }
  for (const auto& id : cfg.estimators) split_lag(id, 1);

  // per_rep[rep] holds rows in (n, b, estimator) order.
  std::vector<std::vector<ResultRow>> per_rep(cfg.reps);
  std::vector<std::string> errors(lpblocks::detail::resolve_threads(threads));
  lpblocks::detail::parallel_for(cfg.reps, threads, [&](std::uint64_t rep, unsigned worker) {
    try {
      auto& rows = per_rep[rep];
      for (std::size_t n : cfg.n_grid) {
        const auto seed = replication_seed(cfg.master_seed, rep, n);
        auto series = std::make_shared<const Series>(simulate(cfg.model, n, seed));
        const double alpha = resolve_alpha(cfg.alpha_mode, &cfg.model, series->values());
        for (std::size_t b : cfg.b_grid) {
          const bool skip = b > n || n / b < 2;
          std::unique_ptr<BlockFrame> frame;
          std::size_t k = 0;
          if (!skip) {
            frame = std::make_unique<BlockFrame>(series, b);
            k = default_k(n, b, cfg.kappa);
          }
          for (const auto& id : cfg.estimators) {
            ResultRow row{id, n, b, k, rep, stream_seed(seed), 0.0, RowStatus::skipped, 0.0};
            if (!skip) {
              const auto t0 = std::chrono::steady_clock::now();
              const auto rep_out = run_estimator(*frame, EstimatorRequest{id, alpha, k, k, PExponent::finite(1.0)});
              row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
              row.value = rep_out.value;
              row.status = rep_out.degenerate ? RowStatus::degenerate : RowStatus::ok;
            } else {
              row.value = std::numeric_limits<double>::quiet_NaN();
            }
            rows.push_back(std::move(row));
          }
        }
      }
    } catch (const std::exception& e) {
      if (errors[worker].empty()) errors[worker] = e.what();
    }
  });
  for (const auto& e : errors) {
    if (!e.empty()) throw DomainError("experiment failed: " + e);
  }

  ExperimentResult res;
  for (auto& rows : per_rep) {
    for (auto& r : rows) res.rows.push_back(std::move(r));
  }
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < cfg.estimators.size(); ++i) order.emplace(cfg.estimators[i], i);
  std::stable_sort(res.rows.begin(), res.rows.end(), [&](const ResultRow& a, const ResultRow& b) {
    return std::make_tuple(order[a.estimator_id], a.n, a.b, a.rep) <
           std::make_tuple(order[b.estimator_id], b.n, b.b, b.rep);
  });
  res.summary = summarize(res.rows);
  return res;
}

inline constexpr const char* results_header = "estimator_id,n,b,k,rep,seed,value,degenerate";
inline constexpr const char* summary_header = "estimator_id,n,b,k,count,q05,q25,q50,q75,q95,mean";

inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << results_header << '\n';
  for (const auto& r : rows) {
    out << r.estimator_id << ',' << r.n << ',' << r.b << ',' << r.k << ',' << r.rep << ',' << r.seed << ','
        << format_double(r.value) << ',' << static_cast<int>(r.status) << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << summary_header << '\n';
  for (const auto& s : rows) {
    out << s.estimator_id << ',' << s.n << ',' << s.b << ',' << s.k << ',' << s.count << ',' << format_double(s.q05)
        << ',' << format_double(s.q25) << ',' << format_double(s.q50) << ',' << format_double(s.q75) << ','
        << format_double(s.q95) << ',' << format_double(s.mean) << '\n';
  }
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json summary_to_json(const ExperimentConfig& cfg, const std::vector<SummaryRow>& rows) {
  json arr = json::array();
  for (const auto& s : rows) {
    arr.push_back({{"estimator_id", s.estimator_id},
                   {"n", s.n},
                   {"b", s.b},
                   {"k", s.k},
                   {"count", s.count},
                   {"q05", number_or_null(s.q05)},
                   {"q25", number_or_null(s.q25)},
                   {"q50", number_or_null(s.q50)},
                   {"q75", number_or_null(s.q75)},
                   {"q95", number_or_null(s.q95)},
                   {"mean", number_or_null(s.mean)}});
  }
  return {{"config", config_to_json(cfg)}, {"summary", arr}};
}

/// Writes results.csv, summary.csv and summary.json into `dir`.
inline void write_experiment(const std::string& dir, const ExperimentConfig& cfg, const ExperimentResult& res) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  {
    std::ofstream out(base / "results.csv");
    write_results_csv(out, res.rows);
  }
  {
    std::ofstream out(base / "summary.csv");
    write_summary_csv(out, res.summary);
  }
  {
    std::ofstream out(base / "summary.json");
    out << summary_to_json(cfg, res.summary).dump(2) << '\n';
  }
}

/// Parses a results.csv back into rows (used to audit summaries).
inline std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != results_header) throw ParseError("unexpected results header", 1);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw ParseError("expected 8 fields", lineno);
    ResultRow r;
    r.estimator_id = f[0];
    r.n = std::stoull(f[1]);
    r.b = std::stoull(f[2]);
    r.k = std::stoull(f[3]);
    r.rep = std::stoull(f[4]);
    r.seed = std::stoull(f[5]);
    r.value = std::strtod(f[6].c_str(), nullptr);
    r.status = static_cast<RowStatus>(std::stoi(f[7]));
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Single-file estimation

struct FileEstimateOptions {
  std::string estimator_id = "theta_alpha";
  PExponent p = PExponent::finite(1.0);
  std::size_t b = 0;
  double kappa = 1.0;
  AlphaMode alpha_mode = AlphaMode::parse("hill");
  std::size_t k = 0;        // 0: default_k(n, b, kappa)
  std::size_t k_prime = 0;  // 0: same as k
};

inline EstimateReport estimate_series(const Series& series, const FileEstimateOptions& opt) {
  if (opt.b < 1) throw DomainError("block length b must be >= 1");
  if (opt.b > series.size() / 2) {
    throw TooFewBlocksError("too few blocks: n=" + std::to_string(series.size()) + ", b=" + std::to_string(opt.b) +
                            " (need n >= 2b)");
  }
  const auto frame = partition(series, opt.b);
  const std::size_t k = opt.k ? opt.k : default_k(series.size(), opt.b, opt.kappa);
  const double alpha = resolve_alpha(opt.alpha_mode, nullptr, series.values());
  return run_estimator(frame, EstimatorRequest{opt.estimator_id, alpha, k, opt.k_prime ? opt.k_prime : k, opt.p});
}

inline EstimateReport estimate_from_file(const std::string& path, const FileEstimateOptions& opt) {
  return estimate_series(read_series_file(path), opt);
}

inline json report_to_json(const EstimateReport& r) {
  return {{"estimator_id", r.estimator_id}, {"value", number_or_null(r.value)},
          {"p", r.p.to_string()},           {"b", r.b},
          {"k", r.k},                       {"m", r.m},
          {"threshold", r.threshold},       {"selected_blocks", r.selected_blocks},
          {"alpha_used", r.alpha_used},     {"degenerate", r.degenerate},
          {"auxiliary", number_or_null(r.auxiliary)}};
}

// ---------------------------------------------------------------------------
// Oracle table

struct OracleRow {
  PExponent p = PExponent::infinity();
  double closed_form = 0.0;
  double telescoping = 0.0;
};

struct OracleReport {
  std::vector<OracleRow> constants;
  double theta = 0.0;  // c(inf)
  std::vector<std::pair<long, double>> serial;  // (h, E[g_h(Q^(alpha))])
  std::optional<double> supwalk;  // alpha >= 1 only
  double alpha = 0.0;
};

inline OracleReport oracle_report(const LinearModelSpec& model, double alpha, const std::vector<PExponent>& ps,
                                  long max_lag = 3) {
  OracleReport rep;
  rep.alpha = alpha;
  for (const auto& p : ps) {
    rep.constants.push_back(
        {p, cluster_constant_linear(model.coeffs, alpha, p), cluster_constant_telescoping(model.coeffs, alpha, p)});
  }
  rep.theta = cluster_constant_linear(model.coeffs, alpha, PExponent::infinity());
  for (long h = 0; h <= max_lag; ++h) rep.serial.emplace_back(h, serial_dependence_oracle_linear(model.coeffs, alpha, h));
  if (alpha >= 1.0) {
    rep.supwalk = supwalk_constant_oracle_linear(model.coeffs, alpha, model.noise.positive_tail_balance());
  }
  return rep;
}

inline void print_oracle_report(std::ostream& out, const OracleReport& rep) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "alpha = %.6g\n", rep.alpha);
  out << buf;
  out << "p          c(p) closed form    c(p) telescoping\n";
  for (const auto& r : rep.constants) {
    std::snprintf(buf, sizeof buf, "%-10s %-19.10g %-19.10g\n", r.p.to_string().c_str(), r.closed_form, r.telescoping);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "theta = c(inf) = %.10g\n", rep.theta);
  out << buf;
  for (const auto& [h, v] : rep.serial) {
    std::snprintf(buf, sizeof buf, "E[g_%ld(Q)] = %.10g\n", h, v);
    out << buf;
  }
  if (rep.supwalk) {
    std::snprintf(buf, sizeof buf, "random-walk supremum constant = %.10g\n", *rep.supwalk);
    out << buf;
  }
}

inline json oracle_to_json(const OracleReport& rep) {
  json c = json::array();
  for (const auto& r : rep.constants) {
    c.push_back({{"p", r.p.to_string()}, {"closed_form", r.closed_form}, {"telescoping", r.telescoping}});
  }
  json s = json::array();
  for (const auto& [h, v] : rep.serial) s.push_back({{"h", h}, {"value", v}});
  json out{{"alpha", rep.alpha}, {"constants", c}, {"theta", rep.theta}, {"serial_dependence", s}};
  out["supwalk"] = rep.supwalk ? json(*rep.supwalk) : json(nullptr);
  return out;
}

}  // namespace lpblocks::harness
