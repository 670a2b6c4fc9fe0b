// lpblocks: simulate regularly varying series and run extremal l^p-block
// cluster inference from the command line.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lpblocks/harness/experiment.hpp"
#include "lpblocks/lpblocks.hpp"

namespace {

using namespace lpblocks;
using namespace lpblocks::harness;

struct ModelOptions {
  std::string kind = "ar1";
  double phi = 0.8;
  std::string coeffs = "1";
  std::string noise = "student";
  double noise_alpha = 1.3;
  std::size_t burn_in = 1000;

  void attach(CLI::App* app) {
    app->add_option("--model", kind, "ar1, linear or iid")->check(CLI::IsMember({"ar1", "linear", "iid"}));
    app->add_option("--phi", phi, "AR(1) coefficient, |phi| < 1");
    app->add_option("--coeffs", coeffs, "comma-separated moving-average coefficients (linear model)");
    app->add_option("--noise", noise, "noise law: pareto or student")->check(CLI::IsMember({"pareto", "student"}));
    app->add_option("--noise-alpha", noise_alpha, "noise tail index / degrees of freedom");
    app->add_option("--burn-in", burn_in, "AR(1) burn-in steps");
  }

  ModelSpec build() const {
    const auto z = NoiseSpec::validated({parse_noise_law(noise), noise_alpha});
    if (kind == "ar1") return AR1ModelSpec(phi, z, burn_in);
    if (kind == "iid") return LinearModelSpec({1.0}, z);
    return LinearModelSpec(parse_list(coeffs), z);
  }

  static std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    if (out.empty()) throw DomainError("empty coefficient list");
    return out;
  }
};

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write '" + path + "'");
  return file;
}

std::vector<PExponent> parse_p_list(const std::string& text) {
  std::vector<PExponent> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(PExponent::parse(cell));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster inference for regularly varying time series via extremal l^p-blocks"};
  app.require_subcommand(1);

  // simulate
  ModelOptions sim_model;
  std::size_t sim_n = 8000;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "write a simulated series, one value per line");
  sim_model.attach(sim);
  sim->add_option("--n", sim_n, "sample size")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--out", sim_out, "output file (default stdout)");

  // estimate
  std::string est_input;
  FileEstimateOptions est_opt;
  std::string est_alpha = "hill";
  std::string est_p = "1";
  auto* est = app.add_subcommand("estimate", "run one estimator on a series file");
  est->add_option("--input", est_input, "series file")->required();
  est->add_option("--estimator", est_opt.estimator_id, "estimator id");
  est->add_option("--b", est_opt.b, "block length")->required();
  est->add_option("--kappa", est_opt.kappa, "k-rule exponent");
  est->add_option("--alpha", est_alpha, "tail index: value, hill[:k_tail] or hill-rb[:k_tail]");
  est->add_option("--p", est_p, "exponent for the exceedance functional (positive real or inf)");
  est->add_option("--k", est_opt.k, "number of extremal blocks (default: k-rule)");
  est->add_option("--k-prime", est_opt.k_prime, "order statistic for l^inf competitors (default: k)");

  // experiment
  std::string exp_config;
  std::string exp_out;
  unsigned exp_threads = 1;
  auto* exp = app.add_subcommand("experiment", "run a Monte Carlo experiment from a JSON config");
  exp->add_option("--config", exp_config, "experiment config (JSON)")->required();
  exp->add_option("--out", exp_out, "output directory (overrides the config)");
  exp->add_option("--threads", exp_threads, "worker threads (0: hardware concurrency)");

  // oracle
  std::string orc_phi_text;
  std::string orc_coeffs;
  double orc_alpha = 1.3;
  std::string orc_p = "0.5,1,2,inf";
  std::string orc_noise = "student";
  bool orc_json = false;
  long orc_lags = 3;
  auto* orc = app.add_subcommand("oracle", "closed-form cluster constants of a linear process");
  orc->add_option("--phi", orc_phi_text, "AR(1) coefficient");
  orc->add_option("--coeffs", orc_coeffs, "comma-separated moving-average coefficients");
  orc->add_option("--alpha", orc_alpha, "tail index")->check(CLI::PositiveNumber);
  orc->add_option("--p", orc_p, "comma-separated exponents");
  orc->add_option("--noise", orc_noise, "noise law (sets the tail balance)")->check(CLI::IsMember({"pareto", "student"}));
  orc->add_option("--lags", orc_lags, "largest serial-dependence lag");
  orc->add_flag("--json", orc_json, "print JSON");

  // ldratio
  ModelOptions ld_model;
  std::size_t ld_n = 200;
  std::string ld_p = "inf";
  double ld_x = 0.0;
  double ld_quantile = 0.0;
  std::uint64_t ld_reps = 100000;
  std::uint64_t ld_seed = 1;
  unsigned ld_threads = 1;
  bool ld_centered = false;
  std::size_t ld_pilot = default_pilot_size;
  auto* ld = app.add_subcommand("ldratio", "Monte Carlo large-deviation ratio for block norms");
  ld_model.attach(ld);
  ld->add_option("--n", ld_n, "block length")->check(CLI::PositiveNumber);
  ld->add_option("--p", ld_p, "exponent (positive real or inf)");
  ld->add_option("--x", ld_x, "marginal threshold");
  ld->add_option("--quantile", ld_quantile, "choose x as this quantile of pilot block norms");
  ld->add_option("--reps", ld_reps, "replications");
  ld->add_option("--seed", ld_seed, "master seed");
  ld->add_option("--threads", ld_threads, "worker threads");
  ld->add_flag("--centered", ld_centered, "compare against the centred level z_n");
  ld->add_option("--pilot", ld_pilot, "pilot sample size for moments and quantiles");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const auto model = sim_model.build();
      const auto series = simulate(model, sim_n, SeedSpec{sim_seed, 0});
      std::ofstream file;
      auto& out = open_out(sim_out, file);
      write_series(out, series, "model=" + model_to_json(model).dump() + " n=" + std::to_string(sim_n) +
                                    " seed=" + std::to_string(sim_seed));
    } else if (*est) {
      est_opt.alpha_mode = AlphaMode::parse(est_alpha);
      est_opt.p = PExponent::parse(est_p);
      if (est_opt.alpha_mode.kind == AlphaMode::Kind::oracle) {
        throw DomainError("estimate has no model; use --alpha <value> or --alpha hill[:k_tail]");
      }
      const auto report = estimate_from_file(est_input, est_opt);
      std::cout << report_to_json(report).dump() << '\n';
    } else if (*exp) {
      auto cfg = load_config(exp_config);
      if (!exp_out.empty()) cfg.output = exp_out;
      if (cfg.output.empty()) throw DomainError("no output directory: set 'output' in the config or pass --out");
      const auto res = run_experiment(cfg, exp_threads);
      write_experiment(cfg.output, cfg, res);
      write_summary_csv(std::cout, res.summary);
    } else if (*orc) {
      const auto z = NoiseSpec::validated({parse_noise_law(orc_noise), orc_alpha});
      LinearModelSpec model;
      if (!orc_coeffs.empty()) {
        model = LinearModelSpec(ModelOptions::parse_list(orc_coeffs), z);
      } else {
        const double phi = orc_phi_text.empty() ? 0.8 : std::stod(orc_phi_text);
        model = LinearModelSpec(ar1_truncated_coeffs(phi), z);
      }
      const auto rep = oracle_report(model, orc_alpha, parse_p_list(orc_p), orc_lags);
      if (orc_json) {
        std::cout << oracle_to_json(rep).dump(2) << '\n';
      } else {
        print_oracle_report(std::cout, rep);
      }
    } else if (*ld) {
      const auto model = ld_model.build();
      const auto p = PExponent::parse(ld_p);
      const SeedSpec seed{ld_seed, 0};
      double x = ld_x;
      if (ld_quantile > 0.0) {
        x = quantile_threshold(model, ld_n, p, ld_quantile, ld_pilot, derive(seed, 1));
      }
      if (!(x > 0.0)) throw DomainError("pass --x or --quantile");
      const auto r = ld_centered
                         ? ld_ratio_centered_mc(model, ld_n, p, tail_index(model), x, ld_reps, seed, ld_threads, ld_pilot)
                         : ld_ratio_mc(model, ld_n, p, x, ld_reps, seed, ld_threads);
      const json out{{"p", r.p.to_string()},
                     {"n", r.n},
                     {"x", r.x},
                     {"level", r.level},
                     {"reps", r.reps},
                     {"numerator_hits", r.numerator_hits},
                     {"denominator_hits", r.denominator_hits},
                     {"ratio", r.ratio},
                     {"std_error", r.std_error},
                     {"degenerate", r.degenerate}};
      std::cout << out.dump() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
