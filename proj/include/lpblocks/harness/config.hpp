#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpblocks/errors.hpp"
#include "lpblocks/models.hpp"

namespace lpblocks::harness {

using nlohmann::json;

/// Where the tail index fed to the estimators comes from.
struct AlphaMode {
  enum class Kind { oracle, fixed, hill };
  Kind kind = Kind::oracle;
  double value = 0.0;           // fixed
  std::size_t k_tail = 0;       // hill; 0 means floor(0.05 n)
  bool reduce_bias = false;     // hill with the jackknife correction

  // "oracle", a number, "hill", "hill:<k_tail>", "hill-rb" or "hill-rb:<k_tail>".
  static AlphaMode parse(const std::string& text) {
    AlphaMode m;
    if (text == "oracle") return m;
    auto hill_prefix = [&](const std::string& prefix) {
      if (text.rfind(prefix, 0) != 0) return false;
      const std::string rest = text.substr(prefix.size());
      if (!rest.empty() && rest != ":") {
        if (rest[0] != ':') return false;
        char* end = nullptr;
        const long long k = std::strtoll(rest.c_str() + 1, &end, 10);
        if (*end != '\0' || k < 2) throw DomainError("bad Hill k_tail in '" + text + "'");
        m.k_tail = static_cast<std::size_t>(k);
      }
      return true;
    };
    if (hill_prefix("hill-rb")) {
      m.kind = Kind::hill;
      m.reduce_bias = true;
      return m;
    }
    if (hill_prefix("hill")) {
      m.kind = Kind::hill;
      return m;
    }
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || !(v > 0.0)) {
      throw DomainError("alpha must be 'oracle', a positive number or 'hill[:k_tail]', got '" + text + "'");
    }
    m.kind = Kind::fixed;
    m.value = v;
    return m;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::oracle: return "oracle";
      case Kind::fixed: return std::to_string(value);
      case Kind::hill: {
        std::string s = reduce_bias ? "hill-rb" : "hill";
        if (k_tail) s += ":" + std::to_string(k_tail);
        return s;
      }
    }
    return {};
  }
};

struct ExperimentConfig {
  ModelSpec model;
  std::vector<std::size_t> n_grid;
  std::vector<std::size_t> b_grid;
  double kappa = 1.0;
  std::uint64_t reps = 1;
  std::vector<std::string> estimators;
  AlphaMode alpha_mode;
  std::uint64_t master_seed = 0;
  std::string output;
};

namespace detail {

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + " must be a JSON object", 0);
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ParseError("unknown key '" + key + "' in " + where, 0);
  }
}

template <class T>
T get_required(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError("missing key '" + key + "' in " + where, 0);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError("bad value for '" + key + "' in " + where + ": " + e.what(), 0);
  }
}

}  // namespace detail

inline NoiseSpec noise_from_json(const json& j) {
  detail::reject_unknown(j, {"law", "alpha"}, "noise");
  return NoiseSpec::validated(
      {parse_noise_law(detail::get_required<std::string>(j, "law", "noise")), detail::get_required<double>(j, "alpha", "noise")});
}

inline json noise_to_json(const NoiseSpec& n) { return {{"law", to_string(n.law)}, {"alpha", n.alpha}}; }

inline ModelSpec model_from_json(const json& j) {
  const auto type = detail::get_required<std::string>(j, "type", "model");
  if (type == "ar1") {
    detail::reject_unknown(j, {"type", "phi", "noise", "burn_in"}, "model");
    const auto burn = j.contains("burn_in") ? j.at("burn_in").get<std::size_t>() : std::size_t{1000};
    return AR1ModelSpec(detail::get_required<double>(j, "phi", "model"), noise_from_json(j.at("noise")), burn);
  }
  if (type == "linear") {
    detail::reject_unknown(j, {"type", "coeffs", "noise"}, "model");
    return LinearModelSpec(detail::get_required<std::vector<double>>(j, "coeffs", "model"),
                           noise_from_json(j.at("noise")));
  }
  if (type == "iid") {
    detail::reject_unknown(j, {"type", "noise"}, "model");
    return LinearModelSpec({1.0}, noise_from_json(j.at("noise")));
  }
  throw ParseError("unknown model type '" + type + "' (expected ar1, linear or iid)", 0);
}

inline json model_to_json(const ModelSpec& m) {
  if (const auto* ar = std::get_if<AR1ModelSpec>(&m)) {
    return {{"type", "ar1"}, {"phi", ar->phi}, {"noise", noise_to_json(ar->noise)}, {"burn_in", ar->burn_in}};
  }
  const auto& lin = std::get<LinearModelSpec>(m);
  return {{"type", "linear"}, {"coeffs", lin.coeffs}, {"noise", noise_to_json(lin.noise)}};
}

inline ExperimentConfig config_from_json(const json& j) {
  detail::reject_unknown(j,
                         {"model", "n_grid", "b_grid", "kappa", "reps", "estimators", "alpha_mode", "master_seed",
                          "output"},
                         "experiment config");
  ExperimentConfig c;
  if (!j.contains("model")) throw ParseError("missing key 'model' in experiment config", 0);
  c.model = model_from_json(j.at("model"));
  c.n_grid = detail::get_required<std::vector<std::size_t>>(j, "n_grid", "experiment config");
  c.b_grid = detail::get_required<std::vector<std::size_t>>(j, "b_grid", "experiment config");
  c.estimators = detail::get_required<std::vector<std::string>>(j, "estimators", "experiment config");
  if (j.contains("kappa")) c.kappa = j.at("kappa").get<double>();
  if (j.contains("reps")) c.reps = j.at("reps").get<std::uint64_t>();
  if (j.contains("alpha_mode")) c.alpha_mode = AlphaMode::parse(j.at("alpha_mode").get<std::string>());
  if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  if (c.reps < 1) throw ParseError("reps must be >= 1", 0);
  if (c.n_grid.empty() || c.b_grid.empty() || c.estimators.empty()) {
    throw ParseError("n_grid, b_grid and estimators must be nonempty", 0);
  }
  for (auto b : c.b_grid) {
    if (b < 1) throw ParseError("block lengths must be >= 1", 0);
  }
  if (!(c.kappa > 0.0)) throw ParseError("kappa must be > 0", 0);
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  return {{"model", model_to_json(c.model)},     {"n_grid", c.n_grid},
          {"b_grid", c.b_grid},                  {"kappa", c.kappa},
          {"reps", c.reps},                      {"estimators", c.estimators},
          {"alpha_mode", c.alpha_mode.to_string()}, {"master_seed", c.master_seed},
          {"output", c.output}};
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path + "'", 0);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
  }
  return config_from_json(j);
}

}  // namespace lpblocks::harness
