#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpm/equilibrium.hpp"
#include "tpm/error.hpp"
#include "tpm/info_model.hpp"
#include "tpm/montecarlo.hpp"
#include "tpm/pm_baseline.hpp"
#include "tpm/scoring.hpp"
#include "tpm/time_value.hpp"

// JSON representations of the model objects used by experiment and simulation
// config files.

namespace tpm::config {

using json = nlohmann::json;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config field '") + key + "': " + e.what());
  }
}

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("config: missing field '") + key + "'");
  return j.at(key);
}

/// {"kind": "binary_noisy", "alpha", "beta"} or {"kind": "table", "prior", "likelihood"}.
inline InformationModel parse_model(const json& j, std::size_t num_agents) {
  const auto kind = get_or<std::string>(j, "kind", "binary_noisy");
  if (kind == "binary_noisy") {
    return InformationModel::binary_noisy(get_or(j, "alpha", 0.5), get_or(j, "beta", 0.0), num_agents);
  }
  if (kind == "table") {
    return InformationModel(require(j, "prior").get<std::vector<double>>(),
                            require(j, "likelihood").get<std::vector<std::vector<double>>>(), num_agents);
  }
  throw InputError("config: unknown model kind '" + kind + "'");
}

/// {"rule": "quadratic" | "log", "scale": s}
inline ScoringRule parse_rule(const json& j) {
  const auto name = get_or<std::string>(j, "rule", "quadratic");
  const double scale = get_or(j, "scale", 1.0);
  if (name == "quadratic") return ScoringRule::quadratic(scale);
  if (name == "log" || name == "logarithmic") return ScoringRule::logarithmic(scale);
  throw InputError("config: unknown scoring rule '" + name + "'");
}

inline json to_json(const ScoringRule& rule) {
  return {{"rule", std::string(to_string(rule.kind))}, {"scale", rule.scale}};
}

/// {"kind": "exponential", "eta"} or {"kind": "table", "times", "values", "tail_rate"}.
inline TimeValue parse_time_value(const json& j) {
  const auto kind = get_or<std::string>(j, "kind", "exponential");
  if (kind == "exponential") return TimeValue::exponential(get_or(j, "eta", 1.0));
  if (kind == "table") {
    return TimeValue::table(require(j, "times").get<std::vector<double>>(),
                            require(j, "values").get<std::vector<double>>(), get_or(j, "tail_rate", 1.0));
  }
  throw InputError("config: unknown time value kind '" + kind + "'");
}

/// {"kind": "linear" | "exponential", "lambda"}
inline AccessFunction parse_access(const json& j) {
  const auto kind = get_or<std::string>(j, "kind", "exponential");
  const double lam = get_or(j, "lambda", 1.0);
  if (kind == "linear") return AccessFunction::linear(lam);
  if (kind == "exponential") return AccessFunction::exponential(lam);
  throw InputError("config: unknown access kind '" + kind + "'");
}

inline Mechanism parse_mechanism(const std::string& name) {
  if (name == "fpm") return Mechanism::fpm;
  if (name == "mvp") return Mechanism::mvp;
  if (name == "pm_batch") return Mechanism::pm_batch;
  if (name == "pm_sequential") return Mechanism::pm_sequential;
  throw InputError("config: unknown mechanism '" + name + "'");
}

/// {"kind": "truthful" | "perturbed" | "delayed" | "silent", "amount", "entry"}
inline ReportBehavior parse_behavior(const json& j) {
  const auto kind = j.is_string() ? j.get<std::string>() : get_or<std::string>(j, "kind", "truthful");
  if (kind == "truthful") return ReportBehavior::truthful();
  if (kind == "silent") return ReportBehavior::silent();
  if (kind == "perturbed") return ReportBehavior::perturbed(get_or(j, "amount", 0.0), get_or<std::size_t>(j, "entry", 0));
  if (kind == "delayed") return ReportBehavior::delayed(get_or(j, "amount", 0.0));
  throw InputError("config: unknown report policy '" + kind + "'");
}

inline json to_json(const ReportBehavior& b) {
  static const char* names[] = {"truthful", "perturbed", "delayed", "silent"};
  return {{"kind", names[static_cast<int>(b.kind)]}, {"amount", b.amount}, {"entry", b.entry}};
}

/// Simulation config: model, mechanism, rule, access, latency, h, profile, trials, seed.
struct SimulationSetup {
  SimConfig sim;
  StrategyProfile profile;
};

inline SimulationSetup parse_simulation(const json& j) {
  const auto n = get_or<std::size_t>(j, "n", 2);
  SimConfig sim{parse_model(get_or(j, "model", json::object()), n)};
  sim.mechanism = parse_mechanism(get_or<std::string>(j, "mechanism", "fpm"));
  sim.rule = parse_rule(get_or(j, "scoring", json::object()));
  sim.access = parse_access(get_or(j, "access", json::object()));
  sim.latency = LatencyFamily::exponential(get_or(get_or(j, "latency", json::object()), "lambda", 1.0));
  sim.h = parse_time_value(get_or(j, "time_value", json::object()));
  sim.trials = get_or<std::size_t>(j, "trials", 10000);
  sim.seed = get_or<std::uint64_t>(j, "seed", 0);
  sim.threads = get_or<unsigned>(j, "threads", 0);

  StrategyProfile profile = StrategyProfile::symmetric(n, 0.0);
  const json effort = get_or(j, "effort", json(0.0));
  if (effort.is_array()) {
    profile.effort = effort.get<std::vector<double>>();
  } else {
    profile.effort.assign(n, effort.get<double>());
  }
  const json policy = get_or(j, "policy", json("truthful"));
  if (policy.is_array()) {
    profile.behavior.clear();
    for (const auto& p : policy) profile.behavior.push_back(parse_behavior(p));
  } else {
    profile.behavior.assign(n, parse_behavior(policy));
  }
  profile.validate(n);
  return {std::move(sim), std::move(profile)};
}

inline json to_json(const Estimate& e) { return {{"mean", e.mean}, {"standard_error", e.standard_error}}; }

inline json to_json(const SimStats& s) {
  json agents = json::array();
  for (std::size_t i = 0; i < s.reward.size(); ++i) {
    agents.push_back({{"agent", i},
                      {"reward", to_json(s.reward[i])},
                      {"cost", to_json(s.cost[i])},
                      {"utility", to_json(s.utility[i])}});
  }
  return {{"trials", s.trials},
          {"agents", agents},
          {"principal_utility", to_json(s.principal_utility)},
          {"welfare", to_json(s.welfare)},
          {"value", to_json(s.value)},
          {"accounting_violations", s.accounting_violations}};
}

inline json to_json(const EquilibriumResult& r) {
  return {{"effort", r.effort},
          {"residual", r.residual},
          {"corner", r.corner},
          {"bracket", {r.bracket_lo, r.bracket_hi}}};
}

}  // namespace tpm::config
