#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpm/config.hpp"
#include "tpm/equilibrium.hpp"
#include "tpm/error.hpp"
#include "tpm/info_model.hpp"
#include "tpm/montecarlo.hpp"
#include "tpm/pm_baseline.hpp"
#include "tpm/table.hpp"

namespace tpm {

/// Which figure to regenerate, its parameter overrides and where CSVs go.
struct ExperimentConfig {
  std::string experiment;
  nlohmann::json parameters = nlohmann::json::object();
  std::string output_path = ".";
  unsigned threads = 0;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"fig_original", "fig_late",           "fig_eas", "fig_noise",
                                                 "fig_subst",    "fig_welfare_heatmap", "custom"};
  return names;
}

/// Complementarity residual of an equilibrium: the FOC value for interior
/// roots, and the violated part of the boundary sign condition at corners.
inline double kkt_residual(const EquilibriumResult& r) {
  if (!r.corner) return r.residual;
  if (r.effort == 0.0) return std::max(0.0, r.residual);
  return std::max(0.0, -r.residual);
}

namespace detail {

using json = nlohmann::json;

/// start, start + step, ..., up to stop (inclusive within half a step).
inline std::vector<double> linear_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw InputError("grid: need step > 0 and stop >= start");
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double x = start + static_cast<double>(i) * step;
    if (x > stop + 0.5 * step) break;
    grid.push_back(x);
  }
  return grid;
}

inline std::vector<double> grid_param(const json& p, const char* key, std::vector<double> fallback) {
  if (!p.contains(key)) return fallback;
  const json& g = p.at(key);
  if (g.is_array()) return g.get<std::vector<double>>();
  if (g.is_object()) {
    return linear_grid(config::require(g, "start").get<double>(), config::require(g, "stop").get<double>(),
                       config::require(g, "step").get<double>());
  }
  return {g.get<double>()};
}

inline std::vector<std::size_t> count_grid_param(const json& p, const char* key, std::size_t lo, std::size_t hi) {
  if (p.contains(key) && p.at(key).is_array()) return p.at(key).get<std::vector<std::size_t>>();
  std::vector<std::size_t> out;
  for (std::size_t n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

inline std::string label(const char* prefix, double x) { return std::string(prefix) + format_number(x); }

/// Evaluates rows in parallel and keeps grid order.
inline std::vector<std::vector<double>> evaluate_rows(std::size_t count, unsigned threads,
                                                      const std::function<std::vector<double>(std::size_t)>& row,
                                                      const std::function<std::string(std::size_t)>& describe) {
  std::vector<std::vector<double>> rows(count);
  std::vector<std::optional<std::string>> failures(count);
  parallel_for(count, threads, [&](std::size_t i) {
    try {
      rows[i] = row(i);
    } catch (const NumericalError& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < count; ++i) {
    if (failures[i]) throw NumericalError("grid point " + describe(i) + ": " + *failures[i]);
  }
  return rows;
}

inline ScoreSequence sequence_param(const json& p, const char* key, std::vector<double> fallback) {
  return ScoreSequence(p.contains(key) ? p.at(key).get<std::vector<double>>() : std::move(fallback));
}

// Prediction-market winner race, both access families.
inline std::vector<Table> fig_original(const json& p, unsigned threads) {
  const double lam = config::get_or(p, "lambda", 3.0);
  const auto ns = count_grid_param(p, "n", 2, config::get_or<std::size_t>(p, "n_max", 20));
  std::vector<Table> out;
  for (const auto kind : {AccessFunction::Kind::linear, AccessFunction::Kind::exponential}) {
    const auto access = AccessFunction::make(kind, lam);
    Table t{kind == AccessFunction::Kind::linear ? "fig_original_linear" : "fig_original_exponential",
            {"n", "optimal_effort", "optimal_welfare", "self_effort", "self_welfare", "self_residual", "self_corner"},
            {}};
    t.rows = evaluate_rows(
        ns.size(), threads,
        [&](std::size_t i) {
          const std::size_t n = ns[i];
          const double c_opt = pm_batch_optimal_effort(access, n);
          const auto eq = pm_batch_equilibrium(access, n);
          return std::vector<double>{static_cast<double>(n),
                                     c_opt,
                                     pm_batch_welfare(access, n, c_opt),
                                     eq.effort,
                                     pm_batch_welfare(access, n, eq.effort),
                                     kkt_residual(eq),
                                     eq.corner ? 1.0 : 0.0};
        },
        [&](std::size_t i) { return "n=" + std::to_string(ns[i]); });
    out.push_back(std::move(t));
  }
  return out;
}

// Expected score after k reports and the marginal value of each report.
inline std::vector<Table> fig_late(const json& p, unsigned) {
  const std::size_t k_max = config::get_or<std::size_t>(p, "k_max", 10);
  const auto model = InformationModel::binary_noisy(config::get_or(p, "alpha", 0.02), config::get_or(p, "beta", 0.2),
                                                    k_max);
  const auto rule = config::parse_rule(config::get_or(p, "scoring", json::object()));
  const auto v = v_sequence(model, rule, k_max);
  const double base = expected_base_score(model, rule);
  Table score{"fig_late_score", {"k", "expected_score"}, {}};
  Table reward{"fig_late_reward", {"k", "marginal_reward"}, {}};
  for (std::size_t k = 0; k <= k_max; ++k) {
    score.rows.push_back({static_cast<double>(k), base + v[k]});
    if (k >= 1) reward.rows.push_back({static_cast<double>(k), v.increment(k - 1)});
  }
  return {score, reward};
}

// Equilibrium effort against the latency rate.
inline std::vector<Table> fig_eas(const json& p, unsigned threads) {
  const auto v = sequence_param(p, "v", {0.0, 2.0, 3.0});
  const std::size_t n = v.max_reports();
  const auto h = TimeValue::exponential(config::get_or(p, "eta", 1.0));
  std::vector<double> lambdas = linear_grid(0.5, 2.0, 0.05);
  for (double x : linear_grid(2.1, 3.0, 0.1)) lambdas.push_back(x);
  for (double x : linear_grid(3.5, 15.0, 0.5)) lambdas.push_back(x);
  lambdas = grid_param(p, "lambda", lambdas);
  Table t{"fig_eas", {"lambda", "pm_effort", "pm_residual", "mvp_effort", "mvp_residual"}, {}};
  t.rows = evaluate_rows(
      lambdas.size(), threads,
      [&](std::size_t i) {
        const double lam = lambdas[i];
        const auto pm = pm_race_equilibrium(v, n, lam);
        const auto mvp = mvp_equilibrium(LatencyFamily::exponential(lam), h, v, n);
        return std::vector<double>{lam, pm.effort, kkt_residual(pm), mvp.effort, kkt_residual(mvp)};
      },
      [&](std::size_t i) { return label("lambda=", lambdas[i]); });
  return {t};
}

// Equilibrium effort against signal noise, scoring scale 20 by default.
inline std::vector<Table> fig_noise(const json& p, unsigned threads) {
  const double alpha = config::get_or(p, "alpha", 0.1);
  const std::size_t n = config::get_or<std::size_t>(p, "n", 2);
  json scoring = config::get_or(p, "scoring", json::object());
  // Scale 20 reproduces the plotted values; see tools/calibrate_scale.py.
  if (!scoring.contains("scale")) scoring["scale"] = 20.0;
  const auto rule = config::parse_rule(scoring);
  const auto h = TimeValue::exponential(config::get_or(p, "eta", 1.0));
  const auto betas = grid_param(p, "beta", linear_grid(0.0, 0.38, 0.01));
  const auto lambdas = grid_param(p, "lambda", {0.5, 1.0, 3.0, 12.0});

  Table t{"fig_noise", {"beta"}, {}};
  for (std::size_t k = 1; k <= n; ++k) t.columns.push_back("v" + std::to_string(k));
  t.columns.push_back("pm_effort");
  t.columns.push_back("pm_residual");
  for (double lam : lambdas) {
    t.columns.push_back(label("mvp_effort_lambda_", lam));
    t.columns.push_back(label("mvp_residual_lambda_", lam));
  }
  t.rows = evaluate_rows(
      betas.size(), threads,
      [&](std::size_t i) {
        const auto model = InformationModel::binary_noisy(alpha, betas[i], n);
        const auto v = v_sequence(model, rule, n);
        std::vector<double> row{betas[i]};
        for (std::size_t k = 1; k <= n; ++k) row.push_back(v[k]);
        const auto pm = pm_race_equilibrium(v, n);
        row.push_back(pm.effort);
        row.push_back(kkt_residual(pm));
        for (double lam : lambdas) {
          const auto mvp = mvp_equilibrium(LatencyFamily::exponential(lam), h, v, n);
          row.push_back(mvp.effort);
          row.push_back(kkt_residual(mvp));
        }
        return row;
      },
      [&](std::size_t i) { return label("beta=", betas[i]); });
  return {t};
}

// Equilibrium effort against the first report's share of the total value.
inline std::vector<Table> fig_subst(const json& p, unsigned threads) {
  const double v2 = config::get_or(p, "v2", 2.0);
  const auto v1s = grid_param(p, "v1", linear_grid(v2 / 2.0, v2, v2 / 50.0));
  const auto lambdas = grid_param(p, "lambda", {1.0, 2.0, 4.0, 8.0});
  const auto h = TimeValue::exponential(config::get_or(p, "eta", 1.0));
  Table t{"fig_subst", {"v1", "pm_effort", "pm_residual"}, {}};
  for (double lam : lambdas) {
    t.columns.push_back(label("mvp_effort_lambda_", lam));
    t.columns.push_back(label("mvp_residual_lambda_", lam));
  }
  t.rows = evaluate_rows(
      v1s.size(), threads,
      [&](std::size_t i) {
        const ScoreSequence v({0.0, v1s[i], v2});
        const auto pm = pm_race_equilibrium(v, 2);
        std::vector<double> row{v1s[i], pm.effort, kkt_residual(pm)};
        for (double lam : lambdas) {
          const auto mvp = mvp_equilibrium(LatencyFamily::exponential(lam), h, v, 2);
          row.push_back(mvp.effort);
          row.push_back(kkt_residual(mvp));
        }
        return row;
      },
      [&](std::size_t i) { return label("v1=", v1s[i]); });
  return {t};
}

/// One row per (n, lambda): race and market equilibria with their welfare.
inline Table welfare_grid(const std::string& name, const std::vector<std::size_t>& ns,
                          const std::vector<double>& lambdas, const TimeValue& h,
                          const std::function<ScoreSequence(std::size_t)>& v_of, unsigned threads) {
  Table t{name,
          {"n", "lambda", "pm_effort", "pm_residual", "pm_welfare", "mvp_effort", "mvp_residual", "mvp_welfare",
           "mvp_principal_utility", "optimal_effort", "optimal_residual", "optimal_welfare"},
          {}};
  std::vector<ScoreSequence> vs;
  for (std::size_t n : ns) vs.push_back(v_of(n));
  const std::size_t count = ns.size() * lambdas.size();
  t.rows = evaluate_rows(
      count, threads,
      [&](std::size_t idx) {
        const std::size_t a = idx / lambdas.size();
        const std::size_t n = ns[a];
        const auto& v = vs[a];
        const auto latency = LatencyFamily::exponential(lambdas[idx % lambdas.size()]);
        const auto race = pm_race_welfare(latency, h, v, n);
        const auto mvp = mvp_equilibrium(latency, h, v, n);
        const auto opt = mvp_welfare_optimum(latency, h, v, n);
        return std::vector<double>{static_cast<double>(n),
                                   latency.lam,
                                   race.equilibrium.effort,
                                   kkt_residual(race.equilibrium),
                                   race.welfare,
                                   mvp.effort,
                                   kkt_residual(mvp),
                                   mvp_welfare(latency, h, v, n, mvp.effort),
                                   mvp_principal_utility(latency, h, v, n, mvp.effort),
                                   opt.effort,
                                   kkt_residual(opt),
                                   mvp_welfare(latency, h, v, n, opt.effort)};
      },
      [&](std::size_t idx) {
        return "n=" + std::to_string(ns[idx / lambdas.size()]) + " " + label("lambda=", lambdas[idx % lambdas.size()]);
      });
  return t;
}

inline std::vector<double> doubling_grid(double start, std::size_t count) {
  std::vector<double> g;
  for (std::size_t i = 0; i < count; ++i) g.push_back(std::ldexp(start, static_cast<int>(i)));
  return g;
}

// Welfare and principal utility over (n, lambda) with perfect substitutes.
inline std::vector<Table> fig_welfare_heatmap(const json& p, unsigned threads) {
  const auto ns = count_grid_param(p, "n", 2, 11);
  const auto lambdas = grid_param(p, "lambda", doubling_grid(0.5, 10));
  const auto h = TimeValue::exponential(config::get_or(p, "eta", 1.0));
  const double value = config::get_or(p, "value", 1.0);
  auto v_of = [&](std::size_t n) {
    std::vector<double> v(n + 1, value);
    v[0] = 0.0;
    return ScoreSequence(v);
  };
  return {welfare_grid("fig_welfare_heatmap", ns, lambdas, h, v_of, threads)};
}

// Any model or score sequence on any (n, lambda) grid.
inline std::vector<Table> custom(const json& p, unsigned threads) {
  const auto ns = count_grid_param(p, "n", 2, 2);
  const auto lambdas = grid_param(p, "lambda", {1.0});
  const auto h = config::parse_time_value(config::get_or(p, "time_value", json::object()));
  std::function<ScoreSequence(std::size_t)> v_of;
  if (p.contains("v")) {
    const auto v = sequence_param(p, "v", {});
    v_of = [v](std::size_t n) { return v.truncated(n); };
  } else {
    const json model = config::get_or(p, "model", json::object());
    const auto rule = config::parse_rule(config::get_or(p, "scoring", json::object()));
    v_of = [model, rule](std::size_t n) { return v_sequence(config::parse_model(model, n), rule, n); };
  }
  return {welfare_grid(config::get_or<std::string>(p, "name", "custom"), ns, lambdas, h, v_of, threads)};
}

}  // namespace detail

/// Computes the tables for one experiment without touching the filesystem.
inline std::vector<Table> experiment_tables(const ExperimentConfig& config) {
  const auto& p = config.parameters;
  if (!p.is_object()) throw InputError("experiment parameters must be an object");
  const auto& name = config.experiment;
  if (name == "fig_original") return detail::fig_original(p, config.threads);
  if (name == "fig_late") return detail::fig_late(p, config.threads);
  if (name == "fig_eas") return detail::fig_eas(p, config.threads);
  if (name == "fig_noise") return detail::fig_noise(p, config.threads);
  if (name == "fig_subst") return detail::fig_subst(p, config.threads);
  if (name == "fig_welfare_heatmap") return detail::fig_welfare_heatmap(p, config.threads);
  if (name == "custom") return detail::custom(p, config.threads);
  throw InputError("unknown experiment '" + name + "'");
}

/// Writes <output_path>/<table name>.csv for every table and returns the paths.
inline std::vector<std::string> run_experiment(const ExperimentConfig& config) {
  std::vector<std::string> written;
  for (const auto& t : experiment_tables(config)) {
    const auto path = config.output_path + "/" + t.name + ".csv";
    write_csv_file(path, t);
    written.push_back(path);
  }
  return written;
}

}  // namespace tpm
