// tpm: command-line front end for the market library.
//
//   tpm solve --config solve.json
//   tpm figure fig_eas --out results/
//   tpm simulate --config sim.json --trials 100000 --seed 7
//   tpm settle-fpm --input batch.json
//   tpm settle-mvp --reports stream.csv --prior 0.98,0.02 --outcome 1

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tpm/tpm.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tpm::InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw tpm::InputError(path + ": " + e.what());
  }
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tpm::InputError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

/// Applies "key=value" overrides; values are parsed as JSON, falling back to strings.
void apply_overrides(json& params, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw tpm::InputError("--set expects key=value, got '" + s + "'");
    const auto key = s.substr(0, eq);
    const auto text = s.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    std::string pointer = "/" + key;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    params[json::json_pointer(pointer)] = value;
  }
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  unsigned threads = 0;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c, bool file_output) {
  cmd->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, file_output ? "Output directory" : "Output file (default stdout)");
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--trials", c.trials, "Monte Carlo trials");
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--set", c.sets, "Parameter override key=value (repeatable, dotted keys nest)");
}

json load_config(const Common& c) {
  json j = c.config.empty() ? json::object() : read_json_file(c.config);
  if (!j.is_object()) throw tpm::InputError("config must be a JSON object");
  return j;
}

// ---------------------------------------------------------------------------

int run_figure(const std::string& name_arg, const Common& c) {
  const json file = load_config(c);
  tpm::ExperimentConfig cfg;
  cfg.experiment = name_arg.empty() ? tpm::config::get_or<std::string>(file, "experiment", "") : name_arg;
  if (cfg.experiment.empty()) throw tpm::InputError("figure: no experiment named");
  cfg.parameters = tpm::config::get_or(file, "parameters", json::object());
  cfg.output_path = c.out.empty() ? tpm::config::get_or<std::string>(file, "output_path", ".") : c.out;
  cfg.threads = c.threads;
  if (c.seed) cfg.parameters["seed"] = *c.seed;
  if (c.trials) cfg.parameters["trials"] = *c.trials;
  apply_overrides(cfg.parameters, c.sets);

  const auto start = std::chrono::steady_clock::now();
  const auto tables = tpm::experiment_tables(cfg);
  std::filesystem::create_directories(cfg.output_path);
  json files = json::array();
  for (const auto& t : tables) {
    const auto path = (std::filesystem::path(cfg.output_path) / (t.name + ".csv")).string();
    tpm::write_csv_file(path, t);
    files.push_back(path);
    std::cout << path << '\n';
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json manifest = {{"tool", "tpm"},
                         {"version", tpm::kVersion},
                         {"experiment", cfg.experiment},
                         {"parameters", cfg.parameters},
                         {"output_path", cfg.output_path},
                         {"files", files},
                         {"boost_version", BOOST_LIB_VERSION},
                         {"wall_time_seconds", seconds}};
  write_json(manifest, (std::filesystem::path(cfg.output_path) / (cfg.experiment + "_manifest.json")).string());
  return 0;
}

// ---------------------------------------------------------------------------

tpm::ScoreSequence solve_sequence(const json& j, std::size_t n) {
  if (j.contains("v")) return tpm::ScoreSequence(j.at("v").get<std::vector<double>>()).truncated(n);
  const auto model = tpm::config::parse_model(tpm::config::get_or(j, "model", json::object()), n);
  return tpm::v_sequence(model, tpm::config::parse_rule(tpm::config::get_or(j, "scoring", json::object())), n);
}

int run_solve(const std::string& mechanism_arg, const Common& c) {
  json j = load_config(c);
  apply_overrides(j, c.sets);
  const std::string mechanism =
      mechanism_arg.empty() ? tpm::config::get_or<std::string>(j, "mechanism", "mvp") : mechanism_arg;
  const std::size_t n = tpm::config::get_or<std::size_t>(j, "n", 2);
  json out = {{"mechanism", mechanism}, {"n", n}};

  if (mechanism == "pm_batch") {
    const auto access = tpm::config::parse_access(tpm::config::get_or(j, "access", json::object()));
    const auto eq = tpm::pm_batch_equilibrium(access, n);
    const double c_opt = tpm::pm_batch_optimal_effort(access, n);
    out["equilibrium"] = tpm::config::to_json(eq);
    out["welfare"] = tpm::pm_batch_welfare(access, n, eq.effort);
    out["optimal_effort"] = c_opt;
    out["optimal_welfare"] = tpm::pm_batch_welfare(access, n, c_opt);
  } else if (mechanism == "fpm") {
    const auto access = tpm::config::parse_access(tpm::config::get_or(j, "access", json::object()));
    const auto v = solve_sequence(j, n);
    const auto eq = tpm::batch_equilibrium(access, v, n);
    const auto opt = tpm::batch_welfare_optimum(access, v, n);
    out["v"] = v.values();
    out["equilibrium"] = tpm::config::to_json(eq);
    out["welfare"] = tpm::batch_welfare(access, v, n, eq.effort);
    out["expected_reward"] = tpm::batch_expected_reward(access, v, n, eq.effort, eq.effort);
    out["optimum"] = tpm::config::to_json(opt);
  } else if (mechanism == "mvp" || mechanism == "pm_race") {
    const auto latency =
        tpm::LatencyFamily::exponential(tpm::config::get_or(tpm::config::get_or(j, "latency", json::object()), "lambda", 1.0));
    const auto h = tpm::config::parse_time_value(tpm::config::get_or(j, "time_value", json::object()));
    const auto v = solve_sequence(j, n);
    out["v"] = v.values();
    if (mechanism == "mvp") {
      const auto eq = tpm::mvp_equilibrium(latency, h, v, n);
      out["equilibrium"] = tpm::config::to_json(eq);
      out["welfare"] = tpm::mvp_welfare(latency, h, v, n, eq.effort);
      out["expected_reward"] = tpm::mvp_expected_reward(latency, h, v, n, eq.effort, eq.effort);
      out["principal_utility"] = tpm::mvp_principal_utility(latency, h, v, n, eq.effort);
      out["optimum"] = tpm::config::to_json(tpm::mvp_welfare_optimum(latency, h, v, n));
    } else {
      const auto race = tpm::pm_race_welfare(latency, h, v, n);
      out["equilibrium"] = tpm::config::to_json(race.equilibrium);
      out["welfare"] = race.welfare;
    }
  } else {
    throw tpm::InputError("solve: unknown mechanism '" + mechanism + "' (fpm, mvp, pm_batch, pm_race)");
  }
  write_json(out, c.out);
  return 0;
}

// ---------------------------------------------------------------------------

int run_simulate(const Common& c, const std::string& trials_csv) {
  json j = load_config(c);
  if (c.seed) j["seed"] = *c.seed;
  if (c.trials) j["trials"] = *c.trials;
  if (c.threads) j["threads"] = c.threads;
  apply_overrides(j, c.sets);
  const auto setup = tpm::config::parse_simulation(j);
  json out = tpm::config::to_json(tpm::simulate(setup.sim, setup.profile));
  out["seed"] = setup.sim.seed;
  out["mechanism"] = tpm::config::get_or<std::string>(j, "mechanism", "fpm");
  if (!trials_csv.empty()) tpm::write_csv_file(trials_csv, tpm::trial_table(tpm::simulate_trials(setup.sim, setup.profile)));
  write_json(out, c.out);
  return 0;
}

// ---------------------------------------------------------------------------

std::optional<tpm::Belief> prior_option(const std::vector<double>& prior) {
  if (prior.empty()) return std::nullopt;
  return tpm::Belief(prior);
}

int run_settle_fpm(const std::string& input, const std::vector<double>& prior, const std::string& out) {
  const auto request = tpm::parse_fpm_request(read_json_file(input), prior_option(prior));
  write_json(tpm::to_json(tpm::fpm_run(request.prior, request.batch, request.rule)), out);
  return 0;
}

struct MvpArgs {
  std::string reports;
  std::vector<double> prior;
  std::size_t outcome = 0;
  std::optional<std::size_t> agents;
  double eta = 1.0;
  std::string rule = "quadratic";
  double scale = 1.0;
  std::string out;
  std::string trace;
};

int run_settle_mvp(const MvpArgs& a) {
  std::ifstream in(a.reports);
  if (!in) throw tpm::InputError("cannot open " + a.reports);
  const auto reports = tpm::parse_report_stream(in);
  std::size_t n = 0;
  for (const auto& r : reports) n = std::max(n, r.agent + 1);
  if (a.agents) {
    if (*a.agents < n) throw tpm::InputError("settle-mvp: --agents smaller than the largest agent id");
    n = *a.agents;
  }
  const auto rule = tpm::config::parse_rule({{"rule", a.rule}, {"scale", a.scale}});
  const auto settled =
      tpm::mvp_run(tpm::Belief(a.prior), reports, n, a.outcome, rule, tpm::TimeValue::exponential(a.eta));
  const auto rewards = tpm::mvp_rewards_table(settled);
  if (a.out.empty()) {
    tpm::write_csv(std::cout, rewards);
  } else {
    tpm::write_csv_file(a.out, rewards);
  }
  if (!a.trace.empty()) tpm::write_csv_file(a.trace, tpm::mvp_trace_table(settled.trace));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prediction markets and marginal value markets: equilibria, settlement and simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tpm::kVersion);

  Common solve_opts, figure_opts, sim_opts;
  std::string solve_mechanism, figure_name, trials_csv;
  auto* solve = app.add_subcommand("solve", "Solve one symmetric equilibrium");
  solve->add_option("mechanism", solve_mechanism, "fpm, mvp, pm_batch or pm_race (default from config)");
  add_common(solve, solve_opts, false);

  auto* figure = app.add_subcommand("figure", "Regenerate a figure's data as CSV");
  figure->add_option("name", figure_name, "Experiment name")->check(CLI::IsMember(tpm::experiment_names()));
  add_common(figure, figure_opts, true);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo simulation of a strategy profile");
  add_common(simulate, sim_opts, false);
  simulate->add_option("--trials-csv", trials_csv, "Also write one CSV row per trial");

  std::string fpm_input, fpm_out;
  std::vector<double> fpm_prior;
  auto* settle_fpm = app.add_subcommand("settle-fpm", "Settle a batch of reports with the fair prediction market");
  settle_fpm->add_option("--input", fpm_input, "JSON {prior, scoring, reports, outcome}")
      ->required()
      ->check(CLI::ExistingFile);
  settle_fpm->add_option("--prior", fpm_prior, "Prior, overrides the input file")->delimiter(',');
  settle_fpm->add_option("--out", fpm_out, "Output JSON file (default stdout)");

  MvpArgs mvp;
  auto* settle_mvp = app.add_subcommand("settle-mvp", "Settle a timed report stream with the marginal value market");
  settle_mvp->add_option("--reports", mvp.reports, "CSV lines agent_id,time,b_1..b_{d-1}")
      ->required()
      ->check(CLI::ExistingFile);
  settle_mvp->add_option("--prior", mvp.prior, "Prior p_1..p_d")->required()->delimiter(',');
  settle_mvp->add_option("--outcome", mvp.outcome, "Realized outcome index")->required();
  settle_mvp->add_option("--agents", mvp.agents, "Number of agents (default: largest id + 1)");
  settle_mvp->add_option("--eta", mvp.eta, "Rate of the exponential time value");
  settle_mvp->add_option("--rule", mvp.rule, "quadratic or log");
  settle_mvp->add_option("--scale", mvp.scale, "Scoring rule scale");
  settle_mvp->add_option("--out", mvp.out, "Rewards CSV (default stdout)");
  settle_mvp->add_option("--trace", mvp.trace, "Belief trace CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*solve) return run_solve(solve_mechanism, solve_opts);
    if (*figure) return run_figure(figure_name, figure_opts);
    if (*simulate) return run_simulate(sim_opts, trials_csv);
    if (*settle_fpm) return run_settle_fpm(fpm_input, fpm_prior, fpm_out);
    if (*settle_mvp) return run_settle_mvp(mvp);
  } catch (const tpm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const tpm::CapacityError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const tpm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
