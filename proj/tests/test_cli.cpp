#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "tpm/config.hpp"
#include "tpm/experiments.hpp"
#include "tpm/io.hpp"

using namespace tpm;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<Table> run(const std::string& name, json params = json::object(), unsigned threads = 1) {
  ExperimentConfig c;
  c.experiment = name;
  c.parameters = std::move(params);
  c.threads = threads;
  return experiment_tables(c);
}

Table find(const std::vector<Table>& tables, const std::string& name) {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("no table " + name);
}

struct Cmd {
  int code;
  std::string out;
};

Cmd cli(const std::string& args) {
  const std::string cmd = std::string(TPM_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("tpm_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

}  // namespace

TEST(Csv, Formatting) {
  EXPECT_EQ(format_number(0.25), "0.25");
  EXPECT_EQ(format_number(1.0 / 3), "0.333333333");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(1e-20), "1e-20");
  const Table t{"t", {"a", "b,c"}, {{1, 0.5}, {2, 1e6}}};
  EXPECT_EQ(to_csv(t), "a,\"b,c\"\n1,0.5\n2,1000000\n");
}

TEST(Experiments, EaseCurve) {
  const auto t = find(run("fig_eas"), "fig_eas");
  bool seen = false;
  for (const auto& row : t.rows) {
    EXPECT_NEAR(row[t.column("pm_effort")], 0.25, 1e-12);
    if (std::fabs(row[0] - 1.0) < 1e-12) {
      EXPECT_NEAR(row[t.column("mvp_effort")], 0.290773, 1e-6);
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Experiments, LateInformationCurve) {
  const auto tables = run("fig_late");
  const auto score = find(tables, "fig_late_score");
  EXPECT_NEAR(score.rows[0][1], 0.9608, 1e-12);
  EXPECT_NEAR(score.rows[1][1], 0.962456, 1e-6);
  EXPECT_NEAR(score.rows[2][1], 0.96656, 1e-5);
  const auto reward = find(tables, "fig_late_reward");
  std::size_t best = 0;
  for (std::size_t i = 0; i < reward.rows.size(); ++i) {
    if (reward.rows[i][1] > reward.rows[best][1]) best = i;
  }
  EXPECT_EQ(reward.rows[best][0], 3.0);
}

TEST(Experiments, SubstitutesCurve) {
  const auto t = find(run("fig_subst", {{"lambda", {1.0}}}), "fig_subst");
  EXPECT_EQ(t.rows.front()[0], 1.0);
  EXPECT_EQ(t.rows.front()[t.column("mvp_effort_lambda_1")], 0.0);
  EXPECT_EQ(t.rows.back()[0], 2.0);
  EXPECT_NEAR(t.rows.back()[t.column("mvp_effort_lambda_1")], 0.207107, 1e-6);
  for (const auto& row : t.rows) EXPECT_NEAR(row[t.column("pm_effort")], (row[0] - 1) / 2, 1e-15);
}

TEST(Experiments, NoiseCurveDefaultsToCalibratedScale) {
  const auto t = find(run("fig_noise"), "fig_noise");
  EXPECT_EQ(t.rows[0][0], 0.0);
  EXPECT_NEAR(t.rows[0][t.column("v1")], 3.6, 1e-12);
  EXPECT_NEAR(t.rows[0][t.column("pm_effort")], 0.9, 1e-12);
  EXPECT_NEAR(t.rows[0][t.column("mvp_effort_lambda_1")], 0.448683, 1e-6);
  EXPECT_NEAR(t.rows[0][t.column("mvp_effort_lambda_0.5")], 0.341641, 1e-6);
  EXPECT_NEAR(t.rows[5][0], 0.05, 1e-15);
  EXPECT_NEAR(t.rows[5][t.column("pm_effort")], 0.299819, 1e-6);
  EXPECT_NEAR(t.rows[5][t.column("mvp_effort_lambda_1")], 0.324463, 1e-6);
}

TEST(Experiments, OriginalRaces) {
  const auto tables = run("fig_original");
  const auto lin = find(tables, "fig_original_linear");
  EXPECT_NEAR(lin.rows[0][lin.column("optimal_effort")], 2.0 / 9, 1e-12);
  EXPECT_NEAR(lin.rows[0][lin.column("optimal_welfare")], 4.0 / 9, 1e-12);
  for (const auto& row : lin.rows) {
    if (row[0] >= 3) {
      EXPECT_NEAR(row[lin.column("self_welfare")], 0.0, 1e-10);
    }
  }
  EXPECT_EQ(find(tables, "fig_original_exponential").rows.size(), 19u);
}

TEST(Experiments, ResidualsAreSmall) {
  for (const auto& name : experiment_names()) {
    for (const auto& t : run(name)) {
      for (std::size_t j = 0; j < t.columns.size(); ++j) {
        if (t.columns[j].find("residual") == std::string::npos) continue;
        for (const auto& row : t.rows) EXPECT_LE(std::fabs(row[j]), 1e-8) << name << " " << t.columns[j];
      }
    }
  }
}

TEST(Experiments, ByteIdenticalAcrossRunsAndThreads) {
  for (const auto& name : experiment_names()) {
    const auto a = run(name, json::object(), 1);
    const auto b = run(name, json::object(), 4);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(to_csv(a[i]), to_csv(b[i])) << name;
  }
}

TEST(Experiments, CustomModelGrid) {
  const json p = {{"model", {{"kind", "binary_noisy"}, {"alpha", 0.1}, {"beta", 0.05}}},
                  {"scoring", {{"rule", "quadratic"}, {"scale", 20}}},
                  {"n", {2, 3}},
                  {"lambda", {1.0, 2.0}}};
  const auto t = find(run("custom", p), "custom");
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_NEAR(t.rows[0][t.column("mvp_effort")], 0.324463, 1e-6);
  EXPECT_NEAR(t.rows[0][t.column("pm_effort")], 0.299819, 1e-6);
}

TEST(Experiments, Errors) {
  EXPECT_THROW(run("fig_unknown"), InputError);
  EXPECT_THROW(run("fig_eas", {{"lambda", {{"start", 1.0}, {"stop", 0.5}, {"step", 0.1}}}}), InputError);
  EXPECT_THROW(run("custom", {{"model", {{"kind", "bogus"}}}}), InputError);
}

TEST(Config, ParsesModelsAndRules) {
  const auto m = config::parse_model({{"kind", "table"}, {"prior", {0.3, 0.7}}, {"likelihood", {{0.9, 0.1}, {0.2, 0.8}}}}, 2);
  EXPECT_EQ(m.num_outcomes(), 2u);
  EXPECT_DOUBLE_EQ(m.likelihood(1, 1), 0.8);
  EXPECT_EQ(config::parse_rule({{"rule", "log"}, {"scale", 2}}).kind, ScoringRule::Kind::logarithmic);
  EXPECT_THROW(config::parse_rule({{"rule", "spherical"}}), InputError);
  EXPECT_EQ(config::parse_access({{"kind", "linear"}, {"lambda", 3}}).kind, AccessFunction::Kind::linear);
  const auto sim = config::parse_simulation(json::parse(R"({"mechanism": "mvp", "n": 3, "effort": 0.2,
      "policy": [{"kind": "delayed", "amount": 0.5}, "truthful", "silent"], "trials": 7})"));
  EXPECT_EQ(sim.sim.mechanism, Mechanism::mvp);
  EXPECT_EQ(sim.sim.trials, 7u);
  EXPECT_EQ(sim.profile.behavior[0].kind, ReportBehavior::Kind::delayed);
  EXPECT_EQ(sim.profile.behavior[2].kind, ReportBehavior::Kind::silent);
  EXPECT_THROW(config::parse_simulation({{"n", 2}, {"effort", {0.1}}}), InputError);
}

TEST(Io, ReportStream) {
  std::istringstream in("agent_id,time,b_1\n# comment\n1, 0.5, 0.8\n\n0,1.25,0.3\r\n");
  const auto reports = parse_report_stream(in);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].agent, 1u);
  EXPECT_EQ(reports[1].time, 1.25);
  EXPECT_EQ(reports[1].report[0], 0.3);
  std::istringstream bad("0,1.0,abc\n");
  EXPECT_THROW(parse_report_stream(bad), InputError);
  std::istringstream short_line("0,1.0\n");
  EXPECT_THROW(parse_report_stream(short_line), InputError);
}

TEST(Io, FpmRequest) {
  const auto req = parse_fpm_request(json::parse(R"({"prior": [0.5, 0.5], "reports": [[0.8], [0.5]], "outcome": 1})"));
  const auto j = to_json(fpm_run(req.prior, req.batch, req.rule));
  EXPECT_NEAR(j["rewards"][0].get<double>(), 0.92 - 0.5, 1e-12);
  EXPECT_EQ(j["rewards"][1].get<double>(), 0.0);
  EXPECT_THROW(parse_fpm_request(json::parse(R"({"reports": [[0.8]], "outcome": 1})")), InputError);
}

TEST_F(CliTest, FigureWritesCsvAndManifest) {
  const auto r = cli("figure fig_eas --out " + dir.string());
  ASSERT_EQ(r.code, 0);
  const auto csv = slurp(dir / "fig_eas.csv");
  EXPECT_EQ(csv.rfind("lambda,pm_effort,pm_residual,mvp_effort,mvp_residual\n", 0), 0u);
  EXPECT_NE(csv.find("\n1,0.25,0,0.290772979,"), std::string::npos);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  const auto manifest = json::parse(slurp(dir / "fig_eas_manifest.json"));
  EXPECT_EQ(manifest["experiment"], "fig_eas");
  EXPECT_TRUE(manifest.contains("wall_time_seconds"));
  ASSERT_EQ(cli("figure fig_eas --out " + dir.string()).code, 0);
  EXPECT_EQ(slurp(dir / "fig_eas.csv"), csv);
}

TEST_F(CliTest, FigureFromConfigWithOverrides) {
  std::ofstream(dir / "c.json") << R"({"experiment": "fig_subst", "parameters": {"lambda": [1]}, "output_path": ")"
                                << dir.string() << "\"}";
  ASSERT_EQ(cli("figure --config " + (dir / "c.json").string() + " --set v2=3").code, 0);
  const auto csv = slurp(dir / "fig_subst.csv");
  EXPECT_EQ(csv.rfind("v1,pm_effort,pm_residual,mvp_effort_lambda_1,mvp_residual_lambda_1\n1.5,", 0), 0u);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("figure fig_nothing").code, 2);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("solve --bogus").code, 2);
  EXPECT_EQ(cli("solve unknown_mechanism").code, 2);
  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_EQ(cli("simulate --config " + (dir / "bad.json").string()).code, 2);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST_F(CliTest, NumericalFailureExitsOne) {
  std::ofstream(dir / "big.json") << R"({"mechanism": "mvp", "n": 20, "model": {"kind": "table",
      "prior": [0.2, 0.3, 0.5], "likelihood": [[0.2, 0.3, 0.5], [0.3, 0.3, 0.4], [0.6, 0.2, 0.2]]}})";
  EXPECT_EQ(cli("solve --config " + (dir / "big.json").string()).code, 1);
}

TEST_F(CliTest, Solve) {
  const auto r = cli("solve mvp --set v=[0,2,3] --set latency.lambda=2");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["equilibrium"]["effort"].get<double>(), 0.364519, 1e-6);
  const auto race = json::parse(cli("solve pm_race --set v=[0,2,3]").out);
  EXPECT_NEAR(race["equilibrium"]["effort"].get<double>(), 0.25, 1e-12);
  const auto batch = json::parse(cli("solve pm_batch --set access.kind=\"linear\" --set access.lambda=3").out);
  EXPECT_NEAR(batch["optimal_welfare"].get<double>(), 4.0 / 9, 1e-12);
  EXPECT_TRUE(batch["equilibrium"]["corner"].get<bool>());
}

TEST_F(CliTest, SimulateIsDeterministic) {
  std::ofstream(dir / "sim.json") << R"({"mechanism": "fpm", "n": 2, "effort": 0.5,
      "model": {"alpha": 0.3, "beta": 0.1}, "access": {"kind": "exponential", "lambda": 2}})";
  const std::string args = "simulate --config " + (dir / "sim.json").string() + " --trials 2000 --seed 4";
  const auto a = cli(args + " --trials-csv " + (dir / "trials.csv").string());
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, cli(args).out);
  const auto j = json::parse(a.out);
  EXPECT_EQ(j["trials"], 2000);
  EXPECT_EQ(j["accounting_violations"], 0);
  EXPECT_EQ(slurp(dir / "trials.csv").rfind("trial,outcome,value,reward_0,cost_0,", 0), 0u);
}

TEST_F(CliTest, SettleFpm) {
  std::ofstream(dir / "batch.json") << R"({"prior": [0.5, 0.5], "reports": [[0.8], [0.5]], "outcome": 1})";
  const auto r = cli("settle-fpm --input " + (dir / "batch.json").string());
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["aggregated"][1].get<double>(), 0.8, 1e-12);
  EXPECT_EQ(j["rewards"][1].get<double>(), 0.0);
}

TEST_F(CliTest, SettleMvp) {
  std::ofstream(dir / "stream.csv") << "0,1.0,0.8\n";
  const auto r = cli("settle-mvp --reports " + (dir / "stream.csv").string() +
                     " --prior 0.98,0.02 --outcome 1 --trace " + (dir / "trace.csv").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "agent_id,reward\n0,0.0777310269\n");
  EXPECT_EQ(slurp(dir / "trace.csv"), "time,p_1,p_2\n0,0.98,0.02\n1,0.924528302,0.0754716981\n");
  std::ofstream(dir / "dup.csv") << "0,1.0,0.8\n0,2.0,0.6\n";
  EXPECT_EQ(cli("settle-mvp --reports " + (dir / "dup.csv").string() + " --prior 0.5,0.5 --outcome 1").code, 2);
}
