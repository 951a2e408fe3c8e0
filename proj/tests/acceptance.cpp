// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/integral_oracle.hpp"
#include "tpm/tpm.hpp"

using namespace tpm;

namespace {

/// Collects failed checks for one criterion.
struct Check {
  std::ostringstream log;
  bool ok = true;

  void near(double got, double want, double tol, const std::string& what) {
    if (std::fabs(got - want) <= tol) return;
    ok = false;
    log << "\n    " << what << ": got " << got << ", want " << want << " +- " << tol;
  }
  void that(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    log << "\n    " << what;
  }
};

ScoreSequence random_sequence(std::mt19937_64& rng, std::size_t n, double max_step) {
  std::uniform_real_distribution<double> u(0.0, max_step);
  std::vector<double> v{0.0};
  for (std::size_t k = 0; k < n; ++k) v.push_back(v.back() + u(rng));
  return ScoreSequence(v);
}

const TimeValue kUnitH = TimeValue::exponential(1.0);

void late_information(Check& c) {
  const double expected[] = {0.9608,   0.962456, 0.96656,  0.972778, 0.977909, 0.982417,
                             0.98605,  0.988961, 0.991309, 0.993133, 0.994609};
  const auto model = InformationModel::binary_noisy(0.02, 0.2, 10);
  const auto rule = ScoringRule::quadratic();
  const auto v = v_sequence(model, rule, 10);
  const double base = expected_base_score(model, rule);
  std::size_t best = 0;
  for (std::size_t k = 0; k <= 10; ++k) {
    c.near(base + v[k], expected[k], 1e-5, "expected score k=" + std::to_string(k));
    if (k < 10 && v.increment(k) > v.increment(best)) best = k;
  }
  c.that(best + 1 == 3, "marginal reward peaks at k=" + std::to_string(best + 1));
  c.near(v.increment(2), 0.00621856, 1e-6, "peak marginal reward");
}

void ease_of_access(Check& c) {
  const ScoreSequence v({0, 2, 3});
  for (auto [lam, want] : {std::pair{1.0, 0.290773}, {2.0, 0.364519}, {15.0, 0.229687}}) {
    c.near(mvp_equilibrium(LatencyFamily::exponential(lam), kUnitH, v, 2).effort, want, 1e-4,
           "market effort lambda=" + std::to_string(lam));
  }
  c.that(pm_race_equilibrium(v, 2).effort == 0.25, "race effort is not exactly 0.25");
}

void signal_noise(Check& c) {
  const auto rule = ScoringRule::quadratic(20);
  const double pm_want[] = {0.9, 0.299819};
  const double mvp_want[] = {0.448683, 0.324463};
  for (int i = 0; i < 2; ++i) {
    const double beta = 0.05 * i;
    const auto v = v_sequence(InformationModel::binary_noisy(0.1, beta, 2), rule, 2);
    const std::string at = " beta=" + std::to_string(beta);
    c.near(pm_race_equilibrium(v, 2).effort, pm_want[i], 1e-4, "race effort" + at);
    c.near(mvp_equilibrium(LatencyFamily::exponential(1.0), kUnitH, v, 2).effort, mvp_want[i], 1e-4,
           "market effort lambda=1" + at);
    if (i == 0) {
      c.near(mvp_equilibrium(LatencyFamily::exponential(0.5), kUnitH, v, 2).effort, 0.341641, 1e-4,
             "market effort lambda=0.5" + at);
    }
  }
}

void substitutes(Check& c) {
  std::vector<double> lam8;
  for (int i = 0; i <= 50; ++i) {
    const double v1 = 1.0 + i / 50.0;
    const ScoreSequence v({0, v1, 2});
    c.near(pm_race_equilibrium(v, 2).effort, (v1 - 1) / 2, 1e-15, "race effort at v1=" + std::to_string(v1));
    lam8.push_back(mvp_equilibrium(LatencyFamily::exponential(8.0), kUnitH, v, 2).effort);
    if (i == 0) c.near(mvp_equilibrium(LatencyFamily::exponential(1.0), kUnitH, v, 2).effort, 0.0, 1e-5, "lambda=1 at v1=1");
    if (i == 50) {
      c.near(mvp_equilibrium(LatencyFamily::exponential(1.0), kUnitH, v, 2).effort, 0.207107, 1e-5, "lambda=1 at v1=2");
    }
  }
  for (std::size_t i = 1; i < lam8.size(); ++i) c.that(lam8[i] < lam8[i - 1], "lambda=8 curve not decreasing");
  c.near(lam8.front(), 0.228553, 1e-4, "lambda=8 at v1=1");
  c.near(lam8.back(), 0.1875, 1e-4, "lambda=8 at v1=2");
}

void race_closed_forms(Check& c) {
  const auto lin = AccessFunction::linear(3.0);
  const double c_opt = pm_batch_optimal_effort(lin, 2);
  c.near(c_opt, 2.0 / 9, 1e-12, "linear optimum effort");
  c.near(pm_batch_welfare(lin, 2, c_opt), 4.0 / 9, 1e-12, "linear optimum welfare");
  const double lam = 3.0;
  const auto ex = AccessFunction::exponential(lam);
  c.near(pm_batch_welfare(ex, 256, pm_batch_optimal_effort(ex, 256)), 1 - (1 + std::log(lam)) / lam, 1e-3,
         "exponential optimum welfare at n=256");
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t n = 4; n <= 256; ++n) {
    const auto eq = pm_batch_equilibrium(ex, n);
    c.that(std::fabs(eq.residual) <= 1e-10, "equilibrium residual at n=" + std::to_string(n));
    const double scaled = static_cast<double>(n) * pm_batch_welfare(ex, n, eq.effort);
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  c.that(lo >= 0.0 && hi <= 3.0, "n * W outside [0, 3]: [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

void foc_coincidence(Check& c) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + i % 3;
    const auto v = random_sequence(rng, n, 2.0);
    const auto access = AccessFunction::exponential(1.5 + 5 * u(rng));
    c.near(batch_equilibrium(access, v, n).effort, batch_welfare_optimum(access, v, n).effort, 1e-8,
           "batch instance " + std::to_string(i));
  }
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + i % 3;
    const auto v = random_sequence(rng, n, 2.0);
    const auto lat = LatencyFamily::exponential(0.3 + 10 * u(rng));
    const auto h = TimeValue::exponential(0.3 + 2 * u(rng));
    c.near(mvp_equilibrium(lat, h, v, n).effort, mvp_welfare_optimum(lat, h, v, n).effort, 1e-8,
           "sequential instance " + std::to_string(i));
  }
}

void deviations(Check& c) {
  constexpr std::size_t kTrials = 1'000'000;
  SimConfig fpm{InformationModel::binary_noisy(0.3, 0.1, 2)};
  fpm.mechanism = Mechanism::fpm;
  fpm.access = AccessFunction::exponential(2.0);
  fpm.trials = kTrials;
  fpm.seed = 7;
  const auto truthful = StrategyProfile::symmetric(2, 0.5);
  const auto perturbed = deviation_test(fpm, truthful, 0, {std::nullopt, ReportBehavior::perturbed(0.1)});
  c.that(perturbed.harmful(), "fair market perturbation not harmful");

  const auto stats = simulate(fpm, truthful);
  const auto& r = stats.reward;
  c.that(std::fabs(r[0].mean - r[1].mean) <= 3 * std::hypot(r[0].standard_error, r[1].standard_error),
         "fair market rewards differ beyond 3 SE");
  c.that(stats.accounting_violations == 0, "accounting identity violated (fair market)");

  SimConfig mvp{InformationModel::binary_noisy(0.3, 0.15, 2)};
  mvp.mechanism = Mechanism::mvp;
  mvp.rule = ScoringRule::quadratic(20);
  mvp.trials = kTrials;
  mvp.seed = 8;
  const double effort = mvp_equilibrium(mvp.latency, mvp.h, v_sequence(mvp.model, mvp.rule, 2), 2).effort;
  c.that(effort > 0.0, "market equilibrium effort is 0");
  const auto base = StrategyProfile::symmetric(2, effort);
  c.that(deviation_test(mvp, base, 0, {std::nullopt, ReportBehavior::perturbed(0.1)}).harmful(),
         "market perturbation not harmful");
  c.that(deviation_test(mvp, base, 0, {std::nullopt, ReportBehavior::delayed(0.5)}).harmful(),
         "market delay not harmful");
  c.that(simulate(mvp, base).accounting_violations == 0, "accounting identity violated (market)");
}

void welfare_grid(Check& c) {
  for (std::size_t n = 2; n <= 11; ++n) {
    std::vector<double> values(n + 1, 1.0);
    values[0] = 0.0;
    const ScoreSequence v(values);
    double prev_w = -INFINITY, prev_u = -INFINITY;
    for (int i = 0; i < 10; ++i) {
      const auto lat = LatencyFamily::exponential(std::ldexp(0.5, i));
      const auto eq = mvp_equilibrium(lat, kUnitH, v, n);
      const double w = mvp_welfare(lat, kUnitH, v, n, eq.effort);
      const double pu = mvp_principal_utility(lat, kUnitH, v, n, eq.effort);
      const std::string at = " n=" + std::to_string(n) + " i=" + std::to_string(i);
      c.that(w >= 0.0 && pu >= 0.0, "negative market welfare or principal utility" + at);
      c.that(w >= prev_w && pu >= prev_u, "market welfare or principal utility decreasing in lambda" + at);
      prev_w = w;
      prev_u = pu;
    }
  }
  for (int i = 0; i < 10; ++i) {
    const auto lat = LatencyFamily::exponential(std::ldexp(0.5, i));
    double prev = INFINITY;
    for (std::size_t n = 2; n <= 11; ++n) {
      std::vector<double> values(n + 1, 1.0);
      values[0] = 0.0;
      const double w = pm_race_welfare(lat, kUnitH, ScoreSequence(values), n).welfare;
      const std::string at = " n=" + std::to_string(n) + " i=" + std::to_string(i);
      c.that(w < prev, "race welfare not decreasing in n" + at);
      if (n >= 4) c.that(w <= 2.0 / static_cast<double>(n), "race welfare above 2/n" + at);
      prev = w;
    }
  }
}

void cross_validation(Check& c) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + i % 11;
    const auto v = random_sequence(rng, n, 1.0);
    const double lam = 0.3 + 9.7 * u(rng), eta = 0.3 + 2.7 * u(rng);
    const double ci = 0.01 + 2 * u(rng), e = 0.01 + 2 * u(rng);
    const auto lat = LatencyFamily::exponential(lam);
    const auto h = TimeValue::exponential(eta);
    const oracle::SequentialSetting s{lam, [eta](double t) { return eta * std::exp(-eta * t); }, 40.0 / eta,
                                      std::vector<double>(v.values().begin(), v.values().end()), n};
    const std::string at = " draw " + std::to_string(i);
    const double br = mvp_br_derivative(lat, h, v, n, ci, e);
    const double rew = mvp_expected_reward(lat, h, v, n, ci, e);
    const double w = mvp_welfare(lat, h, v, n, e);
    const double dw = mvp_welfare_derivative(lat, h, v, n, e);
    c.near(br, mvp_br_derivative_quadrature(lat, h, v, n, ci, e), 1e-8, "best-response slope" + at);
    c.near(rew, mvp_expected_reward_quadrature(lat, h, v, n, ci, e), 1e-8, "expected reward" + at);
    c.near(w, mvp_welfare_quadrature(lat, h, v, n, e), 1e-8, "welfare" + at);
    c.near(dw, mvp_welfare_derivative_quadrature(lat, h, v, n, e), 1e-8, "welfare slope" + at);
    c.near(br, oracle::br_derivative(s, ci, e), 1e-8, "best-response slope (independent)" + at);
    c.near(rew, oracle::expected_reward(s, ci, e), 1e-8, "expected reward (independent)" + at);
    c.near(w, oracle::welfare(s, e), 1e-8, "welfare (independent)" + at);
    c.near(dw, oracle::welfare_derivative(s, e), 1e-8, "welfare slope (independent)" + at);
  }
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<void(Check&)> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"late-information score curve", 1, late_information},
      {"ease-of-access efforts", 1, ease_of_access},
      {"signal-noise efforts", 5, signal_noise},
      {"substitutes curve", 1, substitutes},
      {"batch race closed forms", 10, race_closed_forms},
      {"first-order condition coincidence", 10, foc_coincidence},
      {"deviation suite", 60, deviations},
      {"welfare grid", 10, welfare_grid},
      {"closed forms vs quadrature", 10, cross_validation},
  };
  int failures = 0;
  int index = 0;
  for (const auto& crit : criteria) {
    ++index;
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      crit.run(check);
    } catch (const std::exception& e) {
      check.ok = false;
      check.log << "\n    exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > crit.budget_seconds) {
      check.ok = false;
      check.log << "\n    took " << secs << " s, budget " << crit.budget_seconds << " s";
    }
    std::printf("%s %d %s (%.3f s)%s\n", check.ok ? "PASS" : "FAIL", index, crit.name, secs,
                check.log.str().c_str());
    failures += check.ok ? 0 : 1;
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
