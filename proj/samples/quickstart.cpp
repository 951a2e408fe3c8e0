// Solves the two-agent noisy-signal market and checks the result by simulation.

#include <cstdio>

#include "tpm/tpm.hpp"

int main() {
  using namespace tpm;
  const auto model = InformationModel::binary_noisy(0.1, 0.05, 2);
  const auto rule = ScoringRule::quadratic(20);
  const auto v = v_sequence(model, rule, 2);

  const auto latency = LatencyFamily::exponential(1.0);
  const auto h = TimeValue::exponential(1.0);
  const auto eq = mvp_equilibrium(latency, h, v, 2);
  std::printf("v = (%g, %g, %g)\n", v[0], v[1], v[2]);
  std::printf("equilibrium effort %.6f, welfare %.6f\n", eq.effort, mvp_welfare(latency, h, v, 2, eq.effort));
  std::printf("race baseline effort %.6f\n", pm_race_equilibrium(v, 2).effort);

  SimConfig sim{model};
  sim.mechanism = Mechanism::mvp;
  sim.rule = rule;
  sim.latency = latency;
  sim.h = h;
  sim.trials = 200000;
  sim.seed = 1;
  const auto stats = simulate(sim, StrategyProfile::symmetric(2, eq.effort));
  std::printf("simulated reward %.4f +- %.4f (exact %.4f)\n", stats.reward[0].mean, stats.reward[0].standard_error,
              mvp_expected_reward(latency, h, v, 2, eq.effort, eq.effort));

  // Waiting half a time unit before reporting costs the late agent.
  const auto late = deviation_test(sim, StrategyProfile::symmetric(2, eq.effort), 0,
                                   {std::nullopt, ReportBehavior::delayed(0.5)});
  std::printf("delay changes utility by %.4f +- %.4f\n", late.utility_delta_mean, late.standard_error);
}
