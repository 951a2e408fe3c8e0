#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "tpm/belief.hpp"
#include "tpm/error.hpp"
#include "tpm/info_model.hpp"
#include "tpm/scoring.hpp"

namespace tpm {

/// One batch of reports, index-aligned with agents, plus the realized outcome.
/// Agents without a signal carry the all-1/2 report.
struct BatchOutcomeReport {
  std::vector<ReportVector> reports;
  std::size_t outcome = 0;
};

struct FpmResult {
  Belief aggregated;
  std::vector<double> rewards;
};

/// Settles the fair prediction market.
///
/// Each agent is paid S(p_all, y*) - S(p_without_k, y*), i.e. the improvement the agent
/// would make as the last of a random ordering. Odds updates commute, so every
/// such ordering yields the same p_{n-1} and no permutation is drawn.
inline FpmResult fpm_run(const Belief& prior, const BatchOutcomeReport& batch, const ScoringRule& rule,
                         UpdateForm form = UpdateForm::canonical) {
  const std::size_t d = prior.size();
  if (batch.outcome >= d) throw InputError("fpm_run: outcome index out of range");
  for (const auto& r : batch.reports) {
    if (r.num_outcomes() != d) throw InputError("fpm_run: report dimension mismatch");
  }
  const std::size_t n = batch.reports.size();

  Belief all = prior;
  for (const auto& r : batch.reports) all = apply_report(all, r, form);
  const double top = score(rule, all, batch.outcome);

  std::vector<double> rewards(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    Belief without = prior;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != k) without = apply_report(without, batch.reports[j], form);
    }
    rewards[k] = top - score(rule, without, batch.outcome);
    if (!std::isfinite(rewards[k])) {
      throw InputError("fpm_run: reward of agent " + std::to_string(k) + " is not finite under this scoring rule");
    }
  }
  return {std::move(all), std::move(rewards)};
}

/// Maps (agent, observed signal) to the report that agent submits.
using ReportPolicy = std::function<ReportVector(std::size_t agent, std::size_t signal)>;

inline ReportPolicy truthful_policy(const InformationModel& model) {
  return [&model](std::size_t, std::size_t x) { return truthful_report(model, x); };
}

/// Exact E[r_k] when agent k obtains a signal with probability q_k and reports per `policy`.
///
/// Enumerates the outcome and every agent's (no signal | signal value) state,
/// (m + 1)^n * d terms in all; throws CapacityError beyond 1e7.
inline std::vector<double> fpm_expected_reward(const InformationModel& model, const ScoringRule& rule,
                                               const std::vector<double>& signal_probability,
                                               const ReportPolicy& policy = {}) {
  const std::size_t n = signal_probability.size();
  const std::size_t d = model.num_outcomes();
  const std::size_t m = model.num_signals();
  for (double q : signal_probability) {
    if (!(q >= 0.0 && q <= 1.0)) throw InputError("fpm_expected_reward: signal probability outside [0, 1]");
  }
  if (std::pow(static_cast<double>(m + 1), static_cast<double>(n)) * static_cast<double>(d) >
      detail::kEnumerationLimit) {
    throw CapacityError("fpm_expected_reward: too many report profiles to enumerate");
  }
  const ReportPolicy report_of = policy ? policy : truthful_policy(model);

  // reports[i][x] for x < m; x == m is the silent report.
  std::vector<std::vector<ReportVector>> reports(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t x = 0; x < m; ++x) reports[i].push_back(report_of(i, x));
    reports[i].push_back(ReportVector::silent(d));
  }

  std::vector<double> expected(n, 0.0);
  std::vector<std::size_t> state(n, 0);
  BatchOutcomeReport batch;
  batch.reports.assign(n, ReportVector::silent(d));
  while (true) {
    for (std::size_t i = 0; i < n; ++i) batch.reports[i] = reports[i][state[i]];
    for (std::size_t y = 0; y < d; ++y) {
      double prob = model.prior()[y];
      for (std::size_t i = 0; i < n && prob > 0.0; ++i) {
        const double q = signal_probability[i];
        prob *= state[i] == m ? 1.0 - q : q * model.likelihood(y, state[i]);
      }
      if (prob <= 0.0) continue;
      batch.outcome = y;
      const auto result = fpm_run(model.prior(), batch, rule);
      for (std::size_t i = 0; i < n; ++i) expected[i] += prob * result.rewards[i];
    }
    std::size_t i = 0;
    while (i < n && ++state[i] == m + 1) state[i++] = 0;
    if (i == n) break;
  }
  return expected;
}

}  // namespace tpm
