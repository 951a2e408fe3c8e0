#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "tpm/belief.hpp"
#include "tpm/error.hpp"
#include "tpm/fpm.hpp"
#include "tpm/info_model.hpp"
#include "tpm/scoring.hpp"
#include "tpm/time_value.hpp"

namespace tpm {

struct TimedReport {
  std::size_t agent = 0;
  double time = 0.0;
  ReportVector report;
};

/// Piecewise-constant market belief path with one counterfactual path per agent.
///
/// beliefs[j] is in force on [breakpoints[j-1], breakpoints[j]) with the
/// conventions breakpoints[-1] = 0 and breakpoints[K] = infinity.
/// counterfactuals[i][j] is the prior folded through the first j reports with
/// agent i's own report skipped.
struct MarketTrace {
  std::vector<double> breakpoints;
  std::vector<std::size_t> reporters;
  std::vector<Belief> beliefs;
  std::vector<std::vector<Belief>> counterfactuals;

  std::size_t num_reports() const { return breakpoints.size(); }

  /// k(t) = #{j : t_j < t}.
  std::size_t reports_before(double t) const {
    return static_cast<std::size_t>(std::lower_bound(breakpoints.begin(), breakpoints.end(), t) - breakpoints.begin());
  }

  const Belief& belief_at(double t) const { return beliefs[reports_before(t)]; }
  const Belief& counterfactual_at(std::size_t agent, double t) const {
    return counterfactuals.at(agent)[reports_before(t)];
  }

  double segment_start(std::size_t j) const { return j == 0 ? 0.0 : breakpoints[j - 1]; }
  double segment_end(std::size_t j) const {
    return j < breakpoints.size() ? breakpoints[j] : std::numeric_limits<double>::infinity();
  }
};

struct MvpSettlement {
  MarketTrace trace;
  std::vector<double> rewards;
};

namespace detail {

inline double score_gap(const ScoringRule& rule, const Belief& a, const Belief& b, std::size_t y) {
  if (a == b) return 0.0;
  const double gap = score(rule, a, y) - score(rule, b, y);
  if (!std::isfinite(gap)) throw InputError("score difference is not finite under this scoring rule");
  return gap;
}

}  // namespace detail

/// Settles the marginal value market.
///
/// Reports are folded in time order (ties broken by agent index) into the
/// market belief and into every other agent's counterfactual. Agent i earns
/// the h-weighted integral over t > 0 of S(p(t), y*) - S(p~i(t), y*), evaluated
/// exactly segment by segment up to t = infinity.
inline MvpSettlement mvp_run(const Belief& prior, std::vector<TimedReport> reports, std::size_t num_agents,
                             std::size_t outcome, const ScoringRule& rule, const TimeValue& h,
                             UpdateForm form = UpdateForm::canonical) {
  const std::size_t d = prior.size();
  if (outcome >= d) throw InputError("mvp_run: outcome index out of range");
  std::vector<bool> seen(num_agents, false);
  for (const auto& r : reports) {
    if (r.agent >= num_agents) throw InputError("mvp_run: agent index " + std::to_string(r.agent) + " out of range");
    if (!std::isfinite(r.time) || r.time < 0.0) throw InputError("mvp_run: report time must be finite and >= 0");
    if (r.report.num_outcomes() != d) throw InputError("mvp_run: report dimension mismatch");
    if (seen[r.agent]) throw ProtocolError("mvp_run: agent " + std::to_string(r.agent) + " reported twice");
    seen[r.agent] = true;
  }
  std::stable_sort(reports.begin(), reports.end(), [](const TimedReport& a, const TimedReport& b) {
    return a.time < b.time || (a.time == b.time && a.agent < b.agent);
  });

  MvpSettlement out;
  MarketTrace& trace = out.trace;
  trace.beliefs.push_back(prior);
  trace.counterfactuals.assign(num_agents, std::vector<Belief>{prior});
  for (const auto& r : reports) {
    trace.breakpoints.push_back(r.time);
    trace.reporters.push_back(r.agent);
    trace.beliefs.push_back(apply_report(trace.beliefs.back(), r.report, form));
    for (std::size_t i = 0; i < num_agents; ++i) {
      auto& cf = trace.counterfactuals[i];
      cf.push_back(i == r.agent ? cf.back() : apply_report(cf.back(), r.report, form));
    }
  }

  const std::size_t segments = trace.beliefs.size();
  std::vector<double> weight(segments);
  for (std::size_t j = 0; j < segments; ++j) weight[j] = h.mass(trace.segment_start(j), trace.segment_end(j));

  out.rewards.assign(num_agents, 0.0);
  for (std::size_t i = 0; i < num_agents; ++i) {
    if (!seen[i]) continue;
    double r = 0.0;
    for (std::size_t j = 0; j < segments; ++j) {
      if (weight[j] == 0.0) continue;
      r += detail::score_gap(rule, trace.beliefs[j], trace.counterfactuals[i][j], outcome) * weight[j];
    }
    out.rewards[i] = r;
  }
  return out;
}

/// Realized information value relative to the prior: integral of (S(p(t), y) - S(p_0, y)) h(t).
inline double trace_value(const MarketTrace& trace, std::size_t outcome, const ScoringRule& rule,
                          const TimeValue& h) {
  double total = 0.0;
  for (std::size_t j = 1; j < trace.beliefs.size(); ++j) {
    const double w = h.mass(trace.segment_start(j), trace.segment_end(j));
    if (w == 0.0) continue;
    total += detail::score_gap(rule, trace.beliefs[j], trace.beliefs.front(), outcome) * w;
  }
  return total;
}

/// Exact expected MVP rewards for fixed report times.
///
/// report_times[i] = infinity means agent i never reports. Every reporting
/// agent holds a signal; the expectation runs over the outcome and all those
/// signals, with reports chosen by `policy` (truthful by default).
inline std::vector<double> mvp_expected_rewards(const InformationModel& model, const ScoringRule& rule,
                                                const TimeValue& h, const std::vector<double>& report_times,
                                                const ReportPolicy& policy = {}) {
  const std::size_t n = report_times.size();
  const std::size_t d = model.num_outcomes();
  const std::size_t m = model.num_signals();
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(report_times[i])) active.push_back(i);
  }
  if (std::pow(static_cast<double>(m), static_cast<double>(active.size())) * static_cast<double>(d) >
      detail::kEnumerationLimit) {
    throw CapacityError("mvp_expected_rewards: too many signal profiles to enumerate");
  }
  const ReportPolicy report_of = policy ? policy : truthful_policy(model);
  std::vector<std::vector<ReportVector>> reports(n);
  for (std::size_t i : active) {
    for (std::size_t x = 0; x < m; ++x) reports[i].push_back(report_of(i, x));
  }

  std::vector<double> expected(n, 0.0);
  std::vector<std::size_t> signal(active.size(), 0);
  while (true) {
    std::vector<TimedReport> stream;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const std::size_t i = active[a];
      stream.push_back({i, report_times[i], reports[i][signal[a]]});
    }
    for (std::size_t y = 0; y < d; ++y) {
      double prob = model.prior()[y];
      for (std::size_t a = 0; a < active.size() && prob > 0.0; ++a) prob *= model.likelihood(y, signal[a]);
      if (prob <= 0.0) continue;
      const auto settled = mvp_run(model.prior(), stream, n, y, rule, h);
      for (std::size_t i = 0; i < n; ++i) expected[i] += prob * settled.rewards[i];
    }
    std::size_t a = 0;
    while (a < active.size() && ++signal[a] == m) signal[a++] = 0;
    if (a == active.size()) break;
  }
  return expected;
}

}  // namespace tpm
