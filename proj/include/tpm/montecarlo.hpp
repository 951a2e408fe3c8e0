#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tpm/belief.hpp"
#include "tpm/equilibrium.hpp"
#include "tpm/error.hpp"
#include "tpm/fpm.hpp"
#include "tpm/info_model.hpp"
#include "tpm/mvp.hpp"
#include "tpm/numerics.hpp"
#include "tpm/pm_baseline.hpp"
#include "tpm/scoring.hpp"
#include "tpm/time_value.hpp"

namespace tpm {

enum class Mechanism { fpm, mvp, pm_batch, pm_sequential };

inline bool is_sequential(Mechanism m) { return m == Mechanism::mvp || m == Mechanism::pm_sequential; }

/// What an agent does with a signal once it arrives.
struct ReportBehavior {
  enum class Kind { truthful, perturbed, delayed, silent };

  Kind kind = Kind::truthful;
  /// Shift added to report entry `entry` (perturbed) or to the report time (delayed).
  double amount = 0.0;
  std::size_t entry = 0;

  static ReportBehavior truthful() { return {}; }
  static ReportBehavior perturbed(double epsilon, std::size_t entry = 0) { return {Kind::perturbed, epsilon, entry}; }
  static ReportBehavior delayed(double delta) {
    if (!(delta >= 0.0)) throw InputError("ReportBehavior: delay must be >= 0");
    return {Kind::delayed, delta, 0};
  }
  static ReportBehavior silent() { return {Kind::silent, 0.0, 0}; }

  friend bool operator==(const ReportBehavior&, const ReportBehavior&) = default;
};

struct StrategyProfile {
  std::vector<double> effort;
  std::vector<ReportBehavior> behavior;

  static StrategyProfile symmetric(std::size_t n, double effort, ReportBehavior b = ReportBehavior::truthful()) {
    return {std::vector<double>(n, effort), std::vector<ReportBehavior>(n, b)};
  }

  std::size_t size() const { return effort.size(); }

  void validate(std::size_t n) const {
    if (effort.size() != n || behavior.size() != n) throw InputError("StrategyProfile: need one entry per agent");
    for (double c : effort) {
      if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("StrategyProfile: effort must be finite and >= 0");
    }
  }
};

struct SimConfig {
  InformationModel model;
  Mechanism mechanism = Mechanism::fpm;
  ScoringRule rule = ScoringRule::quadratic();
  AccessFunction access = AccessFunction::exponential(1.0);
  LatencyFamily latency = LatencyFamily::exponential(1.0);
  TimeValue h = TimeValue::exponential(1.0);
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  /// 0 uses the hardware concurrency. Results do not depend on this.
  unsigned threads = 0;
};

/// One simulated game, in score units relative to the prior's score.
struct TrialRecord {
  std::size_t outcome = 0;
  double value = 0.0;
  std::vector<double> rewards;
  std::vector<double> costs;

  double principal_utility() const {
    ExactSum s;
    s.add(value);
    for (double r : rewards) s.add(-r);
    return s.value();
  }
  double agent_utility(std::size_t i) const { return rewards[i] - costs[i]; }
  double welfare() const {
    ExactSum s;
    s.add(value);
    for (double c : costs) s.add(-c);
    return s.value();
  }
  /// U + sum_i u_i accumulated exactly, term by term.
  double utility_total() const {
    ExactSum s;
    s.add(value);
    for (double r : rewards) s.add(-r);
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      s.add(rewards[i]);
      s.add(-costs[i]);
    }
    return s.value();
  }
};

struct SimStats {
  std::size_t trials = 0;
  std::vector<Estimate> reward;
  std::vector<Estimate> cost;
  std::vector<Estimate> utility;
  Estimate principal_utility;
  Estimate welfare;
  Estimate value;
  /// Trials where W != U + sum u_i bitwise. Always 0 unless the settlement leaks money.
  std::size_t accounting_violations = 0;
};

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/// Counter-based uniforms keyed by (seed, trial, agent, purpose).
///
/// Every draw is a pure function of its key, so results do not depend on
/// thread scheduling and paired runs share their draws.
class RandomStream {
 public:
  enum class Purpose : std::uint64_t { outcome = 1, access = 2, latency = 3, signal = 4, order = 5 };

  explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

  double uniform(std::uint64_t trial, std::uint64_t agent, Purpose purpose) const {
    std::uint64_t x = mix(seed_ ^ 0x9e3779b97f4a7c15ULL);
    x = mix(x ^ trial);
    x = mix(x ^ (agent * 0xd1b54a32d192ed03ULL));
    x = mix(x ^ static_cast<std::uint64_t>(purpose));
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }

 private:
  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

namespace detail {

inline std::size_t sample_categorical(std::span<const double> probs, double u) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  // u landed in the rounding gap above the last cumulative sum.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

inline ReportVector behave(const InformationModel& model, std::size_t signal, const ReportBehavior& b) {
  ReportVector truthful = truthful_report(model, signal);
  if (b.kind == ReportBehavior::Kind::perturbed) return truthful.perturbed(b.entry, b.amount);
  return truthful;
}

}  // namespace detail

/// Plays one trial: outcome, signal acquisition, reports, settlement.
inline TrialRecord simulate_trial(const SimConfig& config, const StrategyProfile& profile, std::uint64_t trial) {
  const auto& model = config.model;
  const std::size_t n = model.num_agents();
  const std::size_t d = model.num_outcomes();
  const RandomStream rng(config.seed);
  using P = RandomStream::Purpose;

  TrialRecord rec;
  rec.outcome = detail::sample_categorical(model.prior().probs(), rng.uniform(trial, 0, P::outcome));
  rec.costs = profile.effort;
  const std::size_t y = rec.outcome;

  std::vector<std::size_t> signal(n);
  for (std::size_t i = 0; i < n; ++i) {
    signal[i] = detail::sample_categorical(model.likelihood_row(y), rng.uniform(trial, i, P::signal));
  }
  const auto& prior = model.prior();

  switch (config.mechanism) {
    case Mechanism::fpm:
    case Mechanism::pm_batch: {
      std::vector<ReportVector> reports(n, ReportVector::silent(d));
      std::vector<std::size_t> holders;
      for (std::size_t i = 0; i < n; ++i) {
        const bool obtained = rng.uniform(trial, i, P::access) < config.access.value(profile.effort[i]);
        if (!obtained || profile.behavior[i].kind == ReportBehavior::Kind::silent) continue;
        reports[i] = detail::behave(model, signal[i], profile.behavior[i]);
        holders.push_back(i);
      }
      if (config.mechanism == Mechanism::fpm) {
        auto result = fpm_run(prior, BatchOutcomeReport{reports, y}, config.rule);
        rec.value = score(config.rule, result.aggregated, y) - score(config.rule, prior, y);
        rec.rewards = std::move(result.rewards);
      } else {
        // Simultaneous holders race; the order among them is uniformly random.
        std::vector<double> key(n);
        for (std::size_t i : holders) key[i] = rng.uniform(trial, i, P::order);
        std::stable_sort(holders.begin(), holders.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
        auto result = pm_run(prior, reports, holders, y, config.rule);
        rec.value = score(config.rule, result.final_belief, y) - score(config.rule, prior, y);
        rec.rewards = std::move(result.rewards);
      }
      break;
    }
    case Mechanism::mvp:
    case Mechanism::pm_sequential: {
      std::vector<TimedReport> stream;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& b = profile.behavior[i];
        const double arrival = config.latency.sample(profile.effort[i], rng.uniform(trial, i, P::latency));
        if (!std::isfinite(arrival) || b.kind == ReportBehavior::Kind::silent) continue;
        const double time = arrival + (b.kind == ReportBehavior::Kind::delayed ? b.amount : 0.0);
        stream.push_back({i, time, detail::behave(model, signal[i], b)});
      }
      auto settled = mvp_run(prior, stream, n, y, config.rule, config.h);
      rec.value = trace_value(settled.trace, y, config.rule, config.h);
      if (config.mechanism == Mechanism::mvp) {
        rec.rewards = std::move(settled.rewards);
      } else {
        std::vector<ReportVector> reports(n, ReportVector::silent(d));
        for (const auto& r : stream) reports[r.agent] = r.report;
        rec.rewards = pm_run(prior, reports, settled.trace.reporters, y, config.rule).rewards;
      }
      break;
    }
  }
  return rec;
}

namespace detail {

template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, count)));
  if (workers <= 1) {
    for (std::size_t t = 0; t < count; ++t) body(t);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, &errors, w, begin, end] {
      try {
        for (std::size_t t = begin; t < end; ++t) body(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline void check_sim(const SimConfig& config, const StrategyProfile& profile) {
  if (config.trials == 0) throw InputError("simulate: need at least one trial");
  profile.validate(config.model.num_agents());
}

}  // namespace detail

/// Per-trial records in trial order.
inline std::vector<TrialRecord> simulate_trials(const SimConfig& config, const StrategyProfile& profile) {
  detail::check_sim(config, profile);
  std::vector<TrialRecord> records(config.trials);
  detail::parallel_for(config.trials, config.threads,
                       [&](std::size_t t) { records[t] = simulate_trial(config, profile, t); });
  return records;
}

/// Monte Carlo estimates of rewards, costs, utilities and welfare.
inline SimStats simulate(const SimConfig& config, const StrategyProfile& profile) {
  detail::check_sim(config, profile);
  const std::size_t n = config.model.num_agents();
  const std::size_t trials = config.trials;
  std::vector<std::vector<double>> reward(n, std::vector<double>(trials));
  std::vector<std::vector<double>> utility(n, std::vector<double>(trials));
  std::vector<double> principal(trials), welfare(trials), value(trials);
  std::vector<unsigned char> violation(trials, 0);

  detail::parallel_for(trials, config.threads, [&](std::size_t t) {
    const TrialRecord rec = simulate_trial(config, profile, t);
    for (std::size_t i = 0; i < n; ++i) {
      reward[i][t] = rec.rewards[i];
      utility[i][t] = rec.agent_utility(i);
    }
    principal[t] = rec.principal_utility();
    welfare[t] = rec.welfare();
    value[t] = rec.value;
    violation[t] = rec.utility_total() != welfare[t];
  });

  SimStats stats;
  stats.trials = trials;
  for (std::size_t i = 0; i < n; ++i) {
    stats.reward.push_back(estimate(reward[i]));
    stats.cost.push_back({profile.effort[i], 0.0});
    stats.utility.push_back(estimate(utility[i]));
  }
  stats.principal_utility = estimate(principal);
  stats.welfare = estimate(welfare);
  stats.value = estimate(value);
  stats.accounting_violations = static_cast<std::size_t>(std::count(violation.begin(), violation.end(), 1));
  return stats;
}

/// A unilateral change of one agent's strategy.
struct Deviation {
  std::optional<double> effort;
  std::optional<ReportBehavior> behavior;
};

struct DeviationResult {
  /// Mean of (deviant utility - baseline utility) over paired trials.
  double utility_delta_mean = 0.0;
  double standard_error = 0.0;

  /// True when the deviation lowers utility by more than `sigmas` standard errors.
  bool harmful(double sigmas = 3.0) const {
    return utility_delta_mean < 0.0 && -utility_delta_mean > sigmas * standard_error;
  }
};

/// Paired estimate of the utility change from a deviation, with common random
/// numbers: both runs of trial t see the same outcome, signals and uniforms.
inline DeviationResult deviation_test(const SimConfig& config, const StrategyProfile& baseline, std::size_t agent,
                                      const Deviation& deviation) {
  detail::check_sim(config, baseline);
  if (agent >= baseline.size()) throw InputError("deviation_test: agent index out of range");
  StrategyProfile deviant = baseline;
  if (deviation.effort) deviant.effort[agent] = *deviation.effort;
  if (deviation.behavior) deviant.behavior[agent] = *deviation.behavior;
  deviant.validate(config.model.num_agents());

  std::vector<double> delta(config.trials);
  detail::parallel_for(config.trials, config.threads, [&](std::size_t t) {
    const TrialRecord base = simulate_trial(config, baseline, t);
    const TrialRecord dev = simulate_trial(config, deviant, t);
    delta[t] = dev.agent_utility(agent) - base.agent_utility(agent);
  });
  const Estimate e = estimate(delta);
  return {e.mean, e.standard_error};
}

}  // namespace tpm
