#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tpm/error.hpp"
#include "tpm/probability.hpp"
#include "tpm/scoring.hpp"

namespace tpm {

/// Outcome prior plus a per-signal likelihood table shared by every agent.
///
/// Signals are i.i.d. conditional on the outcome. `likelihood(y, x)` is
/// P(X_i = x | Y = y); every row sums to one.
class InformationModel {
 public:
  static constexpr double kSumTolerance = 1e-12;

  InformationModel(std::vector<double> prior, std::vector<std::vector<double>> likelihood, std::size_t num_agents)
      : prior_(check_prior(prior)), num_agents_(num_agents) {
    if (num_agents == 0) throw InputError("InformationModel: need at least one agent");
    if (likelihood.size() != prior.size()) {
      throw InputError("InformationModel: likelihood needs one row per outcome");
    }
    num_signals_ = likelihood.front().size();
    if (num_signals_ == 0) throw InputError("InformationModel: empty signal space");
    for (const auto& row : likelihood) {
      if (row.size() != num_signals_) throw InputError("InformationModel: ragged likelihood table");
      detail::check_probability_vector(row, kSumTolerance, "InformationModel likelihood row");
      table_.insert(table_.end(), row.begin(), row.end());
    }
  }

  /// Binary outcome with P(Y = 1) = alpha, binary signals with P(X_i != Y) = beta.
  static InformationModel binary_noisy(double alpha, double beta, std::size_t num_agents) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("binary_noisy: alpha outside [0, 1]");
    if (!(beta >= 0.0 && beta <= 0.5)) throw InputError("binary_noisy: beta outside [0, 1/2]");
    return InformationModel({1.0 - alpha, alpha}, {{1.0 - beta, beta}, {beta, 1.0 - beta}}, num_agents);
  }

  std::size_t num_outcomes() const { return prior_.size(); }
  std::size_t num_signals() const { return num_signals_; }
  std::size_t num_agents() const { return num_agents_; }

  const Belief& prior() const { return prior_; }

  double likelihood(std::size_t y, std::size_t x) const { return table_[y * num_signals_ + x]; }

  std::span<const double> likelihood_row(std::size_t y) const {
    return std::span<const double>(table_).subspan(y * num_signals_, num_signals_);
  }

  /// (P(x | Y = y))_y for a fixed signal value.
  std::vector<double> likelihood_column(std::size_t x) const {
    check_signal(x);
    std::vector<double> column(num_outcomes());
    for (std::size_t y = 0; y < column.size(); ++y) column[y] = likelihood(y, x);
    return column;
  }

  void check_signal(std::size_t x) const {
    if (x >= num_signals_) {
      throw InputError("signal index " + std::to_string(x) + " out of range (m = " + std::to_string(num_signals_) + ")");
    }
  }

  InformationModel with_agents(std::size_t n) const {
    InformationModel copy = *this;
    if (n == 0) throw InputError("InformationModel: need at least one agent");
    copy.num_agents_ = n;
    return copy;
  }

 private:
  static Belief check_prior(const std::vector<double>& prior) {
    detail::check_probability_vector(prior, kSumTolerance, "InformationModel prior");
    return Belief(prior);
  }

  Belief prior_;
  std::size_t num_agents_;
  std::size_t num_signals_ = 0;
  std::vector<double> table_;  // row-major d x m
};

/// v_0 ... v_n: expected score gain after k truthful reports, relative to the prior.
class ScoreSequence {
 public:
  static constexpr double kMonotoneTolerance = 1e-12;

  explicit ScoreSequence(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InputError("ScoreSequence: empty");
    if (values_.front() != 0.0) throw InputError("ScoreSequence: v_0 must be exactly 0");
    for (std::size_t k = 0; k + 1 < values_.size(); ++k) {
      if (!std::isfinite(values_[k + 1])) throw InputError("ScoreSequence: nonfinite entry");
      const double tol = kMonotoneTolerance * std::max(1.0, std::abs(values_[k]));
      if (values_[k + 1] < values_[k] - tol) {
        throw InputError("ScoreSequence: decreasing at k = " + std::to_string(k + 1));
      }
    }
  }

  /// Largest k covered.
  std::size_t max_reports() const { return values_.size() - 1; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double increment(std::size_t k) const { return values_[k + 1] - values_[k]; }
  std::span<const double> values() const { return values_; }

  ScoreSequence truncated(std::size_t n) const {
    if (n > max_reports()) throw InputError("ScoreSequence: cannot extend by truncation");
    return ScoreSequence(std::vector<double>(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(n) + 1));
  }

  void require_reports(std::size_t n) const {
    if (max_reports() < n) {
      throw InputError("ScoreSequence: need v_0..v_" + std::to_string(n) + ", have up to v_" +
                       std::to_string(max_reports()));
    }
  }

 private:
  std::vector<double> values_;
};

/// P(Y | signals). Signal order does not matter.
inline Belief posterior(const InformationModel& model, std::span<const std::size_t> signals) {
  std::vector<double> w(model.prior().vector());
  for (std::size_t x : signals) {
    model.check_signal(x);
    for (std::size_t y = 0; y < w.size(); ++y) w[y] *= model.likelihood(y, x);
  }
  return Belief::from_weights(std::move(w));
}

inline Belief posterior(const InformationModel& model, std::initializer_list<std::size_t> signals) {
  return posterior(model, std::span<const std::size_t>(signals.begin(), signals.size()));
}

/// E_{Y~prior}[S(prior, Y)].
inline double expected_base_score(const InformationModel& model, const ScoringRule& rule) {
  return expected_score(rule, model.prior());
}

namespace detail {

inline constexpr double kEnumerationLimit = 1e7;

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

// E[S(p_k, Y)] for k = 0..n. Given a signal profile with joint weights
// w_y = P(Y = y, profile), E[S(post, Y) | profile] is the self-expected score of
// the posterior, so each profile contributes P(profile) * expected_score(post).
inline std::vector<double> expected_scores_by_count(const InformationModel& model, const ScoringRule& rule,
                                                    std::size_t n) {
  const std::size_t d = model.num_outcomes();
  std::vector<double> out(n + 1, 0.0);
  std::vector<double> w(d);
  for (std::size_t k = 0; k <= n; ++k) {
    double total = 0.0;
    for (std::size_t ones = 0; ones <= k; ++ones) {
      double mass = 0.0;
      for (std::size_t y = 0; y < d; ++y) {
        w[y] = model.prior()[y] * std::pow(model.likelihood(y, 1), static_cast<double>(ones)) *
               std::pow(model.likelihood(y, 0), static_cast<double>(k - ones));
        mass += w[y];
      }
      if (mass <= 0.0) continue;
      std::vector<double> post(w);
      for (double& x : post) x /= mass;
      total += binomial(k, ones) * mass * expected_score(rule, Belief(std::move(post)));
    }
    out[k] = total;
  }
  return out;
}

inline void enumerate_profiles(const InformationModel& model, const ScoringRule& rule, std::vector<double>& weights,
                               std::size_t depth, std::size_t n, std::vector<double>& out) {
  double mass = 0.0;
  for (double w : weights) mass += w;
  if (mass <= 0.0) return;
  std::vector<double> post(weights);
  for (double& x : post) x /= mass;
  out[depth] += mass * expected_score(rule, Belief(std::move(post)));
  if (depth == n) return;
  std::vector<double> next(weights.size());
  for (std::size_t x = 0; x < model.num_signals(); ++x) {
    for (std::size_t y = 0; y < weights.size(); ++y) next[y] = weights[y] * model.likelihood(y, x);
    enumerate_profiles(model, rule, next, depth + 1, n, out);
  }
}

}  // namespace detail

/// Expected score gain v_k = E[S(p_k, Y) - S(p_0, Y)] for k = 0..n, by exact enumeration.
///
/// Binary signal spaces use the number-of-ones sufficient statistic. Other
/// models enumerate all m^k signal tuples and throw CapacityError when m^n
/// exceeds 1e7; use the Monte Carlo estimator for those.
inline ScoreSequence v_sequence(const InformationModel& model, const ScoringRule& rule, std::size_t n) {
  std::vector<double> expected;
  if (model.num_signals() == 2) {
    expected = detail::expected_scores_by_count(model, rule, n);
  } else {
    const double tuples = std::pow(static_cast<double>(model.num_signals()), static_cast<double>(n));
    if (tuples > detail::kEnumerationLimit) {
      throw CapacityError("v_sequence: " + std::to_string(model.num_signals()) + "^" + std::to_string(n) +
                          " signal profiles exceed the enumeration limit; use the Monte Carlo estimator");
    }
    expected.assign(n + 1, 0.0);
    std::vector<double> weights(model.prior().vector());
    detail::enumerate_profiles(model, rule, weights, 0, n, expected);
  }
  const double base = expected_base_score(model, rule);
  std::vector<double> v(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) v[k] = expected[k] - base;
  return ScoreSequence(std::move(v));
}

}  // namespace tpm
