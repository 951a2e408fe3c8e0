#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tpm/belief.hpp"
#include "tpm/error.hpp"
#include "tpm/info_model.hpp"
#include "tpm/root_finding.hpp"
#include "tpm/scoring.hpp"

namespace tpm {

/// Settles a traditional scoring-rule market: reports are applied in the
/// given order and the k-th reporter earns S(p_k, y) - S(p_{k-1}, y).
/// `order` lists agent indices; returns per-agent rewards and the final belief.
struct PmSettlement {
  Belief final_belief;
  std::vector<double> rewards;
};

inline PmSettlement pm_run(const Belief& prior, const std::vector<ReportVector>& reports,
                           const std::vector<std::size_t>& order, std::size_t outcome, const ScoringRule& rule) {
  if (outcome >= prior.size()) throw InputError("pm_run: outcome index out of range");
  PmSettlement out{prior, std::vector<double>(reports.size(), 0.0)};
  std::vector<bool> seen(reports.size(), false);
  double last = score(rule, prior, outcome);
  for (std::size_t i : order) {
    if (i >= reports.size()) throw InputError("pm_run: agent index out of range");
    if (seen[i]) throw ProtocolError("pm_run: agent " + std::to_string(i) + " reported twice");
    seen[i] = true;
    out.final_belief = apply_report(out.final_belief, reports[i]);
    const double now = score(rule, out.final_belief, outcome);
    out.rewards[i] = now - last;
    last = now;
  }
  return out;
}

/// Probability F(c) that an agent investing effort c obtains a signal.
///
/// Linear: F(c) = lam c on [0, 1/lam]. Exponential: F(c) = 1 - e^{-lam c} on [0, inf).
struct AccessFunction {
  enum class Kind { linear, exponential };

  Kind kind = Kind::exponential;
  double lam = 1.0;

  static AccessFunction linear(double lam) { return make(Kind::linear, lam); }
  static AccessFunction exponential(double lam) { return make(Kind::exponential, lam); }

  static AccessFunction make(Kind kind, double lam) {
    if (!(lam > 0.0) || !std::isfinite(lam)) throw InputError("AccessFunction: lambda must be positive and finite");
    return AccessFunction{kind, lam};
  }

  double domain_max() const {
    return kind == Kind::linear ? 1.0 / lam : std::numeric_limits<double>::infinity();
  }

  void check_domain(double c) const {
    if (!(c >= 0.0) || c > domain_max()) {
      throw InputError("AccessFunction: effort " + std::to_string(c) + " outside the domain");
    }
  }

  double value(double c) const {
    check_domain(c);
    return kind == Kind::linear ? lam * c : -std::expm1(-lam * c);
  }

  double derivative(double c) const {
    check_domain(c);
    return kind == Kind::linear ? lam : lam * std::exp(-lam * c);
  }
};

namespace detail {

/// C(n, k) F^k (1 - F)^(n - k).
inline double binomial_pmf(std::size_t n, std::size_t k, double f) {
  return binomial(n, k) * std::pow(f, static_cast<double>(k)) * std::pow(1.0 - f, static_cast<double>(n - k));
}

/// Expected share of a unit prize when the others each hold a signal with probability f
/// and ties split evenly: sum_k C(n-1, k) f^k (1-f)^(n-1-k) / (k + 1).
inline double tie_share(std::size_t n, double f) {
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) total += binomial_pmf(n - 1, k, f) / static_cast<double>(k + 1);
  return total;
}

inline void check_race_inputs(const AccessFunction& access, std::size_t n) {
  if (n < 2) throw InputError("winner race needs n >= 2");
  if (!(access.lam > 1.0)) throw InputError("winner race needs lambda > 1");
}

}  // namespace detail

/// Expected utility of an agent investing x in the single-batch winner race
/// while everyone else invests c.
inline double pm_batch_utility(const AccessFunction& access, std::size_t n, double x, double c) {
  if (n == 0) throw InputError("pm_batch_utility: need n >= 1");
  return access.value(x) * detail::tie_share(n, access.value(c)) - x;
}

/// W(c) = 1 - (1 - F(c))^n - n c.
inline double pm_batch_welfare(const AccessFunction& access, std::size_t n, double c) {
  return 1.0 - std::pow(1.0 - access.value(c), static_cast<double>(n)) - static_cast<double>(n) * c;
}

/// Symmetric equilibrium of the winner race.
///
/// Solves F'(c) * tie_share(F(c)) = 1. With linear access and n <= lambda the
/// condition cannot be met inside the domain and the corner c = 1/lambda is
/// returned with `corner` set.
inline EquilibriumResult pm_batch_equilibrium(const AccessFunction& access, std::size_t n) {
  detail::check_race_inputs(access, n);
  auto foc = [&](double c) { return access.derivative(c) * detail::tie_share(n, access.value(c)) - 1.0; };
  return solve_decreasing_foc(foc, access.domain_max());
}

/// The welfare-maximizing symmetric effort of the winner race.
inline double pm_batch_optimal_effort(const AccessFunction& access, std::size_t n) {
  detail::check_race_inputs(access, n);
  const double nn = static_cast<double>(n);
  if (access.kind == AccessFunction::Kind::linear) {
    return 1.0 / access.lam - std::pow(access.lam, -nn / (nn - 1.0));
  }
  return std::log(access.lam) / (nn * access.lam);
}

namespace detail {

// Derivative with respect to my rate of P(I finish j-th), j = 1..n, in an
// exponential race against n - 1 rivals of equal rate. Memorylessness makes
// each rank a chain of independent first-arrival races.
inline std::vector<double> rank_probability_slopes(std::size_t n, double my_rate, double rate) {
  std::vector<double> slopes(n, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    // Factors: for stages l = 0..j-2 a rival wins, at stage j-1 I win.
    std::vector<double> value(j), slope(j);
    for (std::size_t l = 0; l + 1 < j; ++l) {
      const double m = static_cast<double>(n - 1 - l) * rate;
      value[l] = m / (my_rate + m);
      slope[l] = -m / ((my_rate + m) * (my_rate + m));
    }
    const double m_last = static_cast<double>(n - j) * rate;
    if (n == j) {
      value[j - 1] = 1.0;
      slope[j - 1] = 0.0;
    } else {
      value[j - 1] = my_rate / (my_rate + m_last);
      slope[j - 1] = m_last / ((my_rate + m_last) * (my_rate + m_last));
    }
    for (std::size_t a = 0; a < j; ++a) {
      double term = slope[a];
      for (std::size_t b = 0; b < j; ++b) {
        if (b != a) term *= value[b];
      }
      slopes[j - 1] += term;
    }
  }
  return slopes;
}

}  // namespace detail

/// Marginal utility of effort in the sequential rank race: the j-th reporter
/// earns v_j - v_{j-1}, arrival rates are lam * effort.
inline double pm_race_br_derivative(const ScoreSequence& v, std::size_t n, double lam, double my_effort,
                                    double effort) {
  v.require_reports(n);
  if (!(my_effort > 0.0) || !(effort > 0.0)) throw InputError("pm_race_br_derivative: efforts must be positive");
  const auto slopes = detail::rank_probability_slopes(n, lam * my_effort, lam * effort);
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += lam * slopes[j - 1] * v.increment(j - 1);
  return total - 1.0;
}

/// Closed-form two-agent race equilibrium, (2 v_1 - v_2) / 4 floored at 0.
inline double pm_race_effort_two_agents(const ScoreSequence& v) {
  v.require_reports(2);
  return std::max(0.0, (2.0 * v[1] - v[2]) / 4.0);
}

/// Symmetric equilibrium of the sequential prediction-market race.
///
/// Rank probabilities depend only on effort ratios, so the result does not
/// depend on lam. Returns the corner 0 when the marginal value of effort is
/// nonpositive for every symmetric profile.
inline EquilibriumResult pm_race_equilibrium(const ScoreSequence& v, std::size_t n, double lam = 1.0) {
  if (n < 2) throw InputError("pm_race_equilibrium: need n >= 2");
  v.require_reports(n);
  auto foc = [&](double c) { return pm_race_br_derivative(v, n, lam, c, c); };
  // At symmetric profiles the condition reads K / c - 1 with K independent of c.
  const double k = foc(1.0) + 1.0;
  if (!(k > 0.0)) {
    EquilibriumResult corner;
    corner.corner = true;
    corner.residual = k == 0.0 ? -1.0 : -std::numeric_limits<double>::infinity();
    return corner;
  }
  return solve_decreasing_foc(foc, std::numeric_limits<double>::infinity(), k * 1e-6);
}

}  // namespace tpm
