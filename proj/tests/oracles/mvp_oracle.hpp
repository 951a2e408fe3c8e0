#pragma once

// Sequential-market rewards by evaluating the belief path at each time point
// from scratch and integrating the score gap against h numerically.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "integral_oracle.hpp"

namespace oracle {

struct StampedReport {
  std::size_t agent;
  double time;
  std::vector<double> likelihood_ratio;  // weight per outcome, reference outcome 1
};

/// Belief at time t: prior times every ratio reported strictly before t, optionally skipping one agent.
inline std::vector<double> belief_at(const std::vector<double>& prior, const std::vector<StampedReport>& reports, double t,
                                     std::size_t skip) {
  std::vector<double> p = prior;
  for (const auto& r : reports) {
    if (r.agent == skip || !(r.time < t)) continue;
    for (std::size_t y = 0; y < p.size(); ++y) p[y] *= r.likelihood_ratio[y];
  }
  double total = 0;
  for (double q : p) total += q;
  for (double& q : p) q /= total;
  return p;
}

inline double quadratic(const std::vector<double>& p, std::size_t y) {
  double norm = 0;
  for (double q : p) norm += q * q;
  return 2 * p[y] - norm;
}

/// Reward of `agent` with exponential h of rate eta; the integral runs to a horizon with tail below 1e-16.
inline double mvp_reward(const std::vector<double>& prior, const std::vector<StampedReport>& reports, std::size_t agent,
                         std::size_t outcome, double eta) {
  auto integrand = [&](double t) {
    const auto p = belief_at(prior, reports, t, std::numeric_limits<std::size_t>::max());
    const auto q = belief_at(prior, reports, t, agent);
    return (quadratic(p, outcome) - quadratic(q, outcome)) * eta * std::exp(-eta * t);
  };
  std::vector<double> cuts{0.0};
  for (const auto& r : reports) cuts.push_back(r.time);
  const double horizon = 37.0 / eta;
  cuts.push_back(std::max(horizon, cuts.back() + horizon));
  std::sort(cuts.begin(), cuts.end());
  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b <= a) continue;
    // Nudge inside so the step function is smooth on each panel.
    const double w = b - a;
    total += adaptive_simpson(integrand, a + 1e-15 * w, b - 1e-15 * w, 1e-14);
  }
  return total;
}

}  // namespace oracle
