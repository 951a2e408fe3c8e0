#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "tpm/error.hpp"
#include "tpm/info_model.hpp"
#include "tpm/pm_baseline.hpp"
#include "tpm/quadrature.hpp"
#include "tpm/root_finding.hpp"
#include "tpm/time_value.hpp"

namespace tpm {

/// Signal latency c.d.f. F_c(t) = 1 - e^{-lam c t}; effort 0 never obtains a signal.
struct LatencyFamily {
  double lam = 1.0;

  static LatencyFamily exponential(double lam) {
    if (!(lam > 0.0) || !std::isfinite(lam)) throw InputError("LatencyFamily: lambda must be positive and finite");
    return LatencyFamily{lam};
  }

  double cdf(double effort, double t) const { return -std::expm1(-lam * effort * t); }
  /// dF_c(t)/dc
  double effort_slope(double effort, double t) const { return lam * t * std::exp(-lam * effort * t); }
  /// Draws a latency from a uniform u in [0, 1); infinite for zero effort.
  double sample(double effort, double u) const {
    if (effort <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log1p(-u) / (lam * effort);
  }
};

// ---------------------------------------------------------------------------
// Single batch
// ---------------------------------------------------------------------------

namespace detail {

inline void check_effort(double c, const char* what) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw InputError(std::string(what) + ": effort must be finite and >= 0");
}

// sum_{k<n} C(n-1, k) f^k (1-f)^(n-1-k) (v_{k+1} - v_k)
inline double marginal_value(const ScoreSequence& v, std::size_t n, double f) {
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) total += binomial_pmf(n - 1, k, f) * v.increment(k);
  return total;
}

}  // namespace detail

/// d u_i / d c_i in the fair market when agent i invests my_effort and the rest invest effort.
inline double batch_br_derivative(const AccessFunction& access, const ScoreSequence& v, std::size_t n,
                                  double my_effort, double effort) {
  v.require_reports(n);
  return access.derivative(my_effort) * detail::marginal_value(v, n, access.value(effort)) - 1.0;
}

/// Expected reward of agent i in the fair market (before subtracting the effort cost).
inline double batch_expected_reward(const AccessFunction& access, const ScoreSequence& v, std::size_t n,
                                    double my_effort, double effort) {
  v.require_reports(n);
  return access.value(my_effort) * detail::marginal_value(v, n, access.value(effort));
}

/// Relative welfare sum_k C(n,k) F^k (1-F)^(n-k) v_k - n c.
inline double batch_welfare(const AccessFunction& access, const ScoreSequence& v, std::size_t n, double c) {
  v.require_reports(n);
  const double f = access.value(c);
  double total = 0.0;
  for (std::size_t k = 0; k <= n; ++k) total += detail::binomial_pmf(n, k, f) * v[k];
  return total - static_cast<double>(n) * c;
}

/// dW/dc by differentiating every binomial term of the welfare directly.
inline double batch_welfare_derivative(const AccessFunction& access, const ScoreSequence& v, std::size_t n,
                                       double c) {
  v.require_reports(n);
  const double f = access.value(c);
  const double nn = static_cast<double>(n);
  double total = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    double up = 0.0, down = 0.0;
    if (k > 0) up = kk * std::pow(f, kk - 1.0) * std::pow(1.0 - f, nn - kk);
    if (k < n) down = (nn - kk) * std::pow(f, kk) * std::pow(1.0 - f, nn - kk - 1.0);
    total += detail::binomial(n, k) * (up - down) * v[k];
  }
  return access.derivative(c) * total - nn;
}

/// Symmetric equilibrium effort of the fair market; the corner 0 when the
/// marginal value at zero effort does not cover its cost.
inline EquilibriumResult batch_equilibrium(const AccessFunction& access, const ScoreSequence& v, std::size_t n) {
  v.require_reports(n);
  auto foc = [&](double c) { return batch_br_derivative(access, v, n, c, c); };
  return solve_decreasing_foc(foc, access.domain_max());
}

// ---------------------------------------------------------------------------
// Sequential market
// ---------------------------------------------------------------------------

namespace detail {

inline bool closed_form(const TimeValue& h) { return h.kind() == TimeValue::Kind::exponential; }

inline double alternating(std::size_t k, std::size_t j) { return (j % 2 == 0 ? 1.0 : -1.0) * binomial(k, j); }

}  // namespace detail

/// d u_i / d c_i by quadrature of
/// dF_{c_i}(t)/dc_i * sum_k C(n-1,k) F_c^k (1-F_c)^(n-1-k) (v_{k+1} - v_k) h(t), minus 1.
inline double mvp_br_derivative_quadrature(const LatencyFamily& latency, const TimeValue& h, const ScoreSequence& v,
                                           std::size_t n, double my_effort, double effort) {
  v.require_reports(n);
  auto f = [&](double t) {
    return latency.effort_slope(my_effort, t) * detail::marginal_value(v, n, latency.cdf(effort, t));
  };
  return integrate_weighted(f, h) - 1.0;
}

/// d u_i / d c_i in the marginal value market.
///
/// With exponential latency and exponential h every term integrates in closed
/// form (int t e^{-a t} dt = 1 / a^2); other h fall back to quadrature.
inline double mvp_br_derivative(const LatencyFamily& latency, const TimeValue& h, const ScoreSequence& v,
                                std::size_t n, double my_effort, double effort) {
  detail::check_effort(my_effort, "mvp_br_derivative");
  detail::check_effort(effort, "mvp_br_derivative");
  v.require_reports(n);
  if (!detail::closed_form(h)) return mvp_br_derivative_quadrature(latency, h, v, n, my_effort, effort);
  const double eta = h.eta();
  const double lam = latency.lam;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dv = v.increment(k);
    if (dv == 0.0) continue;
    double inner = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      const double a = eta + lam * my_effort + lam * effort * static_cast<double>(n - 1 - k + j);
      inner += detail::alternating(k, j) / (a * a);
    }
    total += detail::binomial(n - 1, k) * dv * inner;
  }
  return lam * eta * total - 1.0;
}

/// Relative welfare by quadrature: int sum_k C(n,k) F_c^k (1-F_c)^(n-k) v_k h(t) dt - n c.
inline double mvp_welfare_quadrature(const LatencyFamily& latency, const TimeValue& h, const ScoreSequence& v,
                                     std::size_t n, double c) {
  v.require_reports(n);
  auto f = [&](double t) {
    const double fc = latency.cdf(c, t);
    double s = 0.0;
    for (std::size_t k = 1; k <= n; ++k) s += detail::binomial_pmf(n, k, fc) * v[k];
    return s;
  };
  return integrate_weighted(f, h) - static_cast<double>(n) * c;
}

/// Relative social welfare E[V] - E[V_0] - n c at symmetric effort c, assuming
/// truthful and timely reports.
inline double mvp_welfare(const LatencyFamily& latency, const TimeValue& h, const ScoreSequence& v, std::size_t n,
                          double c) {
  detail::check_effort(c, "mvp_welfare");
  v.require_reports(n);
  if (!detail::closed_form(h)) return mvp_welfare_quadrature(latency, h, v, n, c);
  const double eta = h.eta();
  const double lam = latency.lam;
  double total = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (v[k] == 0.0) continue;
    double inner = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      inner += detail::alternating(k, j) * eta / (eta + lam * c * static_cast<double>(n - k + j));
    }
    total += detail::binomial(n, k) * v[k] * inner;
  }
  return total - static_cast<double>(n) * c;
}

/// dW/dc by quadrature of the undifferentiated-by-parts welfare integrand.
inline double mvp_welfare_derivative_quadrature(const LatencyFamily& latency, const TimeValue& h,
                                                const ScoreSequence& v, std::size_t n, double c) {
  v.require_reports(n);
  const double nn = static_cast<double>(n);
  auto f = [&](double t) {
    const double fc = latency.cdf(c, t);
    double s = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      const double kk = static_cast<double>(k);
      double up = 0.0, down = 0.0;
      if (k > 0) up = kk * std::pow(fc, kk - 1.0) * std::pow(1.0 - fc, nn - kk);
      if (k < n) down = (nn - kk) * std::pow(fc, kk) * std::pow(1.0 - fc, nn - kk - 1.0);
      s += detail::binomial(n, k) * (up - down) * v[k];
    }
    return latency.effort_slope(c, t) * s;
  };
  return integrate_weighted(f, h) - nn;
}

/// dW/dc; the closed form differentiates each eta / (eta + b c) term of the welfare.
inline double mvp_welfare_derivative(const LatencyFamily& latency, const TimeValue& h, const ScoreSequence& v,
                                     std::size_t n, double c) {
  detail::check_effort(c, "mvp_welfare_derivative");
  v.require_reports(n);
  if (!detail::closed_form(h)) return mvp_welfare_derivative_quadrature(latency, h, v, n, c);
  const double eta = h.eta();
  const double lam = latency.lam;
  double total = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (v[k] == 0.0) continue;
    double inner = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      const double b = lam * static_cast<double>(n - k + j);
      const double a = eta + b * c;
      inner -= detail::alternating(k, j) * eta * b / (a * a);
    }
    total += detail::binomial(n, k) * v[k] * inner;
  }
  return total - static_cast<double>(n);
}

/// E[r_i] by quadrature: int F_{c_i}(t) sum_k C(n-1,k) F_c^k (1-F_c)^(n-1-k) (v_{k+1} - v_k) h(t) dt.
inline double mvp_expected_reward_quadrature(const LatencyFamily& latency, const TimeValue& h,
                                             const ScoreSequence& v, std::size_t n, double my_effort,
                                             double effort) {
  v.require_reports(n);
  auto f = [&](double t) {
    return latency.cdf(my_effort, t) * detail::marginal_value(v, n, latency.cdf(effort, t));
  };
  return integrate_weighted(f, h);
}

/// Expected MVP reward of agent i under truthful, timely play.
inline double mvp_expected_reward(const LatencyFamily& latency, const TimeValue& h, const ScoreSequence& v,
                                  std::size_t n, double my_effort, double effort) {
  detail::check_effort(my_effort, "mvp_expected_reward");
  detail::check_effort(effort, "mvp_expected_reward");
  v.require_reports(n);
  if (!detail::closed_form(h)) return mvp_expected_reward_quadrature(latency, h, v, n, my_effort, effort);
  const double eta = h.eta();
  const double lam = latency.lam;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dv = v.increment(k);
    if (dv == 0.0) continue;
    double inner = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      const double b = lam * effort * static_cast<double>(n - 1 - k + j);
      inner += detail::alternating(k, j) * (eta / (eta + b) - eta / (eta + b + lam * my_effort));
    }
    total += detail::binomial(n - 1, k) * dv * inner;
  }
  return total;
}

/// Relative principal utility E[V] - E[V_0] - sum_i E[r_i] at symmetric effort c.
inline double mvp_principal_utility(const LatencyFamily& latency, const TimeValue& h, const ScoreSequence& v,
                                    std::size_t n, double c) {
  const double nn = static_cast<double>(n);
  return mvp_welfare(latency, h, v, n, c) + nn * c - nn * mvp_expected_reward(latency, h, v, n, c, c);
}

/// Symmetric equilibrium effort of the marginal value market.
inline EquilibriumResult mvp_equilibrium(const LatencyFamily& latency, const TimeValue& h, const ScoreSequence& v,
                                         std::size_t n) {
  v.require_reports(n);
  auto foc = [&](double c) { return mvp_br_derivative(latency, h, v, n, c, c); };
  return solve_decreasing_foc(foc);
}

/// Root of the sequential welfare first-order condition (the maximizer when W is concave in c).
inline EquilibriumResult mvp_welfare_optimum(const LatencyFamily& latency, const TimeValue& h,
                                             const ScoreSequence& v, std::size_t n) {
  v.require_reports(n);
  const double nn = static_cast<double>(n);
  auto foc = [&](double c) { return mvp_welfare_derivative(latency, h, v, n, c) / nn; };
  return solve_decreasing_foc(foc);
}

/// Root of the batch welfare first-order condition (the maximizer when W is concave in c).
inline EquilibriumResult batch_welfare_optimum(const AccessFunction& access, const ScoreSequence& v,
                                               std::size_t n) {
  v.require_reports(n);
  const double nn = static_cast<double>(n);
  auto foc = [&](double c) { return batch_welfare_derivative(access, v, n, c) / nn; };
  return solve_decreasing_foc(foc, access.domain_max());
}

/// Welfare of the sequential prediction-market race at its own equilibrium.
struct RaceOutcome {
  EquilibriumResult equilibrium;
  double welfare = 0.0;
};

inline RaceOutcome pm_race_welfare(const LatencyFamily& latency, const TimeValue& h, const ScoreSequence& v,
                                   std::size_t n) {
  RaceOutcome out;
  out.equilibrium = pm_race_equilibrium(v, n, latency.lam);
  out.welfare = mvp_welfare(latency, h, v, n, out.equilibrium.effort);
  return out;
}

}  // namespace tpm
