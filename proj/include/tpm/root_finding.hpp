#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "tpm/error.hpp"

namespace tpm {

/// A symmetric equilibrium effort level and how it was certified.
struct EquilibriumResult {
  double effort = 0.0;
  /// First-order condition at `effort`. For corners this is the one-sided value
  /// (<= 0 at the lower corner, >= 0 at an upper domain boundary).
  double residual = 0.0;
  bool corner = false;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Root of a first-order condition g that is positive for small effort and
/// eventually nonpositive.
///
/// Returns the corner 0 when g(0) <= 0 and the corner `domain_max` when g stays
/// positive up to a finite domain boundary. Otherwise the upper bracket starts
/// at 1 and doubles until g changes sign, then 200 bisection steps follow.
inline EquilibriumResult solve_decreasing_foc(const std::function<double(double)>& g,
                                              double domain_max = std::numeric_limits<double>::infinity(),
                                              double lower = 0.0) {
  EquilibriumResult result;
  const double g_lo = g(lower);
  if (std::isnan(g_lo)) throw NumericalError("first-order condition is NaN at the lower bracket");
  if (g_lo <= 0.0) {
    result.effort = lower;
    result.residual = g_lo;
    result.corner = true;
    result.bracket_lo = result.bracket_hi = lower;
    return result;
  }
  double lo = lower;
  double hi = std::isfinite(domain_max) ? domain_max : std::max(1.0, 2.0 * lower);
  double g_hi = g(hi);
  int doublings = 0;
  while (g_hi > 0.0) {
    if (std::isfinite(domain_max)) {
      result.effort = domain_max;
      result.residual = g_hi;
      result.corner = true;
      result.bracket_lo = result.bracket_hi = domain_max;
      return result;
    }
    if (++doublings > 80) throw NumericalError("no sign change found while expanding the bracket");
    lo = hi;
    hi *= 2.0;
    g_hi = g(hi);
  }
  if (std::isnan(g_hi)) throw NumericalError("first-order condition is NaN at the upper bracket");
  result.bracket_lo = lo;
  result.bracket_hi = hi;
  double g_at_lo = g(lo);
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = g(mid);
    if (std::isnan(g_mid)) throw NumericalError("first-order condition is NaN inside the bracket");
    if (g_mid > 0.0) {
      lo = mid;
      g_at_lo = g_mid;
    } else {
      hi = mid;
      g_hi = g_mid;
    }
  }
  if (std::abs(g_at_lo) <= std::abs(g_hi)) {
    result.effort = lo;
    result.residual = g_at_lo;
  } else {
    result.effort = hi;
    result.residual = g_hi;
  }
  return result;
}

}  // namespace tpm
