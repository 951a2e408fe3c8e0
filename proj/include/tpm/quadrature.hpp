#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tpm/error.hpp"
#include "tpm/time_value.hpp"

namespace tpm {

/// Adaptive Gauss-Kronrod integration of a smooth integrand on [a, b].
/// Throws NumericalError when the error estimate exceeds `abs_tol`.
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10) {
  if (a == b) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-13, &error, &l1);
  if (!std::isfinite(value) || error > abs_tol) {
    throw NumericalError("quadrature did not converge on [" + std::to_string(a) + ", " + std::to_string(b) +
                         "]: error estimate " + std::to_string(error));
  }
  return value;
}

/// Integral over t > 0 of f(t) h(t).
///
/// The range is cut at the table knots and at a horizon beyond which h has
/// less than 1e-13 of its mass; integrands are assumed bounded by a modest
/// polynomial in t so the dropped tail stays far below the tolerance.
template <typename F>
double integrate_weighted(F&& f, const TimeValue& h, double abs_tol = 1e-10) {
  const double horizon = h.horizon(1e-13);
  std::vector<double> cuts{0.0};
  if (h.kind() == TimeValue::Kind::exponential) {
    // The integrands decay exponentially; a geometric split keeps GK accurate.
    cuts = {0.0, horizon / 16, horizon / 4, horizon};
  } else {
    for (double t : h.knots()) {
      if (t > cuts.back()) cuts.push_back(t);
    }
    if (horizon > cuts.back()) cuts.push_back(horizon);
  }
  auto integrand = [&](double t) { return f(t) * h.density(t); };
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) total += integrate(integrand, cuts[j], cuts[j + 1], abs_tol);
  return total;
}

}  // namespace tpm
