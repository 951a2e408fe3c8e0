#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tpm/error.hpp"

namespace tpm {

/// Time value density h(t): how much belief quality at time t is worth.
///
/// `exponential` is h(t) = eta e^{-eta t}. `table` interpolates positive values
/// linearly between knots starting at t = 0 and continues past the last knot
/// with an exponential tail of rate `tail_rate`, so h > 0 and integrable.
class TimeValue {
 public:
  enum class Kind { exponential, table };

  static TimeValue exponential(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InputError("TimeValue: eta must be positive and finite");
    TimeValue h;
    h.kind_ = Kind::exponential;
    h.eta_ = eta;
    return h;
  }

  static TimeValue table(std::vector<double> times, std::vector<double> values, double tail_rate) {
    if (times.empty() || times.size() != values.size()) throw InputError("TimeValue: knots and values must pair up");
    if (times.front() != 0.0) throw InputError("TimeValue: the first knot must be t = 0");
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (!(values[j] > 0.0) || !std::isfinite(values[j])) throw InputError("TimeValue: h must be positive");
      if (j > 0 && !(times[j] > times[j - 1])) throw InputError("TimeValue: knots must increase strictly");
    }
    if (!std::isfinite(times.back())) throw InputError("TimeValue: knots must be finite");
    if (!(tail_rate > 0.0) || !std::isfinite(tail_rate)) throw InputError("TimeValue: tail rate must be positive");
    TimeValue h;
    h.kind_ = Kind::table;
    h.times_ = std::move(times);
    h.values_ = std::move(values);
    h.eta_ = tail_rate;
    return h;
  }

  Kind kind() const { return kind_; }
  /// Decay rate (exponential kind) or tail rate (table kind).
  double eta() const { return eta_; }
  std::span<const double> knots() const { return times_; }
  std::span<const double> knot_values() const { return values_; }

  double density(double t) const {
    if (t < 0.0) return 0.0;
    if (kind_ == Kind::exponential) return eta_ * std::exp(-eta_ * t);
    const double last = times_.back();
    if (t >= last) return values_.back() * std::exp(-eta_ * (t - last));
    std::size_t j = 0;
    while (times_[j + 1] <= t) ++j;
    const double w = (t - times_[j]) / (times_[j + 1] - times_[j]);
    return values_[j] + w * (values_[j + 1] - values_[j]);
  }

  /// Integral of h over [a, b]; b may be +infinity.
  double mass(double a, double b) const {
    if (!(a >= 0.0) || std::isnan(b)) throw InputError("TimeValue::mass: need 0 <= a");
    if (b < a) throw InputError("TimeValue::mass: need a <= b");
    if (a == b) return 0.0;
    if (kind_ == Kind::exponential) {
      const double upper = std::isinf(b) ? 0.0 : std::exp(-eta_ * b);
      return std::exp(-eta_ * a) - upper;
    }
    return table_cumulative(b) - table_cumulative(a);
  }

  double total_mass() const { return mass(0.0, std::numeric_limits<double>::infinity()); }

  /// A time T with mass(T, inf) <= tail.
  double horizon(double tail) const {
    if (kind_ == Kind::exponential) return std::max(0.0, -std::log(tail) / eta_);
    const double last = times_.back();
    return last + std::max(0.0, std::log(values_.back() / (eta_ * tail)) / eta_);
  }

 private:
  TimeValue() = default;

  // Integral of the table density over [0, t].
  double table_cumulative(double t) const {
    const double last = times_.back();
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < times_.size() && times_[j] < t; ++j) {
      const double hi = std::min(t, times_[j + 1]);
      const double lo = times_[j];
      const double slope = (values_[j + 1] - values_[j]) / (times_[j + 1] - times_[j]);
      const double h_hi = values_[j] + slope * (hi - lo);
      total += 0.5 * (values_[j] + h_hi) * (hi - lo);
    }
    if (t > last) {
      const double tail = std::isinf(t) ? 1.0 : -std::expm1(-eta_ * (t - last));
      total += values_.back() / eta_ * tail;
    }
    return total;
  }

  Kind kind_ = Kind::exponential;
  double eta_ = 1.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

inline double time_value_mass(const TimeValue& h, double a, double b) { return h.mass(a, b); }

}  // namespace tpm
