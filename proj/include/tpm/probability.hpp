#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tpm/error.hpp"

namespace tpm {

namespace detail {

inline void check_probability_vector(std::span<const double> p, double sum_tol, const char* what) {
  if (p.empty()) throw InputError(std::string(what) + ": empty probability vector");
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw InputError(std::string(what) + ": entry " + std::to_string(x) + " outside [0, 1]");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > sum_tol) {
    throw InputError(std::string(what) + ": entries sum to " + std::to_string(sum));
  }
}

}  // namespace detail

/// A probability vector over the d outcomes; the market state.
///
/// Construction checks that the entries lie in [0, 1] and sum to one within
/// 1e-10, then renormalizes so later products start from an exact simplex point.
class Belief {
 public:
  static constexpr double kSumTolerance = 1e-10;

  explicit Belief(std::vector<double> probs) : probs_(std::move(probs)) {
    detail::check_probability_vector(probs_, kSumTolerance, "Belief");
    renormalize();
  }

  /// Normalizes nonnegative weights. Throws InconsistencyError when they are all zero.
  static Belief from_weights(std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("Belief: weights must be finite and nonnegative");
      total += w;
    }
    if (!(total > 0.0)) throw InconsistencyError("Belief: evidence has zero probability under every outcome");
    for (double& w : weights) w /= total;
    return Belief(std::move(weights));
  }

  static Belief point_mass(std::size_t d, std::size_t y) {
    if (y >= d) throw InputError("Belief: point mass index out of range");
    std::vector<double> p(d, 0.0);
    p[y] = 1.0;
    return Belief(std::move(p));
  }

  static Belief uniform(std::size_t d) { return Belief(std::vector<double>(d, 1.0 / static_cast<double>(d))); }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t y) const { return probs_[y]; }
  std::span<const double> probs() const { return probs_; }
  const std::vector<double>& vector() const { return probs_; }

  double squared_norm() const {
    return std::inner_product(probs_.begin(), probs_.end(), probs_.begin(), 0.0);
  }

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  void renormalize() {
    const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    if (total != 1.0) {
      for (double& x : probs_) x /= total;
    }
  }

  std::vector<double> probs_;
};

}  // namespace tpm
