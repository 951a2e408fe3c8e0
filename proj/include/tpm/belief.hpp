#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tpm/error.hpp"
#include "tpm/info_model.hpp"
#include "tpm/probability.hpp"

namespace tpm {

/// An agent's report: d - 1 normalized likelihood ratios.
///
/// Entry j refers to outcome j + 1; outcome 0 is the reference. The entry is
/// b = L / (1 + L) with L = P(x | Y = j + 1) / P(x | Y = 0), so b / (1 - b) is the
/// factor applied to the odds of outcome j + 1. For two outcomes this is the odds
/// form P(x | Y = 1) / P(x | Y != 1). A report of all 1/2 carries no information.
class ReportVector {
 public:
  /// Degenerate ratios (0 or infinity) are clamped to [eps, 1 - eps].
  static constexpr double kClampEpsilon = 1e-12;

  explicit ReportVector(std::vector<double> entries, bool clamped = false)
      : entries_(std::move(entries)), clamped_(clamped) {
    if (entries_.empty()) throw InputError("ReportVector: need at least one entry (d >= 2)");
    for (double b : entries_) {
      if (!(b > 0.0 && b < 1.0)) {
        throw InputError("ReportVector: entry " + std::to_string(b) + " outside the open interval (0, 1)");
      }
    }
  }

  static ReportVector silent(std::size_t num_outcomes) {
    if (num_outcomes < 2) throw InputError("ReportVector: need d >= 2");
    return ReportVector(std::vector<double>(num_outcomes - 1, 0.5));
  }

  std::size_t num_outcomes() const { return entries_.size() + 1; }
  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t j) const { return entries_[j]; }
  std::span<const double> entries() const { return entries_; }
  bool clamped() const { return clamped_; }

  bool is_silent() const {
    for (double b : entries_) {
      if (b != 0.5) return false;
    }
    return true;
  }

  /// Likelihood column implied by the report, scaled so the reference outcome has weight 1.
  std::vector<double> likelihood_ratios() const {
    std::vector<double> ratios(num_outcomes(), 1.0);
    for (std::size_t j = 0; j < entries_.size(); ++j) ratios[j + 1] = entries_[j] / (1.0 - entries_[j]);
    return ratios;
  }

  /// Copy with entry j shifted by delta, kept inside [eps, 1 - eps].
  ReportVector perturbed(std::size_t j, double delta) const {
    if (j >= entries_.size()) throw InputError("ReportVector: perturbed entry out of range");
    std::vector<double> e(entries_);
    e[j] = std::clamp(e[j] + delta, kClampEpsilon, 1.0 - kClampEpsilon);
    return ReportVector(std::move(e), clamped_);
  }

  friend bool operator==(const ReportVector& a, const ReportVector& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<double> entries_;
  bool clamped_ = false;
};

/// Odds-form update of one coordinate: multiplies p / (1 - p) by b / (1 - b).
inline double odds_update(double p, double b) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("odds_update: p outside [0, 1]");
  if (!(b > 0.0 && b < 1.0)) throw InputError("odds_update: b outside (0, 1)");
  return p * b / ((1.0 - p) * (1.0 - b) + p * b);
}

/// p'(y) proportional to p(y) * likelihood(y).
inline Belief bayes_likelihood_update(const Belief& p, std::span<const double> likelihood) {
  if (likelihood.size() != p.size()) throw InputError("bayes_likelihood_update: dimension mismatch");
  std::vector<double> w(p.size());
  for (std::size_t y = 0; y < w.size(); ++y) {
    if (!(likelihood[y] >= 0.0) || !std::isfinite(likelihood[y])) {
      throw InputError("bayes_likelihood_update: likelihood entries must be finite and nonnegative");
    }
    w[y] = p[y] * likelihood[y];
  }
  return Belief::from_weights(std::move(w));
}

/// How a report moves the market belief.
///
/// `canonical` multiplies the belief by the report's likelihood column and is
/// exact for any number of outcomes. `per_coordinate` applies the odds update to
/// outcome 1 and sets outcome 0 to the remainder; it is only defined for d = 2,
/// where the two agree.
enum class UpdateForm { canonical, per_coordinate };

inline Belief apply_report(const Belief& p, const ReportVector& report, UpdateForm form = UpdateForm::canonical) {
  if (report.num_outcomes() != p.size()) throw InputError("apply_report: report dimension mismatch");
  if (form == UpdateForm::per_coordinate) {
    if (p.size() != 2) throw InputError("apply_report: per-coordinate update is only exact for two outcomes");
    const double p1 = odds_update(p[1], report[0]);
    return Belief({1.0 - p1, p1});
  }
  const auto ratios = report.likelihood_ratios();
  return bayes_likelihood_update(p, ratios);
}

/// The report that turns any market belief P(Y | E) into P(Y | E, x).
///
/// Infinite or zero ratios (noiseless signals) are clamped and flagged.
inline ReportVector truthful_report(const InformationModel& model, std::size_t signal) {
  model.check_signal(signal);
  const double reference = model.likelihood(0, signal);
  constexpr double eps = ReportVector::kClampEpsilon;
  bool clamped = false;
  std::vector<double> entries(model.num_outcomes() - 1);
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const double l = model.likelihood(j + 1, signal);
    double b = (l + reference > 0.0) ? l / (l + reference) : 0.5;
    if (l + reference == 0.0) clamped = true;
    if (b < eps) {
      b = eps;
      clamped = true;
    } else if (b > 1.0 - eps) {
      b = 1.0 - eps;
      clamped = true;
    }
    entries[j] = b;
  }
  return ReportVector(std::move(entries), clamped);
}

}  // namespace tpm
