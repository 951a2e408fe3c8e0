#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>

#include "tpm/error.hpp"
#include "tpm/probability.hpp"

namespace tpm {

/// A strictly proper scoring rule, optionally scaled.
///
/// The quadratic rule is S(p, y) = 2 p(y) - |p|^2 and the logarithmic rule is
/// S(p, y) = ln p(y). Every score is multiplied by `scale`.
struct ScoringRule {
  enum class Kind { quadratic, logarithmic };

  Kind kind = Kind::quadratic;
  double scale = 1.0;

  static ScoringRule quadratic(double scale = 1.0) { return make(Kind::quadratic, scale); }
  static ScoringRule logarithmic(double scale = 1.0) { return make(Kind::logarithmic, scale); }

  static ScoringRule make(Kind kind, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("ScoringRule: scale must be positive and finite");
    return ScoringRule{kind, scale};
  }
};

inline std::string_view to_string(ScoringRule::Kind kind) {
  return kind == ScoringRule::Kind::quadratic ? "quadratic" : "log";
}

/// Score of belief `p` when outcome `y` realizes.
///
/// The logarithmic rule returns -infinity when p(y) = 0.
inline double score(const ScoringRule& rule, const Belief& p, std::size_t y) {
  if (y >= p.size()) throw InputError("score: outcome index out of range");
  switch (rule.kind) {
    case ScoringRule::Kind::quadratic:
      return rule.scale * (2.0 * p[y] - p.squared_norm());
    case ScoringRule::Kind::logarithmic:
      if (p[y] == 0.0) return -std::numeric_limits<double>::infinity();
      return rule.scale * std::log(p[y]);
  }
  return 0.0;
}

/// E_{Y~p}[S(p, Y)]. Zero-probability outcomes contribute nothing.
inline double expected_score(const ScoringRule& rule, const Belief& p) {
  if (rule.kind == ScoringRule::Kind::quadratic) return rule.scale * p.squared_norm();
  double total = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (p[y] > 0.0) total += p[y] * std::log(p[y]);
  }
  return rule.scale * total;
}

}  // namespace tpm
