#include <random>

#include <gtest/gtest.h>

#include "oracles/bayes_oracle.hpp"
#include "tpm/belief.hpp"
#include "tpm/info_model.hpp"

using namespace tpm;

TEST(OddsUpdate, Values) {
  for (double p : {0.0, 0.1, 0.5, 0.93, 1.0}) EXPECT_DOUBLE_EQ(odds_update(p, 0.5), p);
  const auto o = oracle::joint_posterior({0.98, 0.02}, oracle::binary_noisy_likelihood(0.2), {1});
  EXPECT_NEAR(odds_update(0.02, 0.8), static_cast<double>(o[1]), 1e-15);
  for (double b : {0.01, 0.3, 0.99}) {
    EXPECT_EQ(odds_update(0.0, b), 0.0);
    EXPECT_EQ(odds_update(1.0, b), 1.0);
  }
  EXPECT_THROW(odds_update(0.5, 0.0), InputError);
  EXPECT_THROW(odds_update(0.5, 1.0), InputError);
}

TEST(TruthfulReport, Values) {
  EXPECT_NEAR(truthful_report(InformationModel::binary_noisy(0.02, 0.2, 1), 1)[0], 0.8, 1e-15);
  EXPECT_NEAR(truthful_report(InformationModel::binary_noisy(0.02, 0.05, 1), 0)[0], 0.05, 1e-15);
  const InformationModel flat({0.4, 0.6}, {{0.3, 0.7}, {0.3, 0.7}}, 1);
  EXPECT_DOUBLE_EQ(truthful_report(flat, 0)[0], 0.5);
  EXPECT_TRUE(truthful_report(flat, 1).is_silent());
}

TEST(TruthfulReport, NoiselessIsClampedAndFlagged) {
  const auto r = truthful_report(InformationModel::binary_noisy(0.5, 0.0, 1), 1);
  EXPECT_TRUE(r.clamped());
  EXPECT_DOUBLE_EQ(r[0], 1 - ReportVector::kClampEpsilon);
  EXPECT_FALSE(truthful_report(InformationModel::binary_noisy(0.5, 0.1, 1), 1).clamped());
}

TEST(BayesLikelihoodUpdate, Values) {
  const auto p = bayes_likelihood_update(Belief({0.98, 0.02}), std::vector<double>{0.2, 0.8});
  const auto o = oracle::joint_posterior({0.98, 0.02}, oracle::binary_noisy_likelihood(0.2), {1});
  EXPECT_NEAR(p[0], static_cast<double>(o[0]), 1e-15);
  EXPECT_NEAR(p[1], static_cast<double>(o[1]), 1e-15);
  const auto same = bayes_likelihood_update(Belief({0.2, 0.3, 0.5}), std::vector<double>{0.4, 0.4, 0.4});
  EXPECT_NEAR(same[2], 0.5, 1e-15);
  const auto point = bayes_likelihood_update(Belief::point_mass(3, 1), std::vector<double>{0.9, 0.1, 0.5});
  EXPECT_EQ(point, Belief::point_mass(3, 1));
  EXPECT_THROW(bayes_likelihood_update(Belief::point_mass(2, 0), std::vector<double>{0.0, 1.0}), InconsistencyError);
}

TEST(ReportVector, Validation) {
  EXPECT_THROW(ReportVector({0.0}), InputError);
  EXPECT_THROW(ReportVector({1.0}), InputError);
  EXPECT_THROW(ReportVector({}), InputError);
  EXPECT_TRUE(ReportVector::silent(4).is_silent());
  EXPECT_EQ(ReportVector::silent(4).size(), 3u);
  EXPECT_THROW(apply_report(Belief({0.5, 0.5}), ReportVector({0.5, 0.5})), InputError);
}

TEST(ApplyReport, BinaryFormsAgree) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 500; ++i) {
    const double alpha = u(rng), beta = 0.5 * u(rng), p1 = u(rng);
    const auto model = InformationModel::binary_noisy(alpha, beta, 1);
    const Belief p({1 - p1, p1});
    for (std::size_t x : {0u, 1u}) {
      const auto r = truthful_report(model, x);
      const auto literal = apply_report(p, r, UpdateForm::per_coordinate);
      const auto canonical = apply_report(p, r, UpdateForm::canonical);
      const auto bayes = bayes_likelihood_update(p, model.likelihood_column(x));
      EXPECT_NEAR(literal[1], bayes[1], 1e-12);
      EXPECT_NEAR(canonical[1], bayes[1], 1e-12);
    }
  }
}

TEST(ApplyReport, PerCoordinateOnlyForBinary) {
  EXPECT_THROW(apply_report(Belief({0.2, 0.3, 0.5}), ReportVector({0.4, 0.6}), UpdateForm::per_coordinate), InputError);
}

TEST(OddsUpdate, Commutes) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng), b1 = u(rng), b2 = u(rng);
    EXPECT_NEAR(odds_update(odds_update(p, b1), b2), odds_update(odds_update(p, b2), b1), 1e-12);
  }
}

TEST(TruthfulReport, RoundTripForAnyModel) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 2 + i % 3, m = 2 + i % 4;
    std::vector<double> prior(d);
    for (auto& x : prior) x = u(rng);
    double s = 0;
    for (double x : prior) s += x;
    for (auto& x : prior) x /= s;
    std::vector<std::vector<double>> rows(d, std::vector<double>(m));
    for (auto& row : rows) {
      double t = 0;
      for (auto& l : row) t += (l = u(rng));
      for (auto& l : row) l /= t;
    }
    const InformationModel model(prior, rows, 1);
    for (std::size_t x = 0; x < m; ++x) {
      const auto via_report = apply_report(model.prior(), truthful_report(model, x));
      const auto o = oracle::joint_posterior(prior, rows, {x});
      for (std::size_t y = 0; y < d; ++y) EXPECT_NEAR(via_report[y], static_cast<double>(o[y]), 1e-12);
    }
  }
}
