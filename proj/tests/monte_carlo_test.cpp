// Copyright 2026 The wsncollab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wsn/monte_carlo.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wsn/error.hpp"
#include "wsn/power_optimizer.hpp"

namespace wsn {
namespace {

constexpr double kSigmas = 5.0;

AdjacencyMatrix full_pattern(std::size_t n) {
  return AdjacencyMatrix(AdjacencyMatrix::Storage::Ones(static_cast<Eigen::Index>(n),
                                                        static_cast<Eigen::Index>(n)));
}

TEST(SampleGaussian, ZeroCovarianceGivesZero) {
  Rng rng(1);
  const CovarianceMatrix zero(Eigen::MatrixXd::Zero(3, 3));
  EXPECT_EQ(sample_gaussian(zero, rng), Eigen::VectorXd::Zero(3));
}

TEST(SampleGaussian, IdentityCovariance) {
  Rng rng(2);
  const GaussianSampler sampler(CovarianceMatrix(Eigen::MatrixXd::Identity(2, 2)));
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd z = sampler.sample(rng);
    acc += z * z.transpose();
  }
  acc /= n;
  EXPECT_NEAR(acc(0, 0), 1.0, 0.05);
  EXPECT_NEAR(acc(1, 1), 1.0, 0.05);
  EXPECT_NEAR(acc(0, 1), 0.0, 0.05);
}

TEST(SampleGaussian, EquicorrelatedOffDiagonal) {
  Rng rng(3);
  const GaussianSampler sampler(equicorrelated_covariance(6, 0.1, 0.1));
  const int n = 100000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(6, 6), sq = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd z = sampler.sample(rng);
    const Eigen::MatrixXd o = z * z.transpose();
    sum += o;
    sq += o.cwiseAbs2();
  }
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double mean = sum(i, j) / n;
      const double se = std::sqrt((sq(i, j) / n - mean * mean) / n);
      EXPECT_NEAR(mean, i == j ? 0.1 : 0.01, kSigmas * se) << i << "," << j;
    }
  }
}

TEST(SampleGaussian, SingularCovarianceSupported) {
  Rng rng(4);
  const CovarianceMatrix rank_one(Eigen::MatrixXd::Constant(2, 2, 2.0));
  const Eigen::VectorXd z = sample_gaussian(rank_one, rng);
  EXPECT_NEAR(z(0), z(1), 1e-12);
}

TEST(SampleGaussian, IndefiniteCovarianceRejected) {
  Eigen::Matrix2d m;
  m << 1.0, 3.0, 3.0, 1.0;
  EXPECT_THROW(CovarianceMatrix{m}, ModelError);
}

class TrialsOnPaperField : public ::testing::Test {
 protected:
  SensorField field_ = generate_field(6, 6, Rect{-10, 10, -5, 5}, 7);
  SystemModel model_ = SystemModel::build(field_, CovarianceSpec{});
  MixingMatrix w_ = [this] {
    testing::Rng rng(8);
    return project_to_power(
        MixingMatrix::masked(testing::random_normal(rng, 6, 6),
                             nearest_neighbor_adjacency(field_, 2)),
        model_.r_theta, model_.r_n, 0.5);
  }();
};

TEST_F(TrialsOnPaperField, MatchesAnalyticDistortionAndPower) {
  const EstimationReport report = blue_covariance(w_, model_);
  ASSERT_TRUE(report.rank_ok);
  const TrialBatch b = run_trials(w_, model_, 100000, 2024);
  EXPECT_NEAR(b.empirical_mse_total, report.distortion, kSigmas * b.mse_stderr);
  EXPECT_NEAR(b.empirical_power, report.power, kSigmas * b.power_stderr);
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_NEAR(b.empirical_bias(i), 0.0, kSigmas * b.bias_stderr(i));
  }
}

TEST_F(TrialsOnPaperField, ErrorCovarianceMatchesEntrywise) {
  const Eigen::MatrixXd f_inv = invert_fisher(fisher_direct(w_, model_)).value();
  const TrialBatch b = run_trials(w_, model_, 100000, 99);
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) {
      EXPECT_NEAR(b.empirical_error_covariance(i, j), f_inv(i, j),
                  kSigmas * b.error_covariance_stderr(i, j));
    }
  }
}

TEST_F(TrialsOnPaperField, NonGaussianSourceGivesSameError) {
  const EstimationReport report = blue_covariance(w_, model_);
  const TrialBatch b = run_trials(w_, model_, 100000, 5, SourceDistribution::kUniform);
  EXPECT_NEAR(b.empirical_mse_total, report.distortion, kSigmas * b.mse_stderr);
  EXPECT_NEAR(b.empirical_power, report.power, kSigmas * b.power_stderr);
}

TEST_F(TrialsOnPaperField, BitReproducible) {
  const TrialBatch a = run_trials(w_, model_, 2000, 42);
  const TrialBatch b = run_trials(w_, model_, 2000, 42);
  EXPECT_EQ(a.empirical_mse_total, b.empirical_mse_total);
  EXPECT_EQ(a.empirical_power, b.empirical_power);
  EXPECT_EQ(a.empirical_bias, b.empirical_bias);
  EXPECT_EQ(a.empirical_error_covariance, b.empirical_error_covariance);
  const TrialBatch c = run_trials(w_, model_, 2000, 43);
  EXPECT_NE(a.empirical_mse_total, c.empirical_mse_total);
}

TEST_F(TrialsOnPaperField, OtherLinearEstimatorsDoNotBeatBlue) {
  // A slightly perturbed BLUE map is biased and, being linear in the same
  // observations, cannot reduce the mean squared error.
  const Eigen::MatrixXd blue = blue_estimator_matrix(w_, model_);
  const TrialBatch best = run_trials(w_, model_, 50000, 11);
  testing::Rng rng(12);
  for (int t = 0; t < 3; ++t) {
    const Eigen::MatrixXd other = blue + 0.05 * blue.norm() / 6.0 *
                                             testing::random_normal(rng, 6, 6);
    const TrialBatch alt = run_trials_with_estimator(w_, model_, other, 50000, 11);
    EXPECT_GE(alt.empirical_mse_total,
              best.empirical_mse_total - kSigmas * best.mse_stderr);
  }
  // With M = K the observation map G W is square, so its inverse is the only
  // unbiased linear estimator; it must coincide with the BLUE.
  const Eigen::MatrixXd naive = (model_.gains.asDiagonal() * w_.matrix()).inverse();
  EXPECT_LT((naive - blue).norm(), 1e-8 * blue.norm());
}

TEST(RunTrials, NoiselessLimit) {
  const double eps = 1e-14;
  const SystemModel model{CovarianceMatrix(Eigen::MatrixXd::Identity(3, 3)),
                          CovarianceMatrix(Eigen::MatrixXd::Zero(3, 3)),
                          CovarianceMatrix(eps * Eigen::MatrixXd::Identity(3, 3)),
                          Eigen::VectorXd::Ones(3)};
  const MixingMatrix w(Eigen::MatrixXd::Identity(3, 3), full_pattern(3));
  const TrialBatch b = run_trials(w, model, 1000, 1);
  EXPECT_LT(b.empirical_mse_total, 1e-12);
}

TEST(RunTrials, RankDeficientMixingRejected) {
  const SensorField field({{0, 0}, {1, 0}, {3, 0}}, 2);
  CovarianceSpec spec;
  spec.signal.beta2 = 2.0;
  const SystemModel model = SystemModel::build(field, spec);
  const MixingMatrix w = MixingMatrix::masked(Eigen::MatrixXd::Ones(2, 3),
                                              nearest_neighbor_adjacency(field, 0));
  EXPECT_THROW(run_trials(w, model, 10, 1), EstimationError);
  EXPECT_THROW(run_trials(w, model, 0, 1), ConfigError);
}

}  // namespace
}  // namespace wsn
