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

#include "wsn/blue_estimator.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wsn/error.hpp"
#include "wsn/power_optimizer.hpp"

namespace wsn {
namespace {

using testing::Rng;

AdjacencyMatrix full_pattern(std::size_t m, std::size_t k) {
  return AdjacencyMatrix(AdjacencyMatrix::Storage::Ones(static_cast<Eigen::Index>(m),
                                                        static_cast<Eigen::Index>(k)));
}

SystemModel scalar_model(double var_theta, double var_n, double var_v, double gain = 1.0) {
  return SystemModel{CovarianceMatrix(Eigen::MatrixXd::Constant(1, 1, var_theta)),
                     CovarianceMatrix(Eigen::MatrixXd::Constant(1, 1, var_n)),
                     CovarianceMatrix(Eigen::MatrixXd::Constant(1, 1, var_v)),
                     Eigen::VectorXd::Constant(1, gain)};
}

SystemModel isotropic_model(std::size_t k, double var_n, double var_v) {
  const auto n = static_cast<Eigen::Index>(k);
  return SystemModel{CovarianceMatrix(Eigen::MatrixXd::Identity(n, n)),
                     CovarianceMatrix(var_n * Eigen::MatrixXd::Identity(n, n)),
                     CovarianceMatrix(var_v * Eigen::MatrixXd::Identity(n, n)),
                     Eigen::VectorXd::Ones(n)};
}

CovarianceSpec smooth_spec() {
  CovarianceSpec s;
  s.signal.beta2 = 2.0;
  return s;
}

SystemModel paper_model() {
  return SystemModel::build(generate_field(6, 6, Rect{-10, 10, -5, 5}, 7), CovarianceSpec{});
}

TEST(MixingMatrix, EnforcesPattern) {
  const SensorField f({{0, 0}, {1, 0}, {5, 0}}, 2);
  const AdjacencyMatrix a = nearest_neighbor_adjacency(f, 0);
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(2, 3);
  EXPECT_THROW(MixingMatrix(w, a), ContractError);
  const MixingMatrix masked = MixingMatrix::masked(w, a);
  EXPECT_EQ(masked.matrix()(0, 1), 0.0);
  EXPECT_EQ(masked.matrix()(1, 1), 1.0);
  Eigen::MatrixXd bad = masked.matrix();
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(MixingMatrix(bad, a), ContractError);
  EXPECT_THROW(MixingMatrix(Eigen::MatrixXd::Zero(3, 3), a), ContractError);
}

TEST(TransmitPower, ZeroMixingUsesNoPower) {
  const SystemModel model = paper_model();
  EXPECT_EQ(transmit_power(MixingMatrix::zeros(full_pattern(6, 6)), model.r_theta, model.r_n),
            0.0);
}

TEST(TransmitPower, IdentityMixingOnPaperModel) {
  // Each diagonal entry of R_theta + R_n is 1 + 0.1.
  const SystemModel model = paper_model();
  const MixingMatrix w(Eigen::MatrixXd::Identity(6, 6), full_pattern(6, 6));
  EXPECT_NEAR(transmit_power(w, model.r_theta, model.r_n), 6.6, 1e-12);
}

TEST(TransmitPower, QuadraticInScale) {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const auto inst = testing::random_instance(rng, 3, 5);
    const double p = transmit_power(inst.w, inst.model.r_theta, inst.model.r_n);
    EXPECT_GT(p, 0.0);
    EXPECT_NEAR(transmit_power(inst.w.scaled(-2.5), inst.model.r_theta, inst.model.r_n),
                6.25 * p, 1e-12 * p);
  }
}

TEST(TransmitPower, DimensionMismatch) {
  const SystemModel model = paper_model();
  const MixingMatrix w(Eigen::MatrixXd::Identity(3, 3), full_pattern(3, 3));
  EXPECT_THROW(transmit_power(w, model.r_theta, model.r_n), ContractError);
}

TEST(BlueCovariance, ScalarClosedForm) {
  // distortion = sigma_n^2 + sigma_v^2 / (g^2 w^2) with w^2 = 1/1.1.
  const SystemModel model = scalar_model(1.0, 0.1, 0.01);
  const MixingMatrix w(Eigen::MatrixXd::Constant(1, 1, std::sqrt(1.0 / 1.1)), full_pattern(1, 1));
  const EstimationReport r = blue_covariance(w, model);
  ASSERT_TRUE(r.rank_ok);
  EXPECT_NEAR(r.distortion, 0.111, 1e-14);
  EXPECT_NEAR(r.power, 1.0, 1e-14);
  EXPECT_NEAR(r.lower_bound, r.distortion, 1e-14);  // K = 1: the bound is tight
}

TEST(BlueCovariance, IsotropicCaseMeetsLowerBound) {
  for (std::size_t k : {1u, 3u, 6u}) {
    const SystemModel model = isotropic_model(k, 0.1, 0.01);
    const auto n = static_cast<Eigen::Index>(k);
    const MixingMatrix w(Eigen::MatrixXd::Identity(n, n), full_pattern(k, k));
    const EstimationReport r = blue_covariance(w, model);
    ASSERT_TRUE(r.rank_ok);
    EXPECT_NEAR(r.distortion, static_cast<double>(k) * 0.11, 1e-13);
    EXPECT_NEAR(r.lower_bound, r.distortion, 1e-13);
    EXPECT_NEAR(r.surrogate, static_cast<double>(k) / 0.11, 1e-10);
    ASSERT_EQ(r.component_variances.size(), n);
    EXPECT_NEAR(r.component_variances(0), 0.11, 1e-14);
  }
}

TEST(BlueCovariance, NoCollaborationWithFewerLinksIsRankDeficient) {
  const SensorField f = generate_field(5, 3, Rect{-10, 10, -5, 5}, 7);
  const SystemModel model = SystemModel::build(f, smooth_spec());
  const AdjacencyMatrix a = nearest_neighbor_adjacency(f, 0);
  const MixingMatrix w = MixingMatrix::masked(Eigen::MatrixXd::Ones(3, 5), a);
  const EstimationReport r = blue_covariance(w, model);
  EXPECT_FALSE(r.rank_ok);
  EXPECT_TRUE(std::isinf(r.distortion));
  EXPECT_GT(r.surrogate, 0.0);
  EXPECT_EQ(r.component_variances.size(), 0);
}

TEST(BlueCovariance, MatchesOracle) {
  Rng rng(17);
  for (int t = 0; t < 30; ++t) {
    const std::size_t k = 1 + t % 6;
    const auto inst = testing::random_instance(rng, k, k, 0.7);
    const EstimationReport r = blue_covariance(inst.w, inst.model);
    const double oracle = testing::oracle_distortion(inst.w.matrix(), inst.model.gains,
                                                     inst.model.r_n.matrix(),
                                                     inst.model.r_v.matrix());
    ASSERT_TRUE(r.rank_ok);
    EXPECT_NEAR(r.distortion, oracle, 1e-9 * oracle);
  }
}

TEST(BlueCovariance, RejectsNonFiniteGains) {
  SystemModel model = scalar_model(1.0, 0.1, 0.01);
  model.gains(0) = std::numeric_limits<double>::quiet_NaN();
  const MixingMatrix w(Eigen::MatrixXd::Ones(1, 1), full_pattern(1, 1));
  EXPECT_THROW(blue_covariance(w, model), ContractError);
}

TEST(FisherViaWoodbury, ZeroMixingCarriesNoInformation) {
  const SystemModel model = paper_model();
  const Eigen::MatrixXd f = fisher_via_woodbury(MixingMatrix::zeros(full_pattern(6, 6)), model);
  EXPECT_LT(f.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(fisher_direct(MixingMatrix::zeros(full_pattern(6, 6)), model).norm(), 0.0);
}

TEST(FisherViaWoodbury, ScalarClosedForm) {
  const double g = 1.7, w = -0.8, var_n = 0.3, var_v = 0.05;
  const SystemModel model = scalar_model(1.0, var_n, var_v, g);
  const MixingMatrix wm(Eigen::MatrixXd::Constant(1, 1, w), full_pattern(1, 1));
  const double expected = g * g * w * w / (g * g * w * w * var_n + var_v);
  EXPECT_NEAR(fisher_via_woodbury(wm, model)(0, 0), expected, 1e-13);
  EXPECT_NEAR(fisher_direct(wm, model)(0, 0), expected, 1e-13);
}

TEST(FisherViaWoodbury, AgreesWithDirectRoute) {
  Rng rng(23);
  for (int t = 0; t < 40; ++t) {
    const std::size_t k = 1 + t % 8;
    const std::size_t m = 1 + (t * 7) % k;
    const auto inst = testing::random_instance(rng, m, k);
    const Eigen::MatrixXd direct = fisher_direct(inst.w, inst.model);
    const Eigen::MatrixXd woodbury = fisher_via_woodbury(inst.w, inst.model);
    EXPECT_LT(testing::relative_frobenius(woodbury, direct), 1e-9);
    const Eigen::MatrixXd oracle = testing::oracle_fisher(
        inst.w.matrix(), inst.model.gains, inst.model.r_n.matrix(), inst.model.r_v.matrix());
    EXPECT_LT(testing::relative_frobenius(direct, oracle), 1e-9);
  }
}

TEST(FisherViaWoodbury, NeedsInvertibleObservationNoise) {
  SystemModel model = isotropic_model(2, 0.1, 0.01);
  model.r_n = CovarianceMatrix(Eigen::MatrixXd::Constant(2, 2, 0.1));  // rank one
  const MixingMatrix w(Eigen::MatrixXd::Identity(2, 2), full_pattern(2, 2));
  EXPECT_THROW(fisher_via_woodbury(w, model), ModelError);
  EXPECT_NO_THROW(fisher_direct(w, model));
  EXPECT_TRUE(blue_covariance(w, model).rank_ok);
}

TEST(SurrogateObjective, ClosedFormsAndBoundProduct) {
  const SystemModel model = isotropic_model(4, 0.1, 0.01);
  const MixingMatrix w(Eigen::MatrixXd::Identity(4, 4), full_pattern(4, 4));
  EXPECT_NEAR(surrogate_objective(w, model), 4.0 / 0.11, 1e-10);
  EXPECT_EQ(surrogate_objective(MixingMatrix::zeros(full_pattern(4, 4)), model), 0.0);

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto inst = testing::random_instance(rng, 3, 4);
    const EstimationReport r = blue_covariance(inst.w, inst.model);
    EXPECT_NEAR(r.lower_bound * r.surrogate, 16.0, 1e-12);
  }
}

TEST(BlueProperties, TraceLowerBoundHolds) {
  Rng rng(31);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 1 + t % 8;
    const auto inst = testing::random_instance(rng, k, k, 0.4);
    const EstimationReport r = blue_covariance(inst.w, inst.model);
    if (!r.rank_ok) continue;
    ++checked;
    EXPECT_LE(r.lower_bound, r.distortion * (1.0 + 1e-12));
  }
  EXPECT_GT(checked, 150);
}

TEST(BlueProperties, ScalingMonotonicity) {
  Rng rng(37);
  for (int t = 0; t < 30; ++t) {
    const auto inst = testing::random_instance(rng, 4, 4, 0.6);
    const EstimationReport base = blue_covariance(inst.w, inst.model);
    const EstimationReport louder = blue_covariance(inst.w.scaled(1.5), inst.model);
    EXPECT_GT(louder.surrogate, base.surrogate);
    if (base.rank_ok) EXPECT_LT(louder.distortion, base.distortion);
  }
}

TEST(BlueProperties, SchurBlockFormConsistency) {
  // Gamma = R_n^-1 (W^T G^T R_v^-1 G W + R_n^-1)^-1 R_n^-1 + eps I makes the
  // 2K x 2K block matrix PSD, and Tr(Gamma) is the Woodbury-form objective.
  Rng rng(41);
  const double eps = 1e-8;
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 1 + t % 6;
    const std::size_t m = 1 + t % k;
    const auto inst = testing::random_instance(rng, m, k);
    const Eigen::MatrixXd rn_inv = inst.model.r_n.matrix().inverse();
    const Eigen::MatrixXd g = inst.model.gains.asDiagonal();
    const Eigen::MatrixXd gw = g * inst.w.matrix();
    const Eigen::MatrixXd lower =
        gw.transpose() * inst.model.r_v.matrix().inverse() * gw + rn_inv;
    const auto n = static_cast<Eigen::Index>(k);
    const Eigen::MatrixXd gamma =
        rn_inv * lower.inverse() * rn_inv + eps * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd block(2 * n, 2 * n);
    block << gamma, rn_inv, rn_inv, lower;
    block = 0.5 * (block + block.transpose()).eval();
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(block).eigenvalues();
    EXPECT_GE(ev.minCoeff(), -1e-8 * ev.maxCoeff());
    const double objective = objective_13(inst.w, inst.model);
    EXPECT_NEAR(gamma.trace(), objective + eps * static_cast<double>(k),
                1e-6 * std::max(1.0, objective));
  }
}

TEST(BlueEstimate, NoiselessLimitReturnsReceivedSignal) {
  const double eps = 1e-12;
  const SystemModel model = isotropic_model(3, eps, eps);
  const MixingMatrix w(Eigen::MatrixXd::Identity(3, 3), full_pattern(3, 3));
  const Eigen::Vector3d r(0.3, -1.2, 2.0);
  EXPECT_LT((blue_estimate(w, model, r) - r).norm(), 1e-9);
}

TEST(BlueEstimate, Linear) {
  Rng rng(43);
  const auto inst = testing::random_instance(rng, 4, 4, 0.7);
  const Eigen::VectorXd r1 = testing::random_normal(rng, 4, 1);
  const Eigen::VectorXd r2 = testing::random_normal(rng, 4, 1);
  const Eigen::VectorXd lhs = blue_estimate(inst.w, inst.model, r1 + 3.0 * r2);
  const Eigen::VectorXd rhs =
      blue_estimate(inst.w, inst.model, r1) + 3.0 * blue_estimate(inst.w, inst.model, r2);
  EXPECT_LT((lhs - rhs).norm(), 1e-10 * (1.0 + rhs.norm()));
}

TEST(BlueEstimate, UndefinedForRankDeficientMixing) {
  const SensorField f = generate_field(4, 2, Rect{-10, 10, -5, 5}, 7);
  const SystemModel model = SystemModel::build(f, smooth_spec());
  const MixingMatrix w = MixingMatrix::masked(Eigen::MatrixXd::Ones(2, 4),
                                              nearest_neighbor_adjacency(f, 0));
  EXPECT_THROW(blue_estimate(w, model, Eigen::Vector2d(1.0, 2.0)), EstimationError);
  const MixingMatrix ok(Eigen::MatrixXd::Identity(2, 2), full_pattern(2, 2));
  EXPECT_THROW(blue_estimate(ok, SystemModel::build(SensorField({{0, 0}, {1, 1}}, 2), {}),
                             Eigen::Vector3d::Ones()),
               ContractError);
}

}  // namespace
}  // namespace wsn
