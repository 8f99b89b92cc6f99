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

#ifndef WSN_MONTE_CARLO_HPP
#define WSN_MONTE_CARLO_HPP

#include <cstddef>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "wsn/blue_estimator.hpp"
#include "wsn/network_model.hpp"

namespace wsn {

using Rng = std::mt19937_64;

/// Draws zero-mean vectors with a given PSD covariance through a symmetric
/// square-root factor L (L L^T = cov), so singular covariances are fine.
class GaussianSampler {
 public:
  explicit GaussianSampler(const CovarianceMatrix& cov);

  Eigen::VectorXd sample(Rng& rng) const;
  /// L u with u uniform on (-sqrt 3, sqrt 3): same covariance, non-Gaussian marginals.
  Eigen::VectorXd sample_uniform(Rng& rng) const;
  const Eigen::MatrixXd& factor() const { return factor_; }

 private:
  Eigen::MatrixXd factor_;
};

Eigen::VectorXd sample_gaussian(const CovarianceMatrix& cov, Rng& rng);

/// Distribution of the signal vector theta in run_trials. Noise is always Gaussian.
enum class SourceDistribution { kGaussian, kUniform };

struct TrialBatch {
  std::size_t num_trials = 0;
  std::uint64_t rng_seed = 0;
  double empirical_mse_total = 0.0;
  double mse_stderr = 0.0;
  Eigen::VectorXd empirical_bias;
  Eigen::VectorXd bias_stderr;
  double empirical_power = 0.0;
  double power_stderr = 0.0;
  /// Mean of (theta_hat - theta)(theta_hat - theta)^T.
  Eigen::MatrixXd empirical_error_covariance;
  Eigen::MatrixXd error_covariance_stderr;
};

/// Runs the full observation -> mixing -> channel -> BLUE pipeline
/// `num_trials` times with a single seeded stream.
TrialBatch run_trials(const MixingMatrix& w, const SystemModel& model, std::size_t num_trials,
                      std::uint64_t seed,
                      SourceDistribution source = SourceDistribution::kGaussian);

/// Same pipeline with an arbitrary K x M linear estimator in place of the BLUE.
TrialBatch run_trials_with_estimator(const MixingMatrix& w, const SystemModel& model,
                                     const Eigen::MatrixXd& estimator, std::size_t num_trials,
                                     std::uint64_t seed,
                                     SourceDistribution source = SourceDistribution::kGaussian);

}  // namespace wsn

#endif  // WSN_MONTE_CARLO_HPP
