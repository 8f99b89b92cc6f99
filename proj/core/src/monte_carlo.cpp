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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wsn/error.hpp"

namespace wsn {

GaussianSampler::GaussianSampler(const CovarianceMatrix& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.matrix());
  if (es.info() != Eigen::Success) throw ModelError("eigendecomposition of covariance failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double floor = CovarianceMatrix::kRelativeEigenFloor * std::max(ev.maxCoeff(), 0.0);
  if (ev.minCoeff() < floor) {
    std::ostringstream os;
    os << "cannot sample from an indefinite covariance (minimum eigenvalue " << ev.minCoeff()
       << ")";
    throw ModelError(os.str());
  }
  factor_ = es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Eigen::VectorXd GaussianSampler::sample(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(factor_.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return factor_ * z;
}

Eigen::VectorXd GaussianSampler::sample_uniform(Rng& rng) const {
  const double half_width = std::sqrt(3.0);
  std::uniform_real_distribution<double> uniform(-half_width, half_width);
  Eigen::VectorXd u(factor_.cols());
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = uniform(rng);
  return factor_ * u;
}

Eigen::VectorXd sample_gaussian(const CovarianceMatrix& cov, Rng& rng) {
  return GaussianSampler(cov).sample(rng);
}

TrialBatch run_trials_with_estimator(const MixingMatrix& w, const SystemModel& model,
                                     const Eigen::MatrixXd& estimator, std::size_t num_trials,
                                     std::uint64_t seed, SourceDistribution source) {
  if (num_trials < 1) throw ConfigError("num_trials must be at least 1");
  const auto k = static_cast<Eigen::Index>(w.cols());
  const auto m = static_cast<Eigen::Index>(w.rows());
  if (estimator.rows() != k || estimator.cols() != m) {
    throw ContractError("estimator must be K x M");
  }
  if (static_cast<std::size_t>(k) != model.num_sensors() ||
      static_cast<std::size_t>(m) != model.num_connected()) {
    throw ContractError("mixing matrix and system model dimensions disagree");
  }
  const GaussianSampler theta_sampler(model.r_theta);
  const GaussianSampler n_sampler(model.r_n);
  const GaussianSampler v_sampler(model.r_v);
  const Eigen::MatrixXd& wm = w.matrix();

  Rng rng(seed);
  Eigen::VectorXd bias_sum = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd bias_sq = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd outer_sum = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd outer_sq = Eigen::MatrixXd::Zero(k, k);
  double mse_sum = 0.0, mse_sq = 0.0, power_sum = 0.0, power_sq = 0.0;
  for (std::size_t t = 0; t < num_trials; ++t) {
    const Eigen::VectorXd theta = source == SourceDistribution::kGaussian
                                      ? theta_sampler.sample(rng)
                                      : theta_sampler.sample_uniform(rng);
    const Eigen::VectorXd x = theta + n_sampler.sample(rng);
    const Eigen::VectorXd y = wm * x;
    const Eigen::VectorXd r = model.gains.cwiseProduct(y) + v_sampler.sample(rng);
    const Eigen::VectorXd err = estimator * r - theta;

    const double se = err.squaredNorm();
    const double py = y.squaredNorm();
    const Eigen::MatrixXd outer = err * err.transpose();
    bias_sum += err;
    bias_sq += err.cwiseAbs2();
    outer_sum += outer;
    outer_sq += outer.cwiseAbs2();
    mse_sum += se;
    mse_sq += se * se;
    power_sum += py;
    power_sq += py * py;
  }

  const double n = static_cast<double>(num_trials);
  auto stderr_of = [n](double sum, double sq) {
    const double mean = sum / n;
    return std::sqrt(std::max(sq / n - mean * mean, 0.0) / n);
  };
  TrialBatch batch;
  batch.num_trials = num_trials;
  batch.rng_seed = seed;
  batch.empirical_mse_total = mse_sum / n;
  batch.mse_stderr = stderr_of(mse_sum, mse_sq);
  batch.empirical_power = power_sum / n;
  batch.power_stderr = stderr_of(power_sum, power_sq);
  batch.empirical_bias = bias_sum / n;
  batch.bias_stderr.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) batch.bias_stderr(i) = stderr_of(bias_sum(i), bias_sq(i));
  batch.empirical_error_covariance = outer_sum / n;
  batch.error_covariance_stderr.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      batch.error_covariance_stderr(i, j) = stderr_of(outer_sum(i, j), outer_sq(i, j));
    }
  }
  return batch;
}

TrialBatch run_trials(const MixingMatrix& w, const SystemModel& model, std::size_t num_trials,
                      std::uint64_t seed, SourceDistribution source) {
  if (num_trials < 1) throw ConfigError("num_trials must be at least 1");
  return run_trials_with_estimator(w, model, blue_estimator_matrix(w, model), num_trials, seed,
                                   source);
}

}  // namespace wsn
