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

#ifndef WSN_BLUE_ESTIMATOR_HPP
#define WSN_BLUE_ESTIMATOR_HPP

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "wsn/network_model.hpp"

namespace wsn {

/// M x K mixing weights that vanish (exactly) outside the collaboration pattern.
class MixingMatrix {
 public:
  /// Throws ContractError on shape mismatch, non-finite entries, or a nonzero
  /// entry outside the pattern.
  MixingMatrix(Eigen::MatrixXd entries, AdjacencyMatrix pattern);

  /// Zeroes everything outside the pattern instead of rejecting it.
  static MixingMatrix masked(const Eigen::MatrixXd& entries, AdjacencyMatrix pattern);
  static MixingMatrix zeros(AdjacencyMatrix pattern);

  const Eigen::MatrixXd& matrix() const { return entries_; }
  const AdjacencyMatrix& pattern() const { return pattern_; }
  std::size_t rows() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(entries_.cols()); }

  MixingMatrix scaled(double c) const;

 private:
  Eigen::MatrixXd entries_;
  AdjacencyMatrix pattern_;
};

/// Everything the fusion center knows about the network: signal and noise
/// covariances plus the per-channel gains (G = diag(gains)).
struct SystemModel {
  CovarianceMatrix r_theta;
  CovarianceMatrix r_n;
  CovarianceMatrix r_v;
  Eigen::VectorXd gains;

  /// Builds R_theta, R_n, R_v for `field` from `spec`.
  static SystemModel build(const SensorField& field, const CovarianceSpec& spec);

  std::size_t num_sensors() const { return r_n.dim(); }
  std::size_t num_connected() const { return r_v.dim(); }
};

struct EstimationReport {
  double distortion = 0.0;   ///< Tr(F^-1); +inf when the estimator is undefined.
  double surrogate = 0.0;    ///< Tr(F).
  double lower_bound = 0.0;  ///< K^2 / Tr(F).
  double power = 0.0;
  bool rank_ok = false;
  Eigen::VectorXd component_variances;  ///< diag(F^-1); empty unless rank_ok.
};

/// F is treated as singular at or above this 2-norm condition number.
inline constexpr double kMaxFisherCondition = 1e12;

/// Average cumulative transmit power Tr(W (R_theta + R_n) W^T).
double transmit_power(const MixingMatrix& w, const CovarianceMatrix& r_theta,
                      const CovarianceMatrix& r_n);

/// F = W^T G^T (G W R_n W^T G^T + R_v)^-1 G W, factoring only the M x M
/// received-signal covariance. R_n may be singular.
Eigen::MatrixXd fisher_direct(const MixingMatrix& w, const SystemModel& model);

/// Same F through the matrix inversion lemma:
/// R_n^-1 - R_n^-1 (W^T G^T R_v^-1 G W + R_n^-1)^-1 R_n^-1.
/// Requires R_n positive definite (ModelError otherwise).
Eigen::MatrixXd fisher_via_woodbury(const MixingMatrix& w, const SystemModel& model);

/// Tr(F), the quantity in the denominator of the trace lower bound.
double surrogate_objective(const MixingMatrix& w, const SystemModel& model);

/// Inverse of a symmetric PSD Fisher matrix, or nullopt when its condition
/// number reaches kMaxFisherCondition.
std::optional<Eigen::MatrixXd> invert_fisher(const Eigen::MatrixXd& fisher);

/// Error covariance of the BLUE estimator and the derived scalar summaries.
EstimationReport blue_covariance(const MixingMatrix& w, const SystemModel& model);

/// The K x M linear map r -> theta_hat. Throws EstimationError when F is singular.
Eigen::MatrixXd blue_estimator_matrix(const MixingMatrix& w, const SystemModel& model);

/// theta_hat = F^-1 W^T G^T (G W R_n W^T G^T + R_v)^-1 r.
Eigen::VectorXd blue_estimate(const MixingMatrix& w, const SystemModel& model,
                              const Eigen::VectorXd& received);

}  // namespace wsn

#endif  // WSN_BLUE_ESTIMATOR_HPP
