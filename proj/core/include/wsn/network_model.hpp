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

#ifndef WSN_NETWORK_MODEL_HPP
#define WSN_NETWORK_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace wsn {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned placement region.
struct Rect {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;
};

/// Sensor geometry plus the fusion-center links.
///
/// The first `num_connected()` sensors are the ones with a channel to the
/// fusion center; channel gain j belongs to sensor j.
class SensorField {
 public:
  SensorField(std::vector<Point2> positions, std::size_t num_connected,
              Eigen::VectorXd channel_gains);

  /// Unit gains on every channel.
  SensorField(std::vector<Point2> positions, std::size_t num_connected);

  std::size_t num_sensors() const { return positions_.size(); }
  std::size_t num_connected() const { return num_connected_; }
  const std::vector<Point2>& positions() const { return positions_; }
  const Eigen::VectorXd& channel_gains() const { return gains_; }

  double distance(std::size_t i, std::size_t j) const;

  /// Copy of this field with the given per-channel gains.
  SensorField with_channel_gains(Eigen::VectorXd gains) const;

 private:
  std::vector<Point2> positions_;
  std::size_t num_connected_;
  Eigen::VectorXd gains_;
};

/// Distance-decay correlation of the observed signals.
struct SignalParams {
  double variance = 1.0;
  double beta1 = 6.0;
  double beta2 = 3.0;
};

/// Homogeneous equi-correlated noise.
struct NoiseParams {
  double variance = 0.1;
  double lambda = 0.1;
};

struct CovarianceSpec {
  SignalParams signal{};
  NoiseParams observation_noise{0.1, 0.1};
  NoiseParams channel_noise{0.01, 0.1};

  /// Throws ConfigError on non-positive variances or scale parameters.
  /// beta2 outside (0, 2] is accepted; positive definiteness is checked on the
  /// realized matrix instead.
  void validate() const;
};

/// Symmetric positive semi-definite matrix, validated at construction.
class CovarianceMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;
  static constexpr double kRelativeEigenFloor = -1e-10;

  /// Validates symmetry and semi-definiteness; with `require_definite` the
  /// minimum eigenvalue must be strictly positive. Throws ModelError.
  explicit CovarianceMatrix(Eigen::MatrixXd entries, bool require_definite = false);

  const Eigen::MatrixXd& matrix() const { return entries_; }
  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  double min_eigenvalue() const { return min_eig_; }
  double max_eigenvalue() const { return max_eig_; }
  bool positive_definite() const { return min_eig_ > 0.0; }

 private:
  Eigen::MatrixXd entries_;
  double min_eig_ = 0.0;
  double max_eig_ = 0.0;
};

/// M x K collaboration pattern. Row j lists the observations sensor j can mix.
class AdjacencyMatrix {
 public:
  using Storage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

  /// Throws ContractError unless entries are 0/1, M <= K and A(j, j) = 1.
  explicit AdjacencyMatrix(Storage entries);

  std::size_t rows() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(entries_.cols()); }
  bool operator()(std::size_t j, std::size_t i) const { return entries_(j, i) != 0; }
  const Storage& entries() const { return entries_; }
  std::size_t num_free() const;

  /// True when every sensor's observation reaches at least one connected sensor.
  /// Without it no mixing matrix gives a well-posed estimator.
  bool covers_all_columns() const;

  /// True if every 1-entry here is also a 1-entry of `other`.
  bool is_subset_of(const AdjacencyMatrix& other) const;

  /// 1.0 on the pattern, 0.0 elsewhere.
  Eigen::MatrixXd mask() const;

 private:
  Storage entries_;
};

/// K i.i.d. uniform positions in `rect`, the first m connected, unit gains.
/// Deterministic in `rng_seed`.
SensorField generate_field(std::size_t k, std::size_t m, const Rect& rect,
                           std::uint64_t rng_seed);

/// sigma^2 exp(-(d_ij / beta1)^beta2). Throws ModelError if the result is
/// indefinite beyond tolerance.
CovarianceMatrix signal_covariance(const SensorField& field, const SignalParams& params);

/// variance * ((1 - lambda) I + lambda 1 1^T); throws ConfigError when lambda
/// leaves (-1/(dim-1), 1).
CovarianceMatrix equicorrelated_covariance(std::size_t dim, double variance, double lambda);

/// Each connected sensor mixes its own observation and those of its q nearest
/// neighbours. Equidistant neighbours are ranked by index.
AdjacencyMatrix nearest_neighbor_adjacency(const SensorField& field, std::size_t q);

}  // namespace wsn

#endif  // WSN_NETWORK_MODEL_HPP
