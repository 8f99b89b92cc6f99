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

#include "wsn/network_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "wsn/error.hpp"

namespace wsn {

SensorField::SensorField(std::vector<Point2> positions, std::size_t num_connected,
                         Eigen::VectorXd channel_gains)
    : positions_(std::move(positions)),
      num_connected_(num_connected),
      gains_(std::move(channel_gains)) {
  if (positions_.empty()) throw ConfigError("sensor field needs at least one sensor");
  if (num_connected_ < 1 || num_connected_ > positions_.size()) {
    throw ConfigError("connected sensor count M must satisfy 1 <= M <= K (M=" +
                      std::to_string(num_connected_) +
                      ", K=" + std::to_string(positions_.size()) + ")");
  }
  for (const auto& p : positions_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ConfigError("sensor positions must be finite");
    }
  }
  if (static_cast<std::size_t>(gains_.size()) != num_connected_) {
    throw ConfigError("expected " + std::to_string(num_connected_) + " channel gains, got " +
                      std::to_string(gains_.size()));
  }
  for (Eigen::Index j = 0; j < gains_.size(); ++j) {
    if (!std::isfinite(gains_(j)) || gains_(j) == 0.0) {
      throw ConfigError("channel gain " + std::to_string(j) + " must be finite and nonzero");
    }
  }
}

SensorField::SensorField(std::vector<Point2> positions, std::size_t num_connected)
    : SensorField(std::move(positions), num_connected,
                  Eigen::VectorXd::Ones(static_cast<Eigen::Index>(num_connected))) {}

double SensorField::distance(std::size_t i, std::size_t j) const {
  const Point2& a = positions_.at(i);
  const Point2& b = positions_.at(j);
  return std::hypot(a.x - b.x, a.y - b.y);
}

SensorField SensorField::with_channel_gains(Eigen::VectorXd gains) const {
  return SensorField(positions_, num_connected_, std::move(gains));
}

void CovarianceSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(std::isfinite(signal.variance) && signal.variance > 0.0,
          "signal variance must be positive");
  require(std::isfinite(signal.beta1) && signal.beta1 > 0.0, "beta1 must be positive");
  require(std::isfinite(signal.beta2) && signal.beta2 > 0.0, "beta2 must be positive");
  require(std::isfinite(observation_noise.variance) && observation_noise.variance > 0.0,
          "observation noise variance must be positive");
  require(std::isfinite(channel_noise.variance) && channel_noise.variance > 0.0,
          "channel noise variance must be positive");
  require(std::isfinite(observation_noise.lambda) && observation_noise.lambda < 1.0,
          "observation noise lambda must be below 1");
  require(std::isfinite(channel_noise.lambda) && channel_noise.lambda < 1.0,
          "channel noise lambda must be below 1");
}

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd entries, bool require_definite)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw ContractError("covariance matrix must be square and non-empty");
  }
  if (!entries_.allFinite()) throw ContractError("covariance matrix has non-finite entries");
  const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance) {
    std::ostringstream os;
    os << "covariance matrix not symmetric (max asymmetry " << asym << ")";
    throw ModelError(os.str());
  }
  // Exact symmetry downstream; the residual is below tolerance anyway.
  entries_ = 0.5 * (entries_ + entries_.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries_, Eigen::EigenvaluesOnly);
  min_eig_ = es.eigenvalues().minCoeff();
  max_eig_ = es.eigenvalues().maxCoeff();
  const double floor = kRelativeEigenFloor * std::max(std::abs(max_eig_), 0.0);
  if (min_eig_ < floor) {
    std::ostringstream os;
    os << "covariance matrix indefinite (minimum eigenvalue " << min_eig_ << ")";
    throw ModelError(os.str());
  }
  if (require_definite && min_eig_ <= 0.0) {
    std::ostringstream os;
    os << "covariance matrix must be positive definite (minimum eigenvalue " << min_eig_
       << ")";
    throw ModelError(os.str());
  }
}

AdjacencyMatrix::AdjacencyMatrix(Storage entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.rows() > entries_.cols()) {
    throw ContractError("adjacency matrix must be M x K with 1 <= M <= K");
  }
  for (Eigen::Index j = 0; j < entries_.rows(); ++j) {
    for (Eigen::Index i = 0; i < entries_.cols(); ++i) {
      if (entries_(j, i) > 1) throw ContractError("adjacency entries must be 0 or 1");
    }
    if (entries_(j, j) != 1) {
      throw ContractError("adjacency diagonal entry " + std::to_string(j) + " must be 1");
    }
  }
}

std::size_t AdjacencyMatrix::num_free() const {
  return static_cast<std::size_t>((entries_.array() != 0).count());
}

bool AdjacencyMatrix::covers_all_columns() const {
  for (Eigen::Index i = 0; i < entries_.cols(); ++i) {
    if ((entries_.col(i).array() != 0).count() == 0) return false;
  }
  return true;
}

bool AdjacencyMatrix::is_subset_of(const AdjacencyMatrix& other) const {
  if (rows() != other.rows() || cols() != other.cols()) return false;
  for (Eigen::Index j = 0; j < entries_.rows(); ++j) {
    for (Eigen::Index i = 0; i < entries_.cols(); ++i) {
      if (entries_(j, i) != 0 && other.entries_(j, i) == 0) return false;
    }
  }
  return true;
}

Eigen::MatrixXd AdjacencyMatrix::mask() const { return entries_.cast<double>(); }

SensorField generate_field(std::size_t k, std::size_t m, const Rect& rect,
                           std::uint64_t rng_seed) {
  if (k < 1) throw ConfigError("sensor count K must be at least 1");
  if (m < 1 || m > k) throw ConfigError("connected count M must satisfy 1 <= M <= K");
  const bool finite = std::isfinite(rect.xmin) && std::isfinite(rect.xmax) &&
                      std::isfinite(rect.ymin) && std::isfinite(rect.ymax);
  if (!finite || !(rect.xmax > rect.xmin) || !(rect.ymax > rect.ymin)) {
    throw ConfigError("placement rectangle is degenerate");
  }
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> ux(rect.xmin, rect.xmax);
  std::uniform_real_distribution<double> uy(rect.ymin, rect.ymax);
  std::vector<Point2> positions(k);
  for (auto& p : positions) {
    p.x = ux(rng);
    p.y = uy(rng);
  }
  return SensorField(std::move(positions), m);
}

CovarianceMatrix signal_covariance(const SensorField& field, const SignalParams& params) {
  if (!(params.variance > 0.0) || !(params.beta1 > 0.0) || !(params.beta2 > 0.0)) {
    throw ConfigError("signal covariance parameters must be positive");
  }
  const auto k = static_cast<Eigen::Index>(field.num_sensors());
  Eigen::MatrixXd r(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    r(i, i) = params.variance;
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double d = field.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      const double rho = std::exp(-std::pow(d / params.beta1, params.beta2));
      r(i, j) = r(j, i) = params.variance * rho;
    }
  }
  return CovarianceMatrix(std::move(r));
}

CovarianceMatrix equicorrelated_covariance(std::size_t dim, double variance, double lambda) {
  if (dim < 1) throw ConfigError("covariance dimension must be at least 1");
  if (!std::isfinite(variance) || !(variance > 0.0)) {
    throw ConfigError("noise variance must be positive");
  }
  if (dim > 1) {
    const double lower = -1.0 / static_cast<double>(dim - 1);
    if (!(lambda > lower && lambda < 1.0)) {
      std::ostringstream os;
      os << "equi-correlation lambda=" << lambda << " outside (" << lower
         << ", 1) for dimension " << dim;
      throw ConfigError(os.str());
    }
  }
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(n, n, variance * lambda);
  r.diagonal().setConstant(variance);
  return CovarianceMatrix(std::move(r), /*require_definite=*/true);
}

AdjacencyMatrix nearest_neighbor_adjacency(const SensorField& field, std::size_t q) {
  const std::size_t k = field.num_sensors();
  const std::size_t m = field.num_connected();
  if (q >= k) {
    throw ConfigError("collaboration degree q=" + std::to_string(q) + " must be below K=" +
                      std::to_string(k));
  }
  AdjacencyMatrix::Storage a = AdjacencyMatrix::Storage::Zero(
      static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  std::vector<std::size_t> others;
  others.reserve(k);
  for (std::size_t j = 0; j < m; ++j) {
    a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1;
    others.clear();
    for (std::size_t i = 0; i < k; ++i) {
      if (i != j) others.push_back(i);
    }
    std::stable_sort(others.begin(), others.end(), [&](std::size_t lhs, std::size_t rhs) {
      return field.distance(j, lhs) < field.distance(j, rhs);
    });
    for (std::size_t n = 0; n < q; ++n) {
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(others[n])) = 1;
    }
  }
  return AdjacencyMatrix(std::move(a));
}

}  // namespace wsn
