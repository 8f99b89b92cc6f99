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
#include <string>
#include <utility>

#include "wsn/error.hpp"

namespace wsn {

namespace {

void check_model(const MixingMatrix& w, const SystemModel& model) {
  const auto m = static_cast<Eigen::Index>(w.rows());
  const auto k = static_cast<Eigen::Index>(w.cols());
  if (model.r_n.matrix().rows() != k || model.r_theta.matrix().rows() != k) {
    throw ContractError("signal/observation covariances must be K x K with K=" +
                        std::to_string(k));
  }
  if (model.r_v.matrix().rows() != m || model.gains.size() != m) {
    throw ContractError("channel covariance and gains must match M=" + std::to_string(m));
  }
  if (!model.gains.allFinite()) throw ContractError("channel gains must be finite");
  if (!model.r_v.positive_definite()) {
    throw ModelError("channel noise covariance R_v must be positive definite");
  }
}

Eigen::LLT<Eigen::MatrixXd> spd_factor(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw ModelError(std::string(what) + " is not numerically positive definite");
  }
  return llt;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

MixingMatrix::MixingMatrix(Eigen::MatrixXd entries, AdjacencyMatrix pattern)
    : entries_(std::move(entries)), pattern_(std::move(pattern)) {
  if (static_cast<std::size_t>(entries_.rows()) != pattern_.rows() ||
      static_cast<std::size_t>(entries_.cols()) != pattern_.cols()) {
    throw ContractError("mixing matrix shape does not match its adjacency pattern");
  }
  if (!entries_.allFinite()) throw ContractError("mixing matrix has non-finite entries");
  for (Eigen::Index j = 0; j < entries_.rows(); ++j) {
    for (Eigen::Index i = 0; i < entries_.cols(); ++i) {
      if (!pattern_(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) &&
          entries_(j, i) != 0.0) {
        throw ContractError("mixing weight (" + std::to_string(j) + ", " +
                            std::to_string(i) + ") lies outside the collaboration pattern");
      }
    }
  }
}

MixingMatrix MixingMatrix::masked(const Eigen::MatrixXd& entries, AdjacencyMatrix pattern) {
  if (static_cast<std::size_t>(entries.rows()) != pattern.rows() ||
      static_cast<std::size_t>(entries.cols()) != pattern.cols()) {
    throw ContractError("mixing matrix shape does not match its adjacency pattern");
  }
  Eigen::MatrixXd w = entries.cwiseProduct(pattern.mask());
  return MixingMatrix(std::move(w), std::move(pattern));
}

MixingMatrix MixingMatrix::zeros(AdjacencyMatrix pattern) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pattern.rows()),
                                            static_cast<Eigen::Index>(pattern.cols()));
  return MixingMatrix(std::move(w), std::move(pattern));
}

MixingMatrix MixingMatrix::scaled(double c) const { return MixingMatrix(c * entries_, pattern_); }

SystemModel SystemModel::build(const SensorField& field, const CovarianceSpec& spec) {
  spec.validate();
  return SystemModel{
      signal_covariance(field, spec.signal),
      equicorrelated_covariance(field.num_sensors(), spec.observation_noise.variance,
                                spec.observation_noise.lambda),
      equicorrelated_covariance(field.num_connected(), spec.channel_noise.variance,
                                spec.channel_noise.lambda),
      field.channel_gains(),
  };
}

double transmit_power(const MixingMatrix& w, const CovarianceMatrix& r_theta,
                      const CovarianceMatrix& r_n) {
  const auto k = static_cast<Eigen::Index>(w.cols());
  if (r_theta.matrix().rows() != k || r_n.matrix().rows() != k) {
    throw ContractError("transmit power: covariances must be K x K with K=" +
                        std::to_string(k));
  }
  const Eigen::MatrixXd c = r_theta.matrix() + r_n.matrix();
  const Eigen::MatrixXd& wm = w.matrix();
  // Tr(W C W^T) = sum_ij (W C)_ij W_ij
  const double p = (wm * c).cwiseProduct(wm).sum();
  return std::max(p, 0.0);
}

Eigen::MatrixXd fisher_direct(const MixingMatrix& w, const SystemModel& model) {
  check_model(w, model);
  const Eigen::MatrixXd gw = model.gains.asDiagonal() * w.matrix();
  const Eigen::MatrixXd received_cov =
      symmetrized(gw * model.r_n.matrix() * gw.transpose() + model.r_v.matrix());
  const auto llt = spd_factor(received_cov, "received-signal covariance");
  return symmetrized(gw.transpose() * llt.solve(gw));
}

Eigen::MatrixXd fisher_via_woodbury(const MixingMatrix& w, const SystemModel& model) {
  check_model(w, model);
  if (!model.r_n.positive_definite()) {
    throw ModelError("observation noise covariance R_n must be positive definite");
  }
  const auto k = static_cast<Eigen::Index>(w.cols());
  const Eigen::MatrixXd gw = model.gains.asDiagonal() * w.matrix();
  const Eigen::MatrixXd rn_inv =
      symmetrized(spd_factor(model.r_n.matrix(), "R_n").solve(Eigen::MatrixXd::Identity(k, k)));
  const auto rv_llt = spd_factor(model.r_v.matrix(), "R_v");
  const Eigen::MatrixXd inner = symmetrized(gw.transpose() * rv_llt.solve(gw) + rn_inv);
  const auto inner_llt = spd_factor(inner, "W^T G^T R_v^-1 G W + R_n^-1");
  return symmetrized(rn_inv - rn_inv * inner_llt.solve(rn_inv));
}

double surrogate_objective(const MixingMatrix& w, const SystemModel& model) {
  return fisher_direct(w, model).trace();
}

std::optional<Eigen::MatrixXd> invert_fisher(const Eigen::MatrixXd& fisher) {
  if (fisher.rows() == 0 || !fisher.allFinite()) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fisher, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || !(lo > 0.0) || hi / lo >= kMaxFisherCondition) return std::nullopt;
  Eigen::LLT<Eigen::MatrixXd> llt(fisher);
  if (llt.info() != Eigen::Success) return std::nullopt;
  return symmetrized(llt.solve(Eigen::MatrixXd::Identity(fisher.rows(), fisher.cols())));
}

EstimationReport blue_covariance(const MixingMatrix& w, const SystemModel& model) {
  const Eigen::MatrixXd f = fisher_direct(w, model);
  EstimationReport report;
  report.surrogate = std::max(f.trace(), 0.0);
  const double k = static_cast<double>(w.cols());
  report.lower_bound = report.surrogate > 0.0 ? k * k / report.surrogate
                                              : std::numeric_limits<double>::infinity();
  report.power = transmit_power(w, model.r_theta, model.r_n);
  if (auto inv = invert_fisher(f)) {
    report.rank_ok = true;
    report.distortion = inv->trace();
    report.component_variances = inv->diagonal();
  } else {
    report.rank_ok = false;
    report.distortion = std::numeric_limits<double>::infinity();
  }
  return report;
}

Eigen::MatrixXd blue_estimator_matrix(const MixingMatrix& w, const SystemModel& model) {
  check_model(w, model);
  const Eigen::MatrixXd gw = model.gains.asDiagonal() * w.matrix();
  const auto llt = spd_factor(
      symmetrized(gw * model.r_n.matrix() * gw.transpose() + model.r_v.matrix()),
      "received-signal covariance");
  const Eigen::MatrixXd whitened = llt.solve(gw);  // S^-1 G W, M x K
  const Eigen::MatrixXd f = symmetrized(gw.transpose() * whitened);
  const auto inv = invert_fisher(f);
  if (!inv) {
    throw EstimationError("BLUE undefined: Fisher matrix is rank deficient for this W");
  }
  return *inv * whitened.transpose();
}

Eigen::VectorXd blue_estimate(const MixingMatrix& w, const SystemModel& model,
                              const Eigen::VectorXd& received) {
  if (received.size() != static_cast<Eigen::Index>(w.rows())) {
    throw ContractError("received vector must have M entries");
  }
  if (!received.allFinite()) throw ContractError("received vector has non-finite entries");
  return blue_estimator_matrix(w, model) * received;
}

}  // namespace wsn
