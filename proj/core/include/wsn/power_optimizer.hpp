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

#ifndef WSN_POWER_OPTIMIZER_HPP
#define WSN_POWER_OPTIMIZER_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wsn/blue_estimator.hpp"
#include "wsn/network_model.hpp"

namespace wsn {

/// Which smooth function the descent minimizes on the power boundary.
enum class SolverObjective {
  /// Distortion when the start point has a well-posed estimator, otherwise the
  /// Woodbury-form surrogate.
  kAuto,
  /// Tr(F^-1), the total estimation distortion.
  kDistortion,
  /// Tr(R_n^-1 (W^T G^T R_v^-1 G W + R_n^-1)^-1 R_n^-1) = Tr(R_n^-1) - Tr(F).
  kSurrogate,
};

std::string_view to_string(SolverObjective objective);
/// Accepts "auto", "distortion", "surrogate"; throws ConfigError otherwise.
SolverObjective parse_solver_objective(std::string_view name);

struct LineSearchConfig {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  std::size_t max_backtracks = 80;
};

struct SolverConfig {
  double power_budget = 1.0;
  std::size_t max_iterations = 5000;
  /// Stop when |tangential gradient| * |W| <= gradient_tolerance * max(1, |f(W)|).
  double gradient_tolerance = 1e-6;
  std::size_t restarts = 8;
  LineSearchConfig line_search{};
  std::uint64_t rng_seed = 0;
  SolverObjective objective = SolverObjective::kAuto;

  void validate() const;
};

/// One descent run from a fixed start point.
struct DescentRun {
  Eigen::MatrixXd w;
  SolverObjective objective = SolverObjective::kDistortion;
  std::vector<double> objective_trace;  ///< Value after each accepted step, start first.
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;  ///< |tangential gradient| * |W| at the last iterate.
};

struct SolverResult {
  MixingMatrix w_opt;
  EstimationReport report;
  std::vector<double> objective_trace;
  SolverObjective objective = SolverObjective::kDistortion;
  bool converged = false;
  /// Index of the winning run: random restarts first, then warm starts.
  std::size_t restart_index = 0;
  std::size_t iterations = 0;
  std::vector<double> run_distortions;
};

/// Tr(R_n^-1 (W^T G^T R_v^-1 G W + R_n^-1)^-1 R_n^-1). Needs R_n and R_v
/// positive definite.
double objective_13(const MixingMatrix& w, const SystemModel& model);

/// Analytic gradient of objective_13, zero outside the pattern.
Eigen::MatrixXd objective_13_gradient(const MixingMatrix& w, const SystemModel& model);

/// Tr(F^-1), +inf when the estimator is undefined.
double distortion_objective(const MixingMatrix& w, const SystemModel& model);

/// Gradient of Tr(F^-1), zero outside the pattern. Throws EstimationError
/// when F is singular.
Eigen::MatrixXd distortion_gradient(const MixingMatrix& w, const SystemModel& model);

/// Rescales W onto the power boundary Tr(W (R_theta + R_n) W^T) = p0. W = 0 is
/// returned as is.
MixingMatrix project_to_power(const MixingMatrix& w, const CovarianceMatrix& r_theta,
                              const CovarianceMatrix& r_n, double p0);

/// Projected gradient descent on the power boundary starting from `start`
/// (rescaled to the budget first).
DescentRun descend(const MixingMatrix& start, const SystemModel& model,
                   const SolverConfig& config, SolverObjective objective);

/// Best of `config.restarts` seeded random starts plus every warm start.
/// Warm starts must fit inside `pattern`; they are rescaled to the budget.
SolverResult optimize(const SystemModel& model, const AdjacencyMatrix& pattern,
                      const SolverConfig& config,
                      std::span<const MixingMatrix> warm_starts = {});

}  // namespace wsn

#endif  // WSN_POWER_OPTIMIZER_HPP
