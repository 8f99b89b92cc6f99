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

#include "wsn/power_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "wsn/error.hpp"

namespace wsn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw ModelError(std::string(what) + " is not numerically positive definite");
  }
  return symmetrized(llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols())));
}

void check_shapes(const MixingMatrix& w, const SystemModel& model) {
  if (static_cast<std::size_t>(w.cols()) != model.num_sensors() ||
      static_cast<std::size_t>(w.rows()) != model.num_connected() ||
      model.r_theta.dim() != model.num_sensors() ||
      static_cast<std::size_t>(model.gains.size()) != model.num_connected()) {
    throw ContractError("mixing matrix and system model dimensions disagree");
  }
}

// Pieces of the Woodbury form shared by objective_13 and its gradient.
struct WoodburyTerms {
  Eigen::MatrixXd rn_inv;
  Eigen::MatrixXd channel_info;  // G R_v^-1 G
  Eigen::MatrixXd inner_inv;     // (W^T G R_v^-1 G W + R_n^-1)^-1
};

WoodburyTerms woodbury_terms(const MixingMatrix& w, const SystemModel& model) {
  check_shapes(w, model);
  if (!model.r_n.positive_definite()) {
    throw ModelError("observation noise covariance R_n must be positive definite");
  }
  if (!model.r_v.positive_definite()) {
    throw ModelError("channel noise covariance R_v must be positive definite");
  }
  WoodburyTerms t;
  t.rn_inv = spd_inverse(model.r_n.matrix(), "R_n");
  const Eigen::MatrixXd rv_inv = spd_inverse(model.r_v.matrix(), "R_v");
  t.channel_info = symmetrized(model.gains.asDiagonal() * rv_inv * model.gains.asDiagonal());
  const Eigen::MatrixXd& wm = w.matrix();
  t.inner_inv = spd_inverse(symmetrized(wm.transpose() * t.channel_info * wm + t.rn_inv),
                            "W^T G^T R_v^-1 G W + R_n^-1");
  return t;
}

double frob_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

// Component of `grad` tangent to the power ellipsoid at W, restricted to the pattern.
Eigen::MatrixXd tangent_component(const Eigen::MatrixXd& grad, const Eigen::MatrixXd& w,
                                  const Eigen::MatrixXd& power_matrix,
                                  const Eigen::MatrixXd& mask) {
  const Eigen::MatrixXd normal = (2.0 * w * power_matrix).cwiseProduct(mask);
  const double nn = frob_dot(normal, normal);
  if (!(nn > 0.0)) return grad;
  return grad - (frob_dot(grad, normal) / nn) * normal;
}

Eigen::MatrixXd rescale_to(const Eigen::MatrixXd& w, const Eigen::MatrixXd& power_matrix,
                           double p0) {
  const double p = (w * power_matrix).cwiseProduct(w).sum();
  if (!(p > 0.0)) return w;
  return std::sqrt(p0 / p) * w;
}

bool well_posed(const MixingMatrix& w, const SystemModel& model) {
  return invert_fisher(fisher_direct(w, model)).has_value();
}

}  // namespace

std::string_view to_string(SolverObjective objective) {
  switch (objective) {
    case SolverObjective::kAuto:
      return "auto";
    case SolverObjective::kDistortion:
      return "distortion";
    case SolverObjective::kSurrogate:
      return "surrogate";
  }
  return "auto";
}

SolverObjective parse_solver_objective(std::string_view name) {
  if (name == "auto") return SolverObjective::kAuto;
  if (name == "distortion") return SolverObjective::kDistortion;
  if (name == "surrogate") return SolverObjective::kSurrogate;
  throw ConfigError("unknown solver objective '" + std::string(name) +
                    "' (expected auto, distortion or surrogate)");
}

void SolverConfig::validate() const {
  if (!std::isfinite(power_budget) || !(power_budget > 0.0)) {
    throw ConfigError("power budget P0 must be positive");
  }
  if (!(gradient_tolerance > 0.0)) throw ConfigError("gradient tolerance must be positive");
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  if (!(line_search.initial_step > 0.0)) throw ConfigError("initial step must be positive");
  if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0)) {
    throw ConfigError("line-search shrink factor must lie in (0, 1)");
  }
  if (!(line_search.sufficient_decrease > 0.0 && line_search.sufficient_decrease < 1.0)) {
    throw ConfigError("sufficient-decrease constant must lie in (0, 1)");
  }
  if (line_search.max_backtracks < 1) throw ConfigError("max_backtracks must be at least 1");
}

double objective_13(const MixingMatrix& w, const SystemModel& model) {
  const WoodburyTerms t = woodbury_terms(w, model);
  return (t.rn_inv * t.inner_inv * t.rn_inv).trace();
}

Eigen::MatrixXd objective_13_gradient(const MixingMatrix& w, const SystemModel& model) {
  const WoodburyTerms t = woodbury_terms(w, model);
  // f = Tr(M^-1 R_n^-2)  =>  df = -2 <G R_v^-1 G W M^-1 R_n^-2 M^-1, dW>
  const Eigen::MatrixXd s = t.inner_inv * t.rn_inv * t.rn_inv * t.inner_inv;
  const Eigen::MatrixXd grad = -2.0 * t.channel_info * w.matrix() * s;
  return grad.cwiseProduct(w.pattern().mask());
}

double distortion_objective(const MixingMatrix& w, const SystemModel& model) {
  const auto inv = invert_fisher(fisher_direct(w, model));
  return inv ? inv->trace() : kInf;
}

Eigen::MatrixXd distortion_gradient(const MixingMatrix& w, const SystemModel& model) {
  check_shapes(w, model);
  const Eigen::MatrixXd x = model.gains.asDiagonal() * w.matrix();
  const Eigen::MatrixXd s = symmetrized(x * model.r_n.matrix() * x.transpose() + model.r_v.matrix());
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw ModelError("received-signal covariance is not numerically positive definite");
  }
  const Eigen::MatrixXd y = llt.solve(x);
  const Eigen::MatrixXd f = symmetrized(x.transpose() * y);
  const auto f_inv = invert_fisher(f);
  if (!f_inv) throw EstimationError("distortion gradient undefined: Fisher matrix is singular");
  const auto k = f.rows();
  // With X = G W, Y = S^-1 X:  dTr(F^-1) = -2 <Y F^-2 (I - F R_n), dX>
  const Eigen::MatrixXd grad_x =
      -2.0 * y * (*f_inv * *f_inv) *
      (Eigen::MatrixXd::Identity(k, k) - f * model.r_n.matrix());
  return (model.gains.asDiagonal() * grad_x).cwiseProduct(w.pattern().mask());
}

MixingMatrix project_to_power(const MixingMatrix& w, const CovarianceMatrix& r_theta,
                              const CovarianceMatrix& r_n, double p0) {
  if (!std::isfinite(p0) || !(p0 > 0.0)) throw ConfigError("power budget must be positive");
  const double p = transmit_power(w, r_theta, r_n);
  if (!(p > 0.0)) return w;
  return w.scaled(std::sqrt(p0 / p));
}

DescentRun descend(const MixingMatrix& start, const SystemModel& model,
                   const SolverConfig& config, SolverObjective objective) {
  config.validate();
  check_shapes(start, model);
  const double p0 = config.power_budget;
  const AdjacencyMatrix& pattern = start.pattern();
  const Eigen::MatrixXd mask = pattern.mask();
  const Eigen::MatrixXd power_matrix = model.r_theta.matrix() + model.r_n.matrix();

  MixingMatrix w = project_to_power(start, model.r_theta, model.r_n, p0);
  if (transmit_power(w, model.r_theta, model.r_n) <= 0.0) {
    throw ContractError("descent needs a start point with nonzero transmit power");
  }
  if (objective == SolverObjective::kAuto) {
    objective = well_posed(w, model) ? SolverObjective::kDistortion : SolverObjective::kSurrogate;
  }
  const bool use_distortion = objective == SolverObjective::kDistortion;
  auto value = [&](const MixingMatrix& m) {
    return use_distortion ? distortion_objective(m, model) : objective_13(m, model);
  };
  auto gradient = [&](const MixingMatrix& m) {
    return use_distortion ? distortion_gradient(m, model) : objective_13_gradient(m, model);
  };

  DescentRun run;
  run.objective = objective;
  double f = value(w);
  if (!std::isfinite(f)) {
    throw EstimationError("distortion objective is infinite at the start point");
  }
  run.objective_trace.push_back(f);
  const auto& ls = config.line_search;

  Eigen::MatrixXd prev_w;
  Eigen::MatrixXd prev_tangent;
  double step = ls.initial_step;
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const Eigen::MatrixXd tangent =
        tangent_component(gradient(w), w.matrix(), power_matrix, mask);
    const double gnorm2 = tangent.squaredNorm();
    // Scale-free stationarity: the gradient of W -> f(W) scales like 1/|W|.
    run.gradient_norm = std::sqrt(gnorm2) * w.matrix().norm();
    if (run.gradient_norm <= config.gradient_tolerance * std::max(1.0, std::abs(f))) {
      run.converged = true;
      break;
    }
    if (it > 0) {
      // Barzilai-Borwein guess for the first trial step.
      const Eigen::MatrixXd s = w.matrix() - prev_w;
      const Eigen::MatrixXd y = tangent - prev_tangent;
      const double sy = frob_dot(s, y);
      step = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * step;
      if (!std::isfinite(step) || step <= 0.0) step = ls.initial_step;
    }
    bool accepted = false;
    for (std::size_t b = 0; b < ls.max_backtracks; ++b) {
      MixingMatrix trial(rescale_to(w.matrix() - step * tangent, power_matrix, p0), pattern);
      const double ft = value(trial);
      if (std::isfinite(ft) && ft <= f - ls.sufficient_decrease * step * gnorm2) {
        prev_w = w.matrix();
        prev_tangent = tangent;
        w = std::move(trial);
        f = ft;
        accepted = true;
        break;
      }
      step *= ls.shrink;
    }
    if (!accepted) break;
    ++run.iterations;
    run.objective_trace.push_back(f);
  }
  run.w = w.matrix();
  return run;
}

SolverResult optimize(const SystemModel& model, const AdjacencyMatrix& pattern,
                      const SolverConfig& config, std::span<const MixingMatrix> warm_starts) {
  config.validate();
  if (pattern.num_free() == 0) throw ConfigError("collaboration pattern has no free weights");
  if (pattern.rows() != model.num_connected() || pattern.cols() != model.num_sensors()) {
    throw ContractError("adjacency pattern does not match the system model");
  }

  std::vector<MixingMatrix> starts;
  starts.reserve(config.restarts + warm_starts.size());
  for (std::size_t r = 0; r < config.restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.rng_seed & 0xffffffffu),
                      static_cast<std::uint32_t>(config.rng_seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(static_cast<Eigen::Index>(pattern.rows()),
                      static_cast<Eigen::Index>(pattern.cols()));
    for (Eigen::Index j = 0; j < z.rows(); ++j) {
      for (Eigen::Index i = 0; i < z.cols(); ++i) z(j, i) = normal(rng);
    }
    starts.push_back(MixingMatrix::masked(z, pattern));
  }
  for (const MixingMatrix& ws : warm_starts) {
    starts.emplace_back(ws.matrix(), pattern);
  }

  std::vector<DescentRun> runs;
  runs.reserve(starts.size());
  for (const MixingMatrix& s : starts) {
    runs.push_back(descend(s, model, config, config.objective));
  }

  SolverResult best{MixingMatrix::zeros(pattern), {}, {}, SolverObjective::kDistortion,
                    false, 0, 0, {}};
  std::vector<EstimationReport> reports;
  reports.reserve(runs.size());
  for (const DescentRun& run : runs) {
    reports.push_back(blue_covariance(MixingMatrix(run.w, pattern), model));
    best.run_distortions.push_back(reports.back().distortion);
  }
  std::size_t chosen = 0;
  const bool any_ok = std::any_of(reports.begin(), reports.end(),
                                  [](const EstimationReport& r) { return r.rank_ok; });
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const bool better = any_ok ? (reports[i].rank_ok &&
                                  (!reports[chosen].rank_ok ||
                                   reports[i].distortion < reports[chosen].distortion))
                               : reports[i].surrogate > reports[chosen].surrogate;
    if (better) chosen = i;
  }
  best.w_opt = MixingMatrix(runs[chosen].w, pattern);
  best.report = reports[chosen];
  best.objective_trace = runs[chosen].objective_trace;
  best.objective = runs[chosen].objective;
  best.converged = runs[chosen].converged;
  best.restart_index = chosen;
  best.iterations = runs[chosen].iterations;
  return best;
}

}  // namespace wsn
