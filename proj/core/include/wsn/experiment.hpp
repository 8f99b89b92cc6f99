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

#ifndef WSN_EXPERIMENT_HPP
#define WSN_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsn/blue_estimator.hpp"
#include "wsn/network_model.hpp"
#include "wsn/power_optimizer.hpp"

namespace wsn {

/// Seeds of the two documented network realizations.
inline constexpr std::uint64_t kDefaultFieldSeed = 7;
inline constexpr std::uint64_t kSecondFieldSeed = 9;

struct FieldConfig {
  std::size_t k = 6;
  std::size_t m = 6;
  Rect rect{-10.0, 10.0, -5.0, 5.0};
  std::uint64_t seed = kDefaultFieldSeed;
  /// Explicit positions override random placement (k is then positions.size()).
  std::optional<std::vector<Point2>> positions;
  /// Defaults to unit gains.
  std::optional<std::vector<double>> gains;
};

struct ValidationConfig {
  bool enabled = true;
  std::size_t num_trials = 20000;
  std::uint64_t seed = 7;
};

struct ExperimentConfig {
  FieldConfig field{};
  CovarianceSpec covariance{};
  std::vector<std::size_t> q_values{0, 1, 2, 3, 4, 5};
  std::vector<double> p0_values{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  /// power_budget is ignored; each cell uses its own P0.
  SolverConfig solver{};
  ValidationConfig validation{};
  std::string output = "results";

  /// Six sensors in [-10, 10] x [-5, 5], all connected, unit gains,
  /// sigma_theta^2 = 1, beta1 = 6, beta2 = 3, sigma_n^2 = 0.1, sigma_v^2 = 0.01,
  /// lambda_n = lambda_v = 0.1, q = 0..5.
  static ExperimentConfig paper_defaults(std::uint64_t field_seed = kDefaultFieldSeed);

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses the JSON config format. Missing keys keep their defaults; unknown
/// keys are rejected. Errors carry the line/column or the dotted field path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

SensorField build_field(const FieldConfig& config);

struct SweepRow {
  std::size_t q = 0;
  double p0 = 0.0;
  double distortion = 0.0;
  double surrogate = 0.0;
  double lower_bound = 0.0;
  double power_used = 0.0;
  bool converged = false;
  std::size_t restart_index = 0;
  double mc_mse = 0.0;     ///< NaN when validation is off or the cell is infeasible.
  double mc_stderr = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Optimal mixing matrix of each row, same order.
  std::vector<MixingMatrix> solutions;
};

/// Ascending q outer, ascending P0 inner. Each cell is warm-started from the
/// previous q at the same P0 and the previous P0 at the same q.
SweepResult run_experiment(const ExperimentConfig& config);

/// Single cell without warm starts.
SolverResult solve_cell(const ExperimentConfig& config, std::size_t q, double p0);

inline constexpr const char* kCsvHeader =
    "q,p0,distortion,surrogate,lower_bound,power_used,converged,restart_index,mc_mse,mc_stderr";

/// Shortest decimal that round-trips; "inf", "-inf", "nan" for non-finite.
std::string format_double(double value);
std::string format_csv(const SweepResult& result);
std::string format_manifest(const ExperimentConfig& config);

/// Writes results.csv and manifest.json into `dir`, creating it if needed.
/// Throws IoError.
void emit_results(const SweepResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir);

/// Mixing-matrix file used by the `solve`, `validate` and `power` commands.
nlohmann::json mixing_to_json(const MixingMatrix& w, std::size_t q);
MixingMatrix mixing_from_json(const nlohmann::json& j, const SensorField& field);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace wsn

#endif  // WSN_EXPERIMENT_HPP
