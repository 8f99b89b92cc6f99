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

// wsnest: sweep, solve and validate power allocation for collaborative
// sensor networks.
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error,
// 3 numerical failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wsn/blue_estimator.hpp"
#include "wsn/error.hpp"
#include "wsn/experiment.hpp"
#include "wsn/monte_carlo.hpp"
#include "wsn/power_optimizer.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfig = 1, kIo = 2, kNumerical = 3 };

struct CommonOptions {
  std::string config_path;
  bool paper_defaults = false;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  auto* cfg = cmd->add_option("--config", opts.config_path, "Experiment config (JSON)");
  auto* pd = cmd->add_flag("--paper-defaults", opts.paper_defaults,
                           "Use the built-in six-sensor setup");
  cfg->excludes(pd);
  cmd->add_option("--seed", opts.seed, "Override the network placement seed");
}

wsn::ExperimentConfig resolve_config(const CommonOptions& opts) {
  wsn::ExperimentConfig config;
  if (!opts.config_path.empty()) {
    config = wsn::load_config(opts.config_path);
  } else if (opts.paper_defaults) {
    config = wsn::ExperimentConfig::paper_defaults();
  } else {
    throw wsn::ConfigError("either --config <path> or --paper-defaults is required");
  }
  if (opts.seed) config.field.seed = *opts.seed;
  config.validate();
  return config;
}

nlohmann::json report_json(const wsn::EstimationReport& r) {
  nlohmann::json j{{"distortion", wsn::format_double(r.distortion)},
                   {"surrogate", r.surrogate},
                   {"lower_bound", wsn::format_double(r.lower_bound)},
                   {"power", r.power},
                   {"rank_ok", r.rank_ok}};
  if (r.rank_ok) {
    j["distortion"] = r.distortion;
    j["lower_bound"] = r.lower_bound;
    std::vector<double> v(r.component_variances.data(),
                          r.component_variances.data() + r.component_variances.size());
    j["component_variances"] = v;
  }
  return j;
}

int run_command(const CommonOptions& opts, const std::string& out) {
  wsn::ExperimentConfig config = resolve_config(opts);
  if (!out.empty()) config.output = out;
  const wsn::SweepResult result = wsn::run_experiment(config);
  wsn::emit_results(result, config, config.output);
  std::cout << "q      P0          distortion      lower_bound     mc_mse\n";
  for (const auto& row : result.rows) {
    std::printf("%-6zu %-11.5g %-15.8g %-15.8g %-.8g\n", row.q, row.p0, row.distortion,
                row.lower_bound, row.mc_mse);
  }
  std::cout << "wrote " << (std::filesystem::path(config.output) / "results.csv").string()
            << " and manifest.json\n";
  return kOk;
}

int solve_command(const CommonOptions& opts, std::size_t q, double p0, const std::string& out) {
  const wsn::ExperimentConfig config = resolve_config(opts);
  if (q >= wsn::build_field(config.field).num_sensors()) {
    throw wsn::ConfigError("--q must be below the number of sensors");
  }
  const wsn::SolverResult res = wsn::solve_cell(config, q, p0);
  nlohmann::json j = report_json(res.report);
  j["q"] = q;
  j["p0"] = p0;
  j["objective"] = std::string(wsn::to_string(res.objective));
  j["converged"] = res.converged;
  j["restart_index"] = res.restart_index;
  j["iterations"] = res.iterations;
  std::cout << j.dump(2) << "\n";
  if (!out.empty()) {
    wsn::write_text_file(out, wsn::mixing_to_json(res.w_opt, q).dump(2) + "\n");
  }
  return kOk;
}

wsn::MixingMatrix load_mixing(const std::string& path, const wsn::SensorField& field) {
  nlohmann::json j;
  const std::string text = wsn::read_text_file(path);
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw wsn::ConfigError(path + ": " + e.what());
  }
  return wsn::mixing_from_json(j, field);
}

int validate_command(const CommonOptions& opts, const std::string& w_path,
                     std::optional<std::size_t> trials, std::optional<std::uint64_t> mc_seed) {
  const wsn::ExperimentConfig config = resolve_config(opts);
  const wsn::SensorField field = wsn::build_field(config.field);
  const wsn::SystemModel model = wsn::SystemModel::build(field, config.covariance);
  const wsn::MixingMatrix w = load_mixing(w_path, field);
  const wsn::EstimationReport report = wsn::blue_covariance(w, model);
  if (!report.rank_ok) throw wsn::EstimationError("estimator undefined for this mixing matrix");
  const std::size_t n = trials.value_or(config.validation.num_trials);
  const std::uint64_t seed = mc_seed.value_or(config.validation.seed);
  const wsn::TrialBatch batch = wsn::run_trials(w, model, n, seed);
  const double z_mse = (batch.empirical_mse_total - report.distortion) / batch.mse_stderr;
  const double z_power = (batch.empirical_power - report.power) / batch.power_stderr;
  nlohmann::json j{{"num_trials", n},
                   {"seed", seed},
                   {"distortion", report.distortion},
                   {"mc_mse", batch.empirical_mse_total},
                   {"mc_stderr", batch.mse_stderr},
                   {"mse_z", z_mse},
                   {"power", report.power},
                   {"mc_power", batch.empirical_power},
                   {"power_z", z_power}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int power_command(const CommonOptions& opts, const std::string& w_path) {
  const wsn::ExperimentConfig config = resolve_config(opts);
  const wsn::SensorField field = wsn::build_field(config.field);
  const wsn::SystemModel model = wsn::SystemModel::build(field, config.covariance);
  const wsn::MixingMatrix w = load_mixing(w_path, field);
  std::cout << wsn::format_double(wsn::transmit_power(w, model.r_theta, model.r_n)) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power allocation for linear spatial collaboration in sensor networks"};
  app.require_subcommand(1);

  CommonOptions run_opts, solve_opts, validate_opts, power_opts;
  std::string run_out, solve_out, w_path_validate, w_path_power;
  std::size_t q = 0;
  double p0 = 1.0;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> mc_seed;

  auto* run = app.add_subcommand("run", "Full (q, P0) sweep; writes results.csv and manifest.json");
  add_common(run, run_opts);
  run->add_option("--out", run_out, "Output directory (overrides the config)");

  auto* solve = app.add_subcommand("solve", "Optimize a single cell and print its report");
  add_common(solve, solve_opts);
  solve->add_option("--q", q, "Collaboration degree")->required();
  solve->add_option("--p0", p0, "Power budget")->required()->check(CLI::PositiveNumber);
  solve->add_option("--out", solve_out, "Write the optimal mixing matrix to this JSON file");

  auto* validate = app.add_subcommand("validate", "Monte Carlo check of a stored mixing matrix");
  add_common(validate, validate_opts);
  validate->add_option("--w", w_path_validate, "Mixing matrix JSON from `solve --out`")
      ->required();
  validate->add_option("--trials", trials, "Number of trials");
  validate->add_option("--mc-seed", mc_seed, "Monte Carlo seed");

  auto* power = app.add_subcommand("power", "Average transmit power of a stored mixing matrix");
  add_common(power, power_opts);
  power->add_option("--w", w_path_power, "Mixing matrix JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return run_command(run_opts, run_out);
    if (*solve) return solve_command(solve_opts, q, p0, solve_out);
    if (*validate) return validate_command(validate_opts, w_path_validate, trials, mc_seed);
    if (*power) return power_command(power_opts, w_path_power);
  } catch (const wsn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const wsn::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
