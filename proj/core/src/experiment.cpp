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

#include "wsn/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string_view>
#include <system_error>
#include <type_traits>

#include "wsn/error.hpp"
#include "wsn/monte_carlo.hpp"

namespace wsn {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void check_object(const json& j, const std::string& path) {
  if (!j.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object");
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& path) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) field_error(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
  }
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

template <typename T>
T as(const json& v, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) field_error(path, "expected true or false");
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      field_error(path, "expected a non-negative integer");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) field_error(path, "expected a number");
  } else {
    if (!v.is_string()) field_error(path, "expected a string");
  }
  return v.get<T>();
}

template <typename T>
void read(const json& obj, std::string_view key, T& out, const std::string& path) {
  const auto it = obj.find(std::string(key));
  if (it != obj.end()) out = as<T>(*it, join(path, key));
}

template <typename T>
std::vector<T> read_list(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as<T>(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void parse_field(const json& j, FieldConfig& f, const std::string& path) {
  check_object(j, path);
  check_keys(j, {"k", "m", "rect", "seed", "positions", "gains"}, path);
  read(j, "k", f.k, path);
  read(j, "m", f.m, path);
  read(j, "seed", f.seed, path);
  if (j.contains("rect")) {
    const auto r = read_list<double>(j["rect"], join(path, "rect"));
    if (r.size() != 4) field_error(join(path, "rect"), "expected [xmin, xmax, ymin, ymax]");
    f.rect = Rect{r[0], r[1], r[2], r[3]};
  }
  if (j.contains("positions")) {
    const std::string ppath = join(path, "positions");
    const json& pj = j["positions"];
    if (!pj.is_array()) field_error(ppath, "expected an array of [x, y] pairs");
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < pj.size(); ++i) {
      const auto xy = read_list<double>(pj[i], ppath + "[" + std::to_string(i) + "]");
      if (xy.size() != 2) field_error(ppath + "[" + std::to_string(i) + "]", "expected [x, y]");
      pts.push_back(Point2{xy[0], xy[1]});
    }
    if (j.contains("k") && f.k != pts.size()) {
      field_error(join(path, "k"), "does not match the number of positions");
    }
    f.k = pts.size();
    f.positions = std::move(pts);
  }
  if (j.contains("gains")) f.gains = read_list<double>(j["gains"], join(path, "gains"));
}

void parse_noise(const json& j, NoiseParams& n, const std::string& path) {
  check_object(j, path);
  check_keys(j, {"variance", "lambda"}, path);
  read(j, "variance", n.variance, path);
  read(j, "lambda", n.lambda, path);
}

void parse_covariance(const json& j, CovarianceSpec& c, const std::string& path) {
  check_object(j, path);
  check_keys(j, {"signal", "observation_noise", "channel_noise"}, path);
  if (j.contains("signal")) {
    const std::string spath = join(path, "signal");
    const json& s = j["signal"];
    check_object(s, spath);
    check_keys(s, {"variance", "beta1", "beta2"}, spath);
    read(s, "variance", c.signal.variance, spath);
    read(s, "beta1", c.signal.beta1, spath);
    read(s, "beta2", c.signal.beta2, spath);
  }
  if (j.contains("observation_noise")) {
    parse_noise(j["observation_noise"], c.observation_noise, join(path, "observation_noise"));
  }
  if (j.contains("channel_noise")) {
    parse_noise(j["channel_noise"], c.channel_noise, join(path, "channel_noise"));
  }
}

void parse_solver(const json& j, SolverConfig& s, const std::string& path) {
  check_object(j, path);
  check_keys(j,
             {"max_iterations", "gradient_tolerance", "restarts", "initial_step", "shrink",
              "sufficient_decrease", "max_backtracks", "seed", "objective"},
             path);
  read(j, "max_iterations", s.max_iterations, path);
  read(j, "gradient_tolerance", s.gradient_tolerance, path);
  read(j, "restarts", s.restarts, path);
  read(j, "initial_step", s.line_search.initial_step, path);
  read(j, "shrink", s.line_search.shrink, path);
  read(j, "sufficient_decrease", s.line_search.sufficient_decrease, path);
  read(j, "max_backtracks", s.line_search.max_backtracks, path);
  read(j, "seed", s.rng_seed, path);
  if (j.contains("objective")) {
    const std::string name = as<std::string>(j["objective"], join(path, "objective"));
    try {
      s.objective = parse_solver_objective(name);
    } catch (const ConfigError& e) {
      field_error(join(path, "objective"), e.what());
    }
  }
}

void parse_validation(const json& j, ValidationConfig& v, const std::string& path) {
  check_object(j, path);
  check_keys(j, {"enabled", "num_trials", "seed"}, path);
  read(j, "enabled", v.enabled, path);
  read(j, "num_trials", v.num_trials, path);
  read(j, "seed", v.seed, path);
}

std::string parse_position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ExperimentConfig ExperimentConfig::paper_defaults(std::uint64_t field_seed) {
  ExperimentConfig c;
  c.field.seed = field_seed;
  return c;
}

void ExperimentConfig::validate() const {
  const std::size_t k = field.positions ? field.positions->size() : field.k;
  if (k < 1) field_error("field.k", "must be at least 1");
  if (field.m < 1 || field.m > k) field_error("field.m", "must satisfy 1 <= m <= k");
  if (!field.positions) {
    const Rect& r = field.rect;
    if (!(std::isfinite(r.xmin) && std::isfinite(r.xmax) && r.xmax > r.xmin &&
          std::isfinite(r.ymin) && std::isfinite(r.ymax) && r.ymax > r.ymin)) {
      field_error("field.rect", "rectangle is degenerate");
    }
  }
  if (field.gains && field.gains->size() != field.m) {
    field_error("field.gains", "expected m entries");
  }
  try {
    covariance.validate();
    if (k > 1) {
      const double lo = -1.0 / static_cast<double>(k - 1);
      if (!(covariance.observation_noise.lambda > lo)) {
        throw ConfigError("observation noise lambda must exceed -1/(k-1)");
      }
    }
    if (field.m > 1) {
      const double lo = -1.0 / static_cast<double>(field.m - 1);
      if (!(covariance.channel_noise.lambda > lo)) {
        throw ConfigError("channel noise lambda must exceed -1/(m-1)");
      }
    }
  } catch (const ConfigError& e) {
    field_error("covariance", e.what());
  }
  if (q_values.empty()) field_error("q_values", "must not be empty");
  for (std::size_t i = 0; i < q_values.size(); ++i) {
    if (q_values[i] >= k) field_error("q_values", "every q must be below k");
    if (i > 0 && q_values[i] <= q_values[i - 1]) {
      field_error("q_values", "must be strictly ascending");
    }
  }
  if (p0_values.empty()) field_error("p0_values", "must not be empty");
  for (std::size_t i = 0; i < p0_values.size(); ++i) {
    if (!std::isfinite(p0_values[i]) || !(p0_values[i] > 0.0)) {
      field_error("p0_values", "every P0 must be positive");
    }
    if (i > 0 && p0_values[i] <= p0_values[i - 1]) {
      field_error("p0_values", "must be strictly ascending");
    }
  }
  try {
    SolverConfig probe = solver;
    probe.power_budget = 1.0;
    probe.validate();
  } catch (const ConfigError& e) {
    field_error("solver", e.what());
  }
  if (validation.enabled && validation.num_trials < 1) {
    field_error("validation.num_trials", "must be at least 1");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at " + parse_position(text, e.byte) + ": " +
                      e.what());
  }
  ExperimentConfig c;
  check_object(root, "");
  check_keys(root,
             {"field", "covariance", "q_values", "p0_values", "solver", "validation", "output"},
             "");
  if (root.contains("field")) parse_field(root["field"], c.field, "field");
  if (root.contains("covariance")) parse_covariance(root["covariance"], c.covariance, "covariance");
  if (root.contains("q_values")) c.q_values = read_list<std::size_t>(root["q_values"], "q_values");
  if (root.contains("p0_values")) c.p0_values = read_list<double>(root["p0_values"], "p0_values");
  if (root.contains("solver")) parse_solver(root["solver"], c.solver, "solver");
  if (root.contains("validation")) parse_validation(root["validation"], c.validation, "validation");
  read(root, "output", c.output, "");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path));
}

json config_to_json(const ExperimentConfig& c) {
  json field = {{"k", c.field.positions ? c.field.positions->size() : c.field.k},
                {"m", c.field.m},
                {"rect", {c.field.rect.xmin, c.field.rect.xmax, c.field.rect.ymin,
                          c.field.rect.ymax}},
                {"seed", c.field.seed}};
  if (c.field.positions) {
    json pts = json::array();
    for (const auto& p : *c.field.positions) pts.push_back({p.x, p.y});
    field["positions"] = pts;
  }
  if (c.field.gains) field["gains"] = *c.field.gains;
  const auto noise = [](const NoiseParams& n) {
    return json{{"variance", n.variance}, {"lambda", n.lambda}};
  };
  return json{
      {"field", field},
      {"covariance",
       {{"signal",
         {{"variance", c.covariance.signal.variance},
          {"beta1", c.covariance.signal.beta1},
          {"beta2", c.covariance.signal.beta2}}},
        {"observation_noise", noise(c.covariance.observation_noise)},
        {"channel_noise", noise(c.covariance.channel_noise)}}},
      {"q_values", c.q_values},
      {"p0_values", c.p0_values},
      {"solver",
       {{"max_iterations", c.solver.max_iterations},
        {"gradient_tolerance", c.solver.gradient_tolerance},
        {"restarts", c.solver.restarts},
        {"initial_step", c.solver.line_search.initial_step},
        {"shrink", c.solver.line_search.shrink},
        {"sufficient_decrease", c.solver.line_search.sufficient_decrease},
        {"max_backtracks", c.solver.line_search.max_backtracks},
        {"seed", c.solver.rng_seed},
        {"objective", std::string(to_string(c.solver.objective))}}},
      {"validation",
       {{"enabled", c.validation.enabled},
        {"num_trials", c.validation.num_trials},
        {"seed", c.validation.seed}}},
      {"output", c.output},
  };
}

SensorField build_field(const FieldConfig& config) {
  SensorField field = config.positions
                          ? SensorField(*config.positions, config.m)
                          : generate_field(config.k, config.m, config.rect, config.seed);
  if (config.gains) {
    field = field.with_channel_gains(
        Eigen::Map<const Eigen::VectorXd>(config.gains->data(),
                                          static_cast<Eigen::Index>(config.gains->size())));
  }
  return field;
}

SweepResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const SensorField field = build_field(config.field);
  const SystemModel model = SystemModel::build(field, config.covariance);
  const std::size_t np = config.p0_values.size();

  SweepResult result;
  std::vector<std::optional<MixingMatrix>> previous_q(np);
  std::size_t cell = 0;
  for (const std::size_t q : config.q_values) {
    const AdjacencyMatrix pattern = nearest_neighbor_adjacency(field, q);
    std::optional<MixingMatrix> previous_p;
    for (std::size_t pi = 0; pi < np; ++pi, ++cell) {
      const double p0 = config.p0_values[pi];
      std::vector<MixingMatrix> warm;
      if (previous_q[pi]) warm.emplace_back(previous_q[pi]->matrix(), pattern);
      if (previous_p) warm.push_back(*previous_p);

      SolverConfig solver = config.solver;
      solver.power_budget = p0;
      SolverResult solved = optimize(model, pattern, solver, warm);

      SweepRow row;
      row.q = q;
      row.p0 = p0;
      row.distortion = solved.report.distortion;
      row.surrogate = solved.report.surrogate;
      row.lower_bound = solved.report.lower_bound;
      row.power_used = solved.report.power;
      row.converged = solved.converged;
      row.restart_index = solved.restart_index;
      row.mc_mse = std::numeric_limits<double>::quiet_NaN();
      row.mc_stderr = std::numeric_limits<double>::quiet_NaN();
      if (config.validation.enabled && solved.report.rank_ok) {
        const TrialBatch batch = run_trials(solved.w_opt, model, config.validation.num_trials,
                                            config.validation.seed + cell);
        row.mc_mse = batch.empirical_mse_total;
        row.mc_stderr = batch.mse_stderr;
      }
      result.rows.push_back(row);
      result.solutions.push_back(solved.w_opt);
      previous_q[pi] = solved.w_opt;
      previous_p = solved.w_opt;
    }
  }
  return result;
}

SolverResult solve_cell(const ExperimentConfig& config, std::size_t q, double p0) {
  config.validate();
  const SensorField field = build_field(config.field);
  const SystemModel model = SystemModel::build(field, config.covariance);
  SolverConfig solver = config.solver;
  solver.power_budget = p0;
  return optimize(model, nearest_neighbor_adjacency(field, q), solver);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_csv(const SweepResult& result) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const SweepRow& r : result.rows) {
    out += std::to_string(r.q);
    for (double v : {r.p0, r.distortion, r.surrogate, r.lower_bound, r.power_used}) {
      out += ',';
      out += format_double(v);
    }
    out += r.converged ? ",true," : ",false,";
    out += std::to_string(r.restart_index);
    out += ',';
    out += format_double(r.mc_mse);
    out += ',';
    out += format_double(r.mc_stderr);
    out += '\n';
  }
  return out;
}

std::string format_manifest(const ExperimentConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit_results(const SweepResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_text_file(dir / "results.csv", format_csv(result));
  write_text_file(dir / "manifest.json", format_manifest(config));
}

json mixing_to_json(const MixingMatrix& w, std::size_t q) {
  json rows = json::array();
  for (Eigen::Index j = 0; j < w.matrix().rows(); ++j) {
    json row = json::array();
    for (Eigen::Index i = 0; i < w.matrix().cols(); ++i) row.push_back(w.matrix()(j, i));
    rows.push_back(row);
  }
  return json{{"q", q}, {"rows", w.rows()}, {"cols", w.cols()}, {"entries", rows}};
}

MixingMatrix mixing_from_json(const json& j, const SensorField& field) {
  check_object(j, "mixing");
  check_keys(j, {"q", "rows", "cols", "entries"}, "mixing");
  if (!j.contains("q") || !j.contains("entries")) {
    field_error("mixing", "needs 'q' and 'entries'");
  }
  const auto q = as<std::size_t>(j["q"], "mixing.q");
  const json& entries = j["entries"];
  if (!entries.is_array()) field_error("mixing.entries", "expected an array of rows");
  const auto m = static_cast<Eigen::Index>(field.num_connected());
  const auto k = static_cast<Eigen::Index>(field.num_sensors());
  if (static_cast<Eigen::Index>(entries.size()) != m) {
    field_error("mixing.entries", "expected " + std::to_string(m) + " rows");
  }
  Eigen::MatrixXd w(m, k);
  for (Eigen::Index r = 0; r < m; ++r) {
    const std::string rpath = "mixing.entries[" + std::to_string(r) + "]";
    const auto vals = read_list<double>(entries[static_cast<std::size_t>(r)], rpath);
    if (static_cast<Eigen::Index>(vals.size()) != k) {
      field_error(rpath, "expected " + std::to_string(k) + " columns");
    }
    for (Eigen::Index c = 0; c < k; ++c) w(r, c) = vals[static_cast<std::size_t>(c)];
  }
  if (q >= field.num_sensors()) field_error("mixing.q", "must be below k");
  try {
    return MixingMatrix(std::move(w), nearest_neighbor_adjacency(field, q));
  } catch (const ContractError& e) {
    field_error("mixing.entries", e.what());
  }
}

}  // namespace wsn
