// Copyright 2026 The formsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// formsim: validate, run and sweep formation path-following scenarios.
//
// Exit codes: 0 success, 1 runtime failure, 2 input error.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "formsim/closed_loop.hpp"
#include "formsim/io.hpp"
#include "formsim/scenario.hpp"

namespace fs = std::filesystem;
using formsim::Error;
using formsim::ErrorCode;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kInputError = 2;

struct Overrides {
  std::string mode;
  std::string vdot;
  double t_end = -1.0;
};

void apply(const Overrides& o, formsim::SimConfig& cfg) {
  if (o.mode == "adaptive") cfg.mode = formsim::AutopilotMode::kAdaptive;
  if (o.mode == "baseline") cfg.mode = formsim::AutopilotMode::kBaseline;
  if (o.vdot == "truth") cfg.vdot = formsim::VdotSource::kTruth;
  if (o.vdot == "sensor") cfg.vdot = formsim::VdotSource::kSensor;
  if (o.t_end >= 0.0) cfg.t_end = o.t_end;
}

void print_conditions(const formsim::ConditionReport& c, double mu) {
  std::printf("kappa_max = %.6g\n", c.kappa_max);
  std::printf("Y_min = %.10g\n", c.params.y_min);
  std::printf("X_max = %.10g\n", c.params.x_max);
  std::printf("Y_min/X_max = %.10g\n", c.ratio);
  std::printf("curvature condition: %s (kappa_max %s Y_min/X_max)\n",
              c.kappa_ok ? "pass" : "FAIL", c.kappa_ok ? "<" : ">=");
  if (std::isfinite(c.bound_mu)) {
    std::printf("mu bound = %.6f\n", c.bound_mu);
  } else {
    std::printf("mu bound = inf\n");
  }
  std::printf("lookahead condition: %s (mu = %.6g)\n",
              c.mu_ok ? "pass" : "FAIL", mu);
  for (const auto& v : c.params.violations) {
    std::printf("vessel: %s\n", v.c_str());
  }
  std::printf("result: %s\n", c.ok() ? "pass" : "FAIL");
}

int cmd_validate(const std::string& file) {
  const formsim::Scenario sc = formsim::load_scenario(file);
  const auto report = formsim::check_conditions(sc.config);
  std::printf("scenario: %s\n", sc.name.c_str());
  print_conditions(report, sc.config.mu);
  return report.ok() ? kOk : kRuntimeFailure;
}

int cmd_run(const std::string& file, const std::string& out_dir,
            const Overrides& o, bool force) {
  formsim::Scenario sc = formsim::load_scenario(file);
  apply(o, sc.config);
  sc.config.validate();
  const auto report = formsim::check_conditions(sc.config);
  if (!report.ok() && !force) {
    print_conditions(report, sc.config.mu);
    std::fprintf(stderr, "formsim: conditions fail; use --force to run\n");
    return kRuntimeFailure;
  }
  const formsim::RunResult res = formsim::run(sc.config, true);

  fs::create_directories(out_dir);
  {
    std::ofstream csv(fs::path(out_dir) / "log.csv");
    formsim::write_csv(csv, res.log);
  }
  std::optional<formsim::Metrics> metrics;
  if (!res.log.empty()) metrics = formsim::compute_metrics(res.log);
  const auto summary =
      formsim::summary_json(sc, res, metrics ? &*metrics : nullptr);
  {
    std::ofstream js(fs::path(out_dir) / "summary.json");
    js << summary.dump(2) << '\n';
  }
  if (!res.ok) {
    std::fprintf(stderr, "formsim: run stopped at step %ld: %s\n",
                 res.failed_step, res.error.c_str());
    return kRuntimeFailure;
  }
  std::printf("%s\n", summary.at("metrics").dump(2).c_str());
  return kOk;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) {
      throw Error(ErrorCode::kInvalidConfig, "bad value \"" + item + "\"");
    }
    out.push_back(v);
  }
  return out;
}

unsigned thread_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FORMSIM_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = static_cast<unsigned>(cap);
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  formsim::Metrics metrics;
};

int cmd_sweep(const std::string& file, const std::string& param,
              const std::string& values_text, const std::string& out_file,
              const Overrides& o, bool force) {
  const formsim::Scenario base = formsim::load_scenario(file);
  const std::vector<double> values = parse_values(values_text);

  // Resolve every configuration up front so input errors exit before any
  // simulation starts. The pointer is checked even for an empty list.
  formsim::with_parameter(base.document, param, 0.0);
  std::vector<formsim::SimConfig> configs;
  for (double v : values) {
    auto doc = formsim::with_parameter(base.document, param, v);
    formsim::Scenario sc =
        formsim::scenario_from_json(doc, fs::path(file).parent_path());
    apply(o, sc.config);
    sc.config.validate();
    configs.push_back(sc.config);
  }

  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      SweepRow& row = rows[k];
      row.value = values[k];
      try {
        const auto res = formsim::run(configs[k], force);
        row.ok = res.ok;
        row.error = res.error;
        if (!res.log.empty()) row.metrics = formsim::compute_metrics(res.log);
      } catch (const Error& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = thread_count(rows.size());
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream file_out;
  if (!out_file.empty()) file_out.open(out_file);
  std::ostream& out = out_file.empty() ? std::cout : file_out;
  out << "value,ok,convergence_time,exp_rate_fit,max_sway,formation_rms,"
         "crosstrack_rms,max_abs_x_pb,max_abs_y_pb,error\n";
  bool all_ok = true;
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    all_ok = all_ok && r.ok;
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << formsim::format_number(r.value) << ',' << (r.ok ? 1 : 0) << ','
        << formsim::format_number(m.convergence_time) << ','
        << (m.decay ? formsim::format_number(m.decay->rate) : "nan") << ','
        << formsim::format_number(m.max_sway) << ','
        << formsim::format_number(m.formation_rms) << ','
        << formsim::format_number(m.crosstrack_rms) << ','
        << formsim::format_number(m.max_abs_x_pb) << ','
        << formsim::format_number(m.max_abs_y_pb) << ',' << err << '\n';
  }
  return all_ok ? kOk : kRuntimeFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-vessel formation path-following simulator"};
  app.require_subcommand(1);

  std::string file;
  std::string out_dir = "out";
  std::string param;
  std::string values;
  std::string sweep_out;
  bool force = false;
  Overrides o;

  auto* validate = app.add_subcommand("validate", "check feasibility conditions");
  validate->add_option("scenario", file, "scenario JSON file")->required();

  auto* run = app.add_subcommand("run", "simulate and write log.csv and summary.json");
  run->add_option("scenario", file, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--mode", o.mode, "autopilot mode")
      ->check(CLI::IsMember({"adaptive", "baseline"}));
  run->add_option("--vdot", o.vdot, "sway acceleration source")
      ->check(CLI::IsMember({"truth", "sensor"}));
  run->add_option("--t-end", o.t_end, "override the horizon, s");
  run->add_flag("--force", force, "run even if the conditions fail");

  auto* sweep = app.add_subcommand("sweep", "run one scenario per parameter value");
  sweep->add_option("scenario", file, "scenario JSON file")->required();
  sweep->add_option("--param", param, "JSON pointer, e.g. /guidance/mu")
      ->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--out", sweep_out, "write the table to a file");
  sweep->add_option("--mode", o.mode, "autopilot mode")
      ->check(CLI::IsMember({"adaptive", "baseline"}));
  sweep->add_option("--vdot", o.vdot, "sway acceleration source")
      ->check(CLI::IsMember({"truth", "sensor"}));
  sweep->add_option("--t-end", o.t_end, "override the horizon, s");
  sweep->add_flag("--force", force, "run even if the conditions fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*validate) return cmd_validate(file);
    if (*run) return cmd_run(file, out_dir, o, force);
    if (*sweep) return cmd_sweep(file, param, values, sweep_out, o, force);
  } catch (const Error& e) {
    std::fprintf(stderr, "formsim: %s\n", e.what());
    return e.code() == ErrorCode::kInvalidConfig ? kInputError
                                                 : kRuntimeFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "formsim: %s\n", e.what());
    return kRuntimeFailure;
  }
  return kInputError;
}
