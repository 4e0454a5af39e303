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
// Run artifacts: the per-step CSV log and the summary JSON.
#pragma once

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "formsim/closed_loop.hpp"
#include "formsim/scenario.hpp"

namespace formsim {

inline constexpr const char* kLogSchema = "formsim.log/1";
inline constexpr const char* kSummarySchema = "formsim.summary/1";

inline const std::vector<std::string>& log_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"t", "theta", "theta_clamped"};
    for (int i = 1; i <= 2; ++i) {
      const std::string s = std::to_string(i);
      for (const char* f : {"x", "y", "psi", "u", "v", "r"}) {
        c.push_back(std::string(f) + s);
      }
    }
    for (const char* f : {"x_pb", "y_pb", "gamma_p", "kappa", "s_dot",
                          "ca_sigma", "ca_active", "sigma_f_err_x",
                          "sigma_f_err_y"}) {
      c.push_back(f);
    }
    for (int i = 1; i <= 2; ++i) {
      const std::string s = std::to_string(i);
      for (const char* f : {"u_d", "psi_d", "r_d", "U_d", "tau_u", "tau_r",
                            "theta_hat_u_norm", "theta_hat_r_norm"}) {
        c.push_back(std::string(f) + s);
      }
    }
    for (const char* f : {"V", "G1", "G1_eff"}) c.push_back(f);
    return c;
  }();
  return cols;
}

inline std::vector<double> log_values(const LogRecord& r) {
  std::vector<double> v = {r.t, r.theta, r.theta_clamped ? 1.0 : 0.0};
  for (const auto& s : r.vessels) {
    v.insert(v.end(), {s.x, s.y, s.psi, s.u, s.v, s.r});
  }
  v.insert(v.end(), {r.x_pb, r.y_pb, r.gamma_p, r.kappa, r.s_dot, r.ca_sigma,
                     r.ca_active ? 1.0 : 0.0, r.formation_error.x(),
                     r.formation_error.y()});
  for (int i = 0; i < 2; ++i) {
    v.insert(v.end(), {r.u_d[i], r.psi_d[i], r.r_d[i], r.U_d[i], r.tau_u[i],
                       r.tau_r[i], r.theta_hat_u_norm[i],
                       r.theta_hat_r_norm[i]});
  }
  v.insert(v.end(), {r.V, r.G1, r.G1_eff});
  return v;
}

inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline void write_csv(std::ostream& out, const std::vector<LogRecord>& log) {
  const auto& cols = log_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? "," : "") << cols[i];
  }
  out << '\n';
  for (const auto& r : log) {
    const auto v = log_values(r);
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << (i ? "," : "") << format_number(v[i]);
    }
    out << '\n';
  }
}

inline nlohmann::json conditions_to_json(const ConditionReport& c) {
  nlohmann::json j;
  j["kappa_max"] = c.kappa_max;
  j["y_min"] = c.params.y_min;
  j["x_max"] = c.params.x_max;
  j["ratio"] = c.ratio;
  j["bound_mu"] = std::isfinite(c.bound_mu) ? nlohmann::json(c.bound_mu)
                                            : nlohmann::json(nullptr);
  j["params_ok"] = c.params.ok;
  j["violations"] = c.params.violations;
  j["kappa_ok"] = c.kappa_ok;
  j["mu_ok"] = c.mu_ok;
  j["ok"] = c.ok();
  return j;
}

inline nlohmann::json number_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["convergence_time"] = number_or_null(m.convergence_time);
  if (m.decay) {
    j["exp_rate_fit"] = m.decay->rate;
    j["decay_window"] = {m.decay->t_begin, m.decay->t_end};
  } else {
    j["exp_rate_fit"] = nullptr;
    j["decay_window"] = nullptr;
  }
  j["max_sway"] = m.max_sway;
  j["formation_rms"] = m.formation_rms;
  j["crosstrack_rms"] = m.crosstrack_rms;
  j["alongtrack_rms"] = m.alongtrack_rms;
  j["max_abs_x_pb"] = m.max_abs_x_pb;
  j["max_abs_y_pb"] = m.max_abs_y_pb;
  j["mean_y_pb"] = m.mean_y_pb;
  j["max_theta_hat_norm"] = m.max_theta_hat_norm;
  return j;
}

inline nlohmann::json summary_json(const Scenario& sc, const RunResult& res,
                                   const Metrics* metrics) {
  nlohmann::json j;
  j["schema"] = kSummarySchema;
  j["scenario"] = sc.name;
  j["mode"] = sc.config.mode == AutopilotMode::kAdaptive ? "adaptive"
                                                           : "baseline";
  j["vdot"] = sc.config.vdot == VdotSource::kTruth ? "truth" : "sensor";
  j["conditions"] = conditions_to_json(res.conditions);
  j["ok"] = res.ok;
  j["steps"] = res.log.empty() ? 0 : res.log.size() - 1;
  if (!res.ok) {
    j["error"] = res.error;
    j["failed_step"] = res.failed_step;
  }
  j["metrics"] = metrics ? metrics_to_json(*metrics) : nlohmann::json(nullptr);
  return j;
}

}  // namespace formsim
