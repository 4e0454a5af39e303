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
// Scenario files: versioned JSON documents resolved into a SimConfig.
// Unknown keys are rejected so typos do not silently fall back to defaults.
#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "formsim/closed_loop.hpp"
#include "formsim/error.hpp"

namespace formsim {

inline constexpr const char* kScenarioSchema = "formsim.scenario/1";

struct Scenario {
  std::string name;
  std::string description;
  SimConfig config;
  nlohmann::json expected = nlohmann::json::object();
  nlohmann::json document;  // the parsed input, kept for sweeps
};

namespace detail {

using nlohmann::json;

inline void allow_keys(const json& j, const std::string& where,
                       std::initializer_list<const char*> keys) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, where + ": expected an object");
  }
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) {
      throw Error(ErrorCode::kInvalidConfig,
                  where + ": unknown key \"" + k + "\"");
    }
  }
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) {
    throw Error(ErrorCode::kInvalidConfig, where + ": expected a number");
  }
  return j.get<double>();
}

inline void read(const json& j, const char* key, const std::string& where,
                 double& out) {
  if (j.contains(key)) out = number(j.at(key), where + "." + key);
}

inline void read(const json& j, const char* key, const std::string& where,
                 bool& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_boolean()) {
    throw Error(ErrorCode::kInvalidConfig,
                where + "." + key + ": expected a boolean");
  }
  out = j.at(key).get<bool>();
}

inline std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) {
    throw Error(ErrorCode::kInvalidConfig, where + ": expected a string");
  }
  return j.get<std::string>();
}

inline Eigen::Vector2d pair(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorCode::kInvalidConfig, where + ": expected [a, b]");
  }
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

#define FORMSIM_VESSEL_FIELDS(X)                                              \
  X(m11_rb) X(m22_rb) X(m23_rb) X(m33_rb) X(m11_a) X(m22_a) X(m23_a)          \
  X(m33_a) X(d11) X(d11_q) X(d22) X(d23) X(d32) X(d33) X(b11) X(b22) X(b23)

inline VesselParams vessel_from_json(const json& j, const std::string& where) {
  allow_keys(j, where,
             {"name", "units",
#define X(f) #f,
              FORMSIM_VESSEL_FIELDS(X)
#undef X
             });
  VesselParams p;
#define X(f)                                                          \
  if (!j.contains(#f)) {                                              \
    throw Error(ErrorCode::kInvalidConfig, where + ": missing " #f); \
  }                                                                   \
  p.f = number(j.at(#f), where + "." #f);
  FORMSIM_VESSEL_FIELDS(X)
#undef X
  return p;
}

inline json vessel_to_json(const VesselParams& p) {
  json j;
#define X(f) j[#f] = p.f;
  FORMSIM_VESSEL_FIELDS(X)
#undef X
  return j;
}

#undef FORMSIM_VESSEL_FIELDS

inline PathSpec path_from_json(const json& j) {
  const std::string w = "path";
  if (!j.is_object() || !j.contains("type")) {
    throw Error(ErrorCode::kInvalidConfig, "path: missing type");
  }
  const std::string type = text(j.at("type"), "path.type");
  double theta_min = 0.0;
  double theta_max = 0.0;
  auto range = [&] {
    if (!j.contains("theta_min") || !j.contains("theta_max")) {
      throw Error(ErrorCode::kInvalidConfig, "path: theta_min/theta_max");
    }
    read(j, "theta_min", w, theta_min);
    read(j, "theta_max", w, theta_max);
  };
  if (type == "sinusoid") {
    allow_keys(j, w, {"type", "amplitude", "omega", "theta_min", "theta_max"});
    SinusoidPath k;
    read(j, "amplitude", w, k.amplitude);
    read(j, "omega", w, k.omega);
    range();
    return PathSpec(k, theta_min, theta_max);
  }
  if (type == "straight") {
    allow_keys(j, w, {"type", "x0", "y0", "heading", "theta_min", "theta_max"});
    StraightPath k;
    read(j, "x0", w, k.x0);
    read(j, "y0", w, k.y0);
    read(j, "heading", w, k.heading);
    range();
    return PathSpec(k, theta_min, theta_max);
  }
  if (type == "circle") {
    allow_keys(j, w, {"type", "cx", "cy", "radius", "start_angle",
                      "theta_min", "theta_max"});
    CirclePath k;
    read(j, "cx", w, k.cx);
    read(j, "cy", w, k.cy);
    read(j, "radius", w, k.radius);
    read(j, "start_angle", w, k.start_angle);
    if (k.radius == 0.0) {
      throw Error(ErrorCode::kInvalidConfig, "path.radius must be nonzero");
    }
    range();
    return PathSpec(k, theta_min, theta_max);
  }
  if (type == "polyline") {
    allow_keys(j, w, {"type", "waypoints", "radius"});
    if (!j.contains("waypoints") || !j.at("waypoints").is_array()) {
      throw Error(ErrorCode::kInvalidConfig, "path.waypoints: expected array");
    }
    std::vector<Eigen::Vector2d> pts;
    for (std::size_t i = 0; i < j.at("waypoints").size(); ++i) {
      pts.push_back(pair(j.at("waypoints")[i],
                         "path.waypoints[" + std::to_string(i) + "]"));
    }
    double radius = 0.0;
    read(j, "radius", w, radius);
    return PathSpec::polyline(std::move(pts), radius);
  }
  throw Error(ErrorCode::kInvalidConfig, "path.type: unknown \"" + type + "\"");
}

inline json path_to_json(const PathSpec& path) {
  json j;
  std::visit(
      [&j](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SinusoidPath>) {
          j = {{"type", "sinusoid"}, {"amplitude", k.amplitude},
               {"omega", k.omega}};
        } else if constexpr (std::is_same_v<T, StraightPath>) {
          j = {{"type", "straight"}, {"x0", k.x0}, {"y0", k.y0},
               {"heading", k.heading}};
        } else if constexpr (std::is_same_v<T, CirclePath>) {
          j = {{"type", "circle"}, {"cx", k.cx}, {"cy", k.cy},
               {"radius", k.radius}, {"start_angle", k.start_angle}};
        } else {
          json pts = json::array();
          for (const auto& p : k.waypoints()) pts.push_back({p.x(), p.y()});
          j = {{"type", "polyline"}, {"waypoints", pts},
               {"radius", k.radius()}};
        }
      },
      path.kind());
  if (j.at("type") != "polyline") {
    j["theta_min"] = path.theta_min();
    j["theta_max"] = path.theta_max();
  }
  return j;
}

inline VesselState vessel_state_from_json(const json& j,
                                          const std::string& where) {
  allow_keys(j, where, {"x", "y", "psi", "u", "v", "r"});
  VesselState s;
  read(j, "x", where, s.x);
  read(j, "y", where, s.y);
  read(j, "psi", where, s.psi);
  read(j, "u", where, s.u);
  read(j, "v", where, s.v);
  read(j, "r", where, s.r);
  return s;
}

inline Vector5d vector5(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 5) {
    throw Error(ErrorCode::kInvalidConfig, where + ": expected 5 numbers");
  }
  Vector5d v;
  for (int i = 0; i < 5; ++i) v(i) = number(j[i], where);
  return v;
}

// 1-based line and column of a byte offset.
inline std::string position(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
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

}  // namespace detail

inline nlohmann::json parse_json_text(const std::string& text,
                                      const std::string& origin) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig,
                origin + ": JSON parse error at " +
                    detail::position(text, e.byte) + ": " + e.what());
  }
}

inline std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kInvalidConfig,
                "cannot open " + file.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline VesselParams load_vessel_file(const std::filesystem::path& file) {
  const auto j = parse_json_text(read_text_file(file), file.string());
  return detail::vessel_from_json(j, file.filename().string());
}

// base_dir resolves relative vessel file references.
inline Scenario scenario_from_json(const nlohmann::json& doc,
                                   const std::filesystem::path& base_dir = {}) {
  using detail::allow_keys;
  using detail::read;
  allow_keys(doc, "scenario",
             {"schema", "name", "description", "sim", "vessel", "current",
              "path", "guidance", "tasks", "autopilot", "initial",
              "expected"});
  if (!doc.contains("schema") || doc.at("schema") != kScenarioSchema) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("scenario: schema must be \"") + kScenarioSchema +
                    "\"");
  }
  Scenario sc;
  sc.document = doc;
  if (doc.contains("name")) sc.name = detail::text(doc.at("name"), "name");
  if (doc.contains("description")) {
    sc.description = detail::text(doc.at("description"), "description");
  }
  SimConfig& cfg = sc.config;

  if (doc.contains("sim")) {
    const auto& j = doc.at("sim");
    allow_keys(j, "sim", {"dt", "t_end", "seed", "vdot", "vdot_noise",
                          "filter_tau"});
    read(j, "dt", "sim", cfg.dt);
    read(j, "t_end", "sim", cfg.t_end);
    read(j, "vdot_noise", "sim", cfg.vdot_noise);
    read(j, "filter_tau", "sim", cfg.filter_tau);
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) {
        throw Error(ErrorCode::kInvalidConfig, "sim.seed: expected unsigned");
      }
      cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("vdot")) {
      const std::string v = detail::text(j.at("vdot"), "sim.vdot");
      if (v == "truth") {
        cfg.vdot = VdotSource::kTruth;
      } else if (v == "sensor") {
        cfg.vdot = VdotSource::kSensor;
      } else {
        throw Error(ErrorCode::kInvalidConfig, "sim.vdot: truth|sensor");
      }
    }
  }

  if (doc.contains("vessel")) {
    const auto& j = doc.at("vessel");
    if (j.is_string()) {
      if (j.get<std::string>() != "default") {
        throw Error(ErrorCode::kInvalidConfig,
                    "vessel: only \"default\" is built in");
      }
      cfg.vessel = default_vessel_params();
    } else if (j.is_object() && j.contains("file")) {
      allow_keys(j, "vessel", {"file"});
      std::filesystem::path f = detail::text(j.at("file"), "vessel.file");
      if (f.is_relative()) f = base_dir / f;
      cfg.vessel = load_vessel_file(f);
    } else {
      cfg.vessel = detail::vessel_from_json(j, "vessel");
    }
  }

  if (doc.contains("current")) {
    const auto& j = doc.at("current");
    allow_keys(j, "current", {"vx", "vy", "v_max"});
    read(j, "vx", "current", cfg.current.vx);
    read(j, "vy", "current", cfg.current.vy);
    read(j, "v_max", "current", cfg.v_max);
  }

  if (doc.contains("path")) cfg.path = detail::path_from_json(doc.at("path"));

  if (doc.contains("guidance")) {
    const auto& j = doc.at("guidance");
    allow_keys(j, "guidance", {"u_d", "k_theta", "mu"});
    read(j, "u_d", "guidance", cfg.u_d);
    read(j, "k_theta", "guidance", cfg.k_theta);
    read(j, "mu", "guidance", cfg.mu);
  }

  if (doc.contains("tasks")) {
    const auto& j = doc.at("tasks");
    allow_keys(j, "tasks", {"sigma_ca_d", "lambda_ca", "ca_hysteresis",
                            "sigma_f_d_p", "lambda_f_p"});
    read(j, "sigma_ca_d", "tasks", cfg.tasks.sigma_ca_d);
    read(j, "lambda_ca", "tasks", cfg.tasks.lambda_ca);
    read(j, "ca_hysteresis", "tasks", cfg.tasks.ca_hysteresis);
    if (j.contains("sigma_f_d_p")) {
      cfg.tasks.sigma_f_d_p =
          detail::pair(j.at("sigma_f_d_p"), "tasks.sigma_f_d_p");
    }
    if (j.contains("lambda_f_p")) {
      cfg.tasks.lambda_f_p = detail::pair(j.at("lambda_f_p"), "tasks.lambda_f_p");
    }
  }

  if (doc.contains("autopilot")) {
    const auto& j = doc.at("autopilot");
    allow_keys(j, "autopilot", {"mode", "adaptive", "baseline"});
    if (j.contains("mode")) {
      const std::string m = detail::text(j.at("mode"), "autopilot.mode");
      if (m == "adaptive") {
        cfg.mode = AutopilotMode::kAdaptive;
      } else if (m == "baseline") {
        cfg.mode = AutopilotMode::kBaseline;
      } else {
        throw Error(ErrorCode::kInvalidConfig,
                    "autopilot.mode: adaptive|baseline");
      }
    }
    if (j.contains("adaptive")) {
      const auto& a = j.at("adaptive");
      const std::string w = "autopilot.adaptive";
      allow_keys(a, w, {"k_psi", "k_r", "lambda", "k_d", "gamma_r", "k_u",
                        "k_e", "gamma_u", "switch", "epsilon"});
      auto& g = cfg.gains;
      read(a, "k_psi", w, g.k_psi);
      read(a, "k_r", w, g.k_r);
      read(a, "lambda", w, g.lambda);
      read(a, "k_d", w, g.k_d);
      read(a, "gamma_r", w, g.gamma_r);
      read(a, "k_u", w, g.k_u);
      read(a, "k_e", w, g.k_e);
      read(a, "gamma_u", w, g.gamma_u);
      read(a, "epsilon", w, g.epsilon);
      if (a.contains("switch")) {
        const std::string s = detail::text(a.at("switch"), w + ".switch");
        if (s == "boundary_layer") {
          g.switch_mode = SwitchMode::kBoundaryLayer;
        } else if (s == "strict") {
          g.switch_mode = SwitchMode::kStrict;
        } else {
          throw Error(ErrorCode::kInvalidConfig,
                      w + ".switch: boundary_layer|strict");
        }
      }
    }
    if (j.contains("baseline")) {
      const auto& b = j.at("baseline");
      const std::string w = "autopilot.baseline";
      allow_keys(b, w, {"kp_u", "ki_u", "kp_psi", "kd_psi", "integral_max",
                        "rate_feedforward"});
      auto& g = cfg.baseline;
      read(b, "kp_u", w, g.kp_u);
      read(b, "ki_u", w, g.ki_u);
      read(b, "kp_psi", w, g.kp_psi);
      read(b, "kd_psi", w, g.kd_psi);
      read(b, "integral_max", w, g.integral_max);
      read(b, "rate_feedforward", w, g.rate_feedforward);
    }
  }

  // Initial conditions: either a formation placed about the path or
  // explicit vessel states.
  double theta_ref = 0.0;
  double offset = 20.0;
  double half_spacing = 10.0;
  double surge = cfg.u_d;
  std::optional<double> theta0;
  bool explicit_states = false;
  if (doc.contains("initial")) {
    const auto& j = doc.at("initial");
    allow_keys(j, "initial", {"theta_ref", "offset", "half_spacing", "surge",
                              "theta0", "vessels", "theta_hat_u",
                              "theta_hat_r"});
    read(j, "theta_ref", "initial", theta_ref);
    read(j, "offset", "initial", offset);
    read(j, "half_spacing", "initial", half_spacing);
    read(j, "surge", "initial", surge);
    if (j.contains("theta0")) theta0 = detail::number(j.at("theta0"), "initial.theta0");
    if (j.contains("vessels")) {
      const auto& v = j.at("vessels");
      if (!v.is_array() || v.size() != 2) {
        throw Error(ErrorCode::kInvalidConfig,
                    "initial.vessels: expected two states");
      }
      if (!theta0) {
        throw Error(ErrorCode::kInvalidConfig,
                    "initial.vessels requires initial.theta0");
      }
      for (int i = 0; i < 2; ++i) {
        cfg.initial[i] = detail::vessel_state_from_json(
            v[i], "initial.vessels[" + std::to_string(i) + "]");
      }
      explicit_states = true;
    }
    for (int i = 0; i < 2; ++i) {
      for (const char* key : {"theta_hat_u", "theta_hat_r"}) {
        if (!j.contains(key)) continue;
        const auto& arr = j.at(key);
        if (!arr.is_array() || arr.size() != 2) {
          throw Error(ErrorCode::kInvalidConfig,
                      std::string("initial.") + key + ": two 5-vectors");
        }
        const Vector5d v = detail::vector5(arr[i], std::string("initial.") + key);
        (std::string(key) == "theta_hat_u" ? cfg.warm_start[i].theta_hat_u
                                           : cfg.warm_start[i].theta_hat_r) = v;
      }
    }
  }
  if (!explicit_states) {
    if (!cfg.path.in_range(theta_ref)) {
      throw Error(ErrorCode::kInvalidConfig, "initial.theta_ref out of range");
    }
    set_formation_start(cfg, theta_ref, offset, half_spacing, surge);
  }
  if (theta0) cfg.theta0 = *theta0;

  if (doc.contains("expected")) {
    if (!doc.at("expected").is_object()) {
      throw Error(ErrorCode::kInvalidConfig, "expected: expected an object");
    }
    sc.expected = doc.at("expected");
  }

  cfg.validate();
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& file) {
  const auto doc = parse_json_text(read_text_file(file), file.string());
  return scenario_from_json(doc, file.parent_path());
}

// Replaces the number at a JSON pointer, which must address an existing
// numeric field.
inline nlohmann::json with_parameter(nlohmann::json doc,
                                     const std::string& pointer,
                                     double value) {
  nlohmann::json::json_pointer ptr;
  try {
    ptr = nlohmann::json::json_pointer(pointer);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig,
                "bad parameter path \"" + pointer + "\": " + e.what());
  }
  if (!doc.contains(ptr)) {
    throw Error(ErrorCode::kInvalidConfig,
                "unknown parameter path \"" + pointer + "\"");
  }
  if (!doc.at(ptr).is_number()) {
    throw Error(ErrorCode::kInvalidConfig,
                "parameter \"" + pointer + "\" is not numeric");
  }
  doc[ptr] = value;
  return doc;
}

}  // namespace formsim
