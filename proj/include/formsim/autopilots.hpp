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
// Surge and heading autopilots: adaptive feedback-linearizing sliding-mode
// controllers, and a plain PI/PD pair used as a baseline.
#pragma once

#include <algorithm>
#include <cmath>

#include "formsim/angles.hpp"
#include "formsim/error.hpp"
#include "formsim/vessel_model.hpp"

namespace formsim {

enum class SwitchMode { kBoundaryLayer, kStrict };

struct AutopilotGains {
  double k_psi = 1.2;
  double k_r = 1.3;
  double lambda = 100.0;
  double k_d = 10.0;
  double gamma_r = 5.0;
  double k_u = 0.1;
  double k_e = 0.1;
  double gamma_u = 1.0;
  SwitchMode switch_mode = SwitchMode::kBoundaryLayer;
  double epsilon = 0.1;  // boundary-layer width

  void validate() const {
    for (double g : {k_psi, k_r, lambda, k_d, gamma_r, k_u, k_e, gamma_u}) {
      if (!(g > 0.0) || !std::isfinite(g)) {
        throw Error(ErrorCode::kInvalidConfig, "autopilot gains must be > 0");
      }
    }
    if (switch_mode == SwitchMode::kBoundaryLayer && !(epsilon > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "boundary layer must be > 0");
    }
  }

  double sw(double s) const {
    if (switch_mode == SwitchMode::kStrict) return sign(s);
    return std::clamp(s / epsilon, -1.0, 1.0);
  }
};

struct AdaptiveState {
  Vector5d theta_hat_u = Vector5d::Zero();
  Vector5d theta_hat_r = Vector5d::Zero();
};

struct AutopilotRefs {
  double u_d = 0.0;
  double u_d_dot = 0.0;
  double psi_d = 0.0;
  double psi_d_dot = 0.0;
  double psi_d_ddot = 0.0;
};

// Heading error, its rate and the sliding variable s = e_dot + lambda e.
struct HeadingErrors {
  double e = 0.0;
  double e_dot = 0.0;
  double s = 0.0;
};

inline HeadingErrors heading_errors(const VesselState& st,
                                    const AutopilotRefs& refs,
                                    const AutopilotGains& g) {
  HeadingErrors h;
  h.e = wrap_angle(st.psi - refs.psi_d);
  h.e_dot = st.r - refs.psi_d_dot;
  h.s = h.e_dot + g.lambda * h.e;
  return h;
}

inline double heading_control(const VesselState& st, const AutopilotRefs& refs,
                              const AutopilotGains& g, const AdaptiveState& ad,
                              const VesselParams& p) {
  const HeadingErrors h = heading_errors(st, refs, g);
  return -coeff_Fr(st.u, st.v, st.r, p) -
         phi_r(st.u, st.v, st.r, st.psi, p).dot(ad.theta_hat_r) +
         refs.psi_d_ddot - (g.k_psi + g.lambda * g.k_r) * h.e -
         (g.k_r + g.lambda) * h.e_dot - g.k_d * g.sw(h.s);
}

inline Vector5d heading_adapt(const VesselState& st, const AutopilotRefs& refs,
                              const AutopilotGains& g, const VesselParams& p) {
  const HeadingErrors h = heading_errors(st, refs, g);
  return g.gamma_r * phi_r(st.u, st.v, st.r, st.psi, p) * h.s;
}

inline double surge_control(const VesselState& st, const AutopilotRefs& refs,
                            const AutopilotGains& g, const AdaptiveState& ad,
                            const VesselParams& p) {
  const double m11 = p.m11();
  const double u_tilde = st.u - refs.u_d;
  return -(p.m22() * st.v + p.m23() * st.r) * st.r / m11 +
         p.d11 / m11 * refs.u_d -
         phi_u(st.psi, st.r, st.u, p).dot(ad.theta_hat_u) + refs.u_d_dot +
         p.d11_q / m11 * st.u * st.u - g.k_u * u_tilde - g.k_e * g.sw(u_tilde);
}

inline Vector5d surge_adapt(const VesselState& st, const AutopilotRefs& refs,
                            const AutopilotGains& g, const VesselParams& p) {
  return g.gamma_u * phi_u(st.psi, st.r, st.u, p) * (st.u - refs.u_d);
}

struct BaselineGains {
  double kp_u = 1.0;
  double ki_u = 0.1;
  double kp_psi = 2.0;
  double kd_psi = 5.0;
  double integral_max = 20.0;  // anti-windup clamp on the surge integral
  // Feed the yaw-rate reference into the derivative term. Off by default:
  // the derivative then acts on the measured yaw rate and the controller
  // consumes only the surge and heading setpoints.
  bool rate_feedforward = false;

  void validate() const {
    for (double g : {kp_u, kp_psi, kd_psi, integral_max}) {
      if (!(g > 0.0) || !std::isfinite(g)) {
        throw Error(ErrorCode::kInvalidConfig, "baseline gains must be > 0");
      }
    }
    if (!(ki_u >= 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "baseline ki_u must be >= 0");
    }
  }
};

// PI on surge error, PD on heading error. surge_integral is the running
// integral of u - u_d, owned by the caller.
inline ControlInput baseline_control(const VesselState& st,
                                     const AutopilotRefs& refs,
                                     double surge_integral,
                                     const BaselineGains& g) {
  const double u_tilde = st.u - refs.u_d;
  const double integral =
      std::clamp(surge_integral, -g.integral_max, g.integral_max);
  const double e = wrap_angle(st.psi - refs.psi_d);
  const double r_ref = g.rate_feedforward ? refs.psi_d_dot : 0.0;
  return {-g.kp_u * u_tilde - g.ki_u * integral,
          -g.kp_psi * e - g.kd_psi * (st.r - r_ref)};
}

// Integral rate with conditional integration at the clamp.
inline double baseline_integral_rate(const VesselState& st,
                                     const AutopilotRefs& refs,
                                     double surge_integral,
                                     const BaselineGains& g) {
  const double u_tilde = st.u - refs.u_d;
  if (surge_integral >= g.integral_max && u_tilde > 0.0) return 0.0;
  if (surge_integral <= -g.integral_max && u_tilde < 0.0) return 0.0;
  return u_tilde;
}

}  // namespace formsim
