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
// 3-DOF maneuvering model of a port-starboard symmetric surface vessel in
// component form. The sway-yaw subsystem is expressed in a body frame shifted
// along the centerline so that the rudder channel produces no direct sway
// acceleration; the simulator therefore works in the normalized input
// channels (tau_u, tau_r).
//
// Every current-dependent coefficient below is obtained by eliminating the
// added-mass acceleration of a constant irrotational current from
//
//   M_RB nu' + C_RB(nu) nu = -M_A nu_r' - C_A(nu_r) nu_r - D(nu_r) nu_r + B f
//
// with nu_r = nu - R(psi)^T V_c. The rigid-body surge and sway masses are
// required to be equal, otherwise the sway row is not of the form
// X r + Y v_r.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "formsim/error.hpp"

namespace formsim {

using Vector5d = Eigen::Matrix<double, 5, 1>;

struct VesselParams {
  // Rigid-body mass and inertia (kg, kg m, kg m^2).
  double m11_rb = 0.0;
  double m22_rb = 0.0;
  double m23_rb = 0.0;
  double m33_rb = 0.0;
  // Added mass analogues.
  double m11_a = 0.0;
  double m22_a = 0.0;
  double m23_a = 0.0;
  double m33_a = 0.0;
  // Linear damping (kg/s, kg m/s, kg m^2/s) and quadratic surge damping (kg/m).
  double d11 = 0.0;
  double d11_q = 0.0;
  double d22 = 0.0;
  double d23 = 0.0;
  double d32 = 0.0;
  double d33 = 0.0;
  // Actuator configuration B = [b11 0; 0 b22; 0 b23].
  double b11 = 0.0;
  double b22 = 0.0;
  double b23 = 0.0;

  double m11() const { return m11_rb + m11_a; }
  double m22() const { return m22_rb + m22_a; }
  double m23() const { return m23_rb + m23_a; }
  double m33() const { return m33_rb + m33_a; }
  double gamma() const { return m22() * m33() - m23() * m23(); }

  bool operator==(const VesselParams&) const = default;
};

// Generic ~10 m port-starboard symmetric vessel. d22 is the tuned
// coefficient, see docs/vessel_params.md and tune_sway_damping().
inline VesselParams default_vessel_params() {
  VesselParams p;
  p.m11_rb = 3000.0;
  p.m22_rb = 3000.0;
  p.m23_rb = 600.0;
  p.m33_rb = 25000.0;
  p.m11_a = 300.0;
  p.m22_a = 1800.0;
  p.m23_a = 400.0;
  p.m33_a = 6000.0;
  p.d11 = 200.0;
  p.d11_q = 60.0;
  p.d22 = 1389.721924257;
  p.d23 = 500.0;
  p.d32 = 300.0;
  p.d33 = 8000.0;
  p.b11 = 1.0;
  p.b23 = 1.0;
  p.b22 = p.m23() / p.m33();
  return p;
}

struct VesselState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;  // unwrapped
  double u = 0.0;
  double v = 0.0;
  double r = 0.0;

  bool operator==(const VesselState&) const = default;
};

struct OceanCurrent {
  double vx = 0.0;
  double vy = 0.0;

  double norm() const { return std::hypot(vx, vy); }
};

struct ControlInput {
  double tau_u = 0.0;
  double tau_r = 0.0;
};

struct BodyCurrent {
  double u_c = 0.0;
  double v_c = 0.0;
};

// Rotation from body to inertial frame.
inline Eigen::Matrix3d rotation(double psi) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  Eigen::Matrix3d rot;
  // clang-format off
  rot << c, -s, 0.0,
         s,  c, 0.0,
       0.0, 0.0, 1.0;
  // clang-format on
  return rot;
}

inline BodyCurrent current_in_body(const OceanCurrent& current, double psi) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  return {c * current.vx + s * current.vy, -s * current.vx + c * current.vy};
}

// theta = [Vx, Vy, Vx^2, Vy^2, Vx Vy].
inline Vector5d current_parameters(const OceanCurrent& current) {
  Vector5d theta;
  theta << current.vx, current.vy, current.vx * current.vx,
      current.vy * current.vy, current.vx * current.vy;
  return theta;
}

// Coefficient of r in the sway equation. Affine in (u, u_c).
inline double coeff_X(double u, double u_c, const VesselParams& p) {
  const double u_r = u - u_c;
  return (p.m33() * (-p.d23 - p.m11() * u_r - (p.m11_rb + p.m22_a) * u_c) +
          p.m23() * p.d33 + p.m23() * p.m23() * u) /
         p.gamma();
}

// Coefficient of v_r in the sway equation. Affine in (u, u_c).
inline double coeff_Y(double u, double u_c, const VesselParams& p) {
  return (-p.m33() * p.d22 + p.m23() * p.d32 +
          p.m23() * (p.m22_a - p.m11_a) * (u - u_c)) /
         p.gamma();
}

// Current-free part of the yaw acceleration.
inline double coeff_Fr(double u, double v, double r, const VesselParams& p) {
  const double g = p.gamma();
  const double mA = p.m11_a - p.m22_a;
  return (p.m23() * (p.m11() * u * r + p.d22 * v + p.d23 * r) +
          p.m22() * (-(p.m23() * r) * u + mA * u * v - p.d32 * v - p.d33 * r)) /
         g;
}

// Surge regressor; phi_u^T theta is the current-induced surge acceleration.
inline Vector5d phi_u(double psi, double r, double u, const VesselParams& p) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  const double m11 = p.m11();
  const double lin = (p.d11 + 2.0 * p.d11_q * u) / m11;
  const double munk = (p.m11_a - p.m22_a) / m11;
  Vector5d phi;
  phi << lin * c - munk * r * s, lin * s + munk * r * c,
      -p.d11_q * c * c / m11, -p.d11_q * s * s / m11,
      -2.0 * p.d11_q * c * s / m11;
  return phi;
}

// Yaw regressor; phi_r^T theta is the current-induced yaw acceleration.
inline Vector5d phi_r(double u, double v, double r, double psi,
                      const VesselParams& p) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  const double g = p.gamma();
  const double mA = p.m11_a - p.m22_a;
  // Coefficients of u_c and v_c.
  const double a1 = -(p.m22() * mA * v + p.m23() * mA * r) / g;
  const double a2 = (p.m22() * (p.d32 - mA * u) - p.m23() * p.d22) / g;
  const double quad = p.m22() * mA / g;
  Vector5d phi;
  phi << c * a1 - s * a2, s * a1 + c * a2, -quad * c * s, quad * c * s,
      quad * (1.0 - 2.0 * s * s);
  return phi;
}

// v' = X(u, u_c) r + Y(u, u_c) (v - v_c).
inline double sway_acceleration(const VesselState& s,
                                const OceanCurrent& current,
                                const VesselParams& p) {
  const BodyCurrent bc = current_in_body(current, s.psi);
  return coeff_X(s.u, bc.u_c, p) * s.r + coeff_Y(s.u, bc.u_c, p) * (s.v - bc.v_c);
}

inline VesselState state_derivative(const VesselState& s,
                                    const ControlInput& inp,
                                    const OceanCurrent& current,
                                    const VesselParams& p) {
  const double c = std::cos(s.psi);
  const double sn = std::sin(s.psi);
  const Vector5d theta = current_parameters(current);
  const double m11 = p.m11();

  VesselState d;
  d.x = c * s.u - sn * s.v;
  d.y = sn * s.u + c * s.v;
  d.psi = s.r;
  d.u = -(p.d11 + p.d11_q * s.u) / m11 * s.u +
        (p.m22() * s.v + p.m23() * s.r) / m11 * s.r +
        phi_u(s.psi, s.r, s.u, p).dot(theta) + inp.tau_u;
  d.v = sway_acceleration(s, current, p);
  d.r = coeff_Fr(s.u, s.v, s.r, p) + phi_r(s.u, s.v, s.r, s.psi, p).dot(theta) +
        inp.tau_r;

  for (double value : {d.x, d.y, d.psi, d.u, d.v, d.r}) {
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::kNonFinite, "vessel state derivative");
    }
  }
  return d;
}

// Sway acceleration per unit rudder relative to yaw acceleration per unit
// rudder, i.e. (M^-1 B)(1,1) / (M^-1 B)(2,1).
inline double decoupling_residual(const VesselParams& p) {
  const double sway = (p.m33() * p.b22 - p.m23() * p.b23) / p.gamma();
  const double yaw = (p.m22() * p.b23 - p.m23() * p.b22) / p.gamma();
  if (yaw == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(sway / yaw);
}

struct GridSpec {
  double u_margin = 0.5;  // m/s above U_d
  double du = 1e-3;       // m/s
  double dc = 1e-2;       // m/s
};

struct ParamsReport {
  double y_min = 0.0;
  double x_max = 0.0;
  double gamma = 0.0;
  double decoupling_residual = 0.0;
  bool ok = false;
  std::vector<std::string> violations;

  double ratio() const { return y_min / x_max; }
};

namespace detail {

inline int grid_count(double span, double step) {
  return std::max(1, static_cast<int>(std::ceil(span / step - 1e-9)));
}

}  // namespace detail

// Y_min = min(-Y), X_max = max|X| over u in [0, U_d + margin] and
// |u_c| <= V_max. Endpoints are always on the grid.
inline ParamsReport validate_params(const VesselParams& p, double U_d,
                                    double V_max, const GridSpec& grid = {}) {
  ParamsReport report;
  report.gamma = p.gamma();
  report.decoupling_residual = decoupling_residual(p);

  auto violate = [&report](std::string what) {
    report.violations.push_back(std::move(what));
  };
  if (!(p.m11() > 0.0 && p.m22() > 0.0 && p.m33() > 0.0)) {
    violate("mass matrix diagonal must be positive");
  }
  if (!(report.gamma > 0.0)) violate("Gamma = m22 m33 - m23^2 must be positive");
  if (p.m11_rb != p.m22_rb) {
    violate("rigid-body surge and sway mass must be equal");
  }
  if (!(report.decoupling_residual < 1e-8)) {
    violate("actuator configuration does not decouple sway from rudder");
  }
  if (!report.violations.empty()) {
    report.ok = false;
    return report;
  }

  const double u_hi = U_d + grid.u_margin;
  const int nu = detail::grid_count(u_hi, grid.du);
  const int nc = detail::grid_count(2.0 * V_max, grid.dc);
  double y_min = std::numeric_limits<double>::infinity();
  double x_max = 0.0;
  for (int i = 0; i <= nu; ++i) {
    const double u = u_hi * i / nu;
    for (int j = 0; j <= nc; ++j) {
      const double uc = -V_max + 2.0 * V_max * j / nc;
      y_min = std::min(y_min, -coeff_Y(u, uc, p));
      x_max = std::max(x_max, std::abs(coeff_X(u, uc, p)));
    }
  }
  report.y_min = y_min;
  report.x_max = x_max;
  if (!(y_min > 0.0)) violate("sway damping Y(u, u_c) must stay negative");
  if (!(x_max > 0.0)) violate("X(u, u_c) vanishes on the operating range");
  report.ok = report.violations.empty();
  return report;
}

inline void require_sway_stability(const VesselParams& p, double U_d,
                                   double V_max) {
  const ParamsReport report = validate_params(p, U_d, V_max);
  if (!report.ok) {
    std::string msg;
    for (const auto& v : report.violations) msg += v + "; ";
    throw Error(ErrorCode::kAssumptionViolated, msg);
  }
}

// Bisection on d22 so that validate_params reports Y_min / X_max == target.
// The ratio is increasing in d22 because Y is affine in d22 with negative
// slope and X does not depend on it.
inline double tune_sway_damping(VesselParams p, double target_ratio,
                                double U_d, double V_max,
                                const GridSpec& grid = {}) {
  auto ratio = [&](double d22) {
    p.d22 = d22;
    const ParamsReport r = validate_params(p, U_d, V_max, grid);
    return r.ok ? r.ratio() : -1.0;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (ratio(hi) < target_ratio) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) < target_ratio ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace formsim
