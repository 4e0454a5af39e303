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
// Reference implementations shared by the unit tests and the acceptance
// suite.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "formsim/vessel_model.hpp"

namespace formsim::oracle {

// Assembled matrix-form dynamics in relative velocity, solved for the
// acceleration. Independent of the component-form coefficients.
inline Eigen::Vector3d matrix_form_accel(const VesselState& s, const OceanCurrent& c,
                                  const VesselParams& p, double thrust,
                                  double rudder) {
  const double cp = std::cos(s.psi);
  const double sp = std::sin(s.psi);
  const double uc = cp * c.vx + sp * c.vy;
  const double vc = -sp * c.vx + cp * c.vy;
  const Eigen::Vector3d nu(s.u, s.v, s.r);
  const Eigen::Vector3d nu_r(s.u - uc, s.v - vc, s.r);
  const Eigen::Vector3d nu_c_dot(s.r * vc, -s.r * uc, 0.0);

  Eigen::Matrix3d M_rb, M_a, C_rb, C_a, D;
  M_rb << p.m11_rb, 0, 0, 0, p.m22_rb, p.m23_rb, 0, p.m23_rb, p.m33_rb;
  M_a << p.m11_a, 0, 0, 0, p.m22_a, p.m23_a, 0, p.m23_a, p.m33_a;
  const double u = nu.x(), v = nu.y(), r = nu.z();
  C_rb << 0, 0, -p.m22_rb * v - p.m23_rb * r,
      0, 0, p.m11_rb * u,
      p.m22_rb * v + p.m23_rb * r, -p.m11_rb * u, 0;
  const double ur = nu_r.x(), vr = nu_r.y();
  C_a << 0, 0, -p.m22_a * vr - p.m23_a * r,
      0, 0, p.m11_a * ur,
      p.m22_a * vr + p.m23_a * r, -p.m11_a * ur, 0;
  D << p.d11 + p.d11_q * ur, 0, 0, 0, p.d22, p.d23, 0, p.d32, p.d33;
  Eigen::Matrix<double, 3, 2> B;
  B << p.b11, 0, 0, p.b22, 0, p.b23;

  const Eigen::Vector3d rhs = B * Eigen::Vector2d(thrust, rudder) -
                              C_rb * nu - C_a * nu_r - D * nu_r +
                              M_a * nu_c_dot;
  return (M_rb + M_a).lu().solve(rhs);
}

inline VesselParams perturbed(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> f(0.7, 1.3);
  VesselParams p = default_vessel_params();
  p.m11_rb *= f(rng);
  p.m22_rb = p.m11_rb;
  p.m23_rb *= f(rng);
  p.m33_rb *= f(rng);
  p.m11_a *= f(rng);
  p.m22_a *= f(rng);
  p.m23_a *= f(rng);
  p.m33_a *= f(rng);
  p.d11 *= f(rng);
  p.d11_q *= f(rng);
  p.d22 *= f(rng);
  p.d23 *= f(rng);
  p.d32 *= f(rng);
  p.d33 *= f(rng);
  p.b11 *= f(rng);
  p.b23 *= f(rng);
  p.b22 = p.m23() * p.b23 / p.m33();
  return p;
}

// Actuator forces mapped to the surge and yaw accelerations of the
// component form.
inline ControlInput body_inputs(const VesselParams& p, double thrust,
                                double rudder) {
  return {p.b11 * thrust / p.m11(),
          (p.m22() * p.b23 - p.m23() * p.b22) * rudder / p.gamma()};
}

}  // namespace formsim::oracle
