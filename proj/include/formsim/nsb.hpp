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
// Null-space-based task composition for two vessels: collision avoidance,
// formation keeping and barycenter line-of-sight path following, plus the
// conversion of task velocities into per-vessel surge, heading and yaw-rate
// references.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "formsim/angles.hpp"
#include "formsim/error.hpp"
#include "formsim/path.hpp"

namespace formsim {

using Vector4d = Eigen::Vector4d;
using Matrix4d = Eigen::Matrix4d;

inline Eigen::Matrix2d rotation2(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix2d R;
  R << c, -s, s, c;
  return R;
}

// Moore-Penrose pseudoinverse. Singular values below
// max(rows, cols) * sigma_max * eps are treated as zero.
inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& J) {
  if (J.size() == 0) return Eigen::MatrixXd::Zero(J.cols(), J.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol = std::max(J.rows(), J.cols()) *
                     (sv.size() ? sv(0) : 0.0) *
                     std::numeric_limits<double>::epsilon();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// I - J^+ J; identity for an empty Jacobian.
inline Matrix4d null_projector(const Eigen::MatrixXd& J) {
  if (J.rows() == 0) return Matrix4d::Identity();
  return Matrix4d::Identity() - pinv(J) * J;
}

// v1 + N1 (v2 + N2 v3).
inline Vector4d compose(const Vector4d& v_d1, const Eigen::MatrixXd& J1,
                        const Vector4d& v_d2, const Eigen::MatrixXd& J2,
                        const Vector4d& v_d3) {
  return v_d1 + null_projector(J1) * (v_d2 + null_projector(J2) * v_d3);
}

struct TaskConfig {
  double sigma_ca_d = 20.0;
  double lambda_ca = 1.0;
  double ca_hysteresis = 0.5;
  Eigen::Vector2d sigma_f_d_p{0.0, 20.0};
  Eigen::Vector2d lambda_f_p{2.5, 0.3};  // diagonal of the path-frame gain

  void validate() const {
    if (!(sigma_ca_d > 0.0) || !(lambda_ca > 0.0) || !(ca_hysteresis >= 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "collision avoidance settings");
    }
    if (!(lambda_f_p.minCoeff() > 0.0) || !sigma_f_d_p.allFinite()) {
      throw Error(ErrorCode::kInvalidConfig, "formation settings");
    }
  }
};

struct CaTask {
  double sigma = 0.0;
  bool active = false;
  Eigen::MatrixXd J;        // active rows only, 0x4 when inactive
  Vector4d v_d = Vector4d::Zero();
};

// Each vessel treats the other as the obstacle, giving one row per vessel.
// Once active, the task stays active until the distance exceeds the
// threshold by the hysteresis band.
inline CaTask task_ca(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                      const TaskConfig& cfg, bool was_active = false) {
  CaTask t;
  const Eigen::Vector2d d = p1 - p2;
  t.sigma = d.norm();
  if (t.sigma < 1e-6) {
    throw Error(ErrorCode::kDegenerateGeometry, "vessels coincide");
  }
  const double off = cfg.sigma_ca_d + (was_active ? cfg.ca_hysteresis : 0.0);
  t.active = t.sigma < off;
  if (!t.active) {
    t.J.resize(0, 4);
    return t;
  }
  t.J = Eigen::MatrixXd::Zero(2, 4);
  t.J.block<1, 2>(0, 0) = d.transpose() / t.sigma;
  t.J.block<1, 2>(1, 2) = -d.transpose() / t.sigma;
  const Eigen::Vector2d rate =
      Eigen::Vector2d::Constant(cfg.lambda_ca * (cfg.sigma_ca_d - t.sigma));
  t.v_d = pinv(t.J) * rate;
  return t;
}

struct FormationTask {
  Eigen::Vector2d sigma = Eigen::Vector2d::Zero();
  Eigen::Vector2d sigma_d = Eigen::Vector2d::Zero();
  Eigen::Vector2d sigma_d_dot = Eigen::Vector2d::Zero();
  Eigen::Matrix<double, 2, 4> J = Eigen::Matrix<double, 2, 4>::Zero();
  Eigen::Matrix2d Lambda = Eigen::Matrix2d::Zero();
  Vector4d v_d = Vector4d::Zero();

  Eigen::Vector2d error() const { return sigma_d - sigma; }
};

// sigma = p1 - p_b. The desired value and gain are given in the path frame
// and rotate with it; gamma_rate is the tangent angle rate.
inline FormationTask task_formation(const Eigen::Vector2d& p1,
                                    const Eigen::Vector2d& p2, double gamma_p,
                                    double gamma_rate, const TaskConfig& cfg) {
  FormationTask t;
  t.sigma = 0.5 * (p1 - p2);
  t.J.block<2, 2>(0, 0) = 0.5 * Eigen::Matrix2d::Identity();
  t.J.block<2, 2>(0, 2) = -0.5 * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d R = rotation2(gamma_p);
  Eigen::Matrix2d S;
  S << 0.0, -1.0, 1.0, 0.0;
  t.sigma_d = R * cfg.sigma_f_d_p;
  t.sigma_d_dot = gamma_rate * S * t.sigma_d;
  t.Lambda = R * cfg.lambda_f_p.asDiagonal() * R.transpose();
  t.v_d = pinv(t.J) * (t.sigma_d_dot + t.Lambda * t.error());
  return t;
}

inline double lookahead(const PathErrors& e, double mu) {
  return std::sqrt(mu + e.x_pb * e.x_pb + e.y_pb * e.y_pb);
}

inline double los_course(const PathErrors& e, double gamma_p, double mu) {
  return gamma_p - std::atan(e.y_pb / lookahead(e, mu));
}

inline Eigen::Vector2d barycenter_task_velocity(double chi_bd, double U_d) {
  return U_d * Eigen::Vector2d(std::cos(chi_bd), std::sin(chi_bd));
}

inline Vector4d stack(const Eigen::Vector2d& v) {
  Vector4d out;
  out << v, v;
  return out;
}

struct DecomposedRefs {
  double u_d = 0.0;
  double psi_d = 0.0;
  double chi_nsb = 0.0;
  bool degenerate = false;
};

// Surge and heading references from a desired inertial velocity. chi is the
// vessel's course. psi_d is returned on the branch nearest psi so that it is
// continuous along a tracking trajectory. For a vanishing reference the
// previous heading reference is held and u_d = 0.
inline DecomposedRefs decompose_refs(const Eigen::Vector2d& v_nsb, double chi,
                                     double psi, double v,
                                     double psi_d_prev) {
  DecomposedRefs out;
  const double U = v_nsb.norm();
  if (U < 1e-6) {
    out.degenerate = true;
    out.psi_d = psi_d_prev;
    out.chi_nsb = chi;
    return out;
  }
  out.chi_nsb = std::atan2(v_nsb.y(), v_nsb.x());
  out.u_d = 0.5 * U * (1.0 + std::cos(out.chi_nsb - chi));
  const double raw = out.chi_nsb - std::atan2(v, out.u_d);
  out.psi_d = psi + wrap_angle(raw - psi);
  return out;
}

// Path-frame barycenter error rates.
struct ErrorRates {
  double x_dot = 0.0;
  double y_dot = 0.0;
};

// From the measured barycenter velocity and the path-frame arc-length rate.
inline ErrorRates error_rates(const PathErrors& e, double gamma_p,
                              double kappa, double s_dot,
                              const Eigen::Vector2d& barycenter_velocity) {
  const double c = std::cos(gamma_p);
  const double s = std::sin(gamma_p);
  const Eigen::Vector2d& w = barycenter_velocity;
  ErrorRates r;
  r.x_dot = c * w.x() + s * w.y() - s_dot * (1.0 - kappa * e.y_pb);
  r.y_dot = -s * w.x() + c * w.y() - kappa * s_dot * e.x_pb;
  return r;
}

struct YawRateInputs {
  double kappa = 0.0;
  double s_dot = 0.0;   // arc-length rate of the path frame
  double u_d = 0.0;
  double u_d_dot = 0.0;
  double v = 0.0;
  double v_dot = 0.0;   // model or measured sway acceleration
  PathErrors errs;
  ErrorRates rates;
  double mu = 50.0;
};

inline double desired_yaw_rate(const YawRateInputs& in) {
  const double den = in.u_d * in.u_d + in.v * in.v;
  if (den < 1e-9) {
    throw Error(ErrorCode::kDegenerateReference, "u_d^2 + v^2 vanishes");
  }
  const double x = in.errs.x_pb;
  const double y = in.errs.y_pb;
  const double delta = lookahead(in.errs, in.mu);
  const double delta_dot = (x * in.rates.x_dot + y * in.rates.y_dot) / delta;
  return in.kappa * in.s_dot - (in.u_d * in.v_dot - in.u_d_dot * in.v) / den -
         (delta * in.rates.y_dot - y * delta_dot) / (delta * delta + y * y);
}

// Per-vessel perturbation of the nominal cross-track dynamics caused by
// autopilot errors.
inline double interconnection_G2(double psi_tilde, double u_tilde, double psi,
                                 double U_d, double gamma_p, double y_pb,
                                 double delta) {
  const double a = std::atan(y_pb / delta);
  return u_tilde * std::sin(psi - gamma_p) +
         U_d * (1.0 - std::cos(psi_tilde)) * std::sin(a) +
         U_d * std::cos(a) * std::sin(psi_tilde);
}

struct AutopilotErrorSample {
  double psi_tilde = 0.0;
  double u_tilde = 0.0;
  double psi = 0.0;
  double U_d = 0.0;
};

inline double interconnection_G1(const AutopilotErrorSample& v1,
                                 const AutopilotErrorSample& v2,
                                 double gamma_p, double y_pb, double delta) {
  return 0.5 * (interconnection_G2(v1.psi_tilde, v1.u_tilde, v1.psi, v1.U_d,
                                   gamma_p, y_pb, delta) +
                interconnection_G2(v2.psi_tilde, v2.u_tilde, v2.psi, v2.U_d,
                                   gamma_p, y_pb, delta));
}

// Cross-track rate of the nominal (error-free) closed loop.
inline double nominal_crosstrack_rate(const PathErrors& e, double U_d1,
                                      double U_d2, double kappa, double s_dot,
                                      double mu) {
  const double delta = lookahead(e, mu);
  return -0.5 * (U_d1 + U_d2) * e.y_pb /
             std::sqrt(delta * delta + e.y_pb * e.y_pb) -
         kappa * s_dot * e.x_pb;
}

}  // namespace formsim
