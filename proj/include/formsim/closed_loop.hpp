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
// Two-vessel closed loop: guidance, autopilots and plant integrated with a
// fixed-step RK4 scheme, plus feasibility checks, Lyapunov diagnostics and
// run metrics.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "formsim/angles.hpp"
#include "formsim/autopilots.hpp"
#include "formsim/error.hpp"
#include "formsim/nsb.hpp"
#include "formsim/path.hpp"
#include "formsim/rk4.hpp"
#include "formsim/vessel_model.hpp"

namespace formsim {

enum class AutopilotMode { kAdaptive, kBaseline };
enum class VdotSource { kTruth, kSensor };

struct SimConfig {
  double dt = 0.01;
  double t_end = 600.0;
  VesselParams vessel = default_vessel_params();
  OceanCurrent current{-0.707, -0.707};
  double v_max = 1.0;  // current magnitude bound used by the feasibility check
  PathSpec path = PathSpec::sinusoid(300.0, 0.005, -500.0, 5000.0);
  TaskConfig tasks;
  AutopilotMode mode = AutopilotMode::kAdaptive;
  AutopilotGains gains;
  BaselineGains baseline;
  double u_d = 3.0;
  double k_theta = 1.0;
  double mu = 50.0;
  VdotSource vdot = VdotSource::kTruth;
  double vdot_noise = 0.0;  // std of the sway-acceleration measurement, m/s^2
  std::uint64_t seed = 1;
  double filter_tau = 0.1;  // reference differentiation filters, s
  std::array<VesselState, 2> initial{};
  double theta0 = 0.0;
  std::array<AdaptiveState, 2> warm_start{};

  void validate() const {
    if (!(dt > 0.0 && dt <= 0.1)) {
      throw Error(ErrorCode::kInvalidConfig, "dt must lie in (0, 0.1]");
    }
    if (!(t_end >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "t_end < 0");
    if (!(u_d > 0.0) || !(k_theta > 0.0) || !(mu > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "u_d, k_theta and mu must be > 0");
    }
    if (!(filter_tau > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "filter_tau must be > 0");
    }
    if (!(vdot_noise >= 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "vdot_noise must be >= 0");
    }
    if (!(v_max >= 0.0) || current.norm() > v_max + 1e-12) {
      throw Error(ErrorCode::kInvalidConfig, "current exceeds v_max");
    }
    tasks.validate();
    gains.validate();
    baseline.validate();
    if (!path.in_range(theta0)) {
      throw Error(ErrorCode::kInvalidConfig, "theta0 outside the path range");
    }
  }
};

// Places the barycenter at a signed lateral offset from the path point at
// theta_ref (positive to the left), the vessels at +/- half_spacing across
// the path, aligned with the tangent and moving at the given surge speed.
// theta0 is chosen as the closest path point to the barycenter.
inline void set_formation_start(SimConfig& cfg, double theta_ref,
                                double offset, double half_spacing,
                                double surge) {
  const PathSample ps = cfg.path.sample(theta_ref);
  const Eigen::Vector2d normal(-std::sin(ps.gamma), std::cos(ps.gamma));
  const Eigen::Vector2d p_b = ps.point + offset * normal;
  for (int i = 0; i < 2; ++i) {
    const double side = i == 0 ? 1.0 : -1.0;
    const Eigen::Vector2d p = p_b + side * half_spacing * normal;
    cfg.initial[i] = VesselState{p.x(), p.y(), ps.gamma, surge, 0.0, 0.0};
  }
  cfg.theta0 = cfg.path.closest_theta(p_b);
}

// Packed continuous state: theta, then per vessel the six plant states,
// both parameter estimates, the r_d and u_d filter states and the surge
// integral of the baseline controller.
struct StateLayout {
  static constexpr int kPerVessel = 6 + 5 + 5 + 3;
  static constexpr int kSize = 1 + 2 * kPerVessel;
  static constexpr int kTheta = 0;
  static constexpr int base(int i) { return 1 + i * kPerVessel; }
  static constexpr int plant(int i) { return base(i); }
  static constexpr int theta_hat_u(int i) { return base(i) + 6; }
  static constexpr int theta_hat_r(int i) { return base(i) + 11; }
  static constexpr int rd_filter(int i) { return base(i) + 16; }
  static constexpr int ud_filter(int i) { return base(i) + 17; }
  static constexpr int integral(int i) { return base(i) + 18; }
};

inline VesselState vessel_from(const Eigen::VectorXd& x, int i) {
  const int b = StateLayout::plant(i);
  return {x(b), x(b + 1), x(b + 2), x(b + 3), x(b + 4), x(b + 5)};
}

inline void vessel_into(Eigen::VectorXd& x, int i, const VesselState& s) {
  const int b = StateLayout::plant(i);
  x.segment<6>(b) << s.x, s.y, s.psi, s.u, s.v, s.r;
}

// Values held between integration steps.
struct DiscreteState {
  std::array<double, 2> chi_hold{};
  std::array<double, 2> psi_d_hold{};
  bool ca_active = false;
  std::array<double, 2> vdot_noise{};
};

struct VesselEval {
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // inertial
  double U = 0.0;
  double chi = 0.0;
  Eigen::Vector2d v_nsb = Eigen::Vector2d::Zero();
  bool ref_degenerate = false;
  double u_d = 0.0;
  double u_d_dot = 0.0;
  double psi_d = 0.0;
  double r_d = 0.0;
  double psi_d_ddot = 0.0;
  double v_dot = 0.0;
  double U_d = 0.0;  // sqrt(u_d^2 + v^2)
  double u_tilde = 0.0;
  double psi_tilde = 0.0;
  ControlInput tau;
};

struct Evaluation {
  Eigen::VectorXd deriv;
  PathSample path;
  PathErrors errs;
  ErrorRates rates;
  double s_dot = 0.0;
  double theta_dot = 0.0;
  double delta = 0.0;
  double chi_bd = 0.0;
  double U_d_b = 0.0;
  CaTask ca;
  FormationTask formation;
  std::array<VesselEval, 2> vessels;
  double G1 = 0.0;      // interconnection term from the autopilot errors
  double G1_eff = 0.0;  // measured cross-track rate minus its nominal part
};

inline Evaluation evaluate(const Eigen::VectorXd& x, const DiscreteState& ds,
                           const SimConfig& cfg) {
  using L = StateLayout;
  Evaluation ev;
  ev.deriv = Eigen::VectorXd::Zero(L::kSize);
  const std::array<VesselState, 2> st{vessel_from(x, 0), vessel_from(x, 1)};

  for (int i = 0; i < 2; ++i) {
    auto& ve = ev.vessels[i];
    const double c = std::cos(st[i].psi);
    const double s = std::sin(st[i].psi);
    ve.velocity = {c * st[i].u - s * st[i].v, s * st[i].u + c * st[i].v};
    ve.U = ve.velocity.norm();
    ve.chi = ve.U > 1e-3 ? std::atan2(ve.velocity.y(), ve.velocity.x())
                         : ds.chi_hold[i];
  }

  const Eigen::Vector2d p1(st[0].x, st[0].y);
  const Eigen::Vector2d p2(st[1].x, st[1].y);
  const Eigen::Vector2d p_b = 0.5 * (p1 + p2);
  ev.path = cfg.path.sample(x(L::kTheta));
  ev.errs = path_errors(ev.path.point, ev.path.gamma, p_b);
  ev.s_dot = along_path_speed(ev.errs, ev.path.gamma, ev.vessels[0].U,
                              ev.vessels[0].chi, ev.vessels[1].U,
                              ev.vessels[1].chi, cfg.k_theta);
  ev.theta_dot = ev.s_dot / ev.path.speed;
  const double gamma_rate = ev.path.kappa * ev.s_dot;

  ev.ca = task_ca(p1, p2, cfg.tasks, ds.ca_active);
  ev.formation = task_formation(p1, p2, ev.path.gamma, gamma_rate, cfg.tasks);
  ev.delta = lookahead(ev.errs, cfg.mu);
  ev.chi_bd = los_course(ev.errs, ev.path.gamma, cfg.mu);
  const double v_bar = 0.5 * (st[0].v + st[1].v);
  ev.U_d_b = std::sqrt(cfg.u_d * cfg.u_d + v_bar * v_bar);
  const Vector4d v_nsb =
      compose(ev.ca.v_d, ev.ca.J, ev.formation.v_d, ev.formation.J,
              stack(barycenter_task_velocity(ev.chi_bd, ev.U_d_b)));

  const Eigen::Vector2d w_b =
      0.5 * (ev.vessels[0].velocity + ev.vessels[1].velocity);
  ev.rates = error_rates(ev.errs, ev.path.gamma, ev.path.kappa, ev.s_dot, w_b);
  ev.deriv(L::kTheta) = ev.theta_dot;

  const double tau_f = cfg.filter_tau;
  for (int i = 0; i < 2; ++i) {
    auto& ve = ev.vessels[i];
    const VesselState& s = st[i];
    ve.v_nsb = v_nsb.segment<2>(2 * i);
    const DecomposedRefs dr =
        decompose_refs(ve.v_nsb, ve.chi, s.psi, s.v, ds.psi_d_hold[i]);
    ve.ref_degenerate = dr.degenerate;
    ve.u_d = dr.u_d;
    ve.psi_d = dr.psi_d;
    ve.u_d_dot = (ve.u_d - x(L::ud_filter(i))) / tau_f;
    if (cfg.vdot == VdotSource::kTruth) {
      ve.v_dot = sway_acceleration(s, cfg.current, cfg.vessel);
    } else {
      ve.v_dot = state_derivative(s, {}, cfg.current, cfg.vessel).v +
                 ds.vdot_noise[i];
    }

    YawRateInputs yi;
    yi.kappa = ev.path.kappa;
    yi.s_dot = ev.s_dot;
    yi.u_d = ve.u_d;
    yi.u_d_dot = ve.u_d_dot;
    yi.v = s.v;
    yi.v_dot = ve.v_dot;
    yi.errs = ev.errs;
    yi.rates = ev.rates;
    yi.mu = cfg.mu;
    ve.r_d = desired_yaw_rate(yi);
    ve.psi_d_ddot = (ve.r_d - x(L::rd_filter(i))) / tau_f;

    AutopilotRefs refs{ve.u_d, ve.u_d_dot, ve.psi_d, ve.r_d, ve.psi_d_ddot};
    ve.u_tilde = s.u - ve.u_d;
    ve.psi_tilde = wrap_angle(s.psi - ve.psi_d);
    ve.U_d = std::sqrt(ve.u_d * ve.u_d + s.v * s.v);

    if (cfg.mode == AutopilotMode::kAdaptive) {
      AdaptiveState ad;
      ad.theta_hat_u = x.segment<5>(L::theta_hat_u(i));
      ad.theta_hat_r = x.segment<5>(L::theta_hat_r(i));
      ve.tau.tau_u = surge_control(s, refs, cfg.gains, ad, cfg.vessel);
      ve.tau.tau_r = heading_control(s, refs, cfg.gains, ad, cfg.vessel);
      ev.deriv.segment<5>(L::theta_hat_u(i)) =
          surge_adapt(s, refs, cfg.gains, cfg.vessel);
      ev.deriv.segment<5>(L::theta_hat_r(i)) =
          heading_adapt(s, refs, cfg.gains, cfg.vessel);
    } else {
      const double integral = x(L::integral(i));
      ve.tau = baseline_control(s, refs, integral, cfg.baseline);
      ev.deriv(L::integral(i)) =
          baseline_integral_rate(s, refs, integral, cfg.baseline);
    }

    const VesselState d = state_derivative(s, ve.tau, cfg.current, cfg.vessel);
    ev.deriv.segment<6>(L::plant(i)) << d.x, d.y, d.psi, d.u, d.v, d.r;
    ev.deriv(L::rd_filter(i)) = (ve.r_d - x(L::rd_filter(i))) / tau_f;
    ev.deriv(L::ud_filter(i)) = ve.u_d_dot;
  }

  AutopilotErrorSample a[2];
  for (int i = 0; i < 2; ++i) {
    a[i] = {ev.vessels[i].psi_tilde, ev.vessels[i].u_tilde, st[i].psi,
            ev.vessels[i].U_d};
  }
  ev.G1 = interconnection_G1(a[0], a[1], ev.path.gamma, ev.errs.y_pb,
                             ev.delta);
  ev.G1_eff = ev.rates.y_dot -
              nominal_crosstrack_rate(ev.errs, ev.vessels[0].U_d,
                                      ev.vessels[1].U_d, ev.path.kappa,
                                      ev.s_dot, cfg.mu);
  if (!ev.deriv.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "closed-loop derivative");
  }
  return ev;
}

struct ConditionReport {
  ParamsReport params;
  double kappa_max = 0.0;
  double ratio = 0.0;     // Y_min / X_max
  double bound_mu = 0.0;  // lower bound on mu
  bool kappa_ok = false;
  bool mu_ok = false;

  bool ok() const { return params.ok && kappa_ok && mu_ok; }
};

inline ConditionReport check_conditions(const SimConfig& cfg,
                                        const GridSpec& grid = {}) {
  ConditionReport r;
  r.params = validate_params(cfg.vessel, cfg.u_d, cfg.v_max, grid);
  r.kappa_max = cfg.path.kappa_max();
  if (!r.params.ok) {
    r.bound_mu = std::numeric_limits<double>::infinity();
    return r;
  }
  r.ratio = r.params.ratio();
  r.kappa_ok = r.kappa_max < r.ratio;
  const double den = r.params.y_min - r.params.x_max * r.kappa_max;
  r.bound_mu = den > 0.0 ? 4.0 * r.params.x_max / den
                         : std::numeric_limits<double>::infinity();
  r.mu_ok = r.kappa_ok && cfg.mu > r.bound_mu;
  return r;
}

struct LyapunovDiag {
  double V = 0.0;
  double Vdot_nominal = 0.0;
  double q_min = 0.0;
};

// V = (x^2 + y^2) / 2 with the nominal derivative -X^T Q X, and the smallest
// diagonal entry of Q over the ball of the given radius.
inline LyapunovDiag lyapunov_diag(const PathErrors& e, double U_d1,
                                  double U_d2, double k_theta, double mu,
                                  double radius) {
  const double x = e.x_pb;
  const double y = e.y_pb;
  const double U = 0.5 * (U_d1 + U_d2);
  LyapunovDiag d;
  d.V = 0.5 * (x * x + y * y);
  const double q1 = k_theta / std::sqrt(1.0 + x * x);
  const double q2 = U / std::sqrt(mu + x * x + 2.0 * y * y);
  d.Vdot_nominal = -(q1 * x * x + q2 * y * y);
  d.q_min = std::min(k_theta / std::sqrt(1.0 + radius * radius),
                     U / std::sqrt(mu + 2.0 * radius * radius));
  return d;
}

struct LogRecord {
  double t = 0.0;
  double theta = 0.0;
  bool theta_clamped = false;
  std::array<VesselState, 2> vessels{};
  double x_pb = 0.0;
  double y_pb = 0.0;
  double gamma_p = 0.0;
  double kappa = 0.0;
  double s_dot = 0.0;
  double ca_sigma = 0.0;
  bool ca_active = false;
  Eigen::Vector2d formation_error = Eigen::Vector2d::Zero();
  std::array<double, 2> u_d{};
  std::array<double, 2> psi_d{};
  std::array<double, 2> r_d{};
  std::array<double, 2> U_d{};
  std::array<double, 2> tau_u{};
  std::array<double, 2> tau_r{};
  std::array<double, 2> theta_hat_u_norm{};
  std::array<double, 2> theta_hat_r_norm{};
  double V = 0.0;
  double G1 = 0.0;
  double G1_eff = 0.0;
};

inline LogRecord make_record(double t, const Eigen::VectorXd& x,
                             const Evaluation& ev) {
  using L = StateLayout;
  LogRecord rec;
  rec.t = t;
  rec.theta = x(L::kTheta);
  rec.theta_clamped = ev.path.clamped;
  rec.x_pb = ev.errs.x_pb;
  rec.y_pb = ev.errs.y_pb;
  rec.gamma_p = ev.path.gamma;
  rec.kappa = ev.path.kappa;
  rec.s_dot = ev.s_dot;
  rec.ca_sigma = ev.ca.sigma;
  rec.ca_active = ev.ca.active;
  rec.formation_error = ev.formation.error();
  for (int i = 0; i < 2; ++i) {
    const auto& ve = ev.vessels[i];
    rec.vessels[i] = vessel_from(x, i);
    rec.u_d[i] = ve.u_d;
    rec.psi_d[i] = ve.psi_d;
    rec.r_d[i] = ve.r_d;
    rec.U_d[i] = ve.U_d;
    rec.tau_u[i] = ve.tau.tau_u;
    rec.tau_r[i] = ve.tau.tau_r;
    rec.theta_hat_u_norm[i] = x.segment<5>(L::theta_hat_u(i)).norm();
    rec.theta_hat_r_norm[i] = x.segment<5>(L::theta_hat_r(i)).norm();
  }
  rec.V = 0.5 * (rec.x_pb * rec.x_pb + rec.y_pb * rec.y_pb);
  rec.G1 = ev.G1;
  rec.G1_eff = ev.G1_eff;
  return rec;
}

class Simulation {
 public:
  explicit Simulation(SimConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
    cfg_.validate();
    using L = StateLayout;
    x_ = Eigen::VectorXd::Zero(L::kSize);
    x_(L::kTheta) = cfg_.theta0;
    for (int i = 0; i < 2; ++i) {
      vessel_into(x_, i, cfg_.initial[i]);
      x_.segment<5>(L::theta_hat_u(i)) = cfg_.warm_start[i].theta_hat_u;
      x_.segment<5>(L::theta_hat_r(i)) = cfg_.warm_start[i].theta_hat_r;
      ds_.chi_hold[i] = cfg_.initial[i].psi;
      ds_.psi_d_hold[i] = cfg_.initial[i].psi;
    }
    sample_noise();
    // Start the differentiation filters on their inputs. u_d does not
    // depend on the filters and r_d depends only on the u_d filter.
    Evaluation ev = evaluate(x_, ds_, cfg_);
    for (int i = 0; i < 2; ++i) x_(L::ud_filter(i)) = ev.vessels[i].u_d;
    ev = evaluate(x_, ds_, cfg_);
    for (int i = 0; i < 2; ++i) x_(L::rd_filter(i)) = ev.vessels[i].r_d;
    ds_.ca_active = ev.ca.active;
  }

  const SimConfig& config() const { return cfg_; }
  double time() const { return t_; }
  long step_index() const { return steps_; }
  const Eigen::VectorXd& state() const { return x_; }
  const DiscreteState& discrete() const { return ds_; }
  Evaluation evaluate_now() const { return evaluate(x_, ds_, cfg_); }

  // Advances one step; returns the evaluation at the start of the step.
  Evaluation step() {
    Evaluation ev = evaluate(x_, ds_, cfg_);
    for (int i = 0; i < 2; ++i) {
      ds_.chi_hold[i] = ev.vessels[i].chi;
      ds_.psi_d_hold[i] = ev.vessels[i].psi_d;
    }
    ds_.ca_active = ev.ca.active;
    sample_noise();
    const DiscreteState frozen = ds_;
    x_ = rk4_step(
        [this, &frozen](double, const Eigen::VectorXd& x) {
          return evaluate(x, frozen, cfg_).deriv;
        },
        t_, x_, cfg_.dt);
    ++steps_;
    t_ = steps_ * cfg_.dt;
    return ev;
  }

 private:
  void sample_noise() {
    if (cfg_.vdot != VdotSource::kSensor || cfg_.vdot_noise == 0.0) return;
    std::normal_distribution<double> n(0.0, cfg_.vdot_noise);
    for (auto& v : ds_.vdot_noise) v = n(rng_);
  }

  SimConfig cfg_;
  std::mt19937_64 rng_;
  Eigen::VectorXd x_;
  DiscreteState ds_;
  double t_ = 0.0;
  long steps_ = 0;
};

struct RunResult {
  std::vector<LogRecord> log;
  ConditionReport conditions;
  bool ok = true;
  std::optional<ErrorCode> error_code;
  std::string error;
  long failed_step = -1;
};

// Runs to t_end and logs one record per step, including both endpoints.
// Throws AssumptionViolated when the feasibility conditions fail unless
// force is set; runtime errors stop the run and keep the partial log.
inline RunResult run(const SimConfig& cfg, bool force = false) {
  RunResult res;
  res.conditions = check_conditions(cfg);
  if (!res.conditions.ok() && !force) {
    throw Error(ErrorCode::kAssumptionViolated,
                "feasibility conditions fail; use force to run anyway");
  }
  const long n = std::lround(cfg.t_end / cfg.dt);
  res.log.reserve(n + 1);
  try {
    Simulation sim(cfg);
    for (long k = 0; k < n; ++k) {
      const Eigen::VectorXd x = sim.state();
      const double t = sim.time();
      res.log.push_back(make_record(t, x, sim.step()));
    }
    res.log.push_back(make_record(sim.time(), sim.state(), sim.evaluate_now()));
  } catch (const Error& e) {
    res.ok = false;
    res.error_code = e.code();
    res.error = e.what();
    res.failed_step = static_cast<long>(res.log.size());
  }
  return res;
}

struct DecayWindow {
  double upper = 4.0;  // window opens at the first sample at or below this
  double lower = 0.05;  // and closes at the first sample at or below this
};

struct DecayFit {
  double rate = 0.0;  // 1/s
  double t_begin = 0.0;
  double t_end = 0.0;
};

// Least-squares slope of log(norm) over the decay window. At least one
// e-fold of decay is required.
inline DecayFit fit_decay_rate(const std::vector<double>& t,
                               const std::vector<double>& norm,
                               const DecayWindow& w = {}) {
  const std::size_t n = std::min(t.size(), norm.size());
  std::size_t b = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (norm[k] <= w.upper) {
      b = k;
      break;
    }
  }
  std::size_t e = n;
  for (std::size_t k = b; k < n; ++k) {
    if (norm[k] <= w.lower) {
      e = k + 1;
      break;
    }
  }
  if (b >= n || e - b < 3) {
    throw Error(ErrorCode::kInsufficientDecay, "no decay window");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t k = b; k < e; ++k) {
    const double y = std::log(std::max(norm[k], 1e-300));
    sx += t[k];
    sy += y;
    sxx += t[k] * t[k];
    sxy += t[k] * y;
    lo = std::min(lo, norm[k]);
    hi = std::max(hi, norm[k]);
  }
  const double m = static_cast<double>(e - b);
  const double den = m * sxx - sx * sx;
  if (!(den > 0.0) || !(hi > 0.0) || std::log(hi / std::max(lo, 1e-300)) < 1.0) {
    throw Error(ErrorCode::kInsufficientDecay, "less than one e-fold of decay");
  }
  return {(m * sxy - sx * sy) / den, t[b], t[e - 1]};
}

struct Metrics {
  double convergence_time = std::numeric_limits<double>::quiet_NaN();
  std::optional<DecayFit> decay;
  double max_sway = 0.0;
  double formation_rms = 0.0;
  double crosstrack_rms = 0.0;
  double alongtrack_rms = 0.0;
  double max_abs_x_pb = 0.0;  // over the steady window
  double max_abs_y_pb = 0.0;
  double mean_y_pb = 0.0;
  double max_theta_hat_norm = 0.0;
};

struct MetricsOptions {
  double steady_fraction = 0.4;  // trailing share of the horizon
  double converged_radius = 0.5;
  DecayWindow window;
};

inline Metrics compute_metrics(const std::vector<LogRecord>& log,
                               const MetricsOptions& opt = {}) {
  if (log.empty()) throw Error(ErrorCode::kInvalidConfig, "empty log");
  Metrics m;
  std::vector<double> t(log.size());
  std::vector<double> norm(log.size());
  for (std::size_t k = 0; k < log.size(); ++k) {
    const auto& r = log[k];
    t[k] = r.t;
    norm[k] = std::hypot(r.x_pb, r.y_pb);
    for (int i = 0; i < 2; ++i) {
      m.max_sway = std::max(m.max_sway, std::abs(r.vessels[i].v));
      m.max_theta_hat_norm =
          std::max({m.max_theta_hat_norm, r.theta_hat_u_norm[i],
                    r.theta_hat_r_norm[i]});
    }
  }
  std::size_t last_out = log.size();
  for (std::size_t k = log.size(); k-- > 0;) {
    if (norm[k] > opt.converged_radius) {
      last_out = k;
      break;
    }
  }
  if (last_out == log.size()) {
    m.convergence_time = t.front();
  } else if (last_out + 1 < log.size()) {
    m.convergence_time = t[last_out + 1];
  }
  const double t0 = t.front() + (1.0 - opt.steady_fraction) * (t.back() - t.front());
  double sf = 0, sy = 0, sx = 0, my = 0;
  int count = 0;
  for (std::size_t k = 0; k < log.size(); ++k) {
    if (t[k] < t0) continue;
    const auto& r = log[k];
    sf += r.formation_error.squaredNorm();
    sy += r.y_pb * r.y_pb;
    sx += r.x_pb * r.x_pb;
    my += r.y_pb;
    m.max_abs_x_pb = std::max(m.max_abs_x_pb, std::abs(r.x_pb));
    m.max_abs_y_pb = std::max(m.max_abs_y_pb, std::abs(r.y_pb));
    ++count;
  }
  if (count > 0) {
    m.formation_rms = std::sqrt(sf / count);
    m.crosstrack_rms = std::sqrt(sy / count);
    m.alongtrack_rms = std::sqrt(sx / count);
    m.mean_y_pb = my / count;
  }
  try {
    m.decay = fit_decay_rate(t, norm, opt.window);
  } catch (const Error&) {
    m.decay.reset();
  }
  return m;
}

}  // namespace formsim
