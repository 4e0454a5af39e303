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
// Planar paths parametrized by a path variable theta, the path-tangential
// frame and the barycenter path-following errors.
//
// A path need not be parametrized by arc length. The path-frame kinematics
// are written in terms of the arc-length rate s' = |p'(theta)| theta'; the
// update law below produces s' and converts it to theta'. For unit-speed
// paths (straight, circle, fillet polyline) the two coincide.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "formsim/angles.hpp"
#include "formsim/error.hpp"

namespace formsim {

// y_p = A sin(omega theta), x_p = theta.
struct SinusoidPath {
  double amplitude = 300.0;
  double omega = 0.005;
};

struct StraightPath {
  double x0 = 0.0;
  double y0 = 0.0;
  double heading = 0.0;
};

// Counter-clockwise when radius > 0, clockwise when radius < 0. theta is arc
// length from the point at start_angle.
struct CirclePath {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 10.0;
  double start_angle = -std::numbers::pi / 2.0;
};

// Polyline through waypoints with circular fillets of the given radius at
// every interior corner; arc-length parametrized from the first waypoint.
class FilletPolylinePath {
 public:
  struct Segment {
    double s0 = 0.0;
    double length = 0.0;
    Eigen::Vector2d start = Eigen::Vector2d::Zero();
    double heading = 0.0;    // heading at segment start
    double curvature = 0.0;  // signed; zero for straight segments
  };

  FilletPolylinePath() = default;
  FilletPolylinePath(std::vector<Eigen::Vector2d> waypoints, double radius)
      : waypoints_(std::move(waypoints)), radius_(radius) {
    build();
  }

  const std::vector<Eigen::Vector2d>& waypoints() const { return waypoints_; }
  double radius() const { return radius_; }
  double length() const {
    return segments_.empty() ? 0.0
                             : segments_.back().s0 + segments_.back().length;
  }
  const std::vector<Segment>& segments() const { return segments_; }

  const Segment& segment_at(double s) const {
    auto it = std::upper_bound(
        segments_.begin(), segments_.end(), s,
        [](double value, const Segment& seg) { return value < seg.s0; });
    if (it != segments_.begin()) --it;
    return *it;
  }

 private:
  void build() {
    if (waypoints_.size() < 2) {
      throw Error(ErrorCode::kInvalidConfig, "polyline needs two waypoints");
    }
    if (!(radius_ > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "fillet radius must be positive");
    }
    const std::size_t n = waypoints_.size();
    std::vector<double> headings(n - 1);
    std::vector<double> lengths(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const Eigen::Vector2d d = waypoints_[i + 1] - waypoints_[i];
      headings[i] = std::atan2(d.y(), d.x());
      lengths[i] = d.norm();
    }
    // Tangent distance trimmed from each side of every interior corner.
    std::vector<double> trim(n, 0.0);
    std::vector<double> turn(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      turn[i] = wrap_angle(headings[i] - headings[i - 1]);
      if (std::abs(turn[i]) >= std::numbers::pi - 1e-9) {
        throw Error(ErrorCode::kInvalidConfig, "polyline reverses direction");
      }
      trim[i] = radius_ * std::tan(std::abs(turn[i]) / 2.0);
    }
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double straight = lengths[i] - trim[i] - trim[i + 1];
      if (straight < -1e-9) {
        throw Error(ErrorCode::kInvalidConfig,
                    "fillet radius too large for polyline leg");
      }
      const Eigen::Vector2d dir(std::cos(headings[i]), std::sin(headings[i]));
      Segment line;
      line.s0 = s;
      line.length = std::max(0.0, straight);
      line.start = waypoints_[i] + trim[i] * dir;
      line.heading = headings[i];
      segments_.push_back(line);
      s += line.length;
      if (i + 2 < n && turn[i + 1] != 0.0) {
        Segment arc;
        arc.s0 = s;
        arc.length = radius_ * std::abs(turn[i + 1]);
        arc.start = waypoints_[i + 1] - trim[i + 1] * dir;
        arc.heading = headings[i];
        arc.curvature = sign(turn[i + 1]) / radius_;
        segments_.push_back(arc);
        s += arc.length;
      }
    }
  }

  std::vector<Eigen::Vector2d> waypoints_;
  double radius_ = 0.0;
  std::vector<Segment> segments_;
};

// Point, tangent angle, curvature and parametric speed at one theta.
struct PathSample {
  Eigen::Vector2d point = Eigen::Vector2d::Zero();
  double gamma = 0.0;   // tangent angle, rad
  double kappa = 0.0;   // signed curvature, 1/m
  double speed = 1.0;   // |dp/dtheta|
  bool clamped = false;
};

class PathSpec {
 public:
  using Kind =
      std::variant<SinusoidPath, StraightPath, CirclePath, FilletPolylinePath>;

  PathSpec() = default;
  PathSpec(Kind kind, double theta_min, double theta_max)
      : kind_(std::move(kind)), theta_min_(theta_min), theta_max_(theta_max) {
    if (!(theta_max_ > theta_min_)) {
      throw Error(ErrorCode::kInvalidConfig, "empty path parameter range");
    }
  }

  static PathSpec sinusoid(double amplitude, double omega, double theta_min,
                           double theta_max) {
    return PathSpec(SinusoidPath{amplitude, omega}, theta_min, theta_max);
  }
  static PathSpec straight(double heading, double theta_min, double theta_max) {
    return PathSpec(StraightPath{0.0, 0.0, heading}, theta_min, theta_max);
  }
  static PathSpec circle(double radius, double theta_min, double theta_max) {
    return PathSpec(CirclePath{0.0, 0.0, radius}, theta_min, theta_max);
  }
  static PathSpec polyline(std::vector<Eigen::Vector2d> waypoints,
                           double radius) {
    FilletPolylinePath poly(std::move(waypoints), radius);
    const double len = poly.length();
    return PathSpec(std::move(poly), 0.0, len);
  }

  const Kind& kind() const { return kind_; }
  std::string kind_name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, SinusoidPath>) return "sinusoid";
          if constexpr (std::is_same_v<T, StraightPath>) return "straight";
          if constexpr (std::is_same_v<T, CirclePath>) return "circle";
          return "polyline";
        },
        kind_);
  }
  double theta_min() const { return theta_min_; }
  double theta_max() const { return theta_max_; }
  bool in_range(double theta) const {
    return theta >= theta_min_ && theta <= theta_max_;
  }

  // Samples the path; theta outside the range is clamped and flagged.
  PathSample sample(double theta) const {
    const double t = std::clamp(theta, theta_min_, theta_max_);
    PathSample out = std::visit([t](const auto& k) { return eval(k, t); }, kind_);
    out.clamped = t != theta;
    return out;
  }

  Eigen::Vector2d point(double theta) const { return checked(theta).point; }
  double tangent_angle(double theta) const { return checked(theta).gamma; }
  double curvature(double theta) const { return checked(theta).kappa; }

  // max |kappa| over the parameter range. Analytic where the path kind
  // allows it, otherwise dense sampling with local refinement.
  double kappa_max() const {
    return std::visit(
        [this](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, StraightPath>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, CirclePath>) {
            return 1.0 / std::abs(k.radius);
          } else if constexpr (std::is_same_v<T, SinusoidPath>) {
            // Crest curvature, attained iff a crest lies in range.
            const double crest = std::abs(k.amplitude) * k.omega * k.omega;
            const double period = std::numbers::pi / std::abs(k.omega);
            const double first = std::ceil((theta_min_ - period / 2.0) / period);
            if (period / 2.0 + first * period <= theta_max_) return crest;
            return kappa_max_sampled();
          } else {
            double best = 0.0;
            for (const auto& seg : k.segments()) {
              best = std::max(best, std::abs(seg.curvature));
            }
            return best;
          }
        },
        kind_);
  }

  double kappa_max_sampled(double step = 0.1) const {
    const int n = std::max(2, static_cast<int>((theta_max_ - theta_min_) / step));
    const double h = (theta_max_ - theta_min_) / n;
    double best = 0.0;
    int best_i = 0;
    for (int i = 0; i <= n; ++i) {
      const double k = std::abs(sample(theta_min_ + i * h).kappa);
      if (k > best) {
        best = k;
        best_i = i;
      }
    }
    // Golden-section refinement around the best sample.
    double a = std::max(theta_min_, theta_min_ + (best_i - 1) * h);
    double b = std::min(theta_max_, theta_min_ + (best_i + 1) * h);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [this](double t) { return std::abs(sample(t).kappa); };
    for (int it = 0; it < 80; ++it) {
      const double c = b - g * (b - a);
      const double d = a + g * (b - a);
      (f(c) > f(d) ? b : a) = (f(c) > f(d) ? d : c);
    }
    return std::max(best, f(0.5 * (a + b)));
  }

  // Coarse global search followed by golden-section refinement for the
  // parameter of the path point closest to p.
  double closest_theta(const Eigen::Vector2d& p, double step = 1.0) const {
    const int n = std::max(2, static_cast<int>((theta_max_ - theta_min_) / step));
    const double h = (theta_max_ - theta_min_) / n;
    double best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i <= n; ++i) {
      const double d = (sample(theta_min_ + i * h).point - p).squaredNorm();
      if (d < best) {
        best = d;
        best_i = i;
      }
    }
    double a = std::max(theta_min_, theta_min_ + (best_i - 1) * h);
    double b = std::min(theta_max_, theta_min_ + (best_i + 1) * h);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double t) { return (sample(t).point - p).squaredNorm(); };
    for (int it = 0; it < 100; ++it) {
      const double c = b - g * (b - a);
      const double d = a + g * (b - a);
      if (f(c) < f(d)) {
        b = d;
      } else {
        a = c;
      }
    }
    return 0.5 * (a + b);
  }

 private:
  PathSample checked(double theta) const {
    if (!in_range(theta)) {
      throw Error(ErrorCode::kOutOfRange,
                  "path parameter " + std::to_string(theta) + " outside [" +
                      std::to_string(theta_min_) + ", " +
                      std::to_string(theta_max_) + "]");
    }
    return sample(theta);
  }

  static PathSample from_derivatives(Eigen::Vector2d point, double dx,
                                     double dy, double ddx, double ddy) {
    PathSample s;
    s.point = point;
    s.gamma = std::atan2(dy, dx);
    const double sq = dx * dx + dy * dy;
    s.speed = std::sqrt(sq);
    s.kappa = (dx * ddy - dy * ddx) / (sq * s.speed);
    return s;
  }

  static PathSample eval(const SinusoidPath& k, double t) {
    const double a = k.amplitude;
    const double w = k.omega;
    return from_derivatives({t, a * std::sin(w * t)}, 1.0,
                            a * w * std::cos(w * t), 0.0,
                            -a * w * w * std::sin(w * t));
  }

  static PathSample eval(const StraightPath& k, double t) {
    const double c = std::cos(k.heading);
    const double s = std::sin(k.heading);
    PathSample out;
    out.point = {k.x0 + t * c, k.y0 + t * s};
    out.gamma = k.heading;
    return out;
  }

  static PathSample eval(const CirclePath& k, double t) {
    const double r = std::abs(k.radius);
    const double dir = sign(k.radius);
    const double phi = k.start_angle + dir * t / r;
    PathSample out;
    out.point = {k.cx + r * std::cos(phi), k.cy + r * std::sin(phi)};
    out.gamma = wrap_angle(phi + dir * std::numbers::pi / 2.0);
    out.kappa = dir / r;
    return out;
  }

  static PathSample eval(const FilletPolylinePath& k, double t) {
    const auto& seg = k.segment_at(t);
    const double ds = std::clamp(t - seg.s0, 0.0, seg.length);
    PathSample out;
    out.kappa = seg.curvature;
    if (seg.curvature == 0.0) {
      out.point = seg.start + ds * Eigen::Vector2d(std::cos(seg.heading),
                                                   std::sin(seg.heading));
      out.gamma = seg.heading;
    } else {
      const double k0 = seg.curvature;
      const double h = seg.heading + k0 * ds;
      out.point = seg.start + Eigen::Vector2d(
                                  (std::sin(h) - std::sin(seg.heading)) / k0,
                                  (std::cos(seg.heading) - std::cos(h)) / k0);
      out.gamma = wrap_angle(h);
    }
    return out;
  }

  Kind kind_ = StraightPath{};
  double theta_min_ = 0.0;
  double theta_max_ = 1.0;
};

// Barycenter position expressed in the path-tangential frame.
struct PathErrors {
  double x_pb = 0.0;  // along-track
  double y_pb = 0.0;  // cross-track, positive to the left of the tangent
};

inline PathErrors path_errors(const Eigen::Vector2d& path_point, double gamma,
                              const Eigen::Vector2d& p_b) {
  const Eigen::Vector2d d = p_b - path_point;
  const double c = std::cos(gamma);
  const double s = std::sin(gamma);
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

inline PathErrors path_errors(const PathSpec& path, double theta,
                              const Eigen::Vector2d& p_b) {
  return path_errors(path.point(theta), path.tangent_angle(theta), p_b);
}

inline double f_theta(double x_pb, double /*y_pb*/ = 0.0) {
  return x_pb / std::sqrt(1.0 + x_pb * x_pb);
}

// Along-path speed of the path-frame origin (arc-length rate): the cosine
// terms cancel the barycenter's tangential motion and k_theta f_theta
// contracts the along-track error.
inline double along_path_speed(const PathErrors& errs, double gamma_p,
                               double U1, double chi1, double U2, double chi2,
                               double k_theta) {
  return 0.5 * U1 * std::cos(chi1 - gamma_p) +
         0.5 * U2 * std::cos(chi2 - gamma_p) + k_theta * f_theta(errs.x_pb);
}

// Path-variable rate; equals along_path_speed for unit-speed paths.
inline double theta_dot(const PathSpec& path, double theta,
                        const PathErrors& errs, double U1, double chi1,
                        double U2, double chi2, double k_theta) {
  const PathSample ps = path.sample(theta);
  return along_path_speed(errs, ps.gamma, U1, chi1, U2, chi2, k_theta) /
         ps.speed;
}

}  // namespace formsim
