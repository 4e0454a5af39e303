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
#pragma once

#include <Eigen/Core>

#include "formsim/error.hpp"

namespace formsim {

// Classical fourth-order Runge-Kutta step for x' = f(t, x).
template <typename F>
Eigen::VectorXd rk4_step(F&& f, double t, const Eigen::VectorXd& x,
                         double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidConfig, "dt must be > 0");
  const Eigen::VectorXd k1 = f(t, x);
  const Eigen::VectorXd k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = f(t + dt, x + dt * k3);
  Eigen::VectorXd out = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "integrator produced non-finite state");
  }
  return out;
}

}  // namespace formsim
