/*
 Copyright 2026 The swocp Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Primal-dual iterate of the discretized problem and the matching Newton
// direction.

#pragma once

#include <vector>

#include "swocp/model.hpp"

namespace swocp {

struct TimeGrid;

struct Iterate {
  std::vector<Vector> x;    // x_0..x_N
  std::vector<Vector> u;    // u_0..u_{N-1}
  std::vector<double> t;    // switching times t_1..t_K
  std::vector<Vector> lmd;  // costates lambda_0..lambda_N
  // Pre-jump state and costate per switch; empty vectors where no jump happens.
  std::vector<Vector> x_pre;
  std::vector<Vector> lmd_pre;
  std::vector<Vector> z;        // path-constraint slacks per stage
  std::vector<Vector> nu;       // path-constraint duals per stage
  std::vector<double> w;        // dwell-time slacks per phase
  std::vector<double> upsilon;  // dwell-time duals per phase
  // Switching-condition multipliers per switch; empty where there is no condition.
  std::vector<Vector> zeta;
  double barrier = 0.1;
};

struct NewtonStep {
  std::vector<Vector> dx;
  std::vector<Vector> du;
  std::vector<double> dt;
  std::vector<Vector> dlmd;
  std::vector<Vector> dx_pre;
  std::vector<Vector> dlmd_pre;
  std::vector<Vector> dzeta;
  std::vector<Vector> dz;
  std::vector<Vector> dnu;
  std::vector<double> dw;
  std::vector<double> dupsilon;
};

/// Iterate with every entry sized for (ocp, grid) and set to zero.
Iterate zero_iterate(const SwitchedOCP& ocp, const TimeGrid& grid);

/// Step with the same shape as `it`, all zeros.
NewtonStep zero_step(const Iterate& it);

}  // namespace swocp
