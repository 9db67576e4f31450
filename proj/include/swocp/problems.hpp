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

// Built-in example problems.

#pragma once

#include <string>
#include <vector>

#include "swocp/model.hpp"

namespace swocp {

struct BuiltinProblem {
  std::string name;
  SwitchedOCP ocp;
  std::vector<int> counts;
  std::vector<double> switching_times;  // initial guess
  double dt_max = 0.35;                 // mesh threshold for this resolution
};

/// Three nonlinear planar subsystems on [0, 3], x(0) = (2, 3), x_ref = (1, −1),
/// dwell 0.01 per phase, initial switching times (1, 2). N is split as evenly
/// as possible with the remainder going to the earliest phases.
BuiltinProblem three_subsystem(int N);

/// Point mass falling onto the ground and bouncing back with restitution 0.5.
/// Phase 1 ends when the height reaches zero; the velocity flips at the switch.
BuiltinProblem bouncing_mass(int N);

/// Per-phase split used by three_subsystem(N).
std::vector<int> even_split(int N, int phases);

/// Mesh threshold paired with a resolution of the three-subsystem problem.
double three_subsystem_dt_max(int N);

std::vector<std::string> builtin_problem_names();

/// Throws std::invalid_argument for an unknown name.
BuiltinProblem make_builtin(const std::string& name, int N);

}  // namespace swocp
