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

// Primal-dual interior-point pieces: slack initialization, recovery of the
// eliminated slack/dual directions, fraction-to-boundary step sizes and the
// monotone barrier schedule.

#pragma once

#include <utility>

#include "swocp/iterate.hpp"
#include "swocp/kkt.hpp"
#include "swocp/model.hpp"
#include "swocp/transcription.hpp"

namespace swocp {

struct IPOptions {
  double tau = 0.995;
  double eps0 = 0.1;
  double eps_decay = 0.1;
  double decay_trigger = 0.1;  // on the perturbed KKT l2 norm
  double eps_min = 1e-9;
  double slack_floor = 1e-4;
  bool fixed_barrier = false;  // keep ε = eps0 throughout
};

/// Throws std::invalid_argument if an option is out of range.
void check_options(const IPOptions& opts);

/// Sets the barrier to eps0 and z, ν, w, υ from the current primal values:
/// z = max(−g, floor), ν = ε/z, w = max(t_k − t_{k−1} − Δ̲_k, floor), υ = ε/w.
void initialize_slacks(const SwitchedOCP& ocp, const TimeGrid& grid, Iterate& it,
                       const IPOptions& opts);

/// Fills Δz, Δν, Δw, Δυ of `step` from its primal part and the linearized
/// slack and complementarity rows stored in `sys`; the four blocks are resized
/// to the grid.
void recover_bound_steps(const KKTSystem& sys, NewtonStep& step);

/// Largest α ∈ (0, 1] keeping z, w (primal) and ν, υ (dual) at or above (1 − τ)
/// of their current values.
std::pair<double, double> fraction_to_boundary(const Iterate& it, const NewtonStep& step,
                                               double tau);

/// Next barrier value given the perturbed KKT l2 norm.
double update_barrier(double eps, double perturbed_l2, const IPOptions& opts);

}  // namespace swocp
