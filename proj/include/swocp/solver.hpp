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

// Newton-type interior-point iterations on the transcribed problem and the
// outer mesh-refinement loop.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "swocp/interior_point.hpp"
#include "swocp/iterate.hpp"
#include "swocp/kkt.hpp"
#include "swocp/riccati.hpp"
#include "swocp/transcription.hpp"

namespace swocp {

enum class SolveStatus { kConverged, kMaxIters, kRiccatiFailure, kNumericalFailure };
enum class TerminationNorm { kMax, kL2 };

std::string to_string(SolveStatus s);

struct SolverOptions {
  double tol = 1e-7;
  TerminationNorm termination = TerminationNorm::kMax;
  int max_newton_iters = 100;  // per NLP solve
  int max_total_iters = 500;   // across mesh refinements
  bool mesh_refinement = false;
  double dt_max = 0.35;
  double dt_min = 0.0;  // 0 disables the shrink check
  MeshPolicy mesh_policy = MeshPolicy::kAdaptiveN;
  double refine_trigger = 0.1;  // perturbed KKT l2 below which the grid may be refined
  HessianMode hessian = HessianMode::kExact;
  /// Reduced-Hessian modification; unset means off for exact Hessians and on
  /// for Gauss-Newton.
  std::optional<bool> modify;
  double riccati_dt_max = 0.5;
  PModification p_modification = PModification::kWhenIndefinite;
  IPOptions ip;
  int threads = 1;
  /// Consulted after every Newton step with the step actually taken (full
  /// step, before scaling by α) and the system it was computed from.
  std::function<void(const KKTSystem&, const NewtonStep&)> on_step;
};

RiccatiOptions riccati_options(const SolverOptions& opts);

struct IterationRecord {
  int iter = 0;
  int nlp = 0;  // index of the NLP solve (bumps after each refinement)
  int N = 0;
  double l2 = 0.0, max = 0.0;
  double l2_unperturbed = 0.0, max_unperturbed = 0.0;
  double alpha_primal = 0.0, alpha_dual = 0.0;
  double barrier = 0.0;
  std::vector<double> switching_times;
  bool modification = false;
  double wall_ms = 0.0;
};

struct RefinementEvent {
  int after_iter = 0;
  std::vector<int> old_counts, new_counts;
  std::vector<int> flagged_phases;
};

struct ConvergenceLog {
  std::vector<IterationRecord> iterations;
  std::vector<RefinementEvent> refinements;
};

struct NlpResult {
  Iterate iterate;
  TimeGrid grid;
  SolveStatus status = SolveStatus::kMaxIters;
  int iters = 0;
  bool stopped_for_refinement = false;
  KKTResidual residual;
  std::string message;
  int failed_stage = -1;
  int failed_switch = -1;
};

/// Newton iterations at a fixed grid. When `allow_refinement_exit` is set the
/// solve stops early once the perturbed residual is below refine_trigger and a
/// step exceeds dt_max.
NlpResult solve_nlp(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& init,
                    const SolverOptions& opts, ConvergenceLog* log = nullptr,
                    bool allow_refinement_exit = false);

struct Solution {
  Iterate iterate;
  TimeGrid grid;
  SolveStatus status = SolveStatus::kMaxIters;
  double objective = 0.0;
  KKTResidual residual;
  int iters = 0;
  int refinements = 0;
  std::string message;
};

/// Initial iterate: x_i = x(t0), u_i = 0, zero multipliers, slacks per `ip`.
Iterate initial_iterate(const SwitchedOCP& ocp, const TimeGrid& grid, const IPOptions& ip);

/// Mesh-refinement loop around solve_nlp, starting from `init` on `grid`.
Solution solve(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& init,
               const SolverOptions& opts, ConvergenceLog* log = nullptr);

/// J = V_f(x_N) + Σ l_k(x_i, u_i) Δτ_k + Σ l_j(x⁻).
double objective(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it);

}  // namespace swocp
