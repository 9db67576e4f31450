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

// Perturbed KKT residuals and the per-stage condensed Newton system.
//
// Conventions. The Lagrangian carries λ_0ᵀ(x̄ − x_0), λ_{i+1}ᵀ(x_i + f Δτ − x_{i+1}),
// νᵀ(g + z), ζᵀe and υ_k(t_{k−1} + Δ̲_k − t_k + w_k); across a jump the dynamics of
// the last stage of the phase feed the pre-jump node, whose costate is λ⁻.
// Time enters through δ_k = Δt_k − Δt_{k−1}, the change of the duration of
// phase k; every phase (the last one included) has a dwell slack w_k.

#pragma once

#include <span>
#include <vector>

#include "swocp/iterate.hpp"
#include "swocp/model.hpp"
#include "swocp/transcription.hpp"

namespace swocp {

enum class HessianMode { kExact, kGaussNewton };

struct StageKKT {
  // Condensed blocks (slack/dual terms folded in) used by the Riccati recursion.
  Matrix Qxx, Qxu, Quu;
  Matrix A, B;
  Vector f;       // f_k(x_i, u_i) / N_k
  Vector hx, hu;  // ∂²L/∂δ∂x, ∂²L/∂δ∂u
  double hbar = 0.0;
  double qtt = 0.0;  // ∂²L/∂δ², nonzero only at switching-condition stages
  Vector lx, lu;     // condensed dual residuals
  Vector xbar;       // x_i + f Δτ − x_next

  // Uncondensed pieces, kept for residual evaluation and step recovery.
  Matrix Qxx_raw, Qxu_raw, Quu_raw;
  Vector rx, ru;
  Matrix gx, gu;
  Vector rg;  // g + z
  Vector zv;  // z ∘ ν
  Vector z, nu;

  // Switching condition attached to this stage (C, D, E, ē); empty otherwise.
  bool has_condition = false;
  Matrix C, D;
  Vector E, ebar;
};

/// Pre-jump node of a switch with a state jump.
struct JumpKKT {
  Matrix Q;     // ∇²l_j (+ λᵀ∇²f_j)
  Matrix A;     // ∇f_j
  Vector lx;    // ∇l_j + ∇f_jᵀλ_next − λ⁻
  Vector xbar;  // f_j(x⁻) − x_next
};

struct PhaseKKT {
  double Qtt = 0.0;  // υ / w
  double qt = 0.0;   // −υ − w⁻¹(υ r_Δ − r_w): the phase's constant δ-gradient term
  double r_delta = 0.0;
  double r_w = 0.0;  // w υ − ε
  double w = 0.0, upsilon = 0.0;
  double wv = 0.0;   // w υ
  double dual_sum = 0.0;  // Σ h̄_i − υ over the phase, the uncondensed time residual
};

struct KKTSystem {
  TimeGrid grid;  // layout and steps at the assembled switching times
  int nx = 0, nu = 0;
  double barrier = 0.0;
  std::vector<StageKKT> stages;  // 0..N−1
  Matrix QxxN;
  Vector lxN;
  Vector x0_target;  // x̄ − x_0, the fixed Δx_0
  std::vector<JumpKKT> jumps;  // per switch; meaningful where grid.jump[s]
  std::vector<PhaseKKT> phases;
  /// Extra curvature on Δt_k per switch, added by a Hessian modification;
  /// empty means none.
  std::vector<double> dt_shift;
};

struct KKTResidual {
  Vector initial;           // x_0 − x̄
  std::vector<Vector> rx;   // 0..N
  std::vector<Vector> ru;
  std::vector<Vector> xbar;       // per stage
  std::vector<Vector> rx_pre;     // per switch, empty without jump
  std::vector<Vector> xbar_jump;  // per switch, empty without jump
  std::vector<Vector> condition;  // per switch, empty without condition
  std::vector<double> sto;        // per switch: time stationarity
  std::vector<Vector> rg, rz;
  std::vector<double> rdelta, rw;

  double l2 = 0.0, max = 0.0;                            // with the current barrier
  double l2_unperturbed = 0.0, max_unperturbed = 0.0;    // with ε = 0
};

struct AssembleOptions {
  HessianMode hessian = HessianMode::kExact;
  int threads = 1;
};

/// Condensed KKT data at `it`. The grid's switching times are replaced by it.t.
/// Throws std::domain_error if a slack or bound dual is not strictly positive.
KKTSystem assemble(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it,
                   const AssembleOptions& opts = {});

/// Residual blocks and norms of an assembled system.
KKTResidual residual_of(const KKTSystem& sys);

/// Residual at `it` without Hessian evaluation.
KKTResidual eval_residual(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it);

/// Evaluates only the stages listed in `order`, in that order, writing into
/// the matching slots of a system sized for the whole grid. Other stages stay
/// default-constructed. Exposed to check that stages are independent.
KKTSystem assemble_stages(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it,
                          const AssembleOptions& opts, std::span<const int> order);

/// Max-norm of the uncondensed linearized KKT system (state equations, jump and
/// condition rows, stationarity, time rows, slack/complementarity rows) at a
/// complete Newton step.
double linearized_residual(const KKTSystem& sys, const NewtonStep& step);

/// Scale used to normalize the linearized residual: max-norm of the system data.
double data_scale(const KKTSystem& sys);

}  // namespace swocp
