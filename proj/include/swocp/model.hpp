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

// Switched optimal control problem definition.
//
// A problem is an ordered sequence of K+1 phases over [t0, tf]. Phase k runs
// the subsystem x' = f_k(x, u) subject to g_k(x, u) <= 0 and accumulates the
// stage cost l_k. The K switching instants between consecutive phases are
// decision variables, each phase keeps at least its minimum dwell time, and a
// phase may end in an event carrying a state jump x+ = f_j(x-), a cost on the
// pre-jump state, and a switching condition e(x-) = 0.
//
// All derivatives are user-supplied. Weighted Hessians are optional; they are
// only consulted when the solver runs with exact Hessians.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace swocp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Vector-valued function of (x, u), e.g. dynamics or path constraints.
struct StageFunction {
  int dim = 0;
  std::function<void(const Vector& x, const Vector& u, Vector& out)> value;
  std::function<void(const Vector& x, const Vector& u, Matrix& dx, Matrix& du)> jacobian;
  /// sum_j w_j * d2F_j, split into (xx, xu, uu) blocks. Optional.
  std::function<void(const Vector& x, const Vector& u, const Vector& w, Matrix& dxx,
                     Matrix& dxu, Matrix& duu)>
      weighted_hessian;

  bool defined() const { return static_cast<bool>(value); }
};

/// Scalar function of (x, u): the stage cost.
struct StageCost {
  std::function<double(const Vector& x, const Vector& u)> value;
  std::function<void(const Vector& x, const Vector& u, Vector& dx, Vector& du)> gradient;
  std::function<void(const Vector& x, const Vector& u, Matrix& dxx, Matrix& dxu, Matrix& duu)>
      hessian;

  bool defined() const { return static_cast<bool>(value); }
};

/// Vector-valued function of the state only (jump maps, switching conditions).
struct StateFunction {
  int dim = 0;
  std::function<void(const Vector& x, Vector& out)> value;
  std::function<void(const Vector& x, Matrix& dx)> jacobian;
  std::function<void(const Vector& x, const Vector& w, Matrix& dxx)> weighted_hessian;

  bool defined() const { return static_cast<bool>(value); }
};

/// Scalar function of the state only (terminal cost, jump cost).
struct StateCost {
  std::function<double(const Vector& x)> value;
  std::function<void(const Vector& x, Vector& dx)> gradient;
  std::function<void(const Vector& x, Matrix& dxx)> hessian;

  bool defined() const { return static_cast<bool>(value); }
};

/// What happens at the switch that ends a phase.
struct EventSpec {
  std::optional<StateFunction> jump_map;
  std::optional<StateCost> jump_cost;
  /// e(x) with Jacobian [d_q e, 0]: depends on the position half of the state only.
  std::optional<StateFunction> switching_condition;

  bool has_jump() const { return jump_map.has_value() || jump_cost.has_value(); }
};

struct PhaseSpec {
  std::string name;
  StageFunction dynamics;
  StageFunction constraint;  // dim == 0 means unconstrained
  StageCost cost;
  double min_dwell = 0.0;
  std::optional<EventSpec> exit_event;
};

struct SwitchedOCP {
  std::vector<PhaseSpec> phases;
  StateCost terminal_cost;
  double t0 = 0.0;
  double tf = 1.0;
  int nx = 0;
  int nu = 0;
  Vector initial_state;

  int num_phases() const { return static_cast<int>(phases.size()); }
  int num_switches() const { return num_phases() - 1; }
  const EventSpec* event(int s) const {
    const auto& e = phases[static_cast<std::size_t>(s)].exit_event;
    return e ? &*e : nullptr;
  }
  bool has_jump(int s) const {
    const auto* e = event(s);
    return e != nullptr && e->has_jump();
  }
  bool has_condition(int s) const {
    const auto* e = event(s);
    return e != nullptr && e->switching_condition.has_value();
  }
  int constraint_dim(int phase) const {
    const auto& c = phases[static_cast<std::size_t>(phase)].constraint;
    return c.defined() ? c.dim : 0;
  }
  int condition_dim(int s) const {
    return has_condition(s) ? event(s)->switching_condition->dim : 0;
  }
};

struct Violation {
  std::optional<int> phase;  // 0-based; messages use 1-based "phase k"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Lists every structural problem with `ocp`. Deterministic.
ValidationReport validate(const SwitchedOCP& ocp);

struct DerivativeCheck {
  std::string function;   // e.g. "phase 1 dynamics jacobian_x"
  bool evaluated = true;  // false if the function threw at the probe point
  double max_abs_error = 0.0;
  std::string error;
};

struct DerivativeReport {
  std::vector<DerivativeCheck> checks;

  double max_error() const;
  bool passed(double tol) const;
  std::vector<const DerivativeCheck*> failures(double tol) const;
};

/// Compares every supplied derivative against central finite differences
/// with step `h` at the probe point (x, u).
DerivativeReport check_derivatives(const SwitchedOCP& ocp, const Vector& x, const Vector& u,
                                   double h);

}  // namespace swocp
