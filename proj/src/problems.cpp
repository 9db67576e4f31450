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

#include "swocp/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace swocp {

namespace {

using std::cos;
using std::sin;

StageFunction subsystem(int which) {
  StageFunction f;
  f.dim = 2;
  switch (which) {
    case 1:
      f.value = [](const Vector& x, const Vector& u, Vector& out) {
        out.resize(2);
        out << x[0] + u[0] * sin(x[0]), -x[1] - u[0] * cos(x[1]);
      };
      f.jacobian = [](const Vector& x, const Vector& u, Matrix& dx, Matrix& du) {
        dx.setZero(2, 2);
        dx(0, 0) = 1.0 + u[0] * cos(x[0]);
        dx(1, 1) = -1.0 + u[0] * sin(x[1]);
        du.resize(2, 1);
        du << sin(x[0]), -cos(x[1]);
      };
      f.weighted_hessian = [](const Vector& x, const Vector& u, const Vector& w, Matrix& dxx,
                              Matrix& dxu, Matrix& duu) {
        dxx.setZero(2, 2);
        dxx(0, 0) = -w[0] * u[0] * sin(x[0]);
        dxx(1, 1) = w[1] * u[0] * cos(x[1]);
        dxu.resize(2, 1);
        dxu << w[0] * cos(x[0]), w[1] * sin(x[1]);
        duu.setZero(1, 1);
      };
      break;
    case 2:
      f.value = [](const Vector& x, const Vector& u, Vector& out) {
        out.resize(2);
        out << x[1] + u[0] * sin(x[1]), -x[0] - u[0] * cos(x[0]);
      };
      f.jacobian = [](const Vector& x, const Vector& u, Matrix& dx, Matrix& du) {
        dx.setZero(2, 2);
        dx(0, 1) = 1.0 + u[0] * cos(x[1]);
        dx(1, 0) = -1.0 + u[0] * sin(x[0]);
        du.resize(2, 1);
        du << sin(x[1]), -cos(x[0]);
      };
      f.weighted_hessian = [](const Vector& x, const Vector& u, const Vector& w, Matrix& dxx,
                              Matrix& dxu, Matrix& duu) {
        dxx.setZero(2, 2);
        dxx(0, 0) = w[1] * u[0] * cos(x[0]);
        dxx(1, 1) = -w[0] * u[0] * sin(x[1]);
        dxu.resize(2, 1);
        dxu << w[1] * sin(x[0]), w[0] * cos(x[1]);
        duu.setZero(1, 1);
      };
      break;
    default:
      f.value = [](const Vector& x, const Vector& u, Vector& out) {
        out.resize(2);
        out << -x[0] - u[0] * sin(x[0]), x[1] + u[0] * cos(x[1]);
      };
      f.jacobian = [](const Vector& x, const Vector& u, Matrix& dx, Matrix& du) {
        dx.setZero(2, 2);
        dx(0, 0) = -1.0 - u[0] * cos(x[0]);
        dx(1, 1) = 1.0 - u[0] * sin(x[1]);
        du.resize(2, 1);
        du << -sin(x[0]), cos(x[1]);
      };
      f.weighted_hessian = [](const Vector& x, const Vector& u, const Vector& w, Matrix& dxx,
                              Matrix& dxu, Matrix& duu) {
        dxx.setZero(2, 2);
        dxx(0, 0) = w[0] * u[0] * sin(x[0]);
        dxx(1, 1) = -w[1] * u[0] * cos(x[1]);
        dxu.resize(2, 1);
        dxu << -w[0] * cos(x[0]), -w[1] * sin(x[1]);
        duu.setZero(1, 1);
      };
      break;
  }
  return f;
}

// ½ (x − r)ᵀ diag(wx) (x − r) + ½ uᵀ diag(wu) u
StageCost quadratic_stage(const Vector& r, const Vector& wx, const Vector& wu) {
  StageCost c;
  c.value = [=](const Vector& x, const Vector& u) {
    return 0.5 * ((x - r).array().square() * wx.array()).sum() +
           0.5 * (u.array().square() * wu.array()).sum();
  };
  c.gradient = [=](const Vector& x, const Vector& u, Vector& dx, Vector& du) {
    dx = wx.cwiseProduct(x - r);
    du = wu.cwiseProduct(u);
  };
  c.hessian = [=](const Vector&, const Vector&, Matrix& dxx, Matrix& dxu, Matrix& duu) {
    dxx = wx.asDiagonal();
    dxu.setZero(wx.size(), wu.size());
    duu = wu.asDiagonal();
  };
  return c;
}

StateCost quadratic_state(const Vector& r, const Vector& w) {
  StateCost c;
  c.value = [=](const Vector& x) { return 0.5 * ((x - r).array().square() * w.array()).sum(); };
  c.gradient = [=](const Vector& x, Vector& dx) { dx = w.cwiseProduct(x - r); };
  c.hessian = [=](const Vector&, Matrix& dxx) { dxx = w.asDiagonal(); };
  return c;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) out[i++] = e;
  return out;
}

}  // namespace

std::vector<int> even_split(int N, int phases) {
  if (phases < 1 || N < phases) throw std::invalid_argument("cannot split N over the phases");
  std::vector<int> out(static_cast<std::size_t>(phases), N / phases);
  for (int k = 0; k < N % phases; ++k) ++out[static_cast<std::size_t>(k)];
  return out;
}

double three_subsystem_dt_max(int N) {
  switch (N) {
    case 10: return 0.35;
    case 50: return 0.065;
    case 100: return 0.035;
    case 500: return 0.0065;
    default: return 3.5 / N;
  }
}

BuiltinProblem three_subsystem(int N) {
  BuiltinProblem p;
  p.name = "three-subsystem";
  SwitchedOCP& ocp = p.ocp;
  ocp.nx = 2;
  ocp.nu = 1;
  ocp.t0 = 0.0;
  ocp.tf = 3.0;
  ocp.initial_state = vec({2.0, 3.0});
  const Vector xref = vec({1.0, -1.0});
  for (int k = 1; k <= 3; ++k) {
    PhaseSpec ph;
    ph.name = "subsystem " + std::to_string(k);
    ph.dynamics = subsystem(k);
    ph.cost = quadratic_stage(xref, vec({1.0, 1.0}), vec({2.0}));
    ph.min_dwell = 0.01;
    ocp.phases.push_back(std::move(ph));
  }
  ocp.terminal_cost = quadratic_state(xref, vec({1.0, 1.0}));
  p.counts = even_split(N, 3);
  p.switching_times = {1.0, 2.0};
  p.dt_max = three_subsystem_dt_max(N);
  return p;
}

BuiltinProblem bouncing_mass(int N) {
  constexpr double kGravity = 9.81;
  constexpr double kRestitution = 0.5;
  BuiltinProblem p;
  p.name = "bouncing-mass";
  SwitchedOCP& ocp = p.ocp;
  ocp.nx = 2;
  ocp.nu = 1;
  ocp.t0 = 0.0;
  ocp.tf = 1.5;
  ocp.initial_state = vec({1.0, 0.0});

  const auto double_integrator = [](double bias) {
    StageFunction f;
    f.dim = 2;
    f.value = [bias](const Vector& x, const Vector& u, Vector& out) {
      out.resize(2);
      out << x[1], u[0] + bias;
    };
    f.jacobian = [](const Vector&, const Vector&, Matrix& dx, Matrix& du) {
      dx.resize(2, 2);
      dx << 0.0, 1.0, 0.0, 0.0;
      du.resize(2, 1);
      du << 0.0, 1.0;
    };
    f.weighted_hessian = [](const Vector&, const Vector&, const Vector&, Matrix& dxx,
                            Matrix& dxu, Matrix& duu) {
      dxx.setZero(2, 2);
      dxu.setZero(2, 1);
      duu.setZero(1, 1);
    };
    return f;
  };

  PhaseSpec flight;
  flight.name = "flight";
  flight.dynamics = double_integrator(-kGravity);
  flight.cost = quadratic_stage(vec({0.0, 0.0}), vec({0.0, 0.1}), vec({0.1}));
  flight.min_dwell = 0.1;
  EventSpec impact;
  StateFunction jump;
  jump.dim = 2;
  jump.value = [](const Vector& x, Vector& out) {
    out.resize(2);
    out << x[0], -kRestitution * x[1];
  };
  jump.jacobian = [](const Vector&, Matrix& dx) {
    dx.resize(2, 2);
    dx << 1.0, 0.0, 0.0, -kRestitution;
  };
  jump.weighted_hessian = [](const Vector&, const Vector&, Matrix& dxx) { dxx.setZero(2, 2); };
  impact.jump_map = jump;
  impact.jump_cost = quadratic_state(vec({0.0, 0.0}), vec({0.0, 0.01}));
  StateFunction ground;
  ground.dim = 1;
  ground.value = [](const Vector& x, Vector& out) {
    out.resize(1);
    out[0] = x[0];
  };
  ground.jacobian = [](const Vector&, Matrix& dx) {
    dx.resize(1, 2);
    dx << 1.0, 0.0;
  };
  ground.weighted_hessian = [](const Vector&, const Vector&, Matrix& dxx) { dxx.setZero(2, 2); };
  impact.switching_condition = ground;
  flight.exit_event = impact;
  ocp.phases.push_back(std::move(flight));

  PhaseSpec rebound;
  rebound.name = "rebound";
  rebound.dynamics = double_integrator(0.0);
  rebound.cost = quadratic_stage(vec({0.3, 0.0}), vec({1.0, 0.1}), vec({0.1}));
  rebound.min_dwell = 0.1;
  ocp.phases.push_back(std::move(rebound));

  ocp.terminal_cost = quadratic_state(vec({0.3, 0.0}), vec({10.0, 1.0}));
  p.counts = even_split(N, 2);
  p.switching_times = {0.5};
  p.dt_max = 1.5 / N * 2.0;
  return p;
}

std::vector<std::string> builtin_problem_names() { return {"three-subsystem", "bouncing-mass"}; }

BuiltinProblem make_builtin(const std::string& name, int N) {
  if (name == "three-subsystem") return three_subsystem(N);
  if (name == "bouncing-mass") return bouncing_mass(N);
  throw std::invalid_argument("unknown problem '" + name + "'");
}

}  // namespace swocp
