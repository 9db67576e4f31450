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

#include "support/fixtures.hpp"

#include <random>

namespace swocp::testing {

SwitchedOCP scalar_lqr(double tf, double x0) {
  SwitchedOCP ocp;
  ocp.nx = 1;
  ocp.nu = 1;
  ocp.t0 = 0.0;
  ocp.tf = tf;
  ocp.initial_state = Vector::Constant(1, x0);
  PhaseSpec ph;
  ph.name = "only";
  ph.dynamics.dim = 1;
  ph.dynamics.value = [](const Vector&, const Vector& u, Vector& out) { out = u; };
  ph.dynamics.jacobian = [](const Vector&, const Vector&, Matrix& dx, Matrix& du) {
    dx = Matrix::Zero(1, 1);
    du = Matrix::Identity(1, 1);
  };
  ph.cost.value = [](const Vector& x, const Vector& u) {
    return 0.5 * (x.squaredNorm() + u.squaredNorm());
  };
  ph.cost.gradient = [](const Vector& x, const Vector& u, Vector& dx, Vector& du) {
    dx = x;
    du = u;
  };
  ph.cost.hessian = [](const Vector&, const Vector&, Matrix& dxx, Matrix& dxu, Matrix& duu) {
    dxx = Matrix::Identity(1, 1);
    dxu = Matrix::Zero(1, 1);
    duu = Matrix::Identity(1, 1);
  };
  ocp.phases.push_back(ph);
  ocp.terminal_cost.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  ocp.terminal_cost.gradient = [](const Vector& x, Vector& dx) { dx = x; };
  ocp.terminal_cost.hessian = [](const Vector&, Matrix& dxx) { dxx = Matrix::Identity(1, 1); };
  return ocp;
}

namespace {

void axpy(std::vector<Vector>& v, double a, const std::vector<Vector>& d) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].size() > 0) v[i] += a * d[i];
  }
}

}  // namespace

Iterate apply_step(const Iterate& it, const NewtonStep& d, double a) {
  Iterate out = it;
  axpy(out.x, a, d.dx);
  axpy(out.u, a, d.du);
  axpy(out.lmd, a, d.dlmd);
  axpy(out.x_pre, a, d.dx_pre);
  axpy(out.lmd_pre, a, d.dlmd_pre);
  axpy(out.zeta, a, d.dzeta);
  axpy(out.z, a, d.dz);
  axpy(out.nu, a, d.dnu);
  for (std::size_t k = 0; k < out.t.size(); ++k) out.t[k] += a * d.dt[k];
  for (std::size_t p = 0; p < out.w.size(); ++p) {
    out.w[p] += a * d.dw[p];
    out.upsilon[p] += a * d.dupsilon[p];
  }
  return out;
}

Vector stack(const KKTResidual& r) {
  std::vector<double> v;
  const auto add = [&v](const Vector& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) v.push_back(x[i]);
  };
  const auto add_all = [&add](const std::vector<Vector>& xs) {
    for (const auto& x : xs) add(x);
  };
  add(r.initial);
  add_all(r.rx);
  add_all(r.ru);
  add_all(r.xbar);
  add_all(r.rx_pre);
  add_all(r.xbar_jump);
  add_all(r.condition);
  add_all(r.rg);
  add_all(r.rz);
  v.insert(v.end(), r.sto.begin(), r.sto.end());
  v.insert(v.end(), r.rdelta.begin(), r.rdelta.end());
  v.insert(v.end(), r.rw.begin(), r.rw.end());
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Iterate perturb(const Iterate& it, unsigned seed, double scale) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  std::uniform_real_distribution<double> pos(0.5, 1.5);
  Iterate out = it;
  const auto jitter = [&](std::vector<Vector>& vs) {
    for (auto& v : vs)
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += n(rng);
  };
  const auto scale_pos = [&](std::vector<Vector>& vs) {
    for (auto& v : vs)
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] *= pos(rng);
  };
  jitter(out.x);
  jitter(out.u);
  jitter(out.lmd);
  jitter(out.x_pre);
  jitter(out.lmd_pre);
  jitter(out.zeta);
  scale_pos(out.z);
  scale_pos(out.nu);
  for (auto& w : out.w) w *= pos(rng);
  for (auto& y : out.upsilon) y *= pos(rng);
  return out;
}

}  // namespace swocp::testing
