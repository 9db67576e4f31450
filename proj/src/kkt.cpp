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

#include "swocp/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

namespace swocp {

namespace {

struct StageJac {
  Vector f;
  Matrix Fx, Fu;
};

StageJac eval_dynamics(const StageFunction& dyn, const Vector& x, const Vector& u) {
  StageJac j;
  dyn.value(x, u, j.f);
  dyn.jacobian(x, u, j.Fx, j.Fu);
  return j;
}

// Hessian over (x, u, τ) of τ·mᵀf(x, u).
Matrix scaled_dynamics_hessian(const StageFunction& dyn, const Vector& x, const Vector& u,
                               double tau, const Vector& m, const StageJac& jac) {
  const auto nx = x.size(), nu = u.size();
  Matrix H = Matrix::Zero(nx + nu + 1, nx + nu + 1);
  if (dyn.weighted_hessian) {
    Matrix fxx, fxu, fuu;
    dyn.weighted_hessian(x, u, m, fxx, fxu, fuu);
    H.topLeftCorner(nx, nx) = tau * fxx;
    H.block(0, nx, nx, nu) = tau * fxu;
    H.block(nx, 0, nu, nx) = tau * fxu.transpose();
    H.block(nx, nx, nu, nu) = tau * fuu;
  }
  H.block(0, nx + nu, nx, 1) = jac.Fx.transpose() * m;
  H.block(nx, nx + nu, nu, 1) = jac.Fu.transpose() * m;
  H.block(nx + nu, 0, 1, nx + nu) = H.block(0, nx + nu, nx + nu, 1).transpose();
  return H;
}

struct ConditionEval {
  Vector e;
  Matrix C, D;
  Vector Et;      // ∂e/∂Δτ
  Matrix H;       // Hessian of ζᵀe over (x, u, Δτ)
};

// e evaluated two explicit Euler steps ahead of (x, u) with the phase's dynamics.
ConditionEval eval_condition(const StageFunction& dyn, const StateFunction& cond,
                             const Vector& x, const Vector& u, double tau, const Vector& zeta,
                             bool with_hessian) {
  const auto nx = x.size(), nu = u.size();
  const StageJac j0 = eval_dynamics(dyn, x, u);
  const Vector x1 = x + tau * j0.f;
  const StageJac j1 = eval_dynamics(dyn, x1, u);
  const Vector x2 = x1 + tau * j1.f;

  ConditionEval out;
  cond.value(x2, out.e);
  Matrix Ce;
  cond.jacobian(x2, Ce);

  const Matrix I = Matrix::Identity(nx, nx);
  const Matrix A1 = I + tau * j0.Fx;
  const Matrix A2 = I + tau * j1.Fx;
  Matrix J2(nx, nx + nu + 1);
  J2.leftCols(nx) = A2 * A1;
  J2.middleCols(nx, nu) = tau * (A2 * j0.Fu + j1.Fu);
  J2.col(nx + nu) = A2 * j0.f + j1.f;

  const Matrix CJ = Ce * J2;
  out.C = CJ.leftCols(nx);
  out.D = CJ.middleCols(nx, nu);
  out.Et = CJ.col(nx + nu);

  if (with_hessian) {
    const Vector mu = Ce.transpose() * zeta;
    out.H = J2.transpose() * [&] {
      Matrix Hee = Matrix::Zero(nx, nx);
      if (cond.weighted_hessian) cond.weighted_hessian(x2, zeta, Hee);
      return Hee;
    }() * J2;
    // μᵀx2 = μᵀx1 + τ μᵀf(x1(x, u, τ), u)
    out.H += scaled_dynamics_hessian(dyn, x, u, tau, mu, j0);
    Matrix Jy = Matrix::Zero(nx + nu + 1, nx + nu + 1);
    Jy.block(0, 0, nx, nx) = A1;
    Jy.block(0, nx, nx, nu) = tau * j0.Fu;
    Jy.block(0, nx + nu, nx, 1) = j0.f;
    Jy.block(nx, nx, nu, nu).setIdentity();
    Jy(nx + nu, nx + nu) = 1.0;
    out.H += Jy.transpose() * scaled_dynamics_hessian(dyn, x1, u, tau, mu, j1) * Jy;
    const Vector mu1 = tau * j1.Fx.transpose() * mu;
    out.H += scaled_dynamics_hessian(dyn, x, u, tau, mu1, j0);
  }
  return out;
}

void require_positive(const Vector& v, const char* what, int index) {
  if (v.size() > 0 && !(v.minCoeff() > 0.0)) {
    throw std::domain_error(std::string(what) + " at stage " + std::to_string(index) +
                            " is not strictly positive");
  }
}

struct StageContext {
  const SwitchedOCP& ocp;
  const TimeGrid& grid;
  const Iterate& it;
  bool hessians;
  bool exact;
};

void eval_stage(const StageContext& c, int i, StageKKT& s) {
  const int p = c.grid.phase_of(i);
  const auto& ph = c.ocp.phases[static_cast<std::size_t>(p)];
  const double dt = c.grid.dt[static_cast<std::size_t>(p)];
  const double inv_n = 1.0 / c.grid.counts[static_cast<std::size_t>(p)];
  const auto ui = static_cast<std::size_t>(i);
  const Vector& x = c.it.x[ui];
  const Vector& u = c.it.u[ui];
  const int sj = c.grid.jump_after(i);
  const Vector& lnext =
      sj >= 0 ? c.it.lmd_pre[static_cast<std::size_t>(sj)] : c.it.lmd[ui + 1];
  const Vector& xnext = sj >= 0 ? c.it.x_pre[static_cast<std::size_t>(sj)] : c.it.x[ui + 1];
  const int nx = c.ocp.nx, nu = c.ocp.nu;

  const StageJac j = eval_dynamics(ph.dynamics, x, u);
  const double l = ph.cost.value(x, u);
  Vector lx, lu;
  ph.cost.gradient(x, u, lx, lu);

  s.A = Matrix::Identity(nx, nx) + dt * j.Fx;
  s.B = dt * j.Fu;
  s.f = inv_n * j.f;
  const Vector Hx = lx + j.Fx.transpose() * lnext;
  const Vector Hu = lu + j.Fu.transpose() * lnext;
  s.hx = inv_n * Hx;
  s.hu = inv_n * Hu;
  s.hbar = inv_n * (l + lnext.dot(j.f));
  s.qtt = 0.0;
  s.xbar = x + dt * j.f - xnext;
  s.rx = dt * Hx + lnext - c.it.lmd[ui];
  s.ru = dt * Hu;

  if (c.hessians) {
    Matrix lxx, lxu, luu;
    ph.cost.hessian(x, u, lxx, lxu, luu);
    s.Qxx_raw = dt * lxx;
    s.Qxu_raw = dt * lxu;
    s.Quu_raw = dt * luu;
    if (c.exact && ph.dynamics.weighted_hessian) {
      Matrix fxx, fxu, fuu;
      ph.dynamics.weighted_hessian(x, u, lnext, fxx, fxu, fuu);
      s.Qxx_raw += dt * fxx;
      s.Qxu_raw += dt * fxu;
      s.Quu_raw += dt * fuu;
    }
  }

  // Path constraints.
  const int ng = c.ocp.constraint_dim(p);
  s.z = c.it.z[ui];
  s.nu = c.it.nu[ui];
  require_positive(s.z, "constraint slack", i);
  require_positive(s.nu, "constraint dual", i);
  if (ng > 0) {
    Vector g;
    ph.constraint.value(x, u, g);
    ph.constraint.jacobian(x, u, s.gx, s.gu);
    s.rg = g + s.z;
    s.zv = s.z.cwiseProduct(s.nu);
    s.rx += s.gx.transpose() * s.nu;
    s.ru += s.gu.transpose() * s.nu;
    if (c.hessians && c.exact && ph.constraint.weighted_hessian) {
      Matrix gxx, gxu, guu;
      ph.constraint.weighted_hessian(x, u, s.nu, gxx, gxu, guu);
      s.Qxx_raw += gxx;
      s.Qxu_raw += gxu;
      s.Quu_raw += guu;
    }
  } else {
    s.gx.resize(0, nx);
    s.gu.resize(0, nu);
    s.rg.resize(0);
    s.zv.resize(0);
  }

  // Switching condition.
  const int sc = c.grid.condition_at(i);
  s.has_condition = sc >= 0;
  if (s.has_condition) {
    const auto& cond = *c.ocp.event(sc)->switching_condition;
    const Vector& zeta = c.it.zeta[static_cast<std::size_t>(sc)];
    const ConditionEval ce =
        eval_condition(ph.dynamics, cond, x, u, dt, zeta, c.hessians && c.exact);
    s.C = ce.C;
    s.D = ce.D;
    s.E = inv_n * ce.Et;
    s.ebar = ce.e;
    s.rx += s.C.transpose() * zeta;
    s.ru += s.D.transpose() * zeta;
    s.hbar += s.E.dot(zeta);
    if (c.hessians && c.exact) {
      s.Qxx_raw += ce.H.topLeftCorner(nx, nx);
      s.Qxu_raw += ce.H.block(0, nx, nx, nu);
      s.Quu_raw += ce.H.block(nx, nx, nu, nu);
      s.hx += inv_n * ce.H.block(0, nx + nu, nx, 1);
      s.hu += inv_n * ce.H.block(nx, nx + nu, nu, 1);
      s.qtt = inv_n * inv_n * ce.H(nx + nu, nx + nu);
    }
  } else {
    s.C.resize(0, nx);
    s.D.resize(0, nu);
    s.E.resize(0);
    s.ebar.resize(0);
  }

  // Condensation of the slack and bound dual directions.
  s.lx = s.rx;
  s.lu = s.ru;
  if (ng > 0) {
    const double eps = c.it.barrier;
    const Vector rz = s.zv.array() - eps;
    const Vector corr = (s.nu.cwiseProduct(s.rg) - rz).cwiseQuotient(s.z);
    s.lx += s.gx.transpose() * corr;
    s.lu += s.gu.transpose() * corr;
  }
  if (c.hessians) {
    s.Qxx = s.Qxx_raw;
    s.Qxu = s.Qxu_raw;
    s.Quu = s.Quu_raw;
    if (ng > 0) {
      const Vector ratio = s.nu.cwiseQuotient(s.z);
      s.Qxx += s.gx.transpose() * ratio.asDiagonal() * s.gx;
      s.Qxu += s.gx.transpose() * ratio.asDiagonal() * s.gu;
      s.Quu += s.gu.transpose() * ratio.asDiagonal() * s.gu;
    }
  }
}


void eval_boundaries(const SwitchedOCP& ocp, const Iterate& it, bool hessians, bool exact,
                     KKTSystem& sys) {
  const TimeGrid& g = sys.grid;
  const int N = g.N();
  const int K = g.num_switches();
  const int nx = ocp.nx;
  const auto uN = static_cast<std::size_t>(N);

  sys.x0_target = ocp.initial_state - it.x[0];

  Vector vx;
  ocp.terminal_cost.gradient(it.x[uN], vx);
  sys.lxN = vx - it.lmd[uN];
  if (hessians) {
    ocp.terminal_cost.hessian(it.x[uN], sys.QxxN);
  }

  sys.jumps.assign(static_cast<std::size_t>(K), JumpKKT());
  for (int s = 0; s < K; ++s) {
    if (!g.jump[static_cast<std::size_t>(s)]) continue;
    const auto us = static_cast<std::size_t>(s);
    const auto& ev = *ocp.event(s);
    const auto next = static_cast<std::size_t>(g.phase_begin[us + 1]);
    const Vector& xm = it.x_pre[us];
    const Vector& lnext = it.lmd[next];
    JumpKKT& J = sys.jumps[us];
    Vector fj;
    if (ev.jump_map) {
      ev.jump_map->value(xm, fj);
      ev.jump_map->jacobian(xm, J.A);
    } else {
      fj = xm;
      J.A = Matrix::Identity(nx, nx);
    }
    J.xbar = fj - it.x[next];
    J.lx = J.A.transpose() * lnext - it.lmd_pre[us];
    J.Q = Matrix::Zero(nx, nx);
    if (ev.jump_cost) {
      Vector gj;
      ev.jump_cost->gradient(xm, gj);
      J.lx += gj;
      if (hessians) {
        Matrix Hj;
        ev.jump_cost->hessian(xm, Hj);
        J.Q += Hj;
      }
    }
    if (hessians && exact && ev.jump_map && ev.jump_map->weighted_hessian) {
      Matrix Hf;
      ev.jump_map->weighted_hessian(xm, lnext, Hf);
      J.Q += Hf;
    }
  }

  sys.phases.assign(static_cast<std::size_t>(K + 1), PhaseKKT());
  for (int p = 0; p <= K; ++p) {
    const auto up = static_cast<std::size_t>(p);
    PhaseKKT& ph = sys.phases[up];
    ph.w = it.w[up];
    ph.upsilon = it.upsilon[up];
    if (!(ph.w > 0.0) || !(ph.upsilon > 0.0)) {
      throw std::domain_error("dwell-time slack or dual of phase " + std::to_string(p + 1) +
                              " is not strictly positive");
    }
    ph.wv = ph.w * ph.upsilon;
    ph.r_w = ph.wv - it.barrier;
    ph.r_delta = ocp.phases[up].min_dwell - g.duration(p) + ph.w;
    ph.Qtt = ph.upsilon / ph.w;
    const double qbar = (ph.upsilon * ph.r_delta - ph.r_w) / ph.w;
    ph.qt = -ph.upsilon - qbar;
    double sum = 0.0;
    for (int i = g.phase_begin[up]; i < g.phase_begin[up + 1]; ++i) {
      sum += sys.stages[static_cast<std::size_t>(i)].hbar;
    }
    ph.dual_sum = sum - ph.upsilon;
  }
}

void check_shapes(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it) {
  const auto N = static_cast<std::size_t>(grid.N());
  const auto K = static_cast<std::size_t>(grid.num_switches());
  if (it.x.size() != N + 1 || it.lmd.size() != N + 1 || it.u.size() != N || it.z.size() != N ||
      it.nu.size() != N || it.t.size() != K || it.x_pre.size() != K || it.lmd_pre.size() != K ||
      it.zeta.size() != K || it.w.size() != K + 1 || it.upsilon.size() != K + 1 ||
      ocp.num_switches() != grid.num_switches()) {
    throw std::invalid_argument("iterate dimensions do not match the grid");
  }
}

KKTSystem make_system(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it) {
  check_shapes(ocp, grid, it);
  KKTSystem sys;
  sys.grid = with_switching_times(grid, it.t);
  sys.nx = ocp.nx;
  sys.nu = ocp.nu;
  sys.barrier = it.barrier;
  sys.stages.resize(static_cast<std::size_t>(grid.N()));
  return sys;
}

void run_stages(const StageContext& ctx, std::vector<StageKKT>& stages, int threads) {
  const int N = static_cast<int>(stages.size());
  threads = std::max(1, std::min(threads, N));
  if (threads == 1) {
    for (int i = 0; i < N; ++i) eval_stage(ctx, i, stages[static_cast<std::size_t>(i)]);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      const int lo = N * w / threads, hi = N * (w + 1) / threads;
      try {
        for (int i = lo; i < hi; ++i) eval_stage(ctx, i, stages[static_cast<std::size_t>(i)]);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

KKTSystem assemble(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it,
                   const AssembleOptions& opts) {
  KKTSystem sys = make_system(ocp, grid, it);
  const StageContext ctx{ocp, sys.grid, it, true, opts.hessian == HessianMode::kExact};
  run_stages(ctx, sys.stages, opts.threads);
  eval_boundaries(ocp, it, true, ctx.exact, sys);
  return sys;
}

KKTSystem assemble_stages(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it,
                          const AssembleOptions& opts, std::span<const int> order) {
  KKTSystem sys = make_system(ocp, grid, it);
  const StageContext ctx{ocp, sys.grid, it, true, opts.hessian == HessianMode::kExact};
  for (int i : order) eval_stage(ctx, i, sys.stages[static_cast<std::size_t>(i)]);
  return sys;
}

KKTResidual eval_residual(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it) {
  KKTSystem sys = make_system(ocp, grid, it);
  const StageContext ctx{ocp, sys.grid, it, false, false};
  run_stages(ctx, sys.stages, 1);
  eval_boundaries(ocp, it, false, false, sys);
  return residual_of(sys);
}

KKTResidual residual_of(const KKTSystem& sys) {
  const TimeGrid& g = sys.grid;
  const int N = g.N();
  const int K = g.num_switches();
  const double eps = sys.barrier;
  KKTResidual r;

  double sq = 0.0, mx = 0.0, sq0 = 0.0, mx0 = 0.0;
  const auto add = [&](const Vector& v) {
    if (v.size() == 0) return;
    const double s2 = v.squaredNorm(), m = v.cwiseAbs().maxCoeff();
    sq += s2;
    sq0 += s2;
    mx = std::max(mx, m);
    mx0 = std::max(mx0, m);
  };
  const auto add_scalar = [&](double v) { add(Vector::Constant(1, v)); };

  r.initial = -sys.x0_target;
  add(r.initial);
  r.rx.resize(static_cast<std::size_t>(N + 1));
  r.ru.resize(static_cast<std::size_t>(N));
  r.xbar.resize(static_cast<std::size_t>(N));
  r.rg.resize(static_cast<std::size_t>(N));
  r.rz.resize(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const StageKKT& s = sys.stages[ui];
    r.rx[ui] = s.rx;
    r.ru[ui] = s.ru;
    r.xbar[ui] = s.xbar;
    r.rg[ui] = s.rg;
    r.rz[ui] = s.zv.array() - eps;
    add(s.rx);
    add(s.ru);
    add(s.xbar);
    add(s.rg);
    if (s.zv.size() > 0) {
      sq += r.rz[ui].squaredNorm();
      mx = std::max(mx, r.rz[ui].cwiseAbs().maxCoeff());
      sq0 += s.zv.squaredNorm();
      mx0 = std::max(mx0, s.zv.cwiseAbs().maxCoeff());
    }
  }
  r.rx[static_cast<std::size_t>(N)] = sys.lxN;
  add(sys.lxN);

  r.rx_pre.assign(static_cast<std::size_t>(K), Vector());
  r.xbar_jump.assign(static_cast<std::size_t>(K), Vector());
  r.condition.assign(static_cast<std::size_t>(K), Vector());
  r.sto.assign(static_cast<std::size_t>(K), 0.0);
  for (int s = 0; s < K; ++s) {
    const auto us = static_cast<std::size_t>(s);
    if (g.jump[us]) {
      r.rx_pre[us] = sys.jumps[us].lx;
      r.xbar_jump[us] = sys.jumps[us].xbar;
      add(r.rx_pre[us]);
      add(r.xbar_jump[us]);
    }
    if (g.condition_stage[us] >= 0) {
      r.condition[us] = sys.stages[static_cast<std::size_t>(g.condition_stage[us])].ebar;
      add(r.condition[us]);
    }
    r.sto[us] = sys.phases[us].dual_sum - sys.phases[us + 1].dual_sum;
    add_scalar(r.sto[us]);
  }
  r.rdelta.resize(static_cast<std::size_t>(K + 1));
  r.rw.resize(static_cast<std::size_t>(K + 1));
  for (int p = 0; p <= K; ++p) {
    const PhaseKKT& ph = sys.phases[static_cast<std::size_t>(p)];
    r.rdelta[static_cast<std::size_t>(p)] = ph.r_delta;
    r.rw[static_cast<std::size_t>(p)] = ph.r_w;
    add_scalar(ph.r_delta);
    sq += ph.r_w * ph.r_w;
    mx = std::max(mx, std::abs(ph.r_w));
    sq0 += ph.wv * ph.wv;
    mx0 = std::max(mx0, std::abs(ph.wv));
  }
  r.l2 = std::sqrt(sq);
  r.max = mx;
  r.l2_unperturbed = std::sqrt(sq0);
  r.max_unperturbed = mx0;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

double phase_delta(const TimeGrid& g, const std::vector<double>& dt, int p) {
  const int K = g.num_switches();
  double d = 0.0;
  if (p < K) d += dt[static_cast<std::size_t>(p)];
  if (p > 0) d -= dt[static_cast<std::size_t>(p - 1)];
  return d;
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
double inf_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

double linearized_residual(const KKTSystem& sys, const NewtonStep& d) {
  const TimeGrid& g = sys.grid;
  const int N = g.N();
  const int K = g.num_switches();
  double worst = 0.0;
  const auto take = [&](const Vector& v) { worst = std::max(worst, inf_norm(v)); };
  const auto take_scalar = [&](double v) { worst = std::max(worst, std::abs(v)); };

  take(d.dx[0] - sys.x0_target);
  std::vector<double> time_rows(static_cast<std::size_t>(K + 1), 0.0);
  for (int i = 0; i < N; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const StageKKT& s = sys.stages[ui];
    const int p = g.phase_of(i);
    const double dl = phase_delta(g, d.dt, p);
    const int sj = g.jump_after(i);
    const Vector& dx_next = sj >= 0 ? d.dx_pre[static_cast<std::size_t>(sj)] : d.dx[ui + 1];
    const Vector& dl_next = sj >= 0 ? d.dlmd_pre[static_cast<std::size_t>(sj)] : d.dlmd[ui + 1];
    const int sc = g.condition_at(i);

    take(s.A * d.dx[ui] + s.B * d.du[ui] + s.f * dl - dx_next + s.xbar);
    Vector rx = s.Qxx_raw * d.dx[ui] + s.Qxu_raw * d.du[ui] + s.hx * dl +
                s.A.transpose() * dl_next - d.dlmd[ui] + s.rx;
    Vector ru = s.Qxu_raw.transpose() * d.dx[ui] + s.Quu_raw * d.du[ui] + s.hu * dl +
                s.B.transpose() * dl_next + s.ru;
    double tr = s.hx.dot(d.dx[ui]) + s.hu.dot(d.du[ui]) + s.f.dot(dl_next) + s.qtt * dl;
    if (s.rg.size() > 0) {
      rx += s.gx.transpose() * d.dnu[ui];
      ru += s.gu.transpose() * d.dnu[ui];
      take(s.gx * d.dx[ui] + s.gu * d.du[ui] + d.dz[ui] + s.rg);
      take(s.nu.cwiseProduct(d.dz[ui]) + s.z.cwiseProduct(d.dnu[ui]) +
           Vector(s.zv.array() - sys.barrier));
    }
    if (sc >= 0) {
      const Vector& dzeta = d.dzeta[static_cast<std::size_t>(sc)];
      rx += s.C.transpose() * dzeta;
      ru += s.D.transpose() * dzeta;
      tr += s.E.dot(dzeta);
      take(s.C * d.dx[ui] + s.D * d.du[ui] + s.E * dl + s.ebar);
    }
    take(rx);
    take(ru);
    time_rows[static_cast<std::size_t>(p)] += tr;
  }
  take(sys.QxxN * d.dx[static_cast<std::size_t>(N)] - d.dlmd[static_cast<std::size_t>(N)] +
       sys.lxN);
  for (int s = 0; s < K; ++s) {
    const auto us = static_cast<std::size_t>(s);
    if (!g.jump[us]) continue;
    const JumpKKT& J = sys.jumps[us];
    const auto next = static_cast<std::size_t>(g.phase_begin[us + 1]);
    take(J.A * d.dx_pre[us] - d.dx[next] + J.xbar);
    take(J.Q * d.dx_pre[us] + J.A.transpose() * d.dlmd[next] - d.dlmd_pre[us] + J.lx);
  }
  for (int p = 0; p <= K; ++p) {
    const auto up = static_cast<std::size_t>(p);
    const PhaseKKT& ph = sys.phases[up];
    const double dl = phase_delta(g, d.dt, p);
    time_rows[up] += ph.dual_sum - d.dupsilon[up];
    take_scalar(ph.r_delta - dl + d.dw[up]);
    take_scalar(ph.upsilon * d.dw[up] + ph.w * d.dupsilon[up] + ph.r_w);
  }
  for (int s = 0; s < K; ++s) {
    const auto us = static_cast<std::size_t>(s);
    const double shift = us < sys.dt_shift.size() ? sys.dt_shift[us] * d.dt[us] : 0.0;
    take_scalar(time_rows[us] - time_rows[us + 1] + shift);
  }
  return worst;
}

double data_scale(const KKTSystem& sys) {
  double m = std::max(inf_norm(sys.QxxN), inf_norm(sys.lxN));
  m = std::max(m, inf_norm(sys.x0_target));
  for (const auto& s : sys.stages) {
    for (const Matrix* M : {&s.Qxx, &s.Qxu, &s.Quu, &s.A, &s.B, &s.gx, &s.gu, &s.C, &s.D}) {
      m = std::max(m, inf_norm(*M));
    }
    for (const Vector* v : {&s.f, &s.hx, &s.hu, &s.lx, &s.lu, &s.xbar, &s.rg, &s.E, &s.ebar}) {
      m = std::max(m, inf_norm(*v));
    }
    m = std::max({m, std::abs(s.hbar), std::abs(s.qtt)});
  }
  for (std::size_t s = 0; s < sys.jumps.size(); ++s) {
    if (!sys.grid.jump[s]) continue;
    const auto& J = sys.jumps[s];
    m = std::max({m, inf_norm(J.Q), inf_norm(J.A), inf_norm(J.lx), inf_norm(J.xbar)});
  }
  for (const auto& ph : sys.phases) {
    m = std::max({m, std::abs(ph.Qtt), std::abs(ph.qt), std::abs(ph.r_delta), std::abs(ph.r_w)});
  }
  return m;
}

}  // namespace swocp
