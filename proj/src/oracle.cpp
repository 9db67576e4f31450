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

#include "swocp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>

#include <Eigen/LU>

namespace swocp {

namespace {

// Coefficients mapping Δt onto δ_p = Δt_p − Δt_{p−1}.
void add_delta(std::vector<std::pair<int, double>>& out, const DenseKKT& d, int p) {
  out.clear();
  if (p < d.K) out.emplace_back(d.t + p, 1.0);
  if (p > 0) out.emplace_back(d.t + p - 1, -1.0);
}

}  // namespace

DenseKKT assemble_dense(const KKTSystem& sys) {
  const TimeGrid& g = sys.grid;
  const int N = g.N();
  const int K = g.num_switches();
  const int nx = sys.nx, nu = sys.nu;
  if (static_cast<int>(sys.stages.size()) != N) {
    throw std::invalid_argument("stage count does not match the grid");
  }
  DenseKKT d;
  d.nx = nx;
  d.nu = nu;
  d.K = K;
  int off = 0;
  d.x.resize(static_cast<std::size_t>(N + 1));
  for (int i = 0; i <= N; ++i, off += nx) d.x[static_cast<std::size_t>(i)] = off;
  d.x_pre.assign(static_cast<std::size_t>(K), -1);
  for (int s = 0; s < K; ++s) {
    if (g.jump[static_cast<std::size_t>(s)]) {
      d.x_pre[static_cast<std::size_t>(s)] = off;
      off += nx;
    }
  }
  d.u.resize(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i, off += nu) d.u[static_cast<std::size_t>(i)] = off;
  d.t = off;
  off += K;
  d.num_primal = off;
  d.lmd.resize(static_cast<std::size_t>(N + 1));
  for (int i = 0; i <= N; ++i, off += nx) d.lmd[static_cast<std::size_t>(i)] = off;
  d.lmd_pre.assign(static_cast<std::size_t>(K), -1);
  for (int s = 0; s < K; ++s) {
    if (g.jump[static_cast<std::size_t>(s)]) {
      d.lmd_pre[static_cast<std::size_t>(s)] = off;
      off += nx;
    }
  }
  d.zeta.assign(static_cast<std::size_t>(K), -1);
  d.zeta_dim.assign(static_cast<std::size_t>(K), 0);
  for (int s = 0; s < K; ++s) {
    const int ci = g.condition_stage[static_cast<std::size_t>(s)];
    if (ci >= 0) {
      const int ne = static_cast<int>(sys.stages[static_cast<std::size_t>(ci)].ebar.size());
      d.zeta[static_cast<std::size_t>(s)] = off;
      d.zeta_dim[static_cast<std::size_t>(s)] = ne;
      off += ne;
    }
  }

  Matrix& M = d.matrix;
  Vector& r = d.rhs;
  M = Matrix::Zero(off, off);
  r = Vector::Zero(off);
  // Symmetric constraint block: row `row` of J, column `col` of the primal.
  const auto jac = [&M](int row, int col, const Matrix& blk) {
    M.block(row, col, blk.rows(), blk.cols()) += blk;
    M.block(col, row, blk.cols(), blk.rows()) += blk.transpose();
  };
  std::vector<std::pair<int, double>> dp;

  // Initial state: λ_0ᵀ(x̄ − x_0 − Δx_0).
  jac(d.lmd[0], d.x[0], -Matrix::Identity(nx, nx));
  r.segment(d.lmd[0], nx) = sys.x0_target;

  for (int i = 0; i < N; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const StageKKT& s = sys.stages[ui];
    const int p = g.phase_of(i);
    add_delta(dp, d, p);
    const int xi = d.x[ui], uj = d.u[ui];
    M.block(xi, xi, nx, nx) += s.Qxx;
    M.block(xi, uj, nx, nu) += s.Qxu;
    M.block(uj, xi, nu, nx) += s.Qxu.transpose();
    M.block(uj, uj, nu, nu) += s.Quu;
    r.segment(xi, nx) += s.lx;
    r.segment(uj, nu) += s.lu;
    for (const auto& [col, c] : dp) {
      M.block(col, xi, 1, nx) += c * s.hx.transpose();
      M.block(xi, col, nx, 1) += c * s.hx;
      M.block(col, uj, 1, nu) += c * s.hu.transpose();
      M.block(uj, col, nu, 1) += c * s.hu;
      r[col] += c * s.hbar;
      for (const auto& [col2, c2] : dp) M(col, col2) += c * c2 * s.qtt;
    }
    // Dynamics into the next node.
    const int sj = g.jump_after(i);
    const int lrow = sj >= 0 ? d.lmd_pre[static_cast<std::size_t>(sj)] : d.lmd[ui + 1];
    const int xnext = sj >= 0 ? d.x_pre[static_cast<std::size_t>(sj)] : d.x[ui + 1];
    jac(lrow, xi, s.A);
    jac(lrow, uj, s.B);
    jac(lrow, xnext, -Matrix::Identity(nx, nx));
    for (const auto& [col, c] : dp) jac(lrow, col, c * Matrix(s.f));
    r.segment(lrow, nx) += s.xbar;
    // Switching condition.
    const int sc = g.condition_at(i);
    if (sc >= 0) {
      const int zr = d.zeta[static_cast<std::size_t>(sc)];
      jac(zr, xi, s.C);
      jac(zr, uj, s.D);
      for (const auto& [col, c] : dp) jac(zr, col, c * Matrix(s.E));
      r.segment(zr, s.ebar.size()) += s.ebar;
    }
  }
  const int xN = d.x[static_cast<std::size_t>(N)];
  M.block(xN, xN, nx, nx) += sys.QxxN;
  r.segment(xN, nx) += sys.lxN;

  for (int s = 0; s < K; ++s) {
    const auto us = static_cast<std::size_t>(s);
    if (!g.jump[us]) continue;
    const JumpKKT& J = sys.jumps[us];
    const int xp = d.x_pre[us];
    const auto next = static_cast<std::size_t>(g.phase_begin[us + 1]);
    M.block(xp, xp, nx, nx) += J.Q;
    r.segment(xp, nx) += J.lx;
    jac(d.lmd[next], xp, J.A);
    jac(d.lmd[next], d.x[next], -Matrix::Identity(nx, nx));
    r.segment(d.lmd[next], nx) += J.xbar;
  }
  for (int p = 0; p <= K; ++p) {
    const PhaseKKT& ph = sys.phases[static_cast<std::size_t>(p)];
    add_delta(dp, d, p);
    for (const auto& [col, c] : dp) {
      r[col] += c * ph.qt;
      for (const auto& [col2, c2] : dp) M(col, col2) += c * c2 * ph.Qtt;
    }
  }
  for (std::size_t s = 0; s < sys.dt_shift.size(); ++s) {
    M(d.t + static_cast<int>(s), d.t + static_cast<int>(s)) += sys.dt_shift[s];
  }
  return d;
}

NewtonStep solve_dense(const DenseKKT& d) {
  Eigen::FullPivLU<Matrix> lu(d.matrix);
  if (!lu.isInvertible()) {
    const int deficiency = d.size() - static_cast<int>(lu.rank());
    throw OracleError("dense KKT matrix is singular (rank deficiency " +
                          std::to_string(deficiency) + ")",
                      deficiency);
  }
  const Vector sol = -lu.solve(d.rhs);
  const auto N = d.u.size();
  const auto K = static_cast<std::size_t>(d.K);
  NewtonStep st;
  st.dx.resize(N + 1);
  st.dlmd.resize(N + 1);
  for (std::size_t i = 0; i <= N; ++i) {
    st.dx[i] = sol.segment(d.x[i], d.nx);
    st.dlmd[i] = sol.segment(d.lmd[i], d.nx);
  }
  st.du.resize(N);
  for (std::size_t i = 0; i < N; ++i) st.du[i] = sol.segment(d.u[i], d.nu);
  st.dt.resize(K);
  for (std::size_t s = 0; s < K; ++s) st.dt[s] = sol[d.t + static_cast<int>(s)];
  st.dx_pre.assign(K, Vector());
  st.dlmd_pre.assign(K, Vector());
  st.dzeta.assign(K, Vector());
  for (std::size_t s = 0; s < K; ++s) {
    if (d.x_pre[s] >= 0) {
      st.dx_pre[s] = sol.segment(d.x_pre[s], d.nx);
      st.dlmd_pre[s] = sol.segment(d.lmd_pre[s], d.nx);
    }
    if (d.zeta[s] >= 0) st.dzeta[s] = sol.segment(d.zeta[s], d.zeta_dim[s]);
  }
  return st;
}

Matrix stage_time_hessian(const StageKKT& s) {
  const auto nx = s.Qxx.rows(), nu = s.Quu.rows();
  Matrix H = Matrix::Zero(1 + nx + nu, 1 + nx + nu);
  H(0, 0) = s.qtt;
  H.block(0, 1, 1, nx) = s.hx.transpose();
  H.block(0, 1 + nx, 1, nu) = s.hu.transpose();
  H.block(1, 0, nx, 1) = s.hx;
  H.block(1 + nx, 0, nu, 1) = s.hu;
  H.block(1, 1, nx, nx) = s.Qxx;
  H.block(1, 1 + nx, nx, nu) = s.Qxu;
  H.block(1 + nx, 1, nu, nx) = s.Qxu.transpose();
  H.block(1 + nx, 1 + nx, nu, nu) = s.Quu;
  return H;
}

namespace {

void compare_group(ComparisonReport& rep, const std::string& name, const std::vector<Vector>& a,
                   const std::vector<Vector>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("step shape mismatch in " + name);
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) throw std::invalid_argument("step shape mismatch in " + name);
    if (a[i].size() == 0) continue;
    diff = std::max(diff, (a[i] - b[i]).cwiseAbs().maxCoeff());
    ref = std::max(ref, b[i].cwiseAbs().maxCoeff());
  }
  rep.groups.push_back({name, diff / (1.0 + ref)});
}

std::vector<Vector> as_vectors(const std::vector<double>& v) {
  std::vector<Vector> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(Vector::Constant(1, x));
  return out;
}

bool comparable(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  return !a.empty() && a.size() == b.size();
}

}  // namespace

ComparisonReport compare(const NewtonStep& a, const NewtonStep& b, double tol) {
  ComparisonReport rep;
  compare_group(rep, "dx", a.dx, b.dx);
  compare_group(rep, "du", a.du, b.du);
  compare_group(rep, "dt", as_vectors(a.dt), as_vectors(b.dt));
  compare_group(rep, "dlmd", a.dlmd, b.dlmd);
  compare_group(rep, "dx_pre", a.dx_pre, b.dx_pre);
  compare_group(rep, "dlmd_pre", a.dlmd_pre, b.dlmd_pre);
  compare_group(rep, "dzeta", a.dzeta, b.dzeta);
  if (comparable(a.dz, b.dz)) compare_group(rep, "dz", a.dz, b.dz);
  if (comparable(a.dnu, b.dnu)) compare_group(rep, "dnu", a.dnu, b.dnu);
  if (!a.dw.empty() && a.dw.size() == b.dw.size()) {
    compare_group(rep, "dw", as_vectors(a.dw), as_vectors(b.dw));
    compare_group(rep, "dupsilon", as_vectors(a.dupsilon), as_vectors(b.dupsilon));
  }
  for (const auto& g : rep.groups) {
    if (std::isnan(g.deviation) || g.deviation > rep.worst) {
      rep.worst = g.deviation;
      rep.worst_group = g.group;
    }
    if (!(g.deviation <= tol)) rep.passed = false;
  }
  return rep;
}

void write_matrix_market(const DenseKKT& d, const std::string& prefix) {
  std::ofstream m(prefix + ".mtx");
  if (!m) throw std::runtime_error("cannot write " + prefix + ".mtx");
  m << std::setprecision(17);
  int nnz = 0;
  for (int j = 0; j < d.size(); ++j) {
    for (int i = 0; i < d.size(); ++i) nnz += d.matrix(i, j) != 0.0;
  }
  m << "%%MatrixMarket matrix coordinate real general\n"
    << d.size() << ' ' << d.size() << ' ' << nnz << '\n';
  for (int j = 0; j < d.size(); ++j) {
    for (int i = 0; i < d.size(); ++i) {
      if (d.matrix(i, j) != 0.0) m << i + 1 << ' ' << j + 1 << ' ' << d.matrix(i, j) << '\n';
    }
  }
  std::ofstream r(prefix + "_rhs.mtx");
  if (!r) throw std::runtime_error("cannot write " + prefix + "_rhs.mtx");
  r << std::setprecision(17) << "%%MatrixMarket matrix array real general\n"
    << d.size() << " 1\n";
  for (int i = 0; i < d.size(); ++i) r << d.rhs[i] << '\n';
}

}  // namespace swocp
