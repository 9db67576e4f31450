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

#include "swocp/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace swocp {

namespace {

// Cost-to-go seen from the stage before: the quantities with a prime.
struct CostToGo {
  const Matrix* P;
  const Vector* s;
  const Vector* Psi;  // nullptr ⇒ zero
  const Vector* Phi;  // nullptr ⇒ zero
  double xi, chi, rho, eta, iota;
};

CostToGo view(const RiccatiStage& r) {
  return {&r.P, &r.s, &r.Psi, &r.Phi, r.xi, r.chi, r.rho, r.eta, r.iota};
}
CostToGo view(const Transition& t) {
  return {&t.P, &t.s, nullptr, &t.Phi, 0.0, 0.0, t.rho, 0.0, t.iota};
}
CostToGo view(const JumpFactor& j) {
  return {&j.P, &j.s, nullptr, &j.Phi, 0.0, 0.0, j.rho, 0.0, j.iota};
}

void symmetrize(Matrix& P) { P = 0.5 * (P + P.transpose()).eval(); }

void stage_step(const StageKKT& q, const CostToGo& nx_, int i, bool has_condition,
                RiccatiStage& r) {
  const int n = static_cast<int>(q.A.rows());
  const Matrix& Pn = *nx_.P;
  const Vector Psin = nx_.Psi ? *nx_.Psi : Vector::Zero(n);
  const Vector Phin = nx_.Phi ? *nx_.Phi : Vector::Zero(n);

  const Matrix AtP = q.A.transpose() * Pn;
  const Matrix BtP = q.B.transpose() * Pn;
  const Matrix F = q.Qxx + AtP * q.A;
  const Matrix H = q.Qxu + AtP * q.B;
  Matrix G = q.Quu + BtP * q.B;
  symmetrize(G);

  const Vector Pf = Pn * q.f;
  const Vector psi_x = q.hx + q.A.transpose() * (Pf + Psin);
  const Vector psi_u = q.hu + q.B.transpose() * (Pf + Psin);
  const Vector phi_x = q.A.transpose() * Phin;
  const Vector phi_u = q.B.transpose() * Phin;
  const double dd = q.qtt + nx_.xi + q.f.dot(Pf) + 2.0 * Psin.dot(q.f);
  const double da = nx_.chi + Phin.dot(q.f);
  const Vector v = Pn * q.xbar - *nx_.s;
  const Vector lin_x = q.lx + q.A.transpose() * v;
  const Vector lin_u = q.lu + q.B.transpose() * v;
  const double lin_d = q.hbar + nx_.eta + q.f.dot(v) + Psin.dot(q.xbar);
  const double lin_a = nx_.iota + Phin.dot(q.xbar);

  const int nu = static_cast<int>(G.rows());
  if (!has_condition) {
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success) {
      throw RiccatiError(RiccatiError::Kind::kSosc, i, -1,
                         "G is not positive definite at stage " + std::to_string(i) +
                             " (second-order sufficient condition violated)");
    }
    r.min_chol_diag = nu > 0 ? Matrix(llt.matrixL()).diagonal().minCoeff() : 0.0;
    r.K = -llt.solve(H.transpose());
    r.T = -llt.solve(psi_u);
    r.W = -llt.solve(phi_u);
    r.k = -llt.solve(lin_u);
    r.P = F - r.K.transpose() * G * r.K;
    r.Psi = psi_x + H * r.T;
    r.Phi = phi_x + H * r.W;
    r.xi = dd + psi_u.dot(r.T);
    r.chi = da + psi_u.dot(r.W);
    r.rho = nx_.rho + phi_u.dot(r.W);
    r.s = -(lin_x + H * r.k);
    r.eta = lin_d + psi_u.dot(r.k);
    r.iota = lin_a + phi_u.dot(r.k);
  } else {
    const int ne = static_cast<int>(q.D.rows());
    Eigen::FullPivLU<Matrix> dlu(q.D);
    if (dlu.rank() < ne) {
      throw RiccatiError(RiccatiError::Kind::kLicq, i, -1,
                         "switching-condition Jacobian w.r.t. the control is rank deficient "
                         "at stage " + std::to_string(i));
    }
    // Positive definiteness of G on the null space of D.
    const Matrix Z = dlu.kernel();
    r.min_chol_diag = std::numeric_limits<double>::infinity();
    if (nu > ne) {
      Matrix Gr = Z.transpose() * G * Z;
      symmetrize(Gr);
      Eigen::LLT<Matrix> llt(Gr);
      if (llt.info() != Eigen::Success) {
        throw RiccatiError(RiccatiError::Kind::kSosc, i, -1,
                           "reduced Hessian is not positive definite at stage " +
                               std::to_string(i) +
                               " (second-order sufficient condition violated)");
      }
      r.min_chol_diag = Matrix(llt.matrixL()).diagonal().minCoeff();
    }
    Matrix KKT = Matrix::Zero(nu + ne, nu + ne);
    KKT.topLeftCorner(nu, nu) = G;
    KKT.topRightCorner(nu, ne) = q.D.transpose();
    KKT.bottomLeftCorner(ne, nu) = q.D;
    Matrix rhs = Matrix::Zero(nu + ne, n + 3);
    rhs.topLeftCorner(nu, n) = H.transpose();
    rhs.block(0, n, nu, 1) = psi_u;
    rhs.block(0, n + 1, nu, 1) = phi_u;
    rhs.block(0, n + 2, nu, 1) = lin_u;
    rhs.bottomLeftCorner(ne, n) = q.C;
    rhs.block(nu, n, ne, 1) = q.E;
    rhs.block(nu, n + 2, ne, 1) = q.ebar;
    Eigen::FullPivLU<Matrix> lu(KKT);
    if (!lu.isInvertible()) {
      throw RiccatiError(RiccatiError::Kind::kSosc, i, -1,
                         "bordered switching-condition system is singular at stage " +
                             std::to_string(i));
    }
    const Matrix X = -lu.solve(rhs);
    r.K = X.topLeftCorner(nu, n);
    r.T = X.block(0, n, nu, 1);
    r.W = X.block(0, n + 1, nu, 1);
    r.k = X.block(0, n + 2, nu, 1);
    r.M = X.bottomLeftCorner(ne, n);
    r.L = X.block(nu, n, ne, 1);
    r.Nz = X.block(nu, n + 1, ne, 1);
    r.m = X.block(nu, n + 2, ne, 1);
    r.P = F - r.K.transpose() * G * r.K + r.M.transpose() * q.C + q.C.transpose() * r.M;
    r.Psi = psi_x + H * r.T + q.C.transpose() * r.L;
    r.Phi = phi_x + H * r.W + q.C.transpose() * r.Nz;
    r.xi = dd + psi_u.dot(r.T) + q.E.dot(r.L);
    r.chi = da + psi_u.dot(r.W) + q.E.dot(r.Nz);
    r.rho = nx_.rho + phi_u.dot(r.W);
    r.s = -(lin_x + H * r.k + q.C.transpose() * r.m);
    r.eta = lin_d + psi_u.dot(r.k) + q.E.dot(r.m);
    r.iota = lin_a + phi_u.dot(r.k);
  }
  symmetrize(r.P);
}

void transition_step(const RiccatiStage& r, const PhaseKKT& ph, double shift, bool last, int k,
                     const RiccatiOptions& opts, Transition& t) {
  const double xi = r.xi + ph.Qtt;
  const double eta = r.eta + ph.qt;
  t.eliminates = !last;
  if (last) {
    t.P = r.P;
    t.s = r.s;
    t.Phi = r.Psi;
    t.rho = xi;
    t.iota = eta;
    return;
  }
  const Vector v = r.Psi - r.Phi;
  const double c = xi - r.chi;
  const double e = eta - r.iota;
  t.sigma_raw = reduced_sigma(xi, r.chi, r.rho) + shift;
  t.sigma = t.sigma_raw;
  t.modified = false;
  if (opts.modify) {
    const SigmaModification sm = modify_sigma(t.sigma_raw, e, opts);
    t.sigma = sm.sigma;
    t.modified = sm.modified;
  } else if (!(t.sigma_raw > 0.0) || !std::isfinite(t.sigma_raw)) {
    throw RiccatiError(RiccatiError::Kind::kSigma, -1, k,
                       "reduced switching-time Hessian sigma = " + std::to_string(t.sigma_raw) +
                           " is not positive at switch " + std::to_string(k + 1));
  }
  const double inv = 1.0 / t.sigma;
  t.alpha = -inv * v;
  t.beta = -inv * c;
  t.gamma = -inv * e;
  t.s = r.s + (e * inv) * v;
  t.Phi = r.Psi - (c * inv) * v;
  t.rho = xi - c * c * inv;
  t.iota = eta - c * e * inv;

  bool keep_p = false;
  if (opts.modify) {
    if (opts.p_modification == PModification::kAlways || t.modified) {
      keep_p = true;
    } else {
      Matrix Pt = r.P - inv * v * v.transpose();
      symmetrize(Pt);
      Eigen::SelfAdjointEigenSolver<Matrix> es(Pt, Eigen::EigenvaluesOnly);
      const double scale = 1.0 + r.P.cwiseAbs().maxCoeff();
      keep_p = es.eigenvalues().minCoeff() < -1e-12 * scale;
      if (!keep_p) t.P = std::move(Pt);
    }
  }
  t.p_kept = keep_p;
  if (keep_p) {
    t.P = r.P;
  } else if (!opts.modify) {
    t.P = r.P - inv * v * v.transpose();
    symmetrize(t.P);
  }
}

}  // namespace

double reduced_sigma(double xi, double chi, double rho) { return xi - 2.0 * chi + rho; }

SigmaModification modify_sigma(double sigma_raw, double eta_minus_iota,
                               const RiccatiOptions& opts) {
  SigmaModification m;
  m.bound = std::max(std::abs(eta_minus_iota) / opts.dt_max, opts.sigma_floor);
  m.sigma = sigma_raw;
  if (!(sigma_raw > m.bound)) {
    m.sigma = std::abs(sigma_raw) + m.bound;
    m.modified = true;
  }
  return m;
}

RiccatiFactorization backward(const KKTSystem& sys, const RiccatiOptions& opts) {
  const TimeGrid& g = sys.grid;
  const int N = g.N();
  const int K = g.num_switches();
  const int n = sys.nx;
  if (static_cast<int>(sys.stages.size()) != N || sys.QxxN.rows() != n ||
      static_cast<int>(sys.phases.size()) != K + 1) {
    throw RiccatiError(RiccatiError::Kind::kDimension, -1, -1,
                       "KKT system does not match its grid");
  }
  RiccatiFactorization fact;
  fact.stages.resize(static_cast<std::size_t>(N + 1));
  fact.transitions.resize(static_cast<std::size_t>(K + 1));
  fact.jumps.resize(static_cast<std::size_t>(K));

  RiccatiStage& term = fact.stages[static_cast<std::size_t>(N)];
  term.P = sys.QxxN;
  symmetrize(term.P);
  term.s = -sys.lxN;
  term.Psi = Vector::Zero(n);
  term.Phi = Vector::Zero(n);

  for (int i = N - 1; i >= 0; --i) {
    const auto ui = static_cast<std::size_t>(i);
    const int p = g.phase_of(i);
    const bool phase_end = i + 1 == g.phase_begin[static_cast<std::size_t>(p + 1)];
    CostToGo next;
    if (!phase_end || p == K) {
      next = view(fact.stages[ui + 1]);
    } else if (g.jump[static_cast<std::size_t>(p)]) {
      // Pre-jump node between this stage and the next phase.
      const JumpKKT& J = sys.jumps[static_cast<std::size_t>(p)];
      const Transition& t = fact.transitions[static_cast<std::size_t>(p + 1)];
      JumpFactor& jf = fact.jumps[static_cast<std::size_t>(p)];
      jf.P = J.Q + J.A.transpose() * t.P * J.A;
      symmetrize(jf.P);
      jf.Phi = J.A.transpose() * t.Phi;
      jf.s = J.A.transpose() * (t.s - t.P * J.xbar) - J.lx;
      jf.rho = t.rho;
      jf.iota = t.iota + t.Phi.dot(J.xbar);
      next = view(jf);
    } else {
      next = view(fact.transitions[static_cast<std::size_t>(p + 1)]);
    }
    stage_step(sys.stages[ui], next, i, g.condition_at(i) >= 0, fact.stages[ui]);
    if (i == g.phase_begin[static_cast<std::size_t>(p)]) {
      const double shift =
          static_cast<std::size_t>(p) < sys.dt_shift.size() ? sys.dt_shift[static_cast<std::size_t>(p)] : 0.0;
      transition_step(fact.stages[ui], sys.phases[static_cast<std::size_t>(p)], shift, p == K, p, opts,
                      fact.transitions[static_cast<std::size_t>(p)]);
    }
  }
  return fact;
}

NewtonStep forward(const RiccatiFactorization& fact, const KKTSystem& sys) {
  const TimeGrid& g = sys.grid;
  const int N = g.N();
  const int K = g.num_switches();
  const int n = sys.nx;
  NewtonStep d;
  d.dx.assign(static_cast<std::size_t>(N + 1), Vector());
  d.dlmd.assign(static_cast<std::size_t>(N + 1), Vector());
  d.du.assign(static_cast<std::size_t>(N), Vector());
  d.dz.resize(static_cast<std::size_t>(N));
  d.dnu.resize(static_cast<std::size_t>(N));
  d.dt.assign(static_cast<std::size_t>(K), 0.0);
  d.dx_pre.assign(static_cast<std::size_t>(K), Vector());
  d.dlmd_pre.assign(static_cast<std::size_t>(K), Vector());
  d.dzeta.assign(static_cast<std::size_t>(K), Vector());
  d.dw.assign(static_cast<std::size_t>(K + 1), 0.0);
  d.dupsilon.assign(static_cast<std::size_t>(K + 1), 0.0);

  d.dx[0] = sys.x0_target;
  for (int p = 0; p <= K; ++p) {
    const auto up = static_cast<std::size_t>(p);
    const int begin = g.phase_begin[up];
    const double a_prev = p > 0 ? -d.dt[up - 1] : 0.0;
    if (p < K) {
      const Transition& t = fact.transitions[up];
      d.dt[up] = t.alpha.dot(d.dx[static_cast<std::size_t>(begin)]) + t.beta * a_prev + t.gamma;
    }
    const double delta = (p < K ? d.dt[up] : 0.0) + a_prev;
    const double a = p < K ? -d.dt[up] : 0.0;
    for (int i = begin; i < g.phase_begin[up + 1]; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const RiccatiStage& r = fact.stages[ui];
      const StageKKT& q = sys.stages[ui];
      const Vector& dx = d.dx[ui];
      d.du[ui] = r.K * dx + r.T * delta + r.W * a + r.k;
      d.dlmd[ui] = r.P * dx - r.s + r.Psi * delta + r.Phi * a;
      if (i == begin && p < K && fact.transitions[up].p_kept) {
        // Costate of the modified system: P̃ = P carries the extra vvᵀ/σ̃.
        const Transition& t = fact.transitions[up];
        d.dlmd[ui] += t.sigma * t.alpha * t.alpha.dot(dx);
      }
      const int sc = g.condition_at(i);
      if (sc >= 0) {
        d.dzeta[static_cast<std::size_t>(sc)] = r.M * dx + r.L * delta + r.Nz * a + r.m;
      }
      d.dz[ui] = Vector::Zero(q.rg.size());
      d.dnu[ui] = Vector::Zero(q.rg.size());
      Vector next = q.A * dx + q.B * d.du[ui] + q.f * delta + q.xbar;
      const int sj = g.jump_after(i);
      if (sj >= 0) {
        const auto us = static_cast<std::size_t>(sj);
        const JumpFactor& jf = fact.jumps[us];
        const JumpKKT& J = sys.jumps[us];
        d.dlmd_pre[us] = jf.P * next - jf.s + jf.Phi * a;
        d.dx_pre[us] = next;
        next = J.A * d.dx_pre[us] + J.xbar;
      }
      d.dx[ui + 1] = std::move(next);
    }
  }
  const auto uN = static_cast<std::size_t>(N);
  d.dlmd[uN] = fact.stages[uN].P * d.dx[uN] - fact.stages[uN].s;
  for (int s = 0; s < K; ++s) {
    const auto us = static_cast<std::size_t>(s);
    if (g.condition_stage[us] < 0) d.dzeta[us] = Vector();
    if (!g.jump[us]) {
      d.dx_pre[us] = Vector();
      d.dlmd_pre[us] = Vector();
    }
  }
  (void)n;
  return d;
}

KKTSystem modified_system(const KKTSystem& sys, const RiccatiFactorization& fact) {
  KKTSystem out = sys;
  const int K = sys.grid.num_switches();
  out.dt_shift.assign(static_cast<std::size_t>(K), 0.0);
  for (int k = 0; k < K; ++k) {
    const Transition& t = fact.transitions[static_cast<std::size_t>(k)];
    if (!t.eliminates) continue;
    out.dt_shift[static_cast<std::size_t>(k)] = t.sigma - t.sigma_raw;
    if (t.p_kept) {
      // α = −v/σ̃, so vvᵀ/σ̃ = σ̃ ααᵀ.
      const Matrix add = t.sigma * t.alpha * t.alpha.transpose();
      StageKKT& s = out.stages[static_cast<std::size_t>(sys.grid.phase_begin[static_cast<std::size_t>(k)])];
      s.Qxx += add;
      s.Qxx_raw += add;
    }
  }
  return out;
}

RiccatiReport report_of(const RiccatiFactorization& fact) {
  RiccatiReport rep;
  const std::size_t N = fact.stages.empty() ? 0 : fact.stages.size() - 1;
  rep.min_chol_diag.resize(N);
  for (std::size_t i = 0; i < N; ++i) rep.min_chol_diag[i] = fact.stages[i].min_chol_diag;
  const std::size_t K = fact.transitions.empty() ? 0 : fact.transitions.size() - 1;
  rep.sigma_raw.resize(K);
  rep.sigma.resize(K);
  rep.modified.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Transition& t = fact.transitions[k];
    rep.sigma_raw[k] = t.sigma_raw;
    rep.sigma[k] = t.sigma;
    rep.modified[k] = t.modified ? 1 : 0;
    rep.any_modified = rep.any_modified || t.modified;
  }
  return rep;
}

std::pair<NewtonStep, RiccatiReport> solve_step(const KKTSystem& sys,
                                                const RiccatiOptions& opts) {
  const RiccatiFactorization fact = backward(sys, opts);
  return {forward(fact, sys), report_of(fact)};
}

}  // namespace swocp
