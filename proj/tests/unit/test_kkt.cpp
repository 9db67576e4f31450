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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "support/fixtures.hpp"
#include "swocp/interior_point.hpp"
#include "swocp/kkt.hpp"
#include "swocp/oracle.hpp"
#include "swocp/problems.hpp"
#include "swocp/riccati.hpp"
#include "swocp/solver.hpp"

namespace swocp {
namespace {

struct Scalar {
  SwitchedOCP ocp = testing::scalar_lqr(1.0, 1.0);
  TimeGrid grid;
  Iterate it;

  Scalar() {
    const std::vector<int> counts{1};
    grid = build_grid(ocp, counts, {});
    it = zero_iterate(ocp, grid);
    it.x = {Vector::Constant(1, 1.0), Vector::Constant(1, 1.0)};
    it.u = {Vector::Zero(1)};
    it.lmd = {Vector::Zero(1), Vector::Zero(1)};
    it.w = {1.0};
    it.upsilon = {1.0};
    it.barrier = 1.0;
  }
};

TEST(Residual, ScalarHandValues) {
  Scalar s;
  const KKTResidual r = eval_residual(s.ocp, s.grid, s.it);
  EXPECT_DOUBLE_EQ(r.rx[1][0], 1.0);
  EXPECT_DOUBLE_EQ(r.rx[0][0], 1.0);
  EXPECT_DOUBLE_EQ(r.ru[0][0], 0.0);
  EXPECT_DOUBLE_EQ(r.xbar[0][0], 0.0);
  EXPECT_DOUBLE_EQ(r.initial[0], 0.0);
  // w υ = ε: the dwell complementarity is perturbed-zero.
  EXPECT_DOUBLE_EQ(r.rw[0], 0.0);
}

TEST(Assemble, ScalarHandValues) {
  Scalar s;
  const KKTSystem sys = assemble(s.ocp, s.grid, s.it);
  const StageKKT& st = sys.stages[0];
  EXPECT_DOUBLE_EQ(st.Qxx(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(st.Quu(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(st.Qxu(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(st.A(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(st.B(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(st.f[0], 0.0);
  EXPECT_DOUBLE_EQ(sys.QxxN(0, 0), 1.0);
}

TEST(Assemble, DwellCurvature) {
  Scalar s;
  s.it.w = {0.5};
  s.it.upsilon = {1.0};
  const KKTSystem sys = assemble(s.ocp, s.grid, s.it);
  EXPECT_DOUBLE_EQ(sys.phases[0].Qtt, 2.0);
}

SwitchedOCP with_bound(SwitchedOCP ocp) {
  auto& c = ocp.phases[0].constraint;
  c.dim = 1;
  c.value = [](const Vector&, const Vector& u, Vector& out) { out = u.array() - 1.0; };
  c.jacobian = [](const Vector&, const Vector&, Matrix& dx, Matrix& du) {
    dx = Matrix::Zero(1, 1);
    du = Matrix::Identity(1, 1);
  };
  return ocp;
}

TEST(Assemble, CondensationAddsBarrierCurvature) {
  Scalar s;
  const SwitchedOCP ocp = with_bound(s.ocp);
  Iterate it = zero_iterate(ocp, s.grid);
  it.x = s.it.x;
  it.u = s.it.u;
  it.w = s.it.w;
  it.upsilon = s.it.upsilon;
  it.z = {Vector::Constant(1, 1.0)};
  it.nu = {Vector::Constant(1, 2.0)};
  const KKTSystem plain = assemble(s.ocp, s.grid, s.it);
  const KKTSystem bounded = assemble(ocp, s.grid, it);
  EXPECT_DOUBLE_EQ(bounded.stages[0].Quu(0, 0) - plain.stages[0].Quu(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(bounded.stages[0].Qxx(0, 0), plain.stages[0].Qxx(0, 0));
}

TEST(Assemble, ComplementarityAtCentralPoint) {
  Scalar s;
  const SwitchedOCP ocp = with_bound(s.ocp);
  Iterate it = zero_iterate(ocp, s.grid);
  it.x = s.it.x;
  it.u = s.it.u;
  it.w = {1.0};
  it.upsilon = {0.01};
  it.barrier = 0.01;
  it.z = {Vector::Constant(1, 0.1)};
  it.nu = {Vector::Constant(1, 0.1)};
  const KKTResidual r = eval_residual(ocp, s.grid, it);
  EXPECT_NEAR(r.rz[0][0], 0.0, 1e-17);
}

TEST(Assemble, RejectsNonpositiveSlack) {
  Scalar s;
  s.it.w = {0.0};
  EXPECT_THROW(assemble(s.ocp, s.grid, s.it), std::domain_error);
  Scalar t;
  t.it.upsilon = {-1.0};
  EXPECT_THROW(eval_residual(t.ocp, t.grid, t.it), std::domain_error);
}

TEST(Residual, LqrSolvedByDenseStepIsStationary) {
  SwitchedOCP ocp = testing::scalar_lqr(2.0, 1.5);
  const std::vector<int> counts{7};
  const TimeGrid grid = build_grid(ocp, counts, {});
  const Iterate start = initial_iterate(ocp, grid, IPOptions{});
  Iterate it = testing::perturb(start, 3, 0.4);
  // The fixed-horizon dwell slack stays consistent; its complementarity is the
  // only non-quadratic row.
  it.w = start.w;
  it.barrier = 1e-12;
  KKTSystem sys = assemble(ocp, grid, it);
  NewtonStep d = solve_dense(assemble_dense(sys));
  recover_bound_steps(sys, d);
  const Iterate next = testing::apply_step(it, d, 1.0);
  const KKTResidual r = eval_residual(ocp, grid, next);
  EXPECT_LE(r.max_unperturbed, 1e-10);
}

// Newton direction from the Riccati recursion; the nonlinear residual along it
// must decrease as (1 − h) r + O(h²).
double slope_defect(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it, double h) {
  const KKTSystem sys = assemble(ocp, grid, it);
  auto [d, rep] = solve_step(sys);
  recover_bound_steps(sys, d);
  const Vector r0 = testing::stack(residual_of(sys));
  const Iterate moved = testing::apply_step(it, d, h);
  const TimeGrid g1 = with_switching_times(grid, moved.t);
  const Vector r1 = testing::stack(eval_residual(ocp, g1, moved));
  return ((r1 - r0) / h + r0).cwiseAbs().maxCoeff() / (1.0 + r0.cwiseAbs().maxCoeff());
}

Iterate near_solution(const BuiltinProblem& p, TimeGrid& grid, unsigned seed) {
  grid = build_grid(p.ocp, p.counts, p.switching_times);
  SolverOptions o;
  o.ip.eps_min = 1e-4;
  const NlpResult res = solve_nlp(p.ocp, grid, initial_iterate(p.ocp, grid, o.ip), o);
  grid = res.grid;
  Iterate it = testing::perturb(res.iterate, seed, 0.02);
  return it;
}

TEST(Linearization, FiniteDifferenceSlopeThreeSubsystem) {
  TimeGrid grid;
  const auto p = three_subsystem(10);
  const Iterate it = near_solution(p, grid, 11);
  const double e4 = slope_defect(p.ocp, grid, it, 1e-4);
  const double e5 = slope_defect(p.ocp, grid, it, 1e-5);
  EXPECT_LE(e4, 1e-3);
  EXPECT_LE(e5, 1e-4);
  EXPECT_LT(e5, 0.3 * e4);  // first-order agreement: the defect shrinks with h
}

TEST(Linearization, FiniteDifferenceSlopeBouncingMass) {
  TimeGrid grid;
  const auto p = bouncing_mass(20);
  const Iterate it = near_solution(p, grid, 5);
  const double e4 = slope_defect(p.ocp, grid, it, 1e-4);
  const double e5 = slope_defect(p.ocp, grid, it, 1e-5);
  EXPECT_LE(e4, 1e-3);
  EXPECT_LT(e5, 0.3 * e4);
}

TEST(Linearization, RiccatiStepSolvesLinearizedSystem) {
  TimeGrid grid;
  for (const auto& p : {three_subsystem(10), bouncing_mass(20)}) {
    const Iterate it = near_solution(p, grid, 2);
    const KKTSystem sys = assemble(p.ocp, grid, it);
    auto [d, rep] = solve_step(sys);
    recover_bound_steps(sys, d);
    EXPECT_LE(linearized_residual(sys, d), 1e-9 * (1.0 + data_scale(sys))) << p.name;
  }
}

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

TEST(Assemble, StagesArePure) {
  const auto p = bouncing_mass(20);
  TimeGrid grid;
  const Iterate it = near_solution(p, grid, 9);
  const KKTSystem full = assemble(p.ocp, grid, it);
  std::vector<int> order(static_cast<std::size_t>(grid.N()));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937(4));
  const KKTSystem shuffled = assemble_stages(p.ocp, grid, it, {}, order);
  for (int i = 0; i < grid.N(); ++i) {
    const StageKKT& a = full.stages[static_cast<std::size_t>(i)];
    const StageKKT& b = shuffled.stages[static_cast<std::size_t>(i)];
    EXPECT_TRUE(same(a.Qxx, b.Qxx) && same(a.Qxu, b.Qxu) && same(a.Quu, b.Quu) &&
                same(a.A, b.A) && same(a.B, b.B) && same(a.f, b.f) && same(a.hx, b.hx) &&
                same(a.hu, b.hu) && same(a.lx, b.lx) && same(a.lu, b.lu) &&
                same(a.xbar, b.xbar) && a.hbar == b.hbar && a.qtt == b.qtt &&
                same(a.C, b.C) && same(a.D, b.D) && same(a.E, b.E))
        << "stage " << i;
  }
}

TEST(Assemble, ThreadedMatchesSerial) {
  const auto p = three_subsystem(100);
  const TimeGrid grid = build_grid(p.ocp, p.counts, p.switching_times);
  const Iterate it = testing::perturb(initial_iterate(p.ocp, grid, IPOptions{}), 8, 0.1);
  AssembleOptions par;
  par.threads = 4;
  const KKTSystem a = assemble(p.ocp, grid, it);
  const KKTSystem b = assemble(p.ocp, grid, it, par);
  for (int i = 0; i < grid.N(); ++i) {
    EXPECT_TRUE(same(a.stages[static_cast<std::size_t>(i)].Qxx,
                     b.stages[static_cast<std::size_t>(i)].Qxx));
    EXPECT_TRUE(same(a.stages[static_cast<std::size_t>(i)].lx,
                     b.stages[static_cast<std::size_t>(i)].lx));
  }
}

TEST(Assemble, GaussNewtonSatisfiesConvexity) {
  const auto p = three_subsystem(10);
  const TimeGrid grid = build_grid(p.ocp, p.counts, p.switching_times);
  const Iterate it = testing::perturb(initial_iterate(p.ocp, grid, IPOptions{}), 1, 1.0);
  AssembleOptions gn;
  gn.hessian = HessianMode::kGaussNewton;
  const KKTSystem sys = assemble(p.ocp, grid, it, gn);
  for (const auto& s : sys.stages) {
    Matrix H(3, 3);
    H << s.Qxx, s.Qxu, s.Qxu.transpose(), s.Quu;
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
    EXPECT_GT(s.Quu(0, 0), 0.0);
  }
  for (const auto& ph : sys.phases) EXPECT_GE(ph.Qtt, 0.0);
}

TEST(Residual, ConvergedIterateIsStationary) {
  const auto p = three_subsystem(10);
  const TimeGrid grid = build_grid(p.ocp, p.counts, p.switching_times);
  SolverOptions o;
  const NlpResult res = solve_nlp(p.ocp, grid, initial_iterate(p.ocp, grid, o.ip), o);
  ASSERT_EQ(res.status, SolveStatus::kConverged);
  const KKTResidual r = eval_residual(p.ocp, res.grid, res.iterate);
  EXPECT_LE(r.max_unperturbed, o.tol);
}

}  // namespace
}  // namespace swocp
