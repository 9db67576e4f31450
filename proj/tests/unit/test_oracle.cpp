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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "support/random_instance.hpp"
#include "swocp/oracle.hpp"
#include "swocp/riccati.hpp"

namespace swocp {
namespace {

KKTSystem scalar_system() {
  KKTSystem sys;
  const std::vector<int> counts{1};
  sys.grid = build_grid_layout(0.0, 1.0, counts, {}, {}, {});
  sys.nx = sys.nu = 1;
  StageKKT s;
  s.Qxx = Matrix::Constant(1, 1, 2.0);
  s.Quu = Matrix::Constant(1, 1, 3.0);
  s.Qxu = Matrix::Constant(1, 1, 0.5);
  s.A = Matrix::Constant(1, 1, 1.1);
  s.B = Matrix::Constant(1, 1, 0.7);
  s.f = s.hx = s.hu = Vector::Zero(1);
  s.lx = Vector::Constant(1, 0.1);
  s.lu = Vector::Constant(1, 0.2);
  s.xbar = Vector::Constant(1, 0.3);
  sys.stages = {s};
  sys.QxxN = Matrix::Constant(1, 1, 4.0);
  sys.lxN = Vector::Constant(1, 0.4);
  sys.x0_target = Vector::Constant(1, 0.5);
  sys.phases.resize(1);
  return sys;
}

TEST(Dense, ScalarHandMatrix) {
  const DenseKKT d = assemble_dense(scalar_system());
  ASSERT_EQ(d.size(), 5);
  // Order: Δx_0, Δx_1, Δu_0, Δλ_0, Δλ_1.
  Matrix expected(5, 5);
  expected << 2.0, 0.0, 0.5, -1.0, 1.1,
              0.0, 4.0, 0.0, 0.0, -1.0,
              0.5, 0.0, 3.0, 0.0, 0.7,
              -1.0, 0.0, 0.0, 0.0, 0.0,
              1.1, -1.0, 0.7, 0.0, 0.0;
  EXPECT_EQ(d.matrix, expected);
  Vector rhs(5);
  rhs << 0.1, 0.4, 0.2, 0.5, 0.3;
  EXPECT_EQ(d.rhs, rhs);
}

TEST(Dense, SymmetricOnRandomInstance) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const KKTSystem sys = testing::random_system(rng, testing::random_shape(rng));
    const DenseKKT d = assemble_dense(sys);
    EXPECT_LE((d.matrix - d.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Dense, ZeroResidualsGiveZeroRhs) {
  KKTSystem sys = scalar_system();
  sys.stages[0].lx.setZero();
  sys.stages[0].lu.setZero();
  sys.stages[0].xbar.setZero();
  sys.lxN.setZero();
  sys.x0_target.setZero();
  EXPECT_EQ(assemble_dense(sys).rhs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dense, StageCountMismatch) {
  KKTSystem sys = scalar_system();
  sys.stages.clear();
  EXPECT_THROW(assemble_dense(sys), std::invalid_argument);
}

TEST(Solve, IdentityLikeSystem) {
  DenseKKT d;
  d.matrix = Matrix::Identity(3, 3);
  d.rhs = Vector::LinSpaced(3, 1.0, 3.0);
  d.x = {0, 1};
  d.lmd = {-1, -1};
  d.u = {2};
  d.nx = 1;
  d.nu = 1;
  d.t = 3;
  d.K = 0;
  const NewtonStep s = solve_dense(d);
  EXPECT_EQ(s.dx[0][0], -1.0);
  EXPECT_EQ(s.dx[1][0], -2.0);
  EXPECT_EQ(s.du[0][0], -3.0);
}

TEST(Solve, BacksubstitutionResidual) {
  std::mt19937 rng(41);
  const KKTSystem sys = testing::random_system(rng, testing::random_shape(rng));
  const DenseKKT d = assemble_dense(sys);
  Eigen::FullPivLU<Matrix> lu(d.matrix);
  const Vector sol = -lu.solve(d.rhs);
  EXPECT_LE((d.matrix * sol + d.rhs).cwiseAbs().maxCoeff(),
            1e-10 * (1.0 + d.matrix.cwiseAbs().maxCoeff() * sol.cwiseAbs().maxCoeff()));
  EXPECT_NO_THROW(solve_dense(d));
}

TEST(Solve, DuplicatedConstraintRowIsSingular) {
  DenseKKT d = assemble_dense(scalar_system());
  // Make the Δλ_1 row a copy of the Δλ_0 row (and keep symmetry).
  d.matrix.row(4) = d.matrix.row(3);
  d.matrix.col(4) = d.matrix.col(3);
  try {
    solve_dense(d);
    FAIL();
  } catch (const OracleError& e) {
    EXPECT_GE(e.rank_deficiency(), 1);
  }
}

TEST(Compare, IdenticalSteps) {
  std::mt19937 rng(2);
  const KKTSystem sys = testing::random_system(rng, testing::random_shape(rng));
  const NewtonStep s = solve_dense(assemble_dense(sys));
  const ComparisonReport r = compare(s, s, 1e-8);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.worst, 0.0);
}

TEST(Compare, NamesTheDeviatingGroup) {
  std::mt19937 rng(2);
  testing::InstanceShape sh;
  const KKTSystem sys = testing::random_system(rng, sh);
  const NewtonStep s = solve_dense(assemble_dense(sys));
  NewtonStep t = s;
  t.dt[0] += 1e-6 * (1.0 + std::abs(s.dt[0]));
  const ComparisonReport r = compare(t, s, 1e-8);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.worst_group, "dt");
}

TEST(Compare, ShapeMismatchThrows) {
  std::mt19937 rng(2);
  const KKTSystem sys = testing::random_system(rng, testing::InstanceShape{});
  const NewtonStep s = solve_dense(assemble_dense(sys));
  NewtonStep t = s;
  t.dx.pop_back();
  EXPECT_THROW(compare(t, s, 1e-8), std::invalid_argument);
}

TEST(Compare, RiccatiAgreesOnRandomInstances) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const KKTSystem sys = testing::random_system(rng, testing::random_shape(rng));
    const auto [a, rep] = solve_step(sys);
    const ComparisonReport r = compare(a, solve_dense(assemble_dense(sys)), 1e-8);
    EXPECT_TRUE(r.passed) << "trial " << trial << ": " << r.worst_group << " " << r.worst;
  }
}

TEST(StageHessian, TimeCouplingIsIndefinite) {
  StageKKT s;
  s.Qxx = Matrix::Identity(2, 2);
  s.Qxu = Matrix::Zero(2, 1);
  s.Quu = Matrix::Identity(1, 1);
  s.hx = Vector::Constant(2, 0.3);
  s.hu = Vector::Constant(1, -0.2);
  const Matrix H = stage_time_hessian(s);
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues();
  EXPECT_LT(ev.minCoeff(), 0.0);
  EXPECT_GT(ev.maxCoeff(), 0.0);
}

TEST(MatrixMarket, WritesBothFiles) {
  const DenseKKT d = assemble_dense(scalar_system());
  const auto dir = std::filesystem::temp_directory_path() / "swocp_mm_test";
  std::filesystem::create_directories(dir);
  const std::string prefix = (dir / "kkt").string();
  write_matrix_market(d, prefix);
  std::ifstream m(prefix + ".mtx"), r(prefix + "_rhs.mtx");
  std::string header;
  std::getline(m, header);
  EXPECT_NE(header.find("MatrixMarket"), std::string::npos);
  EXPECT_TRUE(r.good());
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace swocp
