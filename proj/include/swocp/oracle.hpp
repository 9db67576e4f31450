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

// Dense reference solver for the Newton system: materializes the full
// symmetric indefinite KKT matrix of the QP subproblem and factorizes it.
//
// Unknown order: Δx_0..Δx_N, pre-jump Δx⁻ (per jump), Δu_0..Δu_{N−1}, Δt_1..Δt_K,
// then the multipliers Δλ_0..Δλ_N, Δλ⁻ (per jump), Δζ (per condition).

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "swocp/iterate.hpp"
#include "swocp/kkt.hpp"

namespace swocp {

struct DenseKKT {
  Matrix matrix;
  Vector rhs;  // the solution satisfies matrix · step + rhs = 0

  // Offsets of each unknown block; -1 where the block does not exist.
  std::vector<int> x, u, lmd, x_pre, lmd_pre, zeta;
  int t = 0;  // first Δt row
  int nx = 0, nu = 0, K = 0;
  std::vector<int> zeta_dim;
  int num_primal = 0;

  int size() const { return static_cast<int>(rhs.size()); }
};

class OracleError : public std::runtime_error {
 public:
  OracleError(const std::string& what, int rank_deficiency)
      : std::runtime_error(what), deficiency_(rank_deficiency) {}
  int rank_deficiency() const { return deficiency_; }

 private:
  int deficiency_;
};

DenseKKT assemble_dense(const KKTSystem& sys);

/// Full-pivoting LU solve. Throws OracleError on a singular matrix.
NewtonStep solve_dense(const DenseKKT& dense);

/// Stage-wise Hessian block [0 h_xᵀ h_uᵀ; h_x Q_xx Q_xu; h_u Q_uxᵀ Q_uu] of the
/// QP in (δ, Δx, Δu).
Matrix stage_time_hessian(const StageKKT& stage);

struct GroupDeviation {
  std::string group;
  double deviation = 0.0;  // max |a − b| / (1 + max |b|) over the group
};

struct ComparisonReport {
  std::vector<GroupDeviation> groups;
  bool passed = true;
  std::string worst_group;
  double worst = 0.0;
};

/// Group-wise comparison with `b` as reference. Slack/dual groups are compared
/// only when both steps carry them. Throws std::invalid_argument on a shape
/// mismatch.
ComparisonReport compare(const NewtonStep& a, const NewtonStep& b, double tol);

/// Writes the matrix and the right-hand side in matrix-market coordinate/array
/// format to `<prefix>.mtx` and `<prefix>_rhs.mtx`.
void write_matrix_market(const DenseKKT& dense, const std::string& prefix);

}  // namespace swocp
