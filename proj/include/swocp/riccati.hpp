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

// Riccati recursion for the condensed Newton system.
//
// Inside phase k the cost-to-go of stage i is a quadratic in (Δx_i, δ_k, a_k)
// with δ_k = Δt_k − Δt_{k−1} and a_k = −Δt_k:
//
//   ½ΔxᵀPΔx + Δxᵀ(Ψδ + Φa) + ½ξδ² + χδa + ½ρa² − sᵀΔx + ηδ + ιa.
//
// At the first stage of phase k (k < K) the switching time t_k is eliminated,
// which leaves a quadratic in (Δx, −Δt_{k−1}); the last phase has no a-channel.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swocp/iterate.hpp"
#include "swocp/kkt.hpp"

namespace swocp {

enum class PModification {
  kAlways,           // P̃ = P at every elimination
  kWhenIndefinite,   // only where σ was modified or P − vvᵀ/σ is indefinite
};

struct RiccatiOptions {
  bool modify = false;
  double dt_max = 0.5;        // desired bound on |Δt| driving σ_min = σ̄
  double sigma_floor = 1e-8;  // lower bound on σ_min = σ̄
  PModification p_modification = PModification::kWhenIndefinite;
};

struct RiccatiStage {
  Matrix P;
  Vector s, Psi, Phi;
  double xi = 0.0, chi = 0.0, rho = 0.0, eta = 0.0, iota = 0.0;
  Matrix K;
  Vector k, T, W;
  // Switching-condition stages only.
  Matrix M;
  Vector m, L, Nz;
  double min_chol_diag = 0.0;
};

/// Elimination of Δt_k at the first stage of phase k.
struct Transition {
  bool eliminates = false;  // false for the last phase
  double sigma_raw = 0.0;
  double sigma = 0.0;
  bool modified = false;  // σ replaced by σ̃
  bool p_kept = false;    // P̃ = P used instead of the exact elimination
  Vector alpha;  // Δt_k = αᵀΔx + β·(−Δt_{k−1}) + γ
  double beta = 0.0, gamma = 0.0;
  Matrix P;  // P̃, s̃, Φ̃, ρ̃, ι̃
  Vector s, Phi;
  double rho = 0.0, iota = 0.0;
};

struct JumpFactor {
  Matrix P;
  Vector s, Phi;
  double rho = 0.0, iota = 0.0;
};

struct RiccatiFactorization {
  std::vector<RiccatiStage> stages;     // 0..N
  std::vector<Transition> transitions;  // per phase
  std::vector<JumpFactor> jumps;        // per switch
};

struct RiccatiReport {
  std::vector<double> min_chol_diag;  // per stage
  std::vector<double> sigma_raw, sigma;  // per switch
  std::vector<char> modified;            // per switch
  bool any_modified = false;
};

class RiccatiError : public std::runtime_error {
 public:
  enum class Kind {
    kSosc,       // G (or the reduced Hessian at a condition stage) not positive definite
    kLicq,       // switching-condition Jacobian w.r.t. u rank deficient
    kSigma,      // σ ≤ 0 without modification
    kDimension,  // inconsistent block sizes
  };
  RiccatiError(Kind kind, int stage, int switch_index, const std::string& what)
      : std::runtime_error(what), kind_(kind), stage_(stage), switch_(switch_index) {}
  Kind kind() const { return kind_; }
  int stage() const { return stage_; }
  int switch_index() const { return switch_; }

 private:
  Kind kind_;
  int stage_;
  int switch_;
};

/// σ = ξ − 2χ + ρ, the curvature left in Δt_k after eliminating Δt_{k−1}.
double reduced_sigma(double xi, double chi, double rho);

struct SigmaModification {
  double sigma = 0.0;
  double bound = 0.0;  // σ_min = σ̄ = max(|η − ι| / Δt_max, floor)
  bool modified = false;
};

/// σ̃ = |σ| + σ̄ whenever σ ≤ σ_min; keeps |Δt_k| near Δt_max.
SigmaModification modify_sigma(double sigma_raw, double eta_minus_iota, const RiccatiOptions& opts);

RiccatiFactorization backward(const KKTSystem& sys, const RiccatiOptions& opts = {});

/// Primal, costate and condition-multiplier directions; slack and bound-dual
/// entries are sized but left at zero.
NewtonStep forward(const RiccatiFactorization& fact, const KKTSystem& sys);

/// The system whose exact solution the (possibly modified) recursion returns:
/// σ̃ − σ is added to the Δt_k curvature, and P̃ = P amounts to adding vvᵀ/σ̃ to
/// Q_xx at the first stage of phase k. Without modifications, a copy of `sys`.
KKTSystem modified_system(const KKTSystem& sys, const RiccatiFactorization& fact);

RiccatiReport report_of(const RiccatiFactorization& fact);

std::pair<NewtonStep, RiccatiReport> solve_step(const KKTSystem& sys,
                                                const RiccatiOptions& opts = {});

}  // namespace swocp
