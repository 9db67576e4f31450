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

// Small hand-checkable problems and helpers shared by the tests.

#pragma once

#include <vector>

#include "swocp/iterate.hpp"
#include "swocp/kkt.hpp"
#include "swocp/model.hpp"

namespace swocp::testing {

/// ẋ = u, l = (x² + u²)/2, V_f = x²/2 on [0, tf], single phase, x(0) = x0.
SwitchedOCP scalar_lqr(double tf = 1.0, double x0 = 1.0);

/// v ← v + a·d on every block of the iterate (one step length for everything).
Iterate apply_step(const Iterate& it, const NewtonStep& d, double a);

/// All residual blocks stacked into one vector (fixed order).
Vector stack(const KKTResidual& r);

/// Random perturbation of the primal-dual entries; slacks and bound duals stay
/// positive.
Iterate perturb(const Iterate& it, unsigned seed, double scale);

}  // namespace swocp::testing
