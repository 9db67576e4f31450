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

#include "swocp/interior_point.hpp"

#include <algorithm>
#include <stdexcept>

namespace swocp {

void check_options(const IPOptions& o) {
  if (!(o.tau > 0.0 && o.tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  if (!(o.eps_decay > 0.0 && o.eps_decay < 1.0)) {
    throw std::invalid_argument("eps_decay must lie in (0, 1)");
  }
  if (!(o.eps_min > 0.0)) throw std::invalid_argument("eps_min must be positive");
  if (!(o.eps0 >= o.eps_min)) throw std::invalid_argument("eps0 must be at least eps_min");
  if (!(o.slack_floor > 0.0)) throw std::invalid_argument("slack_floor must be positive");
}

void initialize_slacks(const SwitchedOCP& ocp, const TimeGrid& grid, Iterate& it,
                       const IPOptions& opts) {
  it.barrier = opts.eps0;
  const double eps = it.barrier;
  for (int i = 0; i < grid.N(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const int p = grid.phase_of(i);
    const int ng = ocp.constraint_dim(p);
    if (ng == 0) {
      it.z[ui].resize(0);
      it.nu[ui].resize(0);
      continue;
    }
    Vector g;
    ocp.phases[static_cast<std::size_t>(p)].constraint.value(it.x[ui], it.u[ui], g);
    it.z[ui] = (-g).cwiseMax(opts.slack_floor);
    it.nu[ui] = it.z[ui].cwiseInverse() * eps;
  }
  const TimeGrid g = with_switching_times(grid, it.t);
  for (int p = 0; p < g.num_phases(); ++p) {
    const auto up = static_cast<std::size_t>(p);
    it.w[up] = std::max(g.duration(p) - ocp.phases[up].min_dwell, opts.slack_floor);
    it.upsilon[up] = eps / it.w[up];
  }
}

void recover_bound_steps(const KKTSystem& sys, NewtonStep& d) {
  const TimeGrid& g = sys.grid;
  const int K = g.num_switches();
  d.dz.resize(static_cast<std::size_t>(g.N()));
  d.dnu.resize(static_cast<std::size_t>(g.N()));
  d.dw.resize(static_cast<std::size_t>(K + 1));
  d.dupsilon.resize(static_cast<std::size_t>(K + 1));
  for (int i = 0; i < g.N(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const StageKKT& s = sys.stages[ui];
    if (s.rg.size() == 0) {
      d.dz[ui].resize(0);
      d.dnu[ui].resize(0);
      continue;
    }
    d.dz[ui] = -s.rg - s.gx * d.dx[ui] - s.gu * d.du[ui];
    const Vector rz = s.zv.array() - sys.barrier;
    d.dnu[ui] = -(s.nu.cwiseProduct(d.dz[ui]) + rz).cwiseQuotient(s.z);
  }
  for (int p = 0; p <= K; ++p) {
    const auto up = static_cast<std::size_t>(p);
    const PhaseKKT& ph = sys.phases[up];
    double delta = 0.0;
    if (p < K) delta += d.dt[up];
    if (p > 0) delta -= d.dt[up - 1];
    d.dw[up] = delta - ph.r_delta;
    d.dupsilon[up] = -(ph.upsilon * d.dw[up] + ph.r_w) / ph.w;
  }
}

namespace {

double max_step(const Vector& v, const Vector& dv, double tau, double alpha) {
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (dv[j] < 0.0) alpha = std::min(alpha, -tau * v[j] / dv[j]);
  }
  return alpha;
}

double max_step(double v, double dv, double tau, double alpha) {
  return dv < 0.0 ? std::min(alpha, -tau * v / dv) : alpha;
}

}  // namespace

std::pair<double, double> fraction_to_boundary(const Iterate& it, const NewtonStep& d,
                                               double tau) {
  double ap = 1.0, ad = 1.0;
  for (std::size_t i = 0; i < it.z.size(); ++i) {
    ap = max_step(it.z[i], d.dz[i], tau, ap);
    ad = max_step(it.nu[i], d.dnu[i], tau, ad);
  }
  for (std::size_t p = 0; p < it.w.size(); ++p) {
    ap = max_step(it.w[p], d.dw[p], tau, ap);
    ad = max_step(it.upsilon[p], d.dupsilon[p], tau, ad);
  }
  return {ap, ad};
}

double update_barrier(double eps, double perturbed_l2, const IPOptions& opts) {
  if (opts.fixed_barrier) return eps;
  if (perturbed_l2 < opts.decay_trigger) return std::max(eps * opts.eps_decay, opts.eps_min);
  return eps;
}

}  // namespace swocp
