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

#include "swocp/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swocp {

namespace {

std::string phase_name(int k) { return "phase " + std::to_string(k + 1); }

void check_times(double t0, double tf, std::span<const double> T, int K) {
  if (static_cast<int>(T.size()) != K) {
    throw GridError("expected " + std::to_string(K) + " switching times, got " +
                        std::to_string(T.size()),
                    -1);
  }
  for (int k = 0; k <= K; ++k) {
    const double lo = k == 0 ? t0 : T[static_cast<std::size_t>(k - 1)];
    const double hi = k == K ? tf : T[static_cast<std::size_t>(k)];
    if (!(hi > lo)) {
      throw GridError(phase_name(k) + " has non-positive duration (switching times must be "
                                      "strictly increasing inside (t0, tf))",
                      k);
    }
  }
}

void layout(TimeGrid& g) {
  const int P = g.num_phases();
  g.phase_begin.assign(static_cast<std::size_t>(P + 1), 0);
  for (int k = 0; k < P; ++k) {
    g.phase_begin[static_cast<std::size_t>(k + 1)] =
        g.phase_begin[static_cast<std::size_t>(k)] + g.counts[static_cast<std::size_t>(k)];
  }
  g.stage_phase.resize(static_cast<std::size_t>(g.N()));
  for (int k = 0; k < P; ++k) {
    std::fill(g.stage_phase.begin() + g.phase_begin[static_cast<std::size_t>(k)],
              g.stage_phase.begin() + g.phase_begin[static_cast<std::size_t>(k + 1)], k);
  }
}

void compute_steps(TimeGrid& g) {
  g.dt.resize(g.counts.size());
  for (int k = 0; k < g.num_phases(); ++k) {
    g.dt[static_cast<std::size_t>(k)] = g.duration(k) / g.counts[static_cast<std::size_t>(k)];
  }
}

TimeGrid make_layout(double t0, double tf, std::vector<int> counts, std::span<const double> T,
                     std::span<const char> jumps, std::span<const char> conditions) {
  const int K = static_cast<int>(counts.size()) - 1;
  if (K < 0) throw GridError("at least one phase is required", -1);
  if (static_cast<int>(jumps.size()) != K || static_cast<int>(conditions.size()) != K) {
    throw GridError("per-switch structure flags do not match the phase count", -1);
  }
  for (int k = 0; k <= K; ++k) {
    if (counts[static_cast<std::size_t>(k)] < 1) {
      throw GridError(phase_name(k) + " needs at least one grid interval", k);
    }
  }
  check_times(t0, tf, T, K);

  TimeGrid g;
  g.t0 = t0;
  g.tf = tf;
  g.counts = std::move(counts);
  g.switching_times.assign(T.begin(), T.end());
  layout(g);
  compute_steps(g);
  g.jump.assign(jumps.begin(), jumps.end());
  g.condition_stage.assign(static_cast<std::size_t>(K), -1);
  for (int s = 0; s < K; ++s) {
    if (!conditions[static_cast<std::size_t>(s)]) continue;
    if (g.counts[static_cast<std::size_t>(s)] < 2) {
      throw GridError(phase_name(s) +
                          " ends with a switching condition and needs at least two grid "
                          "intervals",
                      s);
    }
    g.condition_stage[static_cast<std::size_t>(s)] =
        g.phase_begin[static_cast<std::size_t>(s + 1)] - 2;
  }
  return g;
}

TimeGrid make_grid(const SwitchedOCP& ocp, std::vector<int> counts,
                   std::span<const double> T) {
  const int K = ocp.num_switches();
  if (static_cast<int>(counts.size()) != K + 1) {
    throw GridError("expected " + std::to_string(K + 1) + " per-phase grid counts, got " +
                        std::to_string(counts.size()),
                    -1);
  }
  std::vector<char> jumps(static_cast<std::size_t>(K)), conds(static_cast<std::size_t>(K));
  for (int s = 0; s < K; ++s) {
    jumps[static_cast<std::size_t>(s)] = ocp.has_jump(s) ? 1 : 0;
    conds[static_cast<std::size_t>(s)] = ocp.has_condition(s) ? 1 : 0;
  }
  return make_layout(ocp.t0, ocp.tf, std::move(counts), T, jumps, conds);
}

}  // namespace

double TimeGrid::stage_time(int stage) const {
  if (stage >= N()) return tf;
  const int k = phase_of(stage);
  return phase_start(k) +
         (stage - phase_begin[static_cast<std::size_t>(k)]) * dt[static_cast<std::size_t>(k)];
}

int TimeGrid::jump_after(int stage) const {
  const int k = phase_of(stage);
  if (k < num_switches() && stage == phase_begin[static_cast<std::size_t>(k + 1)] - 1 &&
      jump[static_cast<std::size_t>(k)]) {
    return k;
  }
  return -1;
}

int TimeGrid::condition_at(int stage) const {
  const int k = phase_of(stage);
  if (k < num_switches() && condition_stage[static_cast<std::size_t>(k)] == stage) return k;
  return -1;
}

TimeGrid build_grid(const SwitchedOCP& ocp, std::span<const int> counts,
                    std::span<const double> switching_times) {
  return make_grid(ocp, std::vector<int>(counts.begin(), counts.end()), switching_times);
}

TimeGrid build_grid_layout(double t0, double tf, std::span<const int> counts,
                           std::span<const double> switching_times, std::span<const char> jumps,
                           std::span<const char> conditions) {
  return make_layout(t0, tf, std::vector<int>(counts.begin(), counts.end()), switching_times,
                     jumps, conditions);
}

TimeGrid with_switching_times(const TimeGrid& grid, std::span<const double> switching_times) {
  check_times(grid.t0, grid.tf, switching_times, grid.num_switches());
  TimeGrid g = grid;
  g.switching_times.assign(switching_times.begin(), switching_times.end());
  compute_steps(g);
  return g;
}

// ---------------------------------------------------------------------------

Iterate zero_iterate(const SwitchedOCP& ocp, const TimeGrid& grid) {
  const auto N = static_cast<std::size_t>(grid.N());
  const auto K = static_cast<std::size_t>(grid.num_switches());
  Iterate it;
  it.x.assign(N + 1, Vector::Zero(ocp.nx));
  it.lmd.assign(N + 1, Vector::Zero(ocp.nx));
  it.u.assign(N, Vector::Zero(ocp.nu));
  it.t = grid.switching_times;
  it.x_pre.assign(K, Vector());
  it.lmd_pre.assign(K, Vector());
  it.zeta.assign(K, Vector());
  for (std::size_t s = 0; s < K; ++s) {
    if (grid.jump[s]) {
      it.x_pre[s] = Vector::Zero(ocp.nx);
      it.lmd_pre[s] = Vector::Zero(ocp.nx);
    }
    if (grid.condition_stage[s] >= 0) it.zeta[s] = Vector::Zero(ocp.condition_dim(int(s)));
  }
  it.z.resize(N);
  it.nu.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const int ng = ocp.constraint_dim(grid.phase_of(static_cast<int>(i)));
    it.z[i] = Vector::Zero(ng);
    it.nu[i] = Vector::Zero(ng);
  }
  it.w.assign(K + 1, 0.0);
  it.upsilon.assign(K + 1, 0.0);
  return it;
}

NewtonStep zero_step(const Iterate& it) {
  const auto zeros = [](const std::vector<Vector>& v) {
    std::vector<Vector> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = Vector::Zero(v[i].size());
    return out;
  };
  NewtonStep d;
  d.dx = zeros(it.x);
  d.du = zeros(it.u);
  d.dt.assign(it.t.size(), 0.0);
  d.dlmd = zeros(it.lmd);
  d.dx_pre = zeros(it.x_pre);
  d.dlmd_pre = zeros(it.lmd_pre);
  d.dzeta = zeros(it.zeta);
  d.dz = zeros(it.z);
  d.dnu = zeros(it.nu);
  d.dw.assign(it.w.size(), 0.0);
  d.dupsilon.assign(it.upsilon.size(), 0.0);
  return d;
}

// ---------------------------------------------------------------------------

Trajectory rollout(const SwitchedOCP& ocp, const TimeGrid& grid, const Vector& x0,
                   std::span<const Vector> controls) {
  const int N = grid.N();
  if (static_cast<int>(controls.size()) != N) {
    throw std::invalid_argument("rollout needs one control per non-terminal stage");
  }
  Trajectory traj;
  traj.x.resize(static_cast<std::size_t>(N + 1));
  traj.x_pre.assign(static_cast<std::size_t>(grid.num_switches()), Vector());
  traj.x[0] = x0;
  Vector fx;
  for (int i = 0; i < N; ++i) {
    const int k = grid.phase_of(i);
    const auto& xi = traj.x[static_cast<std::size_t>(i)];
    try {
      ocp.phases[static_cast<std::size_t>(k)].dynamics.value(
          xi, controls[static_cast<std::size_t>(i)], fx);
    } catch (const std::exception& e) {
      throw RolloutError("dynamics evaluation failed at stage " + std::to_string(i) + ": " +
                             e.what(),
                         i);
    }
    Vector next = xi + grid.dt[static_cast<std::size_t>(k)] * fx;
    if (!next.allFinite()) {
      throw RolloutError("non-finite state produced at stage " + std::to_string(i), i);
    }
    const int s = grid.jump_after(i);
    if (s >= 0) {
      traj.x_pre[static_cast<std::size_t>(s)] = next;
      const auto& ev = *ocp.event(s);
      if (ev.jump_map) {
        Vector post;
        try {
          ev.jump_map->value(next, post);
        } catch (const std::exception& e) {
          throw RolloutError("jump map evaluation failed after stage " + std::to_string(i) +
                                 ": " + e.what(),
                             i);
        }
        next = std::move(post);
      }
    }
    traj.x[static_cast<std::size_t>(i + 1)] = std::move(next);
  }
  return traj;
}

// ---------------------------------------------------------------------------

namespace {

int min_count(const TimeGrid& g, int k) {
  return g.condition_stage.size() > static_cast<std::size_t>(k) &&
                 g.condition_stage[static_cast<std::size_t>(k)] >= 0
             ? 2
             : 1;
}

Iterate transfer(const SwitchedOCP& ocp, const TimeGrid& from, const TimeGrid& to,
                 const Iterate& it, double slack_floor) {
  Iterate out = zero_iterate(ocp, to);
  out.t = it.t;
  out.w = it.w;
  out.upsilon = it.upsilon;
  out.x_pre = it.x_pre;
  out.lmd_pre = it.lmd_pre;
  out.zeta = it.zeta;
  out.barrier = it.barrier;
  const auto N_old = static_cast<std::size_t>(from.N());
  const auto N_new = static_cast<std::size_t>(to.N());
  out.x[N_new] = it.x[N_old];
  out.lmd[N_new] = it.lmd[N_old];

  for (int k = 0; k < to.num_phases(); ++k) {
    const int b_old = from.phase_begin[static_cast<std::size_t>(k)];
    const int b_new = to.phase_begin[static_cast<std::size_t>(k)];
    const int n_old = from.counts[static_cast<std::size_t>(k)];
    const int n_new = to.counts[static_cast<std::size_t>(k)];
    // Node value at the end of the phase, seen from inside the phase.
    const Vector& x_end = (k < from.num_switches() && from.jump[static_cast<std::size_t>(k)])
                              ? it.x_pre[static_cast<std::size_t>(k)]
                              : it.x[static_cast<std::size_t>(b_old + n_old)];
    for (int j = 0; j < n_new; ++j) {
      const double pos = static_cast<double>(j) * n_old / n_new;
      const int lo = std::min(static_cast<int>(std::floor(pos)), n_old - 1);
      const double frac = pos - lo;
      const Vector& xa = it.x[static_cast<std::size_t>(b_old + lo)];
      const Vector& xb = lo + 1 < n_old ? it.x[static_cast<std::size_t>(b_old + lo + 1)] : x_end;
      const auto dst = static_cast<std::size_t>(b_new + j);
      const auto src = static_cast<std::size_t>(b_old + lo);
      out.x[dst] = (1.0 - frac) * xa + frac * xb;
      out.lmd[dst] = it.lmd[src];
      out.u[dst] = it.u[src];
      out.z[dst] = it.z[src].cwiseMax(slack_floor);
      out.nu[dst] = it.nu[src].cwiseMax(slack_floor);
    }
  }
  return out;
}

}  // namespace

RefineResult refine(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it,
                    double dt_max, double dt_min, MeshPolicy policy, RefineChecks checks,
                    double slack_floor) {
  if (!(dt_max > dt_min && dt_min >= 0.0)) {
    throw std::invalid_argument("refine requires dt_max > dt_min >= 0");
  }
  const TimeGrid current = with_switching_times(grid, it.t);
  const int P = current.num_phases();
  std::vector<int> counts = current.counts;
  std::vector<char> grown(static_cast<std::size_t>(P), 0), shrunk(static_cast<std::size_t>(P), 0);
  RefineResult res;

  const bool do_grow = checks != RefineChecks::kShrink;
  const bool do_shrink = checks != RefineChecks::kGrow;
  for (int k = 0; k < P; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double d = current.duration(k);
    const double step = current.dt[uk];
    if (do_grow && step > dt_max) {
      counts[uk] = std::max(counts[uk], static_cast<int>(std::ceil(d / dt_max - 1e-12)));
      grown[uk] = 1;
    } else if (do_shrink && step < dt_min) {
      const int target = static_cast<int>(std::floor(d / dt_min + 1e-12));
      const int clamped = std::max(target, min_count(current, k));
      if (target < min_count(current, k)) res.flagged_phases.push_back(k);
      if (clamped < counts[uk]) {
        counts[uk] = clamped;
        shrunk[uk] = 1;
      }
    }
  }

  if (policy == MeshPolicy::kFixedN) {
    int excess = 0;
    for (int k = 0; k < P; ++k) {
      excess += counts[static_cast<std::size_t>(k)] - current.counts[static_cast<std::size_t>(k)];
    }
    const auto step_of = [&](int k, int n) { return current.duration(k) / n; };
    while (excess > 0) {
      // Take a grid from the finest untouched phase that stays within dt_max.
      int best = -1;
      for (int k = 0; k < P; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        if (grown[uk] || counts[uk] <= min_count(current, k)) continue;
        if (step_of(k, counts[uk] - 1) > dt_max) continue;
        if (best < 0 || step_of(k, counts[uk]) < step_of(best, counts[static_cast<std::size_t>(best)])) {
          best = k;
        }
      }
      if (best < 0) {
        for (int k = 0; k < P; ++k) {
          if (grown[static_cast<std::size_t>(k)]) res.flagged_phases.push_back(k);
        }
        break;
      }
      --counts[static_cast<std::size_t>(best)];
      --excess;
    }
    while (excess < 0) {
      // Give freed grids to the coarsest phase that was not shrunk.
      int best = -1;
      for (int k = 0; k < P; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        if (shrunk[uk]) continue;
        if (step_of(k, counts[uk] + 1) < dt_min) continue;
        if (best < 0 || step_of(k, counts[uk]) > step_of(best, counts[static_cast<std::size_t>(best)])) {
          best = k;
        }
      }
      if (best < 0) break;
      ++counts[static_cast<std::size_t>(best)];
      ++excess;
    }
  }

  if (counts == current.counts) {
    res.grid = current;
    res.iterate = it;
    return res;
  }
  res.grid = make_grid(ocp, counts, it.t);
  res.iterate = transfer(ocp, current, res.grid, it, slack_floor);
  res.changed = true;
  return res;
}

}  // namespace swocp
