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

// Direct multiple-shooting transcription on per-phase uniform grids.
//
// Phase k owns N_k consecutive stages and the step Δτ_k = (t_k - t_{k-1}) / N_k
// moves with the switching times. The terminal stage N belongs to no phase.
// A switch with a state jump gets an auxiliary pre-jump node between the last
// stage of the phase and the first stage of the next one; a switch with a
// switching condition attaches it to the stage two nodes before the switch.

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "swocp/iterate.hpp"
#include "swocp/model.hpp"

namespace swocp {

class GridError : public std::invalid_argument {
 public:
  GridError(const std::string& what, int phase) : std::invalid_argument(what), phase_(phase) {}
  /// 0-based phase index the error refers to, -1 if not phase-specific.
  int phase() const { return phase_; }

 private:
  int phase_;
};

struct TimeGrid {
  double t0 = 0.0;
  double tf = 0.0;
  std::vector<int> counts;              // N_k
  std::vector<double> switching_times;  // t_1..t_K
  std::vector<double> dt;               // Δτ_k
  std::vector<int> phase_begin;         // K+2 entries; phase k = [phase_begin[k], phase_begin[k+1])
  std::vector<int> stage_phase;         // phase of every non-terminal stage
  std::vector<char> jump;               // per switch
  std::vector<int> condition_stage;     // per switch, -1 without a switching condition

  int N() const { return phase_begin.empty() ? 0 : phase_begin.back(); }
  int num_phases() const { return static_cast<int>(counts.size()); }
  int num_switches() const { return num_phases() - 1; }
  int phase_of(int stage) const { return stage_phase[static_cast<std::size_t>(stage)]; }
  double phase_start(int k) const {
    return k == 0 ? t0 : switching_times[static_cast<std::size_t>(k - 1)];
  }
  double phase_end(int k) const {
    return k == num_phases() - 1 ? tf : switching_times[static_cast<std::size_t>(k)];
  }
  double duration(int k) const { return phase_end(k) - phase_start(k); }
  double step(int stage) const { return dt[static_cast<std::size_t>(phase_of(stage))]; }
  double stage_time(int stage) const;
  /// Switch whose pre-jump node follows `stage`, or -1.
  int jump_after(int stage) const;
  /// Switch whose condition sits at `stage`, or -1.
  int condition_at(int stage) const;
};

/// Builds the grid for per-phase counts and switching times.
TimeGrid build_grid(const SwitchedOCP& ocp, std::span<const int> counts,
                    std::span<const double> switching_times);

/// Grid from explicit per-switch structure flags (one entry per switch in
/// `jumps` and `conditions`). Used where no problem definition is at hand.
TimeGrid build_grid_layout(double t0, double tf, std::span<const int> counts,
                           std::span<const double> switching_times, std::span<const char> jumps,
                           std::span<const char> conditions);

/// Same stage layout as `grid` with new switching times (and therefore steps).
TimeGrid with_switching_times(const TimeGrid& grid, std::span<const double> switching_times);

struct Trajectory {
  std::vector<Vector> x;      // x_0..x_N
  std::vector<Vector> x_pre;  // pre-jump states per switch (empty without jump)
};

class RolloutError : public std::runtime_error {
 public:
  RolloutError(const std::string& what, int stage) : std::runtime_error(what), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

/// Forward-Euler rollout of the discretized dynamics, applying jump maps.
Trajectory rollout(const SwitchedOCP& ocp, const TimeGrid& grid, const Vector& x0,
                   std::span<const Vector> controls);

enum class MeshPolicy { kAdaptiveN, kFixedN };

struct RefineResult {
  TimeGrid grid;
  Iterate iterate;
  bool changed = false;
  /// Phases whose bound could not be met (dt_min unreachable with one stage, or
  /// no room to rebalance under the fixed-N policy).
  std::vector<int> flagged_phases;
};

/// Which mesh checks to run: shrink before and grow after a solve.
enum class RefineChecks { kShrink, kGrow, kBoth };

/// Adjusts per-phase stage counts so that dt_min <= Δτ_k <= dt_max where
/// possible and transfers the iterate to the new grid. dt_min = 0 disables
/// shrinking.
RefineResult refine(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it,
                    double dt_max, double dt_min, MeshPolicy policy = MeshPolicy::kAdaptiveN,
                    RefineChecks checks = RefineChecks::kBoth, double slack_floor = 1e-4);

}  // namespace swocp
