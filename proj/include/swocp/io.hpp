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

// Export of solutions and convergence logs.
//
// trajectory.csv has one row per grid node (t, x0.., u0..). The pre-jump node
// of a switch repeats the switching time; nodes without a control (terminal,
// pre-jump) write nan.

#pragma once

#include <string>
#include <vector>

#include "swocp/solver.hpp"

namespace swocp {

struct RunSummary {
  std::string problem;
  std::string status;
  double objective = 0.0;
  std::vector<double> switching_times;
  std::vector<int> counts;
  int iters = 0;
  int refinements = 0;
  double mean_ms = 0.0;
  double median_ms_per_iter = 0.0;
  double kkt_max = 0.0;
  int repeats = 1;
  double oracle_deviation = -1.0;  // worst Riccati-vs-dense deviation, -1 if unchecked
};

struct TrajectoryTable {
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<Vector> u;  // nan entries where the node carries no control
};

void write_trajectory_csv(const std::string& path, const SwitchedOCP& ocp, const TimeGrid& grid,
                          const Iterate& it);
TrajectoryTable read_trajectory_csv(const std::string& path, int nx, int nu);

/// Rebuilds the primal part of an iterate from a table written by
/// write_trajectory_csv and evaluates the objective on `grid`.
double objective_from_table(const SwitchedOCP& ocp, const TimeGrid& grid,
                            const TrajectoryTable& table);

void write_log_jsonl(const std::string& path, const ConvergenceLog& log);
void write_summary_json(const std::string& path, const RunSummary& summary);
RunSummary read_summary_json(const std::string& path);

}  // namespace swocp
