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

// swocp command-line harness.
//
//   swocp solve --problem three-subsystem --grids 10 --out run/
//   swocp solve --problem three-subsystem --sweep --repeats 100 --no-refine
//   swocp solve --config run.ini

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swocp/io.hpp"
#include "swocp/oracle.hpp"
#include "swocp/problems.hpp"
#include "swocp/solver.hpp"

namespace {

struct RunConfig {
  std::string problem = "three-subsystem";
  int grids = 10;
  std::vector<int> split;
  double tol = 1e-7;
  std::optional<double> dt_max;
  double dt_min = 0.0;
  std::string hessian = "exact";
  std::optional<double> barrier_fixed;
  std::string modify = "auto";
  bool refine = true;
  bool fixed_n = false;
  int repeats = 1;
  std::string out = "swocp_out";
  int threads = 1;
  bool sweep = false;
  bool check_oracle = false;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOutcome {
  swocp::Solution solution;
  swocp::ConvergenceLog log;
  swocp::RunSummary summary;
};

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RunOutcome run_one(const RunConfig& cfg, int N) {
  swocp::BuiltinProblem prob = swocp::make_builtin(cfg.problem, N);
  if (!cfg.split.empty() && !cfg.sweep) {
    if (static_cast<int>(cfg.split.size()) != prob.ocp.num_phases()) {
      throw ConfigError("--split needs one count per phase (" +
                        std::to_string(prob.ocp.num_phases()) + ")");
    }
    if (std::accumulate(cfg.split.begin(), cfg.split.end(), 0) != N) {
      throw ConfigError("--split must sum to --grids");
    }
    prob.counts = cfg.split;
  }
  const auto report = swocp::validate(prob.ocp);
  if (!report.ok()) throw ConfigError("problem rejected:\n" + report.to_string());

  swocp::SolverOptions opts;
  opts.tol = cfg.tol;
  if (cfg.hessian == "exact") {
    opts.hessian = swocp::HessianMode::kExact;
    // Benchmark setting: exact Hessian together with the reduced-Hessian modification.
    opts.modify = true;
  } else if (cfg.hessian == "gauss-newton") {
    opts.hessian = swocp::HessianMode::kGaussNewton;
  } else {
    throw ConfigError("--hessian must be 'exact' or 'gauss-newton'");
  }
  if (cfg.modify == "on") {
    opts.modify = true;
  } else if (cfg.modify == "off") {
    opts.modify = false;
  } else if (cfg.modify != "auto") {
    throw ConfigError("--modify must be 'on', 'off' or 'auto'");
  }
  if (cfg.barrier_fixed) {
    opts.ip.fixed_barrier = true;
    opts.ip.eps0 = *cfg.barrier_fixed;
    opts.ip.eps_min = std::min(opts.ip.eps_min, *cfg.barrier_fixed);
  }
  opts.mesh_refinement = cfg.refine;
  opts.dt_max = cfg.dt_max.value_or(prob.dt_max);
  opts.dt_min = cfg.dt_min;
  opts.mesh_policy = cfg.fixed_n ? swocp::MeshPolicy::kFixedN : swocp::MeshPolicy::kAdaptiveN;
  opts.threads = cfg.threads;
  if (cfg.refine && !(opts.dt_max > opts.dt_min)) throw ConfigError("--dt-max must exceed --dt-min");

  double oracle_dev = -1.0;
  if (cfg.check_oracle) {
    oracle_dev = 0.0;
    opts.on_step = [&oracle_dev](const swocp::KKTSystem& sys, const swocp::NewtonStep& step) {
      const auto dense = swocp::solve_dense(swocp::assemble_dense(sys));
      const auto cmp = swocp::compare(step, dense, 1e-8);
      oracle_dev = std::max(oracle_dev, cmp.worst);
    };
  }

  RunOutcome out;
  std::vector<double> run_ms, iter_ms;
  for (int r = 0; r < std::max(1, cfg.repeats); ++r) {
    const swocp::TimeGrid grid =
        swocp::build_grid(prob.ocp, prob.counts, prob.switching_times);
    const swocp::Iterate init = swocp::initial_iterate(prob.ocp, grid, opts.ip);
    swocp::ConvergenceLog log;
    const auto start = std::chrono::steady_clock::now();
    swocp::Solution sol = swocp::solve(prob.ocp, grid, init, opts, &log);
    run_ms.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count());
    for (const auto& rec : log.iterations) iter_ms.push_back(rec.wall_ms);
    out.solution = std::move(sol);
    out.log = std::move(log);
  }
  swocp::RunSummary& s = out.summary;
  s.problem = prob.name;
  s.status = swocp::to_string(out.solution.status);
  s.objective = out.solution.objective;
  s.switching_times = out.solution.iterate.t;
  s.counts = out.solution.grid.counts;
  s.iters = out.solution.iters;
  s.refinements = out.solution.refinements;
  s.mean_ms = std::accumulate(run_ms.begin(), run_ms.end(), 0.0) / run_ms.size();
  s.median_ms_per_iter = median(iter_ms);
  s.kkt_max = out.solution.residual.max_unperturbed;
  s.repeats = static_cast<int>(run_ms.size());
  s.oracle_deviation = oracle_dev;
  return out;
}

int run(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out);
  if (cfg.sweep) {
    const std::vector<int> Ns = cfg.problem == "three-subsystem" ? std::vector<int>{10, 50, 100, 500}
                                                                 : std::vector<int>{20, 40, 80, 160};
    std::ofstream csv(fs::path(cfg.out) / "sweep.csv");
    csv << "N,status,iters,refinements,objective,mean_ms,median_ms_per_iter\n";
    std::printf("%6s %-18s %6s %5s %22s %10s %12s\n", "N", "status", "iters", "ref", "objective",
                "mean_ms", "ms/iter");
    bool all = true;
    for (int N : Ns) {
      const RunOutcome o = run_one(cfg, N);
      const auto& s = o.summary;
      all = all && s.status == "converged";
      char line[256];
      std::snprintf(line, sizeof(line), "%d,%s,%d,%d,%.17g,%.6g,%.6g\n", N, s.status.c_str(),
                    s.iters, s.refinements, s.objective, s.mean_ms, s.median_ms_per_iter);
      csv << line;
      std::printf("%6d %-18s %6d %5d %22.15g %10.4g %12.4g\n", N, s.status.c_str(), s.iters,
                  s.refinements, s.objective, s.mean_ms, s.median_ms_per_iter);
    }
    return all ? 0 : 1;
  }
  const RunOutcome o = run_one(cfg, cfg.grids);
  const auto prob = swocp::make_builtin(cfg.problem, cfg.grids);
  swocp::write_trajectory_csv((fs::path(cfg.out) / "trajectory.csv").string(), prob.ocp,
                              o.solution.grid, o.solution.iterate);
  swocp::write_log_jsonl((fs::path(cfg.out) / "log.jsonl").string(), o.log);
  swocp::write_summary_json((fs::path(cfg.out) / "summary.json").string(), o.summary);
  const auto& s = o.summary;
  std::printf("status: %s\niterations: %d (refinements: %d)\nobjective: %.12g\n",
              s.status.c_str(), s.iters, s.refinements, s.objective);
  std::printf("switching times:");
  for (double t : s.switching_times) std::printf(" %.9g", t);
  std::printf("\nkkt max-norm: %.3e\nmean time: %.4g ms\n", s.kkt_max, s.mean_ms);
  if (s.oracle_deviation >= 0.0) std::printf("oracle deviation: %.3e\n", s.oracle_deviation);
  if (o.solution.status != swocp::SolveStatus::kConverged) {
    if (!o.solution.message.empty()) std::fprintf(stderr, "%s\n", o.solution.message.c_str());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switched-system optimal control with switching-time optimization"};
  app.set_config("--config", "", "INI/TOML configuration file (sections per subcommand)");
  app.require_subcommand(1);
  RunConfig cfg;
  CLI::App* solve = app.add_subcommand("solve", "Solve a built-in problem");
  solve->add_option("--problem", cfg.problem, "Built-in problem")
      ->check(CLI::IsMember(swocp::builtin_problem_names()));
  solve->add_option("--grids,-N", cfg.grids, "Total number of grids")->check(CLI::PositiveNumber);
  solve->add_option("--split", cfg.split, "Per-phase grid counts (comma separated)")
      ->delimiter(',');
  solve->add_option("--tol", cfg.tol, "Unperturbed KKT max-norm tolerance")
      ->check(CLI::PositiveNumber);
  solve->add_option("--dt-max", cfg.dt_max, "Mesh threshold: maximum step");
  solve->add_option("--dt-min", cfg.dt_min, "Mesh threshold: minimum step (0 disables)");
  solve->add_option("--hessian", cfg.hessian, "exact | gauss-newton");
  solve->add_option("--modify", cfg.modify, "Reduced-Hessian modification: on | off | auto");
  solve->add_option("--barrier-fixed", cfg.barrier_fixed, "Keep the barrier fixed at this value")
      ->check(CLI::PositiveNumber);
  solve->add_flag("--refine,!--no-refine", cfg.refine, "Adaptive mesh refinement (default on)");
  solve->add_flag("--fixed-n", cfg.fixed_n, "Keep the total grid count during refinement");
  solve->add_option("--repeats", cfg.repeats, "Timing repeats")->check(CLI::PositiveNumber);
  solve->add_option("--out", cfg.out, "Output directory");
  solve->add_option("--threads", cfg.threads, "Threads for stage-wise KKT assembly")
      ->check(CLI::PositiveNumber);
  solve->add_flag("--sweep", cfg.sweep, "Run the resolution sweep, one timing row per N");
  solve->add_flag("--check-oracle", cfg.check_oracle,
                  "Compare every Newton step against the dense KKT solve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    return run(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
