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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "support/random_instance.hpp"
#include "swocp/oracle.hpp"
#include "swocp/problems.hpp"
#include "swocp/riccati.hpp"
#include "swocp/solver.hpp"

namespace {

using namespace swocp;
using clock_type = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& o, std::string why) {
  if (o.pass) o.detail.clear();
  o.pass = false;
  o.detail += (o.detail.empty() ? "" : "; ") + why;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double min_eig(const Matrix& P) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(P, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

// Benchmark setting: exact Hessians with the reduced-Hessian modification.
SolverOptions benchmark_options() {
  SolverOptions o;
  o.hessian = HessianMode::kExact;
  o.modify = true;
  o.riccati_dt_max = 0.5;
  return o;
}

// Worst linearized-system residual over all steps of a run, relative to
// 1 + data scale. A step taken with an active Hessian modification is checked
// against the system it solves: the linearization with σ̃ − σ added to the
// Δt_k curvature and, where P̃ = P was kept, vvᵀ/σ̃ added to Q_xx.
struct StepAudit {
  RiccatiOptions riccati;
  double worst_linear = 0.0;
  double worst_oracle = 0.0;
  int steps = 0;
  int modified_steps = 0;
  bool check_oracle = false;

  std::function<void(const KKTSystem&, const NewtonStep&)> hook() {
    return [this](const KKTSystem& sys, const NewtonStep& d) {
      ++steps;
      const RiccatiFactorization f = backward(sys, riccati);
      bool modified = false;
      for (const auto& t : f.transitions) modified = modified || t.modified || t.p_kept;
      modified_steps += modified ? 1 : 0;
      const KKTSystem solved = modified_system(sys, f);
      worst_linear =
          std::max(worst_linear, linearized_residual(solved, d) / (1.0 + data_scale(solved)));
      // Dense cross-check of modified steps only where the dense factorization is cheap.
      if (check_oracle || (modified && sys.grid.N() <= 100)) {
        const NewtonStep ref = solve_dense(assemble_dense(solved));
        worst_oracle = std::max(worst_oracle, compare(d, ref, 1e-8).worst);
      }
    };
  }
};

struct BenchmarkRun {
  int N = 0;
  Solution sol;
  double best_ms = 0.0;
};

std::vector<BenchmarkRun> g_runs;  // shared by criteria 1, 4 and 9
StepAudit g_audit_c1;

Outcome criterion1() {
  Outcome o;
  for (int N : {10, 50, 100, 500}) {
    const BuiltinProblem p = three_subsystem(N);
    const TimeGrid grid = build_grid(p.ocp, p.counts, p.switching_times);
    SolverOptions opts = benchmark_options();
    g_audit_c1.riccati = riccati_options(opts);
    opts.on_step = g_audit_c1.hook();
    BenchmarkRun run;
    run.N = N;
    run.sol = solve(p.ocp, grid, initial_iterate(p.ocp, grid, opts.ip), opts);
    opts.on_step = nullptr;
    std::vector<double> ms;
    for (int r = 0; r < 5; ++r) {
      const auto t0 = clock_type::now();
      const Solution s = solve(p.ocp, grid, initial_iterate(p.ocp, grid, opts.ip), opts);
      ms.push_back(std::chrono::duration<double, std::milli>(clock_type::now() - t0).count());
      (void)s;
    }
    run.best_ms = median(ms);
    const Solution& s = run.sol;
    o.detail += "N=" + std::to_string(N) + ": " + to_string(s.status) + " in " +
                std::to_string(s.iters) + " it, " + fmt("%.1e", s.residual.max_unperturbed) +
                ", " + fmt("%.2f ms", run.best_ms) + "  ";
    if (s.status != SolveStatus::kConverged || s.residual.max_unperturbed > 1e-7 ||
        s.iters > 100) {
      fail(o, "N=" + std::to_string(N) + " did not converge within 100 iterations");
    }
    if (N == 500 && run.best_ms > 100.0) fail(o, "N=500 solve took " + fmt("%.1f ms", run.best_ms));
    g_runs.push_back(std::move(run));
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  // Median per-iteration wall time (assembly + Riccati + update) on the
  // three-subsystem family at fixed counts, 20 repeats each.
  const auto per_iter = [](int N) {
    const BuiltinProblem p = three_subsystem(N);
    const TimeGrid grid = build_grid(p.ocp, p.counts, p.switching_times);
    SolverOptions opts = benchmark_options();
    opts.max_newton_iters = 8;
    std::vector<double> ms;
    for (int r = 0; r < 20; ++r) {
      ConvergenceLog log;
      solve_nlp(p.ocp, grid, initial_iterate(p.ocp, grid, opts.ip), opts, &log);
      for (const auto& it : log.iterations) ms.push_back(it.wall_ms);
    }
    return median(ms);
  };
  per_iter(100);  // warm-up
  const double a = per_iter(100), b = per_iter(800);
  const double ratio = b / a;
  o.detail = "per-iteration " + fmt("%.4f ms", a) + " (N=100) vs " + fmt("%.4f ms", b) +
             " (N=800), ratio " + fmt("%.2f", ratio);
  if (!(ratio >= 4.0 && ratio <= 16.0)) fail(o, o.detail + " outside [4, 16]");
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::mt19937 rng(20260);
  int instances = 0, with_jump = 0, with_condition = 0, regenerated = 0;
  double worst = 0.0;
  std::string worst_group;
  while (instances < 120) {
    testing::InstanceShape sh = testing::random_shape(rng);
    KKTSystem sys = testing::random_system(rng, sh);
    NewtonStep d;
    try {
      d = solve_step(sys).first;
    } catch (const RiccatiError& e) {
      // A reduced switching-time Hessian with σ ≤ 0 is outside the exact
      // recursion's domain; draw a new instance.
      if (e.kind() != RiccatiError::Kind::kSigma) fail(o, e.what());
      ++regenerated;
      continue;
    }
    const ComparisonReport r = compare(d, solve_dense(assemble_dense(sys)), 1e-8);
    if (r.worst > worst) {
      worst = r.worst;
      worst_group = r.worst_group;
    }
    if (!r.passed) fail(o, "instance " + std::to_string(instances) + " group " + r.worst_group);
    for (char j : sh.jumps) with_jump += j ? 1 : 0;
    for (char c : sh.conditions) with_condition += c ? 1 : 0;
    ++instances;
  }
  if (with_jump == 0 || with_condition == 0) fail(o, "no jump/condition stages sampled");
  if (o.pass) {
    o.detail = std::to_string(instances) + " instances (" + std::to_string(with_jump) +
               " jumps, " + std::to_string(with_condition) + " conditions, " +
               std::to_string(regenerated) + " redrawn), worst " + fmt("%.2e", worst) + " in " +
               worst_group;
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  for (const auto& run : g_runs) {
    if (run.sol.status != SolveStatus::kConverged) {
      fail(o, "N=" + std::to_string(run.N) + " has no converged iterate");
      continue;
    }
    const BuiltinProblem p = three_subsystem(run.N);
    const KKTSystem sys = assemble(p.ocp, run.sol.grid, run.sol.iterate);
    try {
      const RiccatiFactorization f = backward(sys);  // exact, no modification
      const RiccatiReport rep = report_of(f);
      const double chol = *std::min_element(rep.min_chol_diag.begin(), rep.min_chol_diag.end());
      const double sigma = *std::min_element(rep.sigma.begin(), rep.sigma.end());
      RiccatiOptions mod;
      mod.modify = true;
      mod.dt_max = 0.5;
      const bool modified = report_of(backward(sys, mod)).any_modified;
      o.detail += "N=" + std::to_string(run.N) + ": min chol " + fmt("%.2e", chol) +
                  ", min sigma " + fmt("%.2e", sigma) + "  ";
      if (!(chol > 0.0) || !(sigma > 0.0)) fail(o, "N=" + std::to_string(run.N) + " not PD");
      if (modified) fail(o, "N=" + std::to_string(run.N) + " modification activated");
    } catch (const RiccatiError& e) {
      fail(o, "N=" + std::to_string(run.N) + ": " + e.what());
    }
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::mt19937 rng(4242);
  double worst = INFINITY, worst_dense = 0.0;
  int modified = 0;
  for (int n = 0; n < 50; ++n) {
    testing::InstanceShape sh = testing::random_shape(rng);
    sh.coupling = 20.0;          // h_x, h_u, f large relative to the Q blocks
    sh.time_curvature = 1e-3;    // little dwell curvature to hide it
    const KKTSystem sys = testing::random_system(rng, sh);
    RiccatiOptions opts;
    opts.modify = true;
    opts.dt_max = 0.5;
    try {
      const RiccatiFactorization f = backward(sys, opts);
      modified += report_of(f).any_modified ? 1 : 0;
      for (const auto& st : f.stages) worst = std::min(worst, min_eig(st.P));
      for (const auto& t : f.transitions) worst = std::min(worst, min_eig(t.P));
      const NewtonStep d = forward(f, sys);
      for (double t : d.dt) {
        if (!std::isfinite(t)) fail(o, "non-finite step");
      }
      const ComparisonReport cmp =
          compare(d, solve_dense(assemble_dense(modified_system(sys, f))), 1e-8);
      worst_dense = std::max(worst_dense, cmp.worst);
      if (!cmp.passed) fail(o, "instance " + std::to_string(n) + " disagrees with dense solve");
    } catch (const std::exception& e) {
      fail(o, "instance " + std::to_string(n) + ": " + e.what());
    }
  }
  if (worst < -1e-10) fail(o, "min eigenvalue " + fmt("%.3e", worst));
  if (o.pass) {
    o.detail = "50 instances, " + std::to_string(modified) + " with modification, min eig(P) " +
               fmt("%.3e", worst) + ", modified-system dense agreement " + fmt("%.2e", worst_dense);
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  StageKKT s;
  s.Qxx = Matrix::Identity(2, 2) * 2.0;
  s.Qxu = Matrix::Constant(2, 1, 0.1);
  s.Quu = Matrix::Identity(1, 1);
  s.hx = Vector::Constant(2, 0.5);
  s.hu = Vector::Constant(1, -0.4);
  Matrix lower(3, 3);
  lower << s.Qxx, s.Qxu, s.Qxu.transpose(), s.Quu;
  const Vector ev =
      Eigen::SelfAdjointEigenSolver<Matrix>(stage_time_hessian(s)).eigenvalues();
  const double lo = min_eig(lower);
  o.detail = "lower block min eig " + fmt("%.3f", lo) + ", eigenvalues [" +
             fmt("%.4f", ev.minCoeff()) + ", " + fmt("%.4f", ev.maxCoeff()) + "]";
  if (!(lo > 0.0) || !(ev.minCoeff() < 0.0) || !(ev.maxCoeff() > 0.0)) fail(o, o.detail);
  return o;
}

Outcome criterion7() {
  Outcome o;
  SolverOptions opts = benchmark_options();
  opts.mesh_refinement = true;
  {
    const BuiltinProblem p = three_subsystem(10);
    const TimeGrid grid = build_grid(p.ocp, p.counts, p.switching_times);
    opts.dt_max = 0.35;
    const Solution s = solve(p.ocp, grid, initial_iterate(p.ocp, grid, opts.ip), opts);
    double max_dt = 0.0;
    for (double dt : s.grid.dt) max_dt = std::max(max_dt, dt);
    o.detail = "N=10: " + to_string(s.status) + ", " + std::to_string(s.refinements) +
               " refinements, max step " + fmt("%.4f", max_dt) + "; objectives";
    if (s.status != SolveStatus::kConverged) fail(o, "N=10 run " + to_string(s.status));
    if (max_dt > 0.35 + 1e-12) fail(o, "step " + fmt("%.4f", max_dt) + " above 0.35");
    if (s.refinements > 5) fail(o, std::to_string(s.refinements) + " refinements");
  }
  double prev = INFINITY;
  std::string objs;
  for (int N : {10, 50, 100, 500}) {
    const BuiltinProblem p = three_subsystem(N);
    const TimeGrid grid = build_grid(p.ocp, p.counts, p.switching_times);
    opts.dt_max = three_subsystem_dt_max(N);
    const Solution s = solve(p.ocp, grid, initial_iterate(p.ocp, grid, opts.ip), opts);
    objs += " " + fmt("%.6f", s.objective);
    if (s.status != SolveStatus::kConverged) fail(o, "sweep N=" + std::to_string(N));
    if (s.objective > prev * (1.0 + 1e-3)) fail(o, "objective increased at N=" + std::to_string(N));
    prev = s.objective;
  }
  if (o.pass) o.detail += objs;
  return o;
}

StepAudit g_audit_c8;

Outcome criterion8() {
  Outcome o;
  const BuiltinProblem p = bouncing_mass(20);
  const TimeGrid grid = build_grid(p.ocp, p.counts, p.switching_times);
  SolverOptions opts;
  g_audit_c8.riccati = riccati_options(opts);
  g_audit_c8.check_oracle = true;
  opts.on_step = g_audit_c8.hook();
  const Solution s = solve(p.ocp, grid, initial_iterate(p.ocp, grid, opts.ip), opts);
  o.detail = to_string(s.status) + " in " + std::to_string(s.iters) + " it, residual " +
             fmt("%.1e", s.residual.max_unperturbed) + ", worst step deviation " +
             fmt("%.2e", g_audit_c8.worst_oracle) + " over " +
             std::to_string(g_audit_c8.steps) + " steps";
  if (s.status != SolveStatus::kConverged || s.residual.max_unperturbed > 1e-7) fail(o, o.detail);
  if (g_audit_c8.worst_oracle > 1e-8) fail(o, o.detail);
  return o;
}

Outcome criterion9() {
  Outcome o;
  const double worst = std::max(g_audit_c1.worst_linear, g_audit_c8.worst_linear);
  const int modified = g_audit_c1.modified_steps + g_audit_c8.modified_steps;
  o.detail = std::to_string(g_audit_c1.steps + g_audit_c8.steps) +
             " steps, worst residual / (1 + scale) " + fmt("%.2e", worst) + "; " +
             std::to_string(modified) + " modified steps checked against their modified system" +
             " (dense agreement, N <= 100: " + fmt("%.2e", g_audit_c1.worst_oracle) + ")";
  if (g_audit_c1.steps == 0 || g_audit_c8.steps == 0) fail(o, "no steps audited");
  if (worst > 1e-9) fail(o, o.detail);
  if (g_audit_c1.worst_oracle > 1e-8) fail(o, "modified steps disagree with the dense solve");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"benchmark convergence", criterion1},
      {"linear complexity", criterion2},
      {"oracle equivalence", criterion3},
      {"positive definiteness at the solution", criterion4},
      {"modification robustness", criterion5},
      {"indefinite stage Hessian", criterion6},
      {"mesh refinement", criterion7},
      {"state jump and switching condition", criterion8},
      {"linearized-system residual", criterion9},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    failures += out.pass ? 0 : 1;
    std::printf("%s criterion %zu (%s): %s\n", out.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first, out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
