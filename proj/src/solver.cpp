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

#include "swocp/solver.hpp"

#include <chrono>
#include <cmath>

namespace swocp {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxIters: return "max_iters";
    case SolveStatus::kRiccatiFailure: return "riccati_failure";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

RiccatiOptions riccati_options(const SolverOptions& opts) {
  RiccatiOptions r;
  r.modify = opts.modify.value_or(opts.hessian == HessianMode::kGaussNewton);
  r.dt_max = opts.riccati_dt_max;
  r.p_modification = opts.p_modification;
  return r;
}

namespace {

double termination_norm(const KKTResidual& r, TerminationNorm n) {
  return n == TerminationNorm::kMax ? r.max_unperturbed : r.l2_unperturbed;
}

bool all_finite(const NewtonStep& d) {
  const auto ok = [](const std::vector<Vector>& v) {
    for (const auto& e : v) {
      if (!e.allFinite()) return false;
    }
    return true;
  };
  for (double t : d.dt) {
    if (!std::isfinite(t)) return false;
  }
  return ok(d.dx) && ok(d.du) && ok(d.dlmd) && ok(d.dx_pre) && ok(d.dlmd_pre) && ok(d.dzeta) &&
         ok(d.dz) && ok(d.dnu);
}

// Keeps every phase duration at least (1 − τ) of its current value.
double duration_step(const TimeGrid& g, const NewtonStep& d, double tau, double alpha) {
  const int K = g.num_switches();
  for (int p = 0; p <= K; ++p) {
    double delta = 0.0;
    if (p < K) delta += d.dt[static_cast<std::size_t>(p)];
    if (p > 0) delta -= d.dt[static_cast<std::size_t>(p - 1)];
    if (delta < 0.0) alpha = std::min(alpha, -tau * g.duration(p) / delta);
  }
  return alpha;
}

void axpy(std::vector<Vector>& v, double a, const std::vector<Vector>& d) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].size() > 0) v[i] += a * d[i];
  }
}

bool needs_growth(const TimeGrid& g, double dt_max) {
  for (double dt : g.dt) {
    if (dt > dt_max) return true;
  }
  return false;
}

}  // namespace

NlpResult solve_nlp(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& init,
                    const SolverOptions& opts, ConvergenceLog* log, bool allow_refinement_exit) {
  using clock = std::chrono::steady_clock;
  check_options(opts.ip);
  const RiccatiOptions ropts = riccati_options(opts);
  AssembleOptions aopts;
  aopts.hessian = opts.hessian;
  aopts.threads = opts.threads;

  NlpResult out;
  out.iterate = init;
  Iterate& it = out.iterate;
  out.grid = with_switching_times(grid, it.t);
  const int base_iter = log && !log->iterations.empty() ? log->iterations.back().iter + 1 : 0;
  const int nlp_index = log ? static_cast<int>(log->refinements.size()) : 0;

  for (int iter = 0;; ++iter) {
    const auto start = clock::now();
    KKTSystem sys = assemble(ocp, out.grid, it, aopts);
    out.residual = residual_of(sys);
    if (termination_norm(out.residual, opts.termination) <= opts.tol) {
      out.status = SolveStatus::kConverged;
      out.iters = iter;
      return out;
    }
    if (iter >= opts.max_newton_iters) {
      out.status = SolveStatus::kMaxIters;
      out.iters = iter;
      return out;
    }
    const double eps = update_barrier(it.barrier, out.residual.l2, opts.ip);
    if (eps != it.barrier) {
      it.barrier = eps;
      sys = assemble(ocp, out.grid, it, aopts);
      out.residual = residual_of(sys);
    }
    if (allow_refinement_exit && out.residual.l2 < opts.refine_trigger &&
        needs_growth(out.grid, opts.dt_max)) {
      out.stopped_for_refinement = true;
      out.status = SolveStatus::kMaxIters;
      out.iters = iter;
      return out;
    }

    NewtonStep d;
    RiccatiReport rep;
    try {
      auto [step, report] = solve_step(sys, ropts);
      d = std::move(step);
      rep = std::move(report);
    } catch (const RiccatiError& e) {
      out.status = SolveStatus::kRiccatiFailure;
      out.message = e.what();
      out.failed_stage = e.stage();
      out.failed_switch = e.switch_index();
      out.iters = iter;
      return out;
    }
    recover_bound_steps(sys, d);
    if (!all_finite(d)) {
      out.status = SolveStatus::kNumericalFailure;
      out.message = "non-finite Newton step";
      out.iters = iter;
      return out;
    }
    if (opts.on_step) opts.on_step(sys, d);

    auto [ap, ad] = fraction_to_boundary(it, d, opts.ip.tau);
    ap = duration_step(out.grid, d, opts.ip.tau, ap);

    axpy(it.x, ap, d.dx);
    axpy(it.u, ap, d.du);
    axpy(it.lmd, ap, d.dlmd);
    axpy(it.x_pre, ap, d.dx_pre);
    axpy(it.lmd_pre, ap, d.dlmd_pre);
    axpy(it.zeta, ap, d.dzeta);
    axpy(it.z, ap, d.dz);
    axpy(it.nu, ad, d.dnu);
    for (std::size_t k = 0; k < it.t.size(); ++k) it.t[k] += ap * d.dt[k];
    for (std::size_t p = 0; p < it.w.size(); ++p) {
      it.w[p] += ap * d.dw[p];
      it.upsilon[p] += ad * d.dupsilon[p];
    }
    out.grid = with_switching_times(out.grid, it.t);

    if (log) {
      IterationRecord rec;
      rec.iter = base_iter + iter;
      rec.nlp = nlp_index;
      rec.N = out.grid.N();
      rec.l2 = out.residual.l2;
      rec.max = out.residual.max;
      rec.l2_unperturbed = out.residual.l2_unperturbed;
      rec.max_unperturbed = out.residual.max_unperturbed;
      rec.alpha_primal = ap;
      rec.alpha_dual = ad;
      rec.barrier = sys.barrier;
      rec.switching_times = it.t;
      rec.modification = rep.any_modified;
      rec.wall_ms =
          std::chrono::duration<double, std::milli>(clock::now() - start).count();
      log->iterations.push_back(std::move(rec));
    }
  }
}

Iterate initial_iterate(const SwitchedOCP& ocp, const TimeGrid& grid, const IPOptions& ip) {
  Iterate it = zero_iterate(ocp, grid);
  for (auto& x : it.x) x = ocp.initial_state;
  for (auto& x : it.x_pre) {
    if (x.size() > 0) x = ocp.initial_state;
  }
  initialize_slacks(ocp, grid, it, ip);
  return it;
}

double objective(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& it) {
  const TimeGrid g = with_switching_times(grid, it.t);
  const int N = g.N();
  double J = ocp.terminal_cost.value(it.x[static_cast<std::size_t>(N)]);
  for (int i = 0; i < N; ++i) {
    const int p = g.phase_of(i);
    J += ocp.phases[static_cast<std::size_t>(p)].cost.value(it.x[static_cast<std::size_t>(i)],
                                                             it.u[static_cast<std::size_t>(i)]) *
         g.dt[static_cast<std::size_t>(p)];
  }
  for (int s = 0; s < g.num_switches(); ++s) {
    const auto* ev = ocp.event(s);
    if (g.jump[static_cast<std::size_t>(s)] && ev->jump_cost) {
      J += ev->jump_cost->value(it.x_pre[static_cast<std::size_t>(s)]);
    }
  }
  return J;
}

Solution solve(const SwitchedOCP& ocp, const TimeGrid& grid, const Iterate& init,
               const SolverOptions& opts, ConvergenceLog* log) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (opts.mesh_refinement && !(opts.dt_max > opts.dt_min && opts.dt_min >= 0.0)) {
    throw std::invalid_argument("mesh refinement requires dt_max > dt_min >= 0");
  }
  ConvergenceLog local;
  ConvergenceLog* lg = log ? log : &local;

  Solution sol;
  TimeGrid g = with_switching_times(grid, init.t);
  Iterate it = init;
  int budget = opts.max_total_iters;

  const auto apply = [&](RefineChecks checks, int after_iter) {
    const double dt_min = opts.dt_min > 0.0 ? opts.dt_min : 0.0;
    RefineResult rr = refine(ocp, g, it, opts.dt_max, dt_min, opts.mesh_policy, checks,
                             opts.ip.slack_floor);
    if (!rr.changed) return false;
    RefinementEvent ev;
    ev.after_iter = after_iter;
    ev.old_counts = g.counts;
    ev.new_counts = rr.grid.counts;
    ev.flagged_phases = rr.flagged_phases;
    lg->refinements.push_back(std::move(ev));
    g = std::move(rr.grid);
    it = std::move(rr.iterate);
    ++sol.refinements;
    return true;
  };

  while (true) {
    if (opts.mesh_refinement && opts.dt_min > 0.0) apply(RefineChecks::kShrink, sol.iters);
    SolverOptions o = opts;
    o.max_newton_iters = std::min(opts.max_newton_iters, budget);
    NlpResult r = solve_nlp(ocp, g, it, o, lg, opts.mesh_refinement);
    sol.iters += r.iters;
    budget -= r.iters;
    it = std::move(r.iterate);
    g = std::move(r.grid);
    sol.residual = r.residual;
    sol.status = r.status;
    sol.message = r.message;
    if (r.status == SolveStatus::kRiccatiFailure || r.status == SolveStatus::kNumericalFailure) {
      break;
    }
    bool grown = false;
    if (opts.mesh_refinement) grown = apply(RefineChecks::kGrow, sol.iters);
    if (r.status == SolveStatus::kConverged && !grown) break;
    if (budget <= 0) {
      sol.status = SolveStatus::kMaxIters;
      break;
    }
    if (!grown && !r.stopped_for_refinement) break;  // iteration cap of this NLP
  }
  sol.iterate = std::move(it);
  sol.grid = std::move(g);
  sol.objective = objective(ocp, sol.grid, sol.iterate);
  return sol;
}

}  // namespace swocp
