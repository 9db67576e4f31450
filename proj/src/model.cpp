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

#include "swocp/model.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace swocp {

namespace {

std::string phase_label(int k) { return "phase " + std::to_string(k + 1); }

// Deterministic probe points used for structural checks.
std::vector<std::pair<Vector, Vector>> probe_points(int nx, int nu) {
  std::vector<std::pair<Vector, Vector>> points;
  Vector x(nx), u(nu);
  for (int j = 0; j < nx; ++j) x(j) = 0.3 + 0.1 * j;
  for (int j = 0; j < nu; ++j) u(j) = -0.2 + 0.15 * j;
  points.emplace_back(x, u);
  points.emplace_back(Vector::Constant(nx, -0.7), Vector::Constant(nu, 0.4));
  return points;
}

class Reporter {
 public:
  explicit Reporter(ValidationReport& r) : report_(r) {}
  void add(std::optional<int> phase, std::string msg) {
    if (phase) msg = phase_label(*phase) + ": " + msg;
    report_.violations.push_back({phase, std::move(msg)});
  }

 private:
  ValidationReport& report_;
};

void check_stage_function(const StageFunction& fn, const std::string& what, int phase, int rows,
                          int nx, int nu, Reporter& rep) {
  if (!fn.jacobian) {
    rep.add(phase, what + " has no jacobian");
    return;
  }
  const auto [x, u] = probe_points(nx, nu).front();
  try {
    Vector out;
    Matrix dx, du;
    fn.value(x, u, out);
    fn.jacobian(x, u, dx, du);
    if (out.size() != rows) {
      rep.add(phase, what + " returns " + std::to_string(out.size()) + " entries, expected " +
                         std::to_string(rows));
    }
    if (dx.rows() != rows || dx.cols() != nx || du.rows() != rows || du.cols() != nu) {
      rep.add(phase, what + " jacobian shape inconsistent with dimensions");
    }
  } catch (const std::exception& e) {
    rep.add(phase, what + " threw at probe point: " + e.what());
  }
}

}  // namespace

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.message << '\n';
  return os.str();
}

ValidationReport validate(const SwitchedOCP& ocp) {
  ValidationReport report;
  Reporter rep(report);

  if (ocp.phases.empty()) {
    rep.add(std::nullopt, "problem has no phases");
    return report;
  }
  if (ocp.nx <= 0) rep.add(std::nullopt, "state dimension must be positive");
  if (ocp.nu <= 0) rep.add(std::nullopt, "control dimension must be positive");
  if (!(ocp.t0 < ocp.tf)) rep.add(std::nullopt, "horizon must satisfy t0 < tf");
  if (ocp.initial_state.size() != ocp.nx) {
    rep.add(std::nullopt, "initial state has wrong dimension");
  }
  if (ocp.nx <= 0 || ocp.nu <= 0) return report;

  double dwell_sum = 0.0;
  for (int k = 0; k < ocp.num_phases(); ++k) {
    const auto& ph = ocp.phases[static_cast<std::size_t>(k)];
    if (!(ph.min_dwell >= 0.0) || !std::isfinite(ph.min_dwell)) {
      rep.add(k, "minimum dwell time must be finite and >= 0");
    } else {
      dwell_sum += ph.min_dwell;
    }
    if (!ph.dynamics.defined()) {
      rep.add(k, "dynamics are undefined");
    } else {
      check_stage_function(ph.dynamics, "dynamics", k, ocp.nx, ocp.nx, ocp.nu, rep);
    }
    if (ph.constraint.defined()) {
      if (ph.constraint.dim < 0) {
        rep.add(k, "constraint dimension must be >= 0");
      } else {
        check_stage_function(ph.constraint, "path constraint", k, ph.constraint.dim, ocp.nx,
                             ocp.nu, rep);
      }
    }
    if (!ph.cost.defined() || !ph.cost.gradient || !ph.cost.hessian) {
      rep.add(k, "stage cost needs value, gradient and hessian");
    } else {
      try {
        const auto [x, u] = probe_points(ocp.nx, ocp.nu).front();
        Vector gx, gu;
        Matrix hxx, hxu, huu;
        ph.cost.gradient(x, u, gx, gu);
        ph.cost.hessian(x, u, hxx, hxu, huu);
        if (gx.size() != ocp.nx || gu.size() != ocp.nu || hxx.rows() != ocp.nx ||
            hxx.cols() != ocp.nx || hxu.rows() != ocp.nx || hxu.cols() != ocp.nu ||
            huu.rows() != ocp.nu || huu.cols() != ocp.nu) {
          rep.add(k, "stage cost derivative shapes inconsistent with dimensions");
        }
      } catch (const std::exception& e) {
        rep.add(k, std::string("stage cost threw at probe point: ") + e.what());
      }
    }

    if (!ph.exit_event) continue;
    if (k == ocp.num_phases() - 1) {
      rep.add(k, "the final phase cannot carry an exit event");
      continue;
    }
    const auto& ev = *ph.exit_event;
    if (ev.jump_map) {
      if (!ev.jump_map->defined() || !ev.jump_map->jacobian || ev.jump_map->dim != ocp.nx) {
        rep.add(k, "jump map needs value and jacobian mapping into the state space");
      }
    }
    if (ev.jump_cost && (!ev.jump_cost->defined() || !ev.jump_cost->gradient ||
                         !ev.jump_cost->hessian)) {
      rep.add(k, "jump cost needs value, gradient and hessian");
    }
    if (ev.switching_condition) {
      const auto& e = *ev.switching_condition;
      if (!e.defined() || !e.jacobian || e.dim <= 0) {
        rep.add(k, "switching condition needs value, jacobian and a positive dimension");
        continue;
      }
      if (ocp.nx % 2 != 0) {
        rep.add(k, "switching condition requires a state partitioned as (q, v) of even size");
        continue;
      }
      const int n = ocp.nx / 2;
      for (const auto& [x, u] : probe_points(ocp.nx, ocp.nu)) {
        try {
          Matrix J;
          e.jacobian(x, J);
          if (J.rows() != e.dim || J.cols() != ocp.nx) {
            rep.add(k, "switching condition jacobian shape inconsistent with dimensions");
            break;
          }
          if (J.rightCols(n).cwiseAbs().maxCoeff() > 0.0) {
            rep.add(k,
                    "switching condition jacobian must have the structure [d_q e, 0] "
                    "(nonzero velocity block)");
            break;
          }
          if (ph.dynamics.defined() && ph.dynamics.jacobian) {
            Matrix fx, fu;
            ph.dynamics.jacobian(x, u, fx, fu);
            if (fu.rows() == ocp.nx && fu.topRows(n).cwiseAbs().maxCoeff() > 0.0) {
              rep.add(k,
                      "switching condition requires partitioned dynamics whose position rows "
                      "do not depend on the control");
              break;
            }
          }
        } catch (const std::exception& ex) {
          rep.add(k, std::string("switching condition threw at probe point: ") + ex.what());
          break;
        }
      }
    }
  }
  if (dwell_sum > ocp.tf - ocp.t0) {
    rep.add(std::nullopt, "sum of minimum dwell times exceeds the horizon length");
  }
  if (!ocp.terminal_cost.defined() || !ocp.terminal_cost.gradient ||
      !ocp.terminal_cost.hessian) {
    rep.add(std::nullopt, "terminal cost needs value, gradient and hessian");
  }
  return report;
}

// ---------------------------------------------------------------------------
// Finite-difference derivative checks

namespace {

template <class F>
DerivativeCheck guarded(std::string name, F&& compute) {
  DerivativeCheck c;
  c.function = std::move(name);
  try {
    c.max_abs_error = compute();
  } catch (const std::exception& e) {
    c.evaluated = false;
    c.error = e.what();
    c.max_abs_error = std::numeric_limits<double>::infinity();
  }
  return c;
}

// Central differences of a vector map v(p) with respect to p.
template <class F>
Matrix fd_jacobian(F&& v, const Vector& p, double h) {
  Vector pp = p, pm = p;
  Matrix J;
  for (int j = 0; j < p.size(); ++j) {
    pp(j) = p(j) + h;
    pm(j) = p(j) - h;
    const Vector d = (v(pp) - v(pm)) / (2.0 * h);
    if (j == 0) J.resize(d.size(), p.size());
    J.col(j) = d;
    pp(j) = pm(j) = p(j);
  }
  if (p.size() == 0) J.resize(0, 0);
  return J;
}

double max_abs(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::runtime_error("derivative has the wrong shape");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

Vector weights(int n) {
  Vector w(n);
  for (int j = 0; j < n; ++j) w(j) = 1.0 + 0.25 * j;
  return w;
}

void check_stage_function(const StageFunction& fn, const std::string& prefix, const Vector& x,
                          const Vector& u, double h, DerivativeReport& rep) {
  if (!fn.defined() || !fn.jacobian) return;
  const int nx = static_cast<int>(x.size());
  const int nu = static_cast<int>(u.size());
  const auto value = [&](const Vector& xx, const Vector& uu) {
    Vector out;
    fn.value(xx, uu, out);
    return out;
  };
  rep.checks.push_back(guarded(prefix + " jacobian_x", [&] {
    Matrix dx, du;
    fn.jacobian(x, u, dx, du);
    return max_abs(dx, fd_jacobian([&](const Vector& p) { return value(p, u); }, x, h));
  }));
  rep.checks.push_back(guarded(prefix + " jacobian_u", [&] {
    Matrix dx, du;
    fn.jacobian(x, u, dx, du);
    return max_abs(du, fd_jacobian([&](const Vector& p) { return value(x, p); }, u, h));
  }));
  if (!fn.weighted_hessian) return;
  rep.checks.push_back(guarded(prefix + " weighted_hessian", [&] {
    const Vector w = weights(fn.dim);
    Matrix hxx, hxu, huu;
    fn.weighted_hessian(x, u, w, hxx, hxu, huu);
    const auto grad = [&](const Vector& p) {
      Matrix dx, du;
      fn.jacobian(p.head(nx), p.tail(nu), dx, du);
      Vector g(nx + nu);
      g << dx.transpose() * w, du.transpose() * w;
      return g;
    };
    Vector p(nx + nu);
    p << x, u;
    const Matrix H = fd_jacobian(grad, p, h);
    return std::max({max_abs(hxx, H.topLeftCorner(nx, nx)),
                     max_abs(hxu, H.topRightCorner(nx, nu)),
                     max_abs(huu, H.bottomRightCorner(nu, nu))});
  }));
}

void check_state_function(const StateFunction& fn, const std::string& prefix, const Vector& x,
                          double h, DerivativeReport& rep) {
  if (!fn.defined() || !fn.jacobian) return;
  rep.checks.push_back(guarded(prefix + " jacobian", [&] {
    Matrix J;
    fn.jacobian(x, J);
    return max_abs(J, fd_jacobian(
                          [&](const Vector& p) {
                            Vector out;
                            fn.value(p, out);
                            return out;
                          },
                          x, h));
  }));
  if (!fn.weighted_hessian) return;
  rep.checks.push_back(guarded(prefix + " weighted_hessian", [&] {
    const Vector w = weights(fn.dim);
    Matrix H;
    fn.weighted_hessian(x, w, H);
    return max_abs(H, fd_jacobian(
                          [&](const Vector& p) {
                            Matrix J;
                            fn.jacobian(p, J);
                            return Vector(J.transpose() * w);
                          },
                          x, h));
  }));
}

void check_state_cost(const StateCost& c, const std::string& prefix, const Vector& x, double h,
                      DerivativeReport& rep) {
  if (!c.defined()) return;
  if (c.gradient) {
    rep.checks.push_back(guarded(prefix + " gradient", [&] {
      Vector g;
      c.gradient(x, g);
      const Matrix fd = fd_jacobian(
          [&](const Vector& p) { return Vector::Constant(1, c.value(p)); }, x, h);
      return max_abs(g.transpose(), fd);
    }));
  }
  if (c.gradient && c.hessian) {
    rep.checks.push_back(guarded(prefix + " hessian", [&] {
      Matrix H;
      c.hessian(x, H);
      return max_abs(H, fd_jacobian(
                            [&](const Vector& p) {
                              Vector g;
                              c.gradient(p, g);
                              return g;
                            },
                            x, h));
    }));
  }
}

}  // namespace

double DerivativeReport::max_error() const {
  double m = 0.0;
  for (const auto& c : checks) m = std::max(m, c.max_abs_error);
  return m;
}

bool DerivativeReport::passed(double tol) const { return failures(tol).empty(); }

std::vector<const DerivativeCheck*> DerivativeReport::failures(double tol) const {
  std::vector<const DerivativeCheck*> out;
  for (const auto& c : checks) {
    if (!c.evaluated || !(c.max_abs_error <= tol)) out.push_back(&c);
  }
  return out;
}

DerivativeReport check_derivatives(const SwitchedOCP& ocp, const Vector& x, const Vector& u,
                                   double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  DerivativeReport rep;
  const int nx = static_cast<int>(x.size());
  const int nu = static_cast<int>(u.size());
  for (int k = 0; k < ocp.num_phases(); ++k) {
    const auto& ph = ocp.phases[static_cast<std::size_t>(k)];
    const std::string p = phase_label(k);
    check_stage_function(ph.dynamics, p + " dynamics", x, u, h, rep);
    check_stage_function(ph.constraint, p + " constraint", x, u, h, rep);
    const auto& c = ph.cost;
    if (c.defined() && c.gradient) {
      rep.checks.push_back(guarded(p + " cost gradient", [&] {
        Vector gx, gu;
        c.gradient(x, u, gx, gu);
        Vector pt(nx + nu), g(nx + nu);
        pt << x, u;
        g << gx, gu;
        const Matrix fd = fd_jacobian(
            [&](const Vector& q) {
              return Vector::Constant(1, c.value(q.head(nx), q.tail(nu)));
            },
            pt, h);
        return max_abs(g.transpose(), fd);
      }));
    }
    if (c.defined() && c.gradient && c.hessian) {
      rep.checks.push_back(guarded(p + " cost hessian", [&] {
        Matrix hxx, hxu, huu;
        c.hessian(x, u, hxx, hxu, huu);
        Vector pt(nx + nu);
        pt << x, u;
        const Matrix H = fd_jacobian(
            [&](const Vector& q) {
              Vector gx, gu, g(nx + nu);
              c.gradient(q.head(nx), q.tail(nu), gx, gu);
              g << gx, gu;
              return g;
            },
            pt, h);
        return std::max({max_abs(hxx, H.topLeftCorner(nx, nx)),
                         max_abs(hxu, H.topRightCorner(nx, nu)),
                         max_abs(huu, H.bottomRightCorner(nu, nu))});
      }));
    }
    if (const auto* ev = ocp.event(k)) {
      if (ev->jump_map) check_state_function(*ev->jump_map, p + " jump map", x, h, rep);
      if (ev->jump_cost) check_state_cost(*ev->jump_cost, p + " jump cost", x, h, rep);
      if (ev->switching_condition) {
        check_state_function(*ev->switching_condition, p + " switching condition", x, h, rep);
      }
    }
  }
  check_state_cost(ocp.terminal_cost, "terminal cost", x, h, rep);
  return rep;
}

}  // namespace swocp
