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

#include "swocp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace swocp {

namespace {

using json = nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  return f;
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_row(std::ofstream& f, double t, const Vector& x, const Vector* u, int nu) {
  f << fmt17(t);
  for (Eigen::Index j = 0; j < x.size(); ++j) f << ',' << fmt17(x[j]);
  for (int j = 0; j < nu; ++j) {
    f << ',' << (u ? fmt17((*u)[j]) : std::string("nan"));
  }
  f << '\n';
}

}  // namespace

void write_trajectory_csv(const std::string& path, const SwitchedOCP& ocp, const TimeGrid& grid,
                          const Iterate& it) {
  const TimeGrid g = with_switching_times(grid, it.t);
  auto f = open_out(path);
  f << 't';
  for (int j = 0; j < ocp.nx; ++j) f << ",x" << j;
  for (int j = 0; j < ocp.nu; ++j) f << ",u" << j;
  f << '\n';
  for (int i = 0; i < g.N(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    write_row(f, g.stage_time(i), it.x[ui], &it.u[ui], ocp.nu);
    const int s = g.jump_after(i);
    if (s >= 0) {
      write_row(f, g.switching_times[static_cast<std::size_t>(s)],
                it.x_pre[static_cast<std::size_t>(s)], nullptr, ocp.nu);
    }
  }
  write_row(f, g.tf, it.x[static_cast<std::size_t>(g.N())], nullptr, ocp.nu);
}

TrajectoryTable read_trajectory_csv(const std::string& path, int nx, int nu) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  TrajectoryTable tab;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      v.push_back(cell == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell));
    }
    if (static_cast<int>(v.size()) != 1 + nx + nu) {
      throw std::runtime_error("malformed trajectory row in " + path);
    }
    tab.t.push_back(v[0]);
    tab.x.push_back(Eigen::Map<Vector>(v.data() + 1, nx));
    tab.u.push_back(Eigen::Map<Vector>(v.data() + 1 + nx, nu));
  }
  return tab;
}

double objective_from_table(const SwitchedOCP& ocp, const TimeGrid& grid,
                            const TrajectoryTable& table) {
  Iterate it = zero_iterate(ocp, grid);
  it.t = grid.switching_times;
  std::size_t row = 0;
  const auto next = [&]() -> std::size_t {
    if (row >= table.t.size()) throw std::runtime_error("trajectory table is too short");
    return row++;
  };
  for (int i = 0; i < grid.N(); ++i) {
    const std::size_t r = next();
    it.x[static_cast<std::size_t>(i)] = table.x[r];
    it.u[static_cast<std::size_t>(i)] = table.u[r];
    const int s = grid.jump_after(i);
    if (s >= 0) it.x_pre[static_cast<std::size_t>(s)] = table.x[next()];
  }
  it.x[static_cast<std::size_t>(grid.N())] = table.x[next()];
  return objective(ocp, grid, it);
}

void write_log_jsonl(const std::string& path, const ConvergenceLog& log) {
  auto f = open_out(path);
  for (const auto& r : log.iterations) {
    json j;
    j["type"] = "iteration";
    j["iter"] = r.iter;
    j["nlp"] = r.nlp;
    j["N"] = r.N;
    j["kkt_l2"] = r.l2;
    j["kkt_max"] = r.max;
    j["kkt_l2_unperturbed"] = r.l2_unperturbed;
    j["kkt_max_unperturbed"] = r.max_unperturbed;
    j["alpha_primal"] = r.alpha_primal;
    j["alpha_dual"] = r.alpha_dual;
    j["barrier"] = r.barrier;
    j["switching_times"] = r.switching_times;
    j["modification"] = r.modification;
    j["wall_ms"] = r.wall_ms;
    f << j.dump() << '\n';
  }
  for (const auto& e : log.refinements) {
    json j;
    j["type"] = "refinement";
    j["after_iter"] = e.after_iter;
    j["old_counts"] = e.old_counts;
    j["new_counts"] = e.new_counts;
    j["flagged_phases"] = e.flagged_phases;
    f << j.dump() << '\n';
  }
}

void write_summary_json(const std::string& path, const RunSummary& s) {
  json j;
  j["problem"] = s.problem;
  j["status"] = s.status;
  j["objective"] = s.objective;
  j["switching_times"] = s.switching_times;
  j["counts"] = s.counts;
  j["iters"] = s.iters;
  j["refinements"] = s.refinements;
  j["mean_ms"] = s.mean_ms;
  j["median_ms_per_iter"] = s.median_ms_per_iter;
  j["kkt_max"] = s.kkt_max;
  j["repeats"] = s.repeats;
  if (s.oracle_deviation >= 0.0) j["oracle_deviation"] = s.oracle_deviation;
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

RunSummary read_summary_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  const json j = json::parse(f);
  RunSummary s;
  s.problem = j.value("problem", "");
  s.status = j.at("status").get<std::string>();
  s.objective = j.at("objective").get<double>();
  s.switching_times = j.at("switching_times").get<std::vector<double>>();
  s.counts = j.value("counts", std::vector<int>{});
  s.iters = j.at("iters").get<int>();
  s.refinements = j.at("refinements").get<int>();
  s.mean_ms = j.at("mean_ms").get<double>();
  s.median_ms_per_iter = j.at("median_ms_per_iter").get<double>();
  s.kkt_max = j.value("kkt_max", 0.0);
  s.repeats = j.value("repeats", 1);
  s.oracle_deviation = j.value("oracle_deviation", -1.0);
  return s;
}

}  // namespace swocp
