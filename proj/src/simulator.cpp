/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cbfdl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "cbfdl/error.hpp"

namespace cbfdl {

const char* toString(Integrator integrator) {
  return integrator == Integrator::Euler ? "euler" : "rk4";
}

Integrator integratorFromString(const std::string& name) {
  if (name == "euler") return Integrator::Euler;
  if (name == "rk4") return Integrator::Rk4;
  throw Error(ErrorKind::Validation, "unknown integrator '" + name + "'");
}

void SimConfig::validate() const {
  if (!(std::isfinite(dt) && dt > 0.0)) throw Error(ErrorKind::Validation, "sim.dt must be > 0");
  if (!(std::isfinite(horizon) && horizon >= dt)) {
    throw Error(ErrorKind::Validation, "sim.horizon must be >= dt");
  }
  if (record_every < 1) throw Error(ErrorKind::Validation, "sim.record_every must be >= 1");
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

const char* toString(EventKind kind) {
  switch (kind) {
    case EventKind::ConstraintActivated: return "constraint_activated";
    case EventKind::ConstraintDeactivated: return "constraint_deactivated";
    case EventKind::DeadlockDetected: return "deadlock_detected";
    case EventKind::Phase2Enter: return "phase2_enter";
    case EventKind::Phase3Enter: return "phase3_enter";
    case EventKind::Done: return "done";
  }
  return "unknown";
}

EventKind eventKindFromString(const std::string& name) {
  for (auto k : {EventKind::ConstraintActivated, EventKind::ConstraintDeactivated,
                 EventKind::DeadlockDetected, EventKind::Phase2Enter, EventKind::Phase3Enter,
                 EventKind::Done}) {
    if (name == toString(k)) return k;
  }
  throw Error(ErrorKind::Validation, "unknown event kind '" + name + "'");
}

std::size_t SimTrace::indexOf(int robotId) const {
  const auto it = std::find(robot_ids.begin(), robot_ids.end(), robotId);
  if (it == robot_ids.end()) throw Error(ErrorKind::InvalidInput, "unknown robot id");
  return static_cast<std::size_t>(std::distance(robot_ids.begin(), it));
}

const std::vector<double>& SimTrace::distanceSeries(int i, int j) const {
  std::size_t a = indexOf(i);
  std::size_t b = indexOf(j);
  if (a > b) std::swap(a, b);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (indexOf(pairs[k].first) == a && indexOf(pairs[k].second) == b) return distances[k];
  }
  throw Error(ErrorKind::InvalidInput, "no distance series for pair");
}

std::vector<Event> SimTrace::eventsOf(EventKind kind) const {
  std::vector<Event> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [&](const Event& e) { return e.kind == kind; });
  return out;
}

void SimTrace::initialize(std::span<const RobotState> robots) {
  robot_ids.clear();
  pairs.clear();
  for (const auto& r : robots) robot_ids.push_back(r.id);
  for (std::size_t i = 0; i < robots.size(); ++i) {
    for (std::size_t j = i + 1; j < robots.size(); ++j) {
      pairs.emplace_back(robots[i].id, robots[j].id);
    }
  }
  distances.assign(pairs.size(), {});
}

void SimTrace::append(double t, std::span<const RobotState> states,
                      std::span<const Vec2> controls, std::span<const QpSolution> solutions) {
  times.push_back(t);
  std::vector<RobotSample> row(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    row[i].position = states[i].position;
    row[i].control = controls[i];
    if (!solutions.empty()) {
      row[i].multipliers = solutions[i].multipliers;
      row[i].active = solutions[i].active;
    }
  }
  samples.push_back(std::move(row));
  std::size_t k = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      distances[k++].push_back((states[i].position - states[j].position).norm());
    }
  }
}

std::vector<QpSolution> solveAll(std::span<const RobotState> states, const SafetyParams& safety) {
  std::vector<QpSolution> out;
  out.reserve(states.size());
  std::vector<RobotState> others;
  for (std::size_t i = 0; i < states.size(); ++i) {
    others.clear();
    for (std::size_t j = 0; j < states.size(); ++j) {
      if (j != i) others.push_back(states[j]);
    }
    const auto cs = buildConstraints(states[i], others, safety);
    out.push_back(solveCbfQp(nominalControl(states[i]), cs));
  }
  return out;
}

namespace {

std::vector<Vec2> controlsOf(std::span<const QpSolution> sols) {
  std::vector<Vec2> u;
  u.reserve(sols.size());
  for (const auto& s : sols) u.push_back(s.control);
  return u;
}

std::vector<RobotState> displaced(std::span<const RobotState> states, std::span<const Vec2> du,
                                  double h) {
  std::vector<RobotState> out(states.begin(), states.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].position += h * du[i];
  return out;
}

}  // namespace

StepResult step(std::span<const RobotState> states, const SafetyParams& safety, double dt,
                Integrator integrator) {
  StepResult r;
  r.solutions = solveAll(states, safety);
  const auto k1 = controlsOf(r.solutions);
  r.positions.resize(states.size());
  if (integrator == Integrator::Euler) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      r.positions[i] = states[i].position + dt * k1[i];
    }
    return r;
  }
  const auto k2 = controlsOf(solveAll(displaced(states, k1, 0.5 * dt), safety));
  const auto k3 = controlsOf(solveAll(displaced(states, k2, 0.5 * dt), safety));
  const auto k4 = controlsOf(solveAll(displaced(states, k3, dt), safety));
  for (std::size_t i = 0; i < states.size(); ++i) {
    r.positions[i] =
        states[i].position + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return r;
}

void diffActiveSets(double t, std::span<const int> ids,
                    const std::vector<std::vector<int>>& previous,
                    std::span<const QpSolution> current, std::vector<Event>& out) {
  for (std::size_t i = 0; i < current.size(); ++i) {
    const auto& before = previous[i];
    const auto& now = current[i].active;
    std::vector<int> on;
    std::vector<int> off;
    std::set_difference(now.begin(), now.end(), before.begin(), before.end(),
                        std::back_inserter(on));
    std::set_difference(before.begin(), before.end(), now.begin(), now.end(),
                        std::back_inserter(off));
    for (int j : on) out.push_back({t, EventKind::ConstraintActivated, ids[i], j});
    for (int j : off) out.push_back({t, EventKind::ConstraintDeactivated, ids[i], j});
  }
}

SimTrace run(const Scenario& scenario, const SimConfig& config,
             const std::optional<DeadlockThresholds>& detection) {
  scenario.validate();
  config.validate();

  std::vector<RobotState> state = scenario.robots;
  SimTrace trace;
  trace.initialize(state);
  const std::vector<int> ids = trace.robot_ids;

  std::optional<DeadlockDetector> detector;
  if (detection) detector.emplace(state.size(), *detection);

  std::vector<std::vector<int>> previous(state.size());
  const std::size_t n = config.steps();
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    StepResult r;
    try {
      if (k == n) {
        r.solutions = solveAll(state, scenario.safety);
      } else {
        r = step(state, scenario.safety, config.dt, config.integrator);
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "t=" + std::to_string(t) + ": " + e.what());
    }

    diffActiveSets(t, ids, previous, r.solutions, trace.events);
    for (std::size_t i = 0; i < state.size(); ++i) previous[i] = r.solutions[i].active;
    if (detector) {
      for (std::size_t i : detector->update(state, r.solutions)) {
        trace.events.push_back({t, EventKind::DeadlockDetected, ids[i], std::nullopt});
      }
    }
    if (k % static_cast<std::size_t>(config.record_every) == 0 || k == n) {
      trace.append(t, state, controlsOf(r.solutions), r.solutions);
    }
    if (k == n) break;
    for (std::size_t i = 0; i < state.size(); ++i) state[i].position = r.positions[i];
  }
  return trace;
}

}  // namespace cbfdl
