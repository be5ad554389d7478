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

#include "cbfdl/resolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cbfdl/error.hpp"

namespace cbfdl {
namespace {

constexpr double kEntryBand = 0.2;  // fraction of d_s allowed at phase-2 entry

Vec2 centroidOf(std::span<const RobotState> states) {
  Vec2 c;
  for (const auto& s : states) c += s.position;
  return c / static_cast<double>(states.size());
}

double orientation(std::span<const RobotState> states) {
  const Vec2 d = states[1].position - states[0].position;
  return std::atan2(d.y, d.x);
}

bool allAtGoal(std::span<const RobotState> states, double tol) {
  return std::all_of(states.begin(), states.end(),
                     [&](const RobotState& s) { return (s.position - s.goal).norm() <= tol; });
}

void checkPhase2Geometry(std::span<const RobotState> states, const SafetyParams& safety) {
  const double band = kEntryBand * safety.d_s;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      const double d = (states[i].position - states[j].position).norm();
      if (std::abs(d - safety.d_s) > band) {
        if (states.size() == 3) {
          throw Error(ErrorKind::NotCategoryA,
                      "phase 2 needs all three pairs in contact, pair (" +
                          std::to_string(states[i].id) + "," + std::to_string(states[j].id) +
                          ") is at " + std::to_string(d));
        }
        throw Error(ErrorKind::PreconditionViolated,
                    "phase 2 needs the robots in contact, distance is " + std::to_string(d));
      }
    }
  }
}

std::vector<Vec2> phase2Sampled(std::span<const RobotState> states, const SupervisorState& sup,
                                const SafetyParams& safety, double dt) {
  const double err = wrapAngle(sup.theta - sup.beta_target);
  const double delta = -err * (1.0 - std::exp(-sup.rotation_gain * dt));
  const double shrink = std::exp(-sup.distance_gain * dt);
  std::vector<Vec2> u(states.size());
  if (states.size() == 2) {
    const Vec2 dp = states[1].position - states[0].position;
    const double d = dp.norm();
    if (d == 0.0) throw Error(ErrorKind::DegenerateGeometry, "robots coincide in phase 2");
    const double dNext = safety.d_s + (d - safety.d_s) * shrink;
    const Vec2 du = (unitVector(sup.theta + delta) * dNext - dp) / dt;
    u[1] = du * 0.5;
    u[0] = du * -0.5;
    return u;
  }
  const Vec2 c = centroidOf(states);
  const double rStar = safety.d_s / kSqrt3;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Vec2 r = states[i].position - c;
    const double rn = r.norm();
    if (rn == 0.0) throw Error(ErrorKind::DegenerateGeometry, "robot at the centroid in phase 2");
    const double rNext = rStar + (rn - rStar) * shrink;
    u[i] = (c + rotate(r, delta) * (rNext / rn) - states[i].position) / dt;
  }
  return u;
}

std::vector<QpSolution> asSolutions(const std::vector<Vec2>& controls) {
  std::vector<QpSolution> out(controls.size());
  for (std::size_t i = 0; i < controls.size(); ++i) out[i].control = controls[i];
  return out;
}

void enter(SupervisorState& sup, ResolutionPhase phase, double t, std::vector<Event>& events) {
  sup.phase = phase;
  sup.t_enter_phase = t;
  const EventKind kind = phase == ResolutionPhase::Phase2Rotate         ? EventKind::Phase2Enter
                         : phase == ResolutionPhase::Phase3Proportional ? EventKind::Phase3Enter
                                                                        : EventKind::Done;
  events.push_back({t, kind, 0, std::nullopt});
}

}  // namespace

const char* toString(ResolutionPhase phase) {
  switch (phase) {
    case ResolutionPhase::Phase1Cbf: return "phase1_cbf";
    case ResolutionPhase::Phase2Rotate: return "phase2_rotate";
    case ResolutionPhase::Phase3Proportional: return "phase3_proportional";
    case ResolutionPhase::Done: return "done";
  }
  return "?";
}

SupervisorState makeSupervisor(const Scenario& scenario, const ResolutionParams& params) {
  const auto& robots = scenario.robots;
  if (robots.size() != 2 && robots.size() != 3) {
    throw Error(ErrorKind::InvalidInput, "resolution supports two or three robots");
  }
  double mean = 0.0;
  for (const auto& r : robots) mean += r.gain;
  mean /= static_cast<double>(robots.size());
  SupervisorState sup;
  sup.rotation_gain = params.rotation_gain.value_or(mean);
  sup.distance_gain = params.distance_gain.value_or(mean);
  if (!(sup.rotation_gain > 0.0) || !(sup.distance_gain > 0.0)) {
    throw Error(ErrorKind::Validation, "resolution gains must be positive");
  }
  if (!(params.eps_theta > 0.0) || !(params.goal_tol > 0.0)) {
    throw Error(ErrorKind::Validation, "eps_theta and goal_tol must be positive");
  }
  sup.eps_theta = params.eps_theta;
  sup.goal_tol = params.goal_tol;
  const Vec2 dg = robots[1].goal - robots[0].goal;
  sup.beta_target = std::atan2(dg.y, dg.x);
  sup.theta = orientation(robots);
  sup.detector = DeadlockDetector(robots.size(), params.detection);
  return sup;
}

std::vector<Vec2> phase2TwoRobot(std::span<const RobotState> states, const SupervisorState& sup,
                                 const SafetyParams& safety) {
  if (states.size() != 2) throw Error(ErrorKind::InvalidInput, "phase2TwoRobot needs two robots");
  checkPhase2Geometry(states, safety);
  const Vec2 dp = states[1].position - states[0].position;
  const double d = dp.norm();
  const Vec2 e = dp / d;
  const double dDot = -sup.distance_gain * (d - safety.d_s);
  const double thetaDot = -sup.rotation_gain * wrapAngle(std::atan2(dp.y, dp.x) - sup.beta_target);
  const Vec2 du = e * dDot + e.perp() * (safety.d_s * thetaDot);
  return {du * -0.5, du * 0.5};
}

std::vector<Vec2> phase2ThreeRobot(std::span<const RobotState> states, const SupervisorState& sup,
                                   const SafetyParams& safety) {
  if (states.size() != 3) {
    throw Error(ErrorKind::InvalidInput, "phase2ThreeRobot needs three robots");
  }
  checkPhase2Geometry(states, safety);
  const Vec2 c = centroidOf(states);
  const double omega = -sup.rotation_gain * wrapAngle(orientation(states) - sup.beta_target);
  std::vector<Vec2> u(3);
  for (std::size_t i = 0; i < 3; ++i) {
    const Vec2 r = states[i].position - c;
    const double rn = r.norm();
    u[i] = r.perp() * omega - (r / rn) * (sup.distance_gain * (rn - safety.d_s / kSqrt3));
  }
  return u;
}

SupervisorOutput superviseStep(std::span<const RobotState> states, SupervisorState& sup,
                               const SafetyParams& safety, double t, double dt) {
  SupervisorOutput out;
  sup.theta = orientation(states);
  auto flag = [&](std::span<const QpSolution> sols) {
    for (std::size_t i : sup.detector.update(states, sols)) {
      out.events.push_back({t, EventKind::DeadlockDetected, states[i].id, std::nullopt});
    }
  };

  if (sup.phase == ResolutionPhase::Phase1Cbf) {
    if (allAtGoal(states, sup.goal_tol)) {
      enter(sup, ResolutionPhase::Done, t, out.events);
    } else {
      out.solutions = solveAll(states, safety);
      flag(out.solutions);
      if (!sup.detector.allFlagged()) {
        for (const auto& s : out.solutions) out.controls.push_back(s.control);
        return out;
      }
      out.solutions.clear();
      checkPhase2Geometry(states, safety);
      sup.centroid = centroidOf(states);
      enter(sup, ResolutionPhase::Phase2Rotate, t, out.events);
    }
  }

  if (sup.phase == ResolutionPhase::Phase2Rotate) {
    if (std::abs(wrapAngle(sup.theta - sup.beta_target)) <= sup.eps_theta) {
      sup.detector.reset();
      enter(sup, ResolutionPhase::Phase3Proportional, t, out.events);
    } else {
      out.controls = phase2Sampled(states, sup, safety, dt);
      return out;
    }
  }

  if (sup.phase == ResolutionPhase::Phase3Proportional) {
    if (allAtGoal(states, sup.goal_tol)) {
      enter(sup, ResolutionPhase::Done, t, out.events);
    } else {
      for (const auto& s : states) out.controls.push_back(nominalControl(s));
      flag(asSolutions(out.controls));
      return out;
    }
  }

  out.controls.assign(states.size(), Vec2{});
  return out;
}

ResolutionResult runResolution(const Scenario& scenario, const SimConfig& config,
                               const ResolutionParams& params) {
  scenario.validate();
  config.validate();
  const auto& safety = scenario.safety;
  const auto& robots = scenario.robots;
  for (std::size_t i = 0; i < robots.size(); ++i) {
    for (std::size_t j = i + 1; j < robots.size(); ++j) {
      const double dg = (robots[i].goal - robots[j].goal).norm();
      if (!(dg > safety.d_s)) {
        throw Error(ErrorKind::AssumptionViolated,
                    "inter-goal distance " + std::to_string(dg) + " of robots " +
                        std::to_string(robots[i].id) + " and " + std::to_string(robots[j].id) +
                        " must exceed d_s");
      }
    }
  }
  SupervisorState sup = makeSupervisor(scenario, params);

  ResolutionResult res;
  auto& trace = res.trace;
  auto& rep = res.report;
  std::vector<RobotState> state = robots;
  trace.initialize(state);
  const std::vector<int> ids = trace.robot_ids;
  std::vector<std::vector<int>> previous(state.size());

  rep.min_distance = minPairwiseDistance(positionsOf(state));
  std::vector<double> lastPhase3;
  std::vector<RobotState> atT2;
  const std::size_t n = config.steps();
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    SupervisorOutput out;
    try {
      out = superviseStep(state, sup, safety, t, config.dt);
    } catch (const Error& e) {
      throw Error(e.kind(), "t=" + std::to_string(t) + ": " + e.what());
    }
    if (sup.phase == ResolutionPhase::Phase1Cbf) {
      diffActiveSets(t, ids, previous, out.solutions, trace.events);
      for (std::size_t i = 0; i < state.size(); ++i) previous[i] = out.solutions[i].active;
    }
    for (const auto& e : out.events) {
      if (e.kind == EventKind::Phase2Enter) rep.t_phase2 = e.time;
      if (e.kind == EventKind::Phase3Enter) rep.t_phase3 = e.time;
      if (e.kind == EventKind::Done) rep.t_done = e.time;
      if (e.kind == EventKind::DeadlockDetected && rep.t_phase2) ++rep.deadlock_events_after_phase2;
      trace.events.push_back(e);
    }

    const auto pos = positionsOf(state);
    rep.min_distance = std::min(rep.min_distance, minPairwiseDistance(pos));
    if (sup.phase == ResolutionPhase::Phase2Rotate) {
      for (std::size_t i = 0; i < pos.size(); ++i) {
        for (std::size_t j = i + 1; j < pos.size(); ++j) {
          rep.phase2_max_distance_error = std::max(
              rep.phase2_max_distance_error, std::abs((pos[i] - pos[j]).norm() - safety.d_s));
        }
      }
      rep.phase2_centroid_drift =
          std::max(rep.phase2_centroid_drift, (centroidOf(state) - sup.centroid).norm());
    }
    const bool inPhase3 = sup.phase == ResolutionPhase::Phase3Proportional ||
                          (sup.phase == ResolutionPhase::Done && rep.t_phase3);
    if (inPhase3) {
      std::vector<double> d;
      for (std::size_t i = 0; i < pos.size(); ++i) {
        for (std::size_t j = i + 1; j < pos.size(); ++j) d.push_back((pos[i] - pos[j]).norm());
      }
      for (std::size_t p = 0; p < lastPhase3.size(); ++p) {
        const double drop = lastPhase3[p] - d[p];
        rep.phase3_max_decrease = std::max(rep.phase3_max_decrease, drop);
        if (drop > kMonotoneSlack) rep.phase3_monotone = false;
      }
      lastPhase3 = d;
      if (state.size() == 2) {
        if (atT2.empty()) atT2 = state;
        const double tau = t - *rep.t_phase3;
        const Vec2 predicted = (atT2[1].goal - atT2[0].goal) +
                               (atT2[1].position - atT2[1].goal) * std::exp(-atT2[1].gain * tau) -
                               (atT2[0].position - atT2[0].goal) * std::exp(-atT2[0].gain * tau);
        const double err = std::abs(predicted.norm() - d[0]);
        rep.phase3_closed_form_error = std::max(rep.phase3_closed_form_error.value_or(0.0), err);
        const Vec2 axis = unitVector(sup.beta_target);
        const double offset = std::abs(axis.cross(pos[1] - pos[0]));
        rep.phase3_axis_offset = std::max(rep.phase3_axis_offset.value_or(0.0), offset);
      }
    }

    const bool last = k == n || sup.phase == ResolutionPhase::Done;
    if (k % static_cast<std::size_t>(config.record_every) == 0 || last) {
      trace.append(t, state, out.controls, out.solutions);
    }
    if (last) break;

    if (sup.phase == ResolutionPhase::Phase1Cbf && config.integrator == Integrator::Rk4) {
      const auto r = step(state, safety, config.dt, config.integrator);
      for (std::size_t i = 0; i < state.size(); ++i) state[i].position = r.positions[i];
    } else {
      for (std::size_t i = 0; i < state.size(); ++i) {
        state[i].position += config.dt * out.controls[i];
      }
    }
  }

  for (const auto& s : state) rep.final_goal_errors.push_back((s.position - s.goal).norm());
  if (sup.phase != ResolutionPhase::Done) {
    double worst = 0.0;
    for (double e : rep.final_goal_errors) worst = std::max(worst, e);
    throw Error(ErrorKind::NonConvergence,
                std::string("resolution did not finish within the horizon (phase ") +
                    toString(sup.phase) + ", worst goal error " + std::to_string(worst) + ")");
  }
  return res;
}

}  // namespace cbfdl
