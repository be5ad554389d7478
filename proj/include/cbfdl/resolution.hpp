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

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cbfdl/deadlock.hpp"
#include "cbfdl/model.hpp"
#include "cbfdl/simulator.hpp"

namespace cbfdl {

enum class ResolutionPhase { Phase1Cbf, Phase2Rotate, Phase3Proportional, Done };

const char* toString(ResolutionPhase phase);

struct ResolutionParams {
  std::optional<double> rotation_gain;  // default: mean robot gain
  std::optional<double> distance_gain;  // default: mean robot gain
  double eps_theta = 1e-3;              // rad, phase-2 exit
  double goal_tol = 1e-4;               // m, done when every robot is this close
  DeadlockThresholds detection;
};

struct SupervisorState {
  ResolutionPhase phase = ResolutionPhase::Phase1Cbf;
  double t_enter_phase = 0.0;
  double theta = 0.0;        // orientation of p2 - p1
  double beta_target = 0.0;  // orientation of p_d2 - p_d1
  double rotation_gain = 1.0;
  double distance_gain = 1.0;
  double eps_theta = 1e-3;
  double goal_tol = 1e-4;
  Vec2 centroid;  // frozen at phase-2 entry
  DeadlockDetector detector;
};

SupervisorState makeSupervisor(const Scenario& scenario, const ResolutionParams& params);

struct SupervisorOutput {
  std::vector<Vec2> controls;
  std::vector<QpSolution> solutions;  // phase 1 only
  std::vector<Event> events;
};

/// One supervisor tick at time t. Controls are held over [t, t + dt]; in
/// phase 2 they are the chord of the exact rotation so the distance hold and
/// static centroid survive the zero-order hold. The stall detector triggers
/// phase 2 and watches phase 3; the phase-2 rotation is tracked by angle only.
SupervisorOutput superviseStep(std::span<const RobotState> states, SupervisorState& sup,
                               const SafetyParams& safety, double t, double dt);

/// Continuous-time rotation law for two robots: relative command
/// -k_d (|dp| - d_s) e_theta - d_s k_r wrap(theta - beta) e_theta_perp, split as u2 = du/2, u1 = -du/2.
std::vector<Vec2> phase2TwoRobot(std::span<const RobotState> states, const SupervisorState& sup,
                                 const SafetyParams& safety);

/// Continuous-time rigid rotation about the centroid with a radial pull to d_s / sqrt3.
std::vector<Vec2> phase2ThreeRobot(std::span<const RobotState> states, const SupervisorState& sup,
                                   const SafetyParams& safety);

struct ResolutionReport {
  std::optional<double> t_phase2;
  std::optional<double> t_phase3;
  std::optional<double> t_done;
  double min_distance = 0.0;
  std::vector<double> final_goal_errors;
  bool phase3_monotone = true;
  double phase3_max_decrease = 0.0;
  double phase2_max_distance_error = 0.0;
  double phase2_centroid_drift = 0.0;
  std::optional<double> phase3_closed_form_error;  // two robots
  std::optional<double> phase3_axis_offset;        // two robots
  int deadlock_events_after_phase2 = 0;
};

inline constexpr double kMonotoneSlack = 1e-9;

struct ResolutionResult {
  SimTrace trace;
  ResolutionReport report;
};

/// Runs the supervisor from the scenario's initial state until every robot is
/// within goal_tol. Throws Error(AssumptionViolated) when two goals are not
/// more than d_s apart, Error(NonConvergence) when the horizon runs out.
ResolutionResult runResolution(const Scenario& scenario, const SimConfig& config,
                               const ResolutionParams& params = {});

}  // namespace cbfdl
