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

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cbfdl/deadlock.hpp"
#include "cbfdl/model.hpp"
#include "cbfdl/qp.hpp"

namespace cbfdl {

enum class Integrator { Euler, Rk4 };

const char* toString(Integrator integrator);
Integrator integratorFromString(const std::string& name);

struct SimConfig {
  double dt = 1e-3;
  double horizon = 10.0;
  Integrator integrator = Integrator::Euler;
  int record_every = 1;

  void validate() const;
  std::size_t steps() const;
};

enum class EventKind {
  ConstraintActivated,
  ConstraintDeactivated,
  DeadlockDetected,
  Phase2Enter,
  Phase3Enter,
  Done,
};

const char* toString(EventKind kind);
EventKind eventKindFromString(const std::string& name);

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::ConstraintActivated;
  int robot = 0;  // 0 for system-wide events
  std::optional<int> neighbor;

  bool operator==(const Event&) const = default;
};

struct RobotSample {
  Vec2 position;
  Vec2 control;
  std::map<int, double> multipliers;
  std::vector<int> active;
};

/// Time-indexed record of a closed-loop run. All series share `times`.
struct SimTrace {
  std::vector<int> robot_ids;
  std::vector<double> times;
  std::vector<std::vector<RobotSample>> samples;  // [sample][robot]
  std::vector<std::pair<int, int>> pairs;         // (i, j), i < j, by robot order
  std::vector<std::vector<double>> distances;     // [pair][sample]
  std::vector<Event> events;

  std::size_t size() const { return times.size(); }
  std::size_t indexOf(int robotId) const;
  /// Series of |p_i - p_j| for two robot ids.
  const std::vector<double>& distanceSeries(int i, int j) const;
  std::vector<Event> eventsOf(EventKind kind) const;

  void initialize(std::span<const RobotState> robots);
  void append(double t, std::span<const RobotState> states, std::span<const Vec2> controls,
              std::span<const QpSolution> solutions);
};

/// Every robot's CBF-QP solved against the same snapshot.
std::vector<QpSolution> solveAll(std::span<const RobotState> states, const SafetyParams& safety);

struct StepResult {
  std::vector<Vec2> positions;
  std::vector<QpSolution> solutions;  // at the start-of-step snapshot
};

/// Advances all robots by one step under their QP controls. Euler holds the
/// controls over the step; rk4 re-solves the QPs at its stage points.
StepResult step(std::span<const RobotState> states, const SafetyParams& safety, double dt,
                Integrator integrator);

/// Emits activation/deactivation events for the difference of two active-set
/// snapshots (one vector per robot).
void diffActiveSets(double t, std::span<const int> ids,
                    const std::vector<std::vector<int>>& previous,
                    std::span<const QpSolution> current, std::vector<Event>& out);

/// Fixed-step closed-loop run over [0, horizon]. With `detection`, a
/// deadlock_detected event is emitted once per robot when its stall streak
/// reaches the persistence count.
SimTrace run(const Scenario& scenario, const SimConfig& config,
             const std::optional<DeadlockThresholds>& detection = std::nullopt);

}  // namespace cbfdl
