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

#include <span>
#include <vector>

#include "cbfdl/geometry.hpp"

namespace cbfdl {

/// One planar single-integrator robot: p' = u, nominal u = -gain (p - goal).
struct RobotState {
  int id = 1;  // 1-based
  Vec2 position;
  Vec2 goal;
  double gain = 1.0;  // 1/s
};

struct SafetyParams {
  double d_s = 1.0;    // safety margin (m)
  double gamma = 1.0;  // CBF rate (1/s)

  void validate() const;
};

struct Scenario {
  std::vector<RobotState> robots;
  SafetyParams safety;

  /// Throws Error(Validation) on bad gains, duplicate ids, non-finite values,
  /// or an initial pair closer than d_s.
  void validate() const;
};

/// Linear constraint a^T u <= b on one robot's control.
struct ConstraintCoefficients {
  Vec2 a;
  double b = 0.0;
};

/// h_ij = |p_i - p_j|^2 - d_s^2.
double pairwiseSafety(const Vec2& pi, const Vec2& pj, const SafetyParams& safety);

/// a = p_j - p_i, b = (gamma/4) h_ij. Each robot takes half of the pairwise
/// barrier condition dh/dt >= -gamma h.
ConstraintCoefficients constraintCoefficients(const Vec2& pi, const Vec2& pj,
                                              const SafetyParams& safety);

Vec2 nominalControl(const RobotState& robot);

/// Smallest pairwise distance; +inf for fewer than two points.
double minPairwiseDistance(std::span<const Vec2> positions);

std::vector<Vec2> positionsOf(std::span<const RobotState> robots);

}  // namespace cbfdl
