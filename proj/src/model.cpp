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

#include "cbfdl/model.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

#include "cbfdl/error.hpp"

namespace cbfdl {

void SafetyParams::validate() const {
  if (!(std::isfinite(d_s) && d_s > 0.0)) {
    throw Error(ErrorKind::Validation, "safety.d_s must be a positive number");
  }
  if (!(std::isfinite(gamma) && gamma > 0.0)) {
    throw Error(ErrorKind::Validation, "safety.gamma must be a positive number");
  }
}

void Scenario::validate() const {
  safety.validate();
  if (robots.empty()) throw Error(ErrorKind::Validation, "scenario has no robots");
  std::set<int> ids;
  for (const auto& r : robots) {
    const std::string tag = "robot " + std::to_string(r.id);
    if (!ids.insert(r.id).second) throw Error(ErrorKind::Validation, tag + ": duplicate id");
    if (r.id < 1) throw Error(ErrorKind::Validation, tag + ": ids are 1-based");
    if (!r.position.isFinite() || !r.goal.isFinite()) {
      throw Error(ErrorKind::Validation, tag + ": non-finite position or goal");
    }
    if (!(std::isfinite(r.gain) && r.gain > 0.0)) {
      throw Error(ErrorKind::Validation, tag + ": gain must be positive");
    }
  }
  for (std::size_t i = 0; i < robots.size(); ++i) {
    for (std::size_t j = i + 1; j < robots.size(); ++j) {
      const double d = (robots[i].position - robots[j].position).norm();
      if (d < safety.d_s) {
        throw Error(ErrorKind::Validation,
                    "robots " + std::to_string(robots[i].id) + " and " +
                        std::to_string(robots[j].id) + " start closer than d_s");
      }
    }
  }
}

double pairwiseSafety(const Vec2& pi, const Vec2& pj, const SafetyParams& safety) {
  return (pi - pj).squaredNorm() - safety.d_s * safety.d_s;
}

ConstraintCoefficients constraintCoefficients(const Vec2& pi, const Vec2& pj,
                                              const SafetyParams& safety) {
  return {pj - pi, 0.25 * safety.gamma * pairwiseSafety(pi, pj, safety)};
}

Vec2 nominalControl(const RobotState& robot) {
  return -robot.gain * (robot.position - robot.goal);
}

double minPairwiseDistance(std::span<const Vec2> positions) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      best = std::min(best, (positions[i] - positions[j]).norm());
    }
  }
  return best;
}

std::vector<Vec2> positionsOf(std::span<const RobotState> robots) {
  std::vector<Vec2> out;
  out.reserve(robots.size());
  for (const auto& r : robots) out.push_back(r.position);
  return out;
}

}  // namespace cbfdl
