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

#include <array>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cbfdl/model.hpp"
#include "cbfdl/qp.hpp"

namespace cbfdl {

struct DeadlockThresholds {
  double eps_u = 1e-4;    // m/s
  double eps_goal = 1e-2; // m
  int persistence = 10;   // consecutive samples

  void validate() const;
};

/// States and QP outputs of every robot at one instant, in the same order.
struct WindowFrame {
  std::vector<RobotState> states;
  std::vector<QpSolution> solutions;
};

/// Per robot (frame order): true iff |u*| <= eps_u and |p - p_d| >= eps_goal
/// held over each of the last `persistence` frames.
std::vector<bool> detectDeadlock(std::span<const WindowFrame> window,
                                 const DeadlockThresholds& thresholds);

/// Streaming form of detectDeadlock, used inside simulation loops.
class DeadlockDetector {
 public:
  DeadlockDetector() = default;
  DeadlockDetector(std::size_t robots, DeadlockThresholds thresholds);

  /// Feeds one frame; returns the indices that became flagged on this frame.
  std::vector<std::size_t> update(std::span<const RobotState> states,
                                  std::span<const QpSolution> solutions);

  bool flagged(std::size_t index) const { return streak_.at(index) >= thresholds_.persistence; }
  bool allFlagged() const;
  void reset();
  const DeadlockThresholds& thresholds() const { return thresholds_; }

 private:
  DeadlockThresholds thresholds_;
  std::vector<int> streak_;
};

/// Membership data for one robot in the deadlock set: the QP output is zero
/// while the nominal control is not, rewritten through the KKT conditions as
/// separation >= d_s, mu >= 0, nominal = (1/2) sum_{active} mu a, p != p_d.
struct DeadlockCertificate {
  int robot = 0;
  double min_distance = 0.0;
  bool separation_ok = false;
  std::map<int, double> multipliers;  // active neighbors only
  bool multipliers_nonneg = false;
  double stationarity_residual = 0.0;
  std::vector<int> active;
  bool at_goal = false;
  double tol = 0.0;

  bool valid() const {
    return separation_ok && multipliers_nonneg && stationarity_residual <= tol && !at_goal;
  }
};

inline constexpr double kConstructedTol = 1e-8;
inline constexpr double kSimulatedTol = 1e-3;

/// Band |dist - d_s| used to call a neighbor active; never tighter than
/// 1e-6 d_s.
double activeBand(const SafetyParams& safety, double tol);

/// Multipliers balancing the nominal control against the given active
/// neighbors with zero QP output. One neighbor is closed form, two solve the
/// 2x2 stationarity system, more fall back to the best non-negative
/// combination of at most two (a planar cone needs no more).
/// Throws Error(DegenerateGeometry) for parallel actives that cannot balance.
std::map<int, double> deadlockMultipliers(const RobotState& ego,
                                          std::span<const RobotState> activeNeighbors,
                                          const SafetyParams& safety);

DeadlockCertificate membership(const RobotState& ego, std::span<const RobotState> others,
                               const SafetyParams& safety, double tol = kConstructedTol);

struct SystemDeadlock {
  bool deadlock = false;
  std::vector<DeadlockCertificate> certificates;
};

SystemDeadlock systemDeadlock(std::span<const RobotState> robots, const SafetyParams& safety,
                              double tol = kConstructedTol);

/// p1 = alpha p_d1 + (1 - alpha) p_d2, p2 = p1 - d_s e_beta with beta the
/// bearing from p_d1 to p_d2. Requires alpha in (0,1), |p_d2 - p_d1| > d_s.
std::pair<Vec2, Vec2> constructTwoRobotWitness(const Vec2& goal1, const Vec2& goal2,
                                               double alpha, const SafetyParams& safety);

enum class Category { A, B, None };

const char* toString(Category c);

struct ThreeRobotWitness {
  std::array<Vec2, 3> positions;
  std::array<Vec2, 3> goals;  // R e_{2 pi (i-1)/3}
};

/// Category A: p_i = (d_s/sqrt3) e_{2pi(i-1)/3 + pi}. Category B (robot 2
/// touching both): p1 = d_s e_pi, p2 = 0, p3 = d_s e_{pi/3}. Requires R > d_s.
ThreeRobotWitness constructThreeRobotWitness(double radius, Category category,
                                             const SafetyParams& safety);

Category classifyThreeRobot(std::span<const Vec2> positions, const SafetyParams& safety,
                            double tol = kConstructedTol);

/// | |p1 - p_d1| + |p2 - p_d2| - (d_s + D_G) |, D_G the inter-goal distance.
double zeroMeasureResidual(std::span<const Vec2> positions, std::span<const Vec2> goals,
                           const SafetyParams& safety);

bool activeSetNonEmptyCheck(const DeadlockCertificate& certificate);

}  // namespace cbfdl
