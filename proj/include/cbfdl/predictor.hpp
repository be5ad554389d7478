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

#include "cbfdl/geometry.hpp"
#include "cbfdl/model.hpp"

namespace cbfdl {

/// Two robots on a line through both goals: p2(0) = p1(0) + d_init e_alpha,
/// p_d1 = p1(0) + d_g1 e_alpha, p_d2 = p2(0) - d_g2 e_alpha.
struct TwoRobotCanonical {
  double d_init = 2.0;
  double d_g1 = 3.0;
  double d_g2 = 4.0;
  double k_p1 = 1.0;
  double k_p2 = 1.0;
  double alpha = 0.0;
  Vec2 base;
  SafetyParams safety;

  /// d_g1 + d_g2 - d_init: offset of the nominal distance curve.
  double offset() const { return d_g1 + d_g2 - d_init; }
  /// Throws Error(PreconditionViolated) naming the failed inequality.
  void validate() const;
};

/// Three robots on an equilateral triangle of side d_init, each heading to
/// the point d_g away through the centroid.
struct ThreeRobotCanonical {
  double d_init = 3.0;
  double d_g = 3.0;
  double k_p = 1.0;
  double alpha = 0.0;
  Vec2 base;
  SafetyParams safety;

  void validate() const;
};

struct PhaseTimeline {
  double t1 = 0.0;
  std::optional<double> t2;
  double d_at_t1 = 0.0;
  std::optional<double> d_at_t2;
  double limit_distance = 0.0;
  int first_active = 0;  // robot whose constraint activates at t1 (two-robot case)
};

/// Distance below which a robot heading straight at its neighbour violates
/// its CBF row: 2 d_g k_p / gamma + sqrt((2 d_g k_p / gamma)^2 + d_s^2).
double betaPlusStatic(double d_g, double k_p, const SafetyParams& safety);

/// betaPlusStatic with d_g k_p decayed by exp(-k_p t).
double betaPlusTimed(double d_g, double k_p, double t, const SafetyParams& safety);

/// Phase-1 distance d_g1 e^{-k_p1 t} + d_g2 e^{-k_p2 t} - (d_g1 + d_g2 - d_init).
double nominalDistanceTwo(const TwoRobotCanonical& c, double t);

/// End of phase 1: earliest time either robot's critical curve meets the
/// nominal distance. Throws Error(NoCrossing) when no bracket exists.
double findT1(const TwoRobotCanonical& c);

/// Robot (1 or 2) whose constraint activates at findT1.
int firstActiveRobot(const TwoRobotCanonical& c);

/// Phase-2 distance: the first-active robot is projected onto its constraint
/// boundary while the other still follows its nominal law,
///   D' = -gamma (D^2 - d_s^2) / (4 D) - k_f d_gf e^{-k_f t},  D(t1) = beta_lead(t1),
/// integrated with fixed-step rk4 (step 1e-4 / gamma).
double phase2Distance(const TwoRobotCanonical& c, double t1, double t);

/// First t >= t1 where the phase-2 distance meets the other robot's critical
/// curve. Returns t1 when both constraints activate together.
double findT2(const TwoRobotCanonical& c, double t1);

/// sqrt((d_t2^2 - d_s^2) e^{-gamma (t - t2)} + d_s^2).
double phase3ClosedForm(double d_t2, double t2, double t, const SafetyParams& safety);

PhaseTimeline predictTwoRobot(const TwoRobotCanonical& c);

double threeRobotBetaPlusStatic(const ThreeRobotCanonical& c);
double threeRobotBetaPlusTimed(const ThreeRobotCanonical& c, double t);

/// (d_init - sqrt3 d_g) + sqrt3 d_g e^{-k_p t}.
double threeRobotNominalDistance(const ThreeRobotCanonical& c, double t);

double threeRobotFindT1(const ThreeRobotCanonical& c);

/// Same square-root decay as the two-robot phase 3, started at t1.
double threeRobotPhase2ClosedForm(double d_t1, double t1, double t, const SafetyParams& safety);

PhaseTimeline predictThreeRobot(const ThreeRobotCanonical& c);

}  // namespace cbfdl
