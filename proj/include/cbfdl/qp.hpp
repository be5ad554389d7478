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

#include <map>
#include <span>
#include <vector>

#include "cbfdl/model.hpp"

namespace cbfdl {

struct ConstraintRow {
  int neighbor = 0;
  Vec2 a;
  double b = 0.0;
};

/// All collision-avoidance rows of one robot's QP, one per other robot.
struct ConstraintSet {
  int owner = 0;
  std::vector<ConstraintRow> rows;
};

struct QpSolution {
  Vec2 control;
  std::map<int, double> multipliers;  // neighbor id -> mu (0 when inactive)
  std::vector<int> active;            // sorted neighbor ids
  double objective = 0.0;             // |control - nominal|^2

  bool isActive(int neighbor) const;
};

struct KktCertificate {
  double stationarity_residual = 0.0;
  double primal_violation = 0.0;
  double dual_violation = 0.0;
  double comp_slackness_residual = 0.0;

  double maxResidual() const;
};

/// Absolute tolerance for "row satisfied" when certifying a candidate active
/// set, scaled up by the magnitude of the row terms when those exceed 1.
inline constexpr double kQpFeasibilityTol = 1e-10;

ConstraintSet buildConstraints(const RobotState& ego, std::span<const RobotState> others,
                               const SafetyParams& safety);

/// Exact minimizer of |u - nominal|^2 s.t. a^T u <= b for every row.
///
/// The decision variable is 2-D, so the optimum has at most two linearly
/// independent active rows. Every candidate active subset of size 0, 1 and 2
/// is solved in closed form and certified against primal and dual
/// feasibility; parallel pairs are skipped. When several subsets certify the
/// lexicographically smallest (by sorted neighbor id) wins.
///
/// Throws Error(DegenerateGeometry) for a zero row and Error(InfeasibleQp)
/// when no candidate certifies.
QpSolution solveCbfQp(const Vec2& nominal, const ConstraintSet& constraints);

/// Residuals of stationarity, primal/dual feasibility and complementary
/// slackness for `sol`, computed from the rows alone.
KktCertificate verifyKkt(const Vec2& nominal, const ConstraintSet& constraints,
                         const QpSolution& sol);

/// mu = 2 (a^T nominal - b) / |a|^2, the multiplier of a lone active row.
double activeSingleMultiplier(const Vec2& a, double b, const Vec2& nominal);

}  // namespace cbfdl
