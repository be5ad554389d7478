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

#include "cbfdl/qp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "cbfdl/error.hpp"

namespace cbfdl {
namespace {

struct Candidate {
  std::vector<int> active;  // sorted neighbor ids
  Vec2 control;
  std::map<int, double> multipliers;
};

double rowTolerance(const ConstraintRow& row, const Vec2& u) {
  const double scale = std::max({1.0, std::abs(row.b), std::abs(row.a.dot(u))});
  return kQpFeasibilityTol * scale;
}

bool primalFeasible(std::span<const ConstraintRow> rows, const Vec2& u) {
  return std::all_of(rows.begin(), rows.end(), [&](const ConstraintRow& r) {
    return r.a.dot(u) - r.b <= rowTolerance(r, u);
  });
}

bool dualFeasible(std::initializer_list<double> mus) {
  double scale = 1.0;
  for (double m : mus) scale = std::max(scale, std::abs(m));
  return std::all_of(mus.begin(), mus.end(),
                     [&](double m) { return m >= -kQpFeasibilityTol * scale; });
}

std::map<int, double> zeroMultipliers(std::span<const ConstraintRow> rows) {
  std::map<int, double> out;
  for (const auto& r : rows) out[r.neighbor] = 0.0;
  return out;
}

std::optional<Candidate> trySingle(const Vec2& nominal, std::span<const ConstraintRow> rows,
                                   const ConstraintRow& row) {
  const double mu = activeSingleMultiplier(row.a, row.b, nominal);
  if (!dualFeasible({mu})) return std::nullopt;
  const Vec2 u = nominal - 0.5 * mu * row.a;
  if (!primalFeasible(rows, u)) return std::nullopt;
  Candidate c{{row.neighbor}, u, zeroMultipliers(rows)};
  c.multipliers[row.neighbor] = std::max(mu, 0.0);
  return c;
}

std::optional<Candidate> tryPair(const Vec2& nominal, std::span<const ConstraintRow> rows,
                                 const ConstraintRow& r1, const ConstraintRow& r2) {
  const double det = r1.a.cross(r2.a);
  if (std::abs(det) <= 1e-12 * r1.a.norm() * r2.a.norm()) return std::nullopt;

  // a1^T u = b1, a2^T u = b2
  const Vec2 u{(r1.b * r2.a.y - r2.b * r1.a.y) / det, (r1.a.x * r2.b - r2.a.x * r1.b) / det};
  // mu1 a1 + mu2 a2 = 2 (nominal - u)
  const Vec2 rhs = 2.0 * (nominal - u);
  const double mu1 = rhs.cross(r2.a) / det;
  const double mu2 = r1.a.cross(rhs) / det;
  if (!dualFeasible({mu1, mu2})) return std::nullopt;
  if (!primalFeasible(rows, u)) return std::nullopt;

  Candidate c{{r1.neighbor, r2.neighbor}, u, zeroMultipliers(rows)};
  std::sort(c.active.begin(), c.active.end());
  c.multipliers[r1.neighbor] = std::max(mu1, 0.0);
  c.multipliers[r2.neighbor] = std::max(mu2, 0.0);
  return c;
}

}  // namespace

bool QpSolution::isActive(int neighbor) const {
  return std::binary_search(active.begin(), active.end(), neighbor);
}

double KktCertificate::maxResidual() const {
  return std::max({stationarity_residual, primal_violation, dual_violation,
                   comp_slackness_residual});
}

ConstraintSet buildConstraints(const RobotState& ego, std::span<const RobotState> others,
                               const SafetyParams& safety) {
  ConstraintSet cs;
  cs.owner = ego.id;
  cs.rows.reserve(others.size());
  for (const auto& other : others) {
    if (other.position == ego.position) {
      throw Error(ErrorKind::DegenerateGeometry,
                  "robots " + std::to_string(ego.id) + " and " + std::to_string(other.id) +
                      " coincide");
    }
    const auto [a, b] = constraintCoefficients(ego.position, other.position, safety);
    cs.rows.push_back({other.id, a, b});
  }
  return cs;
}

double activeSingleMultiplier(const Vec2& a, double b, const Vec2& nominal) {
  const double aa = a.squaredNorm();
  if (aa == 0.0) throw Error(ErrorKind::DegenerateGeometry, "zero constraint normal");
  return 2.0 * (a.dot(nominal) - b) / aa;
}

QpSolution solveCbfQp(const Vec2& nominal, const ConstraintSet& constraints) {
  const std::span<const ConstraintRow> rows = constraints.rows;
  for (const auto& r : rows) {
    if (r.a.squaredNorm() == 0.0) {
      throw Error(ErrorKind::DegenerateGeometry,
                  "robot " + std::to_string(constraints.owner) + " has a zero row for neighbor " +
                      std::to_string(r.neighbor));
    }
  }

  std::optional<Candidate> best;
  auto consider = [&](std::optional<Candidate> c) {
    if (c && (!best || c->active < best->active)) best = std::move(c);
  };

  // The empty set sorts before every other subset, so it short-circuits.
  if (primalFeasible(rows, nominal)) {
    consider(Candidate{{}, nominal, zeroMultipliers(rows)});
  } else {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      consider(trySingle(nominal, rows, rows[i]));
      for (std::size_t j = i + 1; j < rows.size(); ++j) {
        consider(tryPair(nominal, rows, rows[i], rows[j]));
      }
    }
  }

  if (!best) {
    throw Error(ErrorKind::InfeasibleQp,
                "no active set certifies for robot " + std::to_string(constraints.owner));
  }
  QpSolution sol;
  sol.control = best->control;
  sol.multipliers = std::move(best->multipliers);
  sol.active = std::move(best->active);
  sol.objective = (sol.control - nominal).squaredNorm();
  return sol;
}

KktCertificate verifyKkt(const Vec2& nominal, const ConstraintSet& constraints,
                         const QpSolution& sol) {
  KktCertificate cert;
  Vec2 reconstructed = nominal;
  for (const auto& r : constraints.rows) {
    const auto it = sol.multipliers.find(r.neighbor);
    const double mu = it == sol.multipliers.end() ? 0.0 : it->second;
    const double slack = r.a.dot(sol.control) - r.b;
    reconstructed -= 0.5 * mu * r.a;
    cert.primal_violation = std::max(cert.primal_violation, slack);
    cert.dual_violation = std::max(cert.dual_violation, -mu);
    cert.comp_slackness_residual = std::max(cert.comp_slackness_residual, std::abs(mu * slack));
  }
  cert.stationarity_residual = (reconstructed - sol.control).norm();
  return cert;
}

}  // namespace cbfdl
