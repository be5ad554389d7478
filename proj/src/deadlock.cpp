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

#include "cbfdl/deadlock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cbfdl/error.hpp"

namespace cbfdl {

void DeadlockThresholds::validate() const {
  if (!(eps_u > 0.0) || !(eps_goal > 0.0) || persistence < 1) {
    throw Error(ErrorKind::Validation, "detection thresholds must be positive");
  }
}

namespace {

bool frameStalled(const RobotState& s, const QpSolution& q, const DeadlockThresholds& th) {
  return q.control.norm() <= th.eps_u && (s.position - s.goal).norm() >= th.eps_goal;
}

}  // namespace

std::vector<bool> detectDeadlock(std::span<const WindowFrame> window,
                                 const DeadlockThresholds& thresholds) {
  thresholds.validate();
  if (window.size() < static_cast<std::size_t>(thresholds.persistence)) {
    throw Error(ErrorKind::InvalidInput, "window shorter than persistence");
  }
  const std::size_t n = window.back().states.size();
  std::vector<bool> verdict(n, true);
  for (std::size_t k = window.size() - thresholds.persistence; k < window.size(); ++k) {
    const auto& f = window[k];
    if (f.states.size() != n || f.solutions.size() != n) {
      throw Error(ErrorKind::InvalidInput, "window frames disagree on robot count");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!frameStalled(f.states[i], f.solutions[i], thresholds)) verdict[i] = false;
    }
  }
  return verdict;
}

DeadlockDetector::DeadlockDetector(std::size_t robots, DeadlockThresholds thresholds)
    : thresholds_(thresholds), streak_(robots, 0) {
  thresholds_.validate();
}

std::vector<std::size_t> DeadlockDetector::update(std::span<const RobotState> states,
                                                  std::span<const QpSolution> solutions) {
  std::vector<std::size_t> fresh;
  for (std::size_t i = 0; i < streak_.size(); ++i) {
    if (frameStalled(states[i], solutions[i], thresholds_)) {
      if (++streak_[i] == thresholds_.persistence) fresh.push_back(i);
    } else {
      streak_[i] = 0;
    }
  }
  return fresh;
}

bool DeadlockDetector::allFlagged() const {
  return !streak_.empty() && std::all_of(streak_.begin(), streak_.end(), [&](int s) {
    return s >= thresholds_.persistence;
  });
}

void DeadlockDetector::reset() { std::fill(streak_.begin(), streak_.end(), 0); }

double activeBand(const SafetyParams& safety, double tol) {
  return std::max(1e-6 * safety.d_s, tol);
}

namespace {

struct Combination {
  std::map<int, double> mu;
  double residual = std::numeric_limits<double>::infinity();
  bool nonneg = false;
};

Combination evaluate(const Vec2& nominal, std::map<int, double> mu,
                     std::span<const RobotState> neighbors, const Vec2& ego) {
  Vec2 balance = nominal;
  bool nonneg = true;
  for (const auto& n : neighbors) {
    const auto it = mu.find(n.id);
    if (it == mu.end()) continue;
    balance -= 0.5 * it->second * (n.position - ego);
    nonneg = nonneg && it->second >= 0.0;
  }
  return {std::move(mu), balance.norm(), nonneg};
}

}  // namespace

std::map<int, double> deadlockMultipliers(const RobotState& ego,
                                          std::span<const RobotState> activeNeighbors,
                                          const SafetyParams& safety) {
  (void)safety;  // active rows have b = 0, so d_s drops out
  const Vec2 nominal = nominalControl(ego);
  const std::size_t m = activeNeighbors.size();
  if (m == 0) return {};

  auto single = [&](const RobotState& n) {
    const Vec2 a = n.position - ego.position;
    return std::map<int, double>{{n.id, activeSingleMultiplier(a, 0.0, nominal)}};
  };
  // Solves (1/2)(mu1 a1 + mu2 a2) = nominal; empty when a1 || a2.
  auto pair = [&](const RobotState& n1, const RobotState& n2) -> std::map<int, double> {
    const Vec2 a1 = n1.position - ego.position;
    const Vec2 a2 = n2.position - ego.position;
    const double det = a1.cross(a2);
    if (std::abs(det) <= 1e-12 * a1.norm() * a2.norm()) return {};
    const Vec2 rhs = 2.0 * nominal;
    return {{n1.id, rhs.cross(a2) / det}, {n2.id, a1.cross(rhs) / det}};
  };

  if (m == 1) return single(activeNeighbors[0]);

  if (m == 2) {
    auto mu = pair(activeNeighbors[0], activeNeighbors[1]);
    if (!mu.empty()) return mu;
    // Parallel normals: balance is possible only with the nominal along them.
    for (const auto& n : activeNeighbors) {
      auto c = evaluate(nominal, single(n), activeNeighbors, ego.position);
      if (c.nonneg && c.residual <= 1e-12 * std::max(1.0, nominal.norm())) {
        c.mu[activeNeighbors[0].id] += 0.0;
        c.mu[activeNeighbors[1].id] += 0.0;
        return c.mu;
      }
    }
    throw Error(ErrorKind::DegenerateGeometry,
                "robot " + std::to_string(ego.id) + ": parallel active neighbors cannot balance");
  }

  // Three or more contacts: search the non-negative combinations of one or
  // two neighbors, keeping the one with the smallest residual.
  Combination best;
  Combination bestAny;
  auto keep = [&](Combination c) {
    if (c.mu.empty()) return;
    if (c.residual < bestAny.residual) bestAny = c;
    if (c.nonneg && c.residual < best.residual) best = std::move(c);
  };
  for (std::size_t i = 0; i < m; ++i) {
    keep(evaluate(nominal, single(activeNeighbors[i]), activeNeighbors, ego.position));
    for (std::size_t j = i + 1; j < m; ++j) {
      keep(evaluate(nominal, pair(activeNeighbors[i], activeNeighbors[j]), activeNeighbors,
                    ego.position));
    }
  }
  Combination& chosen = best.mu.empty() ? bestAny : best;
  for (const auto& n : activeNeighbors) chosen.mu[n.id] += 0.0;
  return chosen.mu;
}

DeadlockCertificate membership(const RobotState& ego, std::span<const RobotState> others,
                               const SafetyParams& safety, double tol) {
  DeadlockCertificate cert;
  cert.robot = ego.id;
  cert.tol = tol;
  cert.min_distance = std::numeric_limits<double>::infinity();

  const double band = activeBand(safety, tol);
  std::vector<RobotState> active;
  for (const auto& o : others) {
    const double d = (o.position - ego.position).norm();
    cert.min_distance = std::min(cert.min_distance, d);
    if (std::abs(d - safety.d_s) <= band) {
      active.push_back(o);
      cert.active.push_back(o.id);
    }
  }
  std::sort(cert.active.begin(), cert.active.end());
  cert.separation_ok = others.empty() || cert.min_distance >= safety.d_s - tol;
  cert.at_goal = (ego.position - ego.goal).norm() <= tol;

  const Vec2 nominal = nominalControl(ego);
  try {
    cert.multipliers = deadlockMultipliers(ego, active, safety);
    Vec2 balance = nominal;
    cert.multipliers_nonneg = true;
    for (const auto& a : active) {
      const double mu = cert.multipliers.at(a.id);
      balance -= 0.5 * mu * (a.position - ego.position);
      cert.multipliers_nonneg = cert.multipliers_nonneg && mu >= -tol;
    }
    cert.stationarity_residual = balance.norm();
  } catch (const Error&) {
    cert.multipliers.clear();
    cert.multipliers_nonneg = false;
    cert.stationarity_residual = nominal.norm();
  }
  return cert;
}

SystemDeadlock systemDeadlock(std::span<const RobotState> robots, const SafetyParams& safety,
                              double tol) {
  SystemDeadlock out;
  out.deadlock = !robots.empty();
  std::vector<RobotState> others;
  for (std::size_t i = 0; i < robots.size(); ++i) {
    others.clear();
    for (std::size_t j = 0; j < robots.size(); ++j) {
      if (j != i) others.push_back(robots[j]);
    }
    out.certificates.push_back(membership(robots[i], others, safety, tol));
    out.deadlock = out.deadlock && out.certificates.back().valid();
  }
  return out;
}

std::pair<Vec2, Vec2> constructTwoRobotWitness(const Vec2& goal1, const Vec2& goal2,
                                               double alpha, const SafetyParams& safety) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "witness alpha must lie in (0,1)");
  }
  const Vec2 goalGap = goal2 - goal1;
  if (!(goalGap.norm() > safety.d_s)) {
    throw Error(ErrorKind::InvalidInput, "goals must be more than d_s apart");
  }
  const double beta = std::atan2(goalGap.y, goalGap.x);
  const Vec2 p1 = alpha * goal1 + (1.0 - alpha) * goal2;
  return {p1, p1 - safety.d_s * unitVector(beta)};
}

const char* toString(Category c) {
  switch (c) {
    case Category::A: return "A";
    case Category::B: return "B";
    case Category::None: return "none";
  }
  return "none";
}

ThreeRobotWitness constructThreeRobotWitness(double radius, Category category,
                                             const SafetyParams& safety) {
  if (!(radius > safety.d_s)) throw Error(ErrorKind::InvalidInput, "witness needs R > d_s");
  ThreeRobotWitness w;
  for (int i = 0; i < 3; ++i) w.goals[i] = radius * unitVector(2.0 * kPi * i / 3.0);
  switch (category) {
    case Category::A:
      for (int i = 0; i < 3; ++i) {
        w.positions[i] = (safety.d_s / kSqrt3) * unitVector(2.0 * kPi * i / 3.0 + kPi);
      }
      break;
    case Category::B:
      w.positions = {safety.d_s * unitVector(kPi), Vec2{0.0, 0.0},
                     safety.d_s * unitVector(kPi / 3.0)};
      break;
    case Category::None:
      throw Error(ErrorKind::InvalidInput, "witness category must be A or B");
  }
  return w;
}

Category classifyThreeRobot(std::span<const Vec2> positions, const SafetyParams& safety,
                            double tol) {
  if (positions.size() != 3) return Category::None;
  const double band = activeBand(safety, tol);
  int touching = 0;
  bool separatedOthers = true;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double d = (positions[i] - positions[j]).norm();
      if (std::abs(d - safety.d_s) <= band) {
        ++touching;
      } else if (d <= safety.d_s + band) {
        separatedOthers = false;
      }
    }
  }
  if (touching == 3) return Category::A;
  if (touching == 2 && separatedOthers) return Category::B;
  return Category::None;
}

double zeroMeasureResidual(std::span<const Vec2> positions, std::span<const Vec2> goals,
                           const SafetyParams& safety) {
  if (positions.size() != 2 || goals.size() != 2) {
    throw Error(ErrorKind::InvalidInput, "zero-measure identity is stated for two robots");
  }
  const double lhs = (positions[0] - goals[0]).norm() + (positions[1] - goals[1]).norm();
  return std::abs(lhs - (safety.d_s + (goals[1] - goals[0]).norm()));
}

bool activeSetNonEmptyCheck(const DeadlockCertificate& certificate) {
  return !certificate.active.empty();
}

}  // namespace cbfdl
