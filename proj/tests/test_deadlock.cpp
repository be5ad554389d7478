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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "cbfdl/deadlock.hpp"
#include "cbfdl/error.hpp"
#include "cbfdl/simulator.hpp"
#include "cbfdl/scenario_file.hpp"

using namespace cbfdl;

namespace {

std::vector<RobotState> twoRobotWitness(double alpha, double k, const SafetyParams& s,
                                        Vec2 g1 = {0, 0}, Vec2 g2 = {4, 0}) {
  const auto [p1, p2] = constructTwoRobotWitness(g1, g2, alpha, s);
  return {{1, p1, g1, k}, {2, p2, g2, k}};
}

std::vector<RobotState> threeRobotState(const ThreeRobotWitness& w, double k) {
  std::vector<RobotState> r;
  for (int i = 0; i < 3; ++i) r.push_back({i + 1, w.positions[i], w.goals[i], k});
  return r;
}

}  // namespace

TEST_CASE("detector needs persistence") {
  const DeadlockThresholds th;
  DeadlockDetector det(1, th);
  const std::vector<RobotState> away{{1, {0, 0}, {2, 0}, 1.0}};
  std::vector<QpSolution> sol(1);
  sol[0].control = {1e-6, 0.0};
  for (int k = 0; k < th.persistence - 1; ++k) CHECK(det.update(away, sol).empty());
  CHECK(det.update(away, sol) == std::vector<std::size_t>{0});
  CHECK(det.allFlagged());
  CHECK(det.update(away, sol).empty());

  QpSolution moving;
  moving.control = {0.5, 0.0};
  std::vector<QpSolution> go{moving};
  det.update(away, go);
  CHECK_FALSE(det.flagged(0));

  const std::vector<RobotState> home{{1, {2, 0}, {2, 0}, 1.0}};
  DeadlockDetector atGoal(1, th);
  std::vector<QpSolution> zero(1);
  for (int k = 0; k < 20; ++k) atGoal.update(home, zero);
  CHECK_FALSE(atGoal.allFlagged());
}

TEST_CASE("detectDeadlock over a window") {
  const DeadlockThresholds th;
  std::vector<WindowFrame> window(10);
  for (auto& f : window) {
    f.states = {{1, {0, 0}, {2, 0}, 1.0}};
    f.solutions.resize(1);
    f.solutions[0].control = {1e-6, 0};
  }
  CHECK(detectDeadlock(window, th) == std::vector<bool>{true});
  window[5].solutions[0].control = {1.0, 0};
  CHECK(detectDeadlock(window, th) == std::vector<bool>{false});
  window.resize(3);
  CHECK_THROWS_AS(detectDeadlock(window, th), Error);
}

TEST_CASE("two-robot witness: published example") {
  const SafetyParams s{1.0, 1.0};
  const double k = 1.3;
  const auto r = twoRobotWitness(0.5, k, s);
  CHECK(r[0].position.x == doctest::Approx(2.0));
  CHECK(r[0].position.y == doctest::Approx(0.0));
  CHECK(r[1].position.x == doctest::Approx(1.0));
  const auto sys = systemDeadlock(r, s);
  CHECK(sys.deadlock);
  CHECK(sys.certificates[0].multipliers.at(2) == doctest::Approx(4.0 * k).epsilon(1e-12));
  CHECK(sys.certificates[0].active == std::vector<int>{2});
  CHECK(sys.certificates[1].active == std::vector<int>{1});
  const std::vector<Vec2> pos{r[0].position, r[1].position};
  const std::vector<Vec2> goals{r[0].goal, r[1].goal};
  CHECK(zeroMeasureResidual(pos, goals, s) <= 1e-12);
  CHECK(activeSetNonEmptyCheck(sys.certificates[0]));
}

TEST_CASE("two-robot witness guards") {
  const SafetyParams s{1.0, 1.0};
  CHECK_THROWS_AS(constructTwoRobotWitness({0, 0}, {4, 0}, 1.0, s), Error);
  CHECK_THROWS_AS(constructTwoRobotWitness({0, 0}, {4, 0}, 0.0, s), Error);
  CHECK_THROWS_AS(constructTwoRobotWitness({0, 0}, {0.5, 0}, 0.5, s), Error);
}

TEST_CASE("zero-measure residual, hand values") {
  const SafetyParams s{1.0, 1.0};
  const std::vector<Vec2> goals{{0, 0}, {4, 0}};
  CHECK(zeroMeasureResidual(std::vector<Vec2>{{2.1, 0}, {1, 0}}, goals, s) ==
        doctest::Approx(0.1));
  CHECK(zeroMeasureResidual(goals, goals, s) == doctest::Approx(5.0));
  CHECK_THROWS_AS(zeroMeasureResidual(std::vector<Vec2>{{0, 0}}, goals, s), Error);
}

TEST_CASE("membership rejects non-deadlock states") {
  const SafetyParams s{1.0, 1.0};
  auto r = twoRobotWitness(0.5, 1.0, s);
  r[0].position.y += 0.1;
  CHECK_FALSE(systemDeadlock(r, s).deadlock);

  const std::vector<RobotState> apart{{1, {0, 0}, {5, 0}, 1.0}, {2, {2, 0}, {-3, 0}, 1.0}};
  const auto c = membership(apart[0], std::span(apart).subspan(1), s);
  CHECK_FALSE(c.valid());
  CHECK(c.stationarity_residual > 0.0);

  const std::vector<RobotState> home{{1, {0, 0}, {0, 0}, 1.0}, {2, {3, 0}, {3, 0}, 1.0}};
  CHECK_FALSE(systemDeadlock(home, s).deadlock);
  CHECK(systemDeadlock(home, s).certificates[0].at_goal);
}

TEST_CASE("nominal control orthogonal to the active row has no balancing multiplier") {
  const SafetyParams s{1.0, 1.0};
  const RobotState ego{1, {0, 0}, {0, 2}, 1.0};
  const std::vector<RobotState> other{{2, {1, 0}, {5, 0}, 1.0}};
  const auto c = membership(ego, other, s);
  CHECK(c.multipliers.at(2) == doctest::Approx(0.0));
  CHECK(c.stationarity_residual == doctest::Approx(2.0));
  CHECK_FALSE(c.valid());
}

TEST_CASE("three-robot witnesses") {
  const SafetyParams s{0.6, 1.0};
  const auto a = constructThreeRobotWitness(2.0, Category::A, s);
  CHECK(a.positions[0].x == doctest::Approx(-0.6 / std::sqrt(3.0)));
  CHECK(a.positions[0].y == doctest::Approx(0.0));
  for (int i = 0; i < 3; ++i) {
    CHECK((a.positions[i] - a.positions[(i + 1) % 3]).norm() == doctest::Approx(0.6));
  }
  const std::vector<Vec2> pa(a.positions.begin(), a.positions.end());
  CHECK((classifyThreeRobot(pa, s) == Category::A));
  const auto ra = threeRobotState(a, 1.0);
  const auto sa = systemDeadlock(ra, s);
  CHECK(sa.deadlock);
  CHECK(sa.certificates[1].active == std::vector<int>{1, 3});
  for (const auto& c : sa.certificates) {
    REQUIRE(c.multipliers.size() == 2);
    const double m1 = c.multipliers.begin()->second;
    const double m2 = c.multipliers.rbegin()->second;
    CHECK(m1 > 0.0);
    CHECK(m1 == doctest::Approx(m2).epsilon(1e-10));
  }

  const auto b = constructThreeRobotWitness(2.0, Category::B, s);
  const std::vector<Vec2> pb(b.positions.begin(), b.positions.end());
  CHECK((classifyThreeRobot(pb, s) == Category::B));
  CHECK((pb[0] - pb[2]).norm() == doctest::Approx(std::sqrt(3.0) * 0.6));
  const auto sb = systemDeadlock(threeRobotState(b, 1.0), s);
  CHECK(sb.deadlock);
  CHECK(sb.certificates[1].active == std::vector<int>{1, 3});
  CHECK(sb.certificates[0].active == std::vector<int>{2});

  CHECK_THROWS_AS(constructThreeRobotWitness(0.5, Category::A, s), Error);
  const std::vector<Vec2> spread{{0, 0}, {3, 0}, {0, 3}};
  CHECK((classifyThreeRobot(spread, s) == Category::None));
}

TEST_CASE("certificates: force balance and symmetric activeness") {
  const SafetyParams s{0.5, 2.0};
  for (int k = 1; k < 100; ++k) {
    const double alpha = k / 100.0;
    const auto r = twoRobotWitness(alpha, 0.8, s, {1, -1}, {-2, 3});
    const auto sys = systemDeadlock(r, s);
    REQUIRE(sys.deadlock);
    for (const auto& c : sys.certificates) {
      CHECK(c.stationarity_residual <= 1e-8);
      CHECK(std::abs(c.min_distance - s.d_s) <= 1e-8);
    }
    CHECK(sys.certificates[0].active == std::vector<int>{2});
    CHECK(sys.certificates[1].active == std::vector<int>{1});
  }
}

TEST_CASE("simulated S1 and S2 end states certify with the relaxed tolerance") {
  for (const auto& spec : {builtinS1(), builtinS2()}) {
    const auto file = generateCanonical(spec);
    const auto trace = run(file.scenario, file.sim);
    std::vector<RobotState> end = file.scenario.robots;
    for (std::size_t i = 0; i < end.size(); ++i) end[i].position = trace.samples.back()[i].position;
    CHECK(systemDeadlock(end, file.scenario.safety, kSimulatedTol).deadlock);
    if (end.size() == 3) {
      CHECK((classifyThreeRobot(positionsOf(end), file.scenario.safety, kSimulatedTol) ==
             Category::A));
    }
  }
}
