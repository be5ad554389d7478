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
#include <numbers>

#include "cbfdl/deadlock.hpp"
#include "cbfdl/error.hpp"
#include "cbfdl/resolution.hpp"
#include "cbfdl/scenario_file.hpp"

using namespace cbfdl;

namespace {

Scenario twoRobots(Vec2 p1, Vec2 g1, Vec2 p2, Vec2 g2, double ds = 0.5) {
  Scenario sc;
  sc.robots = {{1, p1, g1, 1.0}, {2, p2, g2, 1.0}};
  sc.safety.d_s = ds;
  sc.safety.gamma = 5.0;
  return sc;
}

Scenario triangle(double radius, double angle, double ds = 0.5) {
  Scenario sc;
  sc.safety.d_s = ds;
  sc.safety.gamma = 5.0;
  for (int i = 0; i < 3; ++i) {
    const double a = angle + 2 * kPi * i / 3;
    const Vec2 dir{std::cos(a), std::sin(a)};
    sc.robots.push_back({i + 1, dir * radius, dir * -2.0, 1.0});
  }
  return sc;
}

SupervisorState supervisorFor(const Scenario& sc, double beta) {
  ResolutionParams params;
  params.rotation_gain = 1.0;
  params.distance_gain = 1.0;
  auto sup = makeSupervisor(sc, params);
  sup.beta_target = beta;
  return sup;
}

}  // namespace

TEST_CASE("phase names") {
  CHECK(std::string(toString(ResolutionPhase::Phase1Cbf)) == "phase1_cbf");
  CHECK(std::string(toString(ResolutionPhase::Phase2Rotate)) == "phase2_rotate");
  CHECK(std::string(toString(ResolutionPhase::Phase3Proportional)) == "phase3_proportional");
  CHECK(std::string(toString(ResolutionPhase::Done)) == "done");
}

TEST_CASE("two-robot rotation law") {
  const double ds = 0.5;
  SUBCASE("converged") {
    const auto sc = twoRobots({0, 0}, {5, 0}, {ds, 0}, {-5, 0});
    const auto u = phase2TwoRobot(sc.robots, supervisorFor(sc, 0.0), sc.safety);
    CHECK(u[0].norm() == doctest::Approx(0.0));
    CHECK(u[1].norm() == doctest::Approx(0.0));
  }
  SUBCASE("quarter turn is purely tangential") {
    const auto sc = twoRobots({0, 0}, {5, 0}, {0, ds}, {-5, 0});
    const auto u = phase2TwoRobot(sc.robots, supervisorFor(sc, 0.0), sc.safety);
    const Vec2 du = u[1] - u[0];
    const Vec2 dp = sc.robots[1].position - sc.robots[0].position;
    CHECK(du.norm() == doctest::Approx(ds * kPi / 2).epsilon(1e-14));
    CHECK(std::abs(dp.dot(du)) <= 1e-15);
    CHECK((u[0] + u[1]).norm() <= 1e-15);
  }
  SUBCASE("stretched pair contracts radially") {
    const auto sc = twoRobots({0, 0}, {5, 0}, {1.1 * ds, 0}, {-5, 0});
    const auto u = phase2TwoRobot(sc.robots, supervisorFor(sc, 0.0), sc.safety);
    const Vec2 du = u[1] - u[0];
    CHECK(du.x == doctest::Approx(-0.1 * ds).epsilon(1e-14));
    CHECK(du.y == 0.0);
  }
  SUBCASE("outside the contact band") {
    const auto sc = twoRobots({0, 0}, {5, 0}, {2.0, 0}, {-5, 0});
    try {
      phase2TwoRobot(sc.robots, supervisorFor(sc, 0.0), sc.safety);
      FAIL("expected a precondition failure");
    } catch (const Error& e) {
      CHECK((e.kind() == ErrorKind::PreconditionViolated));
    }
  }
}

TEST_CASE("three-robot rotation law") {
  const double ds = 0.5;
  const double r = ds / kSqrt3;
  SUBCASE("converged") {
    const auto sc = triangle(r, 0.3);
    const Vec2 d = sc.robots[1].position - sc.robots[0].position;
    const auto u = phase2ThreeRobot(sc.robots, supervisorFor(sc, std::atan2(d.y, d.x)), sc.safety);
    for (const auto& ui : u) CHECK(ui.norm() <= 1e-15);
  }
  SUBCASE("half turn") {
    const auto sc = triangle(r, 0.3);
    const Vec2 d = sc.robots[1].position - sc.robots[0].position;
    const double theta = std::atan2(d.y, d.x);
    const auto u = phase2ThreeRobot(sc.robots, supervisorFor(sc, theta + kPi), sc.safety);
    Vec2 sum;
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(u[i].norm() == doctest::Approx(kPi * ds / kSqrt3).epsilon(1e-12));
      CHECK(std::abs(u[i].dot(sc.robots[i].position)) <= 1e-12);
      sum = sum + u[i];
    }
    CHECK(sum.norm() <= 1e-12);
  }
  SUBCASE("inflated triangle contracts symmetrically") {
    const auto sc = triangle(1.05 * r, 0.3);
    const Vec2 d = sc.robots[1].position - sc.robots[0].position;
    const auto u = phase2ThreeRobot(sc.robots, supervisorFor(sc, std::atan2(d.y, d.x)), sc.safety);
    Vec2 sum;
    for (std::size_t i = 0; i < 3; ++i) {
      const Vec2 out = sc.robots[i].position / sc.robots[i].position.norm();
      CHECK(u[i].dot(out) == doctest::Approx(-0.05 * r).epsilon(1e-12));
      CHECK(std::abs(u[i].cross(out)) <= 1e-15);
      sum = sum + u[i];
    }
    CHECK(sum.norm() <= 1e-15);
  }
  SUBCASE("category B contact graph is rejected") {
    SafetyParams s{ds, 5.0};
    const auto w = constructThreeRobotWitness(2.0, Category::B, s);
    Scenario sc;
    sc.safety = s;
    for (int i = 0; i < 3; ++i) sc.robots.push_back({i + 1, w.positions[i], w.goals[i], 1.0});
    try {
      phase2ThreeRobot(sc.robots, supervisorFor(sc, 0.0), sc.safety);
      FAIL("expected NotCategoryA");
    } catch (const Error& e) {
      CHECK((e.kind() == ErrorKind::NotCategoryA));
    }
  }
}

TEST_CASE("supervisor switching") {
  const SafetyParams s{0.5, 5.0};
  const Vec2 g1{4, 1};
  const Vec2 g2{0, 1};
  const auto [p1, p2] = constructTwoRobotWitness(g1, g2, 0.4, s);
  const auto sc = twoRobots(p1, g1, p2, g2);

  SUBCASE("far apart robots follow their QP outputs") {
    const auto free = twoRobots({0, 0}, {1, 0}, {0, 5}, {1, 5});
    auto sup = makeSupervisor(free, {});
    const auto out = superviseStep(free.robots, sup, free.safety, 0.0, 1e-3);
    const auto qp = solveAll(free.robots, free.safety);
    CHECK((sup.phase == ResolutionPhase::Phase1Cbf));
    CHECK((out.controls[0] == qp[0].control));
    CHECK((out.controls[1] == qp[1].control));
  }

  SUBCASE("a deadlock witness enters phase 2 within the persistence window") {
    ResolutionParams params;
    auto sup = makeSupervisor(sc, params);
    std::vector<RobotState> states = sc.robots;
    int steps = 0;
    bool entered = false;
    for (; steps <= params.detection.persistence + 1; ++steps) {
      const auto out = superviseStep(states, sup, sc.safety, steps * 1e-3, 1e-3);
      for (const auto& e : out.events) entered = entered || e.kind == EventKind::Phase2Enter;
      if (sup.phase == ResolutionPhase::Phase2Rotate) break;
      for (std::size_t i = 0; i < 2; ++i) states[i].position = states[i].position + out.controls[i] * 1e-3;
    }
    CHECK((sup.phase == ResolutionPhase::Phase2Rotate));
    CHECK(entered);
    CHECK(steps <= params.detection.persistence);
  }

  SUBCASE("aligned pair leaves phase 2 on the next step") {
    auto aligned = twoRobots({0, 0}, {-3, 0}, {0.5, 0}, {3, 0});
    auto sup = makeSupervisor(aligned, {});
    sup.phase = ResolutionPhase::Phase2Rotate;
    superviseStep(aligned.robots, sup, aligned.safety, 1.0, 1e-3);
    CHECK((sup.phase == ResolutionPhase::Phase3Proportional));
  }
}

TEST_CASE("resolution rejects goals inside the safety distance") {
  const auto sc = twoRobots({0, 0}, {1, 0}, {3, 0}, {1.3, 0});
  SimConfig cfg;
  try {
    runResolution(sc, cfg);
    FAIL("expected AssumptionViolated");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::AssumptionViolated));
  }

  auto four = triangle(1, 0);
  four.robots.push_back({4, {5, 5}, {6, 6}, 1.0});
  CHECK_THROWS_AS(makeSupervisor(four, {}), Error);
}

TEST_CASE("S1 resolves end to end") {
  const auto file = generateCanonical(builtinS1());
  SimConfig cfg = file.sim;
  cfg.horizon = 200;
  const auto result = runResolution(file.scenario, cfg);
  const auto& rep = result.report;
  REQUIRE(rep.t_phase2.has_value());
  REQUIRE(rep.t_phase3.has_value());
  REQUIRE(rep.t_done.has_value());
  CHECK(*rep.t_phase2 < *rep.t_phase3);
  CHECK(*rep.t_phase3 < *rep.t_done);
  CHECK(rep.min_distance >= file.scenario.safety.d_s - 1e-6);
  for (double e : rep.final_goal_errors) CHECK(e <= 1e-3);
  CHECK(rep.phase3_monotone);
  CHECK(rep.phase2_max_distance_error <= 1e-3);
  CHECK(rep.phase2_centroid_drift <= 1e-6);
  REQUIRE(rep.phase3_closed_form_error.has_value());
  CHECK(*rep.phase3_closed_form_error <= 1e-3);
  CHECK(rep.deadlock_events_after_phase2 == 0);
  CHECK(result.trace.eventsOf(EventKind::Done).size() == 1);
}

TEST_CASE("phase 3 stays on the goal axis after a tight alignment") {
  const auto file = generateCanonical(builtinS1());
  SimConfig cfg = file.sim;
  cfg.horizon = 200;
  ResolutionParams params;
  params.eps_theta = 1e-6;
  params.rotation_gain = 1.0;
  params.distance_gain = 1.0;
  const auto rep = runResolution(file.scenario, cfg, params).report;
  REQUIRE(rep.phase3_axis_offset.has_value());
  CHECK(*rep.phase3_axis_offset <= 1e-6);
  CHECK(rep.phase2_max_distance_error <= 1e-3);
  for (double e : rep.final_goal_errors) CHECK(e <= 1e-3);
}

TEST_CASE("S2 resolves end to end") {
  const auto file = generateCanonical(builtinS2());
  SimConfig cfg = file.sim;
  cfg.horizon = 100;
  const auto rep = runResolution(file.scenario, cfg).report;
  REQUIRE(rep.t_done.has_value());
  CHECK(rep.min_distance >= file.scenario.safety.d_s - 1e-6);
  for (double e : rep.final_goal_errors) CHECK(e <= 1e-3);
  CHECK(rep.phase3_monotone);
  CHECK(rep.phase2_max_distance_error <= 1e-3);
  CHECK(rep.phase2_centroid_drift <= 1e-6);
  CHECK(rep.deadlock_events_after_phase2 == 0);
  CHECK_FALSE(rep.phase3_closed_form_error.has_value());
}
