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

#include "cbfdl/error.hpp"
#include "cbfdl/geometry.hpp"
#include "cbfdl/model.hpp"

using namespace cbfdl;

TEST_CASE("wrapAngle maps into [-pi, pi)") {
  CHECK(wrapAngle(0.0) == 0.0);
  CHECK(wrapAngle(kPi) == doctest::Approx(-kPi));
  CHECK(wrapAngle(-kPi) == doctest::Approx(-kPi));
  CHECK(wrapAngle(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
  CHECK(wrapAngle(-3.0 * kPi / 2.0) == doctest::Approx(kPi / 2.0));
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double w = wrapAngle(a);
    CHECK(w >= -kPi);
    CHECK(w < kPi);
    CHECK(std::remainder(a - w, 2.0 * kPi) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("rotate and perp agree on a quarter turn") {
  const Vec2 v{0.3, -1.7};
  const Vec2 r = rotate(v, kPi / 2.0);
  CHECK(r.x == doctest::Approx(v.perp().x));
  CHECK(r.y == doctest::Approx(v.perp().y));
  CHECK(unitVector(kPi / 3.0).norm() == doctest::Approx(1.0));
}

TEST_CASE("pairwise safety and constraint coefficients") {
  const SafetyParams s{0.5, 2.0};
  const Vec2 pi{0.0, 0.0};
  const Vec2 pj{1.0, 0.0};
  CHECK(pairwiseSafety(pi, pj, s) == doctest::Approx(0.75));
  const auto c = constraintCoefficients(pi, pj, s);
  CHECK(c.a.x == doctest::Approx(1.0));
  CHECK(c.a.y == doctest::Approx(0.0));
  CHECK(c.b == doctest::Approx(0.25 * 2.0 * 0.75));
  // Swapping roles flips a and keeps b.
  const auto d = constraintCoefficients(pj, pi, s);
  CHECK(d.a.x == doctest::Approx(-1.0));
  CHECK(d.b == doctest::Approx(c.b));
}

TEST_CASE("nominal control is proportional to the goal error") {
  const RobotState r{1, {1.0, 2.0}, {4.0, -2.0}, 0.5};
  const Vec2 u = nominalControl(r);
  CHECK(u.x == doctest::Approx(1.5));
  CHECK(u.y == doctest::Approx(-2.0));
}

TEST_CASE("minPairwiseDistance") {
  const std::vector<Vec2> p{{0, 0}, {3, 4}, {0, 1}};
  CHECK(minPairwiseDistance(p) == doctest::Approx(1.0));
  CHECK(std::isinf(minPairwiseDistance(std::vector<Vec2>{{0, 0}})));
}

TEST_CASE("scenario validation") {
  Scenario s;
  s.safety = {0.5, 1.0};
  s.robots = {{1, {0, 0}, {1, 0}, 1.0}, {2, {2, 0}, {0, 0}, 1.0}};
  CHECK_NOTHROW(s.validate());

  auto expectValidation = [](const Scenario& bad) {
    try {
      bad.validate();
      FAIL("expected a validation error");
    } catch (const Error& e) {
      CHECK((e.kind() == ErrorKind::Validation));
    }
  };
  Scenario dup = s;
  dup.robots[1].id = 1;
  expectValidation(dup);
  Scenario gain = s;
  gain.robots[0].gain = 0.0;
  expectValidation(gain);
  Scenario close = s;
  close.robots[1].position = {0.4, 0.0};
  expectValidation(close);
  Scenario nan = s;
  nan.robots[0].goal.x = std::nan("");
  expectValidation(nan);
  Scenario badSafety = s;
  badSafety.safety.gamma = -1.0;
  CHECK_THROWS_AS(badSafety.validate(), Error);
}
