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

#include "cbfdl/geometry.hpp"

#include "cbfdl/error.hpp"

namespace cbfdl {

const char* toString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::InfeasibleQp: return "infeasible-qp";
    case ErrorKind::NoCrossing: return "no-crossing";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::AssumptionViolated: return "assumption-violated";
    case ErrorKind::NotCategoryA: return "not-category-A";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Io: return "io-error";
    case ErrorKind::Validation: return "validation-error";
    case ErrorKind::PreconditionViolated: return "precondition-violated";
  }
  return "unknown";
}

Vec2 unitVector(double angle) { return {std::cos(angle), std::sin(angle)}; }

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

double wrapAngle(double angle) {
  double w = std::fmod(angle + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  return w - kPi;
}

}  // namespace cbfdl
