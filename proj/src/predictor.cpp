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

#include "cbfdl/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "cbfdl/error.hpp"

namespace cbfdl {
namespace {

constexpr int kBisectionIterations = 200;

double criticalDistance(double drive, const SafetyParams& safety) {
  // Positive root of -(gamma/4) D^2 + drive D + (gamma/4) d_s^2.
  const double x = 2.0 * drive / safety.gamma;
  return x + std::sqrt(x * x + safety.d_s * safety.d_s);
}

/// Bisection for a sign change of f on [lo, hi] with f(lo) > 0 >= f(hi).
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  for (int it = 0; it < kBisectionIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = f(mid);
    if (std::abs(v) <= tol && hi - lo <= 1e-15 * std::max(1.0, hi)) return mid;
    if (v > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 0.0) break;
  }
  const double flo = f(lo);
  const double fhi = f(hi);
  return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

double horizonFor(double minGain) { return 20.0 / minGain; }

double crossingTime(const std::function<double(double)>& gap, double tMax, const char* what) {
  if (!(gap(0.0) > 0.0)) {
    throw Error(ErrorKind::NoCrossing,
                std::string(what) + ": distance already at or below the critical distance at t=0");
  }
  if (!(gap(tMax) < 0.0)) {
    throw Error(ErrorKind::NoCrossing, std::string(what) + ": no crossing before T_max");
  }
  return bisect(gap, 0.0, tMax, 1e-12);
}

void requirePositive(double v, const char* name) {
  if (!(std::isfinite(v) && v > 0.0)) {
    throw Error(ErrorKind::PreconditionViolated, std::string(name) + " must be positive");
  }
}

double rk4Step(const std::function<double(double, double)>& f, double t, double y, double h) {
  const double k1 = f(t, y);
  const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const double k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Phase2Setup {
  double d_t1;
  double k_follow;
  double g_follow;
  std::function<double(double, double)> rhs;
};

Phase2Setup phase2Setup(const TwoRobotCanonical& c, double t1) {
  const int lead = firstActiveRobot(c);
  const double kl = lead == 1 ? c.k_p1 : c.k_p2;
  const double gl = lead == 1 ? c.d_g1 : c.d_g2;
  const double kf = lead == 1 ? c.k_p2 : c.k_p1;
  const double gf = lead == 1 ? c.d_g2 : c.d_g1;
  const double gamma = c.safety.gamma;
  const double ds2 = c.safety.d_s * c.safety.d_s;
  return {betaPlusTimed(gl, kl, t1, c.safety), kf, gf, [=](double t, double d) {
            return -gamma * (d * d - ds2) / (4.0 * d) - kf * gf * std::exp(-kf * t);
          }};
}

}  // namespace

void TwoRobotCanonical::validate() const {
  requirePositive(d_init, "d_init");
  requirePositive(k_p1, "k_p1");
  requirePositive(k_p2, "k_p2");
  safety.validate();
  if (!(d_g1 > d_init)) throw Error(ErrorKind::PreconditionViolated, "requires d_g1 > d_init");
  if (!(d_g2 > d_init)) throw Error(ErrorKind::PreconditionViolated, "requires d_g2 > d_init");
  if (!(d_init > safety.d_s)) throw Error(ErrorKind::PreconditionViolated, "requires d_init > d_s");
  const double b1 = betaPlusStatic(d_g1, k_p1, safety);
  const double b2 = betaPlusStatic(d_g2, k_p2, safety);
  if (!(d_init > std::max(b1, b2))) {
    throw Error(ErrorKind::PreconditionViolated,
                "requires d_init > beta_+ (d_init=" + std::to_string(d_init) +
                    ", beta1_+=" + std::to_string(b1) + ", beta2_+=" + std::to_string(b2) + ")");
  }
}

void ThreeRobotCanonical::validate() const {
  requirePositive(d_init, "d_init");
  requirePositive(d_g, "d_g");
  requirePositive(k_p, "k_p");
  safety.validate();
  if (!(kSqrt3 * d_g > d_init)) {
    throw Error(ErrorKind::PreconditionViolated, "requires sqrt(3) d_g > d_init");
  }
  if (!(d_init > safety.d_s)) throw Error(ErrorKind::PreconditionViolated, "requires d_init > d_s");
  const double b = threeRobotBetaPlusStatic(*this);
  if (!(d_init > b)) {
    throw Error(ErrorKind::PreconditionViolated,
                "requires d_init > beta_+ (d_init=" + std::to_string(d_init) +
                    ", beta_+=" + std::to_string(b) + ")");
  }
}

double betaPlusStatic(double d_g, double k_p, const SafetyParams& safety) {
  return criticalDistance(d_g * k_p, safety);
}

double betaPlusTimed(double d_g, double k_p, double t, const SafetyParams& safety) {
  return criticalDistance(d_g * k_p * std::exp(-k_p * t), safety);
}

double nominalDistanceTwo(const TwoRobotCanonical& c, double t) {
  return c.d_g1 * std::exp(-c.k_p1 * t) + c.d_g2 * std::exp(-c.k_p2 * t) - c.offset();
}

namespace {

double crossingFor(const TwoRobotCanonical& c, int robot) {
  const double dg = robot == 1 ? c.d_g1 : c.d_g2;
  const double k = robot == 1 ? c.k_p1 : c.k_p2;
  return crossingTime(
      [&](double t) { return nominalDistanceTwo(c, t) - betaPlusTimed(dg, k, t, c.safety); },
      horizonFor(std::min(c.k_p1, c.k_p2)), "phase 1");
}

}  // namespace

int firstActiveRobot(const TwoRobotCanonical& c) {
  return crossingFor(c, 1) <= crossingFor(c, 2) ? 1 : 2;
}

double findT1(const TwoRobotCanonical& c) {
  return std::min(crossingFor(c, 1), crossingFor(c, 2));
}

double phase2Distance(const TwoRobotCanonical& c, double t1, double t) {
  if (t < t1) throw Error(ErrorKind::InvalidInput, "phase-2 distance needs t >= t1");
  const auto s = phase2Setup(c, t1);
  const double hMax = 1e-4 / c.safety.gamma;
  const auto steps = static_cast<long>(std::ceil((t - t1) / hMax));
  if (steps == 0) return s.d_t1;
  const double h = (t - t1) / static_cast<double>(steps);
  double d = s.d_t1;
  for (long k = 0; k < steps; ++k) d = rk4Step(s.rhs, t1 + k * h, d, h);
  return d;
}

double findT2(const TwoRobotCanonical& c, double t1) {
  const auto s = phase2Setup(c, t1);
  auto gap = [&](double t, double d) { return d - betaPlusTimed(s.g_follow, s.k_follow, t, c.safety); };
  if (gap(t1, s.d_t1) <= 1e-10) return t1;

  const double h = 1e-4 / c.safety.gamma;
  const double tMax = t1 + horizonFor(std::min(c.k_p1, c.k_p2));
  double t = t1;
  double d = s.d_t1;
  while (t < tMax) {
    const double dNext = rk4Step(s.rhs, t, d, h);
    if (dNext <= c.safety.d_s) break;
    if (gap(t + h, dNext) <= 0.0) {
      // Refine inside [t, t + h] with single rk4 sub-steps from the bracket start.
      const double t0 = t;
      const double d0 = d;
      return bisect([&](double tau) { return gap(tau, rk4Step(s.rhs, t0, d0, tau - t0)); }, t0,
                    t0 + h, 1e-12);
    }
    t += h;
    d = dNext;
  }
  throw Error(ErrorKind::NoCrossing, "phase 2: follower constraint never activates");
}

double phase3ClosedForm(double d_t2, double t2, double t, const SafetyParams& safety) {
  const double ds2 = safety.d_s * safety.d_s;
  return std::sqrt((d_t2 * d_t2 - ds2) * std::exp(-safety.gamma * (t - t2)) + ds2);
}

PhaseTimeline predictTwoRobot(const TwoRobotCanonical& c) {
  c.validate();
  PhaseTimeline p;
  p.t1 = findT1(c);
  p.first_active = firstActiveRobot(c);
  p.d_at_t1 = nominalDistanceTwo(c, p.t1);
  p.t2 = findT2(c, p.t1);
  p.d_at_t2 = phase2Distance(c, p.t1, *p.t2);
  p.limit_distance = c.safety.d_s;
  return p;
}

double threeRobotBetaPlusStatic(const ThreeRobotCanonical& c) {
  return criticalDistance(0.5 * kSqrt3 * c.d_g * c.k_p, c.safety);
}

double threeRobotBetaPlusTimed(const ThreeRobotCanonical& c, double t) {
  return criticalDistance(0.5 * kSqrt3 * c.d_g * c.k_p * std::exp(-c.k_p * t), c.safety);
}

double threeRobotNominalDistance(const ThreeRobotCanonical& c, double t) {
  return (c.d_init - kSqrt3 * c.d_g) + kSqrt3 * c.d_g * std::exp(-c.k_p * t);
}

double threeRobotFindT1(const ThreeRobotCanonical& c) {
  return crossingTime(
      [&](double t) { return threeRobotNominalDistance(c, t) - threeRobotBetaPlusTimed(c, t); },
      horizonFor(c.k_p), "phase 1");
}

double threeRobotPhase2ClosedForm(double d_t1, double t1, double t, const SafetyParams& safety) {
  return phase3ClosedForm(d_t1, t1, t, safety);
}

PhaseTimeline predictThreeRobot(const ThreeRobotCanonical& c) {
  c.validate();
  PhaseTimeline p;
  p.t1 = threeRobotFindT1(c);
  p.d_at_t1 = threeRobotNominalDistance(c, p.t1);
  p.limit_distance = c.safety.d_s;
  return p;
}

}  // namespace cbfdl
