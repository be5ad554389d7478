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

#include <filesystem>
#include <string>

#include "cbfdl/deadlock.hpp"
#include "cbfdl/model.hpp"
#include "cbfdl/predictor.hpp"
#include "cbfdl/simulator.hpp"

namespace cbfdl {

inline constexpr int kSchemaVersion = 1;

/// A validated scenario document: robots and safety, integration settings and
/// detection thresholds.
struct ScenarioFile {
  Scenario scenario;
  SimConfig sim;
  DeadlockThresholds detection;
};

/// Strict parse; unknown keys are rejected. Errors are Error(Validation) and
/// start with the offending field path, e.g. "safety.gamma: missing".
ScenarioFile parseScenario(const std::string& text);
ScenarioFile loadScenario(const std::filesystem::path& path);
std::string emitScenario(const ScenarioFile& file);
void saveScenario(const ScenarioFile& file, const std::filesystem::path& path);

enum class CanonicalKind { TwoRobotCollinear, ThreeRobotAntipodal };

const char* toString(CanonicalKind kind);

struct CanonicalSpec {
  CanonicalKind kind = CanonicalKind::TwoRobotCollinear;
  TwoRobotCanonical two;
  ThreeRobotCanonical three;
};

/// Desk scenarios: S1 is the two-robot collinear case, S2 the three-robot one.
CanonicalSpec builtinS1();
CanonicalSpec builtinS2();

CanonicalSpec parseCanonical(const std::string& text);
/// Accepts "S1", "S2" or a path to a canonical JSON document.
CanonicalSpec loadCanonical(const std::string& nameOrPath);
std::string emitCanonical(const CanonicalSpec& spec);

Scenario twoRobotScenario(const TwoRobotCanonical& c);
Scenario threeRobotScenario(const ThreeRobotCanonical& c);

/// Lays out positions and goals. Throws Error(PreconditionViolated) naming
/// the violated inequality.
ScenarioFile generateCanonical(const CanonicalSpec& spec);

/// "S1"/"S2", a canonical spec document (has "kind") or a scenario document.
ScenarioFile loadScenarioOrCanonical(const std::string& nameOrPath);

}  // namespace cbfdl
