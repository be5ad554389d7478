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

#include "cbfdl/simulator.hpp"

namespace cbfdl {

inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kDistanceFile = "distances.csv";
inline constexpr const char* kEventFile = "events.csv";

/// Formats with 17 significant digits, enough to round-trip any double.
std::string formatReal(double value);

/// Writes trace.csv, distances.csv and events.csv into `dir` (created if
/// missing). Throws Error(Io).
void exportTrace(const SimTrace& trace, const std::filesystem::path& dir);

/// Reads back a directory written by exportTrace.
SimTrace importTrace(const std::filesystem::path& dir);

}  // namespace cbfdl
