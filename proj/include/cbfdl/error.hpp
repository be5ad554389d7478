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

#include <stdexcept>
#include <string>

namespace cbfdl {

enum class ErrorKind {
  DegenerateGeometry,
  InfeasibleQp,
  NoCrossing,
  InvalidInput,
  AssumptionViolated,
  NotCategoryA,
  NonConvergence,
  Io,
  Validation,
  PreconditionViolated,
};

const char* toString(ErrorKind kind);

/// Library-wide exception. `kind()` lets callers (and the CLI exit-code
/// mapping) distinguish bad input from runtime failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cbfdl
