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

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbfdl/geometry.hpp"
#include "cbfdl/model.hpp"

namespace cbfdl {

/// Labeled simple graph; vertices are 0-based, edges stored as sorted (i < j) pairs.
struct ContactGraph {
  int n = 1;
  std::vector<std::pair<int, int>> edges;

  bool hasEdge(int i, int j) const;
  int degree(int v) const;
  int minDegree() const;
  int maxDegree() const;
  /// 1-based, e.g. "1-2;2-3". Empty graph prints as "-".
  std::string edgeList() const;
  /// Throws Error(InvalidInput) on self-loops, duplicates or out-of-range ids.
  void validate() const;
};

/// Relabels vertex v as perm[v].
ContactGraph permuted(const ContactGraph& g, const std::vector<int>& perm);

struct EmbeddingResult {
  bool realizable = false;
  std::optional<std::vector<Vec2>> positions;
  double residual = 0.0;
  int restarts_used = 0;
};

struct RealizabilityOptions {
  int restarts = 200;
  std::uint64_t seed = 42;
};

inline constexpr double kNonEdgeMargin = 1e-6;
inline constexpr double kEdgeTol = 1e-6;

struct GraphVerdict {
  ContactGraph graph;
  EmbeddingResult embedding;
  bool degree_ok = false;  // every vertex has one or two contacts
  bool admissible() const { return degree_ok && embedding.realizable; }
};

struct EnumerationReport {
  int n = 0;
  std::uint64_t candidates = 0;
  std::uint64_t admissible = 0;
  std::uint64_t realizable = 0;  // geometric verdict alone, no degree cap
  std::uint64_t upper_bound = 0;
  std::uint64_t lower_bound = 0;
  std::uint64_t seed = 0;
  int restarts = 0;
  std::vector<GraphVerdict> verdicts;
};

/// 2^(n(n-1)/2). Throws Error(InvalidInput) for n < 1 or n > 11.
std::uint64_t upperBound(int n);

/// (n+1)(n-1)!/2 for n >= 3, 1 for n in {1, 2}.
std::uint64_t lowerBound(int n);

/// Every labeled simple graph on n vertices with min degree >= 1 (the empty
/// graph for n = 1), in increasing edge-mask order. Guarded to n <= 6.
std::vector<ContactGraph> enumerateCandidates(int n);

/// Multistart penalised least squares. `stream` selects the per-graph RNG stream.
EmbeddingResult checkRealizability(const ContactGraph& g, const SafetyParams& safety,
                                   const RealizabilityOptions& options = {},
                                   std::uint64_t stream = 0);

/// Edge distances within kEdgeTol of d_s and non-edges at least d_s (1 + kNonEdgeMargin).
bool verifyEmbedding(const ContactGraph& g, const std::vector<Vec2>& positions, double d_s);

/// Guarded to n <= 5.
EnumerationReport countAdmissible(int n, const SafetyParams& safety,
                                  const RealizabilityOptions& options = {});

std::string formatReport(const EnumerationReport& report);

}  // namespace cbfdl
