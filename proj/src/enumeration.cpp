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

#include "cbfdl/enumeration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "cbfdl/error.hpp"

namespace cbfdl {
namespace {

constexpr int kMaxIterations = 4000;
constexpr int kPolishIterations = 20000;
constexpr double kAcceptObjective = 1e-12;
constexpr double kPolishObjective = 1e-26;
constexpr double kPolishMargin = 2.0 * kNonEdgeMargin;
constexpr double kStallGradient = 1e-14;

std::vector<std::pair<int, int>> allPairs(int n) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

/// Unit-scale problem: edges want distance 1, non-edges at least 1 + margin.
struct Penalty {
  int n;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::pair<int, int>> non_edges;
  double margin;

  double value(const std::vector<Vec2>& p, std::vector<Vec2>* grad) const {
    if (grad) grad->assign(p.size(), Vec2{});
    double f = 0.0;
    auto term = [&](int i, int j, double target, bool hinge) {
      const Vec2 d = p[i] - p[j];
      const double r = d.norm();
      const double e = r - target;
      if (hinge && e >= 0.0) return;
      f += e * e;
      if (grad && r > 0.0) {
        const Vec2 g = d * (2.0 * e / r);
        (*grad)[i] += g;
        (*grad)[j] -= g;
      }
    };
    for (const auto& [i, j] : edges) term(i, j, 1.0, false);
    for (const auto& [i, j] : non_edges) term(i, j, 1.0 + margin, true);
    return f;
  }
};

double gradNormSq(const std::vector<Vec2>& g) {
  double s = 0.0;
  for (const auto& v : g) s += v.squaredNorm();
  return s;
}

/// Gradient descent with Armijo backtracking until f <= target, stall or budget.
double descend(const Penalty& pen, std::vector<Vec2>& p, double target, int maxIter) {
  std::vector<Vec2> grad;
  std::vector<Vec2> trial(p.size());
  double f = pen.value(p, &grad);
  double step = 0.1;
  for (int it = 0; it < maxIter && f > target; ++it) {
    const double g2 = gradNormSq(grad);
    if (g2 < kStallGradient * kStallGradient) break;
    step = std::min(step * 2.0, 1.0);
    double fTrial = f;
    while (step > 1e-20) {
      for (std::size_t k = 0; k < p.size(); ++k) trial[k] = p[k] - grad[k] * step;
      fTrial = pen.value(trial, nullptr);
      if (fTrial <= f - 1e-4 * step * g2) break;
      step *= 0.5;
    }
    if (step <= 1e-20) break;
    p = trial;
    f = pen.value(p, &grad);
  }
  return f;
}

}  // namespace

bool ContactGraph::hasEdge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::find(edges.begin(), edges.end(), std::make_pair(i, j)) != edges.end();
}

int ContactGraph::degree(int v) const {
  int d = 0;
  for (const auto& [i, j] : edges) d += (i == v) + (j == v);
  return d;
}

int ContactGraph::minDegree() const {
  int m = n > 0 ? degree(0) : 0;
  for (int v = 1; v < n; ++v) m = std::min(m, degree(v));
  return m;
}

int ContactGraph::maxDegree() const {
  int m = 0;
  for (int v = 0; v < n; ++v) m = std::max(m, degree(v));
  return m;
}

std::string ContactGraph::edgeList() const {
  if (edges.empty()) return "-";
  std::string s;
  for (const auto& [i, j] : edges) {
    if (!s.empty()) s += ';';
    s += std::to_string(i + 1) + "-" + std::to_string(j + 1);
  }
  return s;
}

void ContactGraph::validate() const {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "graph needs at least one vertex");
  std::set<std::pair<int, int>> seen;
  for (auto [i, j] : edges) {
    if (i == j) throw Error(ErrorKind::InvalidInput, "self-loop at vertex " + std::to_string(i + 1));
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw Error(ErrorKind::InvalidInput, "edge endpoint out of range");
    }
    if (i > j) std::swap(i, j);
    if (!seen.insert({i, j}).second) throw Error(ErrorKind::InvalidInput, "duplicate edge");
  }
}

ContactGraph permuted(const ContactGraph& g, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != g.n) {
    throw Error(ErrorKind::InvalidInput, "permutation size does not match the graph");
  }
  ContactGraph out{g.n, {}};
  for (const auto& [i, j] : g.edges) {
    out.edges.emplace_back(std::min(perm[i], perm[j]), std::max(perm[i], perm[j]));
  }
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

std::uint64_t upperBound(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "upperBound needs n >= 1");
  if (n > 11) throw Error(ErrorKind::InvalidInput, "upperBound overflows 64 bits for n > 11");
  return std::uint64_t{1} << (n * (n - 1) / 2);
}

std::uint64_t lowerBound(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "lowerBound needs n >= 1");
  if (n <= 2) return 1;
  if (n > 20) throw Error(ErrorKind::InvalidInput, "lowerBound overflows 64 bits for n > 20");
  std::uint64_t f = 1;
  for (int k = 2; k <= n - 1; ++k) f *= static_cast<std::uint64_t>(k);
  return (static_cast<std::uint64_t>(n + 1) * f) / 2;
}

std::vector<ContactGraph> enumerateCandidates(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "enumerateCandidates needs n >= 1");
  if (n > 6) throw Error(ErrorKind::InvalidInput, "enumerateCandidates is limited to n <= 6");
  const auto pairs = allPairs(n);
  std::vector<ContactGraph> out;
  if (n == 1) {
    out.push_back(ContactGraph{1, {}});
    return out;
  }
  const std::uint64_t total = std::uint64_t{1} << pairs.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    ContactGraph g{n, {}};
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (mask & (std::uint64_t{1} << k)) g.edges.push_back(pairs[k]);
    }
    if (g.minDegree() >= 1) out.push_back(std::move(g));
  }
  return out;
}

bool verifyEmbedding(const ContactGraph& g, const std::vector<Vec2>& positions, double d_s) {
  if (static_cast<int>(positions.size()) != g.n) return false;
  for (const auto& [i, j] : allPairs(g.n)) {
    const double d = (positions[i] - positions[j]).norm();
    if (g.hasEdge(i, j)) {
      if (!(std::abs(d - d_s) <= kEdgeTol)) return false;
    } else if (!(d >= d_s * (1.0 + kNonEdgeMargin))) {
      return false;
    }
  }
  return true;
}

EmbeddingResult checkRealizability(const ContactGraph& g, const SafetyParams& safety,
                                   const RealizabilityOptions& options, std::uint64_t stream) {
  g.validate();
  safety.validate();
  if (options.restarts < 1) throw Error(ErrorKind::InvalidInput, "restarts must be >= 1");
  const double ds = safety.d_s;

  Penalty pen{g.n, {}, {}, kNonEdgeMargin};
  for (const auto& pr : allPairs(g.n)) {
    (g.hasEdge(pr.first, pr.second) ? pen.edges : pen.non_edges).push_back(pr);
  }
  Penalty polish = pen;
  polish.margin = kPolishMargin;

  std::seed_seq seq{options.seed, stream};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> box(-static_cast<double>(g.n), static_cast<double>(g.n));

  EmbeddingResult result;
  result.residual = std::numeric_limits<double>::infinity();
  std::vector<Vec2> p(g.n);
  for (int r = 0; r < options.restarts; ++r) {
    for (auto& v : p) v = Vec2{box(rng), box(rng)};
    double f = descend(pen, p, kAcceptObjective, kMaxIterations);
    result.restarts_used = r + 1;
    result.residual = std::min(result.residual, f * ds * ds);
    if (f > kAcceptObjective) continue;
    descend(polish, p, kPolishObjective, kPolishIterations);
    std::vector<Vec2> scaled(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) scaled[k] = p[k] * ds;
    if (!verifyEmbedding(g, scaled, ds)) continue;
    result.realizable = true;
    result.residual = pen.value(p, nullptr) * ds * ds;
    result.positions = std::move(scaled);
    return result;
  }
  return result;
}

EnumerationReport countAdmissible(int n, const SafetyParams& safety,
                                  const RealizabilityOptions& options) {
  if (n > 5) throw Error(ErrorKind::InvalidInput, "countAdmissible is limited to n <= 5");
  EnumerationReport rep;
  rep.n = n;
  rep.upper_bound = upperBound(n);
  rep.lower_bound = lowerBound(n);
  rep.seed = options.seed;
  rep.restarts = options.restarts;
  const auto graphs = enumerateCandidates(n);
  rep.candidates = graphs.size();
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    GraphVerdict v;
    v.graph = graphs[k];
    v.embedding = checkRealizability(graphs[k], safety, options, k);
    v.degree_ok = n == 1 || v.graph.maxDegree() <= 2;
    rep.realizable += v.embedding.realizable;
    rep.admissible += v.admissible();
    rep.verdicts.push_back(std::move(v));
  }
  return rep;
}

std::string formatReport(const EnumerationReport& report) {
  std::ostringstream os;
  os << "edge_list,realizable,residual,restarts_used,admissible\n";
  char buf[64];
  for (const auto& v : report.verdicts) {
    std::snprintf(buf, sizeof buf, "%.3e", v.embedding.residual);
    os << v.graph.edgeList() << ',' << (v.embedding.realizable ? "yes" : "no") << ',' << buf << ','
       << v.embedding.restarts_used << ',' << (v.admissible() ? "yes" : "no") << '\n';
  }
  os << "n=" << report.n << " candidates=" << report.candidates
     << " realizable=" << report.realizable << " seed=" << report.seed
     << " restarts=" << report.restarts << '\n';
  os << "admissible=" << report.admissible << " lower=" << report.lower_bound
     << " upper=" << report.upper_bound << '\n';
  return os.str();
}

}  // namespace cbfdl
