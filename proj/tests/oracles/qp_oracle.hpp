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

// Geometric reference for the 2-D CBF-QP: the feasible set is clipped out of
// a large box as a convex polygon and the nominal control is projected onto
// it edge by edge. Shares no code with the active-set solver.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "cbfdl/geometry.hpp"
#include "cbfdl/qp.hpp"

namespace oracle {

using cbfdl::Vec2;

struct HalfPlane {
  Vec2 a;
  double b;
};

inline std::vector<Vec2> clip(const std::vector<Vec2>& poly, const HalfPlane& h) {
  std::vector<Vec2> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    const double fp = h.a.dot(p) - h.b;
    const double fq = h.a.dot(q) - h.b;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      const double s = fp / (fp - fq);
      out.push_back(p + (q - p) * s);
    }
  }
  return out;
}

inline Vec2 closestOnSegment(const Vec2& p, const Vec2& q, const Vec2& x) {
  const Vec2 d = q - p;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return p;
  const double s = std::clamp((x - p).dot(d) / len2, 0.0, 1.0);
  return p + d * s;
}

struct Projection {
  Vec2 u;
  double objective;
  std::vector<Vec2> polygon;
  double box;
};

/// nullopt when the clipped polygon is empty.
inline std::optional<Projection> project(const Vec2& nominal,
                                         const std::vector<cbfdl::ConstraintRow>& rows) {
  double scale = nominal.norm() + 1.0;
  for (const auto& r : rows) scale = std::max(scale, std::abs(r.b) / r.a.norm() + 1.0);
  const double box = 8.0 * scale;
  std::vector<Vec2> poly{{-box, -box}, {box, -box}, {box, box}, {-box, box}};
  bool inside = true;
  for (const auto& r : rows) {
    poly = clip(poly, {r.a, r.b});
    inside = inside && r.a.dot(nominal) <= r.b;
    if (poly.empty()) return std::nullopt;
  }
  if (inside) return Projection{nominal, 0.0, poly, box};
  Projection best{{}, std::numeric_limits<double>::infinity(), poly, box};
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 c = closestOnSegment(poly[i], poly[(i + 1) % poly.size()], nominal);
    const double f = (c - nominal).squaredNorm();
    if (f < best.objective) {
      best.objective = f;
      best.u = c;
    }
  }
  return best;
}

/// Smallest objective over a uniform grid of feasible points covering the
/// polygon's bounding box; a sanity bound that the projection must not lose to.
inline double gridMinimum(const Vec2& nominal, const std::vector<cbfdl::ConstraintRow>& rows,
                          const std::vector<Vec2>& polygon, int steps) {
  Vec2 lo = polygon.front();
  Vec2 hi = polygon.front();
  for (const auto& p : polygon) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      const Vec2 u{lo.x + (hi.x - lo.x) * i / steps, lo.y + (hi.y - lo.y) * j / steps};
      bool ok = true;
      for (const auto& r : rows) ok = ok && r.a.dot(u) <= r.b;
      if (ok) best = std::min(best, (u - nominal).squaredNorm());
    }
  }
  return best;
}

/// Brute force: a (2 m + 1)^2 grid around the incumbent, recentred on
/// improvement and halved otherwise. Infeasible grid points are also snapped
/// onto each violated row's boundary line, which lets the search slide along
/// tilted edges instead of stalling against them. Starts from u = 0, feasible
/// whenever every pair is outside the safety distance.
inline Vec2 gridRefine(const Vec2& nominal, const std::vector<cbfdl::ConstraintRow>& rows,
                       int m = 20, double minWidth = 1e-13) {
  auto feasible = [&](const Vec2& u) {
    for (const auto& r : rows) {
      if (r.a.dot(u) > r.b + 1e-13 * (1.0 + std::abs(r.b))) return false;
    }
    return true;
  };
  Vec2 best{0.0, 0.0};
  double bestObj = (best - nominal).squaredNorm();
  double w = nominal.norm() + 1.0;
  for (int iter = 0; iter < 5000 && w > minWidth; ++iter) {
    Vec2 candidate = best;
    double candidateObj = bestObj;
    auto consider = [&](const Vec2& u) {
      const double obj = (u - nominal).squaredNorm();
      if (obj < candidateObj && feasible(u)) {
        candidate = u;
        candidateObj = obj;
      }
    };
    for (int i = -m; i <= m; ++i) {
      for (int j = -m; j <= m; ++j) {
        const Vec2 u{best.x + w * i / m, best.y + w * j / m};
        if ((u - nominal).squaredNorm() >= candidateObj) continue;
        if (feasible(u)) {
          consider(u);
          continue;
        }
        for (const auto& r : rows) {
          const double excess = r.a.dot(u) - r.b;
          if (excess > 0.0) consider(u - r.a * (excess / r.a.squaredNorm()));
        }
      }
    }
    if (candidateObj < bestObj) {
      best = candidate;
      bestObj = candidateObj;
    } else {
      w *= 0.5;
    }
  }
  return best;
}

}  // namespace oracle
